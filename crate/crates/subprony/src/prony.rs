//! Classical (single-grid) exponential analysis at a fixed stride:
//! order detection, eigenvalue extraction, coefficient solves and
//! amplitude-based term filtering.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::SamplingScheme;
use crate::scalar::Real;
use crate::sequence::Samples;

/// Eigenvalue backend for the stride analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Pencil,
    Esprit,
}

/// Default relative rank tolerance: loose when the data carry noise,
/// machine-level otherwise.
pub fn default_rank_tol<T: Real>(noisy: bool) -> T {
    if noisy {
        T::from_f64_lossy(1e-1)
    } else {
        T::from_f64_lossy(1e-10)
    }
}

/// Result of exponential analysis on one stride grid: positionally paired
/// eigenvalues `lambda_i^stride` and coefficients `alpha_i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrideAnalysis<T> {
    pub stride: i64,
    pub start: i64,
    pub n_detected: usize,
    pub eigenvalues: Vec<Complex<T>>,
    pub coefficients: Vec<Complex<T>>,
    pub rank_profile: Vec<T>,
}

/// Numerical rank of the rectangular `(M-N) x N` Hankel matrix built on the
/// given stride grid, with the supplied relative tolerance.
pub fn detect_order<T: Real>(
    source: &mut impl Samples<T>,
    scheme: &SamplingScheme<T>,
    start: i64,
    stride: i64,
    rel_tol: T,
) -> Result<linalg::RankEstimate<T>> {
    let cols = scheme.term_budget;
    let rows = scheme.base_samples - scheme.term_budget;
    let h = linalg::build_hankel(source, rows.max(cols), cols, start, stride)?;
    linalg::numerical_rank(&h, rel_tol)
}

/// Grid geometry for dominant-eigenvalue extraction: where the samples
/// live, how many the pencil may touch, and which base-grid row powers the
/// amplitude filter's Vandermonde uses.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ExtractionGrid {
    /// Absolute index of row power 0 (k rho for a shift batch).
    pub start: i64,
    pub stride: i64,
    /// Sample count available on this grid.
    pub samples: usize,
    /// Modeling order: how many eigenvalues (signal + noise terms) the
    /// structured solve carries before amplitude filtering.
    pub budget: usize,
    /// First usable row power (nonzero for negative shifts).
    pub power_offset: usize,
}

/// Extract the `n` dominant eigenvalues of a grid: the structured solve is
/// run at the grid's full modeling budget (so extra terms absorb the
/// noise), and when that yields more than `n` eigenvalues the `n` of
/// largest coefficient amplitude are kept. On exactly-representable data
/// whose rank falls below the budget, the solve falls back to the detected
/// rank.
pub(crate) fn extract_dominant<T: Real>(
    source: &mut impl Samples<T>,
    grid: &ExtractionGrid,
    n: usize,
    backend: Backend,
) -> Result<Vec<Complex<T>>> {
    let budget = grid.budget.max(n);
    let offset = grid.power_offset as i64;
    let lams = match run_extraction(source, grid, budget, budget, backend) {
        Ok(v) => v,
        Err(Error::OrderMismatch { detected, .. }) if detected >= n && detected < budget => {
            run_extraction(source, grid, detected, budget, backend)?
        }
        Err(e) => return Err(e),
    };
    if lams.len() <= n {
        return Ok(lams);
    }
    // Amplitude filter: least-squares coefficients over the whole grid.
    let v = linalg::build_vandermonde_from(&lams, grid.samples, grid.power_offset);
    let mut b = Vec::with_capacity(grid.samples);
    for j in 0..grid.samples {
        b.push(source.sample(grid.start + (offset + j as i64) * grid.stride)?);
    }
    let sol = linalg::solve_least_squares(&v, &b)?;
    let kept = largest_amplitude_indices(&sol.x, n);
    Ok(kept.into_iter().map(|i| lams[i]).collect())
}

/// Extract `n` eigenvalues `lambda_i^stride` from the stride grid with the
/// chosen backend.
///
/// The structured solve runs at the scheme's term budget N (the paper's
/// rectangular sizes), so asking for `n < N` on noisy data returns the `n`
/// dominant-amplitude eigenvalues of the N-term model rather than a
/// truncated solve.
pub fn extract_eigenvalues<T: Real>(
    source: &mut impl Samples<T>,
    scheme: &SamplingScheme<T>,
    n: usize,
    start: i64,
    stride: i64,
    backend: Backend,
) -> Result<Vec<Complex<T>>> {
    let grid = ExtractionGrid {
        start,
        stride,
        samples: scheme.base_samples,
        budget: scheme.term_budget,
        power_offset: 0,
    };
    extract_dominant(source, &grid, n, backend)
}

/// Least-squares Vandermonde solve pairing a coefficient with each input
/// eigenvalue (order preserved). `rows` right-hand-side samples
/// `f_{start + j stride}` are used.
pub fn extract_coefficients<T: Real>(
    eigenvalues: &[Complex<T>],
    source: &mut impl Samples<T>,
    scheme: &SamplingScheme<T>,
    rows: usize,
    start: i64,
    stride: i64,
) -> Result<linalg::LsSolution<T>> {
    let _ = scheme;
    if rows < eigenvalues.len() {
        return Err(Error::InvalidInput(format!(
            "coefficient solve needs rows >= {} eigenvalues, got {rows}",
            eigenvalues.len()
        )));
    }
    let v = linalg::build_vandermonde(eigenvalues, rows);
    let mut b = Vec::with_capacity(rows);
    for j in 0..rows {
        b.push(source.sample(start + j as i64 * stride)?);
    }
    linalg::solve_least_squares(&v, &b)
}

/// Keep the `keep` positionally-paired entries of largest `|alpha|`,
/// preserving the original order among the kept entries.
pub fn filter_by_amplitude<T: Real>(analysis: &StrideAnalysis<T>, keep: usize) -> StrideAnalysis<T> {
    let kept = largest_amplitude_indices(&analysis.coefficients, keep);
    StrideAnalysis {
        stride: analysis.stride,
        start: analysis.start,
        n_detected: analysis.n_detected,
        eigenvalues: kept.iter().map(|&i| analysis.eigenvalues[i]).collect(),
        coefficients: kept.iter().map(|&i| analysis.coefficients[i]).collect(),
        rank_profile: analysis.rank_profile.clone(),
    }
}

/// Indices of the `keep` largest-magnitude coefficients, in ascending
/// original order. Ties resolve toward the earlier position.
pub(crate) fn largest_amplitude_indices<T: Real>(coeffs: &[Complex<T>], keep: usize) -> Vec<usize> {
    let keep = keep.min(coeffs.len());
    let mut order: Vec<usize> = (0..coeffs.len()).collect();
    order.sort_by(|&a, &b| {
        coeffs[b]
            .norm()
            .partial_cmp(&coeffs[a].norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = order[..keep].to_vec();
    kept.sort_unstable();
    kept
}

/// Full stride analysis: detect (or accept) the order, extract eigenvalues
/// and coefficients. When `n` is `None` the numerical rank decides; when the
/// requested order exceeds the exactly-representable rank the extraction
/// falls back to the detected rank.
pub fn analyze_stride<T: Real>(
    source: &mut impl Samples<T>,
    scheme: &SamplingScheme<T>,
    start: i64,
    stride: i64,
    backend: Backend,
    rel_tol: T,
    n: Option<usize>,
) -> Result<StrideAnalysis<T>> {
    let estimate = detect_order(source, scheme, start, stride, rel_tol)?;
    let want = n.unwrap_or(estimate.rank).max(1);
    let eigenvalues = match extract_eigenvalues(source, scheme, want, start, stride, backend) {
        Ok(v) => v,
        Err(Error::OrderMismatch { detected, .. }) if detected > 0 && detected < want => {
            extract_eigenvalues(source, scheme, detected, start, stride, backend)?
        }
        Err(e) => return Err(e),
    };
    let coeffs = extract_coefficients(
        &eigenvalues,
        source,
        scheme,
        scheme.base_samples,
        start,
        stride,
    )?;
    Ok(StrideAnalysis {
        stride,
        start,
        n_detected: estimate.rank,
        eigenvalues,
        coefficients: coeffs.x,
        rank_profile: estimate.singular_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExponentialTerm, SampleSource, SignalModel};
    use crate::presets;
    use num_complex::Complex64;
    use std::f64::consts::TAU;

    fn cancel7_src() -> (SampleSource<f64>, SamplingScheme<f64>) {
        (
            SampleSource::noiseless(presets::cancel7(), 0.01),
            presets::cancel7_scheme(),
        )
    }

    #[test]
    fn detect_order_cancel7_stride5() {
        let (mut src, scheme) = cancel7_src();
        let est = detect_order(&mut src, &scheme, 0, 5, 1e-10).unwrap();
        assert_eq!(est.rank, 2);
    }

    #[test]
    fn detect_order_collide7_stride12() {
        let model = presets::collide7::<f64>();
        let mut src = SampleSource::noiseless(model, 0.01);
        let scheme: SamplingScheme<f64> = SamplingScheme {
            omega_max: 100,
            delta: 0.01,
            r: 12,
            rho: 5,
            base_samples: 12,
            term_budget: 6,
            shift_samples: 8,
            max_shift: 9,
        };
        let est = detect_order(&mut src, &scheme, 0, 12, 1e-10).unwrap();
        assert_eq!(est.rank, 4);
    }

    #[test]
    fn detect_order_single_term() {
        let model =
            SignalModel::new(vec![ExponentialTerm::new(2.0, 0.3, -0.1, 7.0)], 100).unwrap();
        let mut src = SampleSource::noiseless(model, 0.01);
        let scheme: SamplingScheme<f64> = SamplingScheme {
            omega_max: 100,
            delta: 0.01,
            r: 3,
            rho: 2,
            base_samples: 8,
            term_budget: 4,
            shift_samples: 4,
            max_shift: 3,
        };
        let est = detect_order(&mut src, &scheme, 0, 3, 1e-10).unwrap();
        assert_eq!(est.rank, 1);
    }

    #[test]
    fn extract_eigenvalues_table2_noiseless() {
        // Derived oracle: lambda_i^(0) = exp(i 2 pi omega r delta) with the
        // collision structure of the table (3 distinct aliased values).
        let mut src = SampleSource::noiseless(presets::table2::<f64>(), 1e-3);
        let scheme = presets::table2_scheme::<f64>();
        let mut got = extract_eigenvalues(&mut src, &scheme, 3, 0, 100, Backend::Pencil).unwrap();
        got.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
        let mut want: Vec<Complex64> = [19.19f64, 52.62, 85.81]
            .iter()
            .map(|f| Complex64::from_polar(1.0, TAU * f))
            .collect();
        want.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).norm() < 1e-9, "{g} vs {w}");
        }
    }

    #[test]
    fn extract_eigenvalues_table2_noisy_near_paper_values() {
        let model = presets::table2::<f64>();
        let scheme = presets::table2_scheme::<f64>();
        let sigma = crate::model::add_noise_calibration(&model, &scheme, 20.0).unwrap();
        let mut src = SampleSource::with_noise(model, 1e-3, sigma, 123);
        let got = extract_eigenvalues(&mut src, &scheme, 3, 0, 100, Backend::Pencil).unwrap();
        // Seed-dependent estimates; each must fall within 0.05 of the exact
        // aliased eigenvalue (the published single-run values do too).
        for f in [19.19f64, 52.62, 85.81] {
            let want = Complex64::from_polar(1.0, TAU * f);
            let best = got.iter().map(|g| (g - want).norm()).fold(f64::MAX, f64::min);
            assert!(best < 0.05, "no eigenvalue within 0.05 of {want}: {got:?}");
        }
    }

    #[test]
    fn extract_single_term_ratio() {
        let model =
            SignalModel::new(vec![ExponentialTerm::new(3.0, 0.1, -0.2, 4.0)], 100).unwrap();
        let mut src = SampleSource::noiseless(model.clone(), 0.01);
        let scheme = presets::cancel7_scheme::<f64>();
        let l = extract_eigenvalues(&mut src, &scheme, 1, 0, 5, Backend::Pencil).unwrap();
        let f0 = src.sample_index(0).unwrap();
        let f5 = src.sample_index(5).unwrap();
        assert!((l[0] - f5 / f0).norm() < 1e-12);
    }

    #[test]
    fn extract_coefficients_single_and_roundtrip() {
        let model =
            SignalModel::new(vec![ExponentialTerm::new(7.1, 0.0, 0.0, 4.0)], 100).unwrap();
        let mut src = SampleSource::noiseless(model, 0.01);
        let scheme = presets::cancel7_scheme::<f64>();
        let l = extract_eigenvalues(&mut src, &scheme, 1, 0, 5, Backend::Pencil).unwrap();
        let c = extract_coefficients(&l, &mut src, &scheme, 8, 0, 5).unwrap();
        assert!((c.x[0] - Complex64::new(7.1, 0.0)).norm() < 1e-10);

        // Random 4-term model, noiseless, rows=8: coefficients back to 1e-8.
        let terms = vec![
            ExponentialTerm::new(2.0, 0.4, -0.05, 3.0),
            ExponentialTerm::new(1.5, -1.0, -0.12, 17.0),
            ExponentialTerm::new(4.0, 2.0, 0.0, 33.0),
            ExponentialTerm::new(0.7, 0.0, -0.3, 71.0),
        ];
        let model = SignalModel::new(terms.clone(), 100).unwrap();
        let mut src = SampleSource::noiseless(model, 0.01);
        let scheme: SamplingScheme<f64> = SamplingScheme {
            omega_max: 100,
            delta: 0.01,
            r: 3,
            rho: 2,
            base_samples: 8,
            term_budget: 4,
            shift_samples: 4,
            max_shift: 3,
        };
        let mut lam = extract_eigenvalues(&mut src, &scheme, 4, 0, 1, Backend::Pencil).unwrap();
        lam.sort_by(|a, b| {
            let fa = a.arg().rem_euclid(TAU);
            let fb = b.arg().rem_euclid(TAU);
            fa.partial_cmp(&fb).unwrap()
        });
        let c = extract_coefficients(&lam, &mut src, &scheme, 8, 0, 1).unwrap();
        for (got, term) in c.x.iter().zip(terms.iter()) {
            assert!((got - term.alpha()).norm() < 1e-8, "{got} vs {}", term.alpha());
        }
    }

    #[test]
    fn filter_examples() {
        let a = StrideAnalysis {
            stride: 1,
            start: 0,
            n_detected: 3,
            eigenvalues: vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(3.0, 0.0),
            ],
            coefficients: vec![
                Complex64::new(5.0, 0.0),
                Complex64::new(0.01, 0.0),
                Complex64::new(0.0, 3.0),
            ],
            rank_profile: vec![],
        };
        let id = filter_by_amplitude(&a, 3);
        assert_eq!(id.eigenvalues, a.eigenvalues);
        let top2 = filter_by_amplitude(&a, 2);
        assert_eq!(
            top2.eigenvalues,
            vec![Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0)]
        );
        assert_eq!(
            top2.coefficients,
            vec![Complex64::new(5.0, 0.0), Complex64::new(0.0, 3.0)]
        );
    }

    #[test]
    fn noiseless_roundtrip_stride1_random_models() {
        // Property: for random models with distinct eigenvalues the
        // eigenvalue/coefficient pair round-trips to 1e-7 after pairing
        // by nearest eigenvalue.
        let mut state = 0xABCDEFu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 1_000_000) as f64 / 1_000_000.0
        };
        for trial in 0..20 {
            let n = 1 + (trial % 8);
            let mut omegas: Vec<f64> = Vec::new();
            while omegas.len() < n {
                let cand = next() * 100.0;
                if omegas.iter().all(|&w| {
                    let d = (w - cand).abs();
                    d.min(100.0 - d) > 2.0
                }) {
                    omegas.push(cand);
                }
            }
            let terms: Vec<ExponentialTerm<f64>> = omegas
                .iter()
                .map(|&w| {
                    ExponentialTerm::new(1.0 + 9.0 * next(), (next() - 0.5) * 3.0, -0.2 * next(), w)
                })
                .collect();
            let model = SignalModel::new(terms.clone(), 100).unwrap();
            let mut src = SampleSource::noiseless(model, 0.01);
            let scheme: SamplingScheme<f64> = SamplingScheme {
                omega_max: 100,
                delta: 0.01,
                r: 2,
                rho: 1,
                base_samples: (2 * n).max(4) + 4,
                term_budget: n.max(2),
                shift_samples: 4,
                max_shift: 3,
            };
            let lam = extract_eigenvalues(&mut src, &scheme, n, 0, 1, Backend::Pencil).unwrap();
            let coef =
                extract_coefficients(&lam, &mut src, &scheme, scheme.base_samples, 0, 1).unwrap();
            for term in &terms {
                let want_l = term.lambda(0.01);
                let (best, got_c) = lam
                    .iter()
                    .zip(coef.x.iter())
                    .map(|(l, c)| ((l - want_l).norm(), c))
                    .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
                    .unwrap();
                assert!(best < 1e-7, "eigenvalue error {best}");
                assert!((got_c - term.alpha()).norm() < 1e-7 * term.beta.max(1.0));
            }
        }
    }

    #[test]
    fn order_detector_overshoot_stable() {
        // For noiseless data and any N in [n, 2n], the detected rank is n.
        let terms = vec![
            ExponentialTerm::new(2.0, 0.0, -0.1, 5.0),
            ExponentialTerm::new(3.0, 1.0, -0.05, 29.0),
            ExponentialTerm::new(1.0, -0.7, 0.0, 63.0),
        ];
        let model = SignalModel::new(terms, 100).unwrap();
        for big_n in 3..=6 {
            let mut src = SampleSource::noiseless(model.clone(), 0.01);
            let scheme: SamplingScheme<f64> = SamplingScheme {
                omega_max: 100,
                delta: 0.01,
                r: 2,
                rho: 1,
                base_samples: 2 * big_n + 2,
                term_budget: big_n,
                shift_samples: 4,
                max_shift: 3,
            };
            let est = detect_order(&mut src, &scheme, 0, 1, 1e-10).unwrap();
            assert_eq!(est.rank, 3, "N = {big_n}");
        }
    }
}
