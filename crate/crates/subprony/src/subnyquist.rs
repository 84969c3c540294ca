//! Aliasing arithmetic and its resolution: candidate frequency sets, Bezout
//! recombination, the noise-robust nearest-candidate variant, damping
//! recovery, and the collision-free shift-pairing pipeline.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{gcd_u64, SampleSource, SamplingScheme, SignalModel};
use crate::prony::{self, Backend, StrideAnalysis};
use crate::scalar::Real;

/// Relative tolerance below which a coefficient is considered degenerate
/// (a possible cancellation) and division by it is refused.
pub(crate) const DEGENERATE_COEFF_REL_TOL: f64 = 1e-8;

/// How aliased eigenvalue pairs are recombined into a frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recombination {
    /// Bezout/Euclidean formula; exact but noise-amplifying for large
    /// coefficients.
    Euclid,
    /// Midpoint of the closest cross-pair of the two candidate sets.
    Nearest,
}

/// Knobs shared by the analysis pipelines.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AnalysisOptions<T> {
    pub backend: Backend,
    pub recombination: Recombination,
    /// Relative rank tolerance for order detection.
    pub rank_tol: T,
    /// Retain only this many largest-amplitude terms (None keeps all).
    pub keep: Option<usize>,
    /// Row offset h of the shift system (0 <= h <= n).
    pub shift_offset: usize,
}

impl<T: Real> AnalysisOptions<T> {
    pub fn noiseless() -> Self {
        Self {
            backend: Backend::Pencil,
            recombination: Recombination::Nearest,
            rank_tol: prony::default_rank_tol(false),
            keep: None,
            shift_offset: 0,
        }
    }

    pub fn noisy() -> Self {
        Self {
            rank_tol: prony::default_rank_tol(true),
            ..Self::noiseless()
        }
    }
}

/// Integers with `p1 r + p2 rho = 1`, which in particular satisfies the
/// congruence `p1 r + p2 rho = 1 (mod omega_max)`. The exact identity is
/// required for non-integer frequencies, so only exact pairs are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BezoutPair {
    pub p1: i64,
    pub p2: i64,
    pub r: i64,
    pub rho: i64,
    pub omega_max: u32,
}

/// Minimal `|p1| + |p2|` Bezout pair for coprime `(r, rho)`, ties broken by
/// smaller `|p1|`.
pub fn bezout(r: u32, rho: i32, omega_max: u32) -> Result<BezoutPair> {
    let (r_i, rho_i) = (r as i64, rho as i64);
    if rho == 0 || gcd_u64(r as u64, rho.unsigned_abs() as u64) != 1 {
        return Err(Error::NotCoprime { r: r_i, rho: rho_i });
    }
    // Extended Euclid on (r, |rho|), then sign-correct for negative rho.
    let (mut old_r, mut rr) = (r_i, rho_i.abs());
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while rr != 0 {
        let q = old_r / rr;
        (old_r, rr) = (rr, old_r - q * rr);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    debug_assert_eq!(old_r, 1);
    let p1_0 = old_s;
    let p2_0 = if rho_i < 0 { -old_t } else { old_t };
    debug_assert_eq!(p1_0 * r_i + p2_0 * rho_i, 1);

    // Scan the solution family (p1 + t rho, p2 - t r) for the minimum.
    let span = (p1_0.abs() / rho_i.abs().max(1) + p2_0.abs() / r_i + 2).max(2);
    let mut best = (p1_0, p2_0);
    for t in -span..=span {
        let cand = (p1_0 + t * rho_i, p2_0 - t * r_i);
        let cost = (cand.0.abs() + cand.1.abs(), cand.0.abs());
        let best_cost = (best.0.abs() + best.1.abs(), best.0.abs());
        if cost < best_cost {
            best = cand;
        }
    }
    Ok(BezoutPair {
        p1: best.0,
        p2: best.1,
        r: r_i,
        rho: rho_i,
        omega_max,
    })
}

/// The aliased solutions `{base + k omega_max/factor, k = 0..factor-1}`
/// consistent with one eigenvalue observed at decimation `factor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet<T> {
    /// Residue in `[0, omega_max/factor)`.
    pub base: T,
    pub factor: u32,
    pub omega_max: u32,
}

impl<T: Real> CandidateSet<T> {
    pub fn candidates(&self) -> impl Iterator<Item = T> + '_ {
        let spacing = T::from_f64_lossy(self.omega_max as f64 / self.factor as f64);
        let base = self.base;
        (0..self.factor).map(move |k| base + spacing * T::from_f64_lossy(k as f64))
    }
}

/// Fractional part of `arg(z) / 2 pi`, in `[0, 1)`.
fn arg_frac<T: Real>(z: Complex<T>) -> T {
    let two_pi = T::PI() + T::PI();
    let f = (z.arg() / two_pi).fract();
    let f = if f < T::zero() { f + T::one() } else { f };
    // Guard against f == 1.0 after rounding.
    if f >= T::one() {
        T::zero()
    } else {
        f
    }
}

/// Candidate frequency set for one de-damped eigenvalue power.
///
/// Requires the critical step `delta = 1/omega_max`; the integer candidate
/// grid of the recombination lemmas is defined on it.
pub fn candidate_set<T: Real>(
    lambda_pow: Complex<T>,
    factor: u32,
    omega_max: u32,
    delta: T,
) -> Result<CandidateSet<T>> {
    if lambda_pow.norm() == T::zero() || !lambda_pow.re.is_finite() || !lambda_pow.im.is_finite() {
        return Err(Error::InvalidEigenvalue);
    }
    if factor == 0 {
        return Err(Error::InvalidInput("factor must be >= 1".into()));
    }
    check_critical_delta(omega_max, delta)?;
    let base = arg_frac(lambda_pow) * T::from_f64_lossy(omega_max as f64 / factor as f64);
    Ok(CandidateSet {
        base,
        factor,
        omega_max,
    })
}

fn check_critical_delta<T: Real>(omega_max: u32, delta: T) -> Result<()> {
    let prod = delta * T::from_f64_lossy(omega_max as f64);
    if (prod - T::one()).abs() > T::from_f64_lossy(1e-9) {
        return Err(Error::InvalidInput(format!(
            "frequency recombination requires delta = 1/omega_max (delta * omega = {prod})"
        )));
    }
    Ok(())
}

/// Frequency in `[0, omega_max)` from the two aliased eigenvalue powers via
/// the Bezout pair; the integer ambiguity is absorbed by the reduction.
pub fn recombine_euclid<T: Real>(
    lambda_r: Complex<T>,
    lambda_rho: Complex<T>,
    pair: &BezoutPair,
    delta: T,
) -> Result<T> {
    if lambda_r.norm() == T::zero() || lambda_rho.norm() == T::zero() {
        return Err(Error::InvalidEigenvalue);
    }
    check_critical_delta(omega_of(pair), delta)?;
    let om = T::from_f64_lossy(pair.omega_max as f64);
    let x = T::from_f64_lossy(pair.p1 as f64) * arg_frac(lambda_r)
        + T::from_f64_lossy(pair.p2 as f64) * arg_frac(lambda_rho);
    let mut frac = x.fract();
    if frac < T::zero() {
        frac += T::one();
    }
    let mut omega = frac * om;
    if omega >= om {
        omega = omega - om;
    }
    Ok(omega)
}

fn omega_of(pair: &BezoutPair) -> u32 {
    pair.omega_max
}

/// Result of nearest-candidate recombination: the midpoint frequency and
/// the achieved circular gap between the matched candidates (diagnostic).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NearestRecombination<T> {
    pub omega: T,
    pub gap: T,
}

/// Noise-robust recombination: build both candidate sets and return the
/// circular midpoint of the closest cross-set pair.
pub fn recombine_nearest<T: Real>(
    lambda_r: Complex<T>,
    lambda_rho: Complex<T>,
    r: u32,
    rho: i32,
    omega_max: u32,
    delta: T,
) -> Result<NearestRecombination<T>> {
    if gcd_u64(r as u64, rho.unsigned_abs() as u64) != 1 || rho == 0 {
        return Err(Error::NotCoprime {
            r: r as i64,
            rho: rho as i64,
        });
    }
    // A negative shift observes conj(lambda^|rho|).
    let lam_rho_pos = if rho < 0 { lambda_rho.conj() } else { lambda_rho };
    let set_r = candidate_set(lambda_r, r, omega_max, delta)?;
    let set_rho = candidate_set(lam_rho_pos, rho.unsigned_abs(), omega_max, delta)?;
    let om = T::from_f64_lossy(omega_max as f64);
    let half = om * T::from_f64_lossy(0.5);
    let mut best_gap = T::infinity();
    let mut best_mid = T::zero();
    for c1 in set_r.candidates() {
        for c2 in set_rho.candidates() {
            // Signed circular difference in [-om/2, om/2)
            let mut d = c2 - c1;
            while d >= half {
                d -= om;
            }
            while d < -half {
                d += om;
            }
            if d.abs() < best_gap {
                best_gap = d.abs();
                let mut mid = c1 + d * T::from_f64_lossy(0.5);
                while mid < T::zero() {
                    mid += om;
                }
                while mid >= om {
                    mid -= om;
                }
                best_mid = mid;
            }
        }
    }
    Ok(NearestRecombination {
        omega: best_mid,
        gap: best_gap,
    })
}

/// Damping from the modulus of an aliased eigenvalue:
/// `psi = ln|lambda^r| / (r delta)`.
pub fn recover_damping<T: Real>(lambda_r: Complex<T>, r: u32, delta: T) -> Result<T> {
    let m = lambda_r.norm();
    if m == T::zero() || !m.is_finite() {
        return Err(Error::InvalidEigenvalue);
    }
    Ok(m.ln() / (T::from_f64_lossy(r as f64) * delta))
}

/// Solve the shifted linear system (same Vandermonde coefficients, right
/// hand side `f_{j r + rho}`) and divide elementwise by the base
/// coefficients, yielding `lambda_i^rho` positionally paired with `base`.
pub fn shift_pair<T: Real>(
    base: &StrideAnalysis<T>,
    source: &mut SampleSource<T>,
    scheme: &SamplingScheme<T>,
    h_offset: usize,
) -> Result<Vec<Complex<T>>> {
    let n = base.eigenvalues.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty base analysis".into()));
    }
    let max_amp = base
        .coefficients
        .iter()
        .map(|a| a.norm())
        .fold(T::zero(), T::max);
    let tol = max_amp * T::from_f64_lossy(DEGENERATE_COEFF_REL_TOL);
    if let Some(idx) = base.coefficients.iter().position(|a| a.norm() <= tol) {
        return Err(Error::DegenerateCoefficient { index: idx });
    }
    let rows = scheme.shift_samples.max(n);
    let v = linalg::build_vandermonde_from(&base.eigenvalues, rows, h_offset);
    let mut b = Vec::with_capacity(rows);
    for j in 0..rows {
        let idx = scheme.shifted_index((h_offset + j) as i64, 1)?;
        b.push(source.sample_index(idx)?);
    }
    let sol = linalg::solve_least_squares(&v, &b)?;
    Ok(sol
        .x
        .iter()
        .zip(base.coefficients.iter())
        .map(|(y, a)| y / a)
        .collect())
}

/// Report of the collision-free pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollisionFreeReport<T> {
    pub model: SignalModel<T>,
    /// Numerical rank detected on the base grid (diagnostic).
    pub n_detected: usize,
    pub rank_profile: Vec<T>,
    pub samples_consumed: usize,
    pub recombination: Recombination,
    /// Circular candidate gaps per recovered term (nearest mode only).
    pub gaps: Vec<T>,
}

/// The shift-pairing pipeline for data without collisions: stride-r
/// analysis, one identification shift, per-term recombination.
///
/// Fails with a degenerate-coefficient error when a cancellation is
/// suspected; callers should then run the full collision analysis.
pub fn analyze_collision_free<T: Real>(
    source: &mut SampleSource<T>,
    scheme: &SamplingScheme<T>,
    opts: &AnalysisOptions<T>,
) -> Result<CollisionFreeReport<T>> {
    scheme.validate()?;
    if !scheme.critical_delta() {
        return Err(Error::InvalidScheme(
            "frequency recombination requires delta = 1/omega_max".into(),
        ));
    }
    let stride = scheme.r as i64;
    let analysis = prony::analyze_stride(
        source,
        scheme,
        0,
        stride,
        opts.backend,
        opts.rank_tol,
        Some(scheme.term_budget),
    )?;
    let lam_rho = shift_pair(&analysis, source, scheme, opts.shift_offset)?;

    let keep = opts.keep.unwrap_or(analysis.eigenvalues.len());
    let kept = prony::largest_amplitude_indices(&analysis.coefficients, keep);

    let pair = bezout(scheme.r, scheme.rho, scheme.omega_max)?;
    let om = T::from_f64_lossy(scheme.omega_max as f64);
    let mut terms = Vec::with_capacity(kept.len());
    let mut gaps = Vec::new();
    for &i in &kept {
        let lam_r = analysis.eigenvalues[i];
        let lam_p = lam_rho[i];
        let psi = recover_damping(lam_r, scheme.r, scheme.delta)?;
        // De-damp before any argument arithmetic.
        let unit_r = lam_r / lam_r.norm();
        let unit_p = lam_p / lam_p.norm();
        let omega = match opts.recombination {
            Recombination::Euclid => recombine_euclid(unit_r, unit_p, &pair, scheme.delta)?,
            Recombination::Nearest => {
                let nr = recombine_nearest(
                    unit_r,
                    unit_p,
                    scheme.r,
                    scheme.rho,
                    scheme.omega_max,
                    scheme.delta,
                )?;
                gaps.push(nr.gap);
                nr.omega
            }
        };
        let omega = clamp_omega(omega, om);
        let alpha = analysis.coefficients[i];
        terms.push(crate::model::ExponentialTerm::new(
            alpha.norm(),
            alpha.arg(),
            psi,
            omega,
        ));
    }
    terms.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap());
    let model = SignalModel::new(terms, scheme.omega_max)?;
    Ok(CollisionFreeReport {
        model,
        n_detected: analysis.n_detected,
        rank_profile: analysis.rank_profile,
        samples_consumed: source.consumed(),
        recombination: opts.recombination,
        gaps,
    })
}

pub(crate) fn clamp_omega<T: Real>(omega: T, om: T) -> T {
    let mut w = omega;
    while w < T::zero() {
        w += om;
    }
    while w >= om {
        w -= om;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExponentialTerm, SampleSource};
    use crate::presets;
    use num_complex::Complex64;
    use std::f64::consts::TAU;

    #[test]
    fn bezout_paper_pairs() {
        let b = bezout(11, 5, 1000).unwrap();
        assert_eq!((b.p1, b.p2), (1, -2));
        let b = bezout(100, 133, 1000).unwrap();
        assert_eq!((b.p1, b.p2), (4, -3));
        let b = bezout(5, 12, 100).unwrap();
        assert_eq!((b.p1, b.p2), (5, -2));
        assert!(matches!(
            bezout(10, 4, 100),
            Err(Error::NotCoprime { .. })
        ));
    }

    #[test]
    fn bezout_minimality_against_exhaustive_search() {
        for (r, rho) in [(3u32, 7i32), (5, 12), (11, 5), (7, -3), (8, 13), (9, -22)] {
            let b = bezout(r, rho, 50).unwrap();
            assert_eq!(b.p1 * r as i64 + b.p2 * rho as i64, 1);
            // Exhaustive oracle over a generous window.
            let mut best = i64::MAX;
            let mut best_p1 = i64::MAX;
            for p1 in -60i64..=60 {
                for p2 in -60i64..=60 {
                    if p1 * r as i64 + p2 * rho as i64 == 1 {
                        let cost = p1.abs() + p2.abs();
                        if cost < best || (cost == best && p1.abs() < best_p1) {
                            best = cost;
                            best_p1 = p1.abs();
                        }
                    }
                }
            }
            assert_eq!(b.p1.abs() + b.p2.abs(), best, "(r,rho)=({r},{rho})");
            assert_eq!(b.p1.abs(), best_p1, "(r,rho)=({r},{rho})");
        }
    }

    #[test]
    fn candidate_set_examples() {
        let s = candidate_set(Complex64::from_polar(1.0, TAU * 0.75), 5, 100, 0.01).unwrap();
        assert!((s.base - 15.0).abs() < 1e-10);
        let c: Vec<f64> = s.candidates().collect();
        for (got, want) in c.iter().zip([15.0, 35.0, 55.0, 75.0, 95.0]) {
            assert!((got - want).abs() < 1e-10);
        }

        let s = candidate_set(Complex64::new(1.0, 0.0), 3, 99, 1.0 / 99.0).unwrap();
        let c: Vec<f64> = s.candidates().collect();
        for (got, want) in c.iter().zip([0.0, 33.0, 66.0]) {
            assert!((got - want).abs() < 1e-10);
        }

        let s = candidate_set(Complex64::from_polar(1.0, TAU * 0.05), 11, 1000, 1e-3).unwrap();
        assert!((s.base - 1000.0 * 0.05 / 11.0).abs() < 1e-9);
        assert_eq!(s.candidates().count(), 11);

        assert!(matches!(
            candidate_set(Complex64::new(0.0, 0.0), 5, 100, 0.01),
            Err(Error::InvalidEigenvalue)
        ));
    }

    #[test]
    fn recombine_euclid_examples() {
        let pair = bezout(5, 12, 100).unwrap();
        let lr = Complex64::from_polar(1.0, TAU * 0.05);
        let lp = Complex64::from_polar(1.0, TAU * 0.12);
        let w = recombine_euclid(lr, lp, &pair, 0.01).unwrap();
        assert!((w - 1.0).abs() < 1e-9);

        let one = Complex64::new(1.0, 0.0);
        let w = recombine_euclid(one, one, &pair, 0.01).unwrap();
        assert!(w.abs() < 1e-12);
    }

    #[test]
    fn recombine_euclid_forward_synthesis() {
        // omega -> (exp(i 2 pi omega r delta), exp(i 2 pi omega rho delta)) -> omega
        let mut state = 77u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 1_000_000) as f64 / 1_000_000.0
        };
        let cases = [(5u32, 12i32, 100u32), (11, 5, 1000), (100, 133, 1000), (7, -3, 100)];
        for (r, rho, om) in cases {
            let pair = bezout(r, rho, om).unwrap();
            let delta = 1.0 / om as f64;
            for _ in 0..200 {
                let w = next() * om as f64;
                let lr = Complex64::from_polar(1.0, TAU * w * r as f64 * delta);
                let lp = Complex64::from_polar(1.0, TAU * w * rho as f64 * delta);
                let got = recombine_euclid(lr, lp, &pair, delta).unwrap();
                let mut err = (got - w).abs();
                err = err.min(om as f64 - err);
                assert!(err < 1e-9 * om as f64 / 100.0 + 1e-9, "w={w} got={got}");
            }
        }
    }

    #[test]
    fn recombine_nearest_matches_euclid_on_exact_inputs() {
        let pair = bezout(5, 12, 100).unwrap();
        let lr = Complex64::from_polar(1.0, TAU * 0.05);
        let lp = Complex64::from_polar(1.0, TAU * 0.12);
        let e = recombine_euclid(lr, lp, &pair, 0.01).unwrap();
        let n = recombine_nearest(lr, lp, 5, 12, 100, 0.01).unwrap();
        assert!((e - n.omega).abs() < 1e-9);
        assert!(n.gap < 1e-9);
    }

    #[test]
    fn recombine_nearest_small_exhaustive() {
        // r=2, rho=3, Omega=6, omega=5: sets {2,5} and {1,3,5} meet at 5.
        let delta = 1.0 / 6.0;
        let lr = Complex64::from_polar(1.0, TAU * 5.0 * 2.0 * delta);
        let lp = Complex64::from_polar(1.0, TAU * 5.0 * 3.0 * delta);
        let n = recombine_nearest(lr, lp, 2, 3, 6, delta).unwrap();
        assert!((n.omega - 5.0).abs() < 1e-9);
    }

    #[test]
    fn recombine_nearest_robust_under_arg_noise() {
        // Monte Carlo comparison oracle: perturb arg(lambda^r) by 1e-3 and
        // compare against the Euclid formula's amplified error.
        let (r, rho, om) = (100u32, 133i32, 1000u32);
        let delta = 1e-3;
        let w_true = 191.9;
        let pair = bezout(r, rho, om).unwrap();
        let mut state = 5u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            ((state % 2_000_001) as f64 / 1_000_000.0) - 1.0
        };
        let mut near_errs = Vec::new();
        let mut euclid_errs = Vec::new();
        for _ in 0..100 {
            let noise = next() * 1e-3;
            let lr = Complex64::from_polar(1.0, TAU * w_true * r as f64 * delta + noise);
            let lp = Complex64::from_polar(1.0, TAU * w_true * rho as f64 * delta);
            let n = recombine_nearest(lr, lp, r, rho, om, delta).unwrap();
            let mut ne = (n.omega - w_true).abs();
            ne = ne.min(om as f64 - ne);
            near_errs.push(ne);
            let e = recombine_euclid(lr, lp, &pair, delta).unwrap();
            let mut ee = (e - w_true).abs();
            ee = ee.min(om as f64 - ee);
            euclid_errs.push(ee);
        }
        let near_max = near_errs.iter().cloned().fold(0.0, f64::max);
        let euclid_mean = euclid_errs.iter().sum::<f64>() / euclid_errs.len() as f64;
        let near_mean = near_errs.iter().sum::<f64>() / near_errs.len() as f64;
        assert!(near_max < 0.5, "nearest max err {near_max}");
        assert!(
            euclid_mean > 10.0 * near_mean,
            "euclid {euclid_mean} vs nearest {near_mean}"
        );
    }

    #[test]
    fn damping_roundtrip() {
        let w = recover_damping(Complex64::new(1.0, 0.0), 7, 0.01).unwrap();
        assert!(w.abs() < 1e-14);
        let lam = Complex64::from_polar((-0.19f64 * 0.011).exp(), 1.234);
        let psi = recover_damping(lam, 11, 1e-3).unwrap();
        assert!((psi + 0.19).abs() < 1e-12);
        let mut state = 999u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 1_000_000) as f64 / 1_000_000.0
        };
        for _ in 0..50 {
            let psi = -next();
            let r = 2 + (next() * 30.0) as u32;
            let delta = 1e-3;
            let lam = Complex64::from_polar((psi * r as f64 * delta).exp(), next());
            let got = recover_damping(lam, r, delta).unwrap();
            assert!((got - psi).abs() < 1e-10);
        }
    }

    #[test]
    fn shift_pair_single_term() {
        let model =
            SignalModel::new(vec![ExponentialTerm::new(2.0, 0.0, 0.0, 30.0)], 100).unwrap();
        let mut src = SampleSource::noiseless(model, 0.01);
        let scheme: SamplingScheme<f64> = SamplingScheme {
            omega_max: 100,
            delta: 0.01,
            r: 4,
            rho: 5,
            base_samples: 6,
            term_budget: 3,
            shift_samples: 3,
            max_shift: 3,
        };
        let base = StrideAnalysis {
            stride: 4,
            start: 0,
            n_detected: 1,
            eigenvalues: vec![Complex64::from_polar(1.0, TAU * 0.3 * 4.0)],
            coefficients: vec![Complex64::new(2.0, 0.0)],
            rank_profile: vec![],
        };
        let lam_rho = shift_pair(&base, &mut src, &scheme, 0).unwrap();
        let want = Complex64::from_polar(1.0, TAU * 0.3 * 5.0);
        assert!((lam_rho[0] - want).norm() < 1e-12);
    }

    #[test]
    fn shift_pair_table1_forward_powers() {
        let model = presets::table1::<f64>();
        let scheme = presets::table1_scheme::<f64>();
        let mut src = SampleSource::noiseless(model.clone(), 1e-3);
        let mut sub_scheme = scheme.clone();
        sub_scheme.term_budget = 20;
        let analysis = prony::analyze_stride(
            &mut src,
            &sub_scheme,
            0,
            11,
            Backend::Pencil,
            1e-10,
            Some(20),
        )
        .unwrap();
        let lam_rho = shift_pair(&analysis, &mut src, &sub_scheme, 0).unwrap();
        // Forward powers oracle: each lambda_i^5 from the model.
        for (lam_r, lam_p) in analysis.eigenvalues.iter().zip(lam_rho.iter()) {
            let term = model
                .terms()
                .iter()
                .min_by(|a, b| {
                    (a.lambda(1e-3).powu(11) - lam_r)
                        .norm()
                        .partial_cmp(&(b.lambda(1e-3).powu(11) - lam_r).norm())
                        .unwrap()
                })
                .unwrap();
            let want = term.lambda(1e-3).powu(5);
            assert!((lam_p - want).norm() < 1e-8, "{lam_p} vs {want}");
        }
    }

    #[test]
    fn shift_pair_degenerate_coefficient_detected() {
        let scheme = presets::cancel7_scheme::<f64>();
        let mut src = SampleSource::noiseless(presets::cancel7(), 0.01);
        let base = StrideAnalysis {
            stride: 5,
            start: 0,
            n_detected: 3,
            eigenvalues: vec![
                Complex64::from_polar(1.0, TAU * 0.05),
                Complex64::from_polar(1.0, TAU * 0.55),
                Complex64::from_polar(1.0, TAU * 0.45),
            ],
            coefficients: vec![
                Complex64::new(0.0, 0.0), // cancelled group
                Complex64::from_polar(1.902, 1.0),
                Complex64::new(1.0, 0.0),
            ],
            rank_profile: vec![],
        };
        assert_eq!(
            shift_pair(&base, &mut src, &scheme, 0).unwrap_err(),
            Error::DegenerateCoefficient { index: 0 }
        );
    }

    #[test]
    fn collision_free_single_term_exact() {
        let model =
            SignalModel::new(vec![ExponentialTerm::new(2.5, 0.8, -0.15, 37.25)], 100).unwrap();
        let mut src = SampleSource::noiseless(model, 0.01);
        let scheme: SamplingScheme<f64> = SamplingScheme {
            omega_max: 100,
            delta: 0.01,
            r: 7,
            rho: 3,
            base_samples: 8,
            term_budget: 4,
            shift_samples: 4,
            max_shift: 3,
        };
        let report =
            analyze_collision_free(&mut src, &scheme, &AnalysisOptions::noiseless()).unwrap();
        assert_eq!(report.model.n_terms(), 1);
        let t = &report.model.terms()[0];
        assert!((t.omega - 37.25).abs() < 1e-9);
        assert!((t.beta - 2.5).abs() < 1e-9);
        assert!((t.gamma - 0.8).abs() < 1e-9);
        assert!((t.psi + 0.15).abs() < 1e-9);
    }

    #[test]
    fn collision_free_table1_noiseless_roundtrip() {
        let model = presets::table1::<f64>();
        let mut scheme = presets::table1_scheme::<f64>();
        scheme.term_budget = 20;
        let mut src = SampleSource::noiseless(model.clone(), 1e-3);
        let report =
            analyze_collision_free(&mut src, &scheme, &AnalysisOptions::noiseless()).unwrap();
        assert_eq!(report.model.n_terms(), 20);
        assert_eq!(report.samples_consumed, 240);
        let mut truth: Vec<_> = model.terms().to_vec();
        truth.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap());
        for (got, want) in report.model.terms().iter().zip(truth.iter()) {
            assert!((got.omega - want.omega).abs() < 1e-6);
            assert!((got.beta - want.beta).abs() < 1e-6 * want.beta);
            assert!((got.gamma - want.gamma).abs() < 1e-6);
            assert!((got.psi - want.psi).abs() < 1e-6);
        }
    }
}
