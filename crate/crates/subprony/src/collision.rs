//! Full sub-Nyquist analysis with collision and cancellation handling.
//!
//! Stage A0 estimates the collided order n0 from the base grid plus rank
//! probes at shifted grids (a cancelled group is invisible at k = 0 but by
//! the separation lemmas cannot stay invisible), extracts the aliased
//! eigenvalues and their coefficients. Stage A1 collects per-group
//! coefficient views across shifts, finds each group's multiplicity by a
//! Hankel rank plateau, and disentangles the terms hiding in each group by
//! an inner exponential analysis on the view sequence. Recombination maps
//! each (aliased, inner) eigenvalue pair back to a frequency in
//! `[0, omega_max)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, LsFactor};
use crate::model::{ExponentialTerm, SampleSource, SamplingScheme, SignalModel};
use crate::scalar::Real;
use crate::sequence::SliceSamples;
use crate::subnyquist::{
    self, clamp_omega, AnalysisOptions, Recombination, DEGENERATE_COEFF_REL_TOL,
};

/// One aliased eigenvalue with its coefficient-view sequence and the
/// disentangled inner terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollisionGroup<T> {
    /// Aliased eigenvalue lambda_i^(0) observed at stride r.
    pub lambda0: Complex<T>,
    /// Coefficient views alpha_i^(1)(k), k = 0..K. alpha_seq[0] is the
    /// k = 0 coefficient, possibly ~0 under cancellation.
    pub alpha_seq: Vec<Complex<T>>,
    /// Number of terms hiding in the group.
    pub multiplicity: usize,
    /// Inner eigenvalues lambda_l^(1) = exp(phi_l rho delta).
    pub inner_eigenvalues: Vec<Complex<T>>,
    /// Inner coefficients: the original alpha_l.
    pub inner_coefficients: Vec<Complex<T>>,
}

/// Rank probe at one shift.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftProbe<T> {
    pub k: usize,
    pub rank: usize,
    pub singular_values: Vec<T>,
}

/// Output of stage A0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageA0<T> {
    pub n0: usize,
    pub lambda0: Vec<Complex<T>>,
    pub alpha0: Vec<Complex<T>>,
    /// Rank probes, k = 0 (base grid) first.
    pub probes: Vec<ShiftProbe<T>>,
    /// Shift index whose grid the eigenvalues were extracted from.
    pub extraction_shift: usize,
}

/// Per-stage singular-value diagnostics of a full analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularProfiles<T> {
    pub base: Vec<T>,
    pub probes: Vec<ShiftProbe<T>>,
    /// Final (largest) alpha-sequence Hankel profile per retained group.
    pub groups: Vec<Vec<T>>,
}

/// Full recovery report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryReport<T> {
    pub n0: usize,
    pub groups: Vec<CollisionGroup<T>>,
    pub terms: SignalModel<T>,
    pub samples_consumed: usize,
    pub singular_profiles: SingularProfiles<T>,
    pub recombination: Recombination,
    /// Human-readable diagnostics (dropped noise groups and the like).
    pub notes: Vec<String>,
}

/// First base-grid row index usable for shift batch `k` (nonzero only for
/// negative shift factors, where small `j` would give negative indices).
fn row_offset(scheme_r: u32, rho: i32, k: usize) -> usize {
    if rho >= 0 {
        0
    } else {
        let need = (k as i64) * (-rho as i64);
        let r = scheme_r as i64;
        ((need + r - 1) / r) as usize
    }
}

/// Stage A0: collided order, aliased eigenvalues and k = 0 coefficients.
///
/// The order estimate combines the base-grid rank with rank probes at
/// shifted grids; a rank value is only trusted once observed twice (the
/// schedule keeps probing two shifts past any increase, so a persistent
/// group confirms itself, while a one-off noise excursion does not).
pub fn stage_a0<T: Real>(
    source: &mut SampleSource<T>,
    scheme: &SamplingScheme<T>,
    opts: &AnalysisOptions<T>,
) -> Result<StageA0<T>> {
    scheme.validate()?;
    let stride = scheme.r as i64;
    let budget = scheme.term_budget;

    let base = crate::prony::detect_order(source, scheme, 0, stride, opts.rank_tol)?;
    if base.rank > budget {
        return Err(Error::BudgetExceeded {
            detected: base.rank,
            budget,
        });
    }
    let mut probes = vec![ShiftProbe {
        k: 0,
        rank: base.rank,
        singular_values: base.singular_values.clone(),
    }];

    let m = scheme.shift_samples;
    let probe_cols = m / 2;
    let probe_rows = m + 1 - probe_cols;
    let k_cap = scheme.max_shift.min(2 * budget - 1).max(2);
    let mut running_max = base.rank;
    let mut no_increase = 0usize;
    let mut k = 1usize;
    while k <= k_cap {
        let j0 = row_offset(scheme.r, scheme.rho, k);
        let start = scheme.shifted_index(j0 as i64, k as i64)?;
        let h = linalg::build_hankel(source, probe_rows, probe_cols, start, stride)?;
        let est = linalg::numerical_rank(&h, opts.rank_tol)?;
        if est.rank > budget {
            return Err(Error::BudgetExceeded {
                detected: est.rank,
                budget,
            });
        }
        probes.push(ShiftProbe {
            k,
            rank: est.rank,
            singular_values: est.singular_values,
        });
        if est.rank > running_max {
            running_max = est.rank;
            no_increase = 0;
        } else {
            no_increase += 1;
        }
        if k >= 2 && no_increase >= 2 {
            break;
        }
        k += 1;
    }

    // A rank value counts toward n0 only when seen at least twice.
    let mut n0 = 0usize;
    for p in &probes {
        let count = probes.iter().filter(|q| q.rank == p.rank).count();
        if count >= 2 {
            n0 = n0.max(p.rank);
        }
    }
    if n0 == 0 {
        n0 = probes.iter().map(|p| p.rank).max().unwrap_or(0);
    }
    if n0 == 0 {
        return Err(Error::InvalidInput(
            "no exponential content detected on any probed grid".into(),
        ));
    }

    // Extract eigenvalues from the first grid that exposed all n0 groups:
    // the structured solve runs at that grid's modeling budget and the n0
    // dominant-amplitude eigenvalues are retained.
    let k_star = probes
        .iter()
        .find(|p| p.rank == n0)
        .map(|p| p.k)
        .unwrap_or(0);
    let grid = if k_star == 0 {
        crate::prony::ExtractionGrid {
            start: 0,
            stride,
            samples: scheme.base_samples,
            budget,
            power_offset: 0,
        }
    } else {
        if m < 2 * n0 {
            return Err(Error::InvalidScheme(format!(
                "shift batch m={m} too small to extract {n0} eigenvalues; need m >= {}",
                2 * n0
            )));
        }
        crate::prony::ExtractionGrid {
            start: (k_star as i64) * scheme.rho as i64,
            stride,
            samples: m,
            budget: budget.min(m / 2),
            power_offset: row_offset(scheme.r, scheme.rho, k_star),
        }
    };
    let lambda0 = crate::prony::extract_dominant(source, &grid, n0, opts.backend)?;
    let alpha0 = coefficient_views(&lambda0, source, scheme, 0)?;
    Ok(StageA0 {
        n0,
        lambda0,
        alpha0,
        probes,
        extraction_shift: k_star,
    })
}

/// Coefficient views alpha_i^(1)(k): least-squares solve of the (reused)
/// Vandermonde system against the shift-k right-hand side. k = 0 uses the
/// full base grid and reduces to the plain coefficient solve.
pub fn coefficient_views<T: Real>(
    lambda0: &[Complex<T>],
    source: &mut SampleSource<T>,
    scheme: &SamplingScheme<T>,
    k: usize,
) -> Result<Vec<Complex<T>>> {
    let mut solver = ViewSolver::new(lambda0.to_vec(), scheme.clone())?;
    solver.view(source, k)
}

/// Cached-factorization solver for the per-shift coefficient views.
/// The Vandermonde factorization depends only on the row offset, so it is
/// reused across shift indices.
struct ViewSolver<T> {
    lambda0: Vec<Complex<T>>,
    scheme: SamplingScheme<T>,
    base_factor: Option<LsFactor<T>>,
    shift_factors: Vec<(usize, LsFactor<T>)>,
    /// Accumulated squared residuals and count from k >= 1 solves.
    resid_sq: T,
    resid_count: usize,
    resid_dof: usize,
}

impl<T: Real> ViewSolver<T> {
    fn new(lambda0: Vec<Complex<T>>, scheme: SamplingScheme<T>) -> Result<Self> {
        if lambda0.is_empty() {
            return Err(Error::InvalidInput("no aliased eigenvalues".into()));
        }
        Ok(Self {
            lambda0,
            scheme,
            base_factor: None,
            shift_factors: Vec::new(),
            resid_sq: T::zero(),
            resid_count: 0,
            resid_dof: 0,
        })
    }

    fn shift_factor(&mut self, j0: usize) -> Result<&LsFactor<T>> {
        if !self.shift_factors.iter().any(|(o, _)| *o == j0) {
            let rows = self.scheme.shift_samples.max(self.lambda0.len());
            let v = linalg::build_vandermonde_from(&self.lambda0, rows, j0);
            self.shift_factors.push((j0, LsFactor::new(&v)?));
        }
        Ok(&self
            .shift_factors
            .iter()
            .find(|(o, _)| *o == j0)
            .unwrap()
            .1)
    }

    fn view(&mut self, source: &mut SampleSource<T>, k: usize) -> Result<Vec<Complex<T>>> {
        let n0 = self.lambda0.len();
        if k == 0 {
            if self.base_factor.is_none() {
                let v = linalg::build_vandermonde(&self.lambda0, self.scheme.base_samples);
                self.base_factor = Some(LsFactor::new(&v)?);
            }
            let mut b = Vec::with_capacity(self.scheme.base_samples);
            for j in 0..self.scheme.base_samples {
                b.push(source.sample_index(self.scheme.shifted_index(j as i64, 0)?)?);
            }
            return self.base_factor.as_ref().unwrap().solve(&b);
        }
        let j0 = row_offset(self.scheme.r, self.scheme.rho, k);
        let rows = self.scheme.shift_samples.max(n0);
        let mut b = Vec::with_capacity(rows);
        for j in 0..rows {
            let idx = self.scheme.shifted_index((j0 + j) as i64, k as i64)?;
            b.push(source.sample_index(idx)?);
        }
        let factor = self.shift_factor(j0)?;
        let x = factor.solve(&b)?;
        // Track the residual for the noise-floor estimate.
        if rows > n0 {
            let v = linalg::build_vandermonde_from(&self.lambda0, rows, j0);
            let fit = v.mul_vec(&x);
            let mut rs = T::zero();
            for (f, bb) in fit.iter().zip(b.iter()) {
                rs += (f - bb).norm_sqr();
            }
            self.resid_sq += rs;
            self.resid_count += 1;
            self.resid_dof = rows - n0;
        }
        Ok(x)
    }

    /// Per-group standard deviation of the view noise, estimated from the
    /// shift-solve residuals propagated through the normal equations.
    /// Zero when no residual information is available (exact data).
    fn view_noise(&mut self) -> Result<Vec<T>> {
        let n0 = self.lambda0.len();
        if self.resid_count == 0 || self.resid_dof == 0 {
            return Ok(vec![T::zero(); n0]);
        }
        let sigma_sq = self.resid_sq / T::from_usize_lossy(self.resid_count * self.resid_dof);
        let j0 = self
            .shift_factors
            .first()
            .map(|(o, _)| *o)
            .unwrap_or(0);
        let factor = self.shift_factor(j0)?;
        Ok(factor
            .normal_inverse_diagonal()
            .into_iter()
            .map(|g| (sigma_sq * g).sqrt())
            .collect())
    }
}

/// Outcome of the group-order plateau search on an alpha-view sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupOrder {
    /// Plateau found: the group hides this many terms.
    Resolved { multiplicity: usize, ranks: Vec<usize> },
    /// The sequence is too short to test the next kappa; extend it to at
    /// least the given length.
    NeedsMoreViews { needed_len: usize, ranks: Vec<usize> },
}

/// Smallest kappa whose (kappa+1)x(kappa+1) Hankel rank equals the
/// kappa x kappa rank, both tested with a cutoff that is relative to the
/// larger matrix's leading singular value but floored by the estimated
/// view-noise level.
pub fn group_order<T: Real>(
    alpha_seq: &[Complex<T>],
    rel_tol: T,
    noise_floor: T,
) -> Result<GroupOrder> {
    if alpha_seq.is_empty() {
        return Ok(GroupOrder::NeedsMoreViews {
            needed_len: 3,
            ranks: vec![],
        });
    }
    let mut ranks = Vec::new();
    let mut kappa = 1usize;
    loop {
        let need = 2 * kappa + 1; // alpha(0..2 kappa)
        if alpha_seq.len() < need {
            return Ok(GroupOrder::NeedsMoreViews {
                needed_len: need,
                ranks,
            });
        }
        let big = hankel_from_seq(alpha_seq, kappa + 1);
        let small = hankel_from_seq(alpha_seq, kappa);
        let sv_big = linalg::singular_values(&big);
        let sv_small = linalg::singular_values(&small);
        let floor = noise_floor
            * T::from_f64_lossy(3.0)
            * T::from_usize_lossy(kappa + 1).sqrt();
        let nu_k = linalg::rank_with_floor(&sv_big, rel_tol, floor);
        let nu_km1 = linalg::rank_with_floor(&sv_small, rel_tol, floor);
        ranks.push(nu_k);
        if nu_k == nu_km1 {
            return Ok(GroupOrder::Resolved {
                multiplicity: nu_k,
                ranks,
            });
        }
        kappa += 1;
    }
}

fn hankel_from_seq<T: Real>(seq: &[Complex<T>], size: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(size, size, |i, j| seq[i + j])
}

/// Disentangle one group: inner Hankel pencil on the view sequence yields
/// the inner eigenvalues, an inner Vandermonde solve the coefficients.
/// The `multiplicity` largest-amplitude components are kept.
pub fn group_disentangle<T: Real>(
    group: &CollisionGroup<T>,
) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>)> {
    let mu = group.multiplicity;
    let len = group.alpha_seq.len();
    if mu == 0 {
        return Err(Error::InvalidInput("group multiplicity is zero".into()));
    }
    if len < 2 * mu {
        return Err(Error::InvalidInput(format!(
            "need at least {} views for multiplicity {mu}, have {len}",
            2 * mu
        )));
    }
    let rows = len - mu;
    let mut seq = SliceSamples(&group.alpha_seq);
    let lambda1 = linalg::pencil_eigenvalues(&mut seq, mu, rows, 0, 1)?;
    let v = linalg::build_vandermonde(&lambda1, len);
    let sol = linalg::solve_least_squares(&v, &group.alpha_seq)?;
    let kept = crate::prony::largest_amplitude_indices(&sol.x, mu);
    Ok((
        kept.iter().map(|&i| lambda1[i]).collect(),
        kept.iter().map(|&i| sol.x[i]).collect(),
    ))
}

/// The full algorithm: stage A0, per-group coefficient views and orders,
/// disentanglement, and recombination of every (aliased, inner) pair.
pub fn analyze_full<T: Real>(
    source: &mut SampleSource<T>,
    scheme: &SamplingScheme<T>,
    opts: &AnalysisOptions<T>,
) -> Result<RecoveryReport<T>> {
    scheme.validate()?;
    if !scheme.critical_delta() {
        return Err(Error::InvalidScheme(
            "frequency recombination requires delta = 1/omega_max".into(),
        ));
    }

    let a0 = stage_a0(source, scheme, opts).map_err(|e| e.in_stage("a0"))?;
    let n0 = a0.n0;

    // Collect coefficient views, extending lazily while group orders are
    // unresolved. alpha(0) is the k = 0 coefficient vector.
    let k_cap = scheme.max_shift.min(2 * scheme.term_budget - 1).max(4);
    let mut solver = ViewSolver::new(a0.lambda0.clone(), scheme.clone())
        .map_err(|e| e.in_stage("views"))?;
    let mut views: Vec<Vec<Complex<T>>> = vec![a0.alpha0.clone()];
    let initial_k = 4.min(k_cap);
    for k in 1..=initial_k {
        views.push(solver.view(source, k).map_err(|e| e.in_stage("views"))?);
    }

    let mut multiplicities: Vec<Option<usize>> = vec![None; n0];
    let mut rank_histories: Vec<Vec<usize>> = vec![Vec::new(); n0];
    loop {
        let floors = solver.view_noise().map_err(|e| e.in_stage("views"))?;
        let mut max_needed = views.len();
        for i in 0..n0 {
            if multiplicities[i].is_some() {
                continue;
            }
            let seq: Vec<Complex<T>> = views.iter().map(|v| v[i]).collect();
            match group_order(&seq, opts.rank_tol, floors[i])
                .map_err(|e| e.in_stage("group-order"))?
            {
                GroupOrder::Resolved { multiplicity, ranks } => {
                    multiplicities[i] = Some(multiplicity);
                    rank_histories[i] = ranks;
                }
                GroupOrder::NeedsMoreViews { needed_len, ranks } => {
                    rank_histories[i] = ranks;
                    max_needed = max_needed.max(needed_len);
                }
            }
        }
        if multiplicities.iter().all(|m| m.is_some()) {
            break;
        }
        if max_needed <= views.len() || views.len() > k_cap {
            break;
        }
        for k in views.len()..max_needed.min(k_cap + 1) {
            views.push(solver.view(source, k).map_err(|e| e.in_stage("views"))?);
        }
    }

    // Classify unresolved groups: all-quiet sequences are dropped as noise,
    // anything else is a hard failure.
    let global_scale = views
        .iter()
        .flat_map(|v| v.iter())
        .map(|a| a.norm())
        .fold(T::zero(), T::max);
    let zero_tol = global_scale * T::from_f64_lossy(DEGENERATE_COEFF_REL_TOL);
    let mut notes = Vec::new();
    let mut group_indices = Vec::new();
    for i in 0..n0 {
        let seq_scale = views
            .iter()
            .map(|v| v[i].norm())
            .fold(T::zero(), T::max);
        match multiplicities[i] {
            Some(0) | None if seq_scale <= zero_tol => {
                notes.push(format!(
                    "group {i} (lambda0 arg {:.6}) stayed below tolerance through k={} and was dropped as noise",
                    a0.lambda0[i].arg(),
                    views.len() - 1,
                ));
            }
            Some(0) => {
                notes.push(format!(
                    "group {i} resolved to zero visible components and was dropped",
                ));
            }
            Some(_) => group_indices.push(i),
            None => {
                return Err(Error::InconclusiveOrder {
                    group: i,
                    ranks: rank_histories[i].clone(),
                }
                .in_stage("group-order"));
            }
        }
    }

    // Disentangle and recombine.
    let pair = subnyquist::bezout(scheme.r, scheme.rho, scheme.omega_max)
        .map_err(|e| e.in_stage("recombine"))?;
    let om = T::from_f64_lossy(scheme.omega_max as f64);
    let mut groups = Vec::with_capacity(group_indices.len());
    let mut terms = Vec::new();
    for &i in &group_indices {
        let mu = multiplicities[i].unwrap();
        let seq: Vec<Complex<T>> = views.iter().map(|v| v[i]).collect();
        let mut group = CollisionGroup {
            lambda0: a0.lambda0[i],
            alpha_seq: seq,
            multiplicity: mu,
            inner_eigenvalues: vec![],
            inner_coefficients: vec![],
        };
        let (lam1, alphas) =
            group_disentangle(&group).map_err(|e| e.in_stage("disentangle"))?;
        group.inner_eigenvalues = lam1.clone();
        group.inner_coefficients = alphas.clone();

        let psi = subnyquist::recover_damping(group.lambda0, scheme.r, scheme.delta)
            .map_err(|e| e.in_stage("recombine"))?;
        let unit_r = group.lambda0 / group.lambda0.norm();
        for (l, alpha) in lam1.iter().zip(alphas.iter()) {
            if l.norm() == T::zero() {
                return Err(Error::InvalidEigenvalue.in_stage("recombine"));
            }
            let unit_p = l / l.norm();
            let omega = match opts.recombination {
                Recombination::Euclid => {
                    subnyquist::recombine_euclid(unit_r, unit_p, &pair, scheme.delta)
                        .map_err(|e| e.in_stage("recombine"))?
                }
                Recombination::Nearest => {
                    subnyquist::recombine_nearest(
                        unit_r,
                        unit_p,
                        scheme.r,
                        scheme.rho,
                        scheme.omega_max,
                        scheme.delta,
                    )
                    .map_err(|e| e.in_stage("recombine"))?
                    .omega
                }
            };
            terms.push(ExponentialTerm::new(
                alpha.norm(),
                alpha.arg(),
                psi,
                clamp_omega(omega, om),
            ));
        }
        groups.push(group);
    }

    // Deterministic presentation: groups by multiplicity (desc) then by
    // aliased argument; terms by frequency.
    groups.sort_by(|a, b| {
        b.multiplicity
            .cmp(&a.multiplicity)
            .then(a.lambda0.arg().partial_cmp(&b.lambda0.arg()).unwrap().then(std::cmp::Ordering::Equal))
    });
    terms.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap());
    let terms = SignalModel::new(terms, scheme.omega_max).map_err(|e| e.in_stage("recombine"))?;

    let group_profiles = groups
        .iter()
        .map(|g| {
            let size = (g.alpha_seq.len() / 2).max(1).min(g.multiplicity + 1);
            linalg::singular_values(&hankel_from_seq(&g.alpha_seq, size))
        })
        .collect();
    Ok(RecoveryReport {
        n0,
        groups,
        terms,
        samples_consumed: source.consumed(),
        singular_profiles: SingularProfiles {
            base: a0.probes[0].singular_values.clone(),
            probes: a0.probes,
            groups: group_profiles,
        },
        recombination: opts.recombination,
        notes,
    })
}
