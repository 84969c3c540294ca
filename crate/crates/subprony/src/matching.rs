//! Matching recovered terms to ground truth for metrics: greedy
//! nearest-frequency assignment under a circular distance, ties broken by
//! amplitude proximity. Used by the Monte Carlo harness and tests; never
//! by the recovery pipelines themselves.

use serde::{Deserialize, Serialize};

use crate::model::SignalModel;
use crate::scalar::Real;

/// Outcome of matching a recovered model against the truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchReport<T> {
    /// Largest circular frequency error over matched truth terms; infinite
    /// when a truth term found no partner inside the window.
    pub max_freq_err: T,
    /// Median frequency error over matched pairs (0 when none matched).
    pub median_freq_err: T,
    /// Number of truth terms matched within the window.
    pub matched: usize,
    /// True when every truth term matched within the window.
    pub success: bool,
    /// Truth-index -> recovered-index assignment.
    pub assignment: Vec<Option<usize>>,
}

/// Circular distance on `[0, omega_max)`.
pub fn circular_distance<T: Real>(a: T, b: T, omega_max: T) -> T {
    let mut d = (a - b).abs() % omega_max;
    if d > omega_max * T::from_f64_lossy(0.5) {
        d = omega_max - d;
    }
    d
}

/// Greedy assignment: repeatedly matches the globally closest
/// (truth, recovered) pair within the window; distance ties are broken by
/// amplitude proximity.
pub fn match_models<T: Real>(
    truth: &SignalModel<T>,
    recovered: &SignalModel<T>,
    window: T,
) -> MatchReport<T> {
    let om = T::from_f64_lossy(truth.omega_max() as f64);
    let nt = truth.n_terms();
    let nr = recovered.n_terms();
    let mut pairs: Vec<(T, T, usize, usize)> = Vec::with_capacity(nt * nr);
    for (i, t) in truth.terms().iter().enumerate() {
        for (j, r) in recovered.terms().iter().enumerate() {
            let d = circular_distance(t.omega, r.omega, om);
            if d <= window {
                pairs.push((d, (t.beta - r.beta).abs(), i, j));
            }
        }
    }
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.partial_cmp(&b.1).unwrap())
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    let mut assignment: Vec<Option<usize>> = vec![None; nt];
    let mut taken = vec![false; nr];
    let mut errors: Vec<T> = Vec::new();
    for (d, _, i, j) in pairs {
        if assignment[i].is_none() && !taken[j] {
            assignment[i] = Some(j);
            taken[j] = true;
            errors.push(d);
        }
    }
    let matched = errors.len();
    let success = matched == nt;
    let max_freq_err = if success {
        errors.iter().cloned().fold(T::zero(), T::max)
    } else {
        T::infinity()
    };
    errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_freq_err = if errors.is_empty() {
        T::zero()
    } else {
        errors[errors.len() / 2]
    };
    MatchReport {
        max_freq_err,
        median_freq_err,
        matched,
        success,
        assignment,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExponentialTerm, SignalModel};

    fn model(freqs: &[f64], betas: &[f64]) -> SignalModel<f64> {
        let terms = freqs
            .iter()
            .zip(betas.iter())
            .map(|(&w, &b)| ExponentialTerm::new(b, 0.0, 0.0, w))
            .collect();
        SignalModel::new(terms, 100).unwrap()
    }

    #[test]
    fn exact_match() {
        let t = model(&[10.0, 20.0, 30.0], &[1.0, 2.0, 3.0]);
        let rep = match_models(&t, &t.clone(), 0.5);
        assert!(rep.success);
        assert_eq!(rep.matched, 3);
        assert_eq!(rep.max_freq_err, 0.0);
    }

    #[test]
    fn wraparound_distance() {
        assert!((circular_distance(99.5f64, 0.5, 100.0) - 1.0).abs() < 1e-12);
        let t = model(&[99.8], &[1.0]);
        let r = model(&[0.1], &[1.0]);
        let rep = match_models(&t, &r, 0.5);
        assert!(rep.success);
        assert!((rep.max_freq_err - 0.3).abs() < 1e-9);
    }

    #[test]
    fn unmatched_term_fails() {
        let t = model(&[10.0, 50.0], &[1.0, 1.0]);
        let r = model(&[10.1], &[1.0]);
        let rep = match_models(&t, &r, 0.5);
        assert!(!rep.success);
        assert_eq!(rep.matched, 1);
        assert!(rep.max_freq_err.is_infinite());
    }

    #[test]
    fn no_double_assignment() {
        let t = model(&[10.0, 10.4], &[1.0, 2.0]);
        let r = model(&[10.1, 10.3], &[1.0, 2.0]);
        let rep = match_models(&t, &r, 0.5);
        assert!(rep.success);
        let a = rep.assignment;
        assert_ne!(a[0], a[1]);
        assert_eq!(a[0], Some(0));
        assert_eq!(a[1], Some(1));
    }
}
