//! Built-in example models and their canonical sampling schedules.
//!
//! Frequencies are normalized into `[0, omega_max)`; for terms specified
//! with negative frequencies this changes the continuous-time signal but
//! leaves every sample on the integer grid `t = j delta` untouched, which
//! is all the analysis ever reads.

use crate::model::{ExponentialTerm, SamplingScheme, SignalModel};
use crate::scalar::Real;

fn term<T: Real>(beta: f64, gamma: f64, psi: f64, omega: f64) -> ExponentialTerm<T> {
    ExponentialTerm::new(
        T::from_f64_lossy(beta),
        T::from_f64_lossy(gamma),
        T::from_f64_lossy(psi),
        T::from_f64_lossy(omega),
    )
}

/// 20-term clustered model (collision-free at r = 11), bandwidth 1000.
pub fn table1<T: Real>() -> SignalModel<T> {
    let rows: [(f64, f64, f64, f64); 20] = [
        (6.5, 0.15, -0.19, 1000.0 - 453.1),
        (6.8, 0.0, -0.132, 1000.0 - 452.19),
        (6.8, 0.3, -0.183, 1000.0 - 451.02),
        (6.4, 0.9, -0.11, 1000.0 - 450.21),
        (7.1, 0.7, -0.21, 1000.0 - 448.39),
        (4.71, 0.12, -0.106, 1000.0 - 132.5),
        (3.9, 0.1, -0.129, 1000.0 - 131.4),
        (7.2, -0.234, -0.203, 1000.0 - 130.01),
        (7.43, 0.2, -0.16, 1000.0 - 129.17),
        (4.4, -0.52, -0.19, 1000.0 - 128.39),
        (3.0, 0.21, -0.101, 9.1),
        (3.0, -0.8, -0.127, 11.81),
        (7.2, -0.106, -0.21, 126.01),
        (6.53, 0.2, -0.15, 127.62),
        (6.7, -0.3, -0.173, 128.98),
        (6.8, -0.15, -0.11, 334.01),
        (6.0, 0.26, -0.12, 335.18),
        (7.1, -0.2, -0.157, 336.01),
        (7.1, 0.0, -0.120, 337.91),
        (6.0, -0.1, -0.18, 339.61),
    ];
    let terms = rows.iter().map(|&(b, g, p, o)| term(b, g, p, o)).collect();
    SignalModel::new(terms, 1000).expect("table1 preset is valid")
}

/// 6-term undamped model whose terms collide 3+1+2 at r = 100, bandwidth 1000.
pub fn table2<T: Real>() -> SignalModel<T> {
    let pi = std::f64::consts::PI;
    let rows: [(f64, f64, f64, f64); 6] = [
        (18.0, 0.0, 0.0, 191.9),
        (20.0, pi, 0.0, 291.9),
        (20.0, 0.0, 0.0, 391.9),
        (5.0, 0.0, 0.0, 526.2),
        (5.0, 0.0, 0.0, 858.1),
        (11.0, 0.0, 0.0, 958.1),
    ];
    let terms = rows.iter().map(|&(b, g, p, o)| term(b, g, p, o)).collect();
    SignalModel::new(terms, 1000).expect("table2 preset is valid")
}

/// 7-term unit-amplitude model with an exact cancellation at r = 5
/// (the first four terms alias together with coefficients summing to zero),
/// bandwidth 100.
pub fn cancel7<T: Real>() -> SignalModel<T> {
    let pi = std::f64::consts::PI;
    let rows: [(f64, f64, f64, f64); 7] = [
        (1.0, 0.0, 0.0, 1.0),
        (1.0, pi, 0.0, 21.0),
        (1.0, 0.0, 0.0, 41.0),
        (1.0, pi, 0.0, 61.0),
        (1.0, 2.0 * pi * 0.72, 0.0, 11.0),
        (1.0, -(0.36) * pi, 0.0, 31.0), // -exp(i 2 pi 0.32) in principal phase
        (1.0, 0.0, 0.0, 9.0),
    ];
    let terms = rows.iter().map(|&(b, g, p, o)| term(b, g, p, o)).collect();
    SignalModel::new(terms, 100).expect("cancel7 preset is valid")
}

/// 7-term alternating-sign model used for collision counting: at r = 5 the
/// first four terms cancel and the last three collide; at r = 12 four
/// aliased terms stay visible. Bandwidth 100.
pub fn collide7<T: Real>() -> SignalModel<T> {
    let pi = std::f64::consts::PI;
    let rows: [(f64, f64, f64, f64); 7] = [
        (1.0, 0.0, 0.0, 1.0),
        (1.0, pi, 0.0, 21.0),
        (1.0, 0.0, 0.0, 41.0),
        (1.0, pi, 0.0, 61.0),
        (1.0, 0.0, 0.0, 11.0),
        (1.0, pi, 0.0, 31.0),
        (1.0, 0.0, 0.0, 51.0),
    ];
    let terms = rows.iter().map(|&(b, g, p, o)| term(b, g, p, o)).collect();
    SignalModel::new(terms, 100).expect("collide7 preset is valid")
}

/// Canonical schedule for the table1 experiment: r=11, rho=5, 180 base
/// samples, budget 60, one 60-sample shift batch (240 samples total).
pub fn table1_scheme<T: Real>() -> SamplingScheme<T> {
    SamplingScheme {
        omega_max: 1000,
        delta: T::from_f64_lossy(1e-3),
        r: 11,
        rho: 5,
        base_samples: 180,
        term_budget: 60,
        shift_samples: 60,
        max_shift: 119,
    }
}

/// Canonical schedule for the table2 experiment: r=100, rho=133, 30x30
/// pencil, 60x30 Vandermonde, shift batches of 10 up to k=12.
pub fn table2_scheme<T: Real>() -> SamplingScheme<T> {
    SamplingScheme {
        omega_max: 1000,
        delta: T::from_f64_lossy(1e-3),
        r: 100,
        rho: 133,
        base_samples: 60,
        term_budget: 30,
        shift_samples: 10,
        max_shift: 12,
    }
}

/// Canonical schedule for the cancellation example: r=5, rho=12, shifts
/// pursued to k=9.
pub fn cancel7_scheme<T: Real>() -> SamplingScheme<T> {
    SamplingScheme {
        omega_max: 100,
        delta: T::from_f64_lossy(1e-2),
        r: 5,
        rho: 12,
        base_samples: 10,
        term_budget: 5,
        shift_samples: 8,
        max_shift: 9,
    }
}

/// Schedule for the collision-count example at r=5 (shares the cancel7 grid).
pub fn collide7_scheme<T: Real>() -> SamplingScheme<T> {
    cancel7_scheme()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_sizes_and_bandwidths() {
        assert_eq!(table1::<f64>().n_terms(), 20);
        assert_eq!(table1::<f64>().omega_max(), 1000);
        assert_eq!(table2::<f64>().n_terms(), 6);
        assert_eq!(cancel7::<f64>().n_terms(), 7);
        assert_eq!(collide7::<f64>().n_terms(), 7);
        table1_scheme::<f64>().validate().unwrap();
        table2_scheme::<f64>().validate().unwrap();
        cancel7_scheme::<f64>().validate().unwrap();
    }

    #[test]
    fn preset_fidelity_table2() {
        // Hard-coded against the published parameter list.
        let m = table2::<f64>();
        let omegas: Vec<f64> = m.terms().iter().map(|t| t.omega).collect();
        assert_eq!(omegas, vec![191.9, 291.9, 391.9, 526.2, 858.1, 958.1]);
        let alphas: Vec<(f64, f64)> = m
            .terms()
            .iter()
            .map(|t| {
                let a = t.alpha();
                (a.re, a.im)
            })
            .collect();
        let want = [18.0, -20.0, 20.0, 5.0, 5.0, 11.0];
        for ((re, im), w) in alphas.iter().zip(want.iter()) {
            assert!((re - w).abs() < 1e-12 && im.abs() < 1e-12);
        }
        assert!(m.terms().iter().all(|t| t.psi == 0.0));
    }

    #[test]
    fn preset_fidelity_cancel7() {
        let m = cancel7::<f64>();
        let omegas: Vec<f64> = m.terms().iter().map(|t| t.omega).collect();
        assert_eq!(omegas, vec![1.0, 21.0, 41.0, 61.0, 11.0, 31.0, 9.0]);
        // First four coefficients alternate +1, -1; they cancel at r=5.
        let sum: num_complex::Complex64 = m.terms()[..4].iter().map(|t| t.alpha()).sum();
        assert!(sum.norm() < 1e-14);
        // Fifth and sixth: exp(i 2 pi 0.72), -exp(i 2 pi 0.32).
        let a5 = m.terms()[4].alpha();
        let w5 = num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 0.72);
        assert!((a5 - w5).norm() < 1e-12);
        let a6 = m.terms()[5].alpha();
        let w6 = -num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 0.32);
        assert!((a6 - w6).norm() < 1e-12);
    }

    #[test]
    fn preset_fidelity_table1_spot_checks() {
        let m = table1::<f64>();
        let t0 = &m.terms()[0];
        assert_eq!(t0.beta, 6.5);
        assert_eq!(t0.gamma, 0.15);
        assert_eq!(t0.psi, -0.19);
        assert!((t0.omega - 546.9).abs() < 1e-12);
        let t18 = &m.terms()[18];
        assert_eq!(t18.beta, 7.1);
        assert_eq!(t18.psi, -0.120);
        assert!((t18.omega - 337.91).abs() < 1e-12);
    }
}
