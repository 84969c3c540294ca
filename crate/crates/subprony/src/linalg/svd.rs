//! Complex singular value decomposition by one-sided Jacobi rotations.
//!
//! Jacobi SVD converges to high relative accuracy, which is what the
//! rank-gap tests downstream rely on. Matrix sizes in this crate stay in
//! the low hundreds, where the O(n^2 m) sweeps are cheap.

use num_complex::Complex;

use super::matrix::ComplexMatrix;
use crate::scalar::Real;

/// Thin SVD `A = U diag(s) V^H` with `U: m x k`, `V: n x k`, `k = min(m, n)`.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: ComplexMatrix<T>,
    pub singular_values: Vec<T>,
    pub v: ComplexMatrix<T>,
}

const MAX_SWEEPS: usize = 64;

/// Thin SVD of `a`.
pub fn svd<T: Real>(a: &ComplexMatrix<T>) -> Svd<T> {
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        // A = U S V^H  <=>  A^H = V S U^H
        let t = svd_tall(&a.adjoint());
        Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        }
    }
}

/// Singular values only (no accumulation of V).
pub fn singular_values<T: Real>(a: &ComplexMatrix<T>) -> Vec<T> {
    let work = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.adjoint()
    };
    let (mut w, _) = jacobi_sweeps(work, false);
    let n = w.cols();
    let mut sv: Vec<T> = (0..n).map(|j| col_norm(&w, j)).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let _ = &mut w;
    sv
}

fn col_norm<T: Real>(m: &ComplexMatrix<T>, j: usize) -> T {
    let mut acc = T::zero();
    for i in 0..m.rows() {
        acc += m[(i, j)].norm_sqr();
    }
    acc.sqrt()
}

/// Run cyclic Jacobi sweeps on the columns of `w` (rows >= cols), optionally
/// accumulating the right rotations into `V`.
fn jacobi_sweeps<T: Real>(
    mut w: ComplexMatrix<T>,
    accumulate: bool,
) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
    let m = w.rows();
    let n = w.cols();
    let mut v = ComplexMatrix::identity(if accumulate { n } else { 0 });
    if n == 0 || m == 0 {
        return (w, v);
    }
    let tol = T::epsilon() * T::from_usize_lossy(m.max(8));
    let half = T::from_f64_lossy(0.5);

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                // 2x2 Gram block of columns p, q
                let mut app = T::zero();
                let mut aqq = T::zero();
                let mut apq = Complex::new(T::zero(), T::zero());
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    app += wp.norm_sqr();
                    aqq += wq.norm_sqr();
                    apq += wp.conj() * wq;
                }
                let abs_apq = apq.norm();
                if abs_apq <= tol * (app * aqq).sqrt() || abs_apq == T::zero() {
                    continue;
                }
                rotated = true;
                let phase = apq / abs_apq;
                let zeta = (aqq - app) * half / abs_apq;
                let t = if zeta >= T::zero() {
                    T::one() / (zeta + (T::one() + zeta * zeta).sqrt())
                } else {
                    -T::one() / (-zeta + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                // [col_p, col_q] <- [col_p, col_q] * [[c, s*phase], [-s*conj(phase), c]]
                let s_ph = phase.scale(s);
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = wp.scale(c) - s_ph.conj() * wq;
                    w[(i, q)] = s_ph * wp + wq.scale(c);
                }
                if accumulate {
                    for i in 0..n {
                        let vp = v[(i, p)];
                        let vq = v[(i, q)];
                        v[(i, p)] = vp.scale(c) - s_ph.conj() * vq;
                        v[(i, q)] = s_ph * vp + vq.scale(c);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

fn svd_tall<T: Real>(a: &ComplexMatrix<T>) -> Svd<T> {
    let m = a.rows();
    let n = a.cols();
    let (w, v) = jacobi_sweeps(a.clone(), true);

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<T> = (0..n).map(|j| col_norm(&w, j)).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let mut u = ComplexMatrix::zeros(m, n);
    let mut vv = ComplexMatrix::zeros(n, n);
    let mut sv = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        sv.push(sigma);
        if sigma > T::zero() {
            let inv = T::one() / sigma;
            for i in 0..m {
                u[(i, dst)] = w[(i, src)].scale(inv);
            }
        }
        for i in 0..n {
            vv[(i, dst)] = v[(i, src)];
        }
    }
    Svd {
        u,
        singular_values: sv,
        v: vv,
    }
}
