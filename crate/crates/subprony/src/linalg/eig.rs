//! Eigenvalues of a general complex matrix.
//!
//! Householder reduction to upper Hessenberg form followed by explicit
//! single-shift QR iteration with Wilkinson shifts. Only eigenvalues are
//! produced; the pipelines never need eigenvectors of the reduced problems.

use num_complex::Complex;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigenvalues of a square complex matrix, in no particular order.
pub fn eigenvalues<T: Real>(a: &ComplexMatrix<T>) -> Result<Vec<Complex<T>>> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::InvalidInput(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    match n {
        0 => return Ok(vec![]),
        1 => return Ok(vec![a[(0, 0)]]),
        _ => {}
    }

    let mut h = a.clone();
    hessenberg(&mut h);
    let raw = qr_iterate(&mut h)?;
    // Polish each eigenvalue against the original matrix: two rounds of
    // inverse iteration for right/left vectors, then the two-sided Rayleigh
    // quotient. Recovers the digits the QR sweep leaves on the table, which
    // the downstream high-power Vandermonde solves are sensitive to.
    Ok(raw.into_iter().map(|l| refine_eigenvalue(a, l)).collect())
}

fn refine_eigenvalue<T: Real>(a: &ComplexMatrix<T>, lam: Complex<T>) -> Complex<T> {
    let n = a.rows();
    let scale = a.norm_fro().max(T::min_positive_value());
    let mut shift = lam;
    let one = Complex::new(T::one(), T::zero());
    let mut x = vec![one; n];
    let mut y = vec![one; n];
    for _ in 0..3 {
        let mut b = a.clone();
        for i in 0..n {
            b[(i, i)] -= shift;
        }
        let Some(lu) = Lu::new(&b) else {
            // Exactly singular: shift is an exact eigenvalue already.
            return shift;
        };
        if !lu.solve(&mut x) || !lu.solve_adjoint(&mut y) {
            return shift;
        }
        normalize(&mut x);
        normalize(&mut y);
        let ax = a.mul_vec(&x);
        let mut num = Complex::new(T::zero(), T::zero());
        let mut den = Complex::new(T::zero(), T::zero());
        for i in 0..n {
            num += y[i].conj() * ax[i];
            den += y[i].conj() * x[i];
        }
        if den.norm() <= T::epsilon() * T::from_f64_lossy(16.0) {
            return shift;
        }
        let next = num / den;
        if !next.re.is_finite() || !next.im.is_finite() {
            return shift;
        }
        // Reject wild jumps (defective or ill-conditioned eigenvalue).
        if (next - lam).norm() > scale * T::from_f64_lossy(1e-2) {
            return shift;
        }
        if (next - shift).norm() <= scale * T::epsilon() {
            return next;
        }
        shift = next;
    }
    shift
}

fn normalize<T: Real>(v: &mut [Complex<T>]) {
    let norm = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
    if norm > T::zero() {
        let inv = T::one() / norm;
        for z in v.iter_mut() {
            *z = z.scale(inv);
        }
    }
}

/// Dense LU with partial pivoting, kept for the inverse-iteration polish.
struct Lu<T> {
    lu: ComplexMatrix<T>,
    pivots: Vec<usize>,
}

impl<T: Real> Lu<T> {
    fn new(a: &ComplexMatrix<T>) -> Option<Self> {
        let n = a.rows();
        let mut lu = a.clone();
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in (k + 1)..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == T::zero() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            pivots.push(p);
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in (k + 1)..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        Some(Self { lu, pivots })
    }

    /// Solve `A x = b` in place; false when the back substitution overflows.
    fn solve(&self, b: &mut [Complex<T>]) -> bool {
        let n = b.len();
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            for i in (k + 1)..n {
                let sub = self.lu[(i, k)] * b[k];
                b[i] -= sub;
            }
        }
        for k in (0..n).rev() {
            for j in (k + 1)..n {
                let sub = self.lu[(k, j)] * b[j];
                b[k] -= sub;
            }
            b[k] = b[k] / self.lu[(k, k)];
            if !b[k].re.is_finite() || !b[k].im.is_finite() {
                return false;
            }
        }
        true
    }

    /// Solve `A^H y = b` in place using the same factorization:
    /// `A = P^T L U  =>  A^H = U^H L^H P`.
    fn solve_adjoint(&self, b: &mut [Complex<T>]) -> bool {
        let n = b.len();
        // U^H w = b (lower triangular forward solve)
        for k in 0..n {
            for j in 0..k {
                let sub = self.lu[(j, k)].conj() * b[j];
                b[k] -= sub;
            }
            b[k] = b[k] / self.lu[(k, k)].conj();
            if !b[k].re.is_finite() || !b[k].im.is_finite() {
                return false;
            }
        }
        // L^H z = w (upper triangular back solve, unit diagonal)
        for k in (0..n).rev() {
            for i in (k + 1)..n {
                let sub = self.lu[(i, k)].conj() * b[i];
                b[k] -= sub;
            }
        }
        // y = P^T z: undo the row swaps in reverse order.
        for k in (0..n).rev() {
            b.swap(k, self.pivots[k]);
        }
        true
    }
}

/// In-place reduction to upper Hessenberg form by unitary reflections.
fn hessenberg<T: Real>(h: &mut ComplexMatrix<T>) {
    let n = h.rows();
    let zero = Complex::new(T::zero(), T::zero());
    for k in 0..n.saturating_sub(2) {
        // Reflector zeroing h[k+2.., k]
        let mut norm_sq = T::zero();
        for i in (k + 1)..n {
            norm_sq += h[(i, k)].norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm <= T::zero() {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > T::zero() {
            x0 / x0.norm()
        } else {
            Complex::new(T::one(), T::zero())
        };
        // u = x + phase*norm*e1; P = I - (2/u^H u) u u^H maps x to -phase*norm*e1
        let mut u: Vec<Complex<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        u[0] += phase.scale(norm);
        let uhu = u.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        if uhu <= T::zero() {
            continue;
        }
        let tau = T::from_f64_lossy(2.0) / uhu;

        // Left: rows k+1..n of columns k..n
        for j in k..n {
            let mut dot = zero;
            for (t, i) in (k + 1..n).enumerate() {
                dot += u[t].conj() * h[(i, j)];
            }
            let dot = dot.scale(tau);
            for (t, i) in (k + 1..n).enumerate() {
                let ut = u[t];
                h[(i, j)] -= dot * ut;
            }
        }
        // Right: columns k+1..n of all rows
        for i in 0..n {
            let mut dot = zero;
            for (t, j) in (k + 1..n).enumerate() {
                dot += h[(i, j)] * u[t];
            }
            let dot = dot.scale(tau);
            for (t, j) in (k + 1..n).enumerate() {
                let ut = u[t].conj();
                h[(i, j)] -= dot * ut;
            }
        }
        // Enforce exact zeros below the subdiagonal
        for i in (k + 2)..n {
            h[(i, k)] = zero;
        }
    }
}

/// Explicit single-shift QR iteration on an upper Hessenberg matrix.
fn qr_iterate<T: Real>(h: &mut ComplexMatrix<T>) -> Result<Vec<Complex<T>>> {
    let n = h.rows();
    let eps = T::epsilon();
    let hnorm = h.norm_fro().max(T::min_positive_value());
    let negligible = |h: &ComplexMatrix<T>, i: usize| -> bool {
        let s = h[(i - 1, i - 1)].norm() + h[(i, i)].norm();
        let s = if s > T::zero() { s } else { hnorm };
        h[(i, i - 1)].norm() <= eps * s
    };

    let mut eigs: Vec<Complex<T>> = Vec::with_capacity(n);
    let mut hi = n; // active block is rows/cols [lo, hi)
    let mut iters_since_deflation = 0usize;
    let mut total_iters = 0usize;
    let max_total = 60 * n.max(4);

    while hi > 0 {
        // Deflate trailing 1x1 blocks
        if hi == 1 || negligible(h, hi - 1) {
            eigs.push(h[(hi - 1, hi - 1)]);
            hi -= 1;
            iters_since_deflation = 0;
            continue;
        }
        // Find the start of the active block
        let mut lo = hi - 1;
        while lo > 0 && !negligible(h, lo) {
            lo -= 1;
        }

        total_iters += 1;
        iters_since_deflation += 1;
        if total_iters > max_total {
            return Err(Error::EigenNoConvergence);
        }

        // Shift from the trailing 2x2 of the active block
        let a = h[(hi - 2, hi - 2)];
        let b = h[(hi - 2, hi - 1)];
        let c = h[(hi - 1, hi - 2)];
        let d = h[(hi - 1, hi - 1)];
        let mu = if iters_since_deflation % 12 == 0 {
            // Ad hoc exceptional shift to break symmetry stalls
            d + Complex::new(c.norm() + b.norm(), T::zero()).scale(T::from_f64_lossy(0.75))
        } else {
            let half = T::from_f64_lossy(0.5);
            let mid = (a - d).scale(half);
            let disc = (mid * mid + b * c).sqrt();
            let e1 = d + mid - disc;
            let e2 = d + mid + disc;
            if (e1 - d).norm() <= (e2 - d).norm() {
                e1
            } else {
                e2
            }
        };

        qr_step(h, lo, hi, mu);
    }
    eigs.reverse();
    Ok(eigs)
}

/// One explicit shifted QR step on the Hessenberg block [lo, hi).
fn qr_step<T: Real>(h: &mut ComplexMatrix<T>, lo: usize, hi: usize, mu: Complex<T>) {
    let b = hi - lo;
    if b < 2 {
        return;
    }
    for i in lo..hi {
        h[(i, i)] -= mu;
    }
    // QR by Givens rotations; remember them to form R Q^H afterwards.
    let mut rot: Vec<(T, Complex<T>)> = Vec::with_capacity(b - 1);
    for i in lo..(hi - 1) {
        let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
        rot.push((c, s));
        for j in i..hi {
            let top = h[(i, j)];
            let bot = h[(i + 1, j)];
            h[(i, j)] = top.scale(c) + s * bot;
            h[(i + 1, j)] = bot.scale(c) - s.conj() * top;
        }
    }
    for (t, i) in (lo..(hi - 1)).enumerate() {
        let (c, s) = rot[t];
        let top_row = lo;
        for row in top_row..(i + 2).min(hi) {
            let ci = h[(row, i)];
            let cj = h[(row, i + 1)];
            h[(row, i)] = ci.scale(c) + cj * s.conj();
            h[(row, i + 1)] = cj.scale(c) - ci * s;
        }
    }
    for i in lo..hi {
        h[(i, i)] += mu;
    }
}

/// Complex Givens rotation: returns (c, s) with c real such that
/// `[c s; -conj(s) c] [f; g] = [r; 0]`.
fn givens<T: Real>(f: Complex<T>, g: Complex<T>) -> (T, Complex<T>) {
    let gn = g.norm();
    if gn == T::zero() {
        return (T::one(), Complex::new(T::zero(), T::zero()));
    }
    let fn_ = f.norm();
    if fn_ == T::zero() {
        return (T::zero(), g.conj() / gn);
    }
    let d = (fn_ * fn_ + gn * gn).sqrt();
    let c = fn_ / d;
    let s = (f / fn_) * g.conj().scale(T::one() / d);
    (c, s)
}
