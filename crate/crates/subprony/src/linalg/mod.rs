//! Structured-matrix construction and the numerical kernels the analysis
//! pipelines build on: Hankel/Vandermonde assembly, SVD-based numerical
//! rank, least squares, and matrix-pencil / ESPRIT eigenvalue extraction.

mod eig;
mod matrix;
mod svd;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use eig::eigenvalues;
pub use matrix::ComplexMatrix;
pub use svd::{singular_values, svd, Svd};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sequence::Samples;

/// Numerical rank of a matrix together with its full singular-value profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankEstimate<T> {
    pub rank: usize,
    pub singular_values: Vec<T>,
    pub rel_tol: T,
}

/// Hankel matrix with entry `(i, j) = f[start + (i + j) * stride]`.
pub fn build_hankel<T: Real>(
    samples: &mut impl Samples<T>,
    rows: usize,
    cols: usize,
    start: i64,
    stride: i64,
) -> Result<ComplexMatrix<T>> {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = samples.sample(start + (i + j) as i64 * stride)?;
        }
    }
    Ok(m)
}

/// Shifted Hankel: entry `(i, j) = f[start + (i + j + 1) * stride]`.
fn build_hankel_shifted<T: Real>(
    samples: &mut impl Samples<T>,
    rows: usize,
    cols: usize,
    start: i64,
    stride: i64,
) -> Result<ComplexMatrix<T>> {
    build_hankel(samples, rows, cols, start + stride, stride)
}

/// Vandermonde matrix with entry `(j, i) = nodes[i]^j`, `j = 0..rows-1`.
pub fn build_vandermonde<T: Real>(nodes: &[Complex<T>], rows: usize) -> ComplexMatrix<T> {
    let n = nodes.len();
    let mut m = ComplexMatrix::zeros(rows, n);
    for (i, &node) in nodes.iter().enumerate() {
        let mut p = Complex::new(T::one(), T::zero());
        for j in 0..rows {
            m[(j, i)] = p;
            p *= node;
        }
    }
    m
}

/// Vandermonde block with row powers `first_power .. first_power + rows`.
pub fn build_vandermonde_from<T: Real>(
    nodes: &[Complex<T>],
    rows: usize,
    first_power: usize,
) -> ComplexMatrix<T> {
    let n = nodes.len();
    let mut m = ComplexMatrix::zeros(rows, n);
    for (i, &node) in nodes.iter().enumerate() {
        let mut p = powi(node, first_power);
        for j in 0..rows {
            m[(j, i)] = p;
            p *= node;
        }
    }
    m
}

fn powi<T: Real>(z: Complex<T>, mut e: usize) -> Complex<T> {
    let mut base = z;
    let mut acc = Complex::new(T::one(), T::zero());
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// Numerical rank: number of singular values above `rel_tol * sigma_1`.
///
/// The full singular-value list is returned for diagnostics. A leading
/// singular value below an absolute floor yields rank 0.
pub fn numerical_rank<T: Real>(m: &ComplexMatrix<T>, rel_tol: T) -> Result<RankEstimate<T>> {
    if !(rel_tol > T::zero() && rel_tol < T::one()) {
        return Err(Error::InvalidInput(format!(
            "rel_tol must lie in (0,1), got {rel_tol}"
        )));
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let sv = singular_values(m);
    let rank = rank_from_singular_values(&sv, rel_tol);
    Ok(RankEstimate {
        rank,
        singular_values: sv,
        rel_tol,
    })
}

/// Rank test shared by `numerical_rank` and the collision-stage detectors:
/// counts `sigma_k > max(rel_tol * sigma_1, abs_floor)`.
pub(crate) fn rank_with_floor<T: Real>(sv: &[T], rel_tol: T, abs_floor: T) -> usize {
    match sv.first() {
        None => 0,
        Some(&s1) if s1 < T::from_f64_lossy(1e-300) => 0,
        Some(&s1) => {
            let cut = (rel_tol * s1).max(abs_floor);
            sv.iter().take_while(|&&s| s > cut).count()
        }
    }
}

fn rank_from_singular_values<T: Real>(sv: &[T], rel_tol: T) -> usize {
    rank_with_floor(sv, rel_tol, T::zero())
}

/// Least-squares solution together with a conditioning flag.
#[derive(Debug, Clone)]
pub struct LsSolution<T> {
    pub x: Vec<Complex<T>>,
    /// Set when the factorization found the matrix rank-deficient below
    /// tolerance; the solution is the minimum-norm pseudoinverse solve.
    pub ill_conditioned: bool,
}

/// Reusable least-squares factorization of a fixed coefficient matrix.
///
/// Backed by the SVD pseudoinverse, which is rank-revealing and
/// deterministic for a fixed input.
#[derive(Debug, Clone)]
pub struct LsFactor<T> {
    svd: Svd<T>,
    rows: usize,
    cols: usize,
    cutoff: T,
    ill_conditioned: bool,
}

impl<T: Real> LsFactor<T> {
    pub fn new(a: &ComplexMatrix<T>) -> Result<Self> {
        if a.rows() < a.cols() || a.cols() == 0 {
            return Err(Error::InvalidInput(format!(
                "least squares needs rows >= cols >= 1, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if !a.is_finite() {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let fac = svd(a);
        let s1 = fac.singular_values[0];
        let dim = T::from_usize_lossy(a.rows().max(a.cols()));
        let cutoff = s1 * T::epsilon() * dim;
        let flag_cut = s1 * T::epsilon() * dim * T::from_f64_lossy(1e4);
        let smin = *fac.singular_values.last().unwrap();
        Ok(Self {
            svd: fac,
            rows: a.rows(),
            cols: a.cols(),
            cutoff,
            ill_conditioned: smin <= flag_cut,
        })
    }

    pub fn ill_conditioned(&self) -> bool {
        self.ill_conditioned
    }

    /// Diagonal of `(A^H A)^{-1} = V Sigma^{-2} V^H`; propagates a residual
    /// noise estimate onto the solution entries.
    pub fn normal_inverse_diagonal(&self) -> Vec<T> {
        (0..self.cols)
            .map(|i| {
                let mut acc = T::zero();
                for l in 0..self.cols {
                    let s = self.svd.singular_values[l];
                    if s > self.cutoff {
                        acc += self.svd.v[(i, l)].norm_sqr() / (s * s);
                    }
                }
                acc
            })
            .collect()
    }

    /// Minimum-norm least-squares solve for one right-hand side.
    pub fn solve(&self, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if b.len() != self.rows {
            return Err(Error::InvalidInput(format!(
                "rhs length {} does not match {} rows",
                b.len(),
                self.rows
            )));
        }
        let zero = Complex::new(T::zero(), T::zero());
        let mut x = vec![zero; self.cols];
        for l in 0..self.cols {
            let s = self.svd.singular_values[l];
            if s <= self.cutoff {
                continue;
            }
            // (u_l^H b) / s
            let mut dot = zero;
            for i in 0..self.rows {
                dot += self.svd.u[(i, l)].conj() * b[i];
            }
            let dot = dot.scale(T::one() / s);
            for j in 0..self.cols {
                x[j] += self.svd.v[(j, l)] * dot;
            }
        }
        Ok(x)
    }
}

/// Solve `min ||a x - b||_2` by a rank-revealing factorization.
pub fn solve_least_squares<T: Real>(
    a: &ComplexMatrix<T>,
    b: &[Complex<T>],
) -> Result<LsSolution<T>> {
    let fac = LsFactor::new(a)?;
    let x = fac.solve(b)?;
    Ok(LsSolution {
        x,
        ill_conditioned: fac.ill_conditioned(),
    })
}

/// Relative floor used to decide whether the pencil's rank-`n` truncation
/// is numerically meaningful.
fn pencil_rank_guard<T: Real>(rows: usize, cols: usize) -> T {
    T::epsilon() * T::from_usize_lossy(rows.max(cols)) * T::from_f64_lossy(16.0)
}

/// Generalized eigenvalues of the (possibly rectangular) Hankel pencil
/// `H^(1) v = lambda H^(0) v` built at the given start/stride.
///
/// Both blocks are `rows x n`; they are projected onto the rank-`n`
/// dominant subspace of the unshifted block via its SVD and the reduced
/// `n x n` standard eigenproblem is solved. Order of the returned
/// eigenvalues is unspecified.
pub fn pencil_eigenvalues<T: Real>(
    samples: &mut impl Samples<T>,
    n: usize,
    rows: usize,
    start: i64,
    stride: i64,
) -> Result<Vec<Complex<T>>> {
    if n == 0 || rows < n {
        return Err(Error::InvalidInput(format!(
            "pencil needs rows >= n >= 1, got rows={rows}, n={n}"
        )));
    }
    let h0 = build_hankel(samples, rows, n, start, stride)?;
    let h1 = build_hankel_shifted(samples, rows, n, start, stride)?;
    if !h0.is_finite() || !h1.is_finite() {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    let fac = svd(&h0);
    let guard = pencil_rank_guard::<T>(rows, n);
    let s1 = fac.singular_values[0];
    let effective = rank_with_floor(&fac.singular_values, guard, T::zero());
    if s1 <= T::zero() || effective < n {
        return Err(Error::OrderMismatch {
            requested: n,
            detected: effective,
        });
    }
    // A = Sigma^{-1} U^H H1 V  (n x n), spectrum = generalized eigenvalues
    let w = h1.mul_mat(&fac.v); // rows x n
    let mut a = fac.u.adjoint().mul_mat(&w); // n x n
    for i in 0..n {
        let inv = T::one() / fac.singular_values[i];
        for j in 0..n {
            a[(i, j)] = a[(i, j)].scale(inv);
        }
    }
    eigenvalues(&a)
}

/// Eigenvalues by ESPRIT: rotational invariance of the signal subspace of
/// the Hankel data matrix built from `count` consecutive samples of the
/// stride grid. `window` is the Hankel column count; the data matrix is
/// `(count - window + 1) x window`.
pub fn esprit_eigenvalues<T: Real>(
    samples: &mut impl Samples<T>,
    n: usize,
    window: usize,
    count: usize,
    start: i64,
    stride: i64,
) -> Result<Vec<Complex<T>>> {
    if n == 0 || window < n {
        return Err(Error::InvalidInput(format!(
            "esprit needs window >= n >= 1, got window={window}, n={n}"
        )));
    }
    if count < window + n {
        return Err(Error::InvalidInput(format!(
            "esprit needs count >= window + n, got count={count}"
        )));
    }
    let rows = count - window + 1;
    let g = build_hankel(samples, rows, window, start, stride)?;
    if !g.is_finite() {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    let fac = svd(&g);
    let guard = pencil_rank_guard::<T>(rows, window);
    let effective = rank_with_floor(&fac.singular_values, guard, T::zero());
    if effective < n {
        return Err(Error::OrderMismatch {
            requested: n,
            detected: effective,
        });
    }
    // Signal subspace: first n left singular vectors; solve U1 Phi = U2.
    let us = fac.u.left_cols(n);
    let u1 = ComplexMatrix::from_fn(rows - 1, n, |i, j| us[(i, j)]);
    let u2 = ComplexMatrix::from_fn(rows - 1, n, |i, j| us[(i + 1, j)]);
    let lsf = LsFactor::new(&u1)?;
    let mut phi = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let col = lsf.solve(&u2.col(j))?;
        for i in 0..n {
            phi[(i, j)] = col[i];
        }
    }
    eigenvalues(&phi)
}
