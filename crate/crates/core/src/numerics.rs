//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra` dense matrices over `Complex64`. Tensor factors are
//! ordered lexicographically with the left factor varying slowest, which is
//! also the convention of [`kron`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Absolute tolerance for equalities and relative tolerance for rank decisions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eq_tol: f64,
    pub rank_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            eq_tol: 1e-9,
            rank_tol: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(eq_tol: f64, rank_tol: f64) -> Result<Self> {
        if !(eq_tol > 0.0 && eq_tol.is_finite() && rank_tol > 0.0 && rank_tol.is_finite()) {
            return Err(Error::Invalid(format!(
                "tolerances must be positive and finite (eq_tol={eq_tol}, rank_tol={rank_tol})"
            )));
        }
        Ok(Tolerance { eq_tol, rank_tol })
    }
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.ncols() != b.nrows() {
        return Err(Error::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(a * b)
}

/// Kronecker product; `(A⊗B)[(i,k),(j,l)] = A[i,j] B[k,l]`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

pub fn kron_all(ms: &[&Matrix]) -> Matrix {
    ms.iter()
        .fold(Matrix::identity(1, 1), |acc, m| kron(&acc, m))
}

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> Matrix {
    Matrix::zeros(r, c)
}

pub fn frobenius(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius distance, the residual measure used by every check.
pub fn dist(a: &Matrix, b: &Matrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn is_zero(m: &Matrix, tol: Tolerance) -> bool {
    m.iter().all(|z| z.norm() <= tol.eq_tol)
}

/// Thin SVD `M = U Σ V*` with singular values sorted descending.
///
/// Computed from a QR reduction followed by the Hermitian eigenproblem of the
/// dilation `[[0, A], [A*, 0]]`, whose eigenvalues are `±σ`. This keeps the
/// absolute accuracy of the singular values at the level of `ε‖M‖`.
pub fn thin_svd(m: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (n, k) = m.shape();
    if n == 0 || k == 0 {
        return (Matrix::zeros(n, 0), Vec::new(), Matrix::zeros(k, 0));
    }
    if n >= k {
        let qr = m.clone().qr();
        let (u, s, v) = square_svd(&qr.r());
        (qr.q() * u, s, v)
    } else {
        let qr = m.adjoint().qr();
        let (u, s, w) = square_svd(&qr.r().adjoint());
        (u, s, qr.q() * w)
    }
}

fn square_svd(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let p = a.nrows();
    let mut h = Matrix::zeros(2 * p, 2 * p);
    h.view_mut((0, p), (p, p)).copy_from(a);
    h.view_mut((p, 0), (p, p)).copy_from(&a.adjoint());
    let e = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..2 * p).collect();
    order.sort_by(|&i, &j| {
        e.eigenvalues[j]
            .partial_cmp(&e.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let r2 = std::f64::consts::SQRT_2;
    let mut u = Matrix::zeros(p, p);
    let mut v = Matrix::zeros(p, p);
    let mut s = Vec::with_capacity(p);
    for (col, &i) in order.iter().take(p).enumerate() {
        let x = e.eigenvectors.column(i);
        u.set_column(col, &(x.rows(0, p) * c(r2)));
        v.set_column(col, &(x.rows(p, p) * c(r2)));
        s.push(e.eigenvalues[i].max(0.0));
    }
    (u, s, v)
}

fn sorted_svd(m: &Matrix) -> (Matrix, Vec<f64>) {
    let (u, s, _) = thin_svd(m);
    (u, s)
}

/// Rank from singular values relative to the largest one.
pub fn numerical_rank(m: &Matrix, tol: Tolerance) -> usize {
    if m.is_empty() {
        return 0;
    }
    let (_, s) = sorted_svd(m);
    rank_from(&s, tol)
}

fn rank_from(s: &[f64], tol: Tolerance) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    if smax <= tol.eq_tol {
        return 0;
    }
    s.iter().filter(|&&x| x > tol.rank_tol * smax).count()
}

/// Orthonormal basis of the column space, as the columns of an isometry.
///
/// The basis does not depend on the gauge of the SVD: the range projector is
/// formed first and its columns are orthonormalized by Gram–Schmidt with
/// pivoting on the largest residual, ties going to the lowest index.
pub fn column_space_isometry(m: &Matrix, tol: Tolerance) -> Matrix {
    let n = m.nrows();
    if m.is_empty() {
        return Matrix::zeros(n, 0);
    }
    let (u, s) = sorted_svd(m);
    let r = rank_from(&s, tol);
    if r == 0 {
        return Matrix::zeros(n, 0);
    }
    let ur = u.columns(0, r).into_owned();
    // column i of the projector has coordinates conj(row i of ur) in the ur frame
    let coords: Vec<DVector<C64>> = (0..n)
        .map(|i| ur.row(i).transpose().map(|z| z.conj()))
        .collect();
    let mut res: Vec<f64> = coords.iter().map(|v| v.norm_squared()).collect();
    let mut qs: Vec<DVector<C64>> = Vec::with_capacity(r);
    let mut used = vec![false; n];
    for _ in 0..r {
        let best = res
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(_, &x)| x)
            .fold(0.0_f64, f64::max);
        let pick = (0..n)
            .find(|&i| !used[i] && res[i] >= (1.0 - 1e-9) * best)
            .expect("rank exceeds available columns");
        used[pick] = true;
        let mut v = coords[pick].clone();
        for _ in 0..2 {
            for q in &qs {
                let p = q.dotc(&v);
                v -= q * p;
            }
        }
        let nv = v.norm();
        v /= C64::new(nv, 0.0);
        for (i, ci) in coords.iter().enumerate() {
            if !used[i] {
                res[i] -= v.dotc(ci).norm_sqr();
            }
        }
        qs.push(v);
    }
    let mut q = Matrix::zeros(r, r);
    for (k, v) in qs.iter().enumerate() {
        q.set_column(k, v);
    }
    ur * q
}

/// `A* B`, skipping zero entries; fast when both factors are sparse.
pub fn adjoint_mul_sparse(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.nrows(), b.nrows(), "adjoint_mul_sparse: row counts differ");
    let mut out = Matrix::zeros(a.ncols(), b.ncols());
    for x in 0..a.nrows() {
        let ra: Vec<(usize, C64)> = (0..a.ncols())
            .filter_map(|i| {
                let z = a[(x, i)];
                (z != ZERO).then(|| (i, z.conj()))
            })
            .collect();
        if ra.is_empty() {
            continue;
        }
        for j in 0..b.ncols() {
            let w = b[(x, j)];
            if w != ZERO {
                for &(i, z) in &ra {
                    out[(i, j)] += z * w;
                }
            }
        }
    }
    out
}

/// Eigenvalues of the Hermitian part, ascending.
pub fn hermitian_eigenvalues(g: &Matrix) -> Vec<f64> {
    if g.is_empty() {
        return Vec::new();
    }
    let h = (g + g.adjoint()) * c(0.5);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

pub fn psd_check(g: &Matrix, tol: Tolerance) -> bool {
    if g.nrows() != g.ncols() {
        return false;
    }
    if dist(g, &g.adjoint()) > tol.eq_tol * frobenius(g).max(1.0) {
        return false;
    }
    hermitian_eigenvalues(g)
        .first()
        .map_or(true, |&l| l >= -tol.eq_tol)
}

/// Least-squares solution of `A X = B` through the pseudo-inverse.
pub fn least_squares(a: &Matrix, b: &Matrix, tol: Tolerance) -> Result<Matrix> {
    if a.nrows() != b.nrows() {
        return Err(Error::Shape(format!(
            "least squares with {} equations and {} right-hand rows",
            a.nrows(),
            b.nrows()
        )));
    }
    if a.ncols() == 0 {
        return Ok(Matrix::zeros(0, b.ncols()));
    }
    let (u, sv, v) = thin_svd(a);
    let r = rank_from(&sv, tol);
    let mut out = Matrix::zeros(a.ncols(), b.ncols());
    for k in 0..r {
        let coef = u.column(k).adjoint() * b / c(sv[k]);
        out += v.column(k) * coef;
    }
    Ok(out)
}

pub fn inverse(m: &Matrix) -> Result<Matrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!("inverse of {}x{}", m.nrows(), m.ncols())));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Rank("matrix is singular".into()))
}

/// Row-major vectorization: entry `(i,j)` goes to index `i*cols + j`.
///
/// With this order a vector of `H⊗K` and a `dim H × dim K` matrix are the same data.
pub fn vectorize(m: &Matrix) -> Matrix {
    let (r, cl) = m.shape();
    Matrix::from_fn(r * cl, 1, |k, _| m[(k / cl, k % cl)])
}

pub fn unvectorize(v: &Matrix, rows: usize, cols: usize) -> Result<Matrix> {
    if v.len() != rows * cols {
        return Err(Error::Shape(format!(
            "cannot reshape {} entries to {rows}x{cols}",
            v.len()
        )));
    }
    Ok(Matrix::from_fn(rows, cols, |i, j| v[i * cols + j]))
}

/// Column `k` as an owned `n × 1` matrix.
pub fn column(m: &Matrix, k: usize) -> Matrix {
    m.columns(k, 1).into_owned()
}

pub fn conj(m: &Matrix) -> Matrix {
    m.map(|z| z.conj())
}

/// Stack matrices of equal row count side by side.
pub fn hstack(ms: &[Matrix], rows: usize) -> Matrix {
    let cols: usize = ms.iter().map(|m| m.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut off = 0;
    for m in ms {
        out.view_mut((0, off), (rows, m.ncols())).copy_from(m);
        off += m.ncols();
    }
    out
}

pub fn vstack(ms: &[Matrix], cols: usize) -> Matrix {
    let rows: usize = ms.iter().map(|m| m.nrows()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut off = 0;
    for m in ms {
        out.view_mut((off, 0), (m.nrows(), cols)).copy_from(m);
        off += m.nrows();
    }
    out
}

/// Multiply by a phase so that the largest entry (first in row-major order
/// among near-ties) is real and positive.
pub fn fix_phase(m: &Matrix) -> Matrix {
    let mut best = 0.0_f64;
    for z in m.iter() {
        best = best.max(z.norm());
    }
    if best == 0.0 {
        return m.clone();
    }
    let (r, cl) = m.shape();
    for i in 0..r {
        for j in 0..cl {
            let z = m[(i, j)];
            if z.norm() >= (1.0 - 1e-9) * best {
                let ph = z.conj() / z.norm();
                return m * ph;
            }
        }
    }
    m.clone()
}
