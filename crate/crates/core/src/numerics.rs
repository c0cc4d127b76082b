//! Small dense complex-matrix kernel.
//!
//! Everything in this crate works with matrices of dimension 2, 3 or 4, so
//! [`ComplexMatrix`] stores its entries inline in a fixed 4×4 buffer and all
//! spectral routines are cyclic Jacobi methods. Two-qubit indices use the
//! lexicographic order (+½+½, +½−½, −½+½, −½−½).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

pub type C64 = Complex64;

/// Largest tolerated `|m[j][k] - conj(m[k][j])|` for Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Largest tolerated `|Tr m - 1|` for density matrices.
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues above `-PSD_TOL` count as round-off and are clamped to zero.
pub const PSD_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 500;
const OFF_DIAGONAL_TOL: f64 = 1e-13;
const MAX_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix is not Hermitian (symmetry residual {0:e})")]
    NotHermitian(f64),
    #[error("Jacobi iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("trace {0} differs from 1")]
    BadTrace(f64),
    #[error("expected dimension {expected}, found {found}")]
    WrongDim { expected: usize, found: usize },
    #[error("unsupported matrix dimension {0}")]
    UnsupportedDim(usize),
    #[error("expected {expected} entries, found {found}")]
    WrongLength { expected: usize, found: usize },
}

/// Dense `dim × dim` complex matrix with `dim ∈ {1, 2, 3, 4}`.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [C64; MAX_DIM * MAX_DIM],
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "matrix dimension {dim} outside 1..=4"
        );
        Self {
            dim,
            data: [C64::new(0.0, 0.0); MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |j, k| if j == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |j, k| {
            if j == k {
                C64::new(diag[j], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            for k in 0..dim {
                m[(j, k)] = f(j, k);
            }
        }
        m
    }

    /// Builds a matrix from row-major real and imaginary parts.
    pub fn from_parts(dim: usize, re: &[f64], im: &[f64]) -> Result<Self, NumericsError> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(NumericsError::UnsupportedDim(dim));
        }
        for part in [re, im] {
            if part.len() != dim * dim {
                return Err(NumericsError::WrongLength {
                    expected: dim * dim,
                    found: part.len(),
                });
            }
        }
        Ok(Self::from_fn(dim, |j, k| {
            C64::new(re[j * dim + k], im[j * dim + k])
        }))
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self, NumericsError> {
        let dim = rows.len();
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(NumericsError::UnsupportedDim(dim));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(NumericsError::WrongLength {
                expected: dim,
                found: bad.len(),
            });
        }
        Ok(Self::from_fn(dim, |j, k| rows[j][k]))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major real parts.
    pub fn real_parts(&self) -> Vec<f64> {
        self.entries().map(|z| z.re).collect()
    }

    /// Row-major imaginary parts.
    pub fn imag_parts(&self) -> Vec<f64> {
        self.entries().map(|z| z.im).collect()
    }

    /// Row-major iterator over the entries.
    pub fn entries(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.dim).flat_map(move |j| (0..self.dim).map(move |k| self[(j, k)]))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |j, k| self[(k, j)].conj())
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.dim, |j, k| self[(j, k)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |j, k| self[(k, j)])
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_fn(self.dim, |j, k| self[(j, k)] * factor)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|j| self[(j, j)]).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|j| self[(j, j)].re).collect()
    }

    /// `max |m[j][k] - conj(m[k][j])|`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..self.dim {
            for k in j..self.dim {
                worst = worst.max((self[(j, k)] - self[(k, j)].conj()).norm());
            }
        }
        worst
    }

    /// `(m + m†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |j, k| (self[(j, k)] + self[(k, j)].conj()) * 0.5)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Kronecker product; the result dimension must not exceed 4.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |j, k| self[(j / m, k / m)] * other[(j % m, k % m)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (j, k): (usize, usize)) -> &C64 {
        debug_assert!(j < self.dim && k < self.dim);
        &self.data[j * MAX_DIM + k]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (j, k): (usize, usize)) -> &mut C64 {
        debug_assert!(j < self.dim && k < self.dim);
        &mut self.data[j * MAX_DIM + k]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        ComplexMatrix::from_fn(self.dim, |j, k| {
            (0..self.dim).map(|l| self[(j, l)] * rhs[(l, k)]).sum()
        })
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sum");
        ComplexMatrix::from_fn(self.dim, |j, k| self[(j, k)] + rhs[(j, k)])
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in difference");
        ComplexMatrix::from_fn(self.dim, |j, k| self[(j, k)] - rhs[(j, k)])
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for j in 0..self.dim {
            write!(f, "  ")?;
            for k in 0..self.dim {
                let z = self[(j, k)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl EigenResult {
    /// `V · diag(λ) · V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply(|x| x)
    }

    /// `V · diag(f(λ)) · V†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.vectors;
        let n = v.dim();
        let mapped: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        ComplexMatrix::from_fn(n, |j, k| {
            (0..n)
                .map(|l| v[(j, l)] * v[(k, l)].conj() * mapped[l])
                .sum()
        })
    }

    pub fn min_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// One complex Jacobi rotation acting on the index pair `(p, q)`.
///
/// The rotation `G` zeroes the `(p, q)` entry of the 2×2 Gram-type block
/// `[[app, apq], [conj(apq), aqq]]`; columns `p, q` of any matrix are mapped
/// by `X ← X·G`.
#[derive(Debug, Clone, Copy)]
struct Rotation {
    c: f64,
    s: f64,
    /// `e^{-iφ}` where `φ = arg(apq)`.
    phase: C64,
    /// `tan θ`.
    t: f64,
}

impl Rotation {
    fn new(app: f64, aqq: f64, apq: C64) -> Self {
        let r = apq.norm();
        let phase = if r > 0.0 {
            apq.conj() / r
        } else {
            C64::new(1.0, 0.0)
        };
        let theta = (aqq - app) / (2.0 * r);
        let t = if theta.is_infinite() {
            0.0
        } else {
            let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
            sign / (theta.abs() + (theta * theta + 1.0).sqrt())
        };
        let c = 1.0 / (t * t + 1.0).sqrt();
        Self {
            c,
            s: t * c,
            phase,
            t,
        }
    }

    /// `X ← X·G` on columns `p, q`.
    fn apply_columns(&self, x: &mut ComplexMatrix, p: usize, q: usize) {
        for k in 0..x.dim() {
            let xp = x[(k, p)];
            let xq = x[(k, q)] * self.phase;
            x[(k, p)] = xp * self.c - xq * self.s;
            x[(k, q)] = xp * self.s + xq * self.c;
        }
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.
///
/// Deterministic: the rotation order is fixed and no randomization is used.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<EigenResult, NumericsError> {
    let residual = m.hermitian_residual();
    if residual > HERMITIAN_TOL {
        return Err(NumericsError::NotHermitian(residual));
    }
    let n = m.dim();
    let mut a = m.hermitian_part();
    for j in 0..n {
        a[(j, j)] = C64::new(a[(j, j)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);
    let tol = OFF_DIAGONAL_TOL * a.frobenius_norm().max(1.0);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() == 0.0 {
                    continue;
                }
                let rot = Rotation::new(a[(p, p)].re, a[(q, q)].re, apq);
                let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
                let r = apq.norm();
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)] * rot.phase;
                    let new_kp = akp * rot.c - akq * rot.s;
                    let new_kq = akp * rot.s + akq * rot.c;
                    a[(k, p)] = new_kp;
                    a[(p, k)] = new_kp.conj();
                    a[(k, q)] = new_kq;
                    a[(q, k)] = new_kq.conj();
                }
                a[(p, p)] = C64::new(app - rot.t * r, 0.0);
                a[(q, q)] = C64::new(aqq + rot.t * r, 0.0);
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                rot.apply_columns(&mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > tol {
        return Err(NumericsError::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.total_cmp(&a[(x, x)].re));
    let values = order.iter().map(|&j| a[(j, j)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |row, col| v[(row, order[col])]);
    Ok(EigenResult { values, vectors })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut sum = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j != k {
                sum += a[(j, k)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Singular values (descending) by one-sided Jacobi orthogonalization of the
/// columns. Small singular values keep an absolute accuracy of order
/// `ε‖m‖`, unlike square roots of Gram-matrix eigenvalues.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>, NumericsError> {
    let n = m.dim();
    let mut a = *m;
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, C64::new(0.0, 0.0));
                for k in 0..n {
                    alpha += a[(k, p)].norm_sqr();
                    beta += a[(k, q)].norm_sqr();
                    gamma += a[(k, p)].conj() * a[(k, q)];
                }
                if gamma.norm() <= n as f64 * f64::EPSILON * (alpha * beta).sqrt()
                    || gamma.norm() <= OFF_DIAGONAL_TOL * OFF_DIAGONAL_TOL * scale * scale
                {
                    continue;
                }
                rotated = true;
                Rotation::new(alpha, beta, gamma).apply_columns(&mut a, p, q);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(NumericsError::NoConvergence(MAX_SWEEPS));
    }
    let mut values: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|j| a[(j, k)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

/// Principal square root of a Hermitian positive semidefinite matrix.
/// Eigenvalues in `[-PSD_TOL, 0)` are treated as zero.
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    let eig = hermitian_eigen(m)?;
    let min = eig.min_value();
    if min < -PSD_TOL {
        return Err(NumericsError::NotPsd(min));
    }
    Ok(eig.apply(|x| x.max(0.0).sqrt()).hermitian_part())
}

/// Bipartite subsystem selector for [`partial_transpose`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Partial transpose of a two-qubit operator. `Second` is `I ⊗ T`: each 2×2
/// block is transposed in place; `First` transposes the block layout.
pub fn partial_transpose(m: &ComplexMatrix, subsystem: Subsystem) -> Result<ComplexMatrix, NumericsError> {
    if m.dim() != 4 {
        return Err(NumericsError::WrongDim {
            expected: 4,
            found: m.dim(),
        });
    }
    // index = 2 * a + b for first-qubit a, second-qubit b
    Ok(ComplexMatrix::from_fn(4, |row, col| {
        let (a, b) = (row / 2, row % 2);
        let (c, d) = (col / 2, col % 2);
        match subsystem {
            Subsystem::Second => m[(2 * a + d, 2 * c + b)],
            Subsystem::First => m[(2 * c + b, 2 * a + d)],
        }
    }))
}

/// `Tr ρ²`, computed as `Σ |ρ_jk|²` (exact for Hermitian input).
pub fn purity(m: &ComplexMatrix) -> f64 {
    m.entries().map(|z| z.norm_sqr()).sum()
}

/// Checks Hermiticity, unit trace and positivity.
pub fn validate_density(m: &ComplexMatrix) -> Result<(), NumericsError> {
    let residual = m.hermitian_residual();
    if residual > HERMITIAN_TOL {
        return Err(NumericsError::NotHermitian(residual));
    }
    let trace = m.trace();
    if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
        return Err(NumericsError::BadTrace(trace.re));
    }
    let min = hermitian_eigen(m)?.min_value();
    if min < -PSD_TOL {
        return Err(NumericsError::NotPsd(min));
    }
    Ok(())
}

/// Pauli `σ_y`.
pub fn sigma_y() -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    ComplexMatrix::from_fn(2, |j, k| match (j, k) {
        (0, 1) => -i,
        (1, 0) => i,
        _ => C64::new(0.0, 0.0),
    })
}

/// Random Hermitian matrix with independent standard-normal entries.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim);
    for j in 0..dim {
        m[(j, j)] = C64::new(rng.sample(StandardNormal), 0.0);
        for k in (j + 1)..dim {
            let z = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            m[(j, k)] = z;
            m[(k, j)] = z.conj();
        }
    }
    m
}

/// Random complex matrix with standard-normal real and imaginary parts.
pub fn random_ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Random full-rank density matrix `G G† / Tr(G G†)` from a Ginibre `G`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_ginibre(dim, rng);
    let gg = &g * &g.adjoint();
    gg.scale(1.0 / gg.trace().re).hermitian_part()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn orthonormality_error(v: &ComplexMatrix) -> f64 {
        (&v.adjoint() * v).max_abs_diff(&ComplexMatrix::identity(v.dim()))
    }

    #[test]
    fn diagonal_eigenvalues() {
        let eig = hermitian_eigen(&ComplexMatrix::from_diagonal(&[0.0, 1.0])).unwrap();
        assert_eq!(eig.values, vec![1.0, 0.0]);
    }

    #[test]
    fn qubit_matrix_eigenvalues() {
        // p = (3/4, 1/2, 1/2): [[1/2, 1/4], [1/4, 1/2]] has eigenvalues 3/4 and 1/4
        let m = ComplexMatrix::from_rows(&[&[c(0.5, 0.0), c(0.25, 0.0)], &[c(0.25, 0.0), c(0.5, 0.0)]])
            .unwrap();
        let eig = hermitian_eigen(&m).unwrap();
        assert_close(eig.values[0], 0.75, 1e-15);
        assert_close(eig.values[1], 0.25, 1e-15);
        assert!(eig.reconstruct().max_abs_diff(&m) < 1e-15);
    }

    #[test]
    fn partial_transpose_spectrum_of_center_block() {
        // center block with p = (1/2, 0, 1/2): off-diagonal entry is +i/2
        let mut m = ComplexMatrix::zeros(4);
        m[(1, 1)] = c(0.5, 0.0);
        m[(2, 2)] = c(0.5, 0.0);
        m[(1, 2)] = c(0.0, 0.5);
        m[(2, 1)] = c(0.0, -0.5);
        let pt = partial_transpose(&m, Subsystem::Second).unwrap();
        let eig = hermitian_eigen(&pt).unwrap();
        let expected = [0.5, 0.5, 0.5, -0.5];
        for (got, want) in eig.values.iter().zip(expected) {
            assert_close(*got, want, 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[&[c(1.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        assert!(matches!(hermitian_eigen(&m), Err(NumericsError::NotHermitian(_))));
    }

    #[test]
    fn degenerate_and_complex_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = random_hermitian(4, &mut rng);
        m[(0, 0)] = c(2.0, 0.0);
        let eig = hermitian_eigen(&ComplexMatrix::identity(4)).unwrap();
        assert!(eig.values.iter().all(|&x| x == 1.0));
        let eig = hermitian_eigen(&m).unwrap();
        assert!(eig.reconstruct().max_abs_diff(&m) < 1e-12);
        assert!(orthonormality_error(&eig.vectors) < 1e-12);
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..1000 {
            let dim = 2 + trial % 3;
            let m = random_hermitian(dim, &mut rng);
            let eig = hermitian_eigen(&m).unwrap();
            assert!(eig.reconstruct().max_abs_diff(&m) < 1e-10);
            assert!(orthonormality_error(&eig.vectors) < 1e-10);
            let sum: f64 = eig.values.iter().sum();
            assert_close(sum, m.trace().re, 1e-10);
            assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eigen_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_hermitian(4, &mut rng);
        let a = hermitian_eigen(&m).unwrap();
        let b = hermitian_eigen(&m).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn sqrt_examples() {
        let id = ComplexMatrix::identity(3);
        assert!(matrix_sqrt_psd(&id).unwrap().max_abs_diff(&id) < 1e-15);
        let m = ComplexMatrix::from_diagonal(&[4.0, 1.0]);
        let r = matrix_sqrt_psd(&m).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_diagonal(&[2.0, 1.0])) < 1e-15);
        let rho = ComplexMatrix::from_diagonal(&[0.0, 0.5, 0.5, 0.0]);
        let h = 0.5_f64.sqrt();
        let r = matrix_sqrt_psd(&rho).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_diagonal(&[0.0, h, h, 0.0])) < 1e-15);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let m = ComplexMatrix::from_diagonal(&[1.0, -1e-6]);
        assert!(matches!(matrix_sqrt_psd(&m), Err(NumericsError::NotPsd(_))));
        let tiny = ComplexMatrix::from_diagonal(&[1.0, -1e-12]);
        assert!(matrix_sqrt_psd(&tiny).is_ok());
    }

    #[test]
    fn sqrt_squares_back_on_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..500 {
            let dim = 2 + trial % 3;
            let g = random_ginibre(dim, &mut rng);
            let m = (&g * &g.adjoint()).hermitian_part();
            let r = matrix_sqrt_psd(&m).unwrap();
            assert!(r.hermitian_residual() < 1e-12);
            assert!((&r * &r).max_abs_diff(&m) < 1e-9);
        }
    }

    #[test]
    fn partial_transpose_involution_and_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let m = random_ginibre(4, &mut rng);
            for sub in [Subsystem::First, Subsystem::Second] {
                let pt = partial_transpose(&m, sub).unwrap();
                assert_eq!(partial_transpose(&pt, sub).unwrap(), m);
                assert_eq!(pt.trace(), m.trace());
            }
            let h = m.hermitian_part();
            let pt = partial_transpose(&h, Subsystem::Second).unwrap();
            assert_eq!(pt.hermitian_residual(), 0.0);
        }
    }

    #[test]
    fn partial_transpose_moves_center_coherence_to_corner() {
        let mut m = ComplexMatrix::zeros(4);
        m[(1, 1)] = c(0.4, 0.0);
        m[(2, 2)] = c(0.6, 0.0);
        m[(1, 2)] = c(0.1, -0.2);
        m[(2, 1)] = c(0.1, 0.2);
        let pt = partial_transpose(&m, Subsystem::Second).unwrap();
        assert_eq!(pt[(0, 3)], m[(1, 2)]);
        assert_eq!(pt[(3, 0)], m[(2, 1)]);
        assert_eq!(pt[(1, 2)], c(0.0, 0.0));
        let full = ComplexMatrix::identity(4).scale(0.25);
        assert_eq!(partial_transpose(&full, Subsystem::Second).unwrap(), full);
    }

    #[test]
    fn partial_transpose_requires_four_dims() {
        let m = ComplexMatrix::identity(3);
        assert_eq!(
            partial_transpose(&m, Subsystem::Second),
            Err(NumericsError::WrongDim { expected: 4, found: 3 })
        );
    }

    #[test]
    fn purity_examples() {
        assert_close(purity(&ComplexMatrix::identity(3).scale(1.0 / 3.0)), 1.0 / 3.0, 1e-15);
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let proj = ComplexMatrix::from_fn(2, |j, k| psi[j] * psi[k].conj());
        assert_close(purity(&proj), 1.0, 1e-15);
        let m = ComplexMatrix::from_rows(&[&[c(0.5, 0.0), c(0.25, 0.0)], &[c(0.25, 0.0), c(0.5, 0.0)]])
            .unwrap();
        assert_close(purity(&m), 0.625, 1e-15);
    }

    #[test]
    fn singular_values_of_rank_deficient_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_ginibre(4, &mut rng);
        let mut rank_two = ComplexMatrix::zeros(4);
        for j in 0..4 {
            for k in 0..2 {
                rank_two[(j, k)] = g[(j, k)];
            }
        }
        let sv = singular_values(&rank_two).unwrap();
        assert!(sv[2].abs() < 1e-14 && sv[3].abs() < 1e-14, "{sv:?}");
        let gram = &rank_two.adjoint() * &rank_two;
        let eig = hermitian_eigen(&gram.hermitian_part()).unwrap();
        for (s, e) in sv.iter().zip(&eig.values).take(2) {
            assert_close(s * s, *e, 1e-12);
        }
    }

    #[test]
    fn validate_density_paths() {
        assert!(validate_density(&ComplexMatrix::identity(2).scale(0.5)).is_ok());
        assert!(matches!(
            validate_density(&ComplexMatrix::identity(2)),
            Err(NumericsError::BadTrace(_))
        ));
        assert!(matches!(
            validate_density(&ComplexMatrix::from_diagonal(&[1.5, -0.5])),
            Err(NumericsError::NotPsd(_))
        ));
    }
}
