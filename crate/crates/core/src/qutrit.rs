//! Qutrit density matrices and their four component qubits.
//!
//! Embedding a qutrit into a 4×4 matrix and tracing out one qubit yields four
//! 2×2 positive matrices `A`, `B`, `C`, `D`, each of which is a qubit in the
//! probability representation:
//!
//! | qubit | diagonal `p3` | off-diagonal |
//! |-------|---------------|--------------|
//! | A     | `1 − ρ33`     | `ρ13`        |
//! | B     | `1 − ρ22`     | `ρ12`        |
//! | C     | `ρ11`         | `ρ13`        |
//! | D     | `ρ22`         | `ρ23`        |
//!
//! `A`, `B`, `D` reconstruct the qutrit; `B`, `C`, `D` give the canonical
//! area sum.

use serde::Serialize;
use thiserror::Error;

use crate::numerics::{self, ComplexMatrix, NumericsError, C64, PSD_TOL};
use crate::qubit::{self, ProbabilityTriple};

/// Tolerance on the `p3^(D) = 1 − p3^(B)` linkage.
pub const LINKAGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QutritError {
    #[error("not a qutrit density matrix: {0}")]
    NotDensity(NumericsError),
    #[error("diagonal entry p3(A) + p3(B) - 1 = {0} is negative")]
    BadDiagonal(f64),
    #[error("component triples are inconsistent: p3(D) + p3(B) - 1 = {0:e}")]
    InconsistentTriples(f64),
    #[error("amplitudes outside the unit disk: p_beta^2 + p_gamma^2 = {0}")]
    OutOfSimplex(f64),
}

/// Validated 3×3 density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QutritDensity(ComplexMatrix);

impl QutritDensity {
    pub fn new(m: ComplexMatrix) -> Result<Self, QutritError> {
        if m.dim() != 3 {
            return Err(QutritError::NotDensity(NumericsError::WrongDim {
                expected: 3,
                found: m.dim(),
            }));
        }
        numerics::validate_density(&m).map_err(QutritError::NotDensity)?;
        Ok(Self(m))
    }

    pub fn maximally_mixed() -> Self {
        Self(ComplexMatrix::identity(3).scale(1.0 / 3.0))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn purity(&self) -> f64 {
        numerics::purity(&self.0)
    }
}

/// The four component qubits of a qutrit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentQubits {
    pub a: ProbabilityTriple,
    pub b: ProbabilityTriple,
    pub c: ProbabilityTriple,
    pub d: ProbabilityTriple,
}

impl ComponentQubits {
    /// `p3^(D) + p3^(B) − 1`; zero for consistent components.
    pub fn linkage_residual(&self) -> f64 {
        self.d.p3 + self.b.p3 - 1.0
    }

    /// Builds `C` from `A`, `B`, `D`: same coherence as `A`, `p3 = p3^(A) + p3^(B) − 1`.
    pub fn from_abd(a: ProbabilityTriple, b: ProbabilityTriple, d: ProbabilityTriple) -> Self {
        let c = ProbabilityTriple {
            p1: a.p1,
            p2: a.p2,
            p3: a.p3 + b.p3 - 1.0,
        };
        Self { a, b, c, d }
    }

    /// The eight B, C, D probabilities `(pB1, pB2, pB3, pC1, pC2, pC3, pD1, pD2)`.
    pub fn bcd_probabilities(&self) -> [f64; 8] {
        [
            self.b.p1, self.b.p2, self.b.p3, self.c.p1, self.c.p2, self.c.p3, self.d.p1, self.d.p2,
        ]
    }
}

fn qubit_matrix_min_eigenvalue(p: &ProbabilityTriple) -> f64 {
    // [[p3, z], [z*, 1-p3]] has eigenvalues 1/2 ± sqrt((p3-1/2)^2 + |z|^2)
    0.5 - ((p.p3 - 0.5).powi(2) + p.coherence().norm_sqr()).sqrt()
}

/// Extracts the four component qubits.
pub fn component_qubits(rho: &QutritDensity) -> ComponentQubits {
    components_of_matrix(rho.matrix())
}

/// Same map as [`component_qubits`] for any Hermitian 3×3 matrix.
pub(crate) fn components_of_matrix(m: &ComplexMatrix) -> ComponentQubits {
    let r = |j: usize, k: usize| m[(j, k)];
    ComponentQubits {
        a: ProbabilityTriple::from_entries(1.0 - r(2, 2).re, r(0, 2)),
        b: ProbabilityTriple::from_entries(1.0 - r(1, 1).re, r(0, 1)),
        c: ProbabilityTriple::from_entries(r(0, 0).re, r(0, 2)),
        d: ProbabilityTriple::from_entries(r(1, 1).re, r(1, 2)),
    }
}

/// Minimum eigenvalue over the four component 2×2 matrices.
pub fn component_min_eigenvalue(c: &ComponentQubits) -> f64 {
    [c.a, c.b, c.c, c.d]
        .iter()
        .map(qubit_matrix_min_eigenvalue)
        .fold(f64::INFINITY, f64::min)
}

/// Qutrit assembled from the independent qubits `A`, `B`, `D`; `psd` reports
/// whether the result is a valid density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QutritCandidate {
    pub matrix: ComplexMatrix,
    pub psd: bool,
    pub min_eigenvalue: f64,
}

impl QutritCandidate {
    pub fn into_density(self) -> Result<QutritDensity, QutritError> {
        QutritDensity::new(self.matrix)
    }
}

pub fn qutrit_from_probabilities(
    a: &ProbabilityTriple,
    b: &ProbabilityTriple,
    d: &ProbabilityTriple,
) -> Result<QutritCandidate, QutritError> {
    let top = a.p3 + b.p3 - 1.0;
    if top < -LINKAGE_TOL {
        return Err(QutritError::BadDiagonal(top));
    }
    let diag = [top.max(0.0), 1.0 - b.p3, 1.0 - a.p3];
    let mut m = ComplexMatrix::from_diagonal(&diag);
    for (j, k, z) in [(0, 1, b.coherence()), (0, 2, a.coherence()), (1, 2, d.coherence())] {
        m[(j, k)] = z;
        m[(k, j)] = z.conj();
    }
    let min_eigenvalue = numerics::hermitian_eigen(&m)
        .map_err(QutritError::NotDensity)?
        .min_value();
    Ok(QutritCandidate {
        matrix: m,
        psd: min_eigenvalue >= -PSD_TOL,
        min_eigenvalue,
    })
}

fn check_linkage(c: &ComponentQubits) -> Result<(), QutritError> {
    let residual = c.linkage_residual();
    if residual.abs() > LINKAGE_TOL {
        return Err(QutritError::InconsistentTriples(residual));
    }
    Ok(())
}

/// Qutrit linear entropy from the A, B, D probabilities:
/// `2(Σ_{j∈ABD} Σ_k p_k(1 − p_k) + p3^(A)(1 − p3^(B)) + p3^(B)²) − 5`.
pub fn qutrit_linear_entropy(c: &ComponentQubits) -> Result<f64, QutritError> {
    check_linkage(c)?;
    let fairness: f64 = [c.a, c.b, c.d]
        .iter()
        .flat_map(|t| t.as_array())
        .map(|p| p * (1.0 - p))
        .sum();
    Ok(2.0 * (fairness + c.a.p3 * (1.0 - c.b.p3) + c.b.p3 * c.b.p3) - 5.0)
}

/// Same entropy as a sum of component-qubit entropies minus a correlation
/// term: `Σ_{j∈ABD} S_L^(j) − 2(1 − p3^(B))(1 + p3^(B) − p3^(A))`.
pub fn qutrit_linear_entropy_decomposed(c: &ComponentQubits) -> Result<f64, QutritError> {
    check_linkage(c)?;
    let qubits: f64 = [c.a, c.b, c.d].iter().map(qubit::linear_entropy).sum();
    Ok(qubits - 2.0 * (1.0 - c.b.p3) * (1.0 + c.b.p3 - c.a.p3))
}

/// Area sum in the B, C, D representation, with `D` evaluated at `p3 = 1 − p3^(B)`.
pub fn qutrit_area_sum(c: &ComponentQubits) -> f64 {
    let d = ProbabilityTriple {
        p3: 1.0 - c.b.p3,
        ..c.d
    };
    qubit::area_sum(&c.b) + qubit::area_sum(&c.c) + qubit::area_sum(&d)
}

/// Area sum in the A, B, D representation, with `D` evaluated at `p3 = 1 − p3^(B)`.
pub fn qutrit_area_sum_abd(c: &ComponentQubits) -> f64 {
    let d = ProbabilityTriple {
        p3: 1.0 - c.b.p3,
        ..c.d
    };
    qubit::area_sum(&c.a) + qubit::area_sum(&c.b) + qubit::area_sum(&d)
}

/// Pure-state chart `|ψ⟩ = √(1 − p_β² − p_γ²)|1⟩ + p_β e^{iβ}|0⟩ + p_γ e^{iγ}|−1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PureQutritParams {
    pub p_beta: f64,
    pub p_gamma: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl PureQutritParams {
    pub fn amplitudes(&self) -> Result<[C64; 3], QutritError> {
        let norm = self.p_beta * self.p_beta + self.p_gamma * self.p_gamma;
        if norm > 1.0 + 1e-12 || self.p_beta < 0.0 || self.p_gamma < 0.0 {
            return Err(QutritError::OutOfSimplex(norm));
        }
        Ok([
            C64::new((1.0 - norm).max(0.0).sqrt(), 0.0),
            C64::from_polar(self.p_beta, self.beta),
            C64::from_polar(self.p_gamma, self.gamma),
        ])
    }
}

/// Projector onto a normalized state vector.
pub(crate) fn projector(psi: &[C64; 3]) -> ComplexMatrix {
    ComplexMatrix::from_fn(3, |j, k| psi[j] * psi[k].conj())
}

pub fn pure_qutrit(params: &PureQutritParams) -> Result<QutritDensity, QutritError> {
    let m = projector(&params.amplitudes()?).hermitian_part();
    QutritDensity::new(m)
}
