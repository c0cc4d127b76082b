//! Spin-1 coherent states and the probabilities they induce on the A, B, D
//! component qubits.
//!
//! Basis order is `(|1,1⟩, |1,0⟩, |1,−1⟩)` throughout. For a coherent state
//! every component probability is a polynomial in the mean spin vector
//! `(⟨Jx⟩, ⟨Jy⟩, ⟨Jz⟩)`, which lies on the unit sphere.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::numerics::{ComplexMatrix, C64};
use crate::qubit::{self, ProbabilityTriple};
use crate::qutrit::{self, ComponentQubits, QutritDensity};

/// Allowed `| |j| − 1 |` for a mean vector fed to the closed forms.
pub const UNIT_NORM_TOL: f64 = 1e-8;
/// Upper end of the total-area band checked by [`inequality_report`].
pub const TOTAL_AREA_MAX: f64 = 8.095 + 5e-3;
pub const TOTAL_AREA_MIN: f64 = 4.5;
pub const QUBIT_AREA_MIN: f64 = 1.5;
pub const QUBIT_AREA_MAX: f64 = 3.0;

const DISK_TOL: f64 = 1e-12;
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinError {
    #[error("mean spin vector has norm {0}, expected 1")]
    NotUnitNorm(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinMeanVector {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl SpinMeanVector {
    pub fn new(jx: f64, jy: f64, jz: f64) -> Self {
        Self { jx, jy, jz }
    }

    pub fn norm(&self) -> f64 {
        (self.jx * self.jx + self.jy * self.jy + self.jz * self.jz).sqrt()
    }

    fn require_unit(&self) -> Result<(), SpinError> {
        let n = self.norm();
        if (n - 1.0).abs() > UNIT_NORM_TOL || !n.is_finite() {
            return Err(SpinError::NotUnitNorm(n));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    pub zeta: C64,
}

impl CoherentParams {
    pub fn new(re: f64, im: f64) -> Self {
        Self {
            zeta: C64::new(re, im),
        }
    }

    /// Normalized amplitudes `(ζ², √2 ζ, 1) / (1 + |ζ|²)`.
    pub fn amplitudes(&self) -> [C64; 3] {
        let z = self.zeta;
        let n = 1.0 + z.norm_sqr();
        [z * z / n, z * std::f64::consts::SQRT_2 / n, C64::new(1.0 / n, 0.0)]
    }
}

pub fn coherent_state(params: &CoherentParams) -> QutritDensity {
    let psi = params.amplitudes();
    let m = ComplexMatrix::from_fn(3, |j, k| psi[j] * psi[k].conj()).hermitian_part();
    QutritDensity::new(m).expect("coherent projector is a density matrix")
}

/// Mean values of `Jx`, `Jy`, `Jz`.
///
/// With `J+ = √2(|1,1⟩⟨1,0| + |1,0⟩⟨1,−1|)` one has
/// `⟨J+⟩ = √2(ρ21 + ρ32) = ⟨Jx⟩ + i⟨Jy⟩`.
pub fn spin_means(rho: &QutritDensity) -> SpinMeanVector {
    let m = rho.matrix();
    let raise = (m[(1, 0)] + m[(2, 1)]) * std::f64::consts::SQRT_2;
    SpinMeanVector {
        jx: raise.re,
        jy: raise.im,
        jz: m[(0, 0)].re - m[(2, 2)].re,
    }
}

/// Closed-form component probabilities of a coherent state, read off its
/// mean spin vector. `C` is filled from `A` and `B`.
pub fn probabilities_from_means(j: &SpinMeanVector) -> Result<ComponentQubits, SpinError> {
    j.require_unit()?;
    Ok(closed_form_components(j))
}

fn closed_form_components(j: &SpinMeanVector) -> ComponentQubits {
    let SpinMeanVector { jx, jy, jz } = *j;
    let r2 = std::f64::consts::SQRT_2;
    let a = ProbabilityTriple {
        p1: 0.25 * (2.0 + jx * jx - jy * jy),
        p2: 0.5 * (1.0 + jx * jy),
        p3: 0.25 * (3.0 - jz) * (1.0 + jz),
    };
    let b = ProbabilityTriple {
        p1: 0.25 * (2.0 + r2 * jx * (1.0 + jz)),
        p2: 0.25 * (2.0 + r2 * jy * (1.0 + jz)),
        p3: 0.5 * (1.0 + jz * jz),
    };
    let d = ProbabilityTriple {
        p1: 0.25 * (2.0 + r2 * jx * (1.0 - jz)),
        p2: 0.25 * (2.0 + r2 * jy * (1.0 - jz)),
        p3: 1.0 - b.p3,
    };
    ComponentQubits::from_abd(a, b, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpinQubit {
    A,
    B,
    D,
}

/// Quantumness residual `Σ(p − ½)² − ¼` of one closed-form qubit.
pub fn qubit_constraint_residual(j: &SpinMeanVector, which: SpinQubit) -> f64 {
    let c = closed_form_components(j);
    let t = match which {
        SpinQubit::A => c.a,
        SpinQubit::B => c.b,
        SpinQubit::D => c.d,
    };
    t.quantumness_residual()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaCheck {
    pub value: f64,
    pub in_bounds: bool,
}

impl AreaCheck {
    fn new(value: f64, lo: f64, hi: f64) -> Self {
        Self {
            value,
            in_bounds: (lo - BOUND_SLACK..=hi + BOUND_SLACK).contains(&value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityReport {
    /// Area sums of `A`, `B`, `D` in that order.
    pub per_qubit: [AreaCheck; 3],
    /// Area sum in the B, C, D representation.
    pub total: AreaCheck,
    /// Area sum in the A, B, D representation.
    pub total_abd: f64,
}

pub fn inequality_report(j: &SpinMeanVector) -> Result<InequalityReport, SpinError> {
    let c = probabilities_from_means(j)?;
    let per_qubit = [c.a, c.b, c.d]
        .map(|t| AreaCheck::new(qubit::area_sum(&t), QUBIT_AREA_MIN, QUBIT_AREA_MAX));
    Ok(InequalityReport {
        per_qubit,
        total: AreaCheck::new(qutrit::qutrit_area_sum(&c), TOTAL_AREA_MIN, TOTAL_AREA_MAX),
        total_abd: qutrit::qutrit_area_sum_abd(&c),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum JxSign {
    Plus,
    Minus,
}

impl JxSign {
    fn factor(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }
}

/// One point of a mean-value scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub s_a: f64,
    pub s_b: f64,
    pub s_d: f64,
    pub s_total: f64,
    /// Quantumness residuals of `A`, `B`, `D`.
    pub residuals: [f64; 3],
}

/// Scans the `(⟨Jy⟩, ⟨Jz⟩)` disk on a `resolution × resolution` grid over
/// `[−1, 1]²`, `⟨Jy⟩` varying slowest. Grid points outside the disk are
/// skipped. Panics if `resolution < 2`.
pub fn grid_scan(resolution: usize, sign: JxSign) -> Vec<ScanRow> {
    assert!(resolution >= 2, "grid resolution must be at least 2");
    let step = 2.0 / (resolution - 1) as f64;
    let axis = |i: usize| -1.0 + step * i as f64;
    (0..resolution * resolution)
        .into_par_iter()
        .filter_map(|idx| {
            let (jy, jz) = (axis(idx / resolution), axis(idx % resolution));
            let rest = 1.0 - jy * jy - jz * jz;
            if rest < -DISK_TOL {
                return None;
            }
            let j = SpinMeanVector::new(sign.factor() * rest.max(0.0).sqrt(), jy, jz);
            let c = closed_form_components(&j);
            Some(ScanRow {
                jx: j.jx,
                jy,
                jz,
                s_a: qubit::area_sum(&c.a),
                s_b: qubit::area_sum(&c.b),
                s_d: qubit::area_sum(&c.d),
                s_total: qutrit::qutrit_area_sum(&c),
                residuals: [c.a, c.b, c.d].map(|t| t.quantumness_residual()),
            })
        })
        .collect()
}
