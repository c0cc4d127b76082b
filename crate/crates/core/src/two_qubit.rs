//! Two-qubit states with one or two inaccessible levels.
//!
//! With two levels removed the state is a qubit sitting either in the
//! central block (levels `|+−⟩, |−+⟩`) or in the corners (`|++⟩, |−−⟩`).
//! With one level removed it is a qutrit placed in one of four 3×3 blocks.
//! Entanglement is quantified numerically (partial transpose, Wootters
//! concurrence) and by the closed forms each family admits.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::numerics::{
    self, partial_transpose, sigma_y, ComplexMatrix, NumericsError, Subsystem, C64, PSD_TOL,
};
use crate::qubit::{self, ProbabilityTriple, QubitError};
use crate::qutrit::{self, ComponentQubits, QutritDensity};

/// Largest area sum of a separable center/corner-block state.
pub const BLOCK_SEPARABLE_AREA_MAX: f64 = 2.5;
/// Largest area sum of a separable state for qutrit placements 1, 2 and 4.
pub const EMBED_SEPARABLE_AREA_MAX: f64 = 8.0;
/// `(57 + √17) / 8`, largest area sum of a separable state for placement 3.
pub const EMBED3_SEPARABLE_AREA_MAX: f64 = 7.640_388_203_202_208;
/// Margin by which an area sum must exceed the separable maximum.
pub const WITNESS_MARGIN: f64 = 1e-9;
/// Partial-transpose eigenvalues below `-PPT_TOL` signal entanglement.
pub const PPT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwoQubitError {
    #[error(transparent)]
    Probability(#[from] QubitError),
    #[error("triple lies outside the Bloch ball by {0:e}; the block would be indefinite")]
    NotPositive(f64),
    #[error("not a two-qubit density matrix: {0}")]
    NotDensity(NumericsError),
    #[error("operation not supported for family {0}")]
    UnsupportedFamily(Family),
    #[error("family {0} needs {1} input")]
    InputMismatch(Family, &'static str),
}

/// Which levels are inaccessible, and how the remaining block is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    /// Levels `|++⟩` and `|−−⟩` inaccessible.
    #[serde(rename = "center")]
    CenterBlock,
    /// Levels `|+−⟩` and `|−+⟩` inaccessible.
    #[serde(rename = "corner")]
    CornerBlock,
    /// Qutrit in rows/columns 1–3, fourth level empty.
    #[serde(rename = "embed1")]
    QutritEmbed1,
    /// Qutrit in rows/columns 2–4, first level empty.
    #[serde(rename = "embed2")]
    QutritEmbed2,
    /// Second level empty.
    #[serde(rename = "embed3")]
    QutritEmbed3,
    /// Third level empty.
    #[serde(rename = "embed4")]
    QutritEmbed4,
    #[serde(rename = "general")]
    General,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::CenterBlock,
        Family::CornerBlock,
        Family::QutritEmbed1,
        Family::QutritEmbed2,
        Family::QutritEmbed3,
        Family::QutritEmbed4,
        Family::General,
    ];

    /// Zero-based indices of the levels whose row and column vanish.
    pub fn inaccessible_levels(&self) -> &'static [usize] {
        match self {
            Family::CenterBlock => &[0, 3],
            Family::CornerBlock => &[1, 2],
            Family::QutritEmbed1 => &[3],
            Family::QutritEmbed2 => &[0],
            Family::QutritEmbed3 => &[1],
            Family::QutritEmbed4 => &[2],
            Family::General => &[],
        }
    }

    /// Zero-based indices of the accessible levels, in block order.
    pub fn accessible_levels(&self) -> Vec<usize> {
        let gone = self.inaccessible_levels();
        (0..4).filter(|j| !gone.contains(j)).collect()
    }

    pub fn is_qubit_block(&self) -> bool {
        matches!(self, Family::CenterBlock | Family::CornerBlock)
    }

    pub fn is_qutrit_embed(&self) -> bool {
        matches!(
            self,
            Family::QutritEmbed1 | Family::QutritEmbed2 | Family::QutritEmbed3 | Family::QutritEmbed4
        )
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::CenterBlock => "center",
            Family::CornerBlock => "corner",
            Family::QutritEmbed1 => "embed1",
            Family::QutritEmbed2 => "embed2",
            Family::QutritEmbed3 => "embed3",
            Family::QutritEmbed4 => "embed4",
            Family::General => "general",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

/// Qutrit placement inside the 4×4 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    One,
    Two,
    Three,
    Four,
}

impl Placement {
    pub fn family(&self) -> Family {
        match self {
            Placement::One => Family::QutritEmbed1,
            Placement::Two => Family::QutritEmbed2,
            Placement::Three => Family::QutritEmbed3,
            Placement::Four => Family::QutritEmbed4,
        }
    }

    pub fn from_family(family: Family) -> Option<Self> {
        match family {
            Family::QutritEmbed1 => Some(Placement::One),
            Family::QutritEmbed2 => Some(Placement::Two),
            Family::QutritEmbed3 => Some(Placement::Three),
            Family::QutritEmbed4 => Some(Placement::Four),
            _ => None,
        }
    }
}

/// Validated 4×4 density matrix with its family tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitDensity {
    matrix: ComplexMatrix,
    family: Family,
}

impl TwoQubitDensity {
    /// Untagged state from an arbitrary density matrix.
    pub fn general(m: ComplexMatrix) -> Result<Self, TwoQubitError> {
        if m.dim() != 4 {
            return Err(TwoQubitError::NotDensity(NumericsError::WrongDim {
                expected: 4,
                found: m.dim(),
            }));
        }
        numerics::validate_density(&m).map_err(TwoQubitError::NotDensity)?;
        Ok(Self {
            matrix: m,
            family: Family::General,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// The qubit occupying a center/corner block.
    pub fn block_qubit(&self) -> Option<ProbabilityTriple> {
        if !self.family.is_qubit_block() {
            return None;
        }
        let lv = self.family.accessible_levels();
        let (j, k) = (lv[0], lv[1]);
        Some(ProbabilityTriple {
            p1: self.matrix[(j, k)].re + 0.5,
            p2: 0.5 - self.matrix[(j, k)].im,
            p3: self.matrix[(j, j)].re,
        })
    }

    /// The qutrit occupying an embed block.
    pub fn embedded_qutrit(&self) -> Option<QutritDensity> {
        if !self.family.is_qutrit_embed() {
            return None;
        }
        let lv = self.family.accessible_levels();
        let m = ComplexMatrix::from_fn(3, |j, k| self.matrix[(lv[j], lv[k])]);
        QutritDensity::new(m).ok()
    }

    /// Area sum measured by the family's own representation: the qubit area
    /// sum for block families, the B, C, D qutrit sum for embeds.
    pub fn family_area_sum(&self) -> Option<f64> {
        if let Some(p) = self.block_qubit() {
            return Some(qubit::area_sum(&p));
        }
        self.embedded_qutrit()
            .map(|r| qutrit::qutrit_area_sum(&qutrit::component_qubits(&r)))
    }
}

fn block_state(p: &ProbabilityTriple, family: Family) -> Result<TwoQubitDensity, TwoQubitError> {
    let p = ProbabilityTriple::new(p.p1, p.p2, p.p3)?;
    let residual = p.quantumness_residual();
    if residual > qubit::QUANTUM_TOL {
        return Err(TwoQubitError::NotPositive(residual));
    }
    let lv = family.accessible_levels();
    let (j, k) = (lv[0], lv[1]);
    let mut m = ComplexMatrix::zeros(4);
    m[(j, j)] = C64::new(p.p3, 0.0);
    m[(k, k)] = C64::new(1.0 - p.p3, 0.0);
    m[(j, k)] = p.coherence();
    m[(k, j)] = p.coherence().conj();
    Ok(TwoQubitDensity { matrix: m, family })
}

/// Qubit in the central block, levels `|++⟩` and `|−−⟩` inaccessible.
pub fn center_block_state(p: &ProbabilityTriple) -> Result<TwoQubitDensity, TwoQubitError> {
    block_state(p, Family::CenterBlock)
}

/// Qubit in the corner entries, levels `|+−⟩` and `|−+⟩` inaccessible.
pub fn corner_block_state(p: &ProbabilityTriple) -> Result<TwoQubitDensity, TwoQubitError> {
    block_state(p, Family::CornerBlock)
}

pub fn qutrit_embed_state(r: &QutritDensity, placement: Placement) -> TwoQubitDensity {
    let family = placement.family();
    let lv = family.accessible_levels();
    let mut m = ComplexMatrix::zeros(4);
    for (a, &j) in lv.iter().enumerate() {
        for (b, &k) in lv.iter().enumerate() {
            m[(j, k)] = r.matrix()[(a, b)];
        }
    }
    TwoQubitDensity { matrix: m, family }
}

/// Eigenvalues (descending) of the partial transpose on the second qubit.
pub fn pt_eigenvalues(rho: &TwoQubitDensity) -> Vec<f64> {
    let pt = partial_transpose(&rho.matrix, Subsystem::Second).expect("4x4 by construction");
    numerics::hermitian_eigen(&pt)
        .expect("partial transpose of a Hermitian matrix is Hermitian")
        .values
}

/// Sum of the moduli of the negative partial-transpose eigenvalues.
pub fn negativity(rho: &TwoQubitDensity) -> f64 {
    negativity_from_spectrum(&pt_eigenvalues(rho))
}

fn negativity_from_spectrum(values: &[f64]) -> f64 {
    values.iter().filter(|&&x| x < 0.0).fold(0.0, |acc, x| acc - x)
}

/// `ln(2𝒩 + 1)`.
pub fn log_negativity(rho: &TwoQubitDensity) -> f64 {
    (2.0 * negativity(rho)).ln_1p()
}

/// `(σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`.
pub fn spin_flip(m: &ComplexMatrix) -> ComplexMatrix {
    let yy = sigma_y().kron(&sigma_y());
    &(&yy * &m.conj()) * &yy
}

/// The Wootters spectrum `η1 ≥ … ≥ η4`, i.e. the square roots of the
/// eigenvalues of `ρ ρ̃`.
///
/// Computed as the singular values of `√ρ · √ρ̃` with `√ρ̃ = Y (√ρ)* Y`:
/// this has the same spectrum as `√ρ ρ̃ √ρ` but resolves vanishing `η`
/// to round-off rather than to its square root.
pub fn wootters_spectrum(rho: &TwoQubitDensity) -> Vec<f64> {
    let root = numerics::matrix_sqrt_psd(&rho.matrix).expect("density matrices are PSD");
    let product = &root * &spin_flip(&root);
    numerics::singular_values(&product).expect("Jacobi SVD converges on 4x4 input")
}

pub fn concurrence_wootters(rho: &TwoQubitDensity) -> f64 {
    let eta = wootters_spectrum(rho);
    (eta[0] - eta[1] - eta[2] - eta[3]).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PptVerdict {
    SeparableByPpt,
    Entangled,
}

impl PptVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            PptVerdict::SeparableByPpt => "separable_by_ppt",
            PptVerdict::Entangled => "entangled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub negativity: f64,
    pub log_negativity: f64,
    pub concurrence: f64,
    pub ppt_verdict: PptVerdict,
    pub pt_eigenvalues: Vec<f64>,
}

pub fn entanglement_report(rho: &TwoQubitDensity) -> EntanglementReport {
    let pt_eigenvalues = pt_eigenvalues(rho);
    let negativity = negativity_from_spectrum(&pt_eigenvalues);
    let min = pt_eigenvalues.last().copied().unwrap_or(0.0);
    EntanglementReport {
        negativity,
        log_negativity: (2.0 * negativity).ln_1p(),
        concurrence: concurrence_wootters(rho),
        ppt_verdict: if min < -PPT_TOL {
            PptVerdict::Entangled
        } else {
            PptVerdict::SeparableByPpt
        },
        pt_eigenvalues,
    }
}

/// Probabilities a closed form is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyInput {
    Qubit(ProbabilityTriple),
    Qutrit(ComponentQubits),
}

/// A closed-form value together with whether the input describes a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub value: f64,
    pub physical: bool,
}

fn qutrit_input_physical(c: &ComponentQubits) -> bool {
    qutrit::component_min_eigenvalue(c) >= -PSD_TOL
        && c.linkage_residual().abs() <= qutrit::LINKAGE_TOL
        && qutrit::qutrit_from_probabilities(&c.a, &c.b, &c.d)
            .map(|q| q.psd)
            .unwrap_or(false)
}

/// Closed-form concurrence: `2√((p1 − ½)² + (p2 − ½)²)` for the block
/// families; `2|D|`, `2|B|`, `2|A|`, `2|A|` for qutrit placements 1–4.
///
/// Evaluated for any input; `physical` is false when no state exists.
pub fn concurrence_closed_form(family: Family, input: &FamilyInput) -> Result<ClosedForm, TwoQubitError> {
    match (family, input) {
        (Family::General, _) => Err(TwoQubitError::UnsupportedFamily(family)),
        (f, FamilyInput::Qubit(p)) if f.is_qubit_block() => Ok(ClosedForm {
            value: 2.0 * p.coherence_modulus(),
            physical: p.is_quantum(),
        }),
        (f, FamilyInput::Qutrit(c)) if f.is_qutrit_embed() => {
            let coherence = match f {
                Family::QutritEmbed1 => c.d,
                Family::QutritEmbed2 => c.b,
                _ => c.a,
            };
            Ok(ClosedForm {
                value: 2.0 * coherence.coherence_modulus(),
                physical: qutrit_input_physical(c),
            })
        }
        (f, _) if f.is_qubit_block() => Err(TwoQubitError::InputMismatch(f, "qubit")),
        (f, _) => Err(TwoQubitError::InputMismatch(f, "qutrit")),
    }
}

/// Closed-form negativity `√((p1 − ½)² + (p2 − ½)²)` of the block families.
pub fn negativity_closed_form(family: Family, p: &ProbabilityTriple) -> Result<ClosedForm, TwoQubitError> {
    if !family.is_qubit_block() {
        return Err(TwoQubitError::UnsupportedFamily(family));
    }
    Ok(ClosedForm {
        value: p.coherence_modulus(),
        physical: p.is_quantum(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessVerdict {
    CertifiedEntangled,
    Inconclusive,
}

impl WitnessVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            WitnessVerdict::CertifiedEntangled => "certified_entangled",
            WitnessVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// Largest area sum any separable member of the family can have.
pub fn separable_area_max(family: Family) -> Result<f64, TwoQubitError> {
    match family {
        Family::CenterBlock | Family::CornerBlock => Ok(BLOCK_SEPARABLE_AREA_MAX),
        Family::QutritEmbed1 | Family::QutritEmbed2 | Family::QutritEmbed4 => Ok(EMBED_SEPARABLE_AREA_MAX),
        Family::QutritEmbed3 => Ok(EMBED3_SEPARABLE_AREA_MAX),
        Family::General => Err(TwoQubitError::UnsupportedFamily(family)),
    }
}

/// Area-sum entanglement witness. Only exceeding the separable maximum is
/// conclusive; separable and entangled states share the range below it.
pub fn area_witness(family: Family, area_sum: f64) -> Result<WitnessVerdict, TwoQubitError> {
    let bound = separable_area_max(family)?;
    Ok(if area_sum > bound + WITNESS_MARGIN {
        WitnessVerdict::CertifiedEntangled
    } else {
        WitnessVerdict::Inconclusive
    })
}
