//! Qubit states as triples of dichotomous probabilities.
//!
//! A qubit density matrix is identified with the probabilities `(p1, p2, p3)`
//! of spin projection `+½` along `x`, `y`, `z`. Connecting the three 1-simplex
//! hypotenuses gives an equilateral triangle of side `√2`; the three points
//! on its perimeter span a triangle whose squared sides are the Malevich
//! square areas.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::numerics::{self, ComplexMatrix, NumericsError, C64};

/// Tolerance on the quantumness (Bloch ball) constraint.
pub const QUANTUM_TOL: f64 = 1e-12;
/// Default tolerance used by [`classify_pure_maxima`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QubitError {
    #[error("probability {name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("triple violates the quantumness constraint by {0:e}")]
    NotPositive(f64),
    #[error("not a qubit density matrix: {0}")]
    NotDensity(NumericsError),
}

/// Probabilities of spin projection `+½` along `x`, `y`, `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityTriple {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl ProbabilityTriple {
    pub fn new(p1: f64, p2: f64, p3: f64) -> Result<Self, QubitError> {
        for (name, value) in [("p1", p1), ("p2", p2), ("p3", p3)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(QubitError::OutOfRange { name, value });
            }
        }
        Ok(Self { p1, p2, p3 })
    }

    /// Constructor that also requires the quantumness constraint.
    pub fn quantum(p1: f64, p2: f64, p3: f64) -> Result<Self, QubitError> {
        let p = Self::new(p1, p2, p3)?;
        let residual = p.quantumness_residual();
        if residual > QUANTUM_TOL {
            return Err(QubitError::NotPositive(residual));
        }
        Ok(p)
    }

    pub const fn maximally_mixed() -> Self {
        Self {
            p1: 0.5,
            p2: 0.5,
            p3: 0.5,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p1, self.p2, self.p3]
    }

    /// `(p1 − ½)² + (p2 − ½)² + (p3 − ½)² − ¼`; non-positive for quantum triples.
    pub fn quantumness_residual(&self) -> f64 {
        self.as_array().iter().map(|p| (p - 0.5).powi(2)).sum::<f64>() - 0.25
    }

    pub fn is_quantum(&self) -> bool {
        self.quantumness_residual() <= QUANTUM_TOL
    }

    /// Uniform sample from the Bloch ball, by rejection.
    pub fn sample_quantum<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.5..0.5));
            if v.iter().map(|x| x * x).sum::<f64>() <= 0.25 {
                return Self {
                    p1: v[0] + 0.5,
                    p2: v[1] + 0.5,
                    p3: v[2] + 0.5,
                };
            }
        }
    }

    /// `(p1, p2, p3) → (p2, p3, p1)`.
    pub fn cycled(&self) -> Self {
        Self {
            p1: self.p2,
            p2: self.p3,
            p3: self.p1,
        }
    }

    /// Off-diagonal entry `ρ12 = p1 − ½ − i(p2 − ½)` of the qubit matrix.
    pub fn coherence(&self) -> C64 {
        C64::new(self.p1 - 0.5, -(self.p2 - 0.5))
    }

    /// `|ρ12| = √((p1 − ½)² + (p2 − ½)²)`.
    pub fn coherence_modulus(&self) -> f64 {
        (self.p1 - 0.5).hypot(self.p2 - 0.5)
    }

    /// Reads `(p1, p2)` back from an off-diagonal entry, with `p3` given.
    pub(crate) fn from_entries(diagonal: f64, coherence: C64) -> Self {
        Self {
            p1: coherence.re + 0.5,
            p2: 0.5 - coherence.im,
            p3: diagonal,
        }
    }
}

/// 2×2 matrix built from a probability triple; `physical` is false when the
/// triple lies outside the Bloch ball (the matrix is then indefinite).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDensity {
    pub matrix: ComplexMatrix,
    pub physical: bool,
}

pub fn qubit_from_probabilities(p: &ProbabilityTriple) -> Result<QubitDensity, QubitError> {
    let p = ProbabilityTriple::new(p.p1, p.p2, p.p3)?;
    let off = p.coherence();
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = C64::new(p.p3, 0.0);
    m[(0, 1)] = off;
    m[(1, 0)] = off.conj();
    m[(1, 1)] = C64::new(1.0 - p.p3, 0.0);
    Ok(QubitDensity {
        matrix: m,
        physical: p.is_quantum(),
    })
}

pub fn probabilities_from_qubit(rho: &ComplexMatrix) -> Result<ProbabilityTriple, QubitError> {
    if rho.dim() != 2 {
        return Err(QubitError::NotDensity(NumericsError::WrongDim {
            expected: 2,
            found: rho.dim(),
        }));
    }
    numerics::validate_density(rho).map_err(QubitError::NotDensity)?;
    Ok(ProbabilityTriple::from_entries(rho[(0, 0)].re, rho[(0, 1)]))
}

/// Bloch vector `(2p1 − 1, 2p2 − 1, 2p3 − 1)`.
pub fn bloch_vector(p: &ProbabilityTriple) -> [f64; 3] {
    p.as_array().map(|x| 2.0 * x - 1.0)
}

/// Sides, square areas and their sum for the triangle spanned by the three
/// probability points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleGeometry {
    pub sides: [f64; 3],
    pub areas: [f64; 3],
    pub area_sum: f64,
}

/// Squared side `l_k²` between consecutive probability points, with `p4 = p1`.
fn squared_side(pk: f64, pnext: f64) -> f64 {
    2.0 * pk * pk + 2.0 * pnext * pnext + 2.0 * pk * pnext - 4.0 * pk - 2.0 * pnext + 2.0
}

pub fn triangle_sides(p: &ProbabilityTriple) -> TriangleGeometry {
    let ps = p.as_array();
    let areas: [f64; 3] = std::array::from_fn(|k| squared_side(ps[k], ps[(k + 1) % 3]).max(0.0));
    TriangleGeometry {
        sides: areas.map(f64::sqrt),
        areas,
        area_sum: areas.iter().sum(),
    }
}

/// Sum of the three Malevich square areas, in closed polynomial form.
pub fn area_sum(p: &ProbabilityTriple) -> f64 {
    let ProbabilityTriple { p1, p2, p3 } = *p;
    2.0 * (2.0 * p1 * p1 + 3.0 * (1.0 - p1 - p2 - p3) + p1 * p2 + p1 * p3 + 2.0 * p2 * p2 + p2 * p3
        + 2.0 * p3 * p3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MaximaClass {
    /// One of the two pure states with `S = 3`.
    GlobalMax,
    /// Pure state on the great circle `p1 + p2 + p3 = 3/2`, where `S = 9/4`.
    GreatCircleLocalMax,
    OtherPure,
    Mixed,
}

impl MaximaClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::GlobalMax => "global_max",
            Self::GreatCircleLocalMax => "great_circle_local_max",
            Self::OtherPure => "other_pure",
            Self::Mixed => "mixed",
        }
    }
}

/// The two pure states maximizing the area sum: all `p_k = (3 ∓ √3)/6`.
pub fn global_maxima() -> [ProbabilityTriple; 2] {
    let r3 = 3.0_f64.sqrt();
    [(3.0 - r3) / 6.0, (3.0 + r3) / 6.0].map(|v| ProbabilityTriple {
        p1: v,
        p2: v,
        p3: v,
    })
}

/// Point of the great circle of local maxima, parametrized by `p1`.
///
/// `upper` selects the `p2 ≥ p3` half (the `+√` branch for `p2`); returns
/// `None` when `p1` lies outside `[(3 − √6)/6, (3 + √6)/6]`.
pub fn great_circle_point(p1: f64, upper: bool) -> Option<ProbabilityTriple> {
    let disc = -1.0 + 12.0 * p1 - 12.0 * p1 * p1;
    if disc < 0.0 {
        return None;
    }
    let root = if upper { disc.sqrt() } else { -disc.sqrt() };
    Some(ProbabilityTriple {
        p1,
        p2: 0.25 * (3.0 - 2.0 * p1 + root),
        p3: 0.25 * (3.0 - 2.0 * p1 - root),
    })
}

/// Classifies a quantum triple relative to the maxima of the area sum.
///
/// Both halves of the great circle (`p2 ≥ p3` and `p2 ≤ p3`) count as local
/// maxima: the circle is the intersection of the Bloch sphere with the plane
/// `p1 + p2 + p3 = 3/2`.
pub fn classify_pure_maxima(p: &ProbabilityTriple, tol: f64) -> MaximaClass {
    let near = |q: &ProbabilityTriple| {
        p.as_array()
            .iter()
            .zip(q.as_array())
            .all(|(a, b)| (a - b).abs() <= tol)
    };
    if global_maxima().iter().any(near) {
        return MaximaClass::GlobalMax;
    }
    let on_sphere = p.quantumness_residual().abs() <= tol;
    if on_sphere && (p.p1 + p.p2 + p.p3 - 1.5).abs() <= tol {
        return MaximaClass::GreatCircleLocalMax;
    }
    if on_sphere {
        MaximaClass::OtherPure
    } else {
        MaximaClass::Mixed
    }
}

/// Linear entropy `2 Σ p_j (1 − p_j) − 1`.
pub fn linear_entropy(p: &ProbabilityTriple) -> f64 {
    2.0 * p.as_array().iter().map(|x| x * (1.0 - x)).sum::<f64>() - 1.0
}

/// Linear entropy from the triangle construction: `2 − Σ [(1 − p_j)² + p_{j+1}²]`.
pub fn linear_entropy_from_triangles(p: &ProbabilityTriple) -> f64 {
    let ps = p.as_array();
    2.0 - (0..3)
        .map(|j| (1.0 - ps[j]).powi(2) + ps[(j + 1) % 3].powi(2))
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const R2: f64 = std::f64::consts::SQRT_2;

    fn t(p1: f64, p2: f64, p3: f64) -> ProbabilityTriple {
        ProbabilityTriple::new(p1, p2, p3).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn matrix_examples() {
        let mixed = qubit_from_probabilities(&t(0.5, 0.5, 0.5)).unwrap();
        assert_eq!(mixed.matrix, ComplexMatrix::identity(2).scale(0.5));
        assert!(mixed.physical);
        let up = qubit_from_probabilities(&t(0.5, 0.5, 1.0)).unwrap();
        assert_eq!(up.matrix, ComplexMatrix::from_diagonal(&[1.0, 0.0]));
        let [_, hi] = global_maxima();
        let pure = qubit_from_probabilities(&hi).unwrap();
        close(numerics::purity(&pure.matrix), 1.0, 1e-12);
        let off = qubit_from_probabilities(&t(0.25, 0.9, 0.5)).unwrap();
        assert_eq!(off.matrix[(0, 1)], C64::new(-0.25, -0.4));
    }

    #[test]
    fn out_of_range_and_unphysical() {
        assert!(matches!(
            ProbabilityTriple::new(1.2, 0.5, 0.5),
            Err(QubitError::OutOfRange { name: "p1", .. })
        ));
        let classical = qubit_from_probabilities(&t(1.0, 1.0, 1.0)).unwrap();
        assert!(!classical.physical);
        assert!(matches!(
            ProbabilityTriple::quantum(1.0, 1.0, 1.0),
            Err(QubitError::NotPositive(r)) if (r - 0.5).abs() < 1e-15
        ));
    }

    #[test]
    fn inverse_map_examples() {
        let p = probabilities_from_qubit(&ComplexMatrix::identity(2).scale(0.5)).unwrap();
        assert_eq!(p, t(0.5, 0.5, 0.5));
        let p = probabilities_from_qubit(&ComplexMatrix::from_diagonal(&[1.0, 0.0])).unwrap();
        assert_eq!(p, t(0.5, 0.5, 1.0));
        let mut m = ComplexMatrix::identity(2).scale(0.5);
        m[(0, 1)] = C64::new(0.25, -0.25);
        m[(1, 0)] = C64::new(0.25, 0.25);
        let p = probabilities_from_qubit(&m).unwrap();
        close(p.p1, 0.75, 1e-15);
        close(p.p2, 0.75, 1e-15);
        assert!(matches!(
            probabilities_from_qubit(&ComplexMatrix::from_diagonal(&[1.5, -0.5])),
            Err(QubitError::NotDensity(_))
        ));
    }

    #[test]
    fn bloch_examples() {
        assert_eq!(bloch_vector(&t(0.5, 0.5, 0.5)), [0.0, 0.0, 0.0]);
        assert_eq!(bloch_vector(&t(0.5, 0.5, 1.0)), [0.0, 0.0, 1.0]);
        let b = bloch_vector(&global_maxima()[1]);
        for x in b {
            close(x, 3.0_f64.sqrt() / 3.0, 1e-15);
        }
        close(b.iter().map(|x| x * x).sum::<f64>(), 1.0, 1e-12);
    }

    #[test]
    fn triangle_examples() {
        let g = triangle_sides(&t(0.5, 0.5, 0.5));
        for s in g.sides {
            close(s, R2 / 2.0, 1e-15);
        }
        let g = triangle_sides(&global_maxima()[1]);
        for s in g.sides {
            close(s, 1.0, 1e-15);
        }
        close(g.area_sum, 3.0, 1e-14);
        let g = triangle_sides(&t(1.0, 1.0, 1.0));
        for s in g.sides {
            close(s, R2, 1e-15);
        }
        close(g.area_sum, 6.0, 1e-14);
    }

    #[test]
    fn area_sum_examples() {
        close(area_sum(&t(0.5, 0.5, 0.5)), 1.5, 1e-15);
        close(area_sum(&global_maxima()[1]), 3.0, 1e-14);
        close(area_sum(&global_maxima()[0]), 3.0, 1e-14);
        close(area_sum(&t(0.5, (2.0 + R2) / 4.0, (2.0 - R2) / 4.0)), 2.25, 1e-14);
    }

    #[test]
    fn classification_examples() {
        let tol = DEFAULT_CLASSIFY_TOL;
        assert_eq!(classify_pure_maxima(&global_maxima()[0], tol), MaximaClass::GlobalMax);
        assert_eq!(classify_pure_maxima(&global_maxima()[1], tol), MaximaClass::GlobalMax);
        let gc = t(0.5, (2.0 + R2) / 4.0, (2.0 - R2) / 4.0);
        assert_eq!(classify_pure_maxima(&gc, tol), MaximaClass::GreatCircleLocalMax);
        let mirrored = t(gc.p1, gc.p3, gc.p2);
        assert_eq!(classify_pure_maxima(&mirrored, tol), MaximaClass::GreatCircleLocalMax);
        assert_eq!(classify_pure_maxima(&t(0.5, 0.5, 1.0), tol), MaximaClass::OtherPure);
        assert_eq!(classify_pure_maxima(&t(0.5, 0.5, 0.5), tol), MaximaClass::Mixed);
    }

    #[test]
    fn classification_is_cycle_invariant_at_global_maxima() {
        for p in global_maxima() {
            assert_eq!(
                classify_pure_maxima(&p, 1e-9),
                classify_pure_maxima(&p.cycled(), 1e-9)
            );
        }
    }

    #[test]
    fn great_circle_has_constant_area() {
        let lo = (3.0 - 6.0_f64.sqrt()) / 6.0;
        let hi = (3.0 + 6.0_f64.sqrt()) / 6.0;
        assert!(great_circle_point(lo - 1e-3, true).is_none());
        for k in 0..=50 {
            let p1 = lo + (hi - lo) * k as f64 / 50.0;
            for upper in [true, false] {
                let p = great_circle_point(p1, upper).unwrap();
                close(area_sum(&p), 2.25, 1e-12);
                close(p.quantumness_residual(), 0.0, 1e-12);
            }
        }
    }

    #[test]
    fn entropy_examples() {
        close(linear_entropy(&t(0.5, 0.5, 0.5)), 0.5, 1e-15);
        close(linear_entropy(&t(1.0, 1.0, 1.0)), -1.0, 1e-15);
        close(linear_entropy(&global_maxima()[1]), 0.0, 1e-14);
        close(linear_entropy_from_triangles(&t(0.5, 0.5, 0.5)), 0.5, 1e-15);
    }

    #[test]
    fn random_round_trip_and_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p = ProbabilityTriple::sample_quantum(&mut rng);
            let q = qubit_from_probabilities(&p).unwrap();
            assert!(q.physical);
            let back = probabilities_from_qubit(&q.matrix).unwrap();
            for (a, b) in p.as_array().iter().zip(back.as_array()) {
                close(*a, b, 1e-14);
            }
            close(triangle_sides(&p).area_sum, area_sum(&p), 1e-12);
            let sl = linear_entropy(&p);
            close(sl, linear_entropy_from_triangles(&p), 1e-12);
            close(sl, 1.0 - numerics::purity(&q.matrix), 1e-12);
        }
    }

    #[test]
    fn area_bounds_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100_000 {
            let s = area_sum(&ProbabilityTriple::sample_quantum(&mut rng));
            assert!((1.5 - 1e-9..=3.0 + 1e-9).contains(&s), "{s}");
            let c = t(rng.random(), rng.random(), rng.random());
            let s = area_sum(&c);
            assert!((1.5 - 1e-12..=6.0 + 1e-12).contains(&s), "{s}");
        }
    }
}
