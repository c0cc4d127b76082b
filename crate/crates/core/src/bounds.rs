//! Multi-start Nelder–Mead search for the extremal area sums.
//!
//! The simplex lives in a box; ball and sphere constraints are imposed by
//! radial projection of every trial point, and any remaining equality
//! constraints enter as quadratic penalties whose weight is escalated until
//! they are met to `1e-8`. Each problem is a chart from a small parameter
//! vector to a probability triple or a qutrit density matrix.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::numerics::{self, ComplexMatrix, C64};
use crate::qubit::{self, ProbabilityTriple};
use crate::qutrit::{self, ComponentQubits, PureQutritParams};

/// Feasibility slack for starts and reported points.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Multi-start results closer than this are treated as ties.
pub const TIE_TOL: f64 = 1e-10;
pub const DEFAULT_STARTS: usize = 64;
pub const MAX_RESTARTS: usize = 4;

const MAX_PENALTY_WEIGHT: f64 = 1e12;
const PENALTY_GROWTH: f64 = 100.0;
const RESTART_GAIN: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("start point is infeasible (violation {0:e})")]
    InfeasibleStart(f64),
    #[error("simplex made no progress in {0} iterations")]
    NoProgress(usize),
    #[error("unknown search problem {0:?}")]
    UnknownProblem(String),
}

pub type Penalty = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShellKind {
    /// `|x − c| ≤ r`
    Ball,
    /// `|x − c| = r`
    Sphere,
}

/// Radial constraint on a subset of coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub indices: Vec<usize>,
    pub center: f64,
    pub radius: f64,
    pub kind: ShellKind,
}

impl Shell {
    fn excess(&self, x: &[f64]) -> f64 {
        let r = self.distance(x);
        match self.kind {
            ShellKind::Ball => (r - self.radius).max(0.0),
            ShellKind::Sphere => (r - self.radius).abs(),
        }
    }

    fn distance(&self, x: &[f64]) -> f64 {
        self.indices
            .iter()
            .map(|&i| (x[i] - self.center).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn project(&self, x: &mut [f64]) {
        let r = self.distance(x);
        let needs = match self.kind {
            ShellKind::Ball => r > self.radius,
            ShellKind::Sphere => true,
        };
        if !needs {
            return;
        }
        if r < 1e-300 {
            x[self.indices[0]] = self.center + self.radius;
            return;
        }
        let scale = self.radius / r;
        for &i in &self.indices {
            x[i] = self.center + (x[i] - self.center) * scale;
        }
    }
}

/// Feasible set: a box, radial shells, and equality penalties.
#[derive(Clone, Default)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub shells: Vec<Shell>,
    pub penalties: Vec<Penalty>,
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Region")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("shells", &self.shells)
            .field("penalties", &self.penalties.len())
            .finish()
    }
}

impl Region {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        Self {
            lower,
            upper,
            ..Self::default()
        }
    }

    pub fn with_shell(mut self, shell: Shell) -> Self {
        self.shells.push(shell);
        self
    }

    pub fn with_penalty(mut self, p: Penalty) -> Self {
        self.penalties.push(p);
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Clamps to the box, then applies each shell projection in order.
    pub fn project(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
        for s in &self.shells {
            s.project(x);
        }
    }

    /// Largest violation of the box and shell constraints.
    pub fn hard_violation(&self, x: &[f64]) -> f64 {
        let boxed = x
            .iter()
            .enumerate()
            .map(|(i, v)| (self.lower[i] - v).max(v - self.upper[i]).max(0.0))
            .fold(0.0, f64::max);
        self.shells.iter().map(|s| s.excess(x)).fold(boxed, f64::max)
    }

    /// Largest absolute penalty residual.
    pub fn penalty_violation(&self, x: &[f64]) -> f64 {
        self.penalties.iter().map(|p| p(x).abs()).fold(0.0, f64::max)
    }

    fn penalty_sum(&self, x: &[f64]) -> f64 {
        self.penalties.iter().map(|p| p(x).powi(2)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the spread of simplex values.
    pub tolerance: f64,
    /// Convergence threshold on the simplex diameter.
    pub x_tolerance: f64,
    /// Initial edge length as a fraction of each box side.
    pub initial_step: f64,
    pub penalty_weight: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tolerance: 1e-10,
            x_tolerance: 1e-8,
            initial_step: 0.1,
            penalty_weight: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    /// Objective value at `point`, without penalty.
    pub value: f64,
    pub point: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximizes `objective` over `region` starting from `start`.
///
/// Trial points are projected onto the region before evaluation, so every
/// simplex vertex is feasible for the box and shell constraints.
pub fn nelder_mead(
    objective: &(dyn Fn(&[f64]) -> f64 + Sync),
    region: &Region,
    start: &[f64],
    options: &NelderMeadOptions,
) -> Result<NelderMeadResult, SearchError> {
    let n = region.dim();
    if start.len() != n || start.iter().any(|v| !v.is_finite()) {
        return Err(SearchError::InfeasibleStart(f64::INFINITY));
    }
    let violation = region.hard_violation(start);
    if violation > FEASIBILITY_TOL {
        return Err(SearchError::InfeasibleStart(violation));
    }

    // internal minimization of the penalized negative objective
    let cost = |x: &[f64]| -> f64 {
        let v = -objective(x) + options.penalty_weight * region.penalty_sum(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let projected = |x: Vec<f64>| {
        let mut x = x;
        region.project(&mut x);
        x
    };

    let build = |origin: &[f64]| -> Vec<Vec<f64>> {
        let mut simplex = vec![projected(origin.to_vec())];
        for i in 0..n {
            let mut v = simplex[0].clone();
            let width = region.upper[i] - region.lower[i];
            let step = options.initial_step * if width.is_finite() { width } else { 1.0 };
            v[i] += if v[i] + step <= region.upper[i] { step } else { -step };
            simplex.push(projected(v));
        }
        simplex
    };

    let mut simplex = build(start);
    let mut values: Vec<f64> = simplex.iter().map(|x| cost(x)).collect();
    let start_cost = values[0];

    // a simplex squeezed against a face can stall; on convergence the
    // search restarts from its best vertex until that stops paying off
    let mut restarts_left = MAX_RESTARTS;
    let mut last_converged = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut ever_small = false;
    while iterations < options.max_iterations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter <= options.x_tolerance {
            ever_small = true;
        }
        if spread <= options.tolerance && diameter <= options.x_tolerance {
            let gained = last_converged - values[0] > RESTART_GAIN;
            if restarts_left == 0 || !gained {
                converged = true;
                break;
            }
            restarts_left -= 1;
            last_converged = values[0];
            simplex = build(&simplex[0]);
            values = simplex.iter().map(|x| cost(x)).collect();
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|v| v[i]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            projected(
                centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| c + t * (w - c))
                    .collect(),
            )
        };

        let reflected = along(-1.0);
        let fr = cost(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = cost(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = along(-0.5);
            let f = cost(&c);
            (c, f)
        } else {
            let c = along(0.5);
            let f = cost(&c);
            (c, f)
        };
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for k in 1..=n {
            let shrunk = best
                .iter()
                .zip(&simplex[k])
                .map(|(b, v)| b + 0.5 * (v - b))
                .collect();
            simplex[k] = projected(shrunk);
            values[k] = cost(&simplex[k]);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    if !converged && !ever_small && values[best] >= start_cost {
        return Err(SearchError::NoProgress(iterations));
    }
    let point = simplex[best].clone();
    Ok(NelderMeadResult {
        value: objective(&point),
        point,
        iterations,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchProblem {
    QubitArea,
    QutritAreaFree,
    QutritAreaPureQubitRep,
    #[serde(rename = "qutrit_area_ABD_pure")]
    QutritAreaAbdPure,
    #[serde(rename = "separable_embed_12")]
    SeparableEmbed12,
    #[serde(rename = "separable_embed_3")]
    SeparableEmbed3,
    AppendixPure,
}

impl SearchProblem {
    pub const ALL: [SearchProblem; 7] = [
        Self::QubitArea,
        Self::QutritAreaFree,
        Self::QutritAreaPureQubitRep,
        Self::QutritAreaAbdPure,
        Self::SeparableEmbed12,
        Self::SeparableEmbed3,
        Self::AppendixPure,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::QubitArea => "qubit_area",
            Self::QutritAreaFree => "qutrit_area_free",
            Self::QutritAreaPureQubitRep => "qutrit_area_pure_qubit_rep",
            Self::QutritAreaAbdPure => "qutrit_area_ABD_pure",
            Self::SeparableEmbed12 => "separable_embed_12",
            Self::SeparableEmbed3 => "separable_embed_3",
            Self::AppendixPure => "appendix_pure",
        }
    }

    /// Documented extremum and its tolerance band, if any.
    pub fn target(&self, sense: Sense) -> Option<(f64, f64)> {
        match (self, sense) {
            (Self::QubitArea, Sense::Maximize) => Some((3.0, 1e-6)),
            (Self::QubitArea, Sense::Minimize) => Some((1.5, 1e-6)),
            (Self::QutritAreaFree, Sense::Maximize) => Some((8.1565, 1e-3)),
            (Self::QutritAreaFree, Sense::Minimize) => Some((4.5, 1e-5)),
            (Self::QutritAreaPureQubitRep, Sense::Maximize) => Some((8.0, 1e-6)),
            (Self::QutritAreaPureQubitRep, Sense::Minimize) => Some((7.25, 1e-6)),
            (Self::QutritAreaAbdPure, Sense::Maximize) => Some((8.095, 5e-3)),
            (Self::SeparableEmbed12, Sense::Maximize) => Some((8.0, 1e-6)),
            (Self::SeparableEmbed3, Sense::Maximize) => Some((embed3_bound(), 1e-5)),
            (Self::AppendixPure, Sense::Maximize) => Some((8.1565, 1e-3)),
            _ => None,
        }
    }
}

impl fmt::Display for SearchProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SearchProblem {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| SearchError::UnknownProblem(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    fn sign(self) -> f64 {
        match self {
            Self::Maximize => 1.0,
            Self::Minimize => -1.0,
        }
    }
}

/// `(57 + √17) / 8`, the largest area sum with a vanishing `ρ13`.
pub fn embed3_bound() -> f64 {
    (57.0 + 17f64.sqrt()) / 8.0
}

/// What a parameter vector describes.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Chart {
    /// `(p1, p2, p3)` in the Bloch ball.
    Qubit,
    /// `ρ = L L†` with `L` lower triangular in the permuted basis `perm` and
    /// unit Frobenius norm. With `pinned`, `L10 = 0`, which forces
    /// `ρ[perm0][perm1] = 0`.
    Cholesky { perm: [usize; 3], pinned: bool },
    /// `(p_β, p_γ, β, γ)`.
    Pure,
    /// `(p1^C, p3^C)` with `p2^C` on the `branch` side of `½`.
    PureQubitRep { branch: f64 },
}

const IDENTITY: [usize; 3] = [0, 1, 2];

impl Chart {
    fn dim(&self) -> usize {
        match self {
            Self::Qubit => 3,
            Self::Cholesky { pinned: false, .. } => 9,
            Self::Cholesky { pinned: true, .. } => 7,
            Self::Pure => 4,
            Self::PureQubitRep { .. } => 2,
        }
    }

    fn region(&self) -> Region {
        match self {
            Self::Qubit => Region::boxed(vec![0.0; 3], vec![1.0; 3]).with_shell(Shell {
                indices: vec![0, 1, 2],
                center: 0.5,
                radius: 0.5,
                kind: ShellKind::Ball,
            }),
            Self::Cholesky { .. } => {
                let n = self.dim();
                let lower = (0..n).map(|i| if i < 3 { 0.0 } else { -1.0 }).collect();
                Region::boxed(lower, vec![1.0; n]).with_shell(Shell {
                    indices: (0..n).collect(),
                    center: 0.0,
                    radius: 1.0,
                    kind: ShellKind::Sphere,
                })
            }
            Self::Pure => Region::boxed(vec![0.0, 0.0, -TAU, -TAU], vec![1.0, 1.0, 2.0 * TAU, 2.0 * TAU])
                .with_shell(Shell {
                    indices: vec![0, 1],
                    center: 0.0,
                    radius: 1.0,
                    kind: ShellKind::Ball,
                }),
            Self::PureQubitRep { .. } => Region::boxed(vec![0.0; 2], vec![1.0; 2]).with_shell(Shell {
                indices: vec![0, 1],
                center: 0.5,
                radius: 0.5,
                kind: ShellKind::Ball,
            }),
        }
    }

    fn qutrit(&self, x: &[f64]) -> ComplexMatrix {
        match *self {
            Self::Qubit => unreachable!("qubit chart has no qutrit"),
            Self::Cholesky { perm, pinned } => {
                let mut l = ComplexMatrix::zeros(3);
                for j in 0..3 {
                    l[(j, j)] = C64::new(x[j], 0.0);
                }
                let off: &[(usize, usize)] = if pinned {
                    &[(2, 0), (2, 1)]
                } else {
                    &[(1, 0), (2, 0), (2, 1)]
                };
                for (k, &(j, i)) in off.iter().enumerate() {
                    l[(j, i)] = C64::new(x[3 + 2 * k], x[4 + 2 * k]);
                }
                let p = &l * &l.adjoint();
                let mut rho = ComplexMatrix::zeros(3);
                for j in 0..3 {
                    for k in 0..3 {
                        rho[(perm[j], perm[k])] = p[(j, k)];
                    }
                }
                rho.scale(1.0 / rho.trace().re)
            }
            Self::Pure => {
                let params = PureQutritParams {
                    p_beta: x[0],
                    p_gamma: x[1],
                    beta: x[2],
                    gamma: x[3],
                };
                let psi = params.amplitudes().expect("projected onto the unit disk");
                qutrit::projector(&psi).hermitian_part()
            }
            Self::PureQubitRep { branch } => {
                let c = pure_rep_c(x, branch);
                let mut rho = ComplexMatrix::from_diagonal(&[c.p3, 0.0, 1.0 - c.p3]);
                rho[(0, 2)] = c.coherence();
                rho[(2, 0)] = c.coherence().conj();
                rho
            }
        }
    }

    /// Parameters reproducing a given qutrit (used for warm starts).
    fn chart_of(&self, rho: &ComplexMatrix) -> Vec<f64> {
        match *self {
            Self::Cholesky { perm, pinned } => {
                let p = ComplexMatrix::from_fn(3, |j, k| rho[(perm[j], perm[k])]);
                let l = cholesky(&p);
                let mut x: Vec<f64> = (0..3).map(|j| l[(j, j)].re).collect();
                let off: &[(usize, usize)] = if pinned {
                    &[(2, 0), (2, 1)]
                } else {
                    &[(1, 0), (2, 0), (2, 1)]
                };
                for &(j, i) in off {
                    x.push(l[(j, i)].re);
                    x.push(l[(j, i)].im);
                }
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter().map(|v| v / norm).collect()
            }
            _ => unreachable!("warm starts for this chart are given directly"),
        }
    }
}

fn pure_rep_c(x: &[f64], branch: f64) -> ProbabilityTriple {
    let (p1, p3) = (x[0], x[1]);
    let rest = (0.25 - (p1 - 0.5).powi(2) - (p3 - 0.5).powi(2)).max(0.0);
    ProbabilityTriple {
        p1,
        p2: 0.5 + branch * rest.sqrt(),
        p3,
    }
}

/// Lower Cholesky factor of a PSD matrix, with zero columns where a pivot
/// vanishes.
fn cholesky(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.dim();
    let mut l = ComplexMatrix::zeros(n);
    for j in 0..n {
        let s: f64 = (0..j).map(|k| l[(j, k)].norm_sqr()).sum();
        let d = (m[(j, j)].re - s).max(0.0).sqrt();
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            let s: C64 = (0..j).map(|k| l[(i, k)] * l[(j, k)].conj()).sum();
            l[(i, j)] = if d > 1e-12 {
                (m[(i, j)] - s) / d
            } else {
                C64::new(0.0, 0.0)
            };
        }
    }
    l
}

fn qubit_purity(t: &ProbabilityTriple) -> f64 {
    1.0 - qubit::linear_entropy(t)
}

/// Everything needed to run one problem.
struct Formulation {
    charts: Vec<Chart>,
    abd_objective: bool,
    equal_purity: bool,
    warm_starts: Vec<(usize, Vec<f64>)>,
}

impl Formulation {
    fn of(problem: SearchProblem, sense: Sense) -> Self {
        let plain = |chart: Chart| Self {
            charts: vec![chart],
            abd_objective: false,
            equal_purity: false,
            warm_starts: Vec::new(),
        };
        let maximize = sense == Sense::Maximize;
        match problem {
            SearchProblem::QubitArea => {
                let mut f = plain(Chart::Qubit);
                if maximize {
                    let g = qubit::global_maxima()[1];
                    f.warm_starts.push((0, g.as_array().to_vec()));
                }
                f
            }
            SearchProblem::QutritAreaFree => {
                let chart = Chart::Cholesky {
                    perm: IDENTITY,
                    pinned: false,
                };
                let mut f = plain(chart);
                if maximize {
                    let rho = Chart::Pure.qutrit(&appendix_point());
                    f.warm_starts.push((0, chart.chart_of(&rho)));
                }
                f
            }
            SearchProblem::QutritAreaPureQubitRep => {
                let mut f = Self {
                    charts: vec![
                        Chart::PureQubitRep { branch: 1.0 },
                        Chart::PureQubitRep { branch: -1.0 },
                    ],
                    ..plain(Chart::Qubit)
                };
                if maximize {
                    let v = qubit::global_maxima()[1].p1;
                    f.warm_starts.push((0, vec![v, v]));
                }
                f
            }
            SearchProblem::QutritAreaAbdPure => Self {
                abd_objective: true,
                equal_purity: true,
                ..plain(Chart::Pure)
            },
            SearchProblem::SeparableEmbed12 => {
                let chart = Chart::Cholesky {
                    perm: [1, 2, 0],
                    pinned: true,
                };
                let mut f = plain(chart);
                if maximize {
                    f.warm_starts
                        .push((0, chart.chart_of(&separable_embed_12_argmax())));
                }
                f
            }
            SearchProblem::SeparableEmbed3 => {
                let chart = Chart::Cholesky {
                    perm: [0, 2, 1],
                    pinned: true,
                };
                let mut f = plain(chart);
                if maximize {
                    for upper in [true, false] {
                        f.warm_starts
                            .push((0, chart.chart_of(&separable_embed_3_argmax(upper))));
                    }
                }
                f
            }
            SearchProblem::AppendixPure => {
                let mut f = plain(Chart::Pure);
                if maximize {
                    f.warm_starts.push((0, appendix_point().to_vec()));
                }
                f
            }
        }
    }

    fn objective(&self, chart: &Chart, x: &[f64]) -> f64 {
        if let Chart::Qubit = chart {
            return qubit::area_sum(&ProbabilityTriple {
                p1: x[0],
                p2: x[1],
                p3: x[2],
            });
        }
        let c = qutrit::components_of_matrix(&chart.qutrit(x));
        if self.abd_objective {
            qutrit::qutrit_area_sum_abd(&c)
        } else {
            qutrit::qutrit_area_sum(&c)
        }
    }

    fn region(&self, chart: &Chart) -> Region {
        let mut region = chart.region();
        if self.equal_purity {
            let ch = *chart;
            let components = move |x: &[f64]| qutrit::components_of_matrix(&ch.qutrit(x));
            region = region
                .with_penalty(Arc::new(move |x: &[f64]| {
                    let c = components(x);
                    qubit_purity(&c.a) - qubit_purity(&c.b)
                }))
                .with_penalty(Arc::new(move |x: &[f64]| {
                    let c = components(x);
                    qubit_purity(&c.c) - qubit_purity(&c.d)
                }));
        }
        region
    }

    /// Violation of every constraint of the problem, evaluated on the state.
    fn violation(&self, chart: &Chart, region: &Region, x: &[f64]) -> f64 {
        let mut v = region.hard_violation(x).max(region.penalty_violation(x));
        match *chart {
            Chart::Qubit => {
                let t = ProbabilityTriple {
                    p1: x[0],
                    p2: x[1],
                    p3: x[2],
                };
                v = v.max(t.quantumness_residual().max(0.0));
            }
            _ => {
                let rho = chart.qutrit(x);
                let min_eig = numerics::hermitian_eigen(&rho)
                    .map(|e| e.min_value())
                    .unwrap_or(f64::NEG_INFINITY);
                v = v
                    .max(-min_eig)
                    .max((rho.trace().re - 1.0).abs())
                    .max(rho.hermitian_residual());
                if let Chart::Cholesky { perm, pinned: true } = *chart {
                    v = v.max(rho[(perm[0], perm[1])].norm());
                }
                if matches!(chart, Chart::Pure | Chart::PureQubitRep { .. }) {
                    v = v.max((numerics::purity(&rho) - 1.0).abs());
                }
                if let Chart::PureQubitRep { .. } = chart {
                    let c = qutrit::components_of_matrix(&rho);
                    for t in [c.a, c.b, c.c, c.d] {
                        v = v.max(t.quantumness_residual().abs());
                    }
                }
            }
        }
        v
    }
}

/// Reference maximizer `(p_β, p_γ, β, γ)` of the pure-state chart.
pub fn appendix_point() -> [f64; 4] {
    [0.1685, 0.8759, 0.2749, 3.9892]
}

/// Listed maximizer with `ρ23 = 0`: `B = (½, ½, 1)`, `C` the `(3 + √3)/6`
/// triple, `D` with `p1 = p2 = ½`.
pub fn separable_embed_12_argmax() -> ComplexMatrix {
    let c = qubit::global_maxima()[1];
    let mut rho = ComplexMatrix::from_diagonal(&[c.p3, 0.0, 1.0 - c.p3]);
    rho[(0, 2)] = c.coherence();
    rho[(2, 0)] = c.coherence().conj();
    rho
}

/// Listed maximizer with `ρ13 = 0`:
/// `p3^B = ½(1 ± √(½ + 3/(2√17)))`, `p3^C = 0`, `p1^D = p2^D = ½ ∓ ¼√(1 − 3/√17)`.
pub fn separable_embed_3_argmax(upper: bool) -> ComplexMatrix {
    let s = if upper { 1.0 } else { -1.0 };
    let r17 = 17f64.sqrt();
    let p3b = 0.5 * (1.0 + s * (0.5 + 1.5 / r17).sqrt());
    let pd = 0.5 - s * 0.25 * (1.0 - 3.0 / r17).sqrt();
    let d = ProbabilityTriple {
        p1: pd,
        p2: pd,
        p3: 1.0 - p3b,
    };
    let mut rho = ComplexMatrix::from_diagonal(&[0.0, 1.0 - p3b, p3b]);
    rho[(1, 2)] = d.coherence();
    rho[(2, 1)] = d.coherence().conj();
    rho
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub problem: SearchProblem,
    pub sense: Sense,
    pub extremum_value: f64,
    /// Chart parameters of the extremizer, phases reduced to `[0, 2π)`.
    pub argmax: Vec<f64>,
    /// `(p1, p2, p3)` for the qubit problem, otherwise the B, C, D list
    /// `(pB1, pB2, pB3, pC1, pC2, pC3, pD1, pD2)`.
    pub argmax_probabilities: Vec<f64>,
    /// Component qubits of the extremizer for qutrit problems.
    pub components: Option<ComponentQubits>,
    /// `±1` side of `p2^C` for the pure qubit representation.
    pub branch: Option<f64>,
    pub starts_used: usize,
    pub best_constraint_violation: f64,
    pub iterations: usize,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub within_tolerance: Option<bool>,
}

struct Candidate {
    chart: usize,
    value: f64,
    point: Vec<f64>,
    iterations: usize,
}

fn canonical(chart: &Chart, x: &[f64]) -> Vec<f64> {
    let mut x = x.to_vec();
    if let Chart::Pure = chart {
        for v in &mut x[2..] {
            *v = v.rem_euclid(TAU);
        }
    }
    x
}

fn latin_hypercube(region: &Region, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = region.dim();
    let strata: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let mut s: Vec<usize> = (0..count).collect();
            s.shuffle(rng);
            s
        })
        .collect();
    (0..count)
        .map(|k| {
            let mut x: Vec<f64> = (0..n)
                .map(|i| {
                    let u: f64 = rng.random();
                    let t = (strata[i][k] as f64 + u) / count as f64;
                    region.lower[i] + t * (region.upper[i] - region.lower[i])
                })
                .collect();
            region.project(&mut x);
            x
        })
        .collect()
}

/// Runs one start to convergence with restarts and penalty escalation.
fn polish(
    objective: &(dyn Fn(&[f64]) -> f64 + Sync),
    region: &Region,
    start: &[f64],
    violation: &dyn Fn(&Region, &[f64]) -> f64,
) -> Option<(f64, Vec<f64>, usize)> {
    let mut options = NelderMeadOptions::default();
    let mut point = start.to_vec();
    region.project(&mut point);
    let mut value = f64::NEG_INFINITY;
    let mut iterations = 0;
    loop {
        for _ in 0..=MAX_RESTARTS {
            let r = nelder_mead(objective, region, &point, &options).ok()?;
            iterations += r.iterations;
            let gain = r.value - value;
            point = r.point;
            value = r.value;
            if gain <= RESTART_GAIN {
                break;
            }
        }
        if region.penalties.is_empty()
            || violation(region, &point) <= FEASIBILITY_TOL
            || options.penalty_weight >= MAX_PENALTY_WEIGHT
        {
            break;
        }
        options.penalty_weight *= PENALTY_GROWTH;
    }
    Some((value, point, iterations))
}

/// Maximizes the sum of areas for `problem`.
pub fn reproduce_bound(problem: SearchProblem, seed: u64) -> BoundReport {
    reproduce_bound_with(problem, Sense::Maximize, seed)
}

pub fn reproduce_bound_with(problem: SearchProblem, sense: Sense, seed: u64) -> BoundReport {
    let form = Formulation::of(problem, sense);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs: Vec<(usize, Vec<f64>)> = Vec::new();
    for (ci, chart) in form.charts.iter().enumerate() {
        let region = chart.region();
        jobs.extend(
            latin_hypercube(&region, DEFAULT_STARTS, &mut rng)
                .into_iter()
                .map(|x| (ci, x)),
        );
    }
    jobs.extend(form.warm_starts.iter().cloned());

    let regions: Vec<Region> = form.charts.iter().map(|c| form.region(c)).collect();
    let sign = sense.sign();
    let candidates: Vec<Option<Candidate>> = jobs
        .par_iter()
        .map(|(ci, start)| {
            let chart = form.charts[*ci];
            let objective = |x: &[f64]| sign * form.objective(&chart, x);
            let violation = |r: &Region, x: &[f64]| form.violation(&chart, r, x);
            polish(&objective, &regions[*ci], start, &violation).map(|(value, point, iterations)| {
                Candidate {
                    chart: *ci,
                    value,
                    point: canonical(&chart, &point),
                    iterations,
                }
            })
        })
        .collect();

    let iterations = candidates.iter().flatten().map(|c| c.iterations).sum();
    let best = candidates
        .into_iter()
        .flatten()
        .filter(|c| {
            form.violation(&form.charts[c.chart], &regions[c.chart], &c.point) <= FEASIBILITY_TOL
        })
        .reduce(|a, b| {
            if (a.value - b.value).abs() <= TIE_TOL {
                if (b.chart, &b.point) < (a.chart, &a.point) {
                    b
                } else {
                    a
                }
            } else if b.value > a.value {
                b
            } else {
                a
            }
        })
        .expect("at least one start yields a feasible point");

    let chart = form.charts[best.chart];
    let extremum_value = form.objective(&chart, &best.point);
    let (argmax_probabilities, components) = match chart {
        Chart::Qubit => (best.point.clone(), None),
        _ => {
            let c = qutrit::components_of_matrix(&chart.qutrit(&best.point));
            (c.bcd_probabilities().to_vec(), Some(c))
        }
    };
    let target = problem.target(sense);
    BoundReport {
        problem,
        sense,
        extremum_value,
        argmax: best.point.clone(),
        argmax_probabilities,
        components,
        branch: match chart {
            Chart::PureQubitRep { branch } => Some(branch),
            _ => None,
        },
        starts_used: jobs.len(),
        best_constraint_violation: form.violation(&chart, &regions[best.chart], &best.point),
        iterations,
        target: target.map(|t| t.0),
        tolerance: target.map(|t| t.1),
        within_tolerance: target.map(|(t, tol)| (extremum_value - t).abs() <= tol),
    }
}

/// Area sum of the pure qubit representation at `(p1^C, p3^C)` on one
/// branch, or `None` outside the disk.
pub fn pure_rep_area(p1c: f64, p3c: f64, branch: f64) -> Option<f64> {
    if (p1c - 0.5).powi(2) + (p3c - 0.5).powi(2) > 0.25 + 1e-12 {
        return None;
    }
    let chart = Chart::PureQubitRep { branch };
    let c = qutrit::components_of_matrix(&chart.qutrit(&[p1c, p3c]));
    Some(qutrit::qutrit_area_sum(&c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn qubit_region() -> Region {
        Chart::Qubit.region()
    }

    fn area(x: &[f64]) -> f64 {
        qubit::area_sum(&ProbabilityTriple {
            p1: x[0],
            p2: x[1],
            p3: x[2],
        })
    }

    #[test]
    fn maximizes_area_over_the_ball() {
        let r = nelder_mead(&area, &qubit_region(), &[0.5; 3], &NelderMeadOptions::default()).unwrap();
        close(r.value, 3.0, 1e-6);
        assert!(qubit_region().hard_violation(&r.point) <= 1e-8);
    }

    #[test]
    fn minimizes_area_over_the_ball() {
        let neg = |x: &[f64]| -area(x);
        let r = nelder_mead(&neg, &qubit_region(), &[0.7, 0.3, 0.6], &NelderMeadOptions::default()).unwrap();
        close(-r.value, 1.5, 1e-9);
    }

    #[test]
    fn box_quadratic_on_a_face() {
        let f = |x: &[f64]| -(x[0] - 2.0).powi(2) - (x[1] - 0.25).powi(2);
        let region = Region::boxed(vec![0.0, 0.0], vec![1.0, 1.0]);
        let r = nelder_mead(&f, &region, &[0.5, 0.5], &NelderMeadOptions::default()).unwrap();
        close(r.value, -1.0, 1e-8);
        close(r.point[0], 1.0, 1e-8);
    }

    #[test]
    fn rejects_infeasible_start() {
        assert!(matches!(
            nelder_mead(&area, &qubit_region(), &[1.0, 1.0, 1.0], &NelderMeadOptions::default()),
            Err(SearchError::InfeasibleStart(_))
        ));
        assert!(matches!(
            nelder_mead(&area, &qubit_region(), &[0.5, 0.5], &NelderMeadOptions::default()),
            Err(SearchError::InfeasibleStart(_))
        ));
    }

    #[test]
    fn never_returns_below_start() {
        let bumpy = |x: &[f64]| (7.0 * x[0]).sin() * (5.0 * x[1]).cos();
        let region = Region::boxed(vec![0.0; 2], vec![1.0; 2]);
        for start in [[0.1, 0.9], [0.5, 0.5], [0.95, 0.05]] {
            let r = nelder_mead(&bumpy, &region, &start, &NelderMeadOptions::default()).unwrap();
            assert!(r.value >= bumpy(&start));
        }
    }

    #[test]
    fn flat_objective_reports_no_progress() {
        let flat = |_: &[f64]| 1.0;
        let options = NelderMeadOptions {
            max_iterations: 3,
            ..NelderMeadOptions::default()
        };
        let region = Region::boxed(vec![0.0; 2], vec![1.0; 2]);
        assert_eq!(
            nelder_mead(&flat, &region, &[0.5, 0.5], &options),
            Err(SearchError::NoProgress(3))
        );
    }

    #[test]
    fn sphere_projection_normalizes() {
        let shell = Shell {
            indices: vec![0, 1, 2],
            center: 0.0,
            radius: 1.0,
            kind: ShellKind::Sphere,
        };
        let mut x = [0.3, -0.1, 0.2, 5.0];
        shell.project(&mut x);
        close(x[..3].iter().map(|v| v * v).sum::<f64>(), 1.0, 1e-15);
        assert_eq!(x[3], 5.0);
    }

    #[test]
    fn cholesky_chart_round_trips() {
        let rho = Chart::Pure.qutrit(&appendix_point());
        for chart in [
            Chart::Cholesky {
                perm: IDENTITY,
                pinned: false,
            },
            Chart::Cholesky {
                perm: [2, 0, 1],
                pinned: false,
            },
        ] {
            let back = chart.qutrit(&chart.chart_of(&rho));
            assert!(back.max_abs_diff(&rho) < 1e-10);
        }
        let chart = Chart::Cholesky {
            perm: [1, 2, 0],
            pinned: true,
        };
        let m = chart.qutrit(&[0.3, 0.4, 0.5, 0.1, -0.2, 0.3, 0.6]);
        assert_eq!(m[(1, 2)], C64::new(0.0, 0.0));
        assert_eq!(m[(2, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn problem_names_round_trip() {
        for p in SearchProblem::ALL {
            assert_eq!(p.as_str().parse::<SearchProblem>().unwrap(), p);
            assert_eq!(serde_json::to_value(p).unwrap(), p.as_str());
        }
        assert!("qutrit".parse::<SearchProblem>().is_err());
    }

    #[test]
    fn listed_argmaxima_evaluate_exactly() {
        let c = qutrit::components_of_matrix(&separable_embed_12_argmax());
        close(qutrit::qutrit_area_sum(&c), 8.0, 1e-12);
        for upper in [true, false] {
            let rho = separable_embed_3_argmax(upper);
            let c = qutrit::components_of_matrix(&rho);
            close(qutrit::qutrit_area_sum(&c), embed3_bound(), 1e-9);
            let e = numerics::hermitian_eigen(&rho).unwrap();
            assert!(e.min_value() >= -1e-12);
        }
    }

    #[test]
    fn pure_rep_range_endpoints() {
        let g = qubit::global_maxima()[1].p1;
        close(pure_rep_area(g, g, 1.0).unwrap(), 8.0, 1e-12);
        let gc = qubit::great_circle_point(0.5, true).unwrap();
        let branch = if gc.p2 >= 0.5 { 1.0 } else { -1.0 };
        close(pure_rep_area(gc.p1, gc.p3, branch).unwrap(), 7.25, 1e-12);
        assert!(pure_rep_area(0.0, 0.0, 1.0).is_none());
    }

    #[test]
    fn qubit_bounds_reproduce() {
        let max = reproduce_bound(SearchProblem::QubitArea, 42);
        close(max.extremum_value, 3.0, 1e-6);
        for p in &max.argmax_probabilities {
            close(*p, (3.0 - 3f64.sqrt()) / 6.0, 1e-5);
        }
        assert!(max.best_constraint_violation <= 1e-8);
        let min = reproduce_bound_with(SearchProblem::QubitArea, Sense::Minimize, 42);
        close(min.extremum_value, 1.5, 1e-9);
        assert_eq!(min.within_tolerance, Some(true));
    }

    #[test]
    fn reports_are_deterministic() {
        let a = reproduce_bound(SearchProblem::AppendixPure, 7);
        let b = reproduce_bound(SearchProblem::AppendixPure, 7);
        assert_eq!(a, b);
    }
}
