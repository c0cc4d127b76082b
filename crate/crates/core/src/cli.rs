//! Command-line front end for the `malevich` binary.
//!
//! Every command renders a report as JSON (default) or CSV and writes it to
//! stdout or `--out`. Scans always start with a `# malevich-qstate v1 …`
//! schema line followed by a column header.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bounds::{self, BoundReport, SearchProblem, Sense};
use crate::numerics::{self, ComplexMatrix, NumericsError, Subsystem, C64};
use crate::qubit::{self, MaximaClass, ProbabilityTriple};
use crate::qutrit::{self, ComponentQubits, QutritDensity, QutritError};
use crate::spin1::{self, JxSign};
use crate::two_qubit::{self, ClosedForm, EntanglementReport, Family, FamilyInput, Placement, WitnessVerdict};

pub const SCHEMA: &str = "malevich-qstate v1";

pub mod exit {
    pub const OK: i32 = 0;
    pub const PARSE: i32 = 2;
    pub const POSITIVITY: i32 = 3;
    pub const UNPHYSICAL: i32 = 4;
    pub const BOUND_REGRESSION: i32 = 5;
    pub const IO: i32 = 6;
}

#[derive(Debug, Parser)]
#[command(name = "malevich", version, about = "Malevich-square analysis of qubit, qutrit and two-qubit states")]
pub struct RunConfig {
    /// Output format; scans default to csv, reports to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Geometry, entropy and maxima class of a probability triple.
    Qubit(QubitArgs),
    /// Component qubits, areas and entropies of a qutrit.
    Qutrit(QutritArgs),
    /// Entanglement measures and area witness for a two-qubit family state.
    Twoqubit(TwoQubitArgs),
    /// Reproduce an extremal area sum by multi-start search.
    Bounds(BoundsArgs),
    /// Grid scans behind the figures.
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct QubitArgs {
    /// `p1,p2,p3`
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Vec<f64>,
    /// Fail with exit code 3 when the triple lies outside the Bloch ball.
    #[arg(long)]
    pub strict: bool,
    /// Tolerance for the maxima classification.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct QutritArgs {
    /// JSON file with `dim`, `re`, `im` (row-major).
    #[arg(long, conflicts_with_all = ["a", "b", "d"])]
    pub matrix: Option<PathBuf>,
    /// `p1,p2,p3` of qubit A.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<f64>>,
    /// `p1,p2,p3` of qubit B.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub b: Option<Vec<f64>>,
    /// `p1,p2` of qubit D (`p3` follows from B); a third value is checked.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub d: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct TwoQubitArgs {
    /// center, corner, embed1, embed2, embed3 or embed4.
    #[arg(long)]
    pub family: String,
    /// `p1,p2,p3` of the block qubit (center/corner).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "qutrit")]
    pub p: Option<Vec<f64>>,
    /// Qutrit matrix file for the embed families.
    #[arg(long)]
    pub qutrit: Option<PathBuf>,
    /// Report closed forms for inputs that are not states instead of failing.
    #[arg(long)]
    pub allow_unphysical: bool,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub problem: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Search for the minimum instead of the maximum.
    #[arg(long)]
    pub minimize: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// fig4a, fig4b, fig2, fig5 or fig6 (long names such as
    /// `concurrence_fig4a` are accepted too).
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = 201)]
    pub resolution: usize,
    /// Accepted for uniformity; every scan is a fixed grid.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Sign of ⟨Jx⟩ for fig6.
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn parse(message: impl Into<String>) -> Self {
        Self::new(exit::PARSE, message)
    }
}

/// A rendered command result and the exit code to finish with.
struct Output {
    text: String,
    code: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, code: exit::OK }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::PARSE } else { exit::OK };
        }
    };
    match execute(&config) {
        Ok(out) => match emit(&config.out, &out.text) {
            Ok(()) => out.code,
            Err(e) => {
                eprintln!("error: {}", e.message);
                e.code
            }
        },
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::new(exit::IO, format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(config: &RunConfig) -> Result<Output, CliError> {
    let report_format = config.format.unwrap_or(Format::Json);
    match &config.command {
        Command::Qubit(a) => cmd_qubit(a, report_format),
        Command::Qutrit(a) => cmd_qutrit(a, report_format),
        Command::Twoqubit(a) => cmd_twoqubit(a, report_format),
        Command::Bounds(a) => cmd_bounds(a, report_format),
        Command::Scan(a) => cmd_scan(a, config.format.unwrap_or(Format::Csv)),
    }
}

/// Formats a number with 12 significant digits, dropping trailing zeros.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format has an exponent");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..12).contains(&exponent) {
        let decimals = (11 - exponent).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exponent}", trim_zeros(mantissa.to_owned()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

fn render_report<T: Serialize>(command: &str, report: &T, format: Format) -> String {
    let value = serde_json::to_value(report).expect("reports serialize");
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&value).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", &value, &mut rows);
            let mut s = format!("# {SCHEMA} {command}\nfield,value\n");
            for (k, v) in rows {
                let _ = writeln!(s, "{k},{v}");
            }
            s
        }
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_owned()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        Value::Number(n) => {
            let text = match (n.as_i64(), n.as_f64()) {
                (Some(i), _) => i.to_string(),
                (None, Some(f)) => fmt_num(f),
                _ => n.to_string(),
            };
            out.push((prefix.to_owned(), text));
        }
        Value::Bool(b) => out.push((prefix.to_owned(), b.to_string())),
        Value::String(s) => out.push((prefix.to_owned(), s.clone())),
        Value::Null => out.push((prefix.to_owned(), String::new())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            dim: m.dim(),
            re: m.real_parts().into_iter().map(|x| x + 0.0).collect(),
            im: m.imag_parts().into_iter().map(|x| x + 0.0).collect(),
        }
    }
}

fn read_matrix(path: &Path) -> Result<ComplexMatrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new(exit::IO, format!("cannot read {}: {e}", path.display())))?;
    let file: MatrixFile = serde_json::from_str(&text)
        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    ComplexMatrix::from_parts(file.dim, &file.re, &file.im).map_err(|e| CliError::parse(e.to_string()))
}

fn triple(values: &[f64], what: &str) -> Result<ProbabilityTriple, CliError> {
    let [p1, p2, p3] = values else {
        return Err(CliError::parse(format!("{what} needs three comma-separated values")));
    };
    ProbabilityTriple::new(*p1, *p2, *p3).map_err(|e| CliError::parse(format!("{what}: {e}")))
}

#[derive(Debug, Serialize)]
struct QubitReport {
    probabilities: ProbabilityTriple,
    density_matrix: MatrixFile,
    bloch_vector: [f64; 3],
    sides: [f64; 3],
    areas: [f64; 3],
    area_sum: f64,
    linear_entropy: f64,
    linear_entropy_triangles: f64,
    quantumness_residual: f64,
    physical: bool,
    not_positive: bool,
    class: Option<MaximaClass>,
}

fn cmd_qubit(args: &QubitArgs, format: Format) -> Result<Output, CliError> {
    let p = triple(&args.p, "--p")?;
    let rho = qubit::qubit_from_probabilities(&p).map_err(|e| CliError::parse(e.to_string()))?;
    if args.strict && !rho.physical {
        return Err(CliError::new(
            exit::POSITIVITY,
            format!("triple violates the Bloch-ball constraint by {:e}", p.quantumness_residual()),
        ));
    }
    let geometry = qubit::triangle_sides(&p);
    let report = QubitReport {
        probabilities: p,
        density_matrix: MatrixFile::from_matrix(&rho.matrix),
        bloch_vector: qubit::bloch_vector(&p),
        sides: geometry.sides,
        areas: geometry.areas,
        area_sum: qubit::area_sum(&p),
        linear_entropy: qubit::linear_entropy(&p),
        linear_entropy_triangles: qubit::linear_entropy_from_triangles(&p),
        quantumness_residual: p.quantumness_residual(),
        physical: rho.physical,
        not_positive: !rho.physical,
        class: rho
            .physical
            .then(|| qubit::classify_pure_maxima(&p, args.tol)),
    };
    Ok(Output::ok(render_report("qubit", &report, format)))
}

#[derive(Debug, Serialize)]
struct QutritReport {
    density_matrix: MatrixFile,
    components: ComponentQubits,
    /// Area sums of A, B, C, D.
    qubit_area_sums: [f64; 4],
    area_sum: f64,
    area_sum_abd: f64,
    linear_entropy: f64,
    linear_entropy_decomposed: f64,
    linear_entropy_matrix: f64,
    qubit_linear_entropy_sum: f64,
    min_eigenvalue: f64,
    psd: bool,
}

fn positivity_or_parse(e: NumericsError) -> CliError {
    match e {
        NumericsError::NotPsd(v) => CliError::new(
            exit::POSITIVITY,
            format!("matrix is not positive semidefinite (minimum eigenvalue {v:e})"),
        ),
        other => CliError::parse(other.to_string()),
    }
}

fn cmd_qutrit(args: &QutritArgs, format: Format) -> Result<Output, CliError> {
    let m = match (&args.matrix, &args.a, &args.b, &args.d) {
        (Some(path), ..) => {
            let m = read_matrix(path)?;
            if m.dim() != 3 {
                return Err(CliError::parse(format!("expected a 3x3 matrix, found dimension {}", m.dim())));
            }
            m
        }
        (None, Some(a), Some(b), Some(d)) => {
            let a = triple(a, "--a")?;
            let b = triple(b, "--b")?;
            let d = match d.as_slice() {
                [p1, p2] => ProbabilityTriple::new(*p1, *p2, 1.0 - b.p3),
                [p1, p2, p3] => {
                    let residual = p3 + b.p3 - 1.0;
                    if residual.abs() > qutrit::LINKAGE_TOL {
                        return Err(CliError::parse(QutritError::InconsistentTriples(residual).to_string()));
                    }
                    ProbabilityTriple::new(*p1, *p2, *p3)
                }
                _ => return Err(CliError::parse("--d needs two or three comma-separated values")),
            }
            .map_err(|e| CliError::parse(format!("--d: {e}")))?;
            let candidate = qutrit::qutrit_from_probabilities(&a, &b, &d).map_err(|e| match e {
                QutritError::BadDiagonal(_) => CliError::new(exit::POSITIVITY, e.to_string()),
                other => CliError::parse(other.to_string()),
            })?;
            candidate.matrix
        }
        _ => return Err(CliError::parse("give either --matrix or all of --a, --b, --d")),
    };
    let rho = QutritDensity::new(m).map_err(|e| match e {
        QutritError::NotDensity(n) => positivity_or_parse(n),
        other => CliError::parse(other.to_string()),
    })?;
    let c = qutrit::component_qubits(&rho);
    let entropy = |f: fn(&ComponentQubits) -> Result<f64, QutritError>| {
        f(&c).map_err(|e| CliError::parse(e.to_string()))
    };
    let report = QutritReport {
        density_matrix: MatrixFile::from_matrix(rho.matrix()),
        components: c,
        qubit_area_sums: [c.a, c.b, c.c, c.d].map(|t| qubit::area_sum(&t)),
        area_sum: qutrit::qutrit_area_sum(&c),
        area_sum_abd: qutrit::qutrit_area_sum_abd(&c),
        linear_entropy: entropy(qutrit::qutrit_linear_entropy)?,
        linear_entropy_decomposed: entropy(qutrit::qutrit_linear_entropy_decomposed)?,
        linear_entropy_matrix: 1.0 - rho.purity(),
        qubit_linear_entropy_sum: [c.a, c.b, c.d].iter().map(qubit::linear_entropy).sum(),
        min_eigenvalue: numerics::hermitian_eigen(rho.matrix())
            .map_err(|e| CliError::parse(e.to_string()))?
            .min_value(),
        psd: true,
    };
    Ok(Output::ok(render_report("qutrit", &report, format)))
}

#[derive(Debug, Serialize)]
struct TwoQubitReport {
    family: Family,
    physical: bool,
    probabilities: Option<ProbabilityTriple>,
    components: Option<ComponentQubits>,
    density_matrix: Option<MatrixFile>,
    entanglement: Option<EntanglementReport>,
    concurrence_closed_form: ClosedForm,
    negativity_closed_form: Option<ClosedForm>,
    area_sum: f64,
    separable_area_max: f64,
    witness: WitnessVerdict,
}

fn cmd_twoqubit(args: &TwoQubitArgs, format: Format) -> Result<Output, CliError> {
    let family: Family = args
        .family
        .parse()
        .map_err(CliError::parse)?;
    let separable_max = two_qubit::separable_area_max(family).map_err(|e| CliError::parse(e.to_string()))?;
    let unphysical = |what: String| {
        CliError::new(exit::UNPHYSICAL, format!("{what}; pass --allow-unphysical for closed forms"))
    };

    let report = if family.is_qubit_block() {
        let values = args
            .p
            .as_ref()
            .ok_or_else(|| CliError::parse(format!("family {family} needs --p")))?;
        let p = triple(values, "--p")?;
        let physical = p.is_quantum();
        if !physical && !args.allow_unphysical {
            return Err(unphysical(format!(
                "triple violates the Bloch-ball constraint by {:e}",
                p.quantumness_residual()
            )));
        }
        let state = if physical {
            let s = match family {
                Family::CenterBlock => two_qubit::center_block_state(&p),
                _ => two_qubit::corner_block_state(&p),
            };
            Some(s.map_err(|e| CliError::parse(e.to_string()))?)
        } else {
            None
        };
        let area_sum = qubit::area_sum(&p);
        TwoQubitReport {
            family,
            physical,
            probabilities: Some(p),
            components: None,
            density_matrix: state.map(|s| MatrixFile::from_matrix(s.matrix())),
            entanglement: state.map(|s| two_qubit::entanglement_report(&s)),
            concurrence_closed_form: two_qubit::concurrence_closed_form(family, &FamilyInput::Qubit(p))
                .map_err(|e| CliError::parse(e.to_string()))?,
            negativity_closed_form: Some(
                two_qubit::negativity_closed_form(family, &p).map_err(|e| CliError::parse(e.to_string()))?,
            ),
            area_sum,
            separable_area_max: separable_max,
            witness: two_qubit::area_witness(family, area_sum).map_err(|e| CliError::parse(e.to_string()))?,
        }
    } else {
        let path = args
            .qutrit
            .as_ref()
            .ok_or_else(|| CliError::parse(format!("family {family} needs --qutrit")))?;
        let m = read_matrix(path)?;
        if m.dim() != 3 {
            return Err(CliError::parse(format!("expected a 3x3 matrix, found dimension {}", m.dim())));
        }
        let (rho, physical) = match QutritDensity::new(m) {
            Ok(r) => (Some(r), true),
            Err(QutritError::NotDensity(NumericsError::NotPsd(v))) => {
                if !args.allow_unphysical {
                    return Err(unphysical(format!("qutrit has negative eigenvalue {v:e}")));
                }
                (None, false)
            }
            Err(e) => return Err(CliError::parse(e.to_string())),
        };
        let c = qutrit::components_of_matrix(&m);
        let placement = Placement::from_family(family).expect("embed family has a placement");
        let state = rho.map(|r| two_qubit::qutrit_embed_state(&r, placement));
        let area_sum = qutrit::qutrit_area_sum(&c);
        TwoQubitReport {
            family,
            physical,
            probabilities: None,
            components: Some(c),
            density_matrix: state.map(|s| MatrixFile::from_matrix(s.matrix())),
            entanglement: state.map(|s| two_qubit::entanglement_report(&s)),
            concurrence_closed_form: two_qubit::concurrence_closed_form(family, &FamilyInput::Qutrit(c))
                .map_err(|e| CliError::parse(e.to_string()))?,
            negativity_closed_form: None,
            area_sum,
            separable_area_max: separable_max,
            witness: two_qubit::area_witness(family, area_sum).map_err(|e| CliError::parse(e.to_string()))?,
        }
    };
    Ok(Output::ok(render_report("twoqubit", &report, format)))
}

fn cmd_bounds(args: &BoundsArgs, format: Format) -> Result<Output, CliError> {
    let problem: SearchProblem = args.problem.parse().map_err(|e: bounds::SearchError| CliError::parse(e.to_string()))?;
    let sense = if args.minimize { Sense::Minimize } else { Sense::Maximize };
    let report: BoundReport = bounds::reproduce_bound_with(problem, sense, args.seed);
    Ok(bounds_output(&report, format))
}

fn bounds_output(report: &BoundReport, format: Format) -> Output {
    let text = render_report("bounds", report, format);
    if report.within_tolerance == Some(false) {
        eprintln!(
            "error: {} = {} misses {} ± {}",
            report.problem,
            report.extremum_value,
            report.target.unwrap_or(f64::NAN),
            report.tolerance.unwrap_or(f64::NAN)
        );
        return Output {
            text,
            code: exit::BOUND_REGRESSION,
        };
    }
    Output::ok(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanTarget {
    Fig4a,
    Fig4b,
    Fig2,
    Fig5,
    Fig6,
}

impl ScanTarget {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig4a" | "concurrence_fig4a" => Some(Self::Fig4a),
            "fig4b" | "logneg_fig4b" => Some(Self::Fig4b),
            "fig2" | "qubit_sphere_fig2" => Some(Self::Fig2),
            "fig5" | "pure_rep_fig5" => Some(Self::Fig5),
            "fig6" | "coherent_fig6" => Some(Self::Fig6),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fig4a => "fig4a",
            Self::Fig4b => "fig4b",
            Self::Fig2 => "fig2",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
        }
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            Self::Fig4a | Self::Fig4b => &["p1", "p2", "value", "physical"],
            Self::Fig2 => &["p1", "p2", "p3", "S", "class"],
            Self::Fig5 => &["pC1", "pC3", "S", "branch"],
            Self::Fig6 => &["jy", "jz", "S_A", "S_B", "S_D", "S_total"],
        }
    }
}

/// One scan cell: a number or a label.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(&'static str),
    Flag(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Text(s) => (*s).to_owned(),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::json!(x),
            Cell::Text(s) => Value::String((*s).to_owned()),
            Cell::Flag(b) => Value::Bool(*b),
        }
    }
}

fn axis(resolution: usize) -> Vec<f64> {
    (0..resolution)
        .map(|i| i as f64 / (resolution - 1) as f64)
        .collect()
}

/// Concurrence of the center-block family on the `(p1, p2)` square at `p3 = ½`.
fn scan_fig4a(resolution: usize) -> Vec<Vec<Cell>> {
    let grid = axis(resolution);
    let mut rows = Vec::with_capacity(resolution * resolution);
    for &p1 in &grid {
        for &p2 in &grid {
            let p = ProbabilityTriple { p1, p2, p3: 0.5 };
            let c = two_qubit::concurrence_closed_form(Family::CenterBlock, &FamilyInput::Qubit(p))
                .expect("center family accepts a qubit");
            rows.push(vec![Cell::Num(p1), Cell::Num(p2), Cell::Num(c.value), Cell::Flag(c.physical)]);
        }
    }
    rows
}

/// Logarithmic negativity of the first embedding of `I/3` with the `D`
/// coherence set by `(p1, p2)`, from the numerical partial transpose.
pub fn fig4b_point(p1: f64, p2: f64) -> (f64, f64, bool) {
    let d = ProbabilityTriple { p1, p2, p3: 0.5 };
    let mut m = ComplexMatrix::zeros(4);
    for j in 0..3 {
        m[(j, j)] = C64::new(1.0 / 3.0, 0.0);
    }
    m[(1, 2)] = d.coherence();
    m[(2, 1)] = d.coherence().conj();
    let pt = numerics::partial_transpose(&m, Subsystem::Second).expect("4x4 input");
    let spectrum = numerics::hermitian_eigen(&pt).expect("partial transpose is Hermitian");
    let negativity = spectrum.values.iter().filter(|&&v| v < 0.0).fold(0.0, |acc, v| acc - v);
    let physical = d.coherence_modulus() <= 1.0 / 3.0 + 1e-12;
    (negativity, (2.0 * negativity).ln_1p(), physical)
}

fn scan_fig4b(resolution: usize) -> Vec<Vec<Cell>> {
    let grid = axis(resolution);
    let mut rows = Vec::with_capacity(resolution * resolution);
    for &p1 in &grid {
        for &p2 in &grid {
            let (_, log_neg, physical) = fig4b_point(p1, p2);
            rows.push(vec![Cell::Num(p1), Cell::Num(p2), Cell::Num(log_neg), Cell::Flag(physical)]);
        }
    }
    rows
}

/// Pure states on a polar/azimuthal grid, then both halves of the great
/// circle, then the two global maxima.
fn scan_fig2(resolution: usize) -> Vec<Vec<Cell>> {
    let mut points = Vec::new();
    for i in 0..resolution {
        let theta = std::f64::consts::PI * i as f64 / (resolution - 1) as f64;
        for j in 0..resolution {
            let phi = std::f64::consts::TAU * j as f64 / resolution as f64;
            points.push(ProbabilityTriple {
                p1: 0.5 * (1.0 + theta.sin() * phi.cos()),
                p2: 0.5 * (1.0 + theta.sin() * phi.sin()),
                p3: 0.5 * (1.0 + theta.cos()),
            });
        }
    }
    let lo = (3.0 - 6f64.sqrt()) / 6.0;
    let hi = (3.0 + 6f64.sqrt()) / 6.0;
    for upper in [true, false] {
        for i in 0..resolution {
            let p1 = lo + (hi - lo) * i as f64 / (resolution - 1) as f64;
            points.extend(qubit::great_circle_point(p1, upper));
        }
    }
    points.extend(qubit::global_maxima());
    points
        .iter()
        .map(|p| {
            let class = qubit::classify_pure_maxima(p, qubit::DEFAULT_CLASSIFY_TOL);
            vec![
                Cell::Num(p.p1),
                Cell::Num(p.p2),
                Cell::Num(p.p3),
                Cell::Num(qubit::area_sum(p)),
                Cell::Text(class.as_str()),
            ]
        })
        .collect()
}

fn scan_fig5(resolution: usize) -> Vec<Vec<Cell>> {
    let grid = axis(resolution);
    let mut rows = Vec::new();
    for &p1 in &grid {
        for &p3 in &grid {
            for branch in [1.0, -1.0] {
                if let Some(s) = bounds::pure_rep_area(p1, p3, branch) {
                    rows.push(vec![Cell::Num(p1), Cell::Num(p3), Cell::Num(s), Cell::Num(branch)]);
                }
            }
        }
    }
    rows
}

fn scan_fig6(resolution: usize, sign: SignArg) -> Vec<Vec<Cell>> {
    let sign = match sign {
        SignArg::Plus => JxSign::Plus,
        SignArg::Minus => JxSign::Minus,
    };
    spin1::grid_scan(resolution, sign)
        .into_iter()
        .map(|r| {
            [r.jy, r.jz, r.s_a, r.s_b, r.s_d, r.s_total]
                .into_iter()
                .map(Cell::Num)
                .collect()
        })
        .collect()
}

/// Rows of a scan, in emission order.
pub fn scan_rows(target: ScanTarget, resolution: usize, sign: SignArg) -> Vec<Vec<Cell>> {
    match target {
        ScanTarget::Fig4a => scan_fig4a(resolution),
        ScanTarget::Fig4b => scan_fig4b(resolution),
        ScanTarget::Fig2 => scan_fig2(resolution),
        ScanTarget::Fig5 => scan_fig5(resolution),
        ScanTarget::Fig6 => scan_fig6(resolution, sign),
    }
}

fn cmd_scan(args: &ScanArgs, format: Format) -> Result<Output, CliError> {
    let target = ScanTarget::parse(&args.target)
        .ok_or_else(|| CliError::parse(format!("unknown scan target {:?}", args.target)))?;
    if args.resolution < 2 {
        return Err(CliError::parse("--resolution must be at least 2"));
    }
    let rows = scan_rows(target, args.resolution, args.sign);
    let columns = target.columns();
    let text = match format {
        Format::Csv => {
            let mut s = format!("# {SCHEMA} scan {}\n{}\n", target.name(), columns.join(","));
            for row in &rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let records: Vec<Value> = rows
                .iter()
                .map(|row| {
                    Value::Object(
                        columns
                            .iter()
                            .zip(row)
                            .map(|(k, c)| ((*k).to_owned(), c.json()))
                            .collect(),
                    )
                })
                .collect();
            let doc = serde_json::json!({
                "schema": SCHEMA,
                "command": format!("scan {}", target.name()),
                "rows": records,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
            s.push('\n');
            s
        }
    };
    Ok(Output::ok(text))
}
