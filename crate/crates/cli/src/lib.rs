//! `virflow`: simulate Euler–Arnold flows on the Virasoro dual, classify Hill
//! operators, tabulate the Casimir expansion and run invariant suites.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 numerical abort or a
//! failing verify suite.

pub mod config;
pub mod output;
pub mod presets;
pub mod suites;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use virasoro_flows::euler_flow::{hs_reconstruct_v, simulate, Diagnostics, Drift, Trajectory};
use virasoro_flows::hill::{classify, expansion_check, monodromy, CLASSIFY_TOLERANCE};
use virasoro_flows::spectral::invert_inertia;
use virasoro_flows::virasoro::sqrt_casimir;
use virasoro_flows::{DualElement, FlowState, HillOperator, InertiaParams};

use config::{
    CasimirConfig, ClassifyConfig, Command, Format, RunConfig, SimulateConfig, VerifyConfig,
    DEFAULT_SEED,
};
use output::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("numerical: {0}")]
    Numerical(virasoro_flows::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

/// Name of the error variant, e.g. `NonZeroMean`.
fn variant(e: &virasoro_flows::Error) -> String {
    let d = format!("{e:?}");
    d.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

impl From<virasoro_flows::Error> for CliError {
    fn from(e: virasoro_flows::Error) -> Self {
        use virasoro_flows::Error as E;
        match e {
            E::InvalidGrid(_)
            | E::NonFiniteSamples
            | E::NonZeroMean { .. }
            | E::DegenerateOutsideImage { .. }
            | E::SingularInertia(_)
            | E::DegenerateInertia
            | E::GaugeViolation(_)
            | E::NotADiffeo(_)
            | E::NotPositive(_)
            | E::ZeroCocentral
            | E::UnsupportedIndex(_)
            | E::InvalidArgument(_) => CliError::Config(format!("{} ({})", e, variant(&e))),
            _ => CliError::Numerical(e),
        }
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Command-line options shared by every command. Flags override config keys.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub preset: Option<String>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub suites: Vec<String>,
}

/// Status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Verify finished but at least one suite failed.
    Failed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Failed => 2,
        }
    }
}

struct Resolved<T> {
    body: T,
    output: Option<PathBuf>,
    format: Option<Format>,
    seed: u64,
}

fn load<T: serde::de::DeserializeOwned>(command: Command, opts: &Options) -> Result<Resolved<T>, CliError> {
    let value = match (&opts.config, &opts.preset) {
        (Some(_), Some(_)) => return Err(CliError::Usage("--config and --preset are exclusive".into())),
        (Some(path), None) => config::read_json(path)?,
        (None, Some(name)) => presets::config(name, command)?,
        (None, None) if command == Command::Verify => json!({}),
        (None, None) => {
            return Err(CliError::Usage(format!("`{}` needs --config or --preset", command.name())))
        }
    };
    let RunConfig { common, body } = config::parse::<T>(value, command)?;
    Ok(Resolved {
        body,
        output: opts.output.clone().or(common.output),
        format: opts.format.or(common.format),
        seed: opts.seed.or(common.seed).unwrap_or(DEFAULT_SEED),
    })
}

pub fn run(command: Command, opts: &Options, out: &mut dyn Write) -> Result<Outcome, CliError> {
    match command {
        Command::Simulate => {
            let r = load::<SimulateConfig>(command, opts)?;
            let dir = r.output.unwrap_or_else(|| PathBuf::from("."));
            cmd_simulate(&r.body, &dir, r.format.unwrap_or(Format::Csv), r.seed, out)
        }
        Command::Classify => {
            let r = load::<ClassifyConfig>(command, opts)?;
            cmd_classify(&r.body, r.output.as_deref(), r.format.unwrap_or(Format::Json), r.seed, out)
        }
        Command::Casimir => {
            let r = load::<CasimirConfig>(command, opts)?;
            cmd_casimir(&r.body, r.output.as_deref(), r.format.unwrap_or(Format::Csv), r.seed, out)
        }
        Command::Verify => {
            let r = load::<VerifyConfig>(command, opts)?;
            let mut body = r.body;
            if !opts.suites.is_empty() {
                body.suites = opts.suites.clone();
            }
            cmd_verify(&body, r.output.as_deref(), r.format.unwrap_or(Format::Json), r.seed, out)
        }
    }
}

fn emit(
    out: &mut dyn Write,
    dir: Option<&Path>,
    stem: &str,
    format: Format,
    text: &str,
) -> Result<(), CliError> {
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
            let ext = match format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            let path = dir.join(format!("{stem}.{ext}"));
            std::fs::write(&path, text).map_err(|e| io(&path, e))?;
            writeln!(out, "{}", path.display()).map_err(|e| CliError::Io(e.to_string()))
        }
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct Grid {
    #[serde(rename = "N")]
    pub n: usize,
    pub domain: [f64; 2],
}

impl Grid {
    pub fn new(n: usize) -> Self {
        Self { n, domain: [0.0, 2.0 * std::f64::consts::PI] }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct DriftSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<Drift>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h1: Option<Drift>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h3: Option<Drift>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h5: Option<Drift>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dirichlet: Option<Drift>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub status: &'static str,
    pub equation: virasoro_flows::Equation,
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    pub records: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_abort: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub drift: DriftSummary,
}

type Pick = fn(&Diagnostics) -> Option<f64>;

const DIAGNOSTIC_COLUMNS: [(&str, Pick); 5] = [
    ("energy", |d| Some(d.energy)),
    ("h1", |d| d.h1),
    ("h3", |d| d.h3),
    ("h5", |d| d.h5),
    ("dirichlet", |d| d.dirichlet),
];

/// Columns `t`, `u0..u{N-1}`, then the diagnostics present in the run.
pub fn trajectory_table(tr: &Trajectory) -> Table {
    let first = &tr.records[0];
    let n = first.state.m.u.len();
    let present: Vec<_> = DIAGNOSTIC_COLUMNS
        .iter()
        .filter(|(_, pick)| pick(&first.diagnostics).is_some())
        .collect();
    let mut columns = vec!["t".to_string()];
    columns.extend((0..n).map(|j| format!("u{j}")));
    columns.extend(present.iter().map(|(name, _)| name.to_string()));
    let rows = tr
        .records
        .iter()
        .map(|r| {
            let mut row = vec![r.state.t];
            row.extend_from_slice(r.state.m.u.samples());
            row.extend(present.iter().map(|(_, pick)| pick(&r.diagnostics).unwrap_or(f64::NAN)));
            row
        })
        .collect();
    Table { grid: Some(Grid::new(n)), columns, rows }
}

pub fn cmd_simulate(
    cfg: &SimulateConfig,
    dir: &Path,
    format: Format,
    seed: u64,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let p = cfg.params()?;
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) || !(cfg.t_end > 0.0 && cfg.t_end.is_finite()) {
        return Err(CliError::Config(format!("need dt > 0 and t_end > 0, got {} and {}", cfg.dt, cfg.t_end)));
    }
    if cfg.record_every == 0 {
        return Err(CliError::Config("record_every must be at least 1".into()));
    }
    let u0 = cfg.ic.build(cfg.n, seed)?;
    // reject an initial condition outside the image of the inertia operator up front
    let check = if p == InertiaParams::HS || p.alpha == 0.0 {
        hs_reconstruct_v(&u0).map(drop)
    } else {
        invert_inertia(p, &u0).map(drop)
    };
    check.map_err(|e| CliError::Config(format!("initial condition rejected: {} ({})", e, variant(&e))))?;

    let initial = FlowState::new(DualElement::new(u0, cfg.a), 0.0);
    let mut report = SimulationReport {
        status: "ok",
        equation: cfg.equation,
        alpha: p.alpha,
        beta: p.beta,
        a: cfg.a,
        grid: Grid::new(cfg.n),
        dt: cfg.dt,
        t_end: cfg.t_end,
        records: 0,
        t_abort: None,
        error: None,
        drift: DriftSummary::default(),
    };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let diag_path = dir.join("diagnostics.json");
    let tr = match simulate(p, &initial, cfg.t_end, cfg.dt, cfg.record_every) {
        Ok(tr) => tr,
        Err(e) => {
            let err = CliError::from(e.clone());
            if let virasoro_flows::Error::NonFinite { t } = e {
                report.status = "blow_up";
                report.t_abort = Some(t);
            } else {
                report.status = "error";
            }
            report.error = Some(e.to_string());
            std::fs::write(&diag_path, to_json(&report)).map_err(|e| io(&diag_path, e))?;
            return Err(err);
        }
    };
    report.dt = tr.dt;
    report.records = tr.records.len();
    report.drift = DriftSummary {
        energy: tr.drift(|d| Some(d.energy)),
        h1: tr.drift(|d| d.h1),
        h3: tr.drift(|d| d.h3),
        h5: tr.drift(|d| d.h5),
        dirichlet: tr.drift(|d| d.dirichlet),
    };
    let table = trajectory_table(&tr);
    let (name, text) = match format {
        Format::Csv => ("trajectory.csv", output::csv_string(&table)?),
        Format::Json => ("trajectory.json", to_json(&table)),
    };
    let traj_path = dir.join(name);
    std::fs::write(&traj_path, text).map_err(|e| io(&traj_path, e))?;
    std::fs::write(&diag_path, to_json(&report)).map_err(|e| io(&diag_path, e))?;
    writeln!(out, "{}\n{}", traj_path.display(), diag_path.display()).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(Outcome::Success)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub trace: f64,
    pub det: f64,
    pub winding: u32,
    pub kind: virasoro_flows::OrbitKind,
    pub confidence: virasoro_flows::Confidence,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jordan_sign: Option<i8>,
    pub monodromy: [[f64; 2]; 2],
}

pub fn cmd_classify(
    cfg: &ClassifyConfig,
    dir: Option<&Path>,
    format: Format,
    seed: u64,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let u = cfg.u.build(cfg.n, seed)?;
    if cfg.a == 0.0 {
        let hint = match sqrt_casimir(&DualElement::new(u, 0.0)) {
            Ok(c) => format!("; for this u, ∫√u dx = {c:?}"),
            Err(e) => format!("; it needs u > 0 ({e})"),
        };
        return Err(CliError::Config(format!(
            "a = 0 is not a Hill operator: on this stratum the orbit invariant is the square-root \
             Casimir ∫√u dx (library: virasoro::sqrt_casimir, suite: verify --suite classification){hint}"
        )));
    }
    let tol = cfg.tolerance.unwrap_or(CLASSIFY_TOLERANCE);
    let op = HillOperator::new(u, cfg.a)?;
    let m = monodromy(&op, 0.0)?;
    let c = classify(&op, tol)?;
    let report = ClassifyReport {
        trace: c.trace,
        det: m.det,
        winding: c.winding,
        kind: c.kind,
        confidence: c.confidence,
        jordan_sign: c.jordan_sign,
        monodromy: m.matrix,
    };
    let text = match format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let kind = format!("{:?}", report.kind);
            let conf = to_json(&report.confidence).trim().trim_matches('"').to_string();
            output::csv_records(
                &["trace", "det", "winding", "kind", "confidence"],
                &[vec![
                    output::num(report.trace),
                    output::num(report.det),
                    report.winding.to_string(),
                    kind,
                    conf,
                ]],
            )?
        }
    };
    emit(out, dir, "classify", format, &text)?;
    Ok(Outcome::Success)
}

pub fn cmd_casimir(
    cfg: &CasimirConfig,
    dir: Option<&Path>,
    format: Format,
    seed: u64,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    if cfg.a == 0.0 {
        return Err(CliError::Config("a = 0 has no Hill monodromy; use the square-root Casimir".into()));
    }
    let u = cfg.u.build(cfg.n, seed)?;
    let rows = expansion_check(&u, cfg.a, &cfg.lambdas, cfg.terms)?;
    let table = Table {
        grid: None,
        columns: ["lambda", "h_lambda", "partial_sum", "residual"].map(String::from).to_vec(),
        rows: rows.iter().map(|r| vec![r.lambda, r.h_lambda, r.partial_sum, r.residual]).collect(),
    };
    let text = match format {
        Format::Csv => output::csv_string(&table)?,
        Format::Json => to_json(&table),
    };
    emit(out, dir, "casimir", format, &text)?;
    Ok(Outcome::Success)
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub cubic_a: f64,
    pub cubic_b: f64,
    pub pass: bool,
    pub suites: Vec<suites::SuiteReport>,
}

pub fn verify_report(cfg: &VerifyConfig, seed: u64) -> Result<VerifyReport, CliError> {
    let indices = suites::resolve(&cfg.suites).map_err(CliError::Usage)?;
    if indices.is_empty() {
        return Err(CliError::Usage("no suites selected".into()));
    }
    let settings = suites::Settings { seed, cubic_a: cfg.cubic_a, cubic_b: cfg.cubic_b };
    let reports = suites::run_suites(&indices, settings);
    Ok(VerifyReport {
        seed,
        cubic_a: cfg.cubic_a,
        cubic_b: cfg.cubic_b,
        pass: reports.iter().all(|s| s.pass),
        suites: reports,
    })
}

pub fn cmd_verify(
    cfg: &VerifyConfig,
    dir: Option<&Path>,
    format: Format,
    seed: u64,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let report = verify_report(cfg, seed)?;
    let text = match format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .suites
                .iter()
                .flat_map(|s| {
                    s.checks.iter().map(move |c| {
                        vec![
                            s.suite.clone(),
                            c.check.clone(),
                            c.cases.to_string(),
                            output::num(c.max_residual),
                            output::num(c.tolerance),
                            c.pass.to_string(),
                        ]
                    })
                })
                .collect();
            output::csv_records(&["suite", "check", "cases", "max_residual", "tolerance", "pass"], &rows)?
        }
    };
    emit(out, dir, "verify", format, &text)?;
    Ok(if report.pass { Outcome::Success } else { Outcome::Failed })
}
