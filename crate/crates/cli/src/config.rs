//! JSON run configuration.
//!
//! A config file is a single JSON object. The keys `command`, `output`,
//! `format` and `seed` are shared by every command; the remaining keys belong
//! to the command's own schema and unknown keys are rejected.

use std::io::Read;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use virasoro_flows::spectral::random_bandlimited;
use virasoro_flows::{Equation, InertiaParams, PeriodicField};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_GRID: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Classify,
    Casimir,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Classify => "classify",
            Command::Casimir => "casimir",
            Command::Verify => "verify",
        }
    }
}

/// Keys shared by every command.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Common {
    pub command: Option<Command>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T> {
    pub common: Common,
    pub body: T,
}

/// A periodic field on the N-point grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// `offset + amplitude·cos(mode·x)`.
    Cosine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one_mode")]
        mode: u32,
        #[serde(default)]
        offset: f64,
    },
    /// `offset + amplitude·sin(mode·x)`.
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one_mode")]
        mode: u32,
        #[serde(default)]
        offset: f64,
    },
    Constant {
        value: f64,
    },
    Samples {
        values: Vec<f64>,
    },
    /// Seeded random trigonometric polynomial; `seed` defaults to the run seed.
    RandomBandlimited {
        max_mode: usize,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        offset: f64,
        seed: Option<u64>,
    },
}

fn one() -> f64 {
    1.0
}

fn one_mode() -> u32 {
    1
}

fn default_grid() -> usize {
    DEFAULT_GRID
}

fn default_record_every() -> usize {
    1
}

impl FieldSpec {
    pub fn build(&self, n: usize, run_seed: u64) -> Result<PeriodicField, CliError> {
        let field = match *self {
            FieldSpec::Cosine { amplitude, mode, offset } => {
                PeriodicField::from_fn(n, |x| offset + amplitude * (f64::from(mode) * x).cos())
            }
            FieldSpec::Sine { amplitude, mode, offset } => {
                PeriodicField::from_fn(n, |x| offset + amplitude * (f64::from(mode) * x).sin())
            }
            FieldSpec::Constant { value } => PeriodicField::constant(n, value),
            FieldSpec::Samples { ref values } => {
                if values.len() != n {
                    return Err(CliError::Config(format!(
                        "samples: expected N = {n} values, got {}",
                        values.len()
                    )));
                }
                PeriodicField::new(values.clone())
            }
            FieldSpec::RandomBandlimited { max_mode, amplitude, offset, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(run_seed));
                random_bandlimited(&mut rng, n, max_mode, amplitude).map(|f| f.map(|x| x + offset))
            }
        };
        field.map_err(|e| CliError::Config(format!("field: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub equation: Equation,
    /// Required for `family`; must match the fixed values otherwise.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    #[serde(default)]
    pub a: f64,
    #[serde(rename = "N", alias = "n", default = "default_grid")]
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Initial momentum `u`.
    pub ic: FieldSpec,
}

impl SimulateConfig {
    pub fn params(&self) -> Result<InertiaParams, CliError> {
        let p = match self.equation {
            Equation::Family => match (self.alpha, self.beta) {
                (Some(alpha), Some(beta)) => InertiaParams::new(alpha, beta),
                _ => {
                    return Err(CliError::Config(
                        "equation \"family\" needs both alpha and beta".into(),
                    ))
                }
            },
            e => {
                let p = e.params(0.0, 0.0);
                let clash = |given: Option<f64>, fixed: f64| given.is_some_and(|g| g != fixed);
                if clash(self.alpha, p.alpha) || clash(self.beta, p.beta) {
                    return Err(CliError::Config(format!(
                        "equation {:?} fixes (alpha, beta) = ({}, {})",
                        e, p.alpha, p.beta
                    )));
                }
                p
            }
        };
        p.check_invertible(self.n)
            .map_err(|e| CliError::Config(format!("inertia: {e}")))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Density `u` of the dual element `(u, a)`; the Hill potential is `q = −u/a`.
    pub u: FieldSpec,
    pub a: f64,
    #[serde(rename = "N", alias = "n", default = "default_grid")]
    pub n: usize,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CasimirConfig {
    pub u: FieldSpec,
    pub a: f64,
    #[serde(rename = "N", alias = "n", default = "default_grid")]
    pub n: usize,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_terms")]
    pub terms: usize,
}

fn default_lambdas() -> Vec<f64> {
    vec![2.0, 5.0, 10.0, 20.0]
}

fn default_terms() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_suites")]
    pub suites: Vec<String>,
    /// Coefficients `(A, B)` of the cubic Hamiltonian in the bihamiltonian suite.
    #[serde(default = "quarter")]
    pub cubic_a: f64,
    #[serde(default = "quarter")]
    pub cubic_b: f64,
}

fn default_suites() -> Vec<String> {
    vec!["all".into()]
}

fn quarter() -> f64 {
    0.25
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { suites: default_suites(), cubic_a: 0.25, cubic_b: 0.25 }
    }
}

/// Reads JSON from a file, or from stdin when `path` is `-`.
pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Splits the shared keys off and parses the rest as the command's schema.
pub fn parse<T: DeserializeOwned>(value: Value, command: Command) -> Result<RunConfig<T>, CliError> {
    let Value::Object(map) = value else {
        return Err(CliError::Config("config must be a JSON object".into()));
    };
    let mut common = Map::new();
    let mut body = Map::new();
    for (k, v) in map {
        match k.as_str() {
            "command" | "output" | "format" | "seed" => common.insert(k, v),
            _ => body.insert(k, v),
        };
    }
    let common: Common = serde_json::from_value(Value::Object(common))
        .map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(c) = common.command {
        if c != command {
            return Err(CliError::Config(format!(
                "config is for `{}`, not `{}`",
                c.name(),
                command.name()
            )));
        }
    }
    let body = serde_json::from_value(Value::Object(body))
        .map_err(|e| CliError::Config(format!("{} config: {e}", command.name())))?;
    Ok(RunConfig { common, body })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn shared_keys_are_split_off() {
        let v = json!({
            "command": "simulate", "seed": 9, "format": "json",
            "equation": "kdv", "a": 1.0, "N": 64, "dt": 0.01, "t_end": 0.1,
            "ic": {"type": "cosine"}
        });
        let cfg: RunConfig<SimulateConfig> = parse(v, Command::Simulate).unwrap();
        assert_eq!(cfg.common.seed, Some(9));
        assert_eq!(cfg.common.format, Some(Format::Json));
        assert_eq!(cfg.body.n, 64);
        assert_eq!(cfg.body.record_every, 1);
        assert_eq!(cfg.body.ic, FieldSpec::Cosine { amplitude: 1.0, mode: 1, offset: 0.0 });
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let v = json!({"equation": "kdv", "dt": 0.01, "t_end": 1.0, "ic": {"type": "cosine"}, "viscosity": 1});
        assert!(matches!(parse::<SimulateConfig>(v, Command::Simulate), Err(CliError::Config(_))));
        let v = json!({"equation": "kdv", "dt": 0.01, "t_end": 1.0, "ic": {"type": "cosine", "phase": 1}});
        assert!(parse::<SimulateConfig>(v, Command::Simulate).is_err());
        let v = json!({"command": "classify", "u": {"type": "constant", "value": 0.0}, "a": 1.0});
        assert!(parse::<ClassifyConfig>(v.clone(), Command::Classify).is_ok());
        assert!(parse::<ClassifyConfig>(v, Command::Casimir).is_err());
    }

    #[test]
    fn family_needs_both_parameters() {
        let mut cfg = SimulateConfig {
            equation: Equation::Family,
            alpha: Some(2.0),
            beta: None,
            a: 0.0,
            n: 64,
            dt: 0.01,
            t_end: 0.1,
            record_every: 1,
            ic: FieldSpec::Constant { value: 0.0 },
        };
        assert!(cfg.params().is_err());
        cfg.beta = Some(0.5);
        assert_eq!(cfg.params().unwrap(), InertiaParams::new(2.0, 0.5));
        cfg.equation = Equation::Ch;
        assert!(cfg.params().is_err());
        cfg.alpha = Some(1.0);
        cfg.beta = Some(1.0);
        assert_eq!(cfg.params().unwrap(), InertiaParams::CH);
    }

    #[test]
    fn samples_must_fill_the_grid() {
        let spec = FieldSpec::Samples { values: vec![0.0; 10] };
        assert!(spec.build(16, 0).is_err());
        let spec = FieldSpec::RandomBandlimited { max_mode: 3, amplitude: 1.0, offset: 0.5, seed: None };
        let a = spec.build(32, 4).unwrap();
        let b = spec.build(32, 4).unwrap();
        assert_eq!(a, b);
        assert!((a.mean() - 0.5).abs() < 1e-12);
    }
}
