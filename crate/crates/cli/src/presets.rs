//! Named configurations. Each preset is a JSON config for one command and is
//! parsed through the same schema as a user file.

use serde_json::{json, Value};
use virasoro_flows::virasoro::group_coad;
use virasoro_flows::{CircleDiffeo, DualElement, PeriodicField};

use crate::config::{Command, DEFAULT_GRID};
use crate::CliError;

pub struct Preset {
    pub name: &'static str,
    pub command: Command,
    pub summary: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset { name: "kdv-cosine", command: Command::Simulate, summary: "KdV, u0 = cos x, a = 1, t in [0, 1]" },
    Preset { name: "ch-steepening", command: Command::Simulate, summary: "Camassa-Holm, v0 = 2 sin x, a = 0, coarse step; breaks before t = 1" },
    Preset { name: "hs-sine", command: Command::Simulate, summary: "Hunter-Saxton, v0 = sin x" },
    Preset { name: "ch-freezing", command: Command::Classify, summary: "(u, a) = (1/2, 1): hyperbolic" },
    Preset { name: "hs-freezing", command: Command::Classify, summary: "(u, a) = (0, 1): Jordan, winding 0" },
    Preset { name: "elliptic-example", command: Command::Classify, summary: "q = 1/2: elliptic, winding 1" },
    Preset { name: "jordan-example", command: Command::Classify, summary: "hs-freezing moved by x + 0.3 sin x" },
    Preset { name: "casimir-constant", command: Command::Casimir, summary: "(u, a) = (0.6, 1), lambda in {2, 5, 10, 20}" },
];

pub fn lookup(name: &str) -> Result<&'static Preset, CliError> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let known: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        CliError::Usage(format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })
}

/// The preset's config, checked against the command it is used with.
pub fn config(name: &str, command: Command) -> Result<Value, CliError> {
    let preset = lookup(name)?;
    if preset.command != command {
        return Err(CliError::Usage(format!(
            "preset `{name}` is for `{}`, not `{}`",
            preset.command.name(),
            command.name()
        )));
    }
    Ok(match name {
        "kdv-cosine" => json!({
            "equation": "kdv", "a": 1.0, "N": DEFAULT_GRID, "dt": 1e-3, "t_end": 1.0,
            "record_every": 10, "ic": {"type": "cosine"}
        }),
        // u = v − v_xx = 4 sin x
        "ch-steepening" => json!({
            "equation": "ch", "a": 0.0, "N": DEFAULT_GRID, "dt": 0.05, "t_end": 0.2,
            "record_every": 1, "ic": {"type": "sine", "amplitude": 4.0}
        }),
        // u = −v_xx = sin x
        "hs-sine" => json!({
            "equation": "hs", "a": 0.0, "N": DEFAULT_GRID, "dt": 1e-3, "t_end": 1.0,
            "record_every": 10, "ic": {"type": "sine"}
        }),
        "ch-freezing" => json!({"u": {"type": "constant", "value": 0.5}, "a": 1.0}),
        "hs-freezing" => json!({"u": {"type": "constant", "value": 0.0}, "a": 1.0}),
        "elliptic-example" => json!({"u": {"type": "constant", "value": -0.5}, "a": 1.0}),
        "jordan-example" => {
            let m = jordan_example(DEFAULT_GRID)?;
            json!({"u": {"type": "samples", "values": m.u.samples()}, "a": m.a})
        }
        "casimir-constant" => json!({"u": {"type": "constant", "value": 0.6}, "a": 1.0}),
        _ => unreachable!("every listed preset has a config"),
    })
}

/// The HS freezing point `(0, 1)` moved by the diffeomorphism `x + 0.3 sin x`.
pub fn jordan_example(n: usize) -> Result<DualElement, CliError> {
    let numeric = |e: virasoro_flows::Error| CliError::Numerical(e);
    let s = PeriodicField::from_fn(n, |x| 0.3 * x.sin()).map_err(numeric)?;
    let phi = CircleDiffeo::from_displacement(s).map_err(numeric)?;
    let m = DualElement::constant(n, 0.0, 1.0).map_err(numeric)?;
    group_coad(&phi, &m).map_err(numeric)
}
