//! Experiment configuration: preset defaults, TOML files and `key=value`
//! overrides, merged and validated before any solve starts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::presets::{self, Preset};

/// Environment variable that overrides the output directory.
pub const OUTPUT_ENV: &str = "LAB_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: String,
    pub seed: u64,
    /// Random trials per check.
    pub trials: usize,
    /// Worker threads for sweeps; 0 picks the machine's parallelism.
    pub threads: usize,
    /// Weight exponents `α` for the weighted norms.
    pub alpha: Vec<f64>,
    pub mesh: MeshConfig,
    pub potential: PotentialConfig,
    pub flow: FlowConfig,
    pub time: TimeConfig,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// Cells of the unit interval.
    pub cells: usize,
    /// Cells per axis of the unit square.
    pub cells_2d: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// `C` in `V = Cδ^{−r}`.
    pub strength: f64,
    /// `r` in `V = Cδ^{−r}`.
    pub exponent: f64,
    /// Strengths swept by presets that compare several `C`.
    pub sweep: Vec<f64>,
    /// Truncation levels `j`.
    pub j_schedule: Vec<f64>,
    /// Truncation applied to a single solve; `inf` means none.
    pub truncation: f64,
    /// Exterior level `q` of the extended potential.
    pub exterior: f64,
    /// `r` of the exponential-decay regime.
    pub steep_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    /// Amplitude of the cellular stream function on the unit square.
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    pub steps: usize,
    /// Eigenpairs kept by spectral presets.
    pub m_max: usize,
    /// Times at which boundary decay is fitted.
    pub fit_times: Vec<f64>,
    /// Box cells added on each side of `Ω` for confinement runs.
    pub padding: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative error allowed on `λ₁`.
    pub eigenvalue: f64,
    /// Relative error allowed on the higher interval eigenvalues.
    pub higher_eigenvalue: f64,
    /// Excess over 1 allowed on the constant-one weighted estimate.
    pub estimate: f64,
    /// Final successive difference relative to `‖u‖∞`.
    pub cauchy: f64,
    /// Threshold on `max u` relative to `‖f‖∞`.
    pub max_principle: f64,
    /// Admissible negative margin of contraction-type inequalities.
    pub margin: f64,
    /// Relative error on heat-mode decay.
    pub heat: f64,
    /// Absolute error on fitted power exponents.
    pub exponent: f64,
    pub r_squared: f64,
    /// Relative error on the exponential decay rate.
    pub rate: f64,
    pub galerkin_mass: f64,
    pub cn_mass: f64,
    pub reversal: f64,
    /// Allowed shortfall of the confinement decay exponent below 2.
    pub confinement_exponent: f64,
    /// Relative spread allowed on Hardy quotients under refinement.
    pub hardy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preset: String::new(),
            seed: 7,
            trials: 20,
            threads: 0,
            alpha: vec![0.0, 0.5, 1.0],
            mesh: MeshConfig {
                cells: 1000,
                cells_2d: 48,
            },
            potential: PotentialConfig {
                strength: 2.0,
                exponent: 2.0,
                sweep: vec![2.0, 6.0],
                j_schedule: vec![1e2, 1e3, 1e4, 1e5],
                truncation: f64::INFINITY,
                exterior: 0.0,
                steep_exponent: 4.0,
            },
            flow: FlowConfig { amplitude: 3.0 },
            time: TimeConfig {
                t_final: 0.1,
                steps: 1000,
                m_max: 5,
                fit_times: Vec::new(),
                padding: 100,
            },
            tolerances: Tolerances {
                eigenvalue: 0.005,
                higher_eigenvalue: 0.01,
                estimate: 0.05,
                cauchy: 1e-6,
                max_principle: 1e-12,
                margin: 1e-8,
                heat: 0.02,
                exponent: 0.1,
                r_squared: 0.99,
                rate: 0.2,
                galerkin_mass: 1e-12,
                cn_mass: 1e-10,
                reversal: 1e-8,
                confinement_exponent: 0.15,
                hardy: 0.1,
            },
            output: OutputConfig { dir: PathBuf::from("out") },
        }
    }
}

impl ExperimentConfig {
    /// Defaults of a named preset.
    pub fn for_preset(name: &str) -> Result<Self, LabError> {
        let preset = presets::find(name)?;
        Ok(preset.defaults())
    }

    pub fn preset(&self) -> Result<&'static Preset, LabError> {
        presets::find(&self.preset)
    }

    /// Merges a TOML document and `key=value` overrides over preset defaults.
    ///
    /// The preset is taken from `preset_override`, else from the document.
    pub fn resolve(document: Option<&str>, preset_override: Option<&str>, overrides: &[String]) -> Result<Self, LabError> {
        let table: toml::Table = match document {
            Some(text) => text.parse().map_err(|e: toml::de::Error| LabError::Config(e.message().to_string()))?,
            None => toml::Table::new(),
        };
        let name = match (preset_override, table.get("preset")) {
            (Some(p), _) => p.to_string(),
            (None, Some(toml::Value::String(p))) => p.clone(),
            (None, Some(_)) => return Err(LabError::Config("`preset` must be a string".into())),
            (None, None) => return Err(LabError::Config("no preset given; use --preset or a `preset` key".into())),
        };
        let defaults = Self::for_preset(&name)?;
        let mut merged = toml::Value::try_from(&defaults).map_err(|e| LabError::Config(e.to_string()))?;
        merge(&mut merged, toml::Value::Table(table));
        for o in overrides {
            apply_override(&mut merged, o)?;
        }
        if let toml::Value::Table(t) = &mut merged {
            t.insert("preset".into(), toml::Value::String(name));
        }
        let mut config: ExperimentConfig = merged.try_into().map_err(|e: toml::de::Error| LabError::Config(e.message().to_string()))?;
        if let Some(dir) = std::env::var_os(OUTPUT_ENV) {
            config.output.dir = PathBuf::from(dir);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path, preset_override: Option<&str>, overrides: &[String]) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::resolve(Some(&text), preset_override, overrides)
    }

    /// Checks every parameter a preset may touch.
    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |msg: String| Err(LabError::Config(msg));
        self.preset()?;
        if self.trials == 0 {
            return bad("trials must be ≥ 1".into());
        }
        if self.alpha.is_empty() || self.alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return bad(format!("alpha entries must lie in [0, 1], got {:?}", self.alpha));
        }
        if self.mesh.cells < 8 || self.mesh.cells_2d < 8 {
            return bad("meshes need at least 8 cells per axis".into());
        }
        let p = &self.potential;
        if !(p.strength >= 0.0 && p.strength.is_finite()) {
            return bad(format!("potential.strength must be finite and ≥ 0, got {}", p.strength));
        }
        if !(p.exponent >= 0.0 && p.exponent.is_finite()) {
            return bad(format!("potential.exponent must be finite and ≥ 0, got {}", p.exponent));
        }
        if p.sweep.is_empty() || p.sweep.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return bad("potential.sweep needs finite strengths ≥ 0".into());
        }
        if p.j_schedule.is_empty()
            || p.j_schedule.iter().any(|j| !(*j > 0.0 && j.is_finite()))
            || p.j_schedule.windows(2).any(|w| w[1] <= w[0])
        {
            return bad(format!("potential.j_schedule must be positive and strictly increasing, got {:?}", p.j_schedule));
        }
        if !(p.truncation > 0.0) {
            return bad("potential.truncation must be > 0 (use inf for none)".into());
        }
        if !(p.exterior >= 0.0 && p.exterior.is_finite()) {
            return bad("potential.exterior must be finite and ≥ 0".into());
        }
        if !(p.steep_exponent > 2.0 && p.steep_exponent.is_finite()) {
            return bad("potential.steep_exponent must be finite and > 2".into());
        }
        if !self.flow.amplitude.is_finite() {
            return bad("flow.amplitude must be finite".into());
        }
        let t = &self.time;
        if !(t.t_final > 0.0 && t.t_final.is_finite()) || t.steps == 0 || t.m_max == 0 {
            return bad("time.t_final must be > 0, time.steps and time.m_max ≥ 1".into());
        }
        if t.fit_times.iter().any(|s| !(*s >= 0.0 && *s <= t.t_final)) {
            return bad("time.fit_times must lie in [0, t_final]".into());
        }
        let tol = &self.tolerances;
        let all = [
            tol.eigenvalue,
            tol.higher_eigenvalue,
            tol.estimate,
            tol.cauchy,
            tol.max_principle,
            tol.margin,
            tol.heat,
            tol.exponent,
            tol.r_squared,
            tol.rate,
            tol.galerkin_mass,
            tol.cn_mass,
            tol.reversal,
            tol.confinement_exponent,
            tol.hardy,
        ];
        if all.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return bad("tolerances must be finite and > 0".into());
        }
        if self.output.dir.as_os_str().is_empty() {
            return bad("output.dir must not be empty".into());
        }
        Ok(())
    }

    /// The resolved configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn apply_override(root: &mut toml::Value, assignment: &str) -> Result<(), LabError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| LabError::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(LabError::Config(format!("override `{assignment}` has an empty key")));
    }
    let value = parse_value(raw.trim());
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("split yields one part");
    let mut node = root;
    for part in parts {
        let toml::Value::Table(t) = node else {
            return Err(LabError::Config(format!("override `{key}` descends into a non-table")));
        };
        node = t.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    let toml::Value::Table(t) = node else {
        return Err(LabError::Config(format!("override `{key}` descends into a non-table")));
    };
    t.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
