//! Scenario and sweep configuration files.
//!
//! Both formats are JSON with a `schema_version` field; unknown fields are
//! rejected at every level so that a misspelled parameter name is an error
//! rather than a silently defaulted value.

use std::path::{Path, PathBuf};

use hhw_core::integrators::CorrectorMode;
use hhw_core::sampling::BallSampler;
use hhw_core::{AnyParams, IntegratorKind, IntegratorSpec, MemristiveParams, ModelKind, ModelParams, NetworkState};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Default run length and tolerances for classical scenarios.
pub const CLASSICAL_T_END: f64 = 200.0;
pub const CLASSICAL_TOL: f64 = 1e-9;
/// Default grid for memristive scenarios; memory cost grows with the square
/// of the step count.
pub const MEMRISTIVE_DT: f64 = 0.005;
pub const MEMRISTIVE_T_END: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    TrajectoryCsv,
    GapsCsv,
    ReportJson,
    PlotSvg,
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::TrajectoryCsv, OutputKind::GapsCsv, OutputKind::ReportJson]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Where the initial state comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    State(NetworkState),
    /// Uniform in the centered ball of `radius` in the full state space.
    Random {
        seed: u64,
        radius: f64,
    },
}

impl InitialSpec {
    pub fn seed(&self) -> Option<u64> {
        match self {
            InitialSpec::Random { seed, .. } => Some(*seed),
            InitialSpec::State(_) => None,
        }
    }

    /// Resolve to a concrete state; `seed` replaces the configured seed.
    pub fn resolve(&self, params: &AnyParams, seed: Option<u64>) -> NetworkState {
        match self {
            InitialSpec::State(s) => s.clone(),
            InitialSpec::Random { seed: s, radius } => {
                let memristive = params.kind() == ModelKind::Memristive;
                BallSampler::new(seed.unwrap_or(*s)).state(params.n(), memristive, *radius)
            }
        }
    }
}

/// On-disk form; `params` is decoded once `model` is known.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: u32,
    model: ModelKind,
    params: serde_json::Value,
    initial: InitialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    integrator: Option<IntegratorSpec>,
    #[serde(default = "default_outputs")]
    outputs: Vec<OutputKind>,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
}

/// A validated single-scenario configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario", into = "RawScenario")]
pub struct ScenarioConfig {
    pub params: AnyParams,
    pub initial: InitialSpec,
    pub integrator: IntegratorSpec,
    pub outputs: Vec<OutputKind>,
    pub output_dir: PathBuf,
}

impl TryFrom<RawScenario> for ScenarioConfig {
    type Error = String;

    fn try_from(raw: RawScenario) -> std::result::Result<Self, String> {
        if raw.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "schema_version: unsupported version {} (expected {SCHEMA_VERSION})",
                raw.schema_version
            ));
        }
        let params = match raw.model {
            ModelKind::Classical => AnyParams::Classical(
                serde_json::from_value::<ModelParams>(raw.params).map_err(|e| format!("params: {e}"))?,
            ),
            ModelKind::Memristive => AnyParams::Memristive(
                serde_json::from_value::<MemristiveParams>(raw.params).map_err(|e| format!("params: {e}"))?,
            ),
        };
        let integrator = raw.integrator.unwrap_or_else(|| default_integrator(raw.model));
        Ok(ScenarioConfig {
            params,
            initial: raw.initial,
            integrator,
            outputs: raw.outputs,
            output_dir: raw.output_dir,
        })
    }
}

impl From<ScenarioConfig> for RawScenario {
    fn from(c: ScenarioConfig) -> Self {
        let (model, params) = match &c.params {
            AnyParams::Classical(p) => (ModelKind::Classical, serde_json::to_value(p)),
            AnyParams::Memristive(m) => (ModelKind::Memristive, serde_json::to_value(m)),
        };
        RawScenario {
            schema_version: SCHEMA_VERSION,
            model,
            params: params.expect("parameter structs serialize"),
            initial: c.initial,
            integrator: Some(c.integrator),
            outputs: c.outputs,
            output_dir: c.output_dir,
        }
    }
}

pub fn default_integrator(model: ModelKind) -> IntegratorSpec {
    match model {
        ModelKind::Classical => IntegratorSpec::adaptive(CLASSICAL_TOL, CLASSICAL_TOL, CLASSICAL_T_END),
        ModelKind::Memristive => {
            IntegratorSpec::caputo(MEMRISTIVE_DT, MEMRISTIVE_T_END).with_corrector(CorrectorMode::Implicit)
        }
    }
}

impl ScenarioConfig {
    pub fn new(params: AnyParams, initial: InitialSpec) -> Self {
        let integrator = default_integrator(params.kind());
        Self {
            params,
            initial,
            integrator,
            outputs: default_outputs(),
            output_dir: default_output_dir(),
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }

    pub fn wants(&self, out: OutputKind) -> bool {
        self.outputs.contains(&out)
    }

    /// Checks everything that can be checked without integrating: parameter
    /// ranges, the a0 > k/β hypothesis, integrator/model agreement and the
    /// shape of the initial data.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if let AnyParams::Memristive(m) = &self.params {
            m.check_hypothesis()?;
        }
        self.integrator.validate()?;
        let caputo = self.integrator.kind == IntegratorKind::CaputoPc;
        match (self.kind(), caputo) {
            (ModelKind::Classical, true) => {
                return Err(HarnessError::Config(
                    "integrator.kind: caputo_pc requires the memristive model".into(),
                ))
            }
            (ModelKind::Memristive, false) => {
                return Err(HarnessError::Config(
                    "integrator.kind: the memristive model requires caputo_pc".into(),
                ))
            }
            _ => {}
        }
        match &self.initial {
            InitialSpec::State(s) => {
                s.check_dims(self.params.n())
                    .map_err(|e| HarnessError::Config(format!("initial.state: {e}")))?;
                let memristive = self.kind() == ModelKind::Memristive;
                if memristive != s.rho.is_some() {
                    let msg = if memristive {
                        "initial.state.rho: required by the memristive model"
                    } else {
                        "initial.state.rho: not allowed for the classical model"
                    };
                    return Err(HarnessError::Config(msg.into()));
                }
                if s.to_flat().iter().any(|x| !x.is_finite()) {
                    return Err(HarnessError::Config("initial.state: values must be finite".into()));
                }
            }
            InitialSpec::Random { radius, .. } => {
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(HarnessError::Config(format!(
                        "initial.random.radius: {radius} must be finite and non-negative"
                    )));
                }
            }
        }
        if self.outputs.is_empty() {
            return Err(HarnessError::Config("outputs: at least one output is required".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    P,
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "n")]
    N,
}

/// A grid of scenarios differing in one variable, each run `replicates`
/// times from independently sampled initial states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub base: ScenarioConfig,
    pub sweep_variable: SweepVariable,
    pub values: Vec<f64>,
    pub replicates: u32,
    pub seed: u64,
    /// For P sweeps: values are multiples of the sufficient threshold
    /// (P* or P_*) of the base parameters.
    #[serde(default)]
    pub relative_to_threshold: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(HarnessError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return err(format!(
                "schema_version: unsupported version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        self.base.validate()?;
        if self.values.is_empty() {
            return err("values: must not be empty".into());
        }
        if self.replicates < 1 {
            return err("replicates: must be at least 1".into());
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return err(format!("values: {v} is not finite"));
        }
        if self.relative_to_threshold && self.sweep_variable != SweepVariable::P {
            return err("relative_to_threshold: only meaningful for P sweeps".into());
        }
        match self.sweep_variable {
            SweepVariable::P => {}
            SweepVariable::Alpha => {
                if self.base.kind() != ModelKind::Memristive {
                    return err("sweep_variable: alpha requires the memristive model".into());
                }
            }
            SweepVariable::N => {
                if let Some(v) = self.values.iter().find(|v| v.fract() != 0.0 || **v < 2.0) {
                    return err(format!("values: n = {v} must be an integer of at least 2"));
                }
                if matches!(self.base.initial, InitialSpec::State(_)) {
                    return err("base.initial: an n sweep needs random initial states".into());
                }
                if let AnyParams::Memristive(m) = &self.base.params {
                    if m.gamma.windows(2).any(|w| w[0] != w[1]) {
                        return err("base.params.gamma: an n sweep needs a uniform gamma".into());
                    }
                }
            }
        }
        // every grid point must itself be a valid scenario
        for &v in &self.values {
            self.scenario_at(v)?.validate()?;
        }
        Ok(())
    }

    /// The scenario for one grid value, before seeding.
    pub fn scenario_at(&self, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = self.base.clone();
        match self.sweep_variable {
            SweepVariable::P => {
                let p = if self.relative_to_threshold {
                    value * crate::report::threshold(&cfg.params)?
                } else {
                    value
                };
                cfg.params.base_mut().p = p;
            }
            SweepVariable::Alpha => {
                if let AnyParams::Memristive(m) = &mut cfg.params {
                    m.alpha = value;
                }
            }
            SweepVariable::N => {
                let n = value as usize;
                cfg.params.base_mut().n = n;
                if let AnyParams::Memristive(m) = &mut cfg.params {
                    let g = m.gamma.first().copied().unwrap_or(0.0);
                    m.gamma = vec![g; n];
                }
            }
        }
        Ok(cfg)
    }

    /// Seed of replicate `r` at grid index `i`; depends only on the sweep
    /// seed and the position in the grid.
    pub fn run_seed(&self, i: usize, r: u32) -> u64 {
        let idx = (i as u64) * u64::from(self.replicates) + u64::from(r);
        splitmix64(self.seed ^ splitmix64(idx))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
