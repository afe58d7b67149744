//! JSON reports. Every report carries `schema_version` and validates against
//! the schema files under `schema/`.

use std::collections::BTreeMap;

use hhw_core::analysis::{self, Check, ClassicalBounds, FractionalBounds};
use hhw_core::{AnyParams, ModelKind, NetworkState};
use serde::{Deserialize, Serialize};

use crate::config::SCHEMA_VERSION;
use crate::error::Result;

/// Sufficient synchronization threshold of either model: P* or P_*.
pub fn threshold(params: &AnyParams) -> Result<f64> {
    Ok(match params {
        AnyParams::Classical(p) => analysis::threshold_p_star(p)?,
        AnyParams::Memristive(m) => analysis::threshold_p_star_frac(m)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Constants {
    Classical(ClassicalBounds),
    Fractional(FractionalBounds),
}

impl Constants {
    pub fn compute(params: &AnyParams, y0: Option<&NetworkState>) -> Result<Self> {
        Ok(match params {
            AnyParams::Classical(p) => Constants::Classical(analysis::classical_bounds(p, y0)?),
            AnyParams::Memristive(m) => Constants::Fractional(analysis::fractional_bounds(m, y0)?),
        })
    }

    /// Absorbing radius², G or G_α.
    pub fn absorbing(&self) -> f64 {
        match self {
            Constants::Classical(b) => b.g,
            Constants::Fractional(b) => b.g_alpha,
        }
    }
}

/// Definitions of the reported constants, keyed like the constants
/// themselves, so a report can be read without the source.
pub fn formulas(kind: ModelKind) -> BTreeMap<&'static str, &'static str> {
    let classical: [(&str, &str); 7] = [
        (
            "Q",
            "g_K(1+H) + |a1 E_Na| + g_K |lambda| H |E_K| + 6 a1^2/a2 + 6 a2/E_Na^2 + (6/a2)(g_K lambda H)^2",
        ),
        ("P_star", "max(0, (Q - a0 - lambda^2 H^2/(2 tau_K)) / n)"),
        ("mu", "min(1/(2 tau_K), a0 + lambda^2 H^2/(2 tau_K) + n P - Q)"),
        (
            "G",
            "1 + n H^2 + n[(|E_Na| a0 + g_K sqrt(1+H^2)|E_K| + |J|)^2/a0^2 + (|E_Na a1| + g_K sqrt(1+H^2))^2/(a0 a2) + 2(a1 + E_Na a2)^4/((a2/2)^3 a0)]",
        ),
        (
            "M_R0",
            "sum_i [(|E_Na| a0 + g_K s_i |E_K| + |J|)^2/a0 + (|E_Na a1| + g_K s_i)^2/a2 + 2(a1 + E_Na a2)^4/(a2/2)^3], s_i = sqrt(R_i(0)^2 + H^2)",
        ),
        ("T_B", "max(1/a0, tau_K) log+(|y0|^2 / G)"),
        ("T_0", "2 tau_K log+(max_i |R_i(0)|)"),
    ];
    let fractional: [(&str, &str); 6] = [
        (
            "G_alpha",
            "1 + n H^2 + n[(|E_Na| d + g_K sqrt(1+H^2)|E_K| + |J|)^2 Gamma(alpha)/d^2 + (Gamma(alpha)/d)((|E_Na a1| + g_K sqrt(1+H^2))^2/a2 + 2(a1 + E_Na a2)^4/(a2/2)^3)], d = a0 - k/beta",
        ),
        (
            "M_star_R0",
            "sum_i [(|E_Na| d + g_K s_i |E_K| + |J|)^2/d + (|E_Na a1| + g_K s_i)^2/a2 + 2(a1 + E_Na a2)^4/(a2/2)^3], d = a0 - k/beta",
        ),
        ("P_star_frac", "max(0, (Q + k/(2 beta) - a0 - lambda^2 H^2/(2 tau_K)) / n)"),
        ("delta", "min(1/(2 tau_K), a0 + lambda^2 H^2/(2 tau_K) + n P - Q - k/(2 beta))"),
        ("rho_bound", "1 + (G_alpha/b^2) max_i gamma_i^2 Gamma(alpha)"),
        ("T_0", "2 tau_K log+(max_i |R_i(0)|)"),
    ];
    match kind {
        ModelKind::Classical => classical.into_iter().collect(),
        ModelKind::Memristive => fractional.into_iter().collect(),
    }
}

/// Output of `hhw bounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub schema_version: u32,
    pub model: ModelKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub constants: Constants,
    pub formulas: BTreeMap<String, String>,
}

impl BoundsReport {
    pub fn new(params: &AnyParams, y0: Option<&NetworkState>, seed: Option<u64>) -> Result<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            model: params.kind(),
            n: params.n(),
            seed,
            constants: Constants::compute(params, y0)?,
            formulas: formulas(params.kind())
                .into_iter()
                .map(|(k, v)| (k.to_owned(), v.to_owned()))
                .collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable: no synchronization is asserted below threshold.
    Skipped,
}

impl Status {
    pub fn of(checks: &[Check]) -> Self {
        if checks.is_empty() {
            Status::Skipped
        } else if checks.iter().all(|c| c.passed) {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn ok(self) -> bool {
        self != Status::Fail
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub sync: Status,
    pub dissipativity: Status,
    pub overall: Status,
}

/// Result of one simulated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub model: ModelKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub initial: NetworkState,
    pub integrator: String,
    pub samples: usize,
    pub t_end: f64,
    /// Set when the integration stopped early; the outputs then cover the
    /// recorded prefix only.
    pub partial: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub constants: Constants,
    pub final_max_gap_sq: f64,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
}

/// Output of `hhw verify`: one run per seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub runs: Vec<RunReport>,
    pub overall: Status,
}
