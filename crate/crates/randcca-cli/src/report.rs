//! Machine-readable run reports.
//!
//! One JSON report per invocation, schema fixed at `format_version` 1. The
//! residual fields are exactly the model-invariant quantities: per-view
//! whitening `‖(XᵀĀᵀĀX + λXᵀX)/n − I‖_max` and the largest off-diagonal of
//! `XaᵀĀᵀB̄Xb/n` relative to the top correlation (absolute when the top
//! correlation is zero). Reports are byte-reproducible for a fixed argv and
//! seed, except for `wall_time_seconds`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

/// Resolved configuration echo. Optional fields are omitted from the JSON
/// when they do not apply to the subcommand.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ka: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kb: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hash_bits: Option<u32>,
    pub d_a: usize,
    pub d_b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_b: Option<f64>,
    pub split: f64,
    pub centered: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_in: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_out: Option<PathBuf>,
    pub rng: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub config: ConfigEcho,
    pub objective_train: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_test: Option<f64>,
    pub correlations: Vec<f64>,
    pub feasibility_residual_a: f64,
    pub feasibility_residual_b: f64,
    pub cross_offdiag_residual: f64,
    pub passes_used: u64,
    pub wall_time_seconds: f64,
    pub seed: u64,
    pub solver: String,
    pub format_version: u32,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn write(&self, out: Option<&Path>) -> anyhow::Result<()> {
        let json = self.to_json();
        match out {
            Some(path) => std::fs::write(path, json)
                .map_err(|e| anyhow::anyhow!("failed to write report {}: {e}", path.display()))?,
            None => print!("{json}"),
        }
        Ok(())
    }
}
