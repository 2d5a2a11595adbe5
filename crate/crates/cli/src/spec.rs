use clap::ValueEnum;
use intercorr::{CaseTriplet, NetworkParams};
use serde::{Deserialize, Serialize};

use crate::presets::Preset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Acf,
    Coherence,
    Table1,
    Simulate,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Everything needed to rerun a command; written into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub command: CommandKind,
    pub params: NetworkParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<CaseTriplet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lags: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_lag: Option<u32>,
    pub output: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
}

impl RunSpec {
    pub fn new(command: CommandKind, params: NetworkParams, output: OutputFormat) -> Self {
        RunSpec {
            command,
            params,
            case: None,
            lags: None,
            threshold: None,
            max_lag: None,
            output,
            seed: None,
            realizations: None,
            slots: None,
            preset: None,
        }
    }

    /// Prefix of the provenance comment line in CSV output.
    pub const CSV_PREFIX: &'static str = "# run_spec=";

    /// Recovers the spec from the first line of a CSV output.
    pub fn from_csv_comment(line: &str) -> Option<Self> {
        serde_json::from_str(line.trim().strip_prefix(Self::CSV_PREFIX)?).ok()
    }
}
