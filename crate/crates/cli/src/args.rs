use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use intercorr::model::ParamOverrides;
use intercorr::{CaseTriplet, Mobility, NetworkParams};

use crate::presets::Preset;
use crate::spec::OutputFormat;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "intercorr",
    version,
    about = "Temporal correlation of interference in Poisson networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic auto-correlation curve
    Acf(AcfArgs),
    /// Interference coherence time for a correlation threshold
    Coherence(CoherenceArgs),
    /// Check the general ACF against every closed-form summary row
    Table1(Table1Args),
    /// Monte Carlo ensemble and its empirical auto-correlation
    Simulate(SimulateArgs),
    /// Check a parameter set for admissibility
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Node density λ
    #[arg(long)]
    pub density: Option<f64>,
    /// Path-loss exponent α
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Sending power κ
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Nakagami parameter
    #[arg(long)]
    pub m: Option<f64>,
    /// Channel block length in slots
    #[arg(long)]
    pub c: Option<u32>,
    /// Message length in slots
    #[arg(long)]
    pub d: Option<u32>,
    /// Per-slot message start probability
    #[arg(long)]
    pub p: Option<f64>,
    /// Average node speed per slot
    #[arg(long)]
    pub v: Option<f64>,
    #[arg(long, value_name = "static|linear|brownian")]
    pub mobility: Option<Mobility>,
    /// Per-axis variance of the Brownian step
    #[arg(long)]
    pub brownian_variance: Option<f64>,
    /// TOML file with any of the parameter keys; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl ParamArgs {
    pub fn overrides(&self) -> ParamOverrides {
        ParamOverrides {
            density: self.density,
            alpha: self.alpha,
            kappa: self.kappa,
            m: self.m,
            c: self.c,
            d: self.d,
            p: self.p,
            v: self.v,
            mobility: self.mobility,
            brownian_variance: self.brownian_variance,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.config.is_none() && self.overrides() == ParamOverrides::default()
    }

    /// Defaults, then the config file, then the flags.
    pub fn resolve(&self) -> Result<NetworkParams, CliError> {
        let mut params = NetworkParams::default();
        if let Some(path) = &self.config {
            params = NetworkParams::from_config_file(path, params)
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        Ok(self.overrides().apply(params))
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub output: OutputFormat,
    /// Write to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Lag list: `1..20` (inclusive), `1..=20`, `1,3,7` or a single lag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lags(pub Vec<u32>);

impl FromStr for Lags {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let lags: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let lo: u32 = a.trim().parse().map_err(|_| format!("bad lag `{a}`"))?;
            let hi: u32 = b.trim().parse().map_err(|_| format!("bad lag `{b}`"))?;
            (lo..=hi).collect()
        } else {
            s.split(',')
                .map(|x| x.trim().parse().map_err(|_| format!("bad lag `{x}`")))
                .collect::<Result<_, _>>()?
        };
        if lags.is_empty() || lags[0] == 0 || lags.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("lags `{s}` must be positive and increasing"));
        }
        Ok(Lags(lags))
    }
}

#[derive(Debug, Clone, Args)]
pub struct AcfArgs {
    /// Case triplet, e.g. 0,2,1
    #[arg(long, required_unless_present = "preset")]
    pub case: Option<CaseTriplet>,
    /// Lags to evaluate [default: 1..20]
    #[arg(long)]
    pub lags: Option<Lags>,
    /// Named parameter set; pins every parameter and the lags
    #[arg(long, value_enum, conflicts_with = "case")]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CoherenceArgs {
    #[arg(long, required_unless_present = "preset")]
    pub case: Option<CaseTriplet>,
    /// Correlation threshold θ
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// Largest lag searched when no closed form applies
    #[arg(long)]
    pub max_lag: Option<u32>,
    #[arg(long, value_enum, conflicts_with = "case")]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Table1Args {
    /// Restrict the Nakagami grid to one value [default: 0.5, 1, 2]
    #[arg(long)]
    pub m: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, required_unless_present = "preset")]
    pub case: Option<CaseTriplet>,
    /// Lags to estimate [default: 1..20, capped below the slot count]
    #[arg(long)]
    pub lags: Option<Lags>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub realizations: usize,
    #[arg(long, default_value_t = 32)]
    pub slots: usize,
    #[arg(long, value_enum, conflicts_with = "case")]
    pub preset: Option<Preset>,
    /// Also export the raw ensemble (`.bin` for binary, CSV otherwise)
    #[arg(long)]
    pub ensemble_out: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
