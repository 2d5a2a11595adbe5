//! Domain types shared by every other module: network parameters, the
//! `(locations, channel, traffic)` case classification and correlation curves.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-axis variance of the per-slot Brownian step, `sqrt(2/pi)`.
pub const DEFAULT_BROWNIAN_VARIANCE: f64 = 0.797_884_560_802_865_4;

/// Tolerance used when checking `p * d <= 1`, so that `p = 1/d` typed as a
/// decimal is still admissible.
const INTENSITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mobility {
    Static,
    Linear,
    Brownian,
}

impl FromStr for Mobility {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "static" | "none" => Ok(Mobility::Static),
            "linear" => Ok(Mobility::Linear),
            "brownian" => Ok(Mobility::Brownian),
            other => Err(ParseError::Mobility(other.to_string())),
        }
    }
}

impl fmt::Display for Mobility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mobility::Static => "static",
            Mobility::Linear => "linear",
            Mobility::Brownian => "brownian",
        })
    }
}

/// Physical and protocol parameters of the network.
///
/// Serialized field names match the flat config-file keys
/// (`density, alpha, kappa, m, c, d, p, v, mobility`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Node intensity of the Poisson point process (nodes per unit area).
    #[serde(rename = "density")]
    pub density: f64,
    #[serde(rename = "alpha")]
    pub path_loss_exponent: f64,
    /// Sending power; scales the interference amplitude only.
    #[serde(rename = "kappa")]
    pub tx_power: f64,
    /// Nakagami fading parameter; `h^2 ~ Gamma(m, 1/m)`.
    #[serde(rename = "m")]
    pub nakagami_m: f64,
    /// Slots per fading block.
    #[serde(rename = "c")]
    pub channel_block_len: u32,
    /// Slots per message.
    #[serde(rename = "d")]
    pub message_len: u32,
    /// Fraction of all nodes starting a new message in each slot.
    #[serde(rename = "p")]
    pub start_prob: f64,
    /// Average node speed in distance units per slot.
    #[serde(rename = "v")]
    pub avg_speed: f64,
    pub mobility: Mobility,
    /// Per-axis variance of the Gaussian Brownian step before scaling by the
    /// speed; the step covariance is this value times the identity.
    #[serde(default = "default_brownian_variance")]
    pub brownian_variance: f64,
}

fn default_brownian_variance() -> f64 {
    DEFAULT_BROWNIAN_VARIANCE
}

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams {
            density: 1.0,
            path_loss_exponent: 4.0,
            tx_power: 1.0,
            nakagami_m: 1.0,
            channel_block_len: 1,
            message_len: 1,
            start_prob: 0.1,
            avg_speed: 0.0,
            mobility: Mobility::Static,
            brownian_variance: DEFAULT_BROWNIAN_VARIANCE,
        }
    }
}

impl NetworkParams {
    /// Traffic intensity `mu = p * d`, the stationary fraction of sending nodes.
    pub fn traffic_intensity(&self) -> f64 {
        (self.start_prob * self.message_len as f64).min(1.0)
    }

    /// Probability that an idle node starts a message in a slot,
    /// `p / (1 - p (d - 1))`.
    pub fn idle_start_prob(&self) -> f64 {
        let d = self.message_len as f64;
        (self.start_prob / (1.0 - self.start_prob * (d - 1.0))).min(1.0)
    }

    /// Probability that an idle node stays idle, `q = 1 - p / (1 - p (d - 1))`,
    /// evaluated as `(1 - p d) / (1 - p (d - 1))` so that `q = 0` exactly at
    /// `p = 1/d`.
    pub fn idle_prob(&self) -> f64 {
        let d = self.message_len as f64;
        let p = self.start_prob;
        ((1.0 - p * d) / (1.0 - p * (d - 1.0))).clamp(0.0, 1.0)
    }

    /// Speed actually used by the mobility model; zero for static networks.
    pub fn effective_speed(&self) -> f64 {
        match self.mobility {
            Mobility::Static => 0.0,
            _ => self.avg_speed,
        }
    }

    pub fn is_static(&self) -> bool {
        self.effective_speed() == 0.0
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    /// Reads a flat key-value (TOML) config file. Missing keys keep the
    /// values of `base`.
    pub fn from_config_file(path: &Path, base: NetworkParams) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_config_str(&text, base)
    }

    pub fn from_config_str(text: &str, base: NetworkParams) -> Result<Self, ConfigError> {
        let overrides: ParamOverrides = toml::from_str(text)?;
        Ok(overrides.apply(base))
    }
}

/// Partial parameter set, as read from a config file or command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub density: Option<f64>,
    pub alpha: Option<f64>,
    pub kappa: Option<f64>,
    pub m: Option<f64>,
    pub c: Option<u32>,
    pub d: Option<u32>,
    pub p: Option<f64>,
    pub v: Option<f64>,
    pub mobility: Option<Mobility>,
    pub brownian_variance: Option<f64>,
}

impl ParamOverrides {
    pub fn apply(&self, mut base: NetworkParams) -> NetworkParams {
        macro_rules! set {
            ($field:ident => $target:ident) => {
                if let Some(v) = self.$field {
                    base.$target = v;
                }
            };
        }
        set!(density => density);
        set!(alpha => path_loss_exponent);
        set!(kappa => tx_power);
        set!(m => nakagami_m);
        set!(c => channel_block_len);
        set!(d => message_len);
        set!(p => start_prob);
        set!(v => avg_speed);
        set!(mobility => mobility);
        set!(brownian_variance => brownian_variance);
        base
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
}

/// A single violated parameter constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    DensityNotPositive,
    PathLossExponentTooSmall,
    TxPowerNotPositive,
    NakagamiNotPositive,
    ChannelBlockZero,
    MessageLenZero,
    StartProbNotPositive,
    IntensityAboveOne,
    SpeedNegative,
    BrownianVarianceNotPositive,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::DensityNotPositive => "density λ>0 required",
            Violation::PathLossExponentTooSmall => "α>2 required",
            Violation::TxPowerNotPositive => "sending power κ>0 required",
            Violation::NakagamiNotPositive => "Nakagami m>0 required",
            Violation::ChannelBlockZero => "channel block length c≥1 required",
            Violation::MessageLenZero => "message length d≥1 required",
            Violation::StartProbNotPositive => "start probability p>0 required",
            Violation::IntensityAboveOne => "traffic intensity μ=p·d≤1 required",
            Violation::SpeedNegative => "average speed v≥0 required",
            Violation::BrownianVarianceNotPositive => "Brownian step variance >0 required",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Converts the report into a `Result`, for callers that cannot proceed
    /// with inadmissible parameters.
    pub fn into_result(self) -> Result<(), InvalidParams> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(InvalidParams(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "invalid ({})", msgs.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("inadmissible parameters: {0}")]
pub struct InvalidParams(pub ValidationReport);

/// Lists every violated constraint; an empty report means admissible.
pub fn validate(params: &NetworkParams) -> ValidationReport {
    let mut violations = Vec::new();
    let positive = |x: f64| x.is_finite() && x > 0.0;

    if !positive(params.density) {
        violations.push(Violation::DensityNotPositive);
    }
    if !(params.path_loss_exponent.is_finite() && params.path_loss_exponent > 2.0) {
        violations.push(Violation::PathLossExponentTooSmall);
    }
    if !positive(params.tx_power) {
        violations.push(Violation::TxPowerNotPositive);
    }
    if !positive(params.nakagami_m) {
        violations.push(Violation::NakagamiNotPositive);
    }
    if params.channel_block_len == 0 {
        violations.push(Violation::ChannelBlockZero);
    }
    if params.message_len == 0 {
        violations.push(Violation::MessageLenZero);
    }
    if !positive(params.start_prob) {
        violations.push(Violation::StartProbNotPositive);
    } else if params.start_prob * params.message_len as f64 > 1.0 + INTENSITY_SLACK {
        violations.push(Violation::IntensityAboveOne);
    }
    if !(params.avg_speed.is_finite() && params.avg_speed >= 0.0) {
        violations.push(Violation::SpeedNegative);
    }
    if !positive(params.brownian_variance) {
        violations.push(Violation::BrownianVarianceNotPositive);
    }
    ValidationReport { violations }
}

/// Regime of one correlation source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Source {
    /// Constant, or not considered as a source (digit 0).
    Constant,
    /// Random but uncorrelated between slots (digit 1).
    Uncorrelated,
    /// Random and correlated between slots (digit 2).
    Correlated,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::Constant, Source::Uncorrelated, Source::Correlated];

    pub fn digit(self) -> u8 {
        match self {
            Source::Constant => 0,
            Source::Uncorrelated => 1,
            Source::Correlated => 2,
        }
    }
}

impl TryFrom<u8> for Source {
    type Error = ParseError;

    fn try_from(d: u8) -> Result<Self, Self::Error> {
        match d {
            0 => Ok(Source::Constant),
            1 => Ok(Source::Uncorrelated),
            2 => Ok(Source::Correlated),
            other => Err(ParseError::Digit(other.to_string())),
        }
    }
}

impl From<Source> for u8 {
    fn from(s: Source) -> u8 {
        s.digit()
    }
}

/// Classification `(i, j, k)` of the correlation sources: node locations,
/// wireless channel and traffic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CaseTriplet {
    pub locations: Source,
    pub channel: Source,
    pub traffic: Source,
}

impl CaseTriplet {
    pub fn new(locations: Source, channel: Source, traffic: Source) -> Self {
        CaseTriplet {
            locations,
            channel,
            traffic,
        }
    }

    /// Builds a case from its digits; panics on digits outside `0..=2`.
    pub fn from_digits(i: u8, j: u8, k: u8) -> Self {
        let s = |d: u8| Source::try_from(d).expect("case digit must be 0, 1 or 2");
        CaseTriplet::new(s(i), s(j), s(k))
    }

    pub fn digits(&self) -> (u8, u8, u8) {
        (
            self.locations.digit(),
            self.channel.digit(),
            self.traffic.digit(),
        )
    }

    /// All 27 cases in lexicographic order.
    pub fn all() -> impl Iterator<Item = CaseTriplet> {
        Source::ALL.into_iter().flat_map(|i| {
            Source::ALL.into_iter().flat_map(move |j| {
                Source::ALL
                    .into_iter()
                    .map(move |k| CaseTriplet::new(i, j, k))
            })
        })
    }
}

impl fmt::Display for CaseTriplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j, k) = self.digits();
        write!(f, "({i},{j},{k})")
    }
}

impl FromStr for CaseTriplet {
    type Err = ParseError;

    /// Accepts `0,2,1`, `(0,2,1)` and `021`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = if trimmed.contains(',') {
            trimmed.split(',').map(str::trim).collect()
        } else {
            trimmed
                .char_indices()
                .map(|(i, c)| &trimmed[i..i + c.len_utf8()])
                .collect()
        };
        if parts.len() != 3 {
            return Err(ParseError::Case(s.to_string()));
        }
        let mut digits = [Source::Constant; 3];
        for (slot, part) in digits.iter_mut().zip(&parts) {
            let d: u8 = part.parse().map_err(|_| ParseError::Case(s.to_string()))?;
            *slot = Source::try_from(d)?;
        }
        Ok(CaseTriplet::new(digits[0], digits[1], digits[2]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown mobility model `{0}` (expected static, linear or brownian)")]
    Mobility(String),
    #[error("case digit `{0}` outside 0..=2")]
    Digit(String),
    #[error("malformed case `{0}` (expected i,j,k)")]
    Case(String),
}

/// How the fading gain evolves over slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FadingMode {
    /// `h = 1` in every slot.
    Constant,
    /// Independent draw per slot (block length 1).
    Iid,
    /// Redrawn every `len` slots.
    Block { len: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TrafficMode {
    /// Every node sends in every slot.
    AlwaysOn,
    /// Independent Bernoulli(`p`) decision per slot.
    Bernoulli { p: f64 },
    /// Messages of `d` slots started with per-slot fraction `p`.
    Renewal { p: f64, d: u32 },
}

/// Moments and model degenerations implied by a case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    /// `E[h^4]`.
    pub fading_fourth_moment: f64,
    /// `E[gamma]`, also equal to `E[gamma^2]`.
    pub send_prob: f64,
    pub fading_mode: FadingMode,
    pub traffic_mode: TrafficMode,
}

pub fn effective_moments(params: &NetworkParams, case: CaseTriplet) -> MomentSet {
    let m = params.nakagami_m;
    let (fading_fourth_moment, fading_mode) = match case.channel {
        Source::Constant => (1.0, FadingMode::Constant),
        Source::Uncorrelated => ((m + 1.0) / m, FadingMode::Iid),
        Source::Correlated => (
            (m + 1.0) / m,
            FadingMode::Block {
                len: params.channel_block_len,
            },
        ),
    };
    let (send_prob, traffic_mode) = match case.traffic {
        Source::Constant => (1.0, TrafficMode::AlwaysOn),
        Source::Uncorrelated => (
            params.start_prob,
            TrafficMode::Bernoulli {
                p: params.start_prob,
            },
        ),
        Source::Correlated => (
            params.traffic_intensity(),
            TrafficMode::Renewal {
                p: params.start_prob,
                d: params.message_len,
            },
        ),
    };
    MomentSet {
        fading_fourth_moment,
        send_prob,
        fading_mode,
        traffic_mode,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveSource {
    Analytic,
    Simulated,
}

/// Interference auto-correlation as a function of the lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfCurve {
    pub lags: Vec<u32>,
    pub values: Vec<f64>,
    /// Per-lag standard errors; only present for simulated curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_errors: Option<Vec<f64>>,
    pub source: CurveSource,
    pub params: NetworkParams,
    pub case: CaseTriplet,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("lags and values differ in length ({lags} vs {values})")]
    LengthMismatch { lags: usize, values: usize },
    #[error("lags must be >= 1 and strictly increasing")]
    BadLags,
    #[error("correlation {0} outside [-1, 1]")]
    OutOfRange(f64),
}

impl AcfCurve {
    pub fn new(
        lags: Vec<u32>,
        values: Vec<f64>,
        source: CurveSource,
        params: NetworkParams,
        case: CaseTriplet,
    ) -> Result<Self, CurveError> {
        if lags.len() != values.len() {
            return Err(CurveError::LengthMismatch {
                lags: lags.len(),
                values: values.len(),
            });
        }
        if lags.first() == Some(&0) || lags.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CurveError::BadLags);
        }
        if let Some(&bad) = values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(CurveError::OutOfRange(bad));
        }
        Ok(AcfCurve {
            lags,
            values,
            std_errors: None,
            source,
            params,
            case,
        })
    }

    pub fn with_std_errors(mut self, std_errors: Vec<f64>) -> Self {
        debug_assert_eq!(std_errors.len(), self.lags.len());
        self.std_errors = Some(std_errors);
        self
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.lags.iter().copied().zip(self.values.iter().copied())
    }

    pub fn value_at(&self, lag: u32) -> Option<f64> {
        self.lags
            .binary_search(&lag)
            .ok()
            .map(|idx| self.values[idx])
    }
}
