//! Named parameter sets for regenerating reference curves and tables.

use clap::ValueEnum;
use intercorr::{CaseTriplet, Mobility, NetworkParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// (2,0,1), linear and Brownian mobility, v = 0.1..0.5, p = 0.9
    Fig1,
    /// (0,2,1), m = 1/2, p = 0.9, c ∈ {2, 7, 12, 17, 22}
    Fig2,
    /// (0,0,2) coherence time over p, d ∈ {2, 4, 6, 8, 10}
    Fig5,
    /// (0,0,2) heat map, p = 0.05, d = 1..11
    Fig6,
    /// (0,2,2) heat map, c = 22, m = 2, p = 0.1, d = 1..10
    Fig7,
    /// (2,0,1) linear mobility coherence time, θ = 0.01
    Fig8,
    /// (2,2,2) heat map, c = 14, m = 1, p = 0.1, d = 1..10
    Heat222,
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let value = self.to_possible_value().expect("no skipped variants");
        f.write_str(value.get_name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub params: NetworkParams,
    pub case: CaseTriplet,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PresetPlan {
    Curves { lags: Vec<u32>, series: Vec<Series> },
    Coherence { threshold: f64, series: Vec<Series> },
}

fn case(s: &str) -> CaseTriplet {
    s.parse().expect("preset case")
}

fn with(m: f64, c: u32, d: u32, p: f64) -> NetworkParams {
    NetworkParams {
        nakagami_m: m,
        channel_block_len: c,
        message_len: d,
        start_prob: p,
        ..NetworkParams::default()
    }
}

fn heat(digits: &str, m: f64, c: u32, p: f64, ds: std::ops::RangeInclusive<u32>) -> PresetPlan {
    PresetPlan::Curves {
        lags: (1..=20).collect(),
        series: ds
            .map(|d| Series {
                label: format!("d={d}"),
                params: with(m, c, d, p),
                case: case(digits),
            })
            .collect(),
    }
}

impl Preset {
    pub fn plan(self) -> PresetPlan {
        match self {
            Preset::Fig1 => {
                let mut series = Vec::new();
                for mobility in [Mobility::Linear, Mobility::Brownian] {
                    for v in [0.1, 0.2, 0.3, 0.4, 0.5] {
                        series.push(Series {
                            label: format!("{mobility} v={v}"),
                            params: NetworkParams {
                                mobility,
                                avg_speed: v,
                                ..with(1.0, 1, 1, 0.9)
                            },
                            case: case("201"),
                        });
                    }
                }
                PresetPlan::Curves {
                    lags: (1..=30).collect(),
                    series,
                }
            }
            Preset::Fig2 => PresetPlan::Curves {
                lags: (1..=20).collect(),
                series: [2, 7, 12, 17, 22]
                    .into_iter()
                    .map(|c| Series {
                        label: format!("c={c}"),
                        params: with(0.5, c, 1, 0.9),
                        case: case("021"),
                    })
                    .collect(),
            },
            Preset::Fig5 => {
                let mut series = Vec::new();
                for d in [2u32, 4, 6, 8, 10] {
                    let limit = 1.0 / d as f64;
                    for k in 1.. {
                        let p = k as f64 * 0.005;
                        if p >= limit - 1e-12 {
                            break;
                        }
                        series.push(Series {
                            label: format!("d={d}"),
                            params: with(1.0, 1, d, p),
                            case: case("002"),
                        });
                    }
                }
                PresetPlan::Coherence {
                    threshold: 0.0,
                    series,
                }
            }
            Preset::Fig6 => heat("002", 1.0, 1, 0.05, 1..=11),
            Preset::Fig7 => heat("022", 2.0, 22, 0.1, 1..=10),
            Preset::Fig8 => {
                let mut series = Vec::new();
                for v in [0.1, 0.2, 0.3, 0.4, 0.5] {
                    for k in 1..=50 {
                        series.push(Series {
                            label: format!("v={v}"),
                            params: NetworkParams {
                                mobility: Mobility::Linear,
                                avg_speed: v,
                                ..with(1.0, 1, 1, k as f64 * 0.02)
                            },
                            case: case("201"),
                        });
                    }
                }
                PresetPlan::Coherence {
                    threshold: 0.01,
                    series,
                }
            }
            Preset::Heat222 => heat("222", 1.0, 14, 0.1, 1..=10),
        }
    }
}
