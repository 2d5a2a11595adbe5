//! Command implementations behind the `intercorr` binary.

pub mod args;
pub mod output;
pub mod presets;
pub mod spec;

use std::fs::File;
use std::io::BufWriter;

use intercorr::analytic::{table1_closed_form, AcfModel};
use intercorr::sim::{mean_interference, write_binary, write_csv};
use intercorr::{
    acf, coherence_time, empirical_acf, simulate, validate, AcfCurve, CaseTriplet, CoherenceQuery,
    CoherenceValue, SimConfig,
};
use serde_json::{json, Map, Value};
use thiserror::Error;

use args::{
    AcfArgs, Cli, CoherenceArgs, Command, ParamArgs, SimulateArgs, Table1Args, ValidateArgs,
};
use output::{emit, num, opt_num, Table};
use presets::{Preset, PresetPlan, Series};
use spec::{CommandKind, RunSpec};

pub use spec::OutputFormat;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or flag combinations.
    #[error("{0}")]
    Usage(String),
    /// Invalid parameters or a numerical failure.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

fn fail(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

/// Result of a command whose output was written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Output written, but the command should exit nonzero.
    Failed(String),
}

pub fn run(cli: Cli) -> Result<Status, CliError> {
    match cli.command {
        Command::Acf(a) => run_acf(a),
        Command::Coherence(a) => run_coherence(a),
        Command::Table1(a) => run_table1(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Validate(a) => run_validate(a),
    }
}

/// Series and lags for a curve command, from a preset or from the flags.
fn curve_series(
    preset: Option<Preset>,
    case: Option<CaseTriplet>,
    lags: Option<Vec<u32>>,
    params: &ParamArgs,
    default_lags: Vec<u32>,
) -> Result<(Vec<u32>, Vec<Series>), CliError> {
    match preset {
        Some(preset) => {
            if !params.is_empty() || lags.is_some() {
                return Err(CliError::Usage(
                    "--preset pins parameters and lags; drop the other flags".into(),
                ));
            }
            match preset.plan() {
                PresetPlan::Curves { lags, series } => Ok((lags, series)),
                PresetPlan::Coherence { .. } => Err(CliError::Usage(format!(
                    "preset {preset} is a coherence-time preset"
                ))),
            }
        }
        None => {
            let params = params.resolve()?;
            let case = case.ok_or_else(|| CliError::Usage("--case is required".into()))?;
            Ok((
                lags.unwrap_or(default_lags),
                vec![Series {
                    label: "main".into(),
                    params,
                    case,
                }],
            ))
        }
    }
}

fn spec_for(
    kind: CommandKind,
    series: &[Series],
    preset: Option<Preset>,
    output: OutputFormat,
) -> RunSpec {
    let mut spec = RunSpec::new(kind, series[0].params, output);
    spec.preset = preset;
    if preset.is_none() {
        spec.case = Some(series[0].case);
    }
    spec
}

fn run_acf(args: AcfArgs) -> Result<Status, CliError> {
    let (lags, series) = curve_series(
        args.preset,
        args.case,
        args.lags.map(|l| l.0),
        &args.params,
        (1..=20).collect(),
    )?;
    let mut spec = spec_for(CommandKind::Acf, &series, args.preset, args.output.output);
    spec.lags = Some(lags.clone());

    let mut curves = Vec::new();
    let mut rows = Vec::new();
    for s in &series {
        let curve = AcfModel::new(&s.params, s.case)
            .and_then(|m| m.curve(&lags))
            .map_err(|e| fail(format!("{}: {e}", s.label)))?;
        for (lag, value) in curve.iter() {
            rows.push(vec![
                s.label.clone(),
                s.case.to_string(),
                lag.to_string(),
                num(value),
            ]);
        }
        curves.push(json!({ "label": s.label, "curve": curve }));
    }
    let mut payload = Map::new();
    payload.insert("curves".into(), Value::Array(curves));
    emit(
        &spec,
        args.output.out.as_deref(),
        payload,
        Table {
            header: vec!["label", "case", "lag", "acf"],
            rows,
        },
    )?;
    Ok(Status::Success)
}

fn run_coherence(args: CoherenceArgs) -> Result<Status, CliError> {
    let (threshold, series) = match args.preset {
        Some(preset) => {
            if !args.params.is_empty() || args.max_lag.is_some() {
                return Err(CliError::Usage(
                    "--preset pins parameters; drop the other flags".into(),
                ));
            }
            match preset.plan() {
                PresetPlan::Coherence { threshold, series } => (threshold, series),
                PresetPlan::Curves { .. } => {
                    return Err(CliError::Usage(format!(
                        "preset {preset} is a curve preset"
                    )))
                }
            }
        }
        None => {
            let case = args
                .case
                .ok_or_else(|| CliError::Usage("--case is required".into()))?;
            let series = vec![Series {
                label: "main".into(),
                params: args.params.resolve()?,
                case,
            }];
            (args.theta, series)
        }
    };
    let mut spec = spec_for(
        CommandKind::Coherence,
        &series,
        args.preset,
        args.output.output,
    );
    spec.threshold = Some(threshold);
    spec.max_lag = args.max_lag;

    let mut results = Vec::new();
    let mut rows = Vec::new();
    let mut inconclusive = Vec::new();
    for s in &series {
        let mut query = CoherenceQuery::new(s.params, s.case, threshold);
        if let Some(max) = args.max_lag {
            query = query.with_max_lag(max);
        }
        let result = coherence_time(&query).map_err(|e| fail(format!("{}: {e}", s.label)))?;
        if let CoherenceValue::Inconclusive(_) = result.value {
            inconclusive.push(format!("{} p={}", s.label, s.params.start_prob));
        }
        let method = serde_json::to_value(result.method).map_err(fail)?;
        rows.push(vec![
            s.label.clone(),
            s.case.to_string(),
            s.params.message_len.to_string(),
            num(s.params.start_prob),
            num(s.params.effective_speed()),
            result.value.to_string(),
            method.as_str().unwrap_or_default().to_string(),
            opt_num(result.unrounded),
        ]);
        results.push(json!({
            "label": s.label,
            "params": s.params,
            "case": s.case,
            "result": result,
        }));
    }
    let mut payload = Map::new();
    payload.insert("results".into(), Value::Array(results));
    emit(
        &spec,
        args.output.out.as_deref(),
        payload,
        Table {
            header: vec![
                "label",
                "case",
                "d",
                "p",
                "v",
                "coherence_time",
                "method",
                "unrounded",
            ],
            rows,
        },
    )?;
    if inconclusive.is_empty() {
        Ok(Status::Success)
    } else {
        Ok(Status::Failed(format!(
            "coherence search inconclusive within the lag bound for {}; raise --max-lag",
            inconclusive.join(", ")
        )))
    }
}

/// Per-case outcome of the closed-form conformance check.
struct CaseReport {
    case: CaseTriplet,
    comparisons: usize,
    skipped: usize,
    max_abs_error: f64,
    mismatches: usize,
}

const CONFORMANCE_TOL: f64 = 1e-10;

fn conformance(case: CaseTriplet, ms: &[f64]) -> Result<CaseReport, CliError> {
    let mut report = CaseReport {
        case,
        comparisons: 0,
        skipped: 0,
        max_abs_error: 0.0,
        mismatches: 0,
    };
    for &m in ms {
        for c in [2u32, 7, 14] {
            for d in 1..=6u32 {
                for frac in [0.05, 0.25, 0.5, 0.8, 0.95] {
                    let params = intercorr::NetworkParams {
                        nakagami_m: m,
                        channel_block_len: c,
                        message_len: d,
                        start_prob: frac / d as f64,
                        ..Default::default()
                    };
                    for lag in 1..=3 * c.max(d) {
                        let Some(expected) = table1_closed_form(&params, case, lag) else {
                            report.skipped += 1;
                            continue;
                        };
                        let err = (acf(&params, case, lag).map_err(fail)? - expected).abs();
                        report.max_abs_error = report.max_abs_error.max(err);
                        report.comparisons += 1;
                        if err > CONFORMANCE_TOL {
                            report.mismatches += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

fn run_table1(args: Table1Args) -> Result<Status, CliError> {
    let ms: Vec<f64> = match args.m {
        Some(m) if m.is_finite() && m > 0.0 => vec![m],
        Some(m) => return Err(CliError::Usage(format!("--m {m} must be positive"))),
        None => vec![0.5, 1.0, 2.0],
    };
    let mut params = intercorr::NetworkParams::default();
    if let Some(m) = args.m {
        params.nakagami_m = m;
    }
    let spec = RunSpec::new(CommandKind::Table1, params, args.output.output);

    let reports: Vec<CaseReport> = CaseTriplet::all()
        .filter(|c| c.digits() != (0, 0, 0))
        .map(|c| conformance(c, &ms))
        .collect::<Result<_, _>>()?;
    let total: usize = reports.iter().map(|r| r.mismatches).sum();
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.case.to_string(),
                r.comparisons.to_string(),
                r.skipped.to_string(),
                num(r.max_abs_error),
                r.mismatches.to_string(),
            ]
        })
        .collect();
    let mut payload = Map::new();
    payload.insert("tolerance".into(), json!(CONFORMANCE_TOL));
    payload.insert("nakagami_grid".into(), json!(ms));
    payload.insert(
        "cases".into(),
        Value::Array(
            reports
                .iter()
                .map(|r| {
                    json!({
                        "case": r.case.to_string(),
                        "comparisons": r.comparisons,
                        "skipped": r.skipped,
                        "max_abs_error": r.max_abs_error,
                        "mismatches": r.mismatches,
                    })
                })
                .collect(),
        ),
    );
    payload.insert("total_mismatches".into(), json!(total));
    emit(
        &spec,
        args.output.out.as_deref(),
        payload,
        Table {
            header: vec![
                "case",
                "comparisons",
                "skipped",
                "max_abs_error",
                "mismatches",
            ],
            rows,
        },
    )?;
    Ok(if total == 0 {
        Status::Success
    } else {
        Status::Failed(format!("{total} closed-form mismatches"))
    })
}

/// Per-lag tolerance for comparing a simulated value with the analytic one.
pub fn sim_tolerance(std_error: f64) -> f64 {
    (3.0 * std_error).max(0.02)
}

fn run_simulate(args: SimulateArgs) -> Result<Status, CliError> {
    if args.slots < 2 {
        return Err(CliError::Usage("--slots must be at least 2".into()));
    }
    let default_lags = (1..=20.min(args.slots as u32 - 1)).collect();
    let (lags, series) = curve_series(
        args.preset,
        args.case,
        args.lags.map(|l| l.0),
        &args.params,
        default_lags,
    )?;
    if lags.last().is_some_and(|&l| l as usize >= args.slots) {
        return Err(CliError::Usage(format!(
            "largest lag {} needs more than --slots {}",
            lags.last().unwrap(),
            args.slots
        )));
    }
    if args.ensemble_out.is_some() && series.len() > 1 {
        return Err(CliError::Usage(
            "--ensemble-out needs a single series, not a preset".into(),
        ));
    }
    let config = SimConfig {
        n_realizations: args.realizations,
        n_slots: args.slots,
        seed: args.seed,
        ..SimConfig::default()
    };
    let mut spec = spec_for(
        CommandKind::Simulate,
        &series,
        args.preset,
        args.output.output,
    );
    spec.lags = Some(lags.clone());
    spec.seed = Some(args.seed);
    spec.realizations = Some(args.realizations);
    spec.slots = Some(args.slots);

    let mut curves = Vec::new();
    let mut rows = Vec::new();
    let mut outside = 0usize;
    for s in &series {
        let ensemble =
            simulate(&s.params, s.case, &config).map_err(|e| fail(format!("{}: {e}", s.label)))?;
        if let Some(path) = &args.ensemble_out {
            let file = File::create(path)
                .map_err(|e| fail(format!("cannot create {}: {e}", path.display())))?;
            let writer = BufWriter::new(file);
            if path.extension().is_some_and(|e| e == "bin") {
                write_binary(&ensemble, writer).map_err(fail)?;
            } else {
                write_csv(&ensemble, writer).map_err(fail)?;
            }
        }
        let empirical =
            empirical_acf(&ensemble, &lags).map_err(|e| fail(format!("{}: {e}", s.label)))?;
        // The analytic curve is undefined for some constant cases.
        let analytic: Option<AcfCurve> = AcfModel::new(&s.params, s.case)
            .and_then(|m| m.curve(&lags))
            .ok();
        let errors = empirical.std_errors.clone().unwrap_or_default();
        for (i, (lag, value)) in empirical.iter().enumerate() {
            let reference = analytic.as_ref().map(|a| a.values[i]);
            let within = reference.map(|r| (value - r).abs() <= sim_tolerance(errors[i]));
            if within == Some(false) {
                outside += 1;
            }
            rows.push(vec![
                s.label.clone(),
                s.case.to_string(),
                lag.to_string(),
                num(value),
                num(errors[i]),
                opt_num(reference),
                within.map(|w| w.to_string()).unwrap_or_default(),
            ]);
        }
        let mean = mean_interference(&ensemble);
        curves.push(json!({
            "label": s.label,
            "curve": empirical,
            "analytic": analytic.map(|a| a.values),
            "mean_interference": { "mean": mean.mean, "std_error": mean.std_error },
        }));
    }
    let mut payload = Map::new();
    payload.insert("curves".into(), Value::Array(curves));
    payload.insert("lags_outside_tolerance".into(), json!(outside));
    emit(
        &spec,
        args.output.out.as_deref(),
        payload,
        Table {
            header: vec![
                "label",
                "case",
                "lag",
                "acf",
                "std_error",
                "analytic",
                "within_tolerance",
            ],
            rows,
        },
    )?;
    Ok(Status::Success)
}

fn run_validate(args: ValidateArgs) -> Result<Status, CliError> {
    let params = args.params.resolve()?;
    let spec = RunSpec::new(CommandKind::Validate, params, args.output.output);
    let report = validate(&params);
    let messages: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
    let mut payload = Map::new();
    payload.insert("valid".into(), json!(report.is_valid()));
    payload.insert("violations".into(), json!(messages));
    let rows = if messages.is_empty() {
        vec![vec!["true".into(), String::new()]]
    } else {
        messages
            .iter()
            .map(|m| vec!["false".into(), m.clone()])
            .collect()
    };
    emit(
        &spec,
        args.output.out.as_deref(),
        payload,
        Table {
            header: vec!["valid", "violation"],
            rows,
        },
    )?;
    Ok(if report.is_valid() {
        Status::Success
    } else {
        Status::Failed(report.to_string())
    })
}
