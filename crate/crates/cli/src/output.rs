use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};

use crate::spec::{OutputFormat, RunSpec};
use crate::CliError;

/// Tabular form of a result, used for CSV output.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            CliError::Failure(format!("cannot create {}: {e}", path.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes the result with the run spec embedded: as a `run_spec` field in
/// JSON, or as a leading comment line in CSV.
pub fn emit(
    spec: &RunSpec,
    out: Option<&Path>,
    payload: Map<String, Value>,
    table: Table,
) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Failure(format!("write failed: {e}"));
    let spec_json = serde_json::to_value(spec).map_err(|e| CliError::Failure(e.to_string()))?;
    let mut w = sink(out)?;
    match spec.output {
        OutputFormat::Json => {
            let mut doc = Map::new();
            doc.insert("run_spec".into(), spec_json);
            doc.extend(payload);
            serde_json::to_writer_pretty(&mut w, &Value::Object(doc))
                .map_err(|e| CliError::Failure(e.to_string()))?;
            writeln!(w).map_err(io_err)?;
        }
        OutputFormat::Csv => {
            writeln!(w, "{}{}", RunSpec::CSV_PREFIX, spec_json).map_err(io_err)?;
            let mut csv = csv::Writer::from_writer(&mut w);
            csv.write_record(&table.header)
                .map_err(|e| CliError::Failure(e.to_string()))?;
            for row in &table.rows {
                csv.write_record(row)
                    .map_err(|e| CliError::Failure(e.to_string()))?;
            }
            csv.flush().map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}
