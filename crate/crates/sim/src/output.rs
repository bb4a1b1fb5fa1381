//! CSV and JSON emission of experiment results.
//!
//! CSV columns, in order: `sweep_value,regime,metric,value,std_error,trials,seed`.
//! JSON documents carry `schema_version`, the experiment id, the meaning of the sweep
//! variable and the rows as objects with the same field names as the CSV columns.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::experiments::{ExperimentResult, Row};

pub const CSV_HEADER: [&str; 7] = ["sweep_value", "regime", "metric", "value", "std_error", "trials", "seed"];
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => bail!("unknown format {other:?}; expected csv or json"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonDocument {
    pub schema_version: u32,
    pub experiment: String,
    pub sweep_variable: String,
    pub rows: Vec<Row>,
}

pub fn write_csv<W: Write>(result: &ExperimentResult, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for row in &result.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(result: &ExperimentResult, mut writer: W) -> Result<()> {
    let doc = JsonDocument {
        schema_version: SCHEMA_VERSION,
        experiment: result.experiment.clone(),
        sweep_variable: result.sweep_variable.clone(),
        rows: result.rows.clone(),
    };
    serde_json::to_writer_pretty(&mut writer, &doc)?;
    writeln!(writer)?;
    Ok(())
}

pub fn read_json(text: &str) -> Result<JsonDocument> {
    let doc: JsonDocument = serde_json::from_str(text).context("malformed result document")?;
    if doc.schema_version != SCHEMA_VERSION {
        bail!("unsupported schema version {}", doc.schema_version);
    }
    Ok(doc)
}

pub fn read_csv(text: &str) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        bail!("unexpected CSV header {header:?}");
    }
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

pub fn emit(result: &ExperimentResult, format: Format, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    match format {
        Format::Csv => write_csv(result, &mut w),
        Format::Json => write_json(result, &mut w),
    }
    .with_context(|| format!("writing {}", path.display()))?;
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentResult {
        ExperimentResult {
            experiment: "wf_vs_equal".into(),
            sweep_variable: "transmit power (dBm)".into(),
            rows: vec![
                Row { sweep_value: -20.0, regime: "PL-CSI".into(), metric: "ergodic_se".into(), value: 0.1 + 0.2, std_error: 1e-3, trials: 10, seed: 4 },
                Row { sweep_value: -19.0, regime: "QL-CSI[extra=2,greedy]".into(), metric: "ergodic_se".into(), value: 1.0 / 3.0, std_error: 0.0, trials: 10, seed: 4 },
            ],
        }
    }

    #[test]
    fn empty_result_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&ExperimentResult { rows: vec![], ..sample() }, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "sweep_value,regime,metric,value,std_error,trials,seed\n");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut buf = Vec::new();
        write_csv(&sample(), &mut buf).unwrap();
        let rows = read_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(rows, sample().rows);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut buf = Vec::new();
        write_json(&sample(), &mut buf).unwrap();
        let doc = read_json(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(doc.schema_version, SCHEMA_VERSION);
        assert_eq!(doc.rows, sample().rows);
    }

    #[test]
    fn unwritable_path_reports_context() {
        let err = emit(&sample(), Format::Csv, Path::new("/nonexistent-dir/out.csv")).unwrap_err();
        assert!(format!("{err:#}").contains("/nonexistent-dir/out.csv"));
    }
}
