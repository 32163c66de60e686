//! CSV and JSON rendering of result records.

use std::io::Write;

use crate::config::OutputFormat;
use crate::experiments::ResultRecord;

pub const CSV_HEADER: [&str; 6] = [
    "experiment",
    "parameters",
    "metric",
    "value",
    "uncertainty",
    "wall_time_s",
];

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn sci(x: f64) -> String {
    format!("{x:.17e}")
}

/// `key=value` pairs joined by `;`, in key order.
pub fn parameters_field(record: &ResultRecord) -> String {
    record
        .parameters
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn write_csv<W: Write>(records: &[ResultRecord], sink: W) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.experiment.clone(),
            parameters_field(r),
            r.metric.clone(),
            sci(r.value),
            r.uncertainty.map(sci).unwrap_or_default(),
            sci(r.wall_time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(records: &[ResultRecord], mut sink: W) -> Result<(), OutputError> {
    serde_json::to_writer_pretty(&mut sink, records)?;
    sink.write_all(b"\n")?;
    Ok(())
}

pub fn write_records<W: Write>(
    records: &[ResultRecord],
    format: OutputFormat,
    sink: W,
) -> Result<(), OutputError> {
    match format {
        OutputFormat::Csv => write_csv(records, sink),
        OutputFormat::Json => write_json(records, sink),
    }
}
