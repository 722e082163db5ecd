//! CSV result tables.
//!
//! A table is a `#`-prefixed metadata block followed by the data section: a
//! fixed header row and one row per sweep record. Numbers are written with
//! 12 significant digits in `{:e}` notation, which is locale independent.
//! Infeasible rows leave every solution cell empty.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use slipt::scenario::{RecordOutcome, SweepAxis, SweepRecord};

pub const COLUMNS: [&str; 12] = [
    "policy",
    "axis_name",
    "axis_value",
    "feasible",
    "energy_j",
    "T",
    "A1_a",
    "B1_a",
    "fov1_deg",
    "fov2_deg",
    "rate_bpshz",
    "sinr_linear",
];

#[derive(Debug, Error)]
pub enum TableError {
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Run-level information written ahead of the data section.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub preset: String,
    pub version: String,
    pub config_sha256: String,
}

impl Metadata {
    fn entries(&self) -> [(&str, &str); 3] {
        [
            ("preset", &self.preset),
            ("version", &self.version),
            ("config_sha256", &self.config_sha256),
        ]
    }
}

/// `x` with 12 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.11e}")
}

fn format_axis_value(axis: SweepAxis, value: f64) -> String {
    match axis {
        SweepAxis::NeighborCount => format!("{}", value as u64),
        SweepAxis::RateThreshold => format_number(value),
    }
}

fn row(record: &SweepRecord) -> Vec<String> {
    let mut cells = vec![
        record.policy.clone(),
        record.axis.name().to_owned(),
        format_axis_value(record.axis, record.axis_value),
        record.feasible().to_string(),
    ];
    match &record.outcome {
        Some(o) => cells.extend(
            [
                o.harvested_energy,
                o.time_fraction,
                o.peak_amplitude,
                o.dc_bias,
                o.fov1_deg,
                o.fov2_deg,
                o.rate,
                o.sinr,
            ]
            .map(format_number),
        ),
        None => cells.extend(std::iter::repeat_n(String::new(), 8)),
    }
    cells
}

/// Header plus rows, without metadata.
pub fn data_section(records: &[SweepRecord]) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(COLUMNS).expect("in-memory write");
    for record in records {
        writer.write_record(row(record)).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("ASCII output")
}

pub fn write_table(records: &[SweepRecord], meta: &Metadata) -> String {
    let mut out = String::new();
    for (k, v) in meta.entries() {
        writeln!(out, "# {k}: {v}").unwrap();
    }
    out.push_str(&data_section(records));
    out
}

/// Everything after the metadata block.
pub fn strip_metadata(table: &str) -> &str {
    let mut rest = table;
    while rest.starts_with('#') {
        rest = rest.split_once('\n').map_or("", |(_, tail)| tail);
    }
    rest
}

fn parse_cell(row: usize, column: &str, cell: &str) -> Result<f64, TableError> {
    cell.parse().map_err(|_| TableError::Row {
        row,
        message: format!("column {column}: `{cell}` is not a number"),
    })
}

/// Parses a table back into records. Metadata lines are skipped.
pub fn parse_table(table: &str) -> Result<Vec<SweepRecord>, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(table.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().ne(COLUMNS) {
        return Err(TableError::Row {
            row: 0,
            message: format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()),
        });
    }
    let mut records = Vec::new();
    for (i, result) in reader.records().enumerate() {
        let row = i + 1;
        let r = result?;
        let axis = SweepAxis::from_name(&r[1]).ok_or_else(|| TableError::Row {
            row,
            message: format!("unknown axis `{}`", &r[1]),
        })?;
        let feasible = match &r[3] {
            "true" => true,
            "false" => false,
            other => {
                return Err(TableError::Row {
                    row,
                    message: format!("feasible must be true/false, got `{other}`"),
                })
            }
        };
        let outcome = if feasible {
            let v: Vec<f64> = (4..12)
                .map(|c| parse_cell(row, COLUMNS[c], &r[c]))
                .collect::<Result<_, _>>()?;
            Some(RecordOutcome {
                harvested_energy: v[0],
                time_fraction: v[1],
                peak_amplitude: v[2],
                dc_bias: v[3],
                fov1_deg: v[4],
                fov2_deg: v[5],
                rate: v[6],
                sinr: v[7],
            })
        } else {
            if (4..12).any(|c| !r[c].is_empty()) {
                return Err(TableError::Row {
                    row,
                    message: "infeasible row carries solution values".into(),
                });
            }
            None
        };
        records.push(SweepRecord {
            policy: r[0].to_owned(),
            axis,
            axis_value: parse_cell(row, "axis_value", &r[2])?,
            outcome,
        });
    }
    Ok(records)
}
