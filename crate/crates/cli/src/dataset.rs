//! Labelled LP datasets as line-delimited JSON.
//!
//! ```text
//! lpgraph-format v1
//! {"kind":"dataset", ...header...}
//! {"m":2,"n":2,"a":[[0,0,1.0],...],"b":[...],"circ":["<=","="],"c":[...],"l":[0.0,null],"u":[null,1.0],"labels":{...}}
//! ```
//!
//! Indices are 0-based, `null` bounds are infinite and floats use the
//! shortest decimal that parses back to the same double.

use std::path::Path;

use lpgraph::forge::{GenConfig, LabeledRecord};
use lpgraph::lp::{Comparison, LowerBound, LpInstance, UpperBound};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::files::{atomic_write, check_format_line, read_to_string, FORMAT_LINE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub kind: String,
    /// Number of records in the file.
    pub count: usize,
    #[serde(default)]
    pub generator: Option<GenConfig>,
    /// Whether `min_norm_solution` labels were computed.
    #[serde(default)]
    pub min_norm: bool,
    /// Whether non-optimal instances were skipped during generation.
    #[serde(default)]
    pub optimal_only: bool,
    /// Generated instances skipped because they were not optimal.
    #[serde(default)]
    pub discarded: usize,
    /// Generator streams whose solve failed, with the error text.
    #[serde(default)]
    pub failed: Vec<(u64, String)>,
}

impl DatasetHeader {
    pub fn new(count: usize) -> Self {
        Self { kind: "dataset".into(), count, generator: None, min_norm: false, optimal_only: false, discarded: 0, failed: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Labels {
    feasible: bool,
    bounded: bool,
    obj: Option<f64>,
    solution: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min_norm_solution: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RecordLine {
    m: usize,
    n: usize,
    a: Vec<(usize, usize, f64)>,
    b: Vec<f64>,
    circ: Vec<String>,
    c: Vec<f64>,
    l: Vec<Option<f64>>,
    u: Vec<Option<f64>>,
    labels: Labels,
}

fn to_line(r: &LabeledRecord) -> RecordLine {
    let lp = &r.lp;
    RecordLine {
        m: lp.m(),
        n: lp.n(),
        a: lp.entries().iter().map(|e| (e.row, e.col, e.value)).collect(),
        b: lp.b().to_vec(),
        circ: lp.circ().iter().map(|c| c.symbol().to_string()).collect(),
        c: lp.c().to_vec(),
        l: lp.l().iter().map(|b| b.finite()).collect(),
        u: lp.u().iter().map(|b| b.finite()).collect(),
        labels: Labels {
            feasible: r.feasible,
            bounded: r.bounded,
            obj: r.obj,
            solution: r.solution.clone(),
            min_norm_solution: r.min_norm_solution.clone(),
        },
    }
}

fn from_line(line: RecordLine) -> Result<LabeledRecord, String> {
    let circ = line
        .circ
        .iter()
        .map(|s| Comparison::from_symbol(s).ok_or_else(|| format!("unknown comparison `{s}`")))
        .collect::<Result<Vec<_>, _>>()?;
    let l = line.l.iter().map(|v| v.map_or(LowerBound::NegInf, LowerBound::Finite)).collect();
    let u = line.u.iter().map(|v| v.map_or(UpperBound::PosInf, UpperBound::Finite)).collect();
    let lp = LpInstance::new(line.m, line.n, line.a, line.b, circ, line.c, l, u).map_err(|e| e.to_string())?;
    Ok(LabeledRecord {
        lp,
        feasible: line.labels.feasible,
        bounded: line.labels.bounded,
        obj: line.labels.obj,
        solution: line.labels.solution,
        min_norm_solution: line.labels.min_norm_solution,
    })
}

pub fn serialize_record(r: &LabeledRecord) -> String {
    serde_json::to_string(&to_line(r)).expect("records contain only finite numbers")
}

pub fn parse_record(text: &str) -> Result<LabeledRecord, String> {
    from_line(serde_json::from_str(text).map_err(|e| e.to_string())?)
}

/// An unlabelled LP wrapped as a record by solving it.
pub fn record_for(lp: &LpInstance) -> CliResult<LabeledRecord> {
    let mut out = lpgraph::forge::label_dataset(std::slice::from_ref(lp), false);
    match out.failed.pop() {
        Some((_, e)) => Err(e.into()),
        None => Ok(out.records.remove(0)),
    }
}

pub fn render_dataset(header: &DatasetHeader, records: &[LabeledRecord]) -> String {
    let mut out = String::new();
    out.push_str(FORMAT_LINE);
    out.push('\n');
    out.push_str(&serde_json::to_string(header).expect("header serializes"));
    out.push('\n');
    for r in records {
        out.push_str(&serialize_record(r));
        out.push('\n');
    }
    out
}

pub fn write_dataset(path: &Path, header: &DatasetHeader, records: &[LabeledRecord]) -> CliResult<()> {
    atomic_write(path, render_dataset(header, records).as_bytes())
}

pub fn read_dataset(path: &Path) -> CliResult<(DatasetHeader, Vec<LabeledRecord>)> {
    let text = read_to_string(path)?;
    let mut lines = text.lines();
    check_format_line(path, lines.next())?;
    let header: DatasetHeader = serde_json::from_str(lines.next().ok_or_else(|| CliError::format(path, 2, "missing header"))?)
        .map_err(|e| CliError::format(path, 2, e.to_string()))?;
    if header.kind != "dataset" {
        return Err(CliError::format(path, 2, format!("expected a dataset, found `{}`", header.kind)));
    }
    let records = lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| parse_record(l).map_err(|msg| CliError::format(path, k + 3, msg)))
        .collect::<CliResult<Vec<_>>>()?;
    if records.len() != header.count {
        return Err(CliError::format(path, 2, format!("header announces {} records, file has {}", header.count, records.len())));
    }
    Ok((header, records))
}
