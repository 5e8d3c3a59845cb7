//! The metrics table: a format line, a CSV header, then one row per
//! recorded epoch or evaluation. Missing metrics are empty cells.

use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::files::{atomic_write, check_format_line, read_to_string, FORMAT_LINE};

pub const CSV_HEADER: &str = "task,d,num_params,num_samples,epoch,train_metric,test_metric,wall_seconds";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub task: String,
    pub d: usize,
    pub num_params: usize,
    pub num_samples: usize,
    pub epoch: usize,
    pub train_metric: Option<f64>,
    pub test_metric: Option<f64>,
    pub wall_seconds: f64,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

impl MetricsRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:?}",
            self.task,
            self.d,
            self.num_params,
            self.num_samples,
            self.epoch,
            cell(self.train_metric),
            cell(self.test_metric),
            self.wall_seconds
        )
    }

    fn parse(path: &Path, line_no: usize, line: &str) -> CliResult<Self> {
        let bad = |msg: String| CliError::format(path, line_no, msg);
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 8 {
            return Err(bad(format!("expected 8 columns, found {}", cols.len())));
        }
        let int = |k: usize| cols[k].parse::<usize>().map_err(|_| bad(format!("column {} is not an integer", k + 1)));
        let opt = |k: usize| -> CliResult<Option<f64>> {
            if cols[k].is_empty() {
                Ok(None)
            } else {
                cols[k].parse().map(Some).map_err(|_| bad(format!("column {} is not a number", k + 1)))
            }
        };
        Ok(MetricsRow {
            task: cols[0].to_string(),
            d: int(1)?,
            num_params: int(2)?,
            num_samples: int(3)?,
            epoch: int(4)?,
            train_metric: opt(5)?,
            test_metric: opt(6)?,
            wall_seconds: cols[7].parse().map_err(|_| bad("wall_seconds is not a number".into()))?,
        })
    }
}

pub fn read_metrics(path: &Path) -> CliResult<Vec<MetricsRow>> {
    let text = read_to_string(path)?;
    let mut lines = text.lines();
    check_format_line(path, lines.next())?;
    if lines.next() != Some(CSV_HEADER) {
        return Err(CliError::format(path, 2, format!("expected `{CSV_HEADER}`")));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(k, l)| MetricsRow::parse(path, k + 3, l))
        .collect()
}

/// Appends rows, creating the file when it does not exist yet.
pub fn append_metrics(path: &Path, rows: &[MetricsRow]) -> CliResult<()> {
    let mut text = if path.exists() {
        read_metrics(path)?;
        read_to_string(path)?
    } else {
        format!("{FORMAT_LINE}\n{CSV_HEADER}\n")
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    for r in rows {
        text.push_str(&r.to_csv());
        text.push('\n');
    }
    atomic_write(path, text.as_bytes())
}
