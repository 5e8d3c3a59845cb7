//! Trained network files.
//!
//! A text header of `key value` lines closed by `end`, then the flat
//! parameter vector as little-endian `f64`s in layout order:
//!
//! ```text
//! lpgraph-format v1
//! kind checkpoint
//! task feas
//! layers 2
//! dim 64
//! output scalar
//! seed 0
//! epochs 35
//! num_params 137729
//! mlp f_in_v 4,64,64
//! ...
//! end
//! <num_params × 8 bytes>
//! ```

use std::path::Path;

use lpgraph::gnn::{mlp_shapes, num_params, GnnConfig, GnnParams, OutputMode, Task};

use crate::error::{CliError, CliResult};
use crate::files::{atomic_write, FORMAT_LINE};

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub task: Task,
    pub seed: u64,
    /// Epochs actually trained.
    pub epochs: usize,
    pub params: GnnParams,
}

fn output_name(o: OutputMode) -> &'static str {
    match o {
        OutputMode::Scalar => "scalar",
        OutputMode::Vertex => "vertex",
    }
}

pub fn render_checkpoint(ck: &Checkpoint) -> Vec<u8> {
    let cfg = ck.params.config();
    let mut head = format!(
        "{FORMAT_LINE}\nkind checkpoint\ntask {}\nlayers {}\ndim {}\noutput {}\nseed {}\nepochs {}\nnum_params {}\n",
        ck.task.name(),
        cfg.layers,
        cfg.dim,
        output_name(cfg.output),
        ck.seed,
        ck.epochs,
        ck.params.len()
    );
    for (name, widths) in mlp_shapes(cfg) {
        let w: Vec<String> = widths.iter().map(usize::to_string).collect();
        head.push_str(&format!("mlp {name} {}\n", w.join(",")));
    }
    head.push_str("end\n");
    let mut bytes = head.into_bytes();
    for v in ck.params.as_slice() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes
}

pub fn save_checkpoint(path: &Path, ck: &Checkpoint) -> CliResult<()> {
    atomic_write(path, &render_checkpoint(ck))
}

pub fn parse_checkpoint(path: &Path, bytes: &[u8]) -> CliResult<Checkpoint> {
    let bad = |line: usize, msg: String| CliError::format(path, line, msg);
    let mut fields = std::collections::BTreeMap::new();
    let mut mlps = Vec::new();
    let mut at = 0;
    let mut line_no = 0;
    loop {
        let end = bytes[at..].iter().position(|&b| b == b'\n').ok_or_else(|| bad(line_no + 1, "header is not terminated by `end`".into()))?;
        let line = std::str::from_utf8(&bytes[at..at + end]).map_err(|_| bad(line_no + 1, "header is not UTF-8".into()))?;
        at += end + 1;
        line_no += 1;
        if line_no == 1 {
            if line != FORMAT_LINE {
                return Err(bad(1, format!("expected `{FORMAT_LINE}`")));
            }
            continue;
        }
        if line == "end" {
            break;
        }
        let (key, value) = line.split_once(' ').ok_or_else(|| bad(line_no, format!("malformed header line `{line}`")))?;
        if key == "mlp" {
            mlps.push(value.to_string());
        } else {
            fields.insert(key.to_string(), (line_no, value.to_string()));
        }
    }
    let get = |key: &str| fields.get(key).cloned().ok_or_else(|| bad(line_no, format!("missing `{key}`")));
    let num = |key: &str| -> CliResult<u64> {
        let (line, v) = get(key)?;
        v.parse().map_err(|_| bad(line, format!("`{key}` is not a number")))
    };
    if get("kind")?.1 != "checkpoint" {
        return Err(bad(2, "not a checkpoint".into()));
    }
    let (tl, task) = get("task")?;
    let task = Task::from_name(&task).ok_or_else(|| bad(tl, format!("unknown task `{task}`")))?;
    let (ol, output) = get("output")?;
    let output = match output.as_str() {
        "scalar" => OutputMode::Scalar,
        "vertex" => OutputMode::Vertex,
        other => return Err(bad(ol, format!("unknown output mode `{other}`"))),
    };
    let cfg = GnnConfig::new(num("layers")? as usize, num("dim")? as usize, output)?;
    let count = num("num_params")? as usize;
    if count != num_params(&cfg) {
        return Err(bad(line_no, format!("num_params {count} does not match the configuration ({})", num_params(&cfg))));
    }
    let expected: Vec<String> = mlp_shapes(&cfg)
        .into_iter()
        .map(|(n, w)| format!("{n} {}", w.iter().map(usize::to_string).collect::<Vec<_>>().join(",")))
        .collect();
    if mlps != expected {
        return Err(bad(line_no, "mlp shapes do not match the configuration".into()));
    }
    let body = &bytes[at..];
    if body.len() != 8 * count {
        return Err(bad(line_no, format!("expected {} parameter bytes, found {}", 8 * count, body.len())));
    }
    let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    Ok(Checkpoint { task, seed: num("seed")?, epochs: num("epochs")? as usize, params: GnnParams::from_vec(&cfg, data)? })
}

pub fn load_checkpoint(path: &Path) -> CliResult<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse_checkpoint(path, &bytes)
}
