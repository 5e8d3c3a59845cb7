use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lpgraph::fold::{check_twin_properties, TwinReport};
use lpgraph::forge::{gen_batch, gen_random_lp_stream, gen_twin_pair, label_dataset, GenConfig, LabeledRecord, TwinFamily, TwinVariant};
use lpgraph::gnn::{metric, num_params, predict, train, EpochRecord, GnnConfig, GnnParams, Sample, Task, TrainConfig, Value};
use lpgraph::graph::{encode, LpGraph};
use lpgraph::wl::{distinguishable, run_wl, PartitionPair};
use serde::Serialize;

use crate::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use crate::dataset::{read_dataset, record_for, write_dataset, DatasetHeader};
use crate::error::{CliError, CliResult};
use crate::files::{atomic_write, read_to_string, FORMAT_LINE};
use crate::metrics::{append_metrics, read_metrics, MetricsRow};
use crate::report::{render_svg, Series};

#[derive(Debug, Parser)]
#[command(name = "lpgraph", version, about = "LP graphs, the WL test and GNNs for linear programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate and label random LPs.
    Gen(GenArgs),
    /// Build a twin pair and certify that it shares feasibility, objective and solution.
    Twin(TwinArgs),
    /// Run color refinement on a stored LP, optionally against a second one.
    Wl(WlArgs),
    /// Train a GNN on a labelled dataset.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a labelled dataset.
    Eval(EvalArgs),
    /// Render metric-versus-size charts from a metrics file.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub count: usize,
    /// JSON generator configuration; the built-in recipe when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also store minimum-norm optimal solutions.
    #[arg(long)]
    pub min_norm: bool,
    /// Keep drawing instances until `count` optimal ones are found.
    #[arg(long)]
    pub optimal_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    CycleSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Infeasible,
    Unbounded,
    Bounded,
}

impl From<VariantArg> for TwinVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Infeasible => TwinVariant::Infeasible,
            VariantArg::Unbounded => TwinVariant::Unbounded,
            VariantArg::Bounded => TwinVariant::Bounded,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TwinArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::CycleSplit)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, value_enum)]
    pub variant: VariantArg,
    /// Where to write the JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write both LPs as a two-record dataset.
    #[arg(long)]
    pub emit: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct WlArgs {
    /// Dataset file holding the LP.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Dataset file holding a second LP to compare against.
    #[arg(long)]
    pub pair: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub pair_index: usize,
    /// Print the stable partition classes.
    #[arg(long)]
    pub dump_partitions: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Feas,
    Obj,
    Solu,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Feas => Task::Feas,
            TaskArg::Obj => Task::Obj,
            TaskArg::Solu => Task::Solu,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mini-batch size; full batch when omitted.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Stop once the training metric reaches this value.
    #[arg(long)]
    pub stop_at: Option<f64>,
    /// Use only the first N usable records.
    #[arg(long)]
    pub limit: Option<usize>,
    /// Train solution models on minimum-norm labels instead of simplex solutions.
    #[arg(long)]
    pub min_norm_labels: bool,
    /// Held-out dataset evaluated after the last epoch.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Record wall-clock seconds (otherwise 0, which keeps reruns byte-identical).
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long)]
    pub min_norm_labels: bool,
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub metrics: PathBuf,
    /// Directory receiving one `<task>.svg` per task.
    #[arg(long)]
    pub svg_out: PathBuf,
    /// Put a generation timestamp comment into each chart.
    #[arg(long)]
    pub stamp: bool,
}

fn seconds_since(start: Instant, stamp: bool) -> f64 {
    if stamp {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    }
}

fn read_config(path: &Path) -> CliResult<GenConfig> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| CliError::format(path, e.line(), e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSummary {
    pub written: usize,
    pub feasible: usize,
    pub discarded: usize,
    pub failed: usize,
}

/// Draws instances from consecutive generator streams, keeping optimal ones only.
fn gen_optimal(cfg: &GenConfig, count: usize, min_norm: bool, header: &mut DatasetHeader) -> CliResult<Vec<LabeledRecord>> {
    let mut kept = Vec::with_capacity(count);
    let chunk = count.max(64) as u64;
    let limit = 1000 * (count as u64 + 1);
    let mut next = 0u64;
    while kept.len() < count {
        if next >= limit {
            return Err(CliError::Usage(format!("found only {} optimal instances in {next} draws", kept.len())));
        }
        let lps = (next..next + chunk).map(|k| gen_random_lp_stream(cfg, k)).collect::<lpgraph::Result<Vec<_>>>()?;
        let out = label_dataset(&lps, min_norm);
        let mut failed = out.failed.into_iter().peekable();
        let mut records = out.records.into_iter();
        for k in 0..chunk {
            if kept.len() == count {
                break;
            }
            if failed.peek().is_some_and(|(pos, _)| *pos as u64 == k) {
                let (_, e) = failed.next().expect("peeked");
                header.failed.push((next + k, e.to_string()));
                continue;
            }
            let rec = records.next().expect("one record per successful solve");
            if rec.is_optimal() {
                kept.push(rec);
            } else {
                header.discarded += 1;
            }
        }
        next += chunk;
    }
    Ok(kept)
}

pub fn cmd_gen(args: &GenArgs) -> CliResult<GenSummary> {
    let mut cfg = match &args.config {
        Some(p) => read_config(p)?,
        None => GenConfig::default(),
    };
    cfg.seed = args.seed;
    cfg.validate()?;
    let mut header = DatasetHeader::new(0);
    header.generator = Some(cfg.clone());
    header.min_norm = args.min_norm;
    header.optimal_only = args.optimal_only;
    let records = if args.optimal_only {
        gen_optimal(&cfg, args.count, args.min_norm, &mut header)?
    } else {
        let out = label_dataset(&gen_batch(&cfg, args.count)?, args.min_norm);
        header.failed = out.failed.iter().map(|(k, e)| (*k as u64, e.to_string())).collect();
        out.records
    };
    header.count = records.len();
    write_dataset(&args.out, &header, &records)?;
    Ok(GenSummary {
        written: records.len(),
        feasible: records.iter().filter(|r| r.feasible).count(),
        discarded: header.discarded,
        failed: header.failed.len(),
    })
}

#[derive(Debug, Serialize)]
struct TwinFile<'a> {
    kind: &'static str,
    family: &'static str,
    k: usize,
    variant: TwinVariant,
    tol: f64,
    report: &'a TwinReport,
}

/// Writes the report (when asked) before failing on a mismatch, so the
/// evidence survives the nonzero exit.
pub fn cmd_twin(args: &TwinArgs) -> CliResult<TwinReport> {
    let variant: TwinVariant = args.variant.into();
    let FamilyArg::CycleSplit = args.family;
    let (a, b) = gen_twin_pair(TwinFamily::CycleSplit { k: args.k }, variant)?;
    let report = check_twin_properties(&a, &b, args.tol)?;
    if let Some(path) = &args.report {
        let file = TwinFile { kind: "twin_report", family: "cycle-split", k: args.k, variant, tol: args.tol, report: &report };
        let body = serde_json::to_string_pretty(&file).expect("report serializes");
        atomic_write(path, format!("{FORMAT_LINE}\n{body}\n").as_bytes())?;
    }
    if let Some(path) = &args.emit {
        let records = vec![record_for(&a)?, record_for(&b)?];
        write_dataset(path, &DatasetHeader::new(2), &records)?;
    }
    if !report.all_match() {
        return Err(CliError::TwinMismatch(format!(
            "wl_indistinguishable={} feas_match={} obj_match={} solu={:?}",
            report.wl_indistinguishable, report.feas_match, report.obj_match, report.solu_match_up_to_perm
        )));
    }
    Ok(report)
}

fn load_graph(path: &Path, index: usize) -> CliResult<LpGraph> {
    let (_, records) = read_dataset(path)?;
    let rec = records
        .get(index)
        .ok_or_else(|| CliError::Usage(format!("{}: no record {index} (file has {})", path.display(), records.len())))?;
    Ok(encode(&rec.lp))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WlOutput {
    pub steps: usize,
    pub stable: PartitionPair,
    /// Set when a second LP was given.
    pub indistinguishable: Option<bool>,
    pub text: String,
}

fn classes_text(classes: &[Vec<usize>]) -> String {
    let parts: Vec<String> = classes
        .iter()
        .map(|c| format!("{{{}}}", c.iter().map(usize::to_string).collect::<Vec<_>>().join(",")))
        .collect();
    parts.join(" ")
}

pub fn cmd_wl(args: &WlArgs) -> CliResult<WlOutput> {
    let g = load_graph(&args.input, args.index)?;
    let run = run_wl(&g);
    let stable = run.stable.clone();
    let mut text = format!(
        "steps {}\nconstraint classes {}\nvariable classes {}\n",
        run.steps(),
        stable.i_classes.len(),
        stable.j_classes.len()
    );
    if args.dump_partitions {
        text.push_str(&format!("constraints {}\nvariables {}\n", classes_text(&stable.i_classes), classes_text(&stable.j_classes)));
    }
    let indistinguishable = match &args.pair {
        Some(p) => {
            let h = load_graph(p, args.pair_index)?;
            let same = (g.m(), g.n()) == (h.m(), h.n()) && !distinguishable(&g, &h)?;
            text.push_str(if same { "indistinguishable\n" } else { "distinguishable\n" });
            Some(same)
        }
        None => None,
    };
    Ok(WlOutput { steps: run.steps(), stable, indistinguishable, text })
}

/// Samples for `task`; objective and solution tasks use optimal records only.
/// Returns the samples and the number of records skipped.
pub fn samples_for(records: &[LabeledRecord], task: Task, min_norm: bool, limit: Option<usize>) -> CliResult<(Vec<Sample>, usize)> {
    let mut skipped = 0;
    let mut out = Vec::new();
    for r in records {
        if limit.is_some_and(|l| out.len() >= l) {
            break;
        }
        let target = match task {
            Task::Feas => Some(Value::Scalar(if r.feasible { 1.0 } else { 0.0 })),
            Task::Obj => r.obj.map(Value::Scalar),
            Task::Solu if min_norm => match (&r.obj, &r.min_norm_solution) {
                (Some(_), Some(x)) => Some(Value::Vector(x.clone())),
                (Some(_), None) => return Err(CliError::Usage("dataset has no minimum-norm labels; regenerate with --min-norm".into())),
                _ => None,
            },
            Task::Solu => r.obj.and(r.solution.clone()).map(Value::Vector),
        };
        match target {
            Some(target) => out.push(Sample { graph: encode(&r.lp), target }),
            None => skipped += 1,
        }
    }
    if out.is_empty() {
        return Err(lpgraph::Error::EmptyDataset.into());
    }
    Ok((out, skipped))
}

fn evaluate(params: &GnnParams, samples: &[Sample], task: Task) -> CliResult<f64> {
    let graphs: Vec<&LpGraph> = samples.iter().map(|s| &s.graph).collect();
    let targets: Vec<Value> = samples.iter().map(|s| s.target.clone()).collect();
    Ok(metric(task, &predict(params, &graphs), &targets)?)
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub params: GnnParams,
    pub history: Vec<EpochRecord>,
    pub num_samples: usize,
    pub skipped: usize,
    pub test_metric: Option<f64>,
}

impl TrainSummary {
    pub fn final_metric(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.metric)
    }
}

pub fn cmd_train(args: &TrainArgs) -> CliResult<TrainSummary> {
    let start = Instant::now();
    let task: Task = args.task.into();
    let (_, records) = read_dataset(&args.data)?;
    let (samples, skipped) = samples_for(&records, task, args.min_norm_labels, args.limit)?;
    let cfg = GnnConfig::new(args.layers, args.d, task.output_mode())?;
    let tc = TrainConfig { epochs: args.epochs, batch_size: args.batch_size, seed: args.seed, stop_at_metric: args.stop_at, ..TrainConfig::default() };
    let (params, history) = train(&cfg, &samples, task, &tc)?;
    let test_metric = match &args.test {
        Some(p) => {
            let (_, test_records) = read_dataset(p)?;
            let (test, _) = samples_for(&test_records, task, args.min_norm_labels, None)?;
            Some(evaluate(&params, &test, task)?)
        }
        None => None,
    };
    if let Some(path) = &args.checkpoint {
        save_checkpoint(path, &Checkpoint { task, seed: args.seed, epochs: history.len(), params: params.clone() })?;
    }
    if let Some(path) = &args.metrics {
        let wall = seconds_since(start, args.stamp);
        let last = history.len();
        let rows: Vec<MetricsRow> = history
            .iter()
            .map(|r| MetricsRow {
                task: task.name().into(),
                d: args.d,
                num_params: num_params(&cfg),
                num_samples: samples.len(),
                epoch: r.epoch,
                train_metric: Some(r.metric),
                test_metric: if r.epoch == last { test_metric } else { None },
                wall_seconds: if r.epoch == last { wall } else { 0.0 },
            })
            .collect();
        append_metrics(path, &rows)?;
    }
    Ok(TrainSummary { params, history, num_samples: samples.len(), skipped, test_metric })
}

pub fn cmd_eval(args: &EvalArgs) -> CliResult<f64> {
    let start = Instant::now();
    let ck = load_checkpoint(&args.checkpoint)?;
    let (_, records) = read_dataset(&args.data)?;
    let (samples, _) = samples_for(&records, ck.task, args.min_norm_labels, args.limit)?;
    let value = evaluate(&ck.params, &samples, ck.task)?;
    if let Some(path) = &args.metrics {
        let cfg = ck.params.config();
        let row = MetricsRow {
            task: ck.task.name().into(),
            d: cfg.dim,
            num_params: ck.params.len(),
            num_samples: samples.len(),
            epoch: ck.epochs,
            train_metric: None,
            test_metric: Some(value),
            wall_seconds: seconds_since(start, args.stamp),
        };
        append_metrics(path, &[row])?;
    }
    Ok(value)
}

/// For each task: the last training metric per model size, plus the last
/// test metric per size when evaluations were recorded.
pub fn report_series(rows: &[MetricsRow]) -> Vec<(String, Vec<Series>)> {
    let mut tasks: Vec<String> = rows.iter().map(|r| r.task.clone()).collect();
    tasks.sort();
    tasks.dedup();
    tasks
        .into_iter()
        .map(|task| {
            let pick = |get: fn(&MetricsRow) -> Option<f64>| {
                let mut by_size = std::collections::BTreeMap::new();
                for r in rows.iter().filter(|r| r.task == task) {
                    if let Some(v) = get(r) {
                        by_size.insert(r.num_params, v);
                    }
                }
                by_size.into_iter().map(|(p, v)| (p as f64, v)).collect::<Vec<_>>()
            };
            let mut series = vec![Series { label: "train".into(), points: pick(|r| r.train_metric) }];
            let test = pick(|r| r.test_metric);
            if !test.is_empty() {
                series.push(Series { label: "test".into(), points: test });
            }
            (task, series)
        })
        .collect()
}

pub fn cmd_report(args: &ReportArgs) -> CliResult<Vec<PathBuf>> {
    let rows = read_metrics(&args.metrics)?;
    if rows.is_empty() {
        return Err(CliError::Usage(format!("{}: no metrics rows", args.metrics.display())));
    }
    std::fs::create_dir_all(&args.svg_out).map_err(|e| CliError::io(&args.svg_out, e))?;
    let stamp = args.stamp.then(|| {
        let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
        format!("unix {secs}")
    });
    let mut written = Vec::new();
    for (task, series) in report_series(&rows) {
        let path = args.svg_out.join(format!("{task}.svg"));
        atomic_write(&path, render_svg(&format!("{task}: metric vs number of parameters"), &series, stamp.as_deref()).as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

/// Runs one parsed command and returns what it prints on success.
pub fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Gen(a) => {
            let s = cmd_gen(a)?;
            Ok(format!(
                "wrote {} records to {} ({} feasible, {} discarded, {} failed)\n",
                s.written,
                a.out.display(),
                s.feasible,
                s.discarded,
                s.failed
            ))
        }
        Command::Twin(a) => {
            let r = cmd_twin(a)?;
            Ok(format!(
                "wl indistinguishable\nfeasibility {} / {}\nobjective {:?} / {:?}\nsolution {:?}\n",
                r.details.outcome1, r.details.outcome2, r.details.obj1, r.details.obj2, r.solu_match_up_to_perm
            ))
        }
        Command::Wl(a) => Ok(cmd_wl(a)?.text),
        Command::Train(a) => {
            let s = cmd_train(a)?;
            let mut out = format!("trained {} epochs on {} samples ({} skipped)\ntrain metric {:?}\n", s.history.len(), s.num_samples, s.skipped, s.final_metric());
            if let Some(t) = s.test_metric {
                out.push_str(&format!("test metric {t:?}\n"));
            }
            Ok(out)
        }
        Command::Eval(a) => Ok(format!("metric {:?}\n", cmd_eval(a)?)),
        Command::Report(a) => Ok(cmd_report(a)?.iter().map(|p| format!("wrote {}\n", p.display())).collect()),
    }
}
