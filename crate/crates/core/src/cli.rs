//! Run configuration and the four command verbs.
//!
//! A run is described by a flat TOML file whose keys match [`RunConfig`] fields.
//! Command-line flags (kebab-case versions of the same keys) override file values,
//! and `SURVNET_SEED` overrides the seed when no flag is given. The resolved config is
//! written into every run directory, so a run can be repeated from its own output.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::datasets::{
    self, load_csv, split, standardize, write_csv, write_sidecar, DatasetSidecar, LabeledDataset, SimScheme,
    SimSpec, SplitRole, TargetColumn, Task,
};
use crate::importance::{write_scores_csv, ScoreKind};
use crate::net::{Batch, NetworkModel, TrainConfig};
use crate::selection::{evaluate, run_selection, target_matrix, write_history_csv, Evaluation, SelectionConfig};
use crate::{Error, Result, SelectionReport};

pub const SEED_ENV: &str = "SURVNET_SEED";

/// Everything `select` needs. Exactly one data source is used, in this order:
/// `data` (CSV), `mnist_dir` (IDX files), `scheme` (simulation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    /// Target column name or zero-based index.
    pub target: String,
    pub task: Task,
    pub has_header: bool,
    /// Directory holding the four standard MNIST IDX files.
    pub mnist_dir: Option<PathBuf>,
    /// Digit pair used for MNIST classification.
    pub digits: [u8; 2],
    pub scheme: Option<SimScheme>,
    pub n: usize,
    pub p: usize,
    pub p_prime: usize,
    pub standardize: bool,
    pub eta_star: f64,
    pub epsilon: f64,
    pub q: Option<usize>,
    pub hidden: Vec<usize>,
    pub batch_size: usize,
    /// Defaults to 0.05 for classification and 0.01 for regression.
    pub learning_rate: Option<f64>,
    pub max_epochs: usize,
    pub patience: usize,
    pub score_kind: ScoreKind,
    pub scale_scores: bool,
    pub seed: u64,
    /// Seeds `seed, seed + 1, ...` each get their own `run_<seed>` directory.
    pub replicates: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        let sel = SelectionConfig::default();
        Self {
            data: None,
            target: "y".into(),
            task: Task::Classification,
            has_header: true,
            mnist_dir: None,
            digits: [4, 9],
            scheme: Some(SimScheme::IndepMeanShift),
            n: 10_000,
            p: 784,
            p_prime: 64,
            standardize: false,
            eta_star: sel.eta_star,
            epsilon: sel.epsilon,
            q: None,
            hidden: sel.hidden,
            batch_size: train.batch_size,
            learning_rate: None,
            max_epochs: train.max_epochs,
            patience: train.patience,
            score_kind: ScoreKind::default(),
            scale_scores: false,
            seed: 0,
            replicates: 1,
            out: PathBuf::from("runs"),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    fn sim_spec(&self, seed: u64) -> Result<SimSpec> {
        let scheme = self
            .scheme
            .ok_or_else(|| Error::Config("no data source: set `data`, `mnist_dir` or `scheme`".into()))?;
        Ok(SimSpec {
            scheme,
            n: self.n,
            p: self.p,
            p_prime: self.p_prime,
            seed,
        })
    }

    pub fn selection_config(&self, seed: u64, regression: bool) -> SelectionConfig {
        let lr = self.learning_rate.unwrap_or(if regression { 0.01 } else { 0.05 });
        SelectionConfig {
            hidden: self.hidden.clone(),
            train: TrainConfig {
                batch_size: self.batch_size,
                learning_rate: lr,
                max_epochs: self.max_epochs,
                patience: self.patience,
                shuffle_seed: seed,
            },
            eta_star: self.eta_star,
            epsilon: self.epsilon,
            q: self.q,
            score_kind: self.score_kind,
            scale_scores: self.scale_scores,
            seed,
        }
    }

    /// Builds the split dataset for one replicate seed.
    pub fn load_dataset(&self, seed: u64) -> Result<LabeledDataset> {
        let d = if let Some(path) = &self.data {
            let target: TargetColumn = self.target.parse().expect("infallible");
            let mut d = load_csv(path, &target, self.has_header, self.task)?;
            let sidecar = path.with_extension("json");
            if sidecar.exists() {
                let meta: DatasetSidecar = serde_json::from_reader(File::open(sidecar)?)?;
                d.truth = meta.truth;
            }
            split(d, seed)?
        } else if let Some(dir) = &self.mnist_dir {
            let train = datasets::read_idx_images(dir.join("train-images-idx3-ubyte"))?;
            let train_labels = datasets::read_idx_labels(dir.join("train-labels-idx1-ubyte"))?;
            if self.scheme == Some(SimScheme::CorrelatedMeanShift) {
                let zeros: Vec<usize> = (0..train_labels.len()).filter(|&i| train_labels[i] == 0).collect();
                let images = train.pixels.select(Axis(0), &zeros);
                let d = datasets::gen_dataset2(images.view(), &self.sim_spec(seed)?)?;
                split(d, seed)?
            } else {
                let test = datasets::read_idx_images(dir.join("t10k-images-idx3-ubyte"))?;
                let test_labels = datasets::read_idx_labels(dir.join("t10k-labels-idx1-ubyte"))?;
                let digits = (self.digits[0], self.digits[1]);
                datasets::mnist_digits((&train, &train_labels), (&test, &test_labels), digits)?
            }
        } else {
            split(datasets::generate(&self.sim_spec(seed)?)?, seed)?
        };
        if self.standardize {
            standardize(d)
        } else {
            Ok(d)
        }
    }

    /// Side length when the inputs form a square pixel grid.
    fn grid_side(&self, n_cols: usize) -> Option<usize> {
        let grid = self.mnist_dir.is_some() || (self.data.is_none() && self.scheme == Some(SimScheme::CorrelatedMeanShift));
        let side = (n_cols as f64).sqrt().round() as usize;
        (grid && side * side == n_cols).then_some(side)
    }
}

/// Flag overrides for [`RunConfig`]. Unset flags leave the file value alone.
#[derive(Debug, Clone, Default, Args)]
pub struct RunOverrides {
    /// Flat TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub task: Option<Task>,
    #[arg(long)]
    pub no_header: bool,
    #[arg(long)]
    pub mnist_dir: Option<PathBuf>,
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub digits: Option<Vec<u8>>,
    #[arg(long)]
    pub scheme: Option<SimScheme>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub p_prime: Option<usize>,
    #[arg(long)]
    pub standardize: bool,
    #[arg(long)]
    pub eta_star: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub q: Option<usize>,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub score_kind: Option<ScoreKind>,
    #[arg(long)]
    pub scale_scores: bool,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunOverrides {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(target, task, n, p, p_prime, eta_star, epsilon, hidden, batch_size, max_epochs, patience, score_kind, seed, replicates, out);
        if let Some(path) = &self.data {
            c.data = Some(path.clone());
        }
        if let Some(dir) = &self.mnist_dir {
            c.mnist_dir = Some(dir.clone());
        }
        if let Some(s) = self.scheme {
            c.scheme = Some(s);
        }
        if let Some(q) = self.q {
            c.q = Some(q);
        }
        if let Some(lr) = self.learning_rate {
            c.learning_rate = Some(lr);
        }
        if let Some(d) = &self.digits {
            c.digits = [d[0], d[1]];
        }
        c.has_header &= !self.no_header;
        c.standardize |= self.standardize;
        c.scale_scores |= self.scale_scores;
        if c.replicates == 0 {
            return Err(Error::Config("`replicates` must be at least 1".into()));
        }
        Ok(c)
    }
}

#[derive(Debug, Parser)]
#[command(name = "survnet", version, about = "Neural-network variable selection with FDR control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a simulated dataset as CSV plus a JSON sidecar.
    Simulate(SimulateArgs),
    /// Run variable selection and write per-run reports.
    Select(RunOverrides),
    /// Score a saved model on a dataset.
    Evaluate(EvaluateArgs),
    /// Aggregate run directories into a mean/sd table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scheme: SimScheme,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 784)]
    pub p: usize,
    #[arg(long, default_value_t = 64)]
    pub p_prime: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// CSV path; the sidecar goes next to it with a `.json` extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Run directory written by `select`; evaluates its model on the run's test split.
    #[arg(long, conflicts_with_all = ["model", "data"])]
    pub run: Option<PathBuf>,
    #[arg(long, requires = "data")]
    pub model: Option<PathBuf>,
    /// CSV scored on every row.
    #[arg(long, requires = "model")]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "y")]
    pub target: String,
    #[arg(long, default_value = "classification")]
    pub task: Task,
    /// `selection.json` whose selected ids pick the model's input columns.
    #[arg(long)]
    pub selection: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Run directories, or parents containing `run_*` directories.
    #[arg(required = true)]
    pub dirs: Vec<PathBuf>,
    /// Also write the table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            cmd_simulate(&args)?;
            println!("wrote {}", args.out.display());
        }
        Command::Select(overrides) => {
            for dir in cmd_select(&overrides.resolve()?)? {
                println!("{}", dir.display());
            }
        }
        Command::Evaluate(args) => {
            let e = cmd_evaluate(&args)?;
            println!("{}", serde_json::to_string_pretty(&e)?);
        }
        Command::Report(args) => {
            let table = cmd_report(&args.dirs)?;
            print!("{}", table.render());
            if let Some(path) = &args.out {
                table.write_csv(File::create(path)?)?;
            }
        }
    }
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let spec = SimSpec {
        scheme: args.scheme,
        n: args.n,
        p: args.p,
        p_prime: args.p_prime,
        seed: args.seed,
    };
    let d = datasets::generate(&spec)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    write_csv(BufWriter::new(File::create(&args.out)?), &d)?;
    write_sidecar(File::create(args.out.with_extension("json"))?, &d, Some(&spec))?;
    Ok(())
}

/// Runs every replicate and returns the run directories in seed order.
pub fn cmd_select(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let seeds: Vec<u64> = (0..cfg.replicates as u64).map(|k| cfg.seed + k).collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(seeds.len());
    let results: Vec<Result<PathBuf>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let seeds = &seeds;
                s.spawn(move || {
                    seeds
                        .iter()
                        .skip(w)
                        .step_by(workers)
                        .map(|&seed| (seed, select_one(cfg, seed)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let mut all: Vec<(u64, Result<PathBuf>)> = handles
            .into_iter()
            .flat_map(|h| h.join().expect("replicate thread panicked"))
            .collect();
        all.sort_by_key(|(seed, _)| *seed);
        all.into_iter().map(|(_, r)| r).collect()
    });
    results.into_iter().collect()
}

fn select_one(cfg: &RunConfig, seed: u64) -> Result<PathBuf> {
    let dir = cfg.out.join(format!("run_{seed}"));
    fs::create_dir_all(&dir)?;
    let mut run_cfg = cfg.clone();
    run_cfg.seed = seed;
    run_cfg.replicates = 1;
    fs::write(dir.join("config.toml"), run_cfg.to_toml())?;

    let d = cfg.load_dataset(seed)?;
    let sel = cfg.selection_config(seed, !d.target.is_classification());
    let outcome = run_selection(&d, &sel)?;
    let report = &outcome.report;
    log::info!(
        "seed {seed}: {} selected, eta_hat {:.4}, {} steps",
        report.selected.len(),
        report.eta_hat_final,
        report.n_steps()
    );

    write_history_csv(File::create(dir.join("history.csv"))?, &report.history)?;
    write_scores_csv(
        File::create(dir.join("importance.csv"))?,
        &report.selected,
        &outcome.final_scores.scores,
    )?;
    if let Some(side) = cfg.grid_side(d.n_cols()) {
        write_heatmap(File::create(dir.join("heatmap.csv"))?, side, &report.selected, &outcome.final_scores.scores)?;
    }
    serde_json::to_writer_pretty(File::create(dir.join("model.json"))?, &outcome.final_model)?;
    // Written last: its presence marks the run as complete.
    serde_json::to_writer_pretty(File::create(dir.join("selection.json"))?, report)?;
    Ok(dir)
}

/// `side` rows of `side` comma-separated values; unselected pixels are 0.
pub fn write_heatmap<W: Write>(mut w: W, side: usize, ids: &[usize], scores: &[f64]) -> Result<()> {
    let mut grid = Array2::<f64>::zeros((side, side));
    for (&id, &s) in ids.iter().zip(scores) {
        grid[[id / side, id % side]] = s;
    }
    for row in grid.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<Evaluation> {
    if let Some(dir) = &args.run {
        let cfg = RunConfig::load(&dir.join("config.toml"))?;
        let report: SelectionReport = serde_json::from_reader(File::open(dir.join("selection.json"))?)?;
        let model: NetworkModel = serde_json::from_reader(File::open(dir.join("model.json"))?)?;
        let d = cfg.load_dataset(cfg.seed)?;
        let rows = d.rows_with(SplitRole::Test)?;
        let test = Batch::new(d.x.select(Axis(0), &rows), target_matrix(&d.target).select(Axis(0), &rows))?;
        return evaluate(&model, &test.select_columns(&report.selected));
    }
    let (Some(model), Some(data)) = (&args.model, &args.data) else {
        return Err(Error::Config("evaluate needs either --run or both --model and --data".into()));
    };
    let model: NetworkModel = serde_json::from_reader(File::open(model)?)?;
    let target: TargetColumn = args.target.parse().expect("infallible");
    let d = load_csv(data, &target, true, args.task)?;
    let mut batch = Batch::new(d.x.clone(), target_matrix(&d.target))?;
    if let Some(sel) = &args.selection {
        let report: SelectionReport = serde_json::from_reader(File::open(sel)?)?;
        batch = batch.select_columns(&report.selected);
    }
    evaluate(&model, &batch)
}

pub const REPORT_COLUMNS: [&str; 8] = [
    "initial_loss",
    "final_loss",
    "initial_error_pct",
    "final_error_pct",
    "n_original",
    "n_significant",
    "estimated_fdr",
    "actual_fdr",
];

/// Mean and sample sd of each report column over the runs that had a value.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub runs: Vec<PathBuf>,
    pub mean: [Option<f64>; 8],
    pub sd: [Option<f64>; 8],
}

impl ReportTable {
    pub fn render(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        let mut out = format!("runs: {}\n", self.runs.len());
        out.push_str(&format!("{:<18} {:>12} {:>12}\n", "", "mean", "sd"));
        for (k, name) in REPORT_COLUMNS.iter().enumerate() {
            out.push_str(&format!("{:<18} {:>12} {:>12}\n", name, fmt(self.mean[k]), fmt(self.sd[k])));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["statistic"];
        header.extend(REPORT_COLUMNS);
        w.write_record(&header)?;
        for (label, row) in [("mean", &self.mean), ("sd", &self.sd)] {
            let mut rec = vec![label.to_string()];
            rec.extend(row.iter().map(|v| v.map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn report_row(r: &SelectionReport) -> [Option<f64>; 8] {
    [
        Some(r.initial.loss),
        Some(r.final_.loss),
        r.initial.error.map(|e| 100.0 * e),
        r.final_.error.map(|e| 100.0 * e),
        Some(r.selected.len() as f64),
        r.true_positives.map(|v| v as f64),
        Some(r.eta_hat_final),
        r.actual_fdr,
    ]
}

fn collect_run_dirs(dirs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut runs = Vec::new();
    for dir in dirs {
        if dir.join("config.toml").exists() || dir.join("selection.json").exists() {
            runs.push(dir.clone());
            continue;
        }
        let mut children: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir() && p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("run_")))
            .collect();
        children.sort_by_key(|p| {
            let name = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
            (name.trim_start_matches("run_").parse::<u64>().unwrap_or(u64::MAX), name)
        });
        runs.extend(children);
    }
    Ok(runs)
}

pub fn cmd_report(dirs: &[PathBuf]) -> Result<ReportTable> {
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    for dir in collect_run_dirs(dirs)? {
        let path = dir.join("selection.json");
        let parsed = File::open(&path)
            .map_err(Error::from)
            .and_then(|f| serde_json::from_reader::<_, SelectionReport>(f).map_err(Error::from));
        match parsed {
            Ok(r) => {
                rows.push(report_row(&r));
                runs.push(dir);
            }
            Err(e) => log::warn!("skipping {}: {e}", dir.display()),
        }
    }
    if rows.is_empty() {
        return Err(Error::Config("no complete run directories found".into()));
    }
    let mut mean = [None; 8];
    let mut sd = [None; 8];
    for k in 0..8 {
        let vals: Vec<f64> = rows.iter().filter_map(|r| r[k]).collect();
        if vals.is_empty() {
            continue;
        }
        let n = vals.len() as f64;
        let m = vals.iter().sum::<f64>() / n;
        mean[k] = Some(m);
        sd[k] = (vals.len() > 1).then(|| (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    }
    Ok(ReportTable { runs, mean, sd })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::from_toml("eta_star = 0.05\nbogus_key = 3\n").unwrap_err();
        match err {
            Error::Config(msg) => assert!(msg.contains("bogus_key"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn config_round_trips() {
        let mut c = RunConfig::default();
        c.q = Some(100);
        c.learning_rate = Some(0.02);
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, "epsilon = 0.5\npatience = 3\n").unwrap();
        let o = RunOverrides {
            config: Some(path),
            patience: Some(7),
            ..Default::default()
        };
        let c = o.resolve().unwrap();
        assert_eq!((c.epsilon, c.patience), (0.5, 7));
    }

    #[test]
    fn heatmap_places_scores() {
        let mut out = Vec::new();
        write_heatmap(&mut out, 2, &[1, 2], &[0.5, 2.0]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "0,0.5\n2,0\n");
    }
}
