//! Command-line driver for the annealer solution-quality workbench.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qaprobe::anneal::{SelectionMode, SimulatedAnnealer};
use qaprobe::chimera::DEFAULT_M;
use qaprobe::learn::{export_tree, ExportFormat};
use qaprobe::pipeline::{
    featurize, generate, load_dataset, read_graphs, read_json, read_results, render_summary,
    resolve_embedding, run_pipeline, solve, train_and_write, with_threads, write_dataset_with_meta,
    write_embedding, write_graphs, write_report_files, write_results, EvalReport, GenConfig, Model,
    ModelDocument, PipelineConfig, Preset, Regime, SolveConfig, Task, TrainConfig,
};
use qaprobe::{Error, Result};

#[derive(Parser)]
#[command(
    name = "qaprobe",
    version,
    about = "Max-clique annealing experiments and solution-quality prediction"
)]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample Erdős–Rényi instances.
    Gen(GenArgs),
    /// Build the staircase clique embedding (or validate an external one).
    Embed(EmbedArgs),
    /// Embed, anneal and evaluate every instance.
    Solve(SolveArgs),
    /// Join graphs and results into the feature dataset.
    Featurize(FeaturizeArgs),
    /// Fit a classifier or regressor and evaluate it on a held-out split.
    Train(TrainArgs),
    /// Render a trained model and its evaluation.
    Report(ReportArgs),
    /// gen → embed → solve → featurize → train → report.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 20)]
    n_min: usize,
    #[arg(long, default_value_t = 64)]
    n_max: usize,
    #[arg(long, default_value_t = 0.01)]
    density_min: f64,
    #[arg(long, default_value_t = 0.99)]
    density_max: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    out: PathBuf,
    /// Chimera grid size.
    #[arg(long, default_value_t = DEFAULT_M)]
    m: usize,
    /// Validate and copy an external embedding instead.
    #[arg(long)]
    embedding_file: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Fixed,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum BestMode {
    LargestValid,
    LowestEnergy,
}

impl From<BestMode> for SelectionMode {
    fn from(m: BestMode) -> Self {
        match m {
            BestMode::LargestValid => SelectionMode::LargestValid,
            BestMode::LowestEnergy => SelectionMode::LowestEnergy,
        }
    }
}

#[derive(Args)]
struct AnnealArgs {
    /// Reads per instance.
    #[arg(long)]
    reads: Option<usize>,
    #[arg(long, value_enum)]
    regime: Option<RegimeArg>,
    /// Fixed regime annealing time in microseconds.
    #[arg(long)]
    annealing_time: Option<f64>,
    /// Fixed regime chain-strength prefactor.
    #[arg(long)]
    prefactor: Option<f64>,
    #[arg(long, value_enum)]
    best_mode: Option<BestMode>,
    #[arg(long, default_value_t = 0.1)]
    beta_min: f64,
    #[arg(long, default_value_t = 10.0)]
    beta_max: f64,
    #[arg(long, default_value_t = 1.0)]
    sweeps_per_unit: f64,
    /// Exact-solver deadline per instance, seconds.
    #[arg(long, default_value_t = 60.0)]
    deadline_secs: f64,
}

impl AnnealArgs {
    fn apply(&self, cfg: &mut SolveConfig) -> Result<()> {
        let regime = match self.regime {
            Some(RegimeArg::Fixed) => Regime::FIXED,
            Some(RegimeArg::Random) => Regime::RANDOM,
            None => cfg.regime,
        };
        cfg.regime = match regime {
            Regime::Fixed {
                annealing_time,
                prefactor,
            } => Regime::Fixed {
                annealing_time: self.annealing_time.unwrap_or(annealing_time),
                prefactor: self.prefactor.unwrap_or(prefactor),
            },
            random => {
                if self.annealing_time.is_some() || self.prefactor.is_some() {
                    return Err(Error::InvalidArgument(
                        "--annealing-time and --prefactor apply only to the fixed regime".into(),
                    ));
                }
                random
            }
        };
        if let Some(r) = self.reads {
            cfg.num_reads = r;
        }
        if let Some(m) = self.best_mode {
            cfg.best_mode = m.into();
        }
        cfg.annealer = SimulatedAnnealer::new(self.beta_min, self.beta_max, self.sweeps_per_unit)?;
        cfg.deadline_secs = self.deadline_secs;
        Ok(())
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    graphs: PathBuf,
    /// Embedding file; defaults to the staircase embedding on `--m`.
    #[arg(long)]
    embedding: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_M)]
    m: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    anneal: AnnealArgs,
}

#[derive(Args)]
struct FeaturizeArgs {
    #[arg(long)]
    graphs: PathBuf,
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    embedding: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_M)]
    m: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Classify,
    Regress,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum)]
    task: TaskArg,
    /// Directory for `<task>.model.json` and `<task>.report.json`.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.9)]
    train_fraction: f64,
    /// Comma-separated feature names to leave out.
    #[arg(long, value_delimiter = ',')]
    exclude_features: Vec<String>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    min_impurity_decrease: Option<f64>,
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long, default_value_t = 5)]
    importance_repeats: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeFormat {
    Text,
    Dot,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    report: PathBuf,
    /// Write summary, scatter table and tree renderings here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also print the tree (classifier only).
    #[arg(long, value_enum)]
    tree: Option<TreeFormat>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, value_enum, default_value = "desk")]
    preset: PresetArg,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    embedding_file: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    exclude_features: Vec<String>,
    #[command(flatten)]
    anneal: AnnealArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Fixed,
    Random,
    Desk,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    match with_threads(threads, move || run(cli.command)).and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen(a) => {
            let cfg = GenConfig {
                count: a.count,
                n_min: a.n_min,
                n_max: a.n_max,
                density_min: a.density_min,
                density_max: a.density_max,
                seed: a.seed,
            };
            let graphs = generate(&cfg)?;
            write_graphs(&a.out, &graphs, &cfg)?;
            println!("wrote {} graphs to {}", graphs.len(), a.out.display());
        }
        Command::Embed(a) => {
            let emb = resolve_embedding(a.embedding_file.as_deref(), a.m)?;
            write_embedding(&a.out, &emb, a.embedding_file.as_deref())?;
            println!(
                "wrote {}-chain embedding on Chimera m={} to {}",
                emb.capacity(),
                emb.chimera_m,
                a.out.display()
            );
        }
        Command::Solve(a) => {
            let graphs = read_graphs(&a.graphs)?;
            let emb = resolve_embedding(a.embedding.as_deref(), a.m)?;
            let mut cfg = SolveConfig {
                seed: a.seed,
                ..SolveConfig::default()
            };
            a.anneal.apply(&mut cfg)?;
            let results = solve(&graphs, &emb, &cfg)?;
            let mut inputs: Vec<&Path> = vec![&a.graphs];
            inputs.extend(a.embedding.as_deref());
            write_results(&a.out, &results, &cfg, &inputs)?;
            let solvable = results
                .iter()
                .filter(|r| r.best_clique_size == r.exact_clique_size)
                .count();
            println!(
                "solved {} instances ({} solvable), wrote {}",
                results.len(),
                solvable,
                a.out.display()
            );
        }
        Command::Featurize(a) => {
            let graphs = read_graphs(&a.graphs)?;
            let results = read_results(&a.results)?;
            let emb = resolve_embedding(a.embedding.as_deref(), a.m)?;
            let records = featurize(&graphs, &results, &emb)?;
            let mut inputs: Vec<&Path> = vec![&a.graphs, &a.results];
            inputs.extend(a.embedding.as_deref());
            let config = serde_json::json!({ "chimera_m": emb.chimera_m });
            write_dataset_with_meta(&a.out, &records, None, config, &inputs)?;
            println!("wrote {} records to {}", records.len(), a.out.display());
        }
        Command::Train(a) => {
            let records = load_dataset(&a.dataset)?;
            let task = match a.task {
                TaskArg::Classify => Task::Classify,
                TaskArg::Regress => Task::Regress,
            };
            let mut cfg = TrainConfig::new(task, a.seed);
            cfg.train_fraction = a.train_fraction;
            cfg.exclude_features = a.exclude_features;
            cfg.importance_repeats = a.importance_repeats;
            if let Some(d) = a.max_depth {
                match task {
                    Task::Classify => cfg.tree.max_depth = d,
                    Task::Regress => cfg.boost.max_depth = d,
                }
            }
            if let Some(v) = a.min_impurity_decrease {
                cfg.tree.min_impurity_decrease = v;
            }
            if let Some(s) = a.stages {
                cfg.boost.n_stages = s;
            }
            if let Some(lr) = a.learning_rate {
                cfg.boost.learning_rate = lr;
            }
            std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::Io {
                path: a.out_dir.clone(),
                source: e,
            })?;
            let (model, report, _, eval) = train_and_write(&records, &cfg, &a.dataset, &a.out_dir)?;
            print!("{}", render_summary(&eval));
            println!("\nwrote {} and {}", model.display(), report.display());
        }
        Command::Report(a) => {
            let doc: ModelDocument = read_json(&a.model)?;
            let report: EvalReport = read_json(&a.report)?;
            print!("{}", render_summary(&report));
            if let Some(fmt) = a.tree {
                match &doc.model {
                    Model::DecisionTree(t) => {
                        let fmt = match fmt {
                            TreeFormat::Text => ExportFormat::Text,
                            TreeFormat::Dot => ExportFormat::Dot,
                        };
                        print!("\n{}", export_tree(t, fmt));
                    }
                    Model::GradientBoost(_) => {
                        return Err(Error::InvalidArgument(
                            "--tree needs a classifier model".into(),
                        ))
                    }
                }
            }
            if let Some(dir) = a.out_dir {
                for p in write_report_files(&doc, &report, &dir)? {
                    println!("wrote {}", p.display());
                }
            }
        }
        Command::Pipeline(a) => {
            let preset = match a.preset {
                PresetArg::Fixed => Preset::Fixed,
                PresetArg::Random => Preset::Random,
                PresetArg::Desk => Preset::Desk,
            };
            let mut cfg = PipelineConfig::preset(preset, a.seed);
            if let Some(c) = a.count {
                cfg.gen.count = c;
            }
            if let Some(n) = a.n_min {
                cfg.gen.n_min = n;
            }
            if let Some(n) = a.n_max {
                cfg.gen.n_max = n;
            }
            if let Some(m) = a.m {
                cfg.chimera_m = m;
            }
            cfg.exclude_features = a.exclude_features;
            a.anneal.apply(&mut cfg.solve)?;
            let start = Instant::now();
            let out = run_pipeline(&cfg, a.embedding_file.as_deref(), &a.out)?;
            let c = &out.classification;
            println!(
                "dataset: {} ({} records)",
                out.dataset.display(),
                cfg.gen.count
            );
            println!(
                "classifier: balanced accuracy {:.4}, recall solvable {}, recall not solvable {}",
                c.balanced_accuracy.unwrap_or(f64::NAN),
                c.recall_solvable
                    .map_or("n/a".into(), |v| format!("{v:.4}")),
                c.recall_not_solvable
                    .map_or("n/a".into(), |v| format!("{v:.4}")),
            );
            println!(
                "regressor: rmse {:.4}",
                out.regression.rmse.unwrap_or(f64::NAN)
            );
            for p in out.models.iter().chain(&out.reports).chain(&out.rendered) {
                println!("wrote {}", p.display());
            }
            println!("elapsed: {:.1} s", start.elapsed().as_secs_f64());
        }
    }
    Ok(())
}
