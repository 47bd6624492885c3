//! Experiment stages (generate, embed, solve, featurize, train, report) and
//! the artifacts they exchange.
//!
//! Every per-instance random stream is derived from the master seed and the
//! instance id, and every parallel map is collected in id order, so artifacts
//! are byte-identical for any thread count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anneal::{
    evaluate_reads, sample, AnnealBackend, AnnealOutcome, AnnealRequest, SelectionMode,
    SimulatedAnnealer,
};
use crate::chimera::{
    build_chimera, embed_ising, staircase_clique_embedding, utc_chain_strength, EmbeddedProblem,
    Embedding,
};
use crate::error::{Error, Result};
use crate::features::{
    assemble_record, extract_features, read_dataset, split_train_test, write_dataset, FeatureRecord,
};
use crate::graph::{read_jsonl, sample_erdos_renyi, write_jsonl, Graph, GraphRecord};
use crate::learn::{
    classification_metrics, export_tree, fit_decision_tree, fit_gradient_boost,
    permutation_importance, ranking, rmse, BoostConfig, DecisionTree, ExportFormat, GradientBoost,
    Metric, Predictor, Table, TreeConfig,
};
use crate::oracle::max_clique_with_deadline;
use crate::qubo::{build_max_clique_qubo, ProblemBundle};
use crate::seed::{derive, rng, stream};

pub const META_FORMAT: &str = "qaprobe.meta.v1";
pub const RESULT_FORMAT: &str = "qaprobe.result.v1";
pub const MODEL_FORMAT: &str = "qaprobe.model.v1";
pub const REPORT_FORMAT: &str = "qaprobe.report.v1";

/// Max-clique penalty weights `a` (reward per vertex) and `b` (per
/// complement edge).
pub const QUBO_A: f64 = 1.0;
pub const QUBO_B: f64 = 2.0;

/// Provenance carried by every artifact: enough to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub format: String,
    pub artifact: String,
    pub version: String,
    pub master_seed: Option<u64>,
    pub config: serde_json::Value,
    /// File names (not paths) of the artifacts this one was built from.
    pub inputs: Vec<String>,
    pub count: usize,
}

impl ArtifactMeta {
    pub fn new(
        artifact: &str,
        master_seed: Option<u64>,
        config: impl Serialize,
        inputs: &[&Path],
        count: usize,
    ) -> Result<Self> {
        Ok(ArtifactMeta {
            format: META_FORMAT.into(),
            artifact: artifact.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            master_seed,
            config: serde_json::to_value(config)?,
            inputs: inputs.iter().map(|p| file_name(p)).collect(),
            count,
        })
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(
        || p.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

/// `dir/name.ext` → `dir/name.meta.json`.
pub fn meta_path(artifact: &Path) -> PathBuf {
    artifact.with_extension("meta.json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

pub fn write_meta(artifact: &Path, meta: &ArtifactMeta) -> Result<()> {
    write_json(&meta_path(artifact), meta)
}

/// Runs `f` on a dedicated pool of `threads` workers, or the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidArgument(
            "--threads must be at least 1".into(),
        )),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}"))),
    }
}

/// First error in index order, so failures do not depend on scheduling.
fn collect_ordered<T>(items: Vec<Result<T>>) -> Result<Vec<T>> {
    items.into_iter().collect()
}

// ---------------------------------------------------------------- gen

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub count: usize,
    /// Inclusive vertex-count range.
    pub n_min: usize,
    pub n_max: usize,
    /// Inclusive edge-probability range.
    pub density_min: f64,
    pub density_max: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            count: 100,
            n_min: 20,
            n_max: 64,
            density_min: 0.01,
            density_max: 0.99,
            seed: 0,
        }
    }
}

/// Redraws of `(n, p)` allowed per instance when `p` is too small to avoid
/// isolated vertices within the sampler's own retry budget.
pub const PARAM_REDRAWS: u64 = 1000;

/// Instance `i` draws `n` and `p` from its own stream and samples `G(n, p)`.
/// If that pair exhausts the sampler's retry budget, a fresh pair is drawn.
/// `gen_seed` is the seed of the accepted draw, so
/// `sample_erdos_renyi(n, target_density, gen_seed)` regenerates the graph.
pub fn generate(cfg: &GenConfig) -> Result<Vec<GraphRecord>> {
    if cfg.n_min < 2 || cfg.n_min > cfg.n_max {
        return Err(Error::InvalidArgument(format!(
            "vertex range {}..{} invalid (need 2 <= min <= max)",
            cfg.n_min, cfg.n_max
        )));
    }
    if !(cfg.density_min > 0.0 && cfg.density_min <= cfg.density_max && cfg.density_max <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "density range {}..{} invalid (need 0 < min <= max <= 1)",
            cfg.density_min, cfg.density_max
        )));
    }
    let items: Vec<Result<GraphRecord>> = (0..cfg.count as u64)
        .into_par_iter()
        .map(|id| {
            let instance = derive(cfg.seed, &[stream::GEN, id]);
            let mut last = None;
            for attempt in 0..PARAM_REDRAWS {
                let gen_seed = derive(instance, &[attempt]);
                let mut r = rng(derive(gen_seed, &[stream::PARAMS]));
                let n = r.random_range(cfg.n_min..=cfg.n_max);
                let p = cfg.density_min + (cfg.density_max - cfg.density_min) * r.random::<f64>();
                match sample_erdos_renyi(n, p, gen_seed) {
                    Ok(g) => return Ok(GraphRecord::new(id, &g, gen_seed, p)),
                    Err(e @ Error::RetryBudgetExhausted { .. }) => last = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(last.expect("at least one attempt"))
        })
        .collect();
    collect_ordered(items)
}

// ---------------------------------------------------------------- embed

/// Staircase clique embedding using the whole `m × m` Chimera grid.
pub fn default_embedding(m: usize) -> Result<Embedding> {
    staircase_clique_embedding(&build_chimera(m)?, 4 * m)
}

pub fn resolve_embedding(file: Option<&Path>, m: usize) -> Result<Embedding> {
    match file {
        Some(path) => Embedding::load(path),
        None => default_embedding(m),
    }
}

// ---------------------------------------------------------------- solve

/// How annealing time and chain-strength prefactor are chosen per instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "kebab-case")]
pub enum Regime {
    Fixed {
        annealing_time: f64,
        prefactor: f64,
    },
    Random {
        time_min: f64,
        time_max: f64,
        prefactor_min: f64,
        prefactor_max: f64,
    },
}

impl Regime {
    pub const FIXED: Regime = Regime::Fixed {
        annealing_time: 100.0,
        prefactor: 0.5,
    };
    pub const RANDOM: Regime = Regime::Random {
        time_min: 1.0,
        time_max: 2000.0,
        prefactor_min: 0.5,
        prefactor_max: 3.0,
    };

    /// `(annealing_time, prefactor)` for one instance.
    pub fn draw(&self, instance_seed: u64) -> (f64, f64) {
        match *self {
            Regime::Fixed {
                annealing_time,
                prefactor,
            } => (annealing_time, prefactor),
            Regime::Random {
                time_min,
                time_max,
                prefactor_min,
                prefactor_max,
            } => {
                let mut r = rng(derive(instance_seed, &[stream::PARAMS]));
                let t = time_min + (time_max - time_min) * r.random::<f64>();
                let c = prefactor_min + (prefactor_max - prefactor_min) * r.random::<f64>();
                (t, c)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Regime::Fixed {
                annealing_time,
                prefactor,
            } => (1.0..=2000.0).contains(&annealing_time) && prefactor > 0.0,
            Regime::Random {
                time_min,
                time_max,
                prefactor_min,
                prefactor_max,
            } => {
                1.0 <= time_min
                    && time_min <= time_max
                    && time_max <= 2000.0
                    && 0.0 < prefactor_min
                    && prefactor_min <= prefactor_max
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid annealing parameters {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub regime: Regime,
    pub num_reads: usize,
    pub seed: u64,
    pub best_mode: SelectionMode,
    pub annealer: SimulatedAnnealer,
    /// Exact-solver deadline per instance.
    pub deadline_secs: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            regime: Regime::FIXED,
            num_reads: crate::anneal::DEFAULT_NUM_READS,
            seed: 0,
            best_mode: SelectionMode::default(),
            annealer: SimulatedAnnealer::default(),
            deadline_secs: crate::oracle::DEFAULT_DEADLINE.as_secs_f64(),
        }
    }
}

/// One line of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub graph_id: u64,
    pub annealing_time: f64,
    pub utc_prefactor: f64,
    pub chain_strength: f64,
    pub num_reads: usize,
    pub best_clique_size: usize,
    pub reads_with_valid_clique: usize,
    pub min_energy: f64,
    pub broken_chain_rate: f64,
    pub backend: String,
    /// Instance seed; reads and tie-breaks derive from it.
    pub seed: u64,
    pub best_mode: SelectionMode,
    pub exact_clique_size: usize,
}

fn embed_instance(
    g: &Graph,
    emb: &Embedding,
    chain_strength: Option<f64>,
    prefactor: f64,
) -> Result<(ProblemBundle, EmbeddedProblem)> {
    let bundle = build_max_clique_qubo(g, QUBO_A, QUBO_B)?;
    let ising = bundle.model.to_ising()?;
    let cs = match chain_strength {
        Some(cs) => cs,
        None => utc_chain_strength(&ising, prefactor)?,
    };
    let ep = embed_ising(&ising, emb, cs)?;
    Ok((bundle, ep))
}

fn check_capacity(graphs: &[GraphRecord], emb: &Embedding) -> Result<()> {
    if let Some(r) = graphs.iter().find(|r| r.n > emb.capacity()) {
        return Err(Error::Capacity {
            requested: r.n,
            capacity: emb.capacity(),
        });
    }
    Ok(())
}

pub fn solve_one(
    rec: &GraphRecord,
    emb: &Embedding,
    backend: &dyn AnnealBackend,
    cfg: &SolveConfig,
) -> Result<ResultRecord> {
    let g = rec.graph()?;
    let instance_seed = derive(cfg.seed, &[stream::SOLVE, rec.id]);
    let (annealing_time, prefactor) = cfg.regime.draw(instance_seed);
    let (_, ep) = embed_instance(&g, emb, None, prefactor)?;
    let req = AnnealRequest {
        problem: &ep,
        num_reads: cfg.num_reads,
        annealing_time,
        seed: instance_seed,
    };
    let rs = sample(backend, &req)?;
    let outcome = evaluate_reads(&rs, &g, cfg.best_mode)?;
    let exact = max_clique_with_deadline(&g, Duration::from_secs_f64(cfg.deadline_secs))?.len();
    if outcome.best_clique_size > exact {
        return Err(Error::Integrity(format!(
            "graph {}: annealer clique exceeds exact maximum",
            rec.id
        )));
    }
    Ok(ResultRecord {
        graph_id: rec.id,
        annealing_time,
        utc_prefactor: prefactor,
        chain_strength: ep.chain_strength,
        num_reads: cfg.num_reads,
        best_clique_size: outcome.best_clique_size,
        reads_with_valid_clique: outcome.reads_with_valid_clique,
        min_energy: rs.min_energy(),
        broken_chain_rate: rs.broken_chain_rate(),
        backend: backend.descriptor(),
        seed: instance_seed,
        best_mode: cfg.best_mode,
        exact_clique_size: exact,
    })
}

pub fn solve(
    graphs: &[GraphRecord],
    emb: &Embedding,
    cfg: &SolveConfig,
) -> Result<Vec<ResultRecord>> {
    cfg.regime.validate()?;
    if cfg.num_reads == 0 {
        return Err(Error::InvalidArgument("--reads must be at least 1".into()));
    }
    if !(cfg.deadline_secs > 0.0 && cfg.deadline_secs.is_finite()) {
        return Err(Error::InvalidArgument("deadline must be positive".into()));
    }
    check_capacity(graphs, emb)?;
    let backend = cfg.annealer;
    let items: Vec<Result<ResultRecord>> = graphs
        .par_iter()
        .map(|rec| solve_one(rec, emb, &backend, cfg))
        .collect();
    collect_ordered(items)
}

// ---------------------------------------------------------------- featurize

/// Joins graphs and results by id; output is sorted by graph id.
pub fn featurize(
    graphs: &[GraphRecord],
    results: &[ResultRecord],
    emb: &Embedding,
) -> Result<Vec<FeatureRecord>> {
    let mut by_id: BTreeMap<u64, &ResultRecord> = BTreeMap::new();
    for r in results {
        if by_id.insert(r.graph_id, r).is_some() {
            return Err(Error::Schema {
                path: "results".into(),
                msg: format!("duplicate result for graph {}", r.graph_id),
            });
        }
    }
    let mut pairs: Vec<(&GraphRecord, &ResultRecord)> = Vec::with_capacity(graphs.len());
    for g in graphs {
        let r = by_id.remove(&g.id).ok_or_else(|| Error::Schema {
            path: "results".into(),
            msg: format!("no result for graph {}", g.id),
        })?;
        pairs.push((g, r));
    }
    if let Some(id) = by_id.keys().next() {
        return Err(Error::Schema {
            path: "results".into(),
            msg: format!("result for unknown graph {id}"),
        });
    }
    pairs.sort_by_key(|(g, _)| g.id);
    check_capacity(graphs, emb)?;
    let items: Vec<Result<FeatureRecord>> = pairs
        .par_iter()
        .map(|(rec, res)| {
            let g = rec.graph()?;
            let (bundle, ep) =
                embed_instance(&g, emb, Some(res.chain_strength), res.utc_prefactor)?;
            let features = extract_features(&g, &bundle, &ep, res.annealing_time)?;
            let outcome = AnnealOutcome {
                best_clique_size: res.best_clique_size,
                best_assignment: None,
                reads_with_valid_clique: res.reads_with_valid_clique,
            };
            assemble_record(rec.id, &outcome, res.exact_clique_size, features)
        })
        .collect();
    collect_ordered(items)
}

// ---------------------------------------------------------------- train

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classify,
    Regress,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Classify => "classify",
            Task::Regress => "regress",
        }
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Task> {
        match s {
            "classify" => Ok(Task::Classify),
            "regress" => Ok(Task::Regress),
            _ => Err(Error::InvalidArgument(format!(
                "unknown task {s:?} (classify|regress)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub task: Task,
    pub train_fraction: f64,
    pub seed: u64,
    pub exclude_features: Vec<String>,
    pub tree: TreeConfig,
    pub boost: BoostConfig,
    pub importance_repeats: usize,
}

impl TrainConfig {
    pub fn new(task: Task, seed: u64) -> Self {
        TrainConfig {
            task,
            train_fraction: 0.9,
            seed,
            exclude_features: Vec::new(),
            tree: TreeConfig {
                seed,
                ..TreeConfig::default()
            },
            boost: BoostConfig {
                seed,
                ..BoostConfig::default()
            },
            importance_repeats: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Model {
    DecisionTree(DecisionTree),
    GradientBoost(GradientBoost),
}

impl Model {
    pub fn feature_names(&self) -> &[String] {
        match self {
            Model::DecisionTree(t) => &t.feature_names,
            Model::GradientBoost(b) => &b.feature_names,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub meta: ArtifactMeta,
    pub train_config: TrainConfig,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub feature: String,
    pub importance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub graph_id: u64,
    /// Solvable as 0/1, or the annealer clique size.
    pub truth: f64,
    pub predicted: f64,
    /// Regression only: prediction rounded and clamped to `[0, input_num_nodes]`.
    pub predicted_clique_size: Option<usize>,
    /// Classification only: leaf mass fraction of the predicted class.
    pub confidence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub format: String,
    pub meta: ArtifactMeta,
    pub task: Task,
    pub train_size: usize,
    pub test_size: usize,
    pub test_solvable_fraction: f64,
    pub confusion: Option<[[u64; 2]; 2]>,
    pub recall_not_solvable: Option<f64>,
    pub recall_solvable: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub accuracy: Option<f64>,
    pub rmse: Option<f64>,
    pub importance_metric: Metric,
    /// Sorted by importance, largest first.
    pub importances: Vec<ImportanceEntry>,
    pub predictions: Vec<Prediction>,
}

pub fn train(
    records: &[FeatureRecord],
    cfg: &TrainConfig,
    inputs: &[&Path],
) -> Result<(ModelDocument, EvalReport)> {
    let (train_set, test_set) = split_train_test(records, cfg.train_fraction, cfg.seed)?;
    let train_table = Table::from_records(&train_set, &cfg.exclude_features)?;
    let test_table = Table::select(&test_set, &train_table.names)?;
    let names = &train_table.names;

    let (model, metric, truth): (Model, Metric, Vec<f64>) = match cfg.task {
        Task::Classify => (
            Model::DecisionTree(fit_decision_tree(
                &train_table.rows,
                &train_table.solvable,
                names,
                &cfg.tree,
            )?),
            Metric::Accuracy,
            test_table
                .solvable
                .iter()
                .map(|&s| f64::from(u8::from(s)))
                .collect(),
        ),
        Task::Regress => (
            Model::GradientBoost(fit_gradient_boost(
                &train_table.rows,
                &train_table.clique_size,
                names,
                &cfg.boost,
            )?),
            Metric::Rmse,
            test_table.clique_size.clone(),
        ),
    };
    let predictor: &dyn Predictor = match &model {
        Model::DecisionTree(t) => t,
        Model::GradientBoost(b) => b,
    };
    let predictions: Vec<Prediction> = test_set
        .iter()
        .zip(&test_table.rows)
        .zip(&truth)
        .map(|((rec, row), &t)| {
            let predicted = predictor.predict_value(row);
            let (predicted_clique_size, confidence) = match &model {
                Model::DecisionTree(tree) => (None, Some(tree.predict_row(row).1)),
                Model::GradientBoost(_) => {
                    let n = rec.features.get("input_num_nodes")? as usize;
                    (Some(crate::learn::clamp_clique_size(predicted, n)), None)
                }
            };
            Ok(Prediction {
                graph_id: rec.graph_id,
                truth: t,
                predicted,
                predicted_clique_size,
                confidence,
            })
        })
        .collect::<Result<_>>()?;
    let pred_values: Vec<f64> = predictions.iter().map(|p| p.predicted).collect();
    let importance = permutation_importance(
        predictor,
        &test_table.rows,
        &truth,
        metric,
        cfg.importance_repeats,
        cfg.seed,
    )?;
    let importances = ranking(&importance)
        .into_iter()
        .map(|i| ImportanceEntry {
            feature: names[i].clone(),
            importance: importance[i],
        })
        .collect();

    let solvable = test_table.solvable.iter().filter(|&&s| s).count();
    let mut report = EvalReport {
        format: REPORT_FORMAT.into(),
        meta: ArtifactMeta::new("report", Some(cfg.seed), cfg, inputs, test_set.len())?,
        task: cfg.task,
        train_size: train_set.len(),
        test_size: test_set.len(),
        test_solvable_fraction: solvable as f64 / test_set.len() as f64,
        confusion: None,
        recall_not_solvable: None,
        recall_solvable: None,
        balanced_accuracy: None,
        accuracy: None,
        rmse: None,
        importance_metric: metric,
        importances,
        predictions,
    };
    match cfg.task {
        Task::Classify => {
            let pred: Vec<bool> = pred_values.iter().map(|&v| v >= 0.5).collect();
            let m = classification_metrics(&test_table.solvable, &pred)?;
            report.confusion = Some(m.confusion);
            report.recall_not_solvable = m.recall_not_solvable;
            report.recall_solvable = m.recall_solvable;
            report.balanced_accuracy = Some(m.balanced_accuracy);
            report.accuracy = Some(m.accuracy);
        }
        Task::Regress => report.rmse = Some(rmse(&truth, &pred_values)?),
    }
    let doc = ModelDocument {
        format: MODEL_FORMAT.into(),
        meta: ArtifactMeta::new("model", Some(cfg.seed), cfg, inputs, train_set.len())?,
        train_config: cfg.clone(),
        model,
    };
    Ok((doc, report))
}

// ---------------------------------------------------------------- report

/// Published D-Wave 2000Q results for the two parameter regimes.
pub struct HardwareReference {
    pub regime: &'static str,
    pub recall_solvable: f64,
    pub recall_not_solvable: f64,
    pub rmse: f64,
}

pub const HARDWARE_REFERENCE: [HardwareReference; 2] = [
    HardwareReference {
        regime: "fixed parameters",
        recall_solvable: 0.837,
        recall_not_solvable: 0.841,
        rmse: 0.696,
    },
    HardwareReference {
        regime: "random parameters",
        recall_solvable: 0.862,
        recall_not_solvable: 0.847,
        rmse: 0.903,
    },
];

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |v| format!("{:.1}%", 100.0 * v))
}

/// Human-readable evaluation summary with the hardware reference numbers.
pub fn render_summary(report: &EvalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "task: {}", report.task.name());
    let _ = writeln!(
        s,
        "train records: {}, test records: {}",
        report.train_size, report.test_size
    );
    let _ = writeln!(
        s,
        "solvable fraction in test split: {:.4}",
        report.test_solvable_fraction
    );
    if let Some(cm) = report.confusion {
        let _ = writeln!(s, "\nconfusion matrix (rows actual, columns predicted)");
        let _ = writeln!(s, "{:>14} {:>14} {:>14}", "", "not solvable", "solvable");
        let _ = writeln!(
            s,
            "{:>14} {:>14} {:>14}",
            "not solvable", cm[0][0], cm[0][1]
        );
        let _ = writeln!(s, "{:>14} {:>14} {:>14}", "solvable", cm[1][0], cm[1][1]);
        let _ = writeln!(s, "\nrecall solvable:     {}", pct(report.recall_solvable));
        let _ = writeln!(
            s,
            "recall not solvable: {}",
            pct(report.recall_not_solvable)
        );
        let _ = writeln!(s, "balanced accuracy:   {}", pct(report.balanced_accuracy));
        let _ = writeln!(s, "accuracy:            {}", pct(report.accuracy));
    }
    if let Some(e) = report.rmse {
        let _ = writeln!(s, "\nrmse (clique size): {e:.4}");
    }
    let _ = writeln!(
        s,
        "\nreference hardware results (D-Wave 2000Q, not reproducible with the simulated backend)"
    );
    for r in &HARDWARE_REFERENCE {
        match report.task {
            Task::Classify => {
                let _ = writeln!(
                    s,
                    "  {:<18} recall solvable {:.1}%, recall not solvable {:.1}%",
                    r.regime,
                    100.0 * r.recall_solvable,
                    100.0 * r.recall_not_solvable
                );
            }
            Task::Regress => {
                let _ = writeln!(s, "  {:<18} rmse {:.3}", r.regime, r.rmse);
            }
        }
    }
    let metric = match report.importance_metric {
        Metric::Accuracy => "accuracy drop",
        Metric::BalancedAccuracy => "balanced accuracy drop",
        Metric::Rmse => "rmse increase",
    };
    let _ = writeln!(s, "\npermutation importance ({metric})");
    for (rank, e) in report.importances.iter().enumerate() {
        let _ = writeln!(s, "{:>3}. {:<36} {:+.6}", rank + 1, e.feature, e.importance);
    }
    s
}

/// Predicted-versus-true table, one row per test record.
pub fn render_scatter(report: &EvalReport) -> String {
    let mut s = String::from("graph_id,truth,predicted,predicted_clique_size\n");
    for p in &report.predictions {
        let rounded = p
            .predicted_clique_size
            .map_or_else(String::new, |v| v.to_string());
        let _ = writeln!(
            s,
            "{},{},{},{}",
            p.graph_id,
            p.truth,
            crate::features::format_f64(p.predicted),
            rounded
        );
    }
    s
}

/// Writes the rendered report files for one task into `dir`; returns their paths.
pub fn write_report_files(
    doc: &ModelDocument,
    report: &EvalReport,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    if doc.train_config.task != report.task {
        return Err(Error::Schema {
            path: "report".into(),
            msg: "model and report are for different tasks".into(),
        });
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let task = report.task.name();
    let mut files: Vec<(PathBuf, String)> = vec![
        (
            dir.join(format!("{task}.summary.txt")),
            render_summary(report),
        ),
        (
            dir.join(format!("{task}.scatter.csv")),
            render_scatter(report),
        ),
    ];
    if let Model::DecisionTree(tree) = &doc.model {
        files.push((dir.join("tree.txt"), export_tree(tree, ExportFormat::Text)));
        files.push((dir.join("tree.dot"), export_tree(tree, ExportFormat::Dot)));
    }
    for (path, text) in &files {
        std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

// ---------------------------------------------------------------- pipeline

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fixed,
    Random,
    Desk,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Preset> {
        match s {
            "fixed" => Ok(Preset::Fixed),
            "random" => Ok(Preset::Random),
            "desk" => Ok(Preset::Desk),
            _ => Err(Error::InvalidArgument(format!(
                "unknown preset {s:?} (fixed|random|desk)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub preset: Preset,
    pub seed: u64,
    pub gen: GenConfig,
    pub chimera_m: usize,
    pub solve: SolveConfig,
    pub train_fraction: f64,
    pub exclude_features: Vec<String>,
}

impl PipelineConfig {
    pub fn preset(preset: Preset, seed: u64) -> Self {
        let (count, n_min, n_max, m, reads, regime) = match preset {
            Preset::Fixed => (1000, 20, 64, 16, 1000, Regime::FIXED),
            Preset::Random => (1000, 20, 64, 16, 1000, Regime::RANDOM),
            Preset::Desk => (2000, 10, 32, 8, 100, Regime::FIXED),
        };
        let mut cfg = PipelineConfig {
            preset,
            seed,
            gen: GenConfig {
                count,
                n_min,
                n_max,
                ..GenConfig::default()
            },
            chimera_m: m,
            solve: SolveConfig {
                regime,
                num_reads: reads,
                ..SolveConfig::default()
            },
            train_fraction: 0.9,
            exclude_features: Vec::new(),
        };
        cfg.set_seed(seed);
        cfg
    }

    /// Propagates the master seed to every stage.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.gen.seed = seed;
        self.solve.seed = seed;
    }

    fn train_config(&self, task: Task) -> TrainConfig {
        TrainConfig {
            train_fraction: self.train_fraction,
            exclude_features: self.exclude_features.clone(),
            ..TrainConfig::new(task, self.seed)
        }
    }
}

/// Files written by one pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineArtifacts {
    pub graphs: PathBuf,
    pub embedding: PathBuf,
    pub results: PathBuf,
    pub dataset: PathBuf,
    pub models: Vec<PathBuf>,
    pub reports: Vec<PathBuf>,
    pub rendered: Vec<PathBuf>,
    pub classification: EvalReport,
    pub regression: EvalReport,
}

pub fn write_graphs(path: &Path, graphs: &[GraphRecord], cfg: &GenConfig) -> Result<()> {
    write_jsonl(path, graphs)?;
    write_meta(
        path,
        &ArtifactMeta::new("graphs", Some(cfg.seed), cfg, &[], graphs.len())?,
    )
}

pub fn read_graphs(path: &Path) -> Result<Vec<GraphRecord>> {
    read_jsonl(path)
}

pub fn write_embedding(path: &Path, emb: &Embedding, source: Option<&Path>) -> Result<()> {
    emb.write(path)?;
    let inputs: Vec<&Path> = source.into_iter().collect();
    let config = serde_json::json!({ "chimera_m": emb.chimera_m, "chains": emb.capacity() });
    write_meta(
        path,
        &ArtifactMeta::new("embedding", None, config, &inputs, emb.capacity())?,
    )
}

pub fn write_results(
    path: &Path,
    results: &[ResultRecord],
    cfg: &SolveConfig,
    inputs: &[&Path],
) -> Result<()> {
    write_jsonl(path, results)?;
    write_meta(
        path,
        &ArtifactMeta::new(
            "results",
            Some(cfg.seed),
            (RESULT_FORMAT, cfg),
            inputs,
            results.len(),
        )?,
    )
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    read_jsonl(path)
}

pub fn write_dataset_with_meta(
    path: &Path,
    records: &[FeatureRecord],
    seed: Option<u64>,
    config: impl Serialize,
    inputs: &[&Path],
) -> Result<()> {
    write_dataset(path, records)?;
    write_meta(
        path,
        &ArtifactMeta::new("dataset", seed, config, inputs, records.len())?,
    )
}

pub fn load_dataset(path: &Path) -> Result<Vec<FeatureRecord>> {
    read_dataset(path)
}

/// Trains one task and writes `<task>.model.json` and `<task>.report.json`.
pub fn train_and_write(
    records: &[FeatureRecord],
    cfg: &TrainConfig,
    dataset: &Path,
    dir: &Path,
) -> Result<(PathBuf, PathBuf, ModelDocument, EvalReport)> {
    let (doc, report) = train(records, cfg, &[dataset])?;
    let task = cfg.task.name();
    let model_path = dir.join(format!("{task}.model.json"));
    let report_path = dir.join(format!("{task}.report.json"));
    write_json(&model_path, &doc)?;
    write_json(&report_path, &report)?;
    Ok((model_path, report_path, doc, report))
}

/// gen → embed → solve → featurize → train (both tasks) → report, all under `out`.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    embedding_file: Option<&Path>,
    out: &Path,
) -> Result<PipelineArtifacts> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let graphs_path = out.join("graphs.jsonl");
    let embedding_path = out.join("embedding.json");
    let results_path = out.join("results.jsonl");
    let dataset_path = out.join("dataset.csv");

    let graphs = generate(&cfg.gen)?;
    write_graphs(&graphs_path, &graphs, &cfg.gen)?;

    let emb = resolve_embedding(embedding_file, cfg.chimera_m)?;
    write_embedding(&embedding_path, &emb, embedding_file)?;

    let results = solve(&graphs, &emb, &cfg.solve)?;
    write_results(
        &results_path,
        &results,
        &cfg.solve,
        &[&graphs_path, &embedding_path],
    )?;

    let records = featurize(&graphs, &results, &emb)?;
    write_dataset_with_meta(
        &dataset_path,
        &records,
        Some(cfg.seed),
        cfg,
        &[&graphs_path, &results_path, &embedding_path],
    )?;

    let mut models = Vec::new();
    let mut reports = Vec::new();
    let mut rendered = Vec::new();
    let mut evals = Vec::new();
    for task in [Task::Classify, Task::Regress] {
        let (m, r, doc, report) =
            train_and_write(&records, &cfg.train_config(task), &dataset_path, out)?;
        rendered.extend(write_report_files(&doc, &report, out)?);
        models.push(m);
        reports.push(r);
        evals.push(report);
    }
    let regression = evals.pop().expect("two tasks");
    let classification = evals.pop().expect("two tasks");
    Ok(PipelineArtifacts {
        graphs: graphs_path,
        embedding: embedding_path,
        results: results_path,
        dataset: dataset_path,
        models,
        reports,
        rendered,
        classification,
        regression,
    })
}
