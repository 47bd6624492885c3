//! The 46-feature instance description, dataset files and the train/test split.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::anneal::AnnealOutcome;
use crate::chimera::{embedded_graph, EmbeddedProblem};
use crate::error::{Error, Result};
use crate::graph::{graph_stats, Graph};
use crate::qubo::ProblemBundle;
use crate::seed::{self, stream};
use crate::spectral::{extremal_eigenvalues, NUM_LARGEST};

pub const NUM_FEATURES: usize = 46;

macro_rules! role_features {
    ($r:literal) => {
        [
            concat!($r, "_density"),
            concat!($r, "_min_degree"),
            concat!($r, "_max_degree"),
            concat!($r, "_mean_degree"),
            concat!($r, "_num_nodes"),
            concat!($r, "_num_edges"),
            concat!($r, "_largest_eigenvalue"),
            concat!($r, "_2nd_largest_eigenvalue"),
            concat!($r, "_3rd_largest_eigenvalue"),
            concat!($r, "_4th_largest_eigenvalue"),
            concat!($r, "_5th_largest_eigenvalue"),
            concat!($r, "_smallest_eigenvalue"),
            concat!($r, "_spectral_gap"),
        ]
    };
}

const PER_ROLE: usize = 13;
const INPUT: [&str; PER_ROLE] = role_features!("input");
const UNEMBEDDED: [&str; PER_ROLE] = role_features!("unembedded");
const EMBEDDED: [&str; PER_ROLE] = role_features!("embedded");
const TAIL: [&str; 7] = [
    "input_num_triangles",
    "unembedded_num_triangles",
    "min_chain_length",
    "max_chain_length",
    "avg_chain_length",
    "chain_strength",
    "annealing_time",
];

/// Canonical feature names in column order.
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = {
    let mut out = [""; NUM_FEATURES];
    let mut i = 0;
    while i < PER_ROLE {
        out[i] = INPUT[i];
        out[PER_ROLE + i] = UNEMBEDDED[i];
        out[2 * PER_ROLE + i] = EMBEDDED[i];
        i += 1;
    }
    let mut j = 0;
    while j < TAIL.len() {
        out[3 * PER_ROLE + j] = TAIL[j];
        j += 1;
    }
    out
};

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|&n| n == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Features(#[serde(with = "feature_array")] pub [f64; NUM_FEATURES]);

mod feature_array {
    use super::NUM_FEATURES;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64; NUM_FEATURES], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; NUM_FEATURES], D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        v.try_into()
            .map_err(|v: Vec<f64>| D::Error::invalid_length(v.len(), &"46 features"))
    }
}

impl Features {
    pub fn get(&self, name: &str) -> Result<f64> {
        feature_index(name)
            .map(|i| self.0[i])
            .ok_or_else(|| Error::MissingFeature(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        FEATURE_NAMES.iter().copied().zip(self.0.iter().copied())
    }
}

fn role_block(g: &Graph) -> Result<[f64; PER_ROLE]> {
    let st = graph_stats(g);
    let sp = extremal_eigenvalues(g, NUM_LARGEST)?;
    let l = &sp.largest;
    Ok([
        st.density,
        st.min_degree as f64,
        st.max_degree as f64,
        st.mean_degree,
        st.num_nodes as f64,
        st.num_edges as f64,
        l[0],
        l[1],
        l[2],
        l[3],
        l[4],
        sp.smallest,
        // with a single vertex the padded second eigenvalue is 0
        l[0].abs() - l[1].abs(),
    ])
}

/// Computes every feature for one instance. The embedded role is measured on
/// the subgraph of hardware the embedded problem actually uses.
pub fn extract_features(
    g: &Graph,
    bundle: &ProblemBundle,
    ep: &EmbeddedProblem,
    annealing_time: f64,
) -> Result<Features> {
    if bundle.input_graph != *g || ep.logical_count != g.num_vertices() {
        return Err(Error::Integrity(
            "bundle or embedded problem not derived from graph".into(),
        ));
    }
    let mut out = [0.0; NUM_FEATURES];
    out[..PER_ROLE].copy_from_slice(&role_block(g)?);
    out[PER_ROLE..2 * PER_ROLE].copy_from_slice(&role_block(&bundle.unembedded_graph)?);
    out[2 * PER_ROLE..3 * PER_ROLE].copy_from_slice(&role_block(&embedded_graph(ep))?);

    let lengths = ep.chain_lengths();
    let tail = [
        graph_stats(g).num_triangles as f64,
        graph_stats(&bundle.unembedded_graph).num_triangles as f64,
        lengths.iter().copied().min().unwrap_or(0) as f64,
        lengths.iter().copied().max().unwrap_or(0) as f64,
        if lengths.is_empty() {
            0.0
        } else {
            lengths.iter().sum::<usize>() as f64 / lengths.len() as f64
        },
        ep.chain_strength,
        annealing_time,
    ];
    out[3 * PER_ROLE..].copy_from_slice(&tail);
    Ok(Features(out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub graph_id: u64,
    pub features: Features,
    pub solvable: bool,
    /// Regression target: largest valid clique found, 0 if none.
    pub annealer_clique_size: usize,
    pub exact_clique_size: usize,
}

pub fn assemble_record(
    graph_id: u64,
    outcome: &AnnealOutcome,
    exact: usize,
    features: Features,
) -> Result<FeatureRecord> {
    if exact < outcome.best_clique_size {
        return Err(Error::Integrity(format!(
            "graph {graph_id}: annealer clique {} exceeds exact maximum {exact}",
            outcome.best_clique_size
        )));
    }
    Ok(FeatureRecord {
        graph_id,
        features,
        solvable: outcome.best_clique_size == exact,
        annealer_clique_size: outcome.best_clique_size,
        exact_clique_size: exact,
    })
}

const LABEL_COLUMNS: [&str; 3] = ["solvable", "annealer_clique_size", "exact_clique_size"];

pub fn dataset_header() -> Vec<&'static str> {
    std::iter::once("graph_id")
        .chain(FEATURE_NAMES)
        .chain(LABEL_COLUMNS)
        .collect()
}

/// Decimal with 17 significant digits; parses back to the same bits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_dataset_to<W: Write>(w: W, records: &[FeatureRecord]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(dataset_header())?;
    for r in records {
        let mut row = Vec::with_capacity(NUM_FEATURES + 4);
        row.push(r.graph_id.to_string());
        row.extend(r.features.0.iter().map(|&x| format_f64(x)));
        row.push(u8::from(r.solvable).to_string());
        row.push(r.annealer_clique_size.to_string());
        row.push(r.exact_clique_size.to_string());
        csv.write_record(&row)?;
    }
    csv.flush().map_err(|e| Error::io("<dataset>", e))?;
    Ok(())
}

pub fn read_dataset_from<R: Read>(r: R, source: &str) -> Result<Vec<FeatureRecord>> {
    let mut csv = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut rows = csv.records();
    let header = match rows.next() {
        Some(h) => h?,
        None => {
            return Err(Error::Schema {
                path: source.into(),
                msg: "missing header row".into(),
            })
        }
    };
    let expected = dataset_header();
    if header.len() != expected.len() || header.iter().zip(&expected).any(|(a, b)| a != *b) {
        return Err(Error::Schema {
            path: source.into(),
            msg: format!(
                "header has {} columns, expected {} in canonical order",
                header.len(),
                expected.len()
            ),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rows.enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Malformed {
            line,
            msg: e.to_string(),
        })?;
        let bad = |msg: String| Error::Malformed { line, msg };
        if row.len() != expected.len() {
            return Err(bad(format!(
                "{} fields, expected {}",
                row.len(),
                expected.len()
            )));
        }
        let graph_id = row[0]
            .parse::<u64>()
            .map_err(|e| bad(format!("graph_id: {e}")))?;
        let mut features = [0.0; NUM_FEATURES];
        for (k, slot) in features.iter_mut().enumerate() {
            *slot = row[k + 1]
                .parse::<f64>()
                .map_err(|e| bad(format!("{}: {e}", FEATURE_NAMES[k])))?;
        }
        let tail = NUM_FEATURES + 1;
        let solvable = match &row[tail] {
            "0" => false,
            "1" => true,
            other => return Err(bad(format!("solvable must be 0 or 1, got {other:?}"))),
        };
        let int = |k: usize| {
            row[tail + k]
                .parse::<usize>()
                .map_err(|e| bad(format!("{}: {e}", LABEL_COLUMNS[k])))
        };
        out.push(FeatureRecord {
            graph_id,
            features: Features(features),
            solvable,
            annealer_clique_size: int(1)?,
            exact_clique_size: int(2)?,
        });
    }
    Ok(out)
}

pub fn write_dataset(path: &Path, records: &[FeatureRecord]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset_to(std::io::BufWriter::new(file), records)
}

pub fn read_dataset(path: &Path) -> Result<Vec<FeatureRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset_from(std::io::BufReader::new(file), &path.display().to_string())
}

/// Seeded uniform shuffle, then the first `⌊train_fraction · n⌋` records go to
/// training. Both parts keep the input order.
pub fn split_train_test<T: Clone>(
    records: &[T],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} not in (0, 1)"
        )));
    }
    let n = records.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("cannot split {n} records")));
    }
    let train_len = ((train_fraction * n as f64 + 1e-9).floor() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed::derive(seed, &[stream::SPLIT])));
    let (train_idx, test_idx) = order.split_at_mut(train_len);
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((
        train_idx.iter().map(|&i| records[i].clone()).collect(),
        test_idx.iter().map(|&i| records[i].clone()).collect(),
    ))
}
