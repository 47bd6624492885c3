//! Annealer backends, majority-vote unembedding and read evaluation.
//!
//! [`SimulatedAnnealer`] is the reference backend: Metropolis single-spin-flip
//! sweeps over the embedded spin model with a geometric inverse-temperature
//! schedule. Reads are seeded individually so results do not depend on
//! thread scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chimera::EmbeddedProblem;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::oracle::is_clique;
use crate::seed::{self, stream};

pub const DEFAULT_NUM_READS: usize = 1000;
pub const MAX_ANNEALING_TIME: f64 = 2000.0;

#[derive(Debug, Clone, Copy)]
pub struct AnnealRequest<'a> {
    pub problem: &'a EmbeddedProblem,
    pub num_reads: usize,
    /// Microseconds, in `[1, 2000]`.
    pub annealing_time: f64,
    pub seed: u64,
}

impl AnnealRequest<'_> {
    fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return Err(Error::InvalidArgument(
                "num_reads must be at least 1".into(),
            ));
        }
        if !(1.0..=MAX_ANNEALING_TIME).contains(&self.annealing_time) {
            return Err(Error::InvalidArgument(format!(
                "annealing time {} outside [1, {MAX_ANNEALING_TIME}]",
                self.annealing_time
            )));
        }
        if self.problem.qubits.is_empty() {
            return Err(Error::InvalidArgument(
                "embedded problem has no qubits".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalRead {
    pub spins: Vec<i8>,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalRead {
    pub bits: Vec<u8>,
    pub broken_chains: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadSet {
    pub reads: Vec<PhysicalRead>,
    pub logical_reads: Vec<LogicalRead>,
}

impl ReadSet {
    pub fn min_energy(&self) -> f64 {
        self.reads
            .iter()
            .map(|r| r.energy)
            .fold(f64::INFINITY, f64::min)
    }

    /// Fraction of (read, chain) pairs whose chain was broken.
    pub fn broken_chain_rate(&self) -> f64 {
        let chains: usize = self.logical_reads.iter().map(|r| r.bits.len()).sum();
        if chains == 0 {
            return 0.0;
        }
        let broken: usize = self.logical_reads.iter().map(|r| r.broken_chains).sum();
        broken as f64 / chains as f64
    }
}

/// Source of physical spin samples for an embedded problem.
pub trait AnnealBackend: Send + Sync {
    /// Identifier including the configuration that shapes the samples.
    fn descriptor(&self) -> String;

    /// One physical read per request read, in read-index order.
    fn sample_physical(&self, req: &AnnealRequest<'_>) -> Result<Vec<PhysicalRead>>;
}

/// Samples through `backend` and unembeds every read by majority vote.
pub fn sample(backend: &dyn AnnealBackend, req: &AnnealRequest<'_>) -> Result<ReadSet> {
    req.validate()?;
    let reads = backend.sample_physical(req)?;
    if reads.len() != req.num_reads {
        return Err(Error::Integrity(format!(
            "backend returned {} reads, {} requested",
            reads.len(),
            req.num_reads
        )));
    }
    let logical_reads = reads
        .iter()
        .enumerate()
        .map(|(r, read)| {
            let tie_seed = seed::derive(req.seed, &[stream::TIE, r as u64]);
            unembed_majority_vote(&read.spins, &req.problem.chains, tie_seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReadSet {
        reads,
        logical_reads,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulatedAnnealer {
    pub beta_min: f64,
    pub beta_max: f64,
    /// Sweeps per microsecond of requested annealing time.
    pub sweeps_per_unit: f64,
}

impl Default for SimulatedAnnealer {
    fn default() -> Self {
        SimulatedAnnealer {
            beta_min: 0.1,
            beta_max: 10.0,
            sweeps_per_unit: 1.0,
        }
    }
}

/// Compressed neighbour lists of a spin model.
struct Couplings {
    start: Vec<usize>,
    target: Vec<usize>,
    weight: Vec<f64>,
}

impl Couplings {
    fn new(problem: &EmbeddedProblem) -> Self {
        let n = problem.model.num_vars();
        let mut lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(i, j), &c) in problem.model.quadratic() {
            lists[i].push((j, c));
            lists[j].push((i, c));
        }
        let mut start = Vec::with_capacity(n + 1);
        let (mut target, mut weight) = (Vec::new(), Vec::new());
        start.push(0);
        for list in lists {
            for (j, c) in list {
                target.push(j);
                weight.push(c);
            }
            start.push(target.len());
        }
        Couplings {
            start,
            target,
            weight,
        }
    }
}

impl SimulatedAnnealer {
    pub fn new(beta_min: f64, beta_max: f64, sweeps_per_unit: f64) -> Result<Self> {
        if !(beta_min > 0.0 && beta_max >= beta_min && sweeps_per_unit > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < beta_min <= beta_max and sweeps_per_unit > 0, got {beta_min}, {beta_max}, {sweeps_per_unit}"
            )));
        }
        Ok(SimulatedAnnealer {
            beta_min,
            beta_max,
            sweeps_per_unit,
        })
    }

    pub fn num_sweeps(&self, annealing_time: f64) -> usize {
        ((annealing_time * self.sweeps_per_unit).round() as usize).max(1)
    }

    /// Geometric schedule ending at `beta_max`.
    pub fn schedule(&self, sweeps: usize) -> Vec<f64> {
        if sweeps == 1 {
            return vec![self.beta_max];
        }
        let ratio = (self.beta_max / self.beta_min).ln() / (sweeps - 1) as f64;
        (0..sweeps)
            .map(|s| self.beta_min * (ratio * s as f64).exp())
            .collect()
    }

    fn anneal_one(
        &self,
        problem: &EmbeddedProblem,
        couplings: &Couplings,
        schedule: &[f64],
        read_seed: u64,
    ) -> PhysicalRead {
        let h = problem.model.linear();
        let n = h.len();
        let mut rng = seed::rng(read_seed);
        let mut spins: Vec<i8> = (0..n)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        // field[i] = h_i + Σ_j J_ij s_j, kept current across flips
        let mut field: Vec<f64> = (0..n)
            .map(|i| {
                let mut f = h[i];
                for k in couplings.start[i]..couplings.start[i + 1] {
                    f += couplings.weight[k] * f64::from(spins[couplings.target[k]]);
                }
                f
            })
            .collect();
        for &beta in schedule {
            for i in 0..n {
                let delta = -2.0 * f64::from(spins[i]) * field[i];
                // exp(-40) is below the resolution of a uniform f64 draw
                let accept = delta <= 0.0
                    || (beta * delta < 40.0 && rng.random::<f64>() < (-beta * delta).exp());
                if accept {
                    spins[i] = -spins[i];
                    let change = 2.0 * f64::from(spins[i]);
                    for k in couplings.start[i]..couplings.start[i + 1] {
                        field[couplings.target[k]] += couplings.weight[k] * change;
                    }
                }
            }
        }
        let energy = problem.model.energy_unchecked(&spins);
        PhysicalRead { spins, energy }
    }
}

impl AnnealBackend for SimulatedAnnealer {
    fn descriptor(&self) -> String {
        format!(
            "simulated-annealing:beta_min={},beta_max={},sweeps_per_unit={}",
            self.beta_min, self.beta_max, self.sweeps_per_unit
        )
    }

    fn sample_physical(&self, req: &AnnealRequest<'_>) -> Result<Vec<PhysicalRead>> {
        req.validate()?;
        let couplings = Couplings::new(req.problem);
        let schedule = self.schedule(self.num_sweeps(req.annealing_time));
        Ok((0..req.num_reads)
            .into_par_iter()
            .map(|r| {
                let read_seed = seed::derive(req.seed, &[stream::READ, r as u64]);
                self.anneal_one(req.problem, &couplings, &schedule, read_seed)
            })
            .collect())
    }
}

/// Resolves each chain to its majority spin (`+1 → 1`, `−1 → 0`); a balanced
/// chain gets a fair coin flip drawn from `tie_seed`.
pub fn unembed_majority_vote(
    physical: &[i8],
    chains: &[Vec<usize>],
    tie_seed: u64,
) -> Result<LogicalRead> {
    let mut coin = None;
    let mut bits = Vec::with_capacity(chains.len());
    let mut broken_chains = 0;
    for (i, chain) in chains.iter().enumerate() {
        if chain.is_empty() {
            return Err(Error::EmptyChain(i));
        }
        let mut sum = 0i64;
        for &q in chain {
            let s = *physical.get(q).ok_or(Error::VertexOutOfRange {
                vertex: q,
                n: physical.len(),
            })?;
            sum += i64::from(s);
        }
        if sum.unsigned_abs() as usize != chain.len() {
            broken_chains += 1;
        }
        let bit = match sum.signum() {
            1 => 1,
            -1 => 0,
            _ => {
                let rng = coin.get_or_insert_with(|| seed::rng(tie_seed));
                u8::from(rng.random::<bool>())
            }
        };
        bits.push(bit);
    }
    Ok(LogicalRead {
        bits,
        broken_chains,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    /// Largest valid clique over all reads.
    #[default]
    LargestValid,
    /// Only the first lowest-energy read counts.
    LowestEnergy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnealOutcome {
    pub best_clique_size: usize,
    pub best_assignment: Option<Vec<u8>>,
    pub reads_with_valid_clique: usize,
}

/// A read is valid when its selected vertices form a non-empty clique of `g`.
pub fn evaluate_reads(rs: &ReadSet, g: &Graph, mode: SelectionMode) -> Result<AnnealOutcome> {
    let n = g.num_vertices();
    let mut valid_sizes = Vec::with_capacity(rs.logical_reads.len());
    for read in &rs.logical_reads {
        if read.bits.len() != n {
            return Err(Error::InvalidArgument(format!(
                "logical read has {} bits, graph has {n} vertices",
                read.bits.len()
            )));
        }
        let selected: Vec<usize> = (0..n).filter(|&i| read.bits[i] == 1).collect();
        let valid = !selected.is_empty() && is_clique(g, &selected)?;
        valid_sizes.push(valid.then_some(selected.len()));
    }
    let reads_with_valid_clique = valid_sizes.iter().flatten().count();
    let best = match mode {
        SelectionMode::LargestValid => valid_sizes
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| (s, i)))
            // largest size, earliest read on ties
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1))),
        SelectionMode::LowestEnergy => rs
            .reads
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.energy.total_cmp(&b.1.energy).then(a.0.cmp(&b.0)))
            .and_then(|(i, _)| valid_sizes[i].map(|s| (s, i))),
    };
    Ok(match best {
        Some((size, i)) => AnnealOutcome {
            best_clique_size: size,
            best_assignment: Some(rs.logical_reads[i].bits.clone()),
            reads_with_valid_clique,
        },
        None => AnnealOutcome {
            best_clique_size: 0,
            best_assignment: None,
            reads_with_valid_clique,
        },
    })
}
