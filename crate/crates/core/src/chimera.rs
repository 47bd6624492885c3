//! Ideal Chimera topology, the fixed clique embedding, chain strength and the
//! embedded spin model.
//!
//! Qubit ids follow `8 * (row * m + col) + 4 * side + offset`, where side 0 is
//! the vertical half of a unit cell and side 1 the horizontal half.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::qubo::{QuadraticModel, VarSpace};

/// Grid size whose staircase embedding holds `K_64`.
pub const DEFAULT_M: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChimeraSpec {
    m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitCoord {
    pub row: usize,
    pub col: usize,
    pub side: usize,
    pub offset: usize,
}

pub fn build_chimera(m: usize) -> Result<ChimeraSpec> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "Chimera grid size must be at least 1".into(),
        ));
    }
    Ok(ChimeraSpec { m })
}

impl ChimeraSpec {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn num_qubits(&self) -> usize {
        8 * self.m * self.m
    }

    pub fn qubit(&self, c: QubitCoord) -> usize {
        8 * (c.row * self.m + c.col) + 4 * c.side + c.offset
    }

    pub fn coord(&self, q: usize) -> QubitCoord {
        let cell = q / 8;
        QubitCoord {
            row: cell / self.m,
            col: cell % self.m,
            side: (q % 8) / 4,
            offset: q % 4,
        }
    }

    /// Neighbours of `q` in ascending id order.
    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        let c = self.coord(q);
        let mut out = Vec::with_capacity(6);
        for k in 0..4 {
            out.push(self.qubit(QubitCoord {
                side: 1 - c.side,
                offset: k,
                ..c
            }));
        }
        let (r, col) = (c.row as isize, c.col as isize);
        let steps: [(isize, isize); 2] = if c.side == 0 {
            [(r - 1, col), (r + 1, col)]
        } else {
            [(r, col - 1), (r, col + 1)]
        };
        for (rr, cc) in steps {
            if rr >= 0 && cc >= 0 && (rr as usize) < self.m && (cc as usize) < self.m {
                out.push(self.qubit(QubitCoord {
                    row: rr as usize,
                    col: cc as usize,
                    ..c
                }));
            }
        }
        out.sort_unstable();
        out
    }

    pub fn is_coupler(&self, a: usize, b: usize) -> bool {
        let n = self.num_qubits();
        if a >= n || b >= n || a == b {
            return false;
        }
        let (ca, cb) = (self.coord(a), self.coord(b));
        if ca.row == cb.row && ca.col == cb.col {
            return ca.side != cb.side;
        }
        if ca.side != cb.side || ca.offset != cb.offset {
            return false;
        }
        if ca.side == 0 {
            ca.col == cb.col && ca.row.abs_diff(cb.row) == 1
        } else {
            ca.row == cb.row && ca.col.abs_diff(cb.col) == 1
        }
    }

    /// All couplers `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(16 * self.m * self.m + 8 * self.m * (self.m - 1));
        for a in 0..self.num_qubits() {
            out.extend(
                self.neighbors(a)
                    .into_iter()
                    .filter(|&b| b > a)
                    .map(|b| (a, b)),
            );
        }
        out
    }

    pub fn graph(&self) -> Graph {
        Graph::from_canonical(self.num_qubits(), self.edges())
    }
}

/// Logical vertex `i` is represented by the qubits in `chains[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub chimera_m: usize,
    pub chains: Vec<Vec<usize>>,
}

impl Embedding {
    pub fn spec(&self) -> Result<ChimeraSpec> {
        build_chimera(self.chimera_m)
    }

    pub fn capacity(&self) -> usize {
        self.chains.len()
    }

    pub fn truncated(&self, k: usize) -> Embedding {
        Embedding {
            chimera_m: self.chimera_m,
            chains: self.chains[..k.min(self.chains.len())].to_vec(),
        }
    }

    /// Chain index owning each qubit, if any.
    fn owners(&self, spec: &ChimeraSpec) -> Vec<Option<usize>> {
        let mut owner = vec![None; spec.num_qubits()];
        for (i, chain) in self.chains.iter().enumerate() {
            for &q in chain {
                if q < owner.len() {
                    owner[q] = Some(i);
                }
            }
        }
        owner
    }

    /// Physical couplers between chains `i` and `j`, as sorted `(a, b)` pairs.
    pub fn couplers_between(&self, i: usize, j: usize) -> Result<Vec<(usize, usize)>> {
        let spec = self.spec()?;
        let owner = self.owners(&spec);
        Ok(couplers_between(&spec, &owner, &self.chains[i], j))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// Reads an embedding file and checks it against the complete graph on its
    /// chain count.
    pub fn load(path: &Path) -> Result<Embedding> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let emb: Embedding = serde_json::from_str(&text).map_err(|e| Error::Schema {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        let spec = emb.spec()?;
        let report = validate_embedding(&spec, &emb, &Graph::complete(emb.chains.len()));
        if !report.is_valid() {
            return Err(Error::InvalidEmbedding(format!(
                "{}: {:?}",
                path.display(),
                report.violations
            )));
        }
        Ok(emb)
    }
}

fn couplers_between(
    spec: &ChimeraSpec,
    owner: &[Option<usize>],
    chain: &[usize],
    other: usize,
) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = chain
        .iter()
        .flat_map(|&a| {
            spec.neighbors(a)
                .into_iter()
                .filter(move |&b| owner[b] == Some(other))
                .map(move |b| (a.min(b), a.max(b)))
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Clique embedding along the grid diagonal.
///
/// Logical vertex `4t + j` runs up column `t` on the vertical qubits with
/// offset `j` (rows `0..=t`), then right along row `t` on the horizontal
/// qubits with offset `j` (columns `t..m`). Every chain has `m + 1` qubits.
pub fn staircase_clique_embedding(spec: &ChimeraSpec, k: usize) -> Result<Embedding> {
    let m = spec.m();
    if k == 0 || k > 4 * m {
        return Err(Error::Capacity {
            requested: k,
            capacity: 4 * m,
        });
    }
    let chains = (0..k)
        .map(|v| {
            let (t, j) = (v / 4, v % 4);
            let vertical = (0..=t).map(move |r| QubitCoord {
                row: r,
                col: t,
                side: 0,
                offset: j,
            });
            let horizontal = (t..m).map(move |c| QubitCoord {
                row: t,
                col: c,
                side: 1,
                offset: j,
            });
            let mut chain: Vec<usize> = vertical.chain(horizontal).map(|c| spec.qubit(c)).collect();
            chain.sort_unstable();
            chain
        })
        .collect();
    Ok(Embedding {
        chimera_m: m,
        chains,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    InvalidQubit {
        chain: usize,
        qubit: usize,
    },
    EmptyChain {
        chain: usize,
    },
    Overlap {
        qubit: usize,
        chains: (usize, usize),
    },
    Disconnected {
        chain: usize,
    },
    MissingChain {
        vertex: usize,
    },
    MissingCoupler {
        edge: (usize, usize),
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks chain disjointness, chain connectivity and that every edge of `p`
/// has a coupler between the corresponding chains.
pub fn validate_embedding(spec: &ChimeraSpec, emb: &Embedding, p: &Graph) -> ValidationReport {
    let mut violations = Vec::new();
    let nq = spec.num_qubits();
    let mut owner: Vec<Option<usize>> = vec![None; nq];
    for (i, chain) in emb.chains.iter().enumerate() {
        if chain.is_empty() {
            violations.push(Violation::EmptyChain { chain: i });
        }
        for &q in chain {
            if q >= nq {
                violations.push(Violation::InvalidQubit { chain: i, qubit: q });
                continue;
            }
            match owner[q] {
                Some(prev) => violations.push(Violation::Overlap {
                    qubit: q,
                    chains: (prev, i),
                }),
                None => owner[q] = Some(i),
            }
        }
    }
    for (i, chain) in emb.chains.iter().enumerate() {
        let members: Vec<usize> = chain.iter().copied().filter(|&q| q < nq).collect();
        if members.len() > 1 && !is_connected(spec, &members) {
            violations.push(Violation::Disconnected { chain: i });
        }
    }
    for v in emb.chains.len()..p.num_vertices() {
        violations.push(Violation::MissingChain { vertex: v });
    }
    for &(u, v) in p.edges() {
        if v >= emb.chains.len() {
            continue;
        }
        if couplers_between(spec, &owner, &emb.chains[u], v).is_empty() {
            violations.push(Violation::MissingCoupler { edge: (u, v) });
        }
    }
    ValidationReport { violations }
}

fn is_connected(spec: &ChimeraSpec, members: &[usize]) -> bool {
    let mut seen = vec![false; members.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for (j, &q) in members.iter().enumerate() {
            if !seen[j] && spec.is_coupler(members[i], q) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Uniform torque compensation: `prefactor · rms(J) · sqrt(mean degree)`,
/// with degree counting stored couplings per variable. Falls back to 1 for a
/// model without couplings.
pub fn utc_chain_strength(logical_ising: &QuadraticModel, prefactor: f64) -> Result<f64> {
    if logical_ising.space() != VarSpace::Spin {
        return Err(Error::VariableSpace {
            expected: "spin",
            found: logical_ising.space().name(),
        });
    }
    if !(prefactor > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "UTC prefactor {prefactor} must be positive"
        )));
    }
    let quad = logical_ising.quadratic();
    if quad.is_empty() || logical_ising.num_vars() == 0 {
        return Ok(1.0);
    }
    let rms = (quad.values().map(|j| j * j).sum::<f64>() / quad.len() as f64).sqrt();
    let mean_degree = 2.0 * quad.len() as f64 / logical_ising.num_vars() as f64;
    Ok(prefactor * rms * mean_degree.sqrt())
}

/// Spin model on the physical qubits used by the active chains.
///
/// Physical variables are numbered densely in ascending qubit-id order;
/// `qubits[k]` is the Chimera id of variable `k`.
#[derive(Debug, Clone)]
pub struct EmbeddedProblem {
    pub model: QuadraticModel,
    pub chain_strength: f64,
    pub embedding: Embedding,
    pub logical_count: usize,
    pub qubits: Vec<usize>,
    /// Per logical variable, its chain in physical variable indices.
    pub chains: Vec<Vec<usize>>,
    /// Couplers inside chains, physical variable indices, sorted.
    pub chain_couplers: Vec<(usize, usize)>,
    /// Couplers carrying a logical coupling, physical variable indices, sorted.
    pub logical_couplers: Vec<(usize, usize)>,
}

impl EmbeddedProblem {
    /// Energy contributed by the chain couplers when every chain is aligned.
    pub fn aligned_chain_energy(&self) -> f64 {
        -self.chain_strength * self.chain_couplers.len() as f64
    }

    /// Physical assignment that copies each logical spin onto its chain.
    pub fn lift(&self, logical: &[i8]) -> Vec<i8> {
        let mut out = vec![1; self.qubits.len()];
        for (chain, &s) in self.chains.iter().zip(logical) {
            chain.iter().for_each(|&k| out[k] = s);
        }
        out
    }

    pub fn chain_lengths(&self) -> Vec<usize> {
        self.chains.iter().map(Vec::len).collect()
    }
}

pub fn embed_ising(
    logical_ising: &QuadraticModel,
    emb: &Embedding,
    chain_strength: f64,
) -> Result<EmbeddedProblem> {
    if logical_ising.space() != VarSpace::Spin {
        return Err(Error::VariableSpace {
            expected: "spin",
            found: logical_ising.space().name(),
        });
    }
    if !(chain_strength >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "chain strength {chain_strength} must be non-negative"
        )));
    }
    let n = logical_ising.num_vars();
    if n > emb.chains.len() {
        return Err(Error::Capacity {
            requested: n,
            capacity: emb.chains.len(),
        });
    }
    let spec = emb.spec()?;
    let active = emb.truncated(n);
    if let Some(i) = active.chains.iter().position(Vec::is_empty) {
        return Err(Error::EmptyChain(i));
    }
    let owner = active.owners(&spec);

    let mut qubits: Vec<usize> = active.chains.iter().flatten().copied().collect();
    qubits.sort_unstable();
    let mut local = vec![usize::MAX; spec.num_qubits()];
    for (k, &q) in qubits.iter().enumerate() {
        local[q] = k;
    }
    let chains: Vec<Vec<usize>> = active
        .chains
        .iter()
        .map(|c| {
            let mut l: Vec<usize> = c.iter().map(|&q| local[q]).collect();
            l.sort_unstable();
            l
        })
        .collect();

    let mut model = QuadraticModel::new(VarSpace::Spin, qubits.len());
    model.set_offset(logical_ising.offset());
    for (i, &h) in logical_ising.linear().iter().enumerate() {
        let share = h / chains[i].len() as f64;
        chains[i].iter().for_each(|&k| model.add_linear(k, share));
    }

    let mut chain_couplers = Vec::new();
    for (i, chain) in active.chains.iter().enumerate() {
        chain_couplers.extend(
            couplers_between(&spec, &owner, chain, i)
                .into_iter()
                .map(|(a, b)| (local[a], local[b])),
        );
    }
    chain_couplers.sort_unstable();
    for &(a, b) in &chain_couplers {
        model.add_quadratic(a, b, -chain_strength)?;
    }

    let mut logical_couplers = Vec::new();
    for (&(i, j), &value) in logical_ising.quadratic() {
        let &(a, b) = couplers_between(&spec, &owner, &active.chains[i], j)
            .first()
            .ok_or(Error::MissingCoupler(i, j))?;
        logical_couplers.push((local[a], local[b]));
        model.add_quadratic(local[a], local[b], value)?;
    }
    logical_couplers.sort_unstable();

    Ok(EmbeddedProblem {
        model,
        chain_strength,
        embedding: active,
        logical_count: n,
        qubits,
        chains,
        chain_couplers,
        logical_couplers,
    })
}

/// Graph of the hardware actually used: chain couplers plus couplers carrying
/// logical couplings, on the active qubits.
pub fn embedded_graph(ep: &EmbeddedProblem) -> Graph {
    let mut edges: Vec<(usize, usize)> = ep
        .chain_couplers
        .iter()
        .chain(&ep.logical_couplers)
        .copied()
        .collect();
    edges.sort_unstable();
    edges.dedup();
    Graph::from_canonical(ep.qubits.len(), edges)
}
