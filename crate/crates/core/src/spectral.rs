//! Extremal adjacency eigenvalues and the spectral gap.
//!
//! Graphs up to [`DENSE_LIMIT`] vertices use a dense symmetric
//! eigendecomposition. Larger graphs use a block Krylov subspace with full
//! reorthogonalisation and Rayleigh–Ritz extraction; the block width covers
//! repeated eigenvalues among the requested ones.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;

/// Number of largest eigenvalues kept as features.
pub const NUM_LARGEST: usize = 5;

/// Largest vertex count handled by the dense solver.
pub const DENSE_LIMIT: usize = 1500;

const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    /// Dense up to [`DENSE_LIMIT`] vertices, iterative beyond.
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// Algebraically largest eigenvalues in descending order. Entries past the
    /// vertex count are padded with 0.
    pub largest: Vec<f64>,
    /// How many entries of `largest` are genuine eigenvalues.
    pub available: usize,
    pub smallest: f64,
}

impl SpectralSummary {
    /// `|λ1| − |λ2|` over the two algebraically largest eigenvalues.
    pub fn spectral_gap(&self) -> Result<f64> {
        spectral_gap(self)
    }
}

pub fn spectral_gap(s: &SpectralSummary) -> Result<f64> {
    if s.available < 2 {
        return Err(Error::InvalidArgument(format!(
            "spectral gap needs two eigenvalues, summary has {}",
            s.available
        )));
    }
    Ok(s.largest[0].abs() - s.largest[1].abs())
}

pub fn extremal_eigenvalues(g: &Graph, k: usize) -> Result<SpectralSummary> {
    extremal_eigenvalues_with(g, k, Solver::Auto)
}

pub fn extremal_eigenvalues_with(g: &Graph, k: usize, solver: Solver) -> Result<SpectralSummary> {
    let n = g.num_vertices();
    if n == 0 {
        return Err(Error::InvalidArgument("graph has no vertices".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let want = k.min(n);
    let dense = match solver {
        Solver::Auto => n <= DENSE_LIMIT,
        Solver::Dense => true,
        Solver::Iterative => false,
    };
    let (mut largest, smallest) = if dense {
        dense_extremes(g, want)?
    } else {
        krylov_extremes(g, want)?
    };
    largest.resize(k, 0.0);
    Ok(SpectralSummary {
        largest,
        available: want,
        smallest,
    })
}

pub fn adjacency_matrix(g: &Graph) -> DMatrix<f64> {
    let n = g.num_vertices();
    let mut a = DMatrix::zeros(n, n);
    for &(u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    a
}

fn dense_extremes(g: &Graph, want: usize) -> Result<(Vec<f64>, f64)> {
    let n = g.num_vertices();
    let eig = SymmetricEigen::try_new(adjacency_matrix(g), f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::NoConvergence(format!("dense solver on {n} vertices")))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let smallest = values[n - 1];
    values.truncate(want);
    Ok((values, smallest))
}

fn spmv(g: &Graph, x: &[f64], y: &mut [f64]) {
    for (v, out) in y.iter_mut().enumerate() {
        *out = g.neighbors(v).iter().map(|&w| x[w]).sum();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthogonalises `v` against `basis` twice and normalises; `None` if `v`
/// lies (numerically) in the span.
fn orthonormalize(basis: &[Vec<f64>], mut v: Vec<f64>) -> Option<Vec<f64>> {
    let before = dot(&v, &v).sqrt();
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &v);
            v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
        }
    }
    let norm = dot(&v, &v).sqrt();
    if norm <= 1e-10 * before.max(1e-300) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

fn krylov_extremes(g: &Graph, want: usize) -> Result<(Vec<f64>, f64)> {
    let n = g.num_vertices();
    let block = want + 2;
    let max_dim = n.min(600.max(8 * block));
    let mut rng = seed::rng(0x5eed_1a2c);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut frontier: Vec<Vec<f64>> = Vec::new();
    for _ in 0..block.min(n) {
        let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        if let Some(q) = orthonormalize(&basis, v) {
            basis.push(q.clone());
            frontier.push(q);
        }
    }

    loop {
        for q in &basis[images.len()..] {
            let mut y = vec![0.0; n];
            spmv(g, q, &mut y);
            images.push(y);
        }
        let dim = basis.len();
        let h = DMatrix::from_fn(dim, dim, |i, j| dot(&basis[i], &images[j]));
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, 100 * dim.max(10))
            .ok_or_else(|| Error::NoConvergence("Rayleigh–Ritz projection".into()))?;
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let mut wanted: Vec<usize> = order.iter().copied().take(want).collect();
        wanted.push(order[dim - 1]);
        let converged = dim == n
            || wanted.iter().all(|&c| {
                let theta = eig.eigenvalues[c];
                let y = eig.eigenvectors.column(c);
                let mut r = vec![0.0; n];
                for (j, coef) in y.iter().enumerate() {
                    for i in 0..n {
                        r[i] += coef * (images[j][i] - theta * basis[j][i]);
                    }
                }
                dot(&r, &r).sqrt() <= RESIDUAL_TOL * theta.abs().max(1.0)
            });
        if converged {
            let largest = order
                .iter()
                .take(want)
                .map(|&c| eig.eigenvalues[c])
                .collect();
            return Ok((largest, eig.eigenvalues[order[dim - 1]]));
        }
        if dim >= max_dim {
            return Err(Error::NoConvergence(format!(
                "block Krylov subspace reached {dim} vectors on {n} vertices"
            )));
        }

        let start = dim - frontier.len();
        let mut next = Vec::new();
        for j in start..dim {
            if basis.len() >= max_dim {
                break;
            }
            if let Some(q) = orthonormalize(&basis, images[j].clone()) {
                basis.push(q.clone());
                next.push(q);
            }
        }
        if next.is_empty() {
            // invariant subspace found; restart with a fresh random direction
            let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            match orthonormalize(&basis, v) {
                Some(q) => {
                    basis.push(q.clone());
                    next.push(q);
                }
                None => {
                    return Err(Error::NoConvergence("basis exhausted".into()));
                }
            }
        }
        frontier = next;
    }
}
