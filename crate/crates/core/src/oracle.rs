//! Exact maximum clique and clique checks.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_DEADLINE: Duration = Duration::from_secs(60);

/// Largest graph `brute_force_max_clique` will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 20;

pub fn is_clique(g: &Graph, vertices: &[usize]) -> Result<bool> {
    let n = g.num_vertices();
    if let Some(&v) = vertices.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange { vertex: v, n });
    }
    Ok(vertices.iter().enumerate().all(|(i, &u)| {
        vertices[i + 1..]
            .iter()
            .all(|&v| u == v || g.has_edge(u, v))
    }))
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn zeros(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_not(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }

    fn and_count(&self, other: &Bits) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .position(|&w| w != 0)
            .map(|wi| wi * 64 + self.0[wi].trailing_zeros() as usize)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

struct Search<'a> {
    adj: &'a [Bits],
    best: Vec<usize>,
    deadline: Instant,
    limit: Duration,
    nodes: u64,
}

impl Search<'_> {
    /// Upper bound on the clique number of `p` from a greedy colouring.
    fn colour_bound(&self, p: &Bits) -> usize {
        let mut uncoloured = p.clone();
        let mut colours = 0;
        while !uncoloured.is_empty() {
            colours += 1;
            let mut candidates = uncoloured.clone();
            while let Some(v) = candidates.first() {
                uncoloured.remove(v);
                candidates.remove(v);
                candidates = candidates.and_not(&self.adj[v]);
            }
        }
        colours
    }

    fn expand(&mut self, r: &mut Vec<usize>, mut p: Bits) -> Result<()> {
        self.nodes += 1;
        if (self.nodes == 1 || self.nodes.is_multiple_of(1024)) && Instant::now() > self.deadline {
            return Err(Error::Timeout(self.limit));
        }
        if p.is_empty() {
            if r.len() > self.best.len() {
                self.best = r.clone();
            }
            return Ok(());
        }
        if r.len() + p.count() <= self.best.len()
            || r.len() + self.colour_bound(&p) <= self.best.len()
        {
            return Ok(());
        }
        // pivot: vertex of p with most neighbours inside p
        let pivot = p
            .iter()
            .max_by_key(|&u| (p.and_count(&self.adj[u]), std::cmp::Reverse(u)))
            .expect("p is non-empty");
        let branch: Vec<usize> = p.and_not(&self.adj[pivot]).iter().collect();
        for v in branch {
            if r.len() + p.count() <= self.best.len() {
                break;
            }
            r.push(v);
            let next = p.and(&self.adj[v]);
            self.expand(r, next)?;
            r.pop();
            p.remove(v);
        }
        Ok(())
    }
}

/// Maximum clique with a witness, by pivoting branch and bound.
pub fn max_clique_with_deadline(g: &Graph, limit: Duration) -> Result<Vec<usize>> {
    let n = g.num_vertices();
    let adj: Vec<Bits> = (0..n)
        .map(|v| {
            let mut b = Bits::zeros(n);
            g.neighbors(v).iter().for_each(|&w| b.insert(w));
            b
        })
        .collect();
    let mut all = Bits::zeros(n);
    (0..n).for_each(|v| all.insert(v));
    let mut search = Search {
        adj: &adj,
        best: Vec::new(),
        deadline: Instant::now() + limit,
        limit,
        nodes: 0,
    };
    search.expand(&mut Vec::new(), all)?;
    let mut best = search.best;
    best.sort_unstable();
    Ok(best)
}

pub fn max_clique(g: &Graph) -> Result<Vec<usize>> {
    max_clique_with_deadline(g, DEFAULT_DEADLINE)
}

pub fn max_clique_size(g: &Graph) -> Result<usize> {
    max_clique(g).map(|c| c.len())
}

/// Subset enumeration; test oracle for small graphs.
pub fn brute_force_max_clique(g: &Graph) -> Result<usize> {
    let n = g.num_vertices();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            what: "brute-force clique graph",
            got: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if is_clique(g, &set)? {
            best = size;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complement, sample_erdos_renyi};
    use rand::seq::SliceRandom;

    #[test]
    fn clique_checks() {
        let k4 = Graph::complete(4);
        assert!(is_clique(&k4, &[0, 1, 2, 3]).unwrap());
        assert!(!is_clique(&Graph::path(3), &[0, 2]).unwrap());
        assert!(is_clique(&Graph::path(3), &[]).unwrap());
        assert!(is_clique(&Graph::path(3), &[1]).unwrap());
        assert!(is_clique(&Graph::path(3), &[5]).is_err());
    }

    #[test]
    fn known_clique_numbers() {
        assert_eq!(max_clique_size(&Graph::complete(7)).unwrap(), 7);
        assert_eq!(max_clique_size(&Graph::path(3)).unwrap(), 2);
        assert_eq!(brute_force_max_clique(&Graph::complete(5)).unwrap(), 5);
        assert_eq!(brute_force_max_clique(&Graph::cycle(5)).unwrap(), 2);
        assert_eq!(
            brute_force_max_clique(&complement(&Graph::complete(4))).unwrap(),
            1
        );
        assert_eq!(max_clique_size(&Graph::empty(4)).unwrap(), 1);
        assert_eq!(max_clique_size(&Graph::empty(0)).unwrap(), 0);
        assert!(brute_force_max_clique(&Graph::empty(21)).is_err());
    }

    #[test]
    fn witness_is_a_clique() {
        for seed in 0..20 {
            let g = sample_erdos_renyi(40, 0.6, seed).unwrap();
            let c = max_clique(&g).unwrap();
            assert!(is_clique(&g, &c).unwrap());
        }
    }

    #[test]
    fn relabeling_invariance() {
        let mut rng = crate::seed::rng(9);
        for seed in 0..20 {
            let g = sample_erdos_renyi(15, 0.5, seed).unwrap();
            let mut perm: Vec<usize> = (0..15).collect();
            perm.shuffle(&mut rng);
            let h = g.permuted(&perm).unwrap();
            assert_eq!(max_clique_size(&g).unwrap(), max_clique_size(&h).unwrap());
        }
    }

    #[test]
    fn dense_sixty_four_vertex_graphs_finish() {
        for (seed, p) in [(1, 0.99), (2, 0.9), (3, 0.75), (4, 0.5)] {
            let g = sample_erdos_renyi(64, p, seed).unwrap();
            let c = max_clique_with_deadline(&g, Duration::from_secs(20)).unwrap();
            assert!(is_clique(&g, &c).unwrap());
        }
    }

    #[test]
    fn timeout_is_reported() {
        let g = sample_erdos_renyi(200, 0.9, 5).unwrap();
        let err = max_clique_with_deadline(&g, Duration::from_nanos(1)).unwrap_err();
        assert!(matches!(err, Error::Timeout(_)));
    }
}
