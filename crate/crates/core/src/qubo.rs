//! Quadratic models over binary or spin variables and the Maximum Clique QUBO.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{complement, Graph};

/// Largest model `brute_force_minimum` will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarSpace {
    /// `x ∈ {0, 1}`
    Binary,
    /// `s ∈ {−1, +1}`
    Spin,
}

impl VarSpace {
    pub fn name(self) -> &'static str {
        match self {
            VarSpace::Binary => "binary",
            VarSpace::Spin => "spin",
        }
    }

    fn admits(self, v: i8) -> bool {
        match self {
            VarSpace::Binary => v == 0 || v == 1,
            VarSpace::Spin => v == -1 || v == 1,
        }
    }
}

/// `E(v) = Σ h_i v_i + Σ_{i<j} J_ij v_i v_j + offset`.
///
/// Quadratic keys are `(i, j)` with `i < j`; zero couplings are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    space: VarSpace,
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl QuadraticModel {
    pub fn new(space: VarSpace, num_vars: usize) -> Self {
        QuadraticModel {
            space,
            linear: vec![0.0; num_vars],
            quadratic: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn space(&self) -> VarSpace {
        self.space
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn add_linear(&mut self, i: usize, value: f64) {
        self.linear[i] += value;
    }

    /// Adds `value` to `J_ij`, dropping the entry if it cancels to zero.
    pub fn add_quadratic(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        let n = self.num_vars();
        if i == j {
            return Err(Error::InvalidArgument(format!(
                "self-coupling on variable {i}"
            )));
        }
        if i >= n || j >= n {
            return Err(Error::VertexOutOfRange {
                vertex: i.max(j),
                n,
            });
        }
        let key = (i.min(j), i.max(j));
        let entry = self.quadratic.entry(key).or_insert(0.0);
        *entry += value;
        if *entry == 0.0 {
            self.quadratic.remove(&key);
        }
        Ok(())
    }

    /// Multiplies every coefficient, including the offset, by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.linear.iter_mut().for_each(|h| *h *= c);
        out.quadratic.values_mut().for_each(|j| *j *= c);
        out.quadratic.retain(|_, j| *j != 0.0);
        out.offset *= c;
        out
    }

    /// Number of stored couplings touching each variable.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_vars()];
        for &(i, j) in self.quadratic.keys() {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn energy(&self, assignment: &[i8]) -> Result<f64> {
        energy(self, assignment)
    }

    /// Energy without domain checks; `assignment` must already be valid.
    pub(crate) fn energy_unchecked(&self, assignment: &[i8]) -> f64 {
        let lin: f64 = self
            .linear
            .iter()
            .zip(assignment)
            .map(|(h, &v)| h * f64::from(v))
            .sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .map(|(&(i, j), c)| c * f64::from(assignment[i] * assignment[j]))
            .sum();
        lin + quad + self.offset
    }

    pub fn to_ising(&self) -> Result<Self> {
        to_ising(self)
    }

    /// Debug view with coefficients as decimal strings.
    pub fn to_document(&self) -> serde_json::Value {
        let linear: BTreeMap<String, String> = self
            .linear
            .iter()
            .enumerate()
            .map(|(i, h)| (i.to_string(), format!("{h:.16e}")))
            .collect();
        let quadratic: BTreeMap<String, String> = self
            .quadratic
            .iter()
            .map(|(&(i, j), c)| (format!("{i},{j}"), format!("{c:.16e}")))
            .collect();
        serde_json::json!({
            "variable_space": self.space.name(),
            "num_vars": self.num_vars(),
            "linear": linear,
            "quadratic": quadratic,
            "offset": format!("{:.16e}", self.offset),
        })
    }
}

pub fn energy(m: &QuadraticModel, assignment: &[i8]) -> Result<f64> {
    if assignment.len() != m.num_vars() {
        return Err(Error::InvalidArgument(format!(
            "assignment has {} values, model has {} variables",
            assignment.len(),
            m.num_vars()
        )));
    }
    if let Some((index, &value)) = assignment
        .iter()
        .enumerate()
        .find(|(_, &v)| !m.space.admits(v))
    {
        return Err(Error::OutOfDomain {
            index,
            value,
            space: m.space.name(),
        });
    }
    Ok(m.energy_unchecked(assignment))
}

/// Substitutes `x = (1 + s) / 2`; energies agree exactly on every assignment.
pub fn to_ising(m: &QuadraticModel) -> Result<QuadraticModel> {
    if m.space != VarSpace::Binary {
        return Err(Error::VariableSpace {
            expected: "binary",
            found: m.space.name(),
        });
    }
    let mut out = QuadraticModel::new(VarSpace::Spin, m.num_vars());
    let mut offset = m.offset;
    for (i, &a) in m.linear.iter().enumerate() {
        out.linear[i] += a / 2.0;
        offset += a / 2.0;
    }
    for (&(i, j), &b) in &m.quadratic {
        let quarter = b / 4.0;
        out.linear[i] += quarter;
        out.linear[j] += quarter;
        out.add_quadratic(i, j, quarter)?;
        offset += quarter;
    }
    out.offset = offset;
    Ok(out)
}

/// Exhaustive minimisation. Minimisers are listed in lexicographic order of
/// the assignment vectors.
pub fn brute_force_minimum(m: &QuadraticModel) -> Result<(f64, Vec<Vec<i8>>)> {
    let n = m.num_vars();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            what: "brute-force model",
            got: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let (lo, hi) = match m.space {
        VarSpace::Binary => (0i8, 1i8),
        VarSpace::Spin => (-1i8, 1i8),
    };
    let mut best = f64::INFINITY;
    let mut minimizers = Vec::new();
    let mut x = vec![lo; n];
    // variable 0 is the most significant digit, so counting order is lexicographic
    for code in 0u32..(1u32 << n) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = if code >> (n - 1 - i) & 1 == 1 { hi } else { lo };
        }
        let e = m.energy_unchecked(&x);
        if e < best {
            best = e;
            minimizers.clear();
            minimizers.push(x.clone());
        } else if e == best {
            minimizers.push(x.clone());
        }
    }
    Ok((best, minimizers))
}

/// Original graph, its QUBO structure graph (the complement) and the model.
#[derive(Debug, Clone)]
pub struct ProblemBundle {
    pub input_graph: Graph,
    pub unembedded_graph: Graph,
    pub model: QuadraticModel,
}

/// `H = −a Σ x_i + b Σ_{(i,j) ∉ E} x_i x_j`.
///
/// For `b > a > 0` the minimisers are exactly the maximum cliques, at energy
/// `−a · ω(g)`.
pub fn build_max_clique_qubo(g: &Graph, a: f64, b: f64) -> Result<ProblemBundle> {
    if !(a > 0.0 && b > a) {
        return Err(Error::InvalidArgument(format!(
            "clique QUBO needs b > a > 0, got a = {a}, b = {b}"
        )));
    }
    let unembedded = complement(g);
    let mut model = QuadraticModel::new(VarSpace::Binary, g.num_vertices());
    model.linear.iter_mut().for_each(|h| *h = -a);
    for &(i, j) in unembedded.edges() {
        model.quadratic.insert((i, j), b);
    }
    Ok(ProblemBundle {
        input_graph: g.clone(),
        unembedded_graph: unembedded,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_model(n: usize, seed: u64) -> QuadraticModel {
        let mut rng = crate::seed::rng(seed);
        let mut m = QuadraticModel::new(VarSpace::Binary, n);
        for i in 0..n {
            m.add_linear(i, rng.random_range(-3.0..3.0));
            for j in (i + 1)..n {
                if rng.random_bool(0.5) {
                    m.add_quadratic(i, j, rng.random_range(-3.0..3.0)).unwrap();
                }
            }
        }
        m.set_offset(rng.random_range(-1.0..1.0));
        m
    }

    fn all_binary(n: usize) -> impl Iterator<Item = Vec<i8>> {
        (0u32..(1 << n)).map(move |c| (0..n).map(|i| ((c >> i) & 1) as i8).collect())
    }

    #[test]
    fn triangle_model() {
        let b = build_max_clique_qubo(&Graph::complete(3), 1.0, 2.0).unwrap();
        assert_eq!(b.model.linear(), &[-1.0, -1.0, -1.0]);
        assert!(b.model.quadratic().is_empty());
        let (e, mins) = brute_force_minimum(&b.model).unwrap();
        assert_eq!(e, -3.0);
        assert_eq!(mins, vec![vec![1, 1, 1]]);
        assert_eq!(b.model.energy(&[1, 1, 1]).unwrap(), -3.0);
    }

    #[test]
    fn path_model() {
        let b = build_max_clique_qubo(&Graph::path(3), 1.0, 2.0).unwrap();
        assert_eq!(b.model.quadratic().get(&(0, 2)), Some(&2.0));
        assert_eq!(b.model.quadratic().len(), 1);
        assert_eq!(b.model.energy(&[1, 0, 1]).unwrap(), 0.0);
        let (e, mins) = brute_force_minimum(&b.model).unwrap();
        assert_eq!(e, -2.0);
        assert_eq!(mins, vec![vec![0, 1, 1], vec![1, 1, 0]]);
    }

    #[test]
    fn four_cycle_minimisers_are_edges() {
        let g = Graph::cycle(4);
        let b = build_max_clique_qubo(&g, 1.0, 2.0).unwrap();
        let (e, mins) = brute_force_minimum(&b.model).unwrap();
        assert_eq!(e, -2.0);
        assert_eq!(mins.len(), 4);
        for x in mins {
            let sel: Vec<usize> = (0..4).filter(|&i| x[i] == 1).collect();
            assert_eq!(sel.len(), 2);
            assert!(g.has_edge(sel[0], sel[1]));
        }
    }

    #[test]
    fn zero_model_minimisers() {
        let m = QuadraticModel::new(VarSpace::Binary, 3);
        let (e, mins) = brute_force_minimum(&m).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(mins.len(), 8);
        assert_eq!(m.energy(&[0, 0, 0]).unwrap(), 0.0);
        assert!(brute_force_minimum(&QuadraticModel::new(VarSpace::Binary, 25)).is_err());
    }

    #[test]
    fn penalty_dominance_required() {
        assert!(build_max_clique_qubo(&Graph::path(3), 1.0, 1.0).is_err());
        assert!(build_max_clique_qubo(&Graph::path(3), 0.0, 2.0).is_err());
    }

    #[test]
    fn single_variable_ising() {
        let mut m = QuadraticModel::new(VarSpace::Binary, 1);
        m.add_linear(0, -1.0);
        let s = to_ising(&m).unwrap();
        assert_eq!(s.linear(), &[-0.5]);
        assert_eq!(s.offset(), -0.5);
        assert_eq!(s.energy(&[1]).unwrap(), -1.0);
        assert_eq!(s.energy(&[-1]).unwrap(), 0.0);
    }

    #[test]
    fn path_ising_coefficients() {
        let b = build_max_clique_qubo(&Graph::path(3), 1.0, 2.0).unwrap();
        let s = to_ising(&b.model).unwrap();
        assert_eq!(s.quadratic().get(&(0, 2)), Some(&0.5));
        assert_eq!(s.linear(), &[0.0, -0.5, 0.0]);
        assert_eq!(s.offset(), -1.0);
        for x in all_binary(3) {
            let spins: Vec<i8> = x.iter().map(|&v| 2 * v - 1).collect();
            assert_eq!(b.model.energy(&x).unwrap(), s.energy(&spins).unwrap());
        }
    }

    #[test]
    fn ising_conversion_rejects_spin_input() {
        let m = QuadraticModel::new(VarSpace::Spin, 2);
        assert!(matches!(to_ising(&m), Err(Error::VariableSpace { .. })));
    }

    #[test]
    fn energy_domain_checks() {
        let m = QuadraticModel::new(VarSpace::Binary, 2);
        assert!(matches!(
            m.energy(&[0, -1]),
            Err(Error::OutOfDomain { index: 1, .. })
        ));
        assert!(m.energy(&[0]).is_err());
        let s = QuadraticModel::new(VarSpace::Spin, 2);
        assert!(s.energy(&[0, 1]).is_err());
    }

    #[test]
    fn ising_energy_equivalence_random() {
        for seed in 0..30 {
            let n = 1 + seed as usize % 10;
            let m = random_model(n, seed);
            let s = to_ising(&m).unwrap();
            for x in all_binary(n) {
                let spins: Vec<i8> = x.iter().map(|&v| 2 * v - 1).collect();
                let diff = m.energy(&x).unwrap() - s.energy(&spins).unwrap();
                assert!(diff.abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn scaling_preserves_minimisers() {
        for seed in 0..10 {
            let g = crate::graph::sample_erdos_renyi(8, 0.5, seed).unwrap();
            let base = build_max_clique_qubo(&g, 1.0, 2.0).unwrap().model;
            let scaled = build_max_clique_qubo(&g, 2.5, 5.0).unwrap().model;
            let (e1, m1) = brute_force_minimum(&base).unwrap();
            let (e2, m2) = brute_force_minimum(&scaled).unwrap();
            assert_eq!(m1, m2);
            assert!((e2 - 2.5 * e1).abs() < 1e-12);
            assert_eq!(base.scaled(2.5), scaled);
        }
    }

    #[test]
    fn zero_couplings_are_not_stored() {
        let mut m = QuadraticModel::new(VarSpace::Binary, 3);
        m.add_quadratic(0, 1, 1.0).unwrap();
        m.add_quadratic(1, 0, -1.0).unwrap();
        assert!(m.quadratic().is_empty());
        assert!(m.add_quadratic(1, 1, 1.0).is_err());
    }
}
