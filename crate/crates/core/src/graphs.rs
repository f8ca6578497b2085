//! Finite bipartite multigraphs and their Perron–Frobenius data.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};

/// Bipartite multigraph. `mult[v][w]` counts edges between even vertex `v`
/// and odd vertex `w`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    pub even: Vec<String>,
    pub odd: Vec<String>,
    pub mult: Vec<Vec<usize>>,
}

/// Which vertex carries weight one after normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Normalization {
    /// `(is_odd, index)` of the distinguished vertex.
    Basepoint(bool, usize),
    MaxOne,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfData {
    pub beta: f64,
    pub mu_even: Vec<f64>,
    pub mu_odd: Vec<f64>,
    pub normalization: Normalization,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connectivity {
    pub connected: bool,
    /// Each component as (even indices, odd indices), both sorted.
    pub components: Vec<(Vec<usize>, Vec<usize>)>,
}

impl BipartiteGraph {
    pub fn new(even: Vec<String>, odd: Vec<String>, mult: Vec<Vec<usize>>) -> Result<Self> {
        if mult.len() != even.len() || mult.iter().any(|r| r.len() != odd.len()) {
            return Err(Error::Input("multiplicity matrix does not match vertex lists".into()));
        }
        Ok(BipartiteGraph { even, odd, mult })
    }

    /// Builds a graph from an edge list of `(even, odd)` index pairs.
    pub fn from_edges(even: Vec<String>, odd: Vec<String>, edges: &[(usize, usize)]) -> Self {
        let mut mult = vec![vec![0; odd.len()]; even.len()];
        for &(v, w) in edges {
            mult[v][w] += 1;
        }
        BipartiteGraph { even, odd, mult }
    }

    /// Builds a graph with `mult[v][w] = f(v, w)`.
    pub fn from_fn(even: Vec<String>, odd: Vec<String>, f: impl Fn(usize, usize) -> usize) -> Self {
        let mult = (0..even.len()).map(|v| (0..odd.len()).map(|w| f(v, w)).collect()).collect();
        BipartiteGraph { even, odd, mult }
    }

    pub fn n_edges(&self) -> usize {
        self.mult.iter().flatten().sum()
    }

    /// Canonical edge list `(v, w, i)`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::with_capacity(self.n_edges());
        for (v, row) in self.mult.iter().enumerate() {
            for (w, &m) in row.iter().enumerate() {
                for i in 0..m {
                    out.push((v, w, i));
                }
            }
        }
        out
    }

    /// Swap the roles of the two vertex classes.
    pub fn transposed(&self) -> Self {
        let mut mult = vec![vec![0; self.even.len()]; self.odd.len()];
        for (v, row) in self.mult.iter().enumerate() {
            for (w, &m) in row.iter().enumerate() {
                mult[w][v] = m;
            }
        }
        BipartiteGraph { even: self.odd.clone(), odd: self.even.clone(), mult }
    }

    pub fn even_index(&self, id: &str) -> Option<usize> {
        self.even.iter().position(|x| x == id)
    }

    pub fn odd_index(&self, id: &str) -> Option<usize> {
        self.odd.iter().position(|x| x == id)
    }

    /// Restrict to the given vertex subsets (indices kept in the given order).
    pub fn restrict(&self, even: &[usize], odd: &[usize]) -> Self {
        BipartiteGraph {
            even: even.iter().map(|&v| self.even[v].clone()).collect(),
            odd: odd.iter().map(|&w| self.odd[w].clone()).collect(),
            mult: even.iter().map(|&v| odd.iter().map(|&w| self.mult[v][w]).collect()).collect(),
        }
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph \"{name}\" {{\n");
        for v in &self.even {
            s.push_str(&format!("  \"e:{v}\" [label=\"{v}\", shape=circle];\n"));
        }
        for w in &self.odd {
            s.push_str(&format!("  \"o:{w}\" [label=\"{w}\", shape=box];\n"));
        }
        for (v, w, _) in self.edges() {
            s.push_str(&format!("  \"e:{}\" -- \"o:{}\";\n", self.even[v], self.odd[w]));
        }
        s.push_str("}\n");
        s
    }
}

pub fn connectivity(g: &BipartiteGraph) -> Connectivity {
    let ne = g.even.len();
    let n = ne + g.odd.len();
    let mut comp = vec![usize::MAX; n];
    let mut components = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let (mut ev, mut od) = (Vec::new(), Vec::new());
        let mut queue = VecDeque::from([start]);
        comp[start] = id;
        while let Some(u) = queue.pop_front() {
            if u < ne {
                ev.push(u);
                for w in 0..g.odd.len() {
                    if g.mult[u][w] > 0 && comp[ne + w] == usize::MAX {
                        comp[ne + w] = id;
                        queue.push_back(ne + w);
                    }
                }
            } else {
                let w = u - ne;
                od.push(w);
                for v in 0..ne {
                    if g.mult[v][w] > 0 && comp[v] == usize::MAX {
                        comp[v] = id;
                        queue.push_back(v);
                    }
                }
            }
        }
        ev.sort_unstable();
        od.sort_unstable();
        components.push((ev, od));
    }
    Connectivity { connected: components.len() == 1, components }
}

/// Perron–Frobenius eigenvalue and eigenvector by power iteration on the
/// squared adjacency, started from the all-ones vector.
pub fn pf_data(g: &BipartiteGraph, tol: f64, basepoint: Option<(bool, usize)>) -> Result<PfData> {
    if g.even.is_empty() || g.odd.is_empty() || g.n_edges() == 0 {
        return Err(Error::Input("PF undefined on empty graph".into()));
    }
    if !connectivity(g).connected {
        return Err(Error::Input("PF undefined on disconnected graph".into()));
    }
    let (ne, no) = (g.even.len(), g.odd.len());
    let apply_odd = |x: &[f64]| -> Vec<f64> {
        (0..no).map(|w| (0..ne).map(|v| g.mult[v][w] as f64 * x[v]).sum()).collect()
    };
    let apply_even = |y: &[f64]| -> Vec<f64> {
        (0..ne).map(|v| (0..no).map(|w| g.mult[v][w] as f64 * y[w]).sum()).collect()
    };
    let mut x = vec![1.0; ne];
    let mut beta = 0.0;
    // A^2 restricted to even vertices is primitive on a connected bipartite
    // graph; iterate a shifted version to avoid period-2 stalls.
    for _ in 0..200_000 {
        let y = apply_odd(&x);
        let z = apply_even(&y);
        let next: Vec<f64> = z.iter().zip(&x).map(|(a, b)| a + b).collect();
        let norm = next.iter().cloned().fold(0.0, f64::max);
        let next: Vec<f64> = next.iter().map(|a| a / norm).collect();
        let b2 = norm - 1.0;
        let diff = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = next;
        beta = b2.max(0.0).sqrt();
        if diff < tol * beta.max(1e-300) {
            break;
        }
    }
    // Rayleigh refinement.
    let y = apply_odd(&x);
    let z = apply_even(&y);
    let num: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
    let den: f64 = x.iter().map(|a| a * a).sum();
    if den > 0.0 && num > 0.0 {
        beta = (num / den).sqrt();
    }
    let mut mu_even = x;
    let mut mu_odd: Vec<f64> = apply_odd(&mu_even).iter().map(|a| a / beta).collect();
    let scale = match basepoint {
        Some((false, i)) => mu_even[i],
        Some((true, i)) => mu_odd[i],
        None => mu_even.iter().chain(&mu_odd).cloned().fold(0.0, f64::max),
    };
    mu_even.iter_mut().for_each(|a| *a /= scale);
    mu_odd.iter_mut().for_each(|a| *a /= scale);
    let normalization = match basepoint {
        Some((o, i)) => Normalization::Basepoint(o, i),
        None => Normalization::MaxOne,
    };
    Ok(PfData { beta, mu_even, mu_odd, normalization })
}

/// Maximal deviation from the eigen-equations.
pub fn pf_residual(g: &BipartiteGraph, pf: &PfData) -> f64 {
    let mut r: f64 = 0.0;
    for v in 0..g.even.len() {
        let s: f64 = (0..g.odd.len()).map(|w| g.mult[v][w] as f64 * pf.mu_odd[w]).sum();
        r = r.max((s - pf.beta * pf.mu_even[v]).abs());
    }
    for w in 0..g.odd.len() {
        let s: f64 = (0..g.even.len()).map(|v| g.mult[v][w] as f64 * pf.mu_even[v]).sum();
        r = r.max((s - pf.beta * pf.mu_odd[w]).abs());
    }
    r
}

/// Parity-preserving isomorphism. Returns `(even_map, odd_map)` with
/// `g1.mult[v][w] == g2.mult[even_map[v]][odd_map[w]]`.
pub fn graph_isomorphic(g1: &BipartiteGraph, g2: &BipartiteGraph) -> Option<(Vec<usize>, Vec<usize>)> {
    if g1.even.len() != g2.even.len() || g1.odd.len() != g2.odd.len() || g1.n_edges() != g2.n_edges() {
        return None;
    }
    let deg = |g: &BipartiteGraph| -> (Vec<usize>, Vec<usize>) {
        let de = g.mult.iter().map(|r| r.iter().sum()).collect();
        let d_o = (0..g.odd.len()).map(|w| g.mult.iter().map(|r| r[w]).sum()).collect();
        (de, d_o)
    };
    let (de1, do1) = deg(g1);
    let (de2, do2) = deg(g2);
    let sorted = |v: &Vec<usize>| {
        let mut s = v.clone();
        s.sort_unstable();
        s
    };
    if sorted(&de1) != sorted(&de2) || sorted(&do1) != sorted(&do2) {
        return None;
    }
    let ne = g1.even.len();
    let no = g1.odd.len();
    let mut emap = vec![usize::MAX; ne];
    let mut omap = vec![usize::MAX; no];
    let mut eused = vec![false; ne];
    let mut oused = vec![false; no];
    // Assign even vertices first, then odd, checking all edges between
    // assigned vertices as we go.
    fn rec(
        pos: usize,
        g1: &BipartiteGraph,
        g2: &BipartiteGraph,
        d: (&[usize], &[usize], &[usize], &[usize]),
        emap: &mut Vec<usize>,
        omap: &mut Vec<usize>,
        eused: &mut Vec<bool>,
        oused: &mut Vec<bool>,
    ) -> bool {
        let ne = g1.even.len();
        let no = g1.odd.len();
        if pos == ne + no {
            return true;
        }
        if pos < ne {
            let v = pos;
            for c in 0..ne {
                if eused[c] || d.0[v] != d.2[c] {
                    continue;
                }
                let ok = (0..no).all(|w| omap[w] == usize::MAX || g1.mult[v][w] == g2.mult[c][omap[w]]);
                if !ok {
                    continue;
                }
                emap[v] = c;
                eused[c] = true;
                if rec(pos + 1, g1, g2, d, emap, omap, eused, oused) {
                    return true;
                }
                eused[c] = false;
                emap[v] = usize::MAX;
            }
            false
        } else {
            let w = pos - ne;
            for c in 0..no {
                if oused[c] || d.1[w] != d.3[c] {
                    continue;
                }
                let ok = (0..ne).all(|v| g1.mult[v][w] == g2.mult[emap[v]][c]);
                if !ok {
                    continue;
                }
                omap[w] = c;
                oused[c] = true;
                if rec(pos + 1, g1, g2, d, emap, omap, eused, oused) {
                    return true;
                }
                oused[c] = false;
                omap[w] = usize::MAX;
            }
            false
        }
    }
    if rec(0, g1, g2, (&de1, &do1, &de2, &do2), &mut emap, &mut omap, &mut eused, &mut oused) {
        Some((emap, omap))
    } else {
        None
    }
}

/// Isomorphism as undirected graphs: parity-preserving, or after swapping
/// the two vertex classes of the second graph.
pub fn graph_isomorphic_unoriented(g1: &BipartiteGraph, g2: &BipartiteGraph) -> bool {
    graph_isomorphic(g1, g2).is_some() || graph_isomorphic(g1, &g2.transposed()).is_some()
}

/// Vertex id → index lookup for a list of ids.
pub(crate) fn index_of(ids: &[String]) -> BTreeMap<String, usize> {
    ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()
}
