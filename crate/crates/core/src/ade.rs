//! A-D-E Dynkin diagrams, the explicit Dynkin connection, the GHJ module
//! data and the locality test.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::alpha;
use crate::connection::{Connection, Shape};
use crate::error::{Error, Result};
use crate::graphs::{pf_data, BipartiteGraph, PfData};
use crate::linalg::{c, C64, ZERO};
use crate::planar::{Chirality, Engine};
use crate::su2k;

#[derive(Clone, Debug)]
pub struct DynkinDiagram {
    pub name: String,
    /// Bipartite graph, vertices split by distance parity from the basepoint.
    pub graph: BipartiteGraph,
    pub coxeter: usize,
    pub pf: PfData,
    /// Vertex index (into `names`) with the smallest PF weight.
    pub basepoint: usize,
    pub names: Vec<String>,
    /// Symmetric adjacency on all vertices.
    pub adj: Vec<Vec<usize>>,
    /// PF weight per vertex index, basepoint weight 1.
    pub mu: Vec<f64>,
    /// Parity per vertex index (true = odd).
    pub odd: Vec<bool>,
}

fn parse_name(name: &str) -> Option<(char, usize)> {
    let s: String = name.chars().filter(|c| *c != '_').collect();
    let mut it = s.chars();
    let t = it.next()?.to_ascii_uppercase();
    let n: usize = it.as_str().parse().ok()?;
    let ok = match t {
        'A' => n >= 1,
        'D' => n >= 4,
        'E' => (6..=8).contains(&n),
        _ => false,
    };
    ok.then_some((t, n))
}

/// Catalog lookup: `A_n` (n ≥ 1), `D_n` (n ≥ 4), `E6`, `E7`, `E8`; the
/// underscore is optional.
pub fn dynkin(name: &str) -> Result<DynkinDiagram> {
    let (t, n) = parse_name(name).ok_or_else(|| Error::Input(format!("invalid Dynkin diagram name '{name}'")))?;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    match t {
        'A' => edges.extend((0..n.saturating_sub(1)).map(|i| (i, i + 1))),
        'D' => {
            edges.extend((0..n - 3).map(|i| (i, i + 1)));
            edges.push((n - 3, n - 2));
            edges.push((n - 3, n - 1));
        }
        _ => {
            edges.extend((0..n - 2).map(|i| (i, i + 1)));
            edges.push((2, n - 1));
        }
    }
    let mut adj = vec![vec![0usize; n]; n];
    for &(a, b) in &edges {
        adj[a][b] += 1;
        adj[b][a] += 1;
    }
    let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let canonical = format!("{t}{n}");
    if n == 1 {
        let graph = BipartiteGraph { even: names.clone(), odd: vec![], mult: vec![vec![]] };
        let pf = PfData {
            beta: 0.0,
            mu_even: vec![1.0],
            mu_odd: vec![],
            normalization: crate::graphs::Normalization::Basepoint(false, 0),
        };
        return Ok(DynkinDiagram { name: canonical, graph, coxeter: 2, pf, basepoint: 0, names, adj, mu: vec![1.0], odd: vec![false] });
    }
    // provisional bipartition from vertex 0 to find the basepoint
    let parity_from = |root: usize| -> Vec<bool> {
        let mut dist = vec![usize::MAX; n];
        dist[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for w in 0..n {
                if adj[v][w] > 0 && dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist.iter().map(|d| d % 2 == 1).collect()
    };
    let split = |odd: &[bool]| -> (Vec<usize>, Vec<usize>) {
        ((0..n).filter(|&v| !odd[v]).collect(), (0..n).filter(|&v| odd[v]).collect())
    };
    let graph_of = |odd: &[bool]| -> BipartiteGraph {
        let (ev, od) = split(odd);
        BipartiteGraph::from_fn(
            ev.iter().map(|&v| names[v].clone()).collect(),
            od.iter().map(|&v| names[v].clone()).collect(),
            |i, j| adj[ev[i]][od[j]],
        )
    };
    let per_vertex = |odd: &[bool], pf: &PfData| -> Vec<f64> {
        let (ev, od) = split(odd);
        let mut mu = vec![0.0; n];
        for (i, &v) in ev.iter().enumerate() {
            mu[v] = pf.mu_even[i];
        }
        for (i, &v) in od.iter().enumerate() {
            mu[v] = pf.mu_odd[i];
        }
        mu
    };
    let odd0 = parity_from(0);
    let pf0 = pf_data(&graph_of(&odd0), 1e-14, None)?;
    let mu0 = per_vertex(&odd0, &pf0);
    let mut basepoint = 0;
    for v in 1..n {
        if mu0[v] < mu0[basepoint] * (1.0 - 1e-9) {
            basepoint = v;
        }
    }
    let odd = parity_from(basepoint);
    let graph = graph_of(&odd);
    let pf = pf_data(&graph, 1e-14, Some((false, split(&odd).0.iter().position(|&v| v == basepoint).unwrap())))?;
    let mu = per_vertex(&odd, &pf);
    let h = (PI / (pf.beta / 2.0).clamp(-1.0, 1.0).acos()).round() as usize;
    if ((PI / h as f64).cos() * 2.0 - pf.beta).abs() > 1e-9 {
        return Err(Error::Check(format!("{canonical}: PF eigenvalue {} is not 2cos(π/h)", pf.beta)));
    }
    Ok(DynkinDiagram { name: canonical, graph, coxeter: h, pf, basepoint, names, adj, mu, odd })
}

impl DynkinDiagram {
    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn level(&self) -> usize {
        self.coxeter - 2
    }

    pub fn basepoint_name(&self) -> &str {
        &self.names[self.basepoint]
    }

    /// The module engine on this graph.
    pub fn engine(&self) -> Result<Engine> {
        Engine::new(self.names.clone(), self.adj.clone(), self.mu.clone(), self.coxeter)
    }

    pub fn is_local_type(&self) -> bool {
        let t = self.name.chars().next().unwrap();
        let n: usize = self.name[1..].parse().unwrap();
        match t {
            'A' => true,
            'D' => n % 2 == 0,
            _ => n != 7,
        }
    }
}

/// The phase ε = i·exp(iπ/(2p)).
pub fn epsilon(p: usize) -> C64 {
    C64::from_polar(1.0, PI / 2.0 + PI / (2.0 * p as f64))
}

fn ocneanu_with(d: &DynkinDiagram, eps: C64) -> Result<Connection> {
    let g = &d.graph;
    let (ev, od): (Vec<usize>, Vec<usize>) = (
        (0..d.n()).filter(|&v| !d.odd[v]).collect(),
        (0..d.n()).filter(|&v| d.odd[v]).collect(),
    );
    let we: Vec<f64> = ev.iter().map(|&v| d.mu[v]).collect();
    let wo: Vec<f64> = od.iter().map(|&v| d.mu[v]).collect();
    let shape = Shape::new(g.clone(), g.clone(), g.clone(), g.clone(), [we.clone(), wo.clone(), we, wo])?;
    Ok(Connection::from_fn(shape, |q, _, _, _, _| {
        let [x0, x1, x2, x3] = q;
        let mut v = ZERO;
        if x1 == x3 {
            v += eps;
        }
        if x0 == x2 {
            let (j, k, l, m) = (d.mu[ev[x0]], d.mu[od[x1]], d.mu[od[x3]], d.mu[ev[x2]]);
            v += c((k * l / (j * m)).sqrt()) * eps.conj();
        }
        v
    }))
}

/// Chooses the exponent p ∈ {h−1, h, h+1} in ε = i·exp(iπ/(2p)) by
/// bi-unitarity residual; returns `(p, residual)`.
pub fn select_epsilon_exponent(d: &DynkinDiagram) -> Result<(usize, f64)> {
    let h = d.coxeter;
    let mut best: Option<(usize, f64)> = None;
    for p in [h - 1, h, h + 1] {
        if p < 2 {
            continue;
        }
        let w = ocneanu_with(d, epsilon(p))?;
        let r = w.verify_biunitarity(1e-10);
        let res = r.unitarity_residual.max(r.crossing_residual);
        if best.map_or(true, |(_, b)| res < b) {
            best = Some((p, res));
        }
    }
    best.ok_or_else(|| Error::Input("diagram too small".into()))
}

/// The explicit connection on the Dynkin diagram, all four graphs equal to
/// the diagram; chirality − uses the conjugate phase.
pub fn ocneanu_connection(d: &DynkinDiagram, ch: Chirality) -> Result<Connection> {
    if d.n() < 2 {
        return Err(Error::Input("the connection needs at least one edge".into()));
    }
    let (p, res) = select_epsilon_exponent(d)?;
    if res >= 1e-10 {
        return Err(Error::Check(format!("{}: no phase exponent gives a bi-unitary connection ({res:e})", d.name)));
    }
    let eps = match ch {
        Chirality::Plus => epsilon(p),
        Chirality::Minus => epsilon(p).conj(),
    };
    ocneanu_with(d, eps)
}

// ------------------------------------------------------------------ modules

/// GHJ module data: the sector graph, the braided system Δ = A_{k+1} acting
/// on it, and derived invariants.
pub struct ModuleData {
    pub diagram: DynkinDiagram,
    pub k: usize,
    /// Module engine on the diagram (sectors).
    pub sectors: Engine,
    /// Regular engine on A_{k+1} (the braided system Δ).
    pub delta: Engine,
    pub theta: Vec<usize>,
    pub local: bool,
    /// The generating module connection W2(1).
    pub w2: Connection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub diagram: String,
    pub k: usize,
    pub theta: Vec<usize>,
    pub local: bool,
}

/// Builds the module data for a diagram. `tol` bounds the bi-unitarity
/// residual of W2(1) and the locality test.
pub fn ghj_module(d: &DynkinDiagram, tol: f64) -> Result<ModuleData> {
    if d.n() < 2 {
        return Err(Error::Input("module needs a diagram with an edge".into()));
    }
    let k = d.level();
    let sectors = d.engine()?;
    let delta = su2k::regular_engine(k)?;
    let b = d.basepoint;
    let mut theta = Vec::new();
    for nu in 0..=k {
        for _ in 0..sectors.dim(nu, b, b) {
            theta.push(nu);
        }
    }
    let mut m = ModuleData { diagram: d.clone(), k, sectors, delta, theta, local: false, w2: single_dummy() };
    m.w2 = alpha::build_w2(&m, 1)?;
    let rep = m.w2.verify_biunitarity(tol);
    if !rep.pass {
        return Err(Error::Check(format!(
            "W2(1) on {} is not bi-unitary (residuals {:e}, {:e})",
            d.name, rep.unitarity_residual, rep.crossing_residual
        )));
    }
    m.local = locality_residual(&m) < tol.max(1e-9);
    Ok(m)
}

fn single_dummy() -> Connection {
    crate::connection::single_cell(c(1.0))
}

impl ModuleData {
    pub fn manifest(&self) -> Manifest {
        Manifest { diagram: self.diagram.name.clone(), k: self.k, theta: self.theta.clone(), local: self.local }
    }

    pub fn basepoint(&self) -> usize {
        self.diagram.basepoint
    }

    /// Δ-label names.
    pub fn delta_names(&self) -> Vec<String> {
        self.delta.names.clone()
    }

    /// `mult[ν][a] = dim Hom(ιν, a)`.
    pub fn intertwining(&self) -> BipartiteGraph {
        let b = self.basepoint();
        BipartiteGraph::from_fn(self.delta.names.clone(), self.diagram.names.clone(), |nu, a| self.sectors.dim(nu, b, a))
    }

    /// Σ_{ν ∈ θ} d_ν: the index of the inclusion.
    pub fn index(&self) -> f64 {
        self.theta.iter().map(|&nu| self.delta.mu[nu]).sum()
    }
}

/// Largest deviation of the braiding on θ-summands from the flip:
/// `‖c_{λ,μ}(t1 ⊗ t2) − t2 ⊗ t1‖` over t1 ∈ E_λ(*,*), t2 ∈ E_μ(*,*).
pub fn locality_residual(m: &ModuleData) -> f64 {
    let e = &m.sectors;
    let b = m.basepoint();
    let mut labels = m.theta.clone();
    labels.dedup();
    let mut worst: f64 = 0.0;
    for &la in &labels {
        for &mu in &labels {
            let br = e.braid(la, mu, Chirality::Plus, b, b);
            let bin = e.basis(&[la, mu], b, b);
            let bout = e.basis(&[mu, la], b, b);
            for t1 in 0..e.dim(la, b, b) {
                for t2 in 0..e.dim(mu, b, b) {
                    let col = bin.index[&vec![b as u16, t1 as u16, t2 as u16]];
                    let row = bout.index[&vec![b as u16, t2 as u16, t1 as u16]];
                    let mut dev = 0.0;
                    for i in 0..br.nrows() {
                        let target = if i == row { c(1.0) } else { ZERO };
                        dev += (br[(i, col)] - target).norm_sqr();
                    }
                    worst = worst.max(dev.sqrt());
                }
            }
        }
    }
    worst
}

pub fn locality_check(m: &ModuleData, tol: f64) -> bool {
    locality_residual(m) < tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coxeter_numbers_and_basepoints() {
        for (name, h, bp) in [("A5", 6, 0), ("D4", 6, 0), ("E6", 12, 0), ("E7", 18, 5), ("E8", 30, 6), ("D5", 8, 0)] {
            let d = dynkin(name).unwrap();
            assert_eq!(d.coxeter, h, "{name}");
            assert_eq!(d.basepoint, bp, "{name}");
            assert!((d.mu[d.basepoint] - 1.0).abs() < 1e-12);
            assert!(d.mu.iter().all(|&m| m >= 1.0 - 1e-12));
        }
        assert!(dynkin("F4").is_err());
        assert!(dynkin("D3").is_err());
    }

    #[test]
    fn selected_exponent_is_coxeter() {
        for name in ["A3", "D5", "E7"] {
            let d = dynkin(name).unwrap();
            let (p, res) = select_epsilon_exponent(&d).unwrap();
            assert_eq!(p, d.coxeter);
            assert!(res < 1e-12);
        }
    }
}
