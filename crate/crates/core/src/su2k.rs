//! The braided system of SU(2)_k: fusion rules, quantum dimensions, F- and
//! R-symbols, and the connections W1(λ, μ).
//!
//! Labels are integers 0..=k (twice the spin).

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::connection::{Connection, GaugeFamily, Shape};
use crate::error::{Error, Result};
use crate::graphs::BipartiteGraph;
use crate::linalg::{CMat, C64};
use crate::planar::{Chirality, Engine};

#[derive(Clone, Debug)]
pub struct BraidedSystemData {
    pub k: usize,
    pub qdim: Vec<f64>,
    /// `n[a][b][c]` = N_{ab}^c ∈ {0, 1}, from the Chebyshev recursion.
    pub n: Vec<Vec<Vec<u8>>>,
    /// `[F^{abc}_d]_{ef}` keyed by `[a, b, c, d, e, f]`.
    pub f: HashMap<[usize; 6], f64>,
    /// `R^{ab}_c` keyed by `[a, b, c]`.
    pub r: HashMap<[usize; 3], C64>,
    pub pentagon_residual: f64,
    pub hexagon_residual: f64,
}

fn qint(n: i64, h: usize) -> f64 {
    (n as f64 * PI / h as f64).sin() / (PI / h as f64).sin()
}

fn qfact(n: i64, h: usize) -> f64 {
    (1..=n).map(|i| qint(i, h)).product()
}

/// Truncated Clebsch–Gordan admissibility (used only inside this module's
/// closed forms; the public table comes from the recursion).
fn admissible(a: usize, b: usize, c: usize, k: usize) -> bool {
    c + a >= b && c + b >= a && c <= a + b && (a + b + c) % 2 == 0 && a + b + c <= 2 * k
}

/// Fusion multiplicities by N_{a+1} = N_1·N_a − N_{a−1}.
pub fn fusion_by_recursion(k: usize) -> Vec<Vec<Vec<u8>>> {
    let m = k + 1;
    let mut mats: Vec<Vec<Vec<i64>>> = Vec::new();
    let id: Vec<Vec<i64>> = (0..m).map(|i| (0..m).map(|j| i64::from(i == j)).collect()).collect();
    mats.push(id);
    if m > 1 {
        let n1: Vec<Vec<i64>> = (0..m).map(|i| (0..m).map(|j| i64::from(i.abs_diff(j) == 1)).collect()).collect();
        mats.push(n1);
    }
    while mats.len() < m {
        let a = mats.len() - 1;
        let mut next = vec![vec![0i64; m]; m];
        for i in 0..m {
            for j in 0..m {
                let s: i64 = (0..m).map(|l| mats[1][i][l] * mats[a][l][j]).sum();
                next[i][j] = s - mats[a - 1][i][j];
            }
        }
        mats.push(next);
    }
    // n[a][b][c] = (N_a)_{b c}
    (0..m).map(|a| (0..m).map(|b| (0..m).map(|c| mats[a][b][c] as u8).collect()).collect()).collect()
}

/// Δ-coefficient in doubled labels.
fn tri(a: usize, b: usize, c: usize, h: usize) -> f64 {
    let (a, b, c) = (a as i64, b as i64, c as i64);
    (qfact((a + b - c) / 2, h) * qfact((a - b + c) / 2, h) * qfact((-a + b + c) / 2, h) / qfact((a + b + c) / 2 + 1, h))
        .sqrt()
}

/// Racah–Wigner q-6j symbol {a b e; c d f} in doubled labels.
fn six_j(a: usize, b: usize, e: usize, c: usize, d: usize, f: usize, h: usize) -> f64 {
    let pre = tri(a, b, e, h) * tri(e, c, d, h) * tri(b, c, f, h) * tri(a, f, d, h);
    let (a, b, e, c, d, f) = (a as i64, b as i64, e as i64, c as i64, d as i64, f as i64);
    let t = [(a + b + e) / 2, (e + c + d) / 2, (b + c + f) / 2, (a + f + d) / 2];
    let p = [(a + b + c + d) / 2, (a + c + e + f) / 2, (b + e + f + d) / 2];
    let zmin = *t.iter().max().unwrap();
    let zmax = *p.iter().min().unwrap();
    let mut s = 0.0;
    for z in zmin..=zmax {
        let mut den = 1.0;
        for &ti in &t {
            den *= qfact(z - ti, h);
        }
        for &pi in &p {
            den *= qfact(pi - z, h);
        }
        let sign = if z % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * qfact(z + 1, h) / den;
    }
    pre * s
}

impl BraidedSystemData {
    pub fn labels(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.k
    }

    pub fn nn(&self, a: usize, b: usize, c: usize) -> bool {
        a <= self.k && b <= self.k && c <= self.k && self.n[a][b][c] > 0
    }

    /// `[F^{abc}_d]_{ef}`, zero when not admissible.
    pub fn fsym(&self, a: usize, b: usize, c: usize, d: usize, e: usize, f: usize) -> f64 {
        self.f.get(&[a, b, c, d, e, f]).copied().unwrap_or(0.0)
    }

    pub fn rsym(&self, a: usize, b: usize, c: usize) -> C64 {
        self.r.get(&[a, b, c]).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    fn pentagon(&self) -> f64 {
        let k = self.k;
        let mut worst: f64 = 0.0;
        for a in 0..=k {
            for b in 0..=k {
                for c in 0..=k {
                    for d in 0..=k {
                        for e in 0..=k {
                            for f in (0..=k).filter(|&f| self.nn(a, b, f)) {
                                for g in (0..=k).filter(|&g| self.nn(f, c, g) && self.nn(g, d, e)) {
                                    for l in (0..=k).filter(|&l| self.nn(c, d, l)) {
                                        for m in (0..=k).filter(|&m| self.nn(b, l, m) && self.nn(a, m, e)) {
                                            let lhs = self.fsym(f, c, d, e, g, l) * self.fsym(a, b, l, e, f, m);
                                            let rhs: f64 = (0..=k)
                                                .map(|hh| {
                                                    self.fsym(a, b, c, g, f, hh)
                                                        * self.fsym(a, hh, d, e, g, m)
                                                        * self.fsym(b, c, d, m, hh, l)
                                                })
                                                .sum();
                                            worst = worst.max((lhs - rhs).abs());
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        worst
    }

    fn hexagon(&self) -> f64 {
        let k = self.k;
        let mut worst: f64 = 0.0;
        for inv in [false, true] {
            let r = |x: usize, y: usize, z: usize| {
                let v = self.rsym(x, y, z);
                if inv {
                    v.conj()
                } else {
                    v
                }
            };
            for a in 0..=k {
                for b in 0..=k {
                    for c in 0..=k {
                        for d in 0..=k {
                            for e in (0..=k).filter(|&e| self.nn(c, a, e) && self.nn(e, b, d)) {
                                for g in (0..=k).filter(|&g| self.nn(c, b, g) && self.nn(a, g, d)) {
                                    let lhs = r(c, a, e) * self.fsym(a, c, b, d, e, g) * r(c, b, g);
                                    let mut rhs = C64::new(0.0, 0.0);
                                    for f in (0..=k).filter(|&f| self.nn(a, b, f)) {
                                        rhs += self.fsym(c, a, b, d, e, f) * r(c, f, d) * self.fsym(a, b, c, d, f, g);
                                    }
                                    worst = worst.max((lhs - rhs).norm());
                                }
                            }
                        }
                    }
                }
            }
        }
        worst
    }

    /// Largest deviation of an F-block from orthogonality.
    pub fn f_unitarity_residual(&self) -> f64 {
        let k = self.k;
        let mut worst: f64 = 0.0;
        for a in 0..=k {
            for b in 0..=k {
                for c in 0..=k {
                    for d in 0..=k {
                        let es: Vec<usize> = (0..=k).filter(|&e| self.nn(a, b, e) && self.nn(e, c, d)).collect();
                        let fs: Vec<usize> = (0..=k).filter(|&f| self.nn(b, c, f) && self.nn(a, f, d)).collect();
                        if es.len() != fs.len() {
                            return f64::INFINITY;
                        }
                        for &e1 in &es {
                            for &e2 in &es {
                                let s: f64 = fs.iter().map(|&f| self.fsym(a, b, c, d, e1, f) * self.fsym(a, b, c, d, e2, f)).sum();
                                worst = worst.max((s - f64::from(u8::from(e1 == e2))).abs());
                            }
                        }
                    }
                }
            }
        }
        worst
    }
}

/// Builds and validates the SU(2)_k data; errors if the pentagon or
/// hexagon residual reaches `tol`.
pub fn quantum_data(k: usize, tol: f64) -> Result<BraidedSystemData> {
    if k == 0 {
        return Err(Error::Input("level must be at least 1".into()));
    }
    let h = k + 2;
    let qdim = (0..=k).map(|a| qint(a as i64 + 1, h)).collect();
    let n = fusion_by_recursion(k);
    let mut f = HashMap::new();
    let mut r = HashMap::new();
    for a in 0..=k {
        for b in 0..=k {
            for c in 0..=k {
                if admissible(a, b, c, k) {
                    // R^{ab}_c = (−1)^{j−j1−j2} q^{(c_j − c_{j1} − c_{j2})/2}, q = e^{2πi/h}
                    let cas = |x: usize| (x * (x + 2)) as f64 / 4.0;
                    let sign = if ((c as i64 - a as i64 - b as i64) / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    let phase = PI * (cas(c) - cas(a) - cas(b)) / h as f64;
                    r.insert([a, b, c], C64::from_polar(sign, phase));
                }
                for d in 0..=k {
                    for e in 0..=k {
                        if !admissible(a, b, e, k) || !admissible(e, c, d, k) {
                            continue;
                        }
                        for ff in 0..=k {
                            if !admissible(b, c, ff, k) || !admissible(a, ff, d, k) {
                                continue;
                            }
                            let sign = if ((a + b + c + d) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                            let v = sign
                                * (qint(e as i64 + 1, h) * qint(ff as i64 + 1, h)).sqrt()
                                * six_j(a, b, e, c, d, ff, h);
                            f.insert([a, b, c, d, e, ff], v);
                        }
                    }
                }
            }
        }
    }
    let mut data = BraidedSystemData { k, qdim, n, f, r, pentagon_residual: 0.0, hexagon_residual: 0.0 };
    data.pentagon_residual = data.pentagon();
    data.hexagon_residual = data.hexagon();
    if data.pentagon_residual >= tol || data.hexagon_residual >= tol {
        return Err(Error::Check(format!(
            "SU(2)_{k} data failed self-validation: pentagon {:e}, hexagon {:e}",
            data.pentagon_residual, data.hexagon_residual
        )));
    }
    Ok(data)
}

#[derive(Serialize, Deserialize)]
struct FDoc {
    labels: [usize; 6],
    value: f64,
}
#[derive(Serialize, Deserialize)]
struct RDoc {
    labels: [usize; 3],
    re: f64,
    im: f64,
}
#[derive(Serialize, Deserialize)]
struct DataDoc {
    k: usize,
    qdim: Vec<f64>,
    n: Vec<Vec<Vec<u8>>>,
    f: Vec<FDoc>,
    r: Vec<RDoc>,
    pentagon_residual: f64,
    hexagon_residual: f64,
}

impl BraidedSystemData {
    pub fn to_json(&self) -> String {
        let f: BTreeMap<_, _> = self.f.iter().collect();
        let r: BTreeMap<_, _> = self.r.iter().collect();
        let doc = DataDoc {
            k: self.k,
            qdim: self.qdim.clone(),
            n: self.n.clone(),
            f: f.into_iter().map(|(l, &v)| FDoc { labels: *l, value: v }).collect(),
            r: r.into_iter().map(|(l, v)| RDoc { labels: *l, re: v.re, im: v.im }).collect(),
            pentagon_residual: self.pentagon_residual,
            hexagon_residual: self.hexagon_residual,
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }
}

// ------------------------------------------------------------ connections

/// The module engine of Δ acting on itself (A_{k+1}, basepoint 0).
pub fn regular_engine(k: usize) -> Result<Engine> {
    let n = k + 1;
    let h = k + 2;
    let names = (0..n).map(|i| i.to_string()).collect();
    let mut adj = vec![vec![0; n]; n];
    for i in 0..n.saturating_sub(1) {
        adj[i][i + 1] = 1;
        adj[i + 1][i] = 1;
    }
    let mu = (0..n).map(|i| qint(i as i64 + 1, h)).collect();
    Engine::new(names, adj, mu, h)
}

/// Graph on two copies of the engine's vertex set with `mult = dim E_ν`.
pub(crate) fn label_graph(e: &Engine, nu: usize) -> BipartiteGraph {
    BipartiteGraph::from_fn(e.names.clone(), e.names.clone(), |x, y| e.dim(nu, x, y))
}

/// W1(λ, μ) evaluated in the regular engine `e` (must be the Δ engine).
pub fn w1_from_engine(e: &Engine, lambda: usize, mu: usize) -> Result<Connection> {
    let k = e.k;
    if lambda > k || mu > k {
        return Err(Error::Input(format!("labels must lie in 0..={k}")));
    }
    let w = e.mu.clone();
    let shape = Shape::new(
        label_graph(e, mu),
        label_graph(e, lambda),
        label_graph(e, mu),
        label_graph(e, lambda),
        [w.clone(), w.clone(), w.clone(), w],
    )?;
    // cache of vectors per (ν1, ν4)
    let mut cache: HashMap<(usize, usize), (HashMap<usize, CMat>, HashMap<usize, CMat>)> = HashMap::new();
    Ok(Connection::from_fn(shape, |q, _, _, _, _| {
        let [n1, n3, n4, n2] = q;
        let entry = cache.entry((n1, n4)).or_insert_with(|| {
            let mut us = HashMap::new();
            let mut ws = HashMap::new();
            for x in 0..=k {
                if e.dim(mu, n1, x) > 0 && e.dim(lambda, x, n4) > 0 {
                    us.insert(x, w1_u(e, lambda, mu, n1, x, n4));
                }
                if e.dim(lambda, n1, x) > 0 && e.dim(mu, x, n4) > 0 {
                    ws.insert(x, w1_w(e, lambda, mu, n1, x, n4));
                }
            }
            (us, ws)
        });
        let u = &entry.0[&n2];
        let w = &entry.1[&n3];
        (w.adjoint() * u)[(0, 0)]
    }))
}

fn w1_u(e: &Engine, la: usize, mu: usize, n1: usize, n2: usize, n4: usize) -> CMat {
    let y = (*e.vertex(n4, la, n2, 0, n4)).clone();
    let op = |p: usize, q: usize| (*e.vertex(n2, n1, mu, p, q)).clone();
    e.apply_local(&[la, n2], 0, n4, &y, 1, 1, &[n1, mu], &op).1
}

fn w1_w(e: &Engine, la: usize, mu: usize, n1: usize, n3: usize, n4: usize) -> CMat {
    let y = (*e.vertex(n4, n3, mu, 0, n4)).clone();
    let op = |p: usize, q: usize| (*e.vertex(n3, la, n1, p, q)).clone();
    e.apply_local(&[n3, mu], 0, n4, &y, 0, 1, &[la, n1], &op).1
}

/// W1(λ, μ) for the given data.
pub fn build_w1(data: &BraidedSystemData, lambda: usize, mu: usize) -> Result<Connection> {
    let e = regular_engine(data.k)?;
    let w = w1_from_engine(&e, lambda, mu)?;
    let rep = w.verify_biunitarity(1e-9);
    if !rep.pass {
        return Err(Error::Check(format!(
            "W1({lambda},{mu}) failed bi-unitarity: {:e} / {:e}",
            rep.unitarity_residual, rep.crossing_residual
        )));
    }
    Ok(w)
}

/// Vector of a composite vertical path x →λa→ m →λb→ y, in the basis of
/// `[λb, λa, x]` from 0 to y.
fn two_step(e: &Engine, la: usize, lb: usize, x: usize, m: usize, y: usize) -> CMat {
    let v = (*e.vertex(y, lb, m, 0, y)).clone();
    let op = |p: usize, q: usize| (*e.vertex(m, la, x, p, q)).clone();
    e.apply_local(&[lb, m], 0, y, &v, 1, 1, &[la, x], &op).1
}

/// Gauge families relating compose(W1(λ1,μ), W1(λ2,μ)) to
/// compose(W1(λ2,μ), W1(λ1,μ)), built from the braiding c_{λ2,λ1}.
pub fn braiding_gauge(data: &BraidedSystemData, l1: usize, l2: usize, _mu: usize) -> Result<(GaugeFamily, GaugeFamily)> {
    let e = regular_engine(data.k)?;
    let k = e.k;
    if l1 > k || l2 > k {
        return Err(Error::Input(format!("labels must lie in 0..={k}")));
    }
    let mut fam = GaugeFamily::default();
    for x in 0..=k {
        for y in 0..=k {
            let old: Vec<usize> = (0..=k).filter(|&m| e.dim(l1, x, m) > 0 && e.dim(l2, m, y) > 0).collect();
            let new: Vec<usize> = (0..=k).filter(|&m| e.dim(l2, x, m) > 0 && e.dim(l1, m, y) > 0).collect();
            if old.is_empty() {
                continue;
            }
            let mut s = CMat::zeros(new.len(), old.len());
            for (j, &m) in old.iter().enumerate() {
                let v = two_step(&e, l1, l2, x, m, y);
                let op = |p: usize, q: usize| (*e.braid(l2, l1, Chirality::Plus, p, q)).clone();
                let cv = e.apply_local(&[l2, l1, x], 0, y, &v, 0, 2, &[l1, l2], &op).1;
                for (i, &m2) in new.iter().enumerate() {
                    let w = two_step(&e, l2, l1, x, m2, y);
                    s[(i, j)] = (w.adjoint() * &cv)[(0, 0)];
                }
            }
            fam.left.insert((x, y), s.clone());
            fam.right.insert((y, x), s);
        }
    }
    Ok((fam.clone(), fam))
}
