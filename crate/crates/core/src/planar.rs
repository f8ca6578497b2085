//! Temperley–Lieb module engine over a bipartite graph.
//!
//! For a graph with Perron–Frobenius eigenvalue 2cos(π/h) we realize the
//! spaces `E_ν(x, y) = Hom(x·ν, y)` as Jones–Wenzl images inside path space,
//! stored recursively: `E_ν(x, y)` embeds isometrically into
//! `⊕_w E_{ν-1}(x, w) ⊗ E_1(w, y)`. Vectors in composite spaces are indexed
//! by keys listing the inner vertices followed by the per-factor indices.
//! On top of this we build trivalent vertex maps and braidings, which is all
//! the connection builders need.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::linalg::{c, orthonormalize, CMat, C64, ONE, ZERO};

/// Basis of a composite space `x·l1·…·lr → y`.
#[derive(Debug)]
pub struct Basis {
    /// Each key: `r-1` inner vertices, then `r` factor indices.
    pub keys: Vec<Vec<u16>>,
    pub index: HashMap<Vec<u16>, usize>,
}

impl Basis {
    pub fn len(&self) -> usize {
        self.keys.len()
    }
    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// Braid chirality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Chirality {
    Plus,
    Minus,
}

impl Chirality {
    pub fn opposite(self) -> Self {
        match self {
            Chirality::Plus => Chirality::Minus,
            Chirality::Minus => Chirality::Plus,
        }
    }
    pub fn sign(self) -> i32 {
        match self {
            Chirality::Plus => 1,
            Chirality::Minus => -1,
        }
    }
    pub fn symbol(self) -> &'static str {
        match self {
            Chirality::Plus => "+",
            Chirality::Minus => "-",
        }
    }
}

type BasisKey = (Vec<usize>, usize, usize);

pub struct Engine {
    pub h: usize,
    pub k: usize,
    pub names: Vec<String>,
    pub adj: Vec<Vec<usize>>,
    pub mu: Vec<f64>,
    /// Kauffman variable A = i·exp(iπ/(2h)).
    pub a: C64,
    dims: Vec<Vec<Vec<usize>>>,
    incl: Vec<HashMap<(usize, usize), CMat>>,
    bases: RefCell<HashMap<BasisKey, Rc<Basis>>>,
    ymemo: RefCell<HashMap<(usize, usize, usize, usize, usize), Rc<CMat>>>,
    ysigma: RefCell<HashMap<(usize, usize, usize), usize>>,
    bmemo: RefCell<HashMap<(usize, usize, Chirality, usize, usize), Rc<CMat>>>,
}

impl Engine {
    /// `adj` symmetric multiplicity matrix, `mu` PF weights; `h` is recovered
    /// from the graph norm by the caller.
    pub fn new(names: Vec<String>, adj: Vec<Vec<usize>>, mu: Vec<f64>, h: usize) -> Result<Engine> {
        if h < 3 {
            return Err(Error::Input("Coxeter number must be at least 3".into()));
        }
        let n = names.len();
        let a = C64::from_polar(1.0, PI / 2.0 + PI / (2.0 * h as f64));
        let mut e = Engine {
            h,
            k: h - 2,
            names,
            adj,
            mu,
            a,
            dims: Vec::new(),
            incl: Vec::new(),
            bases: RefCell::new(HashMap::new()),
            ymemo: RefCell::new(HashMap::new()),
            ysigma: RefCell::new(HashMap::new()),
            bmemo: RefCell::new(HashMap::new()),
        };
        let id: Vec<Vec<usize>> = (0..n).map(|x| (0..n).map(|y| usize::from(x == y)).collect()).collect();
        e.dims.push(id);
        e.incl.push(HashMap::new());
        e.dims.push(e.adj.clone());
        let mut c1 = HashMap::new();
        for x in 0..n {
            for y in 0..n {
                let m = e.adj[x][y];
                if m > 0 {
                    c1.insert((x, y), CMat::identity(m, m));
                }
            }
        }
        e.incl.push(c1);
        for nu in 2..=e.k + 1 {
            e.grow(nu)?;
        }
        if e.dims[e.k + 1].iter().flatten().any(|&d| d != 0) {
            return Err(Error::Check(format!(
                "graph is not compatible with Coxeter number {h}: E_{{k+1}} does not vanish"
            )));
        }
        Ok(e)
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn delta(&self) -> f64 {
        2.0 * (PI / self.h as f64).cos()
    }

    /// dim E_ν(x, y).
    pub fn dim(&self, nu: usize, x: usize, y: usize) -> usize {
        if nu > self.k + 1 {
            return 0;
        }
        self.dims[nu][x][y]
    }

    fn grow(&mut self, nu: usize) -> Result<()> {
        let n = self.n();
        let mut dims = vec![vec![0; n]; n];
        let mut incl = HashMap::new();
        // dims[nu] is needed by basis() only for labels < nu here.
        for x in 0..n {
            for y in 0..n {
                let sb = self.basis(&[nu - 1, 1], x, y);
                if sb.is_empty() {
                    continue;
                }
                // image of E_{nu-2}(x,y) ⊗ cup under the projection
                let cap = self.cap_channel(nu - 2, x, y);
                let q = orthonormalize(&cap, 1e-9);
                let mut proj = CMat::identity(sb.len(), sb.len());
                if q.ncols() > 0 {
                    proj -= &q * q.adjoint();
                }
                let comp = orthonormalize(&proj, 1e-6);
                let expect = sb.len() as isize - self.dims[nu - 2][x][y] as isize;
                if comp.ncols() as isize != expect.max(0) {
                    return Err(Error::Check(format!(
                        "Jones–Wenzl dimension mismatch at level {nu} ({x},{y}): {} vs {expect}",
                        comp.ncols()
                    )));
                }
                if comp.ncols() > 0 {
                    dims[x][y] = comp.ncols();
                    incl.insert((x, y), comp);
                }
            }
        }
        self.dims.push(dims);
        self.incl.push(incl);
        Ok(())
    }

    /// Columns: for each t ∈ E_ρ(x,y), the vector (π_{ρ+1}⊗1)(t ⊗ cup_y)
    /// in the basis of `[ρ+1, 1]`.
    fn cap_channel(&self, rho: usize, x: usize, y: usize) -> CMat {
        let cup = |u: usize, v: usize| self.cup_op(u, v);
        let (lab, m) = self.apply_local(&[rho], x, y, &self.identity(&[rho], x, y), 1, 0, &[1, 1], &cup);
        debug_assert_eq!(lab, vec![rho, 1, 1]);
        let proj = |u: usize, v: usize| self.proj_op(rho + 1, u, v);
        let (_, m2) = self.apply_local(&lab, x, y, &m, 0, 2, &[rho + 1], &proj);
        m2
    }

    // ------------------------------------------------------------ bases

    pub fn basis(&self, labels: &[usize], x: usize, y: usize) -> Rc<Basis> {
        let key = (labels.to_vec(), x, y);
        if let Some(b) = self.bases.borrow().get(&key) {
            return b.clone();
        }
        let r = labels.len();
        let mut keys = Vec::new();
        if r == 0 {
            if x == y {
                keys.push(Vec::new());
            }
        } else {
            let mut verts = vec![0usize; r + 1];
            verts[0] = x;
            verts[r] = y;
            self.enum_paths(labels, 1, &mut verts, &mut keys);
        }
        let index = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        let b = Rc::new(Basis { keys, index });
        self.bases.borrow_mut().insert(key, b.clone());
        b
    }

    fn enum_paths(&self, labels: &[usize], pos: usize, verts: &mut Vec<usize>, out: &mut Vec<Vec<u16>>) {
        let r = labels.len();
        if pos == r {
            if self.dim(labels[r - 1], verts[r - 1], verts[r]) == 0 {
                return;
            }
            let dims: Vec<usize> = (0..r).map(|j| self.dim(labels[j], verts[j], verts[j + 1])).collect();
            let mut idx = vec![0usize; r];
            loop {
                let mut key: Vec<u16> = verts[1..r].iter().map(|&v| v as u16).collect();
                key.extend(idx.iter().map(|&i| i as u16));
                out.push(key);
                let mut j = r;
                loop {
                    if j == 0 {
                        return;
                    }
                    j -= 1;
                    idx[j] += 1;
                    if idx[j] < dims[j] {
                        break;
                    }
                    idx[j] = 0;
                }
            }
        }
        for w in 0..self.n() {
            if self.dim(labels[pos - 1], verts[pos - 1], w) == 0 {
                continue;
            }
            verts[pos] = w;
            self.enum_paths(labels, pos + 1, verts, out);
        }
    }

    pub fn identity(&self, labels: &[usize], x: usize, y: usize) -> CMat {
        let n = self.basis(labels, x, y).len();
        CMat::identity(n, n)
    }

    /// Applies a local operator to factors `[pos, pos+n_in)` of every column
    /// of `m` (columns are vectors in the basis of `labels`). The operator
    /// maps `basis(in-run, u, v)` to `basis(out_mid, u, v)`.
    pub fn apply_local(
        &self,
        labels: &[usize],
        x: usize,
        y: usize,
        m: &CMat,
        pos: usize,
        n_in: usize,
        out_mid: &[usize],
        op: &dyn Fn(usize, usize) -> CMat,
    ) -> (Vec<usize>, CMat) {
        let r = labels.len();
        let in_mid: Vec<usize> = labels[pos..pos + n_in].to_vec();
        let mut out_labels: Vec<usize> = labels[..pos].to_vec();
        out_labels.extend_from_slice(out_mid);
        out_labels.extend_from_slice(&labels[pos + n_in..]);
        let bin = self.basis(labels, x, y);
        let bout = self.basis(&out_labels, x, y);
        let r_out = out_labels.len();
        let mut result = CMat::zeros(bout.len(), m.ncols());
        let mut cache: HashMap<(usize, usize), (Rc<Basis>, Rc<Basis>, CMat)> = HashMap::new();
        for (col_in, key) in bin.keys.iter().enumerate() {
            // full vertex sequence v0..vr
            let mut verts = Vec::with_capacity(r + 1);
            verts.push(x);
            verts.extend(key[..r.saturating_sub(1)].iter().map(|&v| v as usize));
            if r > 0 {
                verts.push(y);
            }
            let idx = &key[r.saturating_sub(1)..];
            let (u, v) = (verts[pos], verts[pos + n_in]);
            let entry = cache.entry((u, v)).or_insert_with(|| {
                (self.basis(&in_mid, u, v), self.basis(out_mid, u, v), op(u, v))
            });
            let (bmi, bmo, mat) = (&entry.0, &entry.1, &entry.2);
            let mut mid_key: Vec<u16> = if n_in > 0 {
                verts[pos + 1..pos + n_in].iter().map(|&w| w as u16).collect()
            } else {
                Vec::new()
            };
            mid_key.extend_from_slice(&idx[pos..pos + n_in]);
            let Some(&mi) = bmi.index.get(&mid_key) else { continue };
            let row_coeffs: Vec<C64> = (0..m.ncols()).map(|j| m[(col_in, j)]).collect();
            if row_coeffs.iter().all(|z| *z == ZERO) {
                continue;
            }
            let n_out = out_mid.len();
            for (mo, okey) in bmo.keys.iter().enumerate() {
                let coef = mat[(mo, mi)];
                if coef == ZERO {
                    continue;
                }
                // full output vertex sequence, then strip the endpoints
                let mut seq: Vec<u16> = verts[..=pos].iter().map(|&w| w as u16).collect();
                seq.extend_from_slice(&okey[..n_out.saturating_sub(1)]);
                let tail = if n_out == 0 { pos + n_in + 1 } else { pos + n_in };
                seq.extend(verts[tail..].iter().map(|&w| w as u16));
                debug_assert_eq!(seq.len(), r_out + 1);
                let mut full_key: Vec<u16> =
                    if seq.len() >= 2 { seq[1..seq.len() - 1].to_vec() } else { Vec::new() };
                full_key.extend_from_slice(&idx[..pos]);
                full_key.extend_from_slice(&okey[n_out.saturating_sub(1)..]);
                full_key.extend_from_slice(&idx[pos + n_in..]);
                let Some(&row_out) = bout.index.get(&full_key) else {
                    panic!("apply_local produced an unknown key");
                };
                for j in 0..m.ncols() {
                    result[(row_out, j)] += coef * row_coeffs[j];
                }
            }
        }
        (out_labels, result)
    }

    // ------------------------------------------------------------ local ops

    /// `[ν] → [ν-1, 1]`.
    pub fn incl_op(&self, nu: usize, u: usize, v: usize) -> CMat {
        let rows = self.basis(&[nu - 1, 1], u, v).len();
        match self.incl[nu].get(&(u, v)) {
            Some(m) => m.clone(),
            None => CMat::zeros(rows, 0),
        }
    }

    /// `[ν-1, 1] → [ν]`.
    pub fn proj_op(&self, nu: usize, u: usize, v: usize) -> CMat {
        self.incl_op(nu, u, v).adjoint()
    }

    /// `[] → [1, 1]` at `u == v`.
    fn cup_op(&self, u: usize, v: usize) -> CMat {
        let b = self.basis(&[1, 1], u, v);
        let mut m = CMat::zeros(b.len(), if u == v { 1 } else { 0 });
        if u == v {
            for (i, key) in b.keys.iter().enumerate() {
                let w = key[0] as usize;
                if key[1] == key[2] {
                    m[(i, 0)] = c((self.mu[w] / self.mu[u]).sqrt());
                }
            }
        }
        m
    }

    /// Crossing `A^s·1 + A^{-s}·e` on `[1, 1]`.
    pub fn sigma_op(&self, ch: Chirality, u: usize, v: usize) -> CMat {
        let b = self.basis(&[1, 1], u, v);
        let (a, ai) = match ch {
            Chirality::Plus => (self.a, self.a.inv()),
            Chirality::Minus => (self.a.inv(), self.a),
        };
        let mut m = CMat::identity(b.len(), b.len()) * a;
        if u == v {
            for (i, ki) in b.keys.iter().enumerate() {
                if ki[1] != ki[2] {
                    continue;
                }
                for (j, kj) in b.keys.iter().enumerate() {
                    if kj[1] != kj[2] {
                        continue;
                    }
                    let (wi, wj) = (ki[0] as usize, kj[0] as usize);
                    m[(i, j)] += ai * c((self.mu[wi] * self.mu[wj]).sqrt() / self.mu[u]);
                }
            }
        }
        m
    }

    // ------------------------------------------------------------ vertices

    pub fn admissible(&self, rho: usize, a: usize, b: usize) -> bool {
        rho <= a + b && rho + a >= b && rho + b >= a && (rho + a + b) % 2 == 0 && rho + a + b <= 2 * self.k
    }

    /// Isometric trivalent vertex `E_ρ(u, v) → ⊕_w E_a(u, w) ⊗ E_b(w, v)`.
    pub fn vertex(&self, rho: usize, a: usize, b: usize, u: usize, v: usize) -> Rc<CMat> {
        let key = (rho, a, b, u, v);
        if let Some(m) = self.ymemo.borrow().get(&key) {
            return m.clone();
        }
        let m = Rc::new(self.vertex_uncached(rho, a, b, u, v));
        self.ymemo.borrow_mut().insert(key, m.clone());
        m
    }

    fn vertex_uncached(&self, rho: usize, a: usize, b: usize, u: usize, v: usize) -> CMat {
        let rows = self.basis(&[a, b], u, v).len();
        let ncols = self.dim(rho, u, v);
        if ncols == 0 || !self.admissible(rho, a, b) {
            return CMat::zeros(rows, ncols);
        }
        if b == 0 {
            return self.relabel(&[rho], &[rho, 0], u, v);
        }
        if a == 0 {
            return self.relabel(&[rho], &[0, rho], u, v);
        }
        if b == 1 {
            if a + 1 == rho {
                return self.incl_op(rho, u, v);
            }
            let m = self.cap_channel(rho, u, v);
            return normalize_isometry(m);
        }
        // recursion through σ = ρ∓1
        let chosen = self.ysigma.borrow().get(&(rho, a, b)).copied();
        let candidates: Vec<usize> = match chosen {
            Some(s) => vec![s],
            None => {
                let mut v = Vec::new();
                if rho >= 1 {
                    v.push(rho - 1);
                }
                v.push(rho + 1);
                v
            }
        };
        for sigma in candidates {
            if sigma > self.k || !self.admissible(sigma, a, b - 1) || !self.admissible(rho, sigma, 1) {
                continue;
            }
            let m = self.vertex_via(rho, a, b, sigma, u, v);
            let kappa2 = (m.adjoint() * &m)[(0, 0)].re;
            if kappa2 > 1e-16 {
                self.ysigma.borrow_mut().insert((rho, a, b), sigma);
                return m * c(1.0 / kappa2.sqrt());
            }
        }
        panic!("no admissible recursion for vertex ({rho}; {a}, {b})");
    }

    fn vertex_via(&self, rho: usize, a: usize, b: usize, sigma: usize, u: usize, v: usize) -> CMat {
        let y1 = |p: usize, q: usize| (*self.vertex(rho, sigma, 1, p, q)).clone();
        let m0 = self.identity(&[rho], u, v);
        let (l1, m1) = self.apply_local(&[rho], u, v, &m0, 0, 1, &[sigma, 1], &y1);
        let y2 = |p: usize, q: usize| (*self.vertex(sigma, a, b - 1, p, q)).clone();
        let (l2, m2) = self.apply_local(&l1, u, v, &m1, 0, 1, &[a, b - 1], &y2);
        let pr = |p: usize, q: usize| self.proj_op(b, p, q);
        let (_, m3) = self.apply_local(&l2, u, v, &m2, 1, 2, &[b], &pr);
        m3
    }

    fn relabel(&self, from: &[usize], to: &[usize], u: usize, v: usize) -> CMat {
        // Inserting or removing E_0 factors: match keys by nonzero labels.
        let bf = self.basis(from, u, v);
        let bt = self.basis(to, u, v);
        let mut m = CMat::zeros(bt.len(), bf.len());
        let sig = |labels: &[usize], key: &Vec<u16>, uu: usize, vv: usize| -> (Vec<usize>, Vec<u16>) {
            let r = labels.len();
            let mut verts = vec![uu];
            verts.extend(key[..r - 1].iter().map(|&w| w as usize));
            verts.push(vv);
            let mut vs = vec![];
            let mut ix = vec![];
            for j in 0..r {
                if labels[j] != 0 {
                    vs.push(verts[j + 1]);
                    ix.push(key[r - 1 + j]);
                }
            }
            (vs, ix)
        };
        for (i, kf) in bf.keys.iter().enumerate() {
            let sf = sig(from, kf, u, v);
            for (j, kt) in bt.keys.iter().enumerate() {
                if sig(to, kt, u, v) == sf {
                    m[(j, i)] = ONE;
                }
            }
        }
        m
    }

    // ------------------------------------------------------------ braids

    /// Braiding `⊕ E_a ⊗ E_b → ⊕ E_b ⊗ E_a` between `u` and `v`.
    pub fn braid(&self, a: usize, b: usize, ch: Chirality, u: usize, v: usize) -> Rc<CMat> {
        let key = (a, b, ch, u, v);
        if let Some(m) = self.bmemo.borrow().get(&key) {
            return m.clone();
        }
        let m = Rc::new(self.braid_uncached(a, b, ch, u, v));
        self.bmemo.borrow_mut().insert(key, m.clone());
        m
    }

    fn braid_uncached(&self, a: usize, b: usize, ch: Chirality, u: usize, v: usize) -> CMat {
        if a == 0 || b == 0 {
            return self.relabel(&[a, b], &[b, a], u, v);
        }
        if a == 1 && b == 1 {
            return self.sigma_op(ch, u, v);
        }
        if a == 1 {
            let m0 = self.identity(&[1, b], u, v);
            let inc = |p: usize, q: usize| self.incl_op(b, p, q);
            let (l1, m1) = self.apply_local(&[1, b], u, v, &m0, 1, 1, &[b - 1, 1], &inc);
            let br = |p: usize, q: usize| (*self.braid(1, b - 1, ch, p, q)).clone();
            let (l2, m2) = self.apply_local(&l1, u, v, &m1, 0, 2, &[b - 1, 1], &br);
            let sg = |p: usize, q: usize| self.sigma_op(ch, p, q);
            let (l3, m3) = self.apply_local(&l2, u, v, &m2, 1, 2, &[1, 1], &sg);
            let pr = |p: usize, q: usize| self.proj_op(b, p, q);
            let (_, m4) = self.apply_local(&l3, u, v, &m3, 0, 2, &[b], &pr);
            return m4;
        }
        let m0 = self.identity(&[a, b], u, v);
        let inc = |p: usize, q: usize| self.incl_op(a, p, q);
        let (l1, m1) = self.apply_local(&[a, b], u, v, &m0, 0, 1, &[a - 1, 1], &inc);
        let b1 = |p: usize, q: usize| (*self.braid(1, b, ch, p, q)).clone();
        let (l2, m2) = self.apply_local(&l1, u, v, &m1, 1, 2, &[b, 1], &b1);
        let b2 = |p: usize, q: usize| (*self.braid(a - 1, b, ch, p, q)).clone();
        let (l3, m3) = self.apply_local(&l2, u, v, &m2, 0, 2, &[b, a - 1], &b2);
        let pr = |p: usize, q: usize| self.proj_op(a, p, q);
        let (_, m4) = self.apply_local(&l3, u, v, &m3, 1, 2, &[a], &pr);
        m4
    }
}

fn normalize_isometry(m: CMat) -> CMat {
    if m.ncols() == 0 {
        return m;
    }
    let k2 = (m.adjoint() * &m)[(0, 0)].re;
    m * c(1.0 / k2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_residual;

    fn a_engine(n: usize) -> Engine {
        let names = (0..n).map(|i| i.to_string()).collect();
        let mut adj = vec![vec![0; n]; n];
        for i in 0..n - 1 {
            adj[i][i + 1] = 1;
            adj[i + 1][i] = 1;
        }
        let h = n + 1;
        let mu = (0..n).map(|i| ((i + 1) as f64 * PI / h as f64).sin()).collect();
        Engine::new(names, adj, mu, h).unwrap()
    }

    #[test]
    fn jw_dims_on_a5() {
        let e = a_engine(5);
        // E_ν(0, y) = δ_{νy}
        for nu in 0..5 {
            for y in 0..5 {
                assert_eq!(e.dim(nu, 0, y), usize::from(nu == y), "nu={nu} y={y}");
            }
        }
    }

    #[test]
    fn vertices_are_isometries() {
        let e = a_engine(6);
        for rho in 0..=4 {
            for a in 0..=4 {
                for b in 0..=4 {
                    for u in 0..6 {
                        for v in 0..6 {
                            let m = e.vertex(rho, a, b, u, v);
                            if m.ncols() == 0 || !e.admissible(rho, a, b) {
                                continue;
                            }
                            let g = m.adjoint() * &*m;
                            assert!((g.clone() - CMat::identity(m.ncols(), m.ncols())).norm() < 1e-10, "rho={rho} a={a} b={b} u={u} v={v} g={g}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn braids_are_unitary() {
        let e = a_engine(5);
        for a in 0..=3 {
            for b in 0..=3 {
                for u in 0..5 {
                    for v in 0..5 {
                        let m = e.braid(a, b, Chirality::Plus, u, v);
                        if m.nrows() + m.ncols() == 0 {
                            continue;
                        }
                        assert!(unitarity_residual(&m) < 1e-10, "a={a} b={b} u={u} v={v}");
                        let p = e.braid(b, a, Chirality::Minus, u, v);
                        let prod = &*p * &*m;
                        assert!((prod - CMat::identity(m.ncols(), m.ncols())).norm() < 1e-10);
                    }
                }
            }
        }
    }
}
