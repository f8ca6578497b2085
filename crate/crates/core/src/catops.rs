//! Composition, intertwiner spaces, equivalence, irreducible decomposition
//! and fusion tables of connections.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alpha::split_graded;
use crate::connection::{weights_close, Connection, GaugeFamily, Shape};
use crate::error::{Error, Result};
use crate::graphs::BipartiteGraph;
use crate::linalg::{c, hermitian_eig, polar_unitary, random_complex, CMat, C64, ZERO};

// ------------------------------------------------------------------ compose

fn middle_matches(up: &Connection, down: &Connection) -> bool {
    let gb = up.shape.g_bot.transposed();
    down.shape.g_top == gb
        && weights_close(&down.shape.weights[0], &up.shape.weights[1], 1e-9)
        && weights_close(&down.shape.weights[3], &up.shape.weights[2], 1e-9)
}

/// Vertical composition: `up` stacked on `down`. When the middle graphs do
/// not match directly, `down` is split into graded components and the
/// unique component whose top matches is used.
pub fn compose(up: &Connection, down: &Connection) -> Result<Connection> {
    if middle_matches(up, down) {
        return Ok(compose_exact(up, down));
    }
    let parts = split_graded(down).map_err(|e| Error::MiddleGraph(e.to_string()))?;
    let hits: Vec<&Connection> = parts.iter().filter(|p| middle_matches(up, p)).collect();
    match hits.len() {
        1 => Ok(compose_exact(up, hits[0])),
        0 => Err(Error::MiddleGraph("no component of the lower connection matches".into())),
        _ => Err(Error::MiddleGraph("ambiguous component matching".into())),
    }
}

/// Index of a composite vertical edge `(mid, i_up, i_down)`.
fn composite_index(m_up: &dyn Fn(usize) -> usize, m_down: &dyn Fn(usize) -> usize, n_mid: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for m in 0..n_mid {
        for i in 0..m_up(m) {
            for j in 0..m_down(m) {
                out.push((m, i, j));
            }
        }
    }
    out
}

fn compose_exact(up: &Connection, down: &Connection) -> Connection {
    let (su, sd) = (&up.shape, &down.shape);
    let n_mid_l = su.n(1);
    let n_mid_r = su.n(2);
    let left_paths = |x0: usize, y1: usize| {
        composite_index(&|m| su.h_left.mult[x0][m], &|m| sd.h_left.mult[m][y1], n_mid_l)
    };
    let right_paths = |y2: usize, x3: usize| {
        composite_index(&|m| su.h_right.mult[m][x3], &|m| sd.h_right.mult[y2][m], n_mid_r)
    };
    let h_left = BipartiteGraph::from_fn(su.v(0).clone(), sd.v(1).clone(), |a, b| left_paths(a, b).len());
    let h_right = BipartiteGraph::from_fn(sd.v(2).clone(), su.v(3).clone(), |a, b| right_paths(a, b).len());
    let shape = Shape {
        g_top: su.g_top.clone(),
        h_left,
        g_bot: sd.g_bot.clone(),
        h_right,
        weights: [su.weights[0].clone(), sd.weights[1].clone(), sd.weights[2].clone(), su.weights[3].clone()],
    };
    let mut lcache: HashMap<(usize, usize), Vec<(usize, usize, usize)>> = HashMap::new();
    let mut rcache: HashMap<(usize, usize), Vec<(usize, usize, usize)>> = HashMap::new();
    Connection::from_fn(shape, |q, l, b, t, r| {
        let [x0, y1, y2, x3] = q;
        let (m, i1, i2) = lcache.entry((x0, y1)).or_insert_with(|| left_paths(x0, y1))[l];
        let (mp, j1, j2) = rcache.entry((y2, x3)).or_insert_with(|| right_paths(y2, x3))[r];
        let mut acc = ZERO;
        for e in 0..su.g_bot.mult[mp][m] {
            let a = up.get([x0, m, mp, x3], i1, e, t, j1);
            if a == ZERO {
                continue;
            }
            acc += a * down.get([m, y1, y2, mp], i2, b, e, j2);
        }
        acc
    })
}

// ------------------------------------------------------------------ Hom

/// An intertwiner: `left[(x0, x1)]` and `right[(x2, x3)]`, each of size
/// `m_W × m_W2` on vertical multiplicity spaces.
#[derive(Clone, Debug, Default)]
pub struct Intertwiner {
    pub left: BTreeMap<(usize, usize), CMat>,
    pub right: BTreeMap<(usize, usize), CMat>,
}

impl Intertwiner {
    fn combine(basis: &[Intertwiner], coef: &[C64]) -> Intertwiner {
        let mut out = basis[0].clone();
        for (k, m) in out.left.iter_mut() {
            *m = basis.iter().zip(coef).map(|(b, &a)| &b.left[k] * a).fold(m.clone() * ZERO, |acc, x| acc + x);
        }
        for (k, m) in out.right.iter_mut() {
            *m = basis.iter().zip(coef).map(|(b, &a)| &b.right[k] * a).fold(m.clone() * ZERO, |acc, x| acc + x);
        }
        out
    }

    fn adjoint(&self) -> Intertwiner {
        Intertwiner {
            left: self.left.iter().map(|(k, m)| (*k, m.adjoint())).collect(),
            right: self.right.iter().map(|(k, m)| (*k, m.adjoint())).collect(),
        }
    }
}

fn same_frame(w: &Shape, w2: &Shape) -> bool {
    w.g_top == w2.g_top
        && w.g_bot == w2.g_bot
        && w.h_left.even == w2.h_left.even
        && w.h_left.odd == w2.h_left.odd
        && w.h_right.even == w2.h_right.even
        && w.h_right.odd == w2.h_right.odd
        && (0..4).all(|i| weights_close(&w.weights[i], &w2.weights[i], 1e-9))
}

struct UnionFind(Vec<usize>);
impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let n = self.0[y];
            self.0[y] = r;
            y = n;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Orthonormal basis of the intertwiners from `w` to `w2`:
/// `U_W (1 ⊗ Y_R) = (Y_L ⊗ 1) U_W2` on every corner pair.
pub fn hom_space(w: &Connection, w2: &Connection, tol: f64) -> Result<Vec<Intertwiner>> {
    let (s, s2) = (&w.shape, &w2.shape);
    if !same_frame(s, s2) {
        return Err(Error::Shape("hom_space needs identical horizontal graphs and vertex sets".into()));
    }
    // unknown layout
    let mut lblocks: Vec<((usize, usize), usize, usize, usize)> = Vec::new(); // key, m, m2, offset
    let mut off = 0;
    for x0 in 0..s.n(0) {
        for x1 in 0..s.n(1) {
            let (m, m2) = (s.h_left.mult[x0][x1], s2.h_left.mult[x0][x1]);
            if m * m2 > 0 {
                lblocks.push(((x0, x1), m, m2, off));
                off += m * m2;
            }
        }
    }
    let mut rblocks: Vec<((usize, usize), usize, usize, usize)> = Vec::new();
    for x2 in 0..s.n(2) {
        for x3 in 0..s.n(3) {
            let (m, m2) = (s.h_right.mult[x2][x3], s2.h_right.mult[x2][x3]);
            if m * m2 > 0 {
                rblocks.push(((x2, x3), m, m2, off));
                off += m * m2;
            }
        }
    }
    let n = off;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lmap: HashMap<(usize, usize), (usize, usize, usize)> =
        lblocks.iter().map(|&(k, m, m2, o)| (k, (m, m2, o))).collect();
    let rmap: HashMap<(usize, usize), (usize, usize, usize)> =
        rblocks.iter().map(|&(k, m, m2, o)| (k, (m, m2, o))).collect();
    // equations as sparse rows
    let mut rows: Vec<Vec<(usize, C64)>> = Vec::new();
    for x0 in 0..s.n(0) {
        for x3 in 0..s.n(3) {
            let nt = s.g_top.mult[x0][x3];
            if nt == 0 {
                continue;
            }
            for x2 in 0..s.n(2) {
                let (mr, mr2) = (s.h_right.mult[x2][x3], s2.h_right.mult[x2][x3]);
                if mr2 == 0 {
                    continue;
                }
                for x1 in 0..s.n(1) {
                    let nb = s.g_bot.mult[x2][x1];
                    let (ml, ml2) = (s.h_left.mult[x0][x1], s2.h_left.mult[x0][x1]);
                    if nb == 0 || ml == 0 {
                        continue;
                    }
                    let q = [x0, x1, x2, x3];
                    for l in 0..ml {
                        for b in 0..nb {
                            for t in 0..nt {
                                for r2 in 0..mr2 {
                                    let mut row = Vec::new();
                                    if let Some(&(_, m2, o)) = rmap.get(&(x2, x3)) {
                                        for r in 0..mr {
                                            let v = w.get(q, l, b, t, r);
                                            if v != ZERO {
                                                row.push((o + r * m2 + r2, v));
                                            }
                                        }
                                    }
                                    if let Some(&(_, m2, o)) = lmap.get(&(x0, x1)) {
                                        for l2 in 0..ml2 {
                                            let v = w2.get(q, l2, b, t, r2);
                                            if v != ZERO {
                                                row.push((o + l * m2 + l2, -v));
                                            }
                                        }
                                    }
                                    if !row.is_empty() {
                                        rows.push(row);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    // decouple into connected groups of unknowns
    let mut uf = UnionFind((0..n).collect());
    for row in &rows {
        for w in row.windows(2) {
            uf.union(w[0].0, w[1].0);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = uf.find(i);
        groups.entry(r).or_default().push(i);
    }
    let mut pos = vec![0usize; n];
    let mut gid = vec![0usize; n];
    let glist: Vec<Vec<usize>> = groups.into_values().collect();
    for (g, members) in glist.iter().enumerate() {
        for (p, &i) in members.iter().enumerate() {
            pos[i] = p;
            gid[i] = g;
        }
    }
    let mut grams: Vec<CMat> = glist.iter().map(|m| CMat::zeros(m.len(), m.len())).collect();
    for row in &rows {
        let g = gid[row[0].0];
        let gm = &mut grams[g];
        for &(i, a) in row {
            for &(j, b) in row {
                gm[(pos[i], pos[j])] += a.conj() * b;
            }
        }
    }
    let thr = tol.max(1e-13) * 10.0;
    let mut vecs: Vec<Vec<C64>> = Vec::new();
    for (g, members) in glist.iter().enumerate() {
        let (vals, v) = hermitian_eig(&grams[g]);
        for (k, &lam) in vals.iter().enumerate() {
            if lam < thr {
                let mut full = vec![ZERO; n];
                for (p, &i) in members.iter().enumerate() {
                    full[i] = v[(p, k)];
                }
                vecs.push(full);
            }
        }
    }
    let unpack = |x: &Vec<C64>| -> Intertwiner {
        let mut it = Intertwiner::default();
        for &(key, m, m2, o) in &lblocks {
            it.left.insert(key, CMat::from_fn(m, m2, |i, j| x[o + i * m2 + j]));
        }
        for &(key, m, m2, o) in &rblocks {
            it.right.insert(key, CMat::from_fn(m, m2, |i, j| x[o + i * m2 + j]));
        }
        it
    };
    Ok(vecs.iter().map(unpack).collect())
}

/// Result of an equivalence search.
#[derive(Clone, Debug)]
pub struct Equivalence {
    /// Gauge taking `w` to `w2`.
    pub gauge: GaugeFamily,
    pub residual: f64,
}

fn vertical_dims_equal(a: &Shape, b: &Shape) -> bool {
    a.h_left.mult == b.h_left.mult && a.h_right.mult == b.h_right.mult
}

/// Searches for a unitary gauge taking `w` to `w2`: a generic element of
/// the intertwiner space, blockwise polar-corrected.
pub fn equivalent(w: &Connection, w2: &Connection, tol: f64) -> Result<Option<Equivalence>> {
    if !same_frame(&w.shape, &w2.shape) {
        return Err(Error::Shape("equivalence needs identical horizontal graphs".into()));
    }
    if !vertical_dims_equal(&w.shape, &w2.shape) {
        return Ok(None);
    }
    let basis = hom_space(w, w2, tol)?;
    if basis.is_empty() {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _attempt in 0..4 {
        let coef: Vec<C64> = (0..basis.len()).map(|_| random_complex(&mut rng)).collect();
        let y = Intertwiner::combine(&basis, &coef);
        let mut g = GaugeFamily::default();
        let mut ok = true;
        for (k, m) in &y.left {
            match polar_unitary(m) {
                Some(u) => {
                    g.left.insert(*k, u.adjoint());
                }
                None => ok = false,
            }
        }
        for (k, m) in &y.right {
            match polar_unitary(m) {
                Some(u) => {
                    g.right.insert(*k, u.adjoint());
                }
                None => ok = false,
            }
        }
        if !ok {
            continue;
        }
        let moved = w.gauge_transform(&g, false, 0.0)?;
        let residual = moved.max_diff(w2);
        if residual <= (tol * 100.0).max(1e-8) {
            return Ok(Some(Equivalence { gauge: g, residual }));
        }
    }
    Ok(None)
}

// ------------------------------------------------------------------ decompose

/// Cuts out the sub-connection on the ranges of isometries `vl`, `vr`.
fn compress(w: &Connection, vl: &BTreeMap<(usize, usize), CMat>, vr: &BTreeMap<(usize, usize), CMat>) -> Result<Connection> {
    let s = &w.shape;
    let mut g = GaugeFamily::default();
    for x0 in 0..s.n(0) {
        for x1 in 0..s.n(1) {
            let m = s.h_left.mult[x0][x1];
            if m > 0 {
                g.left.insert((x0, x1), vl.get(&(x0, x1)).map(|v| v.adjoint()).unwrap_or_else(|| CMat::zeros(0, m)));
            }
        }
    }
    for x2 in 0..s.n(2) {
        for x3 in 0..s.n(3) {
            let m = s.h_right.mult[x2][x3];
            if m > 0 {
                g.right.insert((x2, x3), vr.get(&(x2, x3)).map(|v| v.adjoint()).unwrap_or_else(|| CMat::zeros(0, m)));
            }
        }
    }
    w.gauge_transform(&g, false, 0.0)
}

fn end_dim(w: &Connection, tol: f64) -> Result<usize> {
    Ok(hom_space(w, w, tol)?.len())
}

fn split_once(w: &Connection, seed: u64, tol: f64) -> Result<Vec<Connection>> {
    let basis = hom_space(w, w, tol)?;
    if basis.len() <= 1 {
        return Ok(vec![w.clone()]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef: Vec<C64> = (0..basis.len()).map(|_| random_complex(&mut rng)).collect();
    let y = Intertwiner::combine(&basis, &coef);
    let ya = y.adjoint();
    let herm = |a: &CMat, b: &CMat| (a + b) * c(0.5);
    let mut eig: Vec<(bool, (usize, usize), Vec<f64>, CMat)> = Vec::new();
    for (k, m) in &y.left {
        let (vals, vecs) = hermitian_eig(&herm(m, &ya.left[k]));
        eig.push((false, *k, vals, vecs));
    }
    for (k, m) in &y.right {
        let (vals, vecs) = hermitian_eig(&herm(m, &ya.right[k]));
        eig.push((true, *k, vals, vecs));
    }
    // cluster eigenvalues globally
    let mut all: Vec<f64> = eig.iter().flat_map(|e| e.2.iter().copied()).collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = all.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
    let gap = 1e-6 * scale;
    let mut centers: Vec<(f64, f64)> = Vec::new(); // (lo, hi)
    for &v in &all {
        match centers.last_mut() {
            Some((_, hi)) if v - *hi <= gap => *hi = v,
            _ => centers.push((v, v)),
        }
    }
    let mut out = Vec::new();
    for &(lo, hi) in &centers {
        let mut vl = BTreeMap::new();
        let mut vr = BTreeMap::new();
        for (is_right, key, vals, vecs) in &eig {
            let cols: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] >= lo - gap / 2.0 && vals[i] <= hi + gap / 2.0).collect();
            let m = CMat::from_fn(vecs.nrows(), cols.len(), |i, j| vecs[(i, cols[j])]);
            if *is_right {
                vr.insert(*key, m);
            } else {
                vl.insert(*key, m);
            }
        }
        out.push(compress(w, &vl, &vr)?);
    }
    Ok(out)
}

fn vertical_signature(w: &Connection) -> Vec<usize> {
    let s = &w.shape;
    s.h_left.mult.iter().flatten().chain(s.h_right.mult.iter().flatten()).copied().collect()
}

fn value_signature(w: &Connection) -> Vec<(i64, i64)> {
    w.cells().iter().map(|c| ((c.value.re * 1e8).round() as i64, (c.value.im * 1e8).round() as i64)).collect()
}

/// Irreducible decomposition `[(component, multiplicity)]`, components
/// pairwise inequivalent and canonically gauged.
pub fn decompose(w: &Connection, seed: u64, tol: f64) -> Result<Vec<(Connection, usize)>> {
    let mut pending = vec![(w.clone(), seed)];
    let mut irreducible: Vec<Connection> = Vec::new();
    let mut guard = 0;
    while let Some((x, sd)) = pending.pop() {
        guard += 1;
        if guard > 10_000 {
            return Err(Error::Check("decomposition does not terminate (End not closed?)".into()));
        }
        let parts = split_once(&x, sd, tol)?;
        if parts.len() == 1 {
            let d = end_dim(&parts[0], tol)?;
            if d == 1 {
                irreducible.push(parts.pop_single());
            } else if d == 0 {
                // empty piece (no cells): skip
                continue;
            } else {
                pending.push((parts.pop_single(), sd.wrapping_add(1)));
            }
        } else {
            for p in parts {
                if p.n_cells() == 0 {
                    continue;
                }
                pending.push((p, sd.wrapping_add(1)));
            }
        }
    }
    // group by equivalence
    let mut reps: Vec<(Connection, usize)> = Vec::new();
    'outer: for x in irreducible {
        for (r, mult) in reps.iter_mut() {
            if same_frame(&r.shape, &x.shape) && vertical_dims_equal(&r.shape, &x.shape) && !hom_space(r, &x, tol)?.is_empty() {
                *mult += 1;
                continue 'outer;
            }
        }
        reps.push((x, 1));
    }
    let mut out: Vec<(Connection, usize)> = reps.into_iter().map(|(r, m)| (r.canonical_gauge(), m)).collect();
    out.sort_by(|a, b| {
        vertical_signature(&a.0)
            .cmp(&vertical_signature(&b.0))
            .then_with(|| value_signature(&a.0).cmp(&value_signature(&b.0)))
    });
    Ok(out)
}

trait PopSingle {
    fn pop_single(self) -> Connection;
}
impl PopSingle for Vec<Connection> {
    fn pop_single(mut self) -> Connection {
        self.pop().expect("one element")
    }
}

/// Number of times irreducible `x` occurs in `w` (dim Hom(x, w)), 0 when the
/// frames differ.
pub fn multiplicity(x: &Connection, w: &Connection, tol: f64) -> Result<usize> {
    if !same_frame(&x.shape, &w.shape) {
        return Ok(0);
    }
    Ok(hom_space(x, w, tol)?.len())
}

// ------------------------------------------------------------------ fusion

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionTable {
    pub labels: Vec<String>,
    /// `N[i][j][k]`: multiplicity of k in i·j; −1 where the right factor
    /// has no known two-sided (ungraded) form.
    #[serde(rename = "N")]
    pub n: Vec<Vec<Vec<i64>>>,
}

impl FusionTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// One digraph per label j: edge i → k with multiplicity N[i][j][k].
    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        for (j, lj) in self.labels.iter().enumerate() {
            s.push_str(&format!("digraph \"fusion_{lj}\" {{\n"));
            for (i, li) in self.labels.iter().enumerate() {
                for (k, lk) in self.labels.iter().enumerate() {
                    let m = self.n[i][j][k];
                    if m > 0 {
                        s.push_str(&format!("  \"{li}\" -> \"{lk}\" [label=\"{m}\"];\n"));
                    }
                }
            }
            s.push_str("}\n");
        }
        s
    }
}

/// Objects of a fusion closure: a one-sided (graded) piece plus, when known,
/// the full connection used as a right factor.
pub struct FusionSystem {
    pub objects: Vec<Connection>,
    pub full: Vec<Option<Connection>>,
    pub table: FusionTable,
}

fn first_piece(w: &Connection) -> Result<Connection> {
    Ok(split_graded(w)?.into_iter().next().ok_or_else(|| Error::Input("connection without cells".into()))?)
}

fn find_equivalent(objs: &[Connection], x: &Connection, tol: f64) -> Result<Option<usize>> {
    for (i, o) in objs.iter().enumerate() {
        if same_frame(&o.shape, &x.shape) && vertical_dims_equal(&o.shape, &x.shape) && !hom_space(o, x, tol)?.is_empty() {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Closes `{identity} ∪ gens` under composition and decomposition. Objects
/// are the graded pieces containing the lightest top vertex; products are
/// formed with the full generators as right factors (component-matched).
pub fn fusion_closure(gens: &[Connection], identity: &Connection, closure_cap: usize, tol: f64) -> Result<FusionSystem> {
    let mut objects: Vec<Connection> = Vec::new();
    let mut full: Vec<Option<Connection>> = Vec::new();
    let id_piece = first_piece(identity)?;
    objects.push(id_piece);
    full.push(Some(identity.clone()));
    for g in gens {
        let piece = first_piece(g)?;
        let parts = decompose(&piece, 0, tol)?;
        let whole = parts.len() == 1 && parts[0].1 == 1;
        for (p, _) in parts {
            match find_equivalent(&objects, &p, tol)? {
                Some(i) => {
                    if whole && full[i].is_none() {
                        full[i] = Some(g.clone());
                    }
                }
                None => {
                    if objects.len() >= closure_cap {
                        return Err(Error::Cap(closure_cap));
                    }
                    objects.push(p);
                    full.push(if whole { Some(g.clone()) } else { None });
                }
            }
        }
    }
    // products
    let mut products: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    let mut i = 0;
    while i < objects.len() {
        for j in 0..objects.len() {
            if products.contains_key(&(i, j)) {
                continue;
            }
            let Some(fj) = full[j].clone() else { continue };
            let prod = compose(&objects[i], &fj)?;
            let parts = decompose(&prod, 0, tol)?;
            let mut entry = Vec::new();
            for (p, mult) in parts {
                let k = match find_equivalent(&objects, &p, tol)? {
                    Some(k) => k,
                    None => {
                        if objects.len() >= closure_cap {
                            return Err(Error::Cap(closure_cap));
                        }
                        objects.push(p);
                        full.push(None);
                        objects.len() - 1
                    }
                };
                entry.push((k, mult));
            }
            products.insert((i, j), entry);
        }
        i += 1;
        // revisit earlier rows for newly added columns with a full form
        if i == objects.len() {
            let missing = (0..objects.len())
                .flat_map(|a| (0..objects.len()).map(move |b| (a, b)))
                .find(|&(a, b)| full[b].is_some() && !products.contains_key(&(a, b)));
            if let Some((a, _)) = missing {
                i = a;
            }
        }
    }
    let n = objects.len();
    let mut table = vec![vec![vec![0i64; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            match products.get(&(a, b)) {
                Some(entry) => {
                    for &(k, m) in entry {
                        table[a][b][k] += m as i64;
                    }
                }
                None => table[a][b].iter_mut().for_each(|x| *x = -1),
            }
        }
    }
    let labels = (0..n).map(|i| format!("X{i}")).collect();
    Ok(FusionSystem { objects, full, table: FusionTable { labels, n: table } })
}

pub fn fusion_table(gens: &[Connection], identity: &Connection, closure_cap: usize) -> Result<FusionTable> {
    Ok(fusion_closure(gens, identity, closure_cap, 1e-9)?.table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ade::{dynkin, ocneanu_connection};
    use crate::planar::Chirality;

    #[test]
    fn e6_chiralities_inequivalent_a4_equivalent() {
        let e6 = dynkin("E6").unwrap();
        let p = ocneanu_connection(&e6, Chirality::Plus).unwrap();
        let m = ocneanu_connection(&e6, Chirality::Minus).unwrap();
        assert_eq!(hom_space(&p, &p, 1e-9).unwrap().len(), 1);
        assert_eq!(hom_space(&p, &m, 1e-9).unwrap().len(), 0);
        let a4 = dynkin("A4").unwrap();
        let p = ocneanu_connection(&a4, Chirality::Plus).unwrap();
        let m = ocneanu_connection(&a4, Chirality::Minus).unwrap();
        let eq = equivalent(&p, &m, 1e-9).unwrap().expect("A-type chiralities are equivalent");
        assert!(eq.residual < 1e-9);
    }
}
