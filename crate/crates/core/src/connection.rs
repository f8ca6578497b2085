//! Connections: one complex number per cell of a four-graph shape.
//!
//! Corner conventions: `x0` upper-left (V0), `x1` lower-left (V1),
//! `x2` lower-right (V2), `x3` upper-right (V3). The top graph lives on
//! (V0, V3), the left graph on (V0, V1), the bottom graph on (V2, V1) and
//! the right graph on (V2, V3), the first class being the "even" side.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{index_of, BipartiteGraph};
use crate::linalg::{c, unitarity_residual, CMat, C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct Shape {
    pub g_top: BipartiteGraph,
    pub h_left: BipartiteGraph,
    pub g_bot: BipartiteGraph,
    pub h_right: BipartiteGraph,
    /// Weights on V0..V3, in vertex-list order.
    pub weights: [Vec<f64>; 4],
}

impl Shape {
    pub fn new(
        g_top: BipartiteGraph,
        h_left: BipartiteGraph,
        g_bot: BipartiteGraph,
        h_right: BipartiteGraph,
        weights: [Vec<f64>; 4],
    ) -> Result<Self> {
        let s = Shape { g_top, h_left, g_bot, h_right, weights };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.g_top.even != self.h_left.even {
            return Err(Error::Shape("V0 differs between top and left graphs".into()));
        }
        if self.h_left.odd != self.g_bot.odd {
            return Err(Error::Shape("V1 differs between left and bottom graphs".into()));
        }
        if self.g_bot.even != self.h_right.even {
            return Err(Error::Shape("V2 differs between bottom and right graphs".into()));
        }
        if self.g_top.odd != self.h_right.odd {
            return Err(Error::Shape("V3 differs between top and right graphs".into()));
        }
        for i in 0..4 {
            if self.weights[i].len() != self.v(i).len() {
                return Err(Error::Shape(format!("weights of V{i} have wrong length")));
            }
            if self.weights[i].iter().any(|&w| !(w > 0.0)) {
                return Err(Error::Shape(format!("weights of V{i} must be positive")));
            }
        }
        Ok(())
    }

    pub fn v(&self, i: usize) -> &Vec<String> {
        match i {
            0 => &self.g_top.even,
            1 => &self.h_left.odd,
            2 => &self.g_bot.even,
            _ => &self.g_top.odd,
        }
    }

    pub fn n(&self, i: usize) -> usize {
        self.v(i).len()
    }

    /// Enumerates the corner quadruples `(x0, x1, x2, x3)` carrying cells.
    pub fn quads(&self) -> Vec<[usize; 4]> {
        let mut out = Vec::new();
        for x0 in 0..self.n(0) {
            for x1 in 0..self.n(1) {
                if self.h_left.mult[x0][x1] == 0 {
                    continue;
                }
                for x3 in 0..self.n(3) {
                    if self.g_top.mult[x0][x3] == 0 {
                        continue;
                    }
                    for x2 in 0..self.n(2) {
                        if self.g_bot.mult[x2][x1] > 0 && self.h_right.mult[x2][x3] > 0 {
                            out.push([x0, x1, x2, x3]);
                        }
                    }
                }
            }
        }
        out
    }

    /// Block dimensions `[left, bot, top, right]` of a corner quadruple.
    pub fn dims(&self, q: [usize; 4]) -> [usize; 4] {
        let [x0, x1, x2, x3] = q;
        [self.h_left.mult[x0][x1], self.g_bot.mult[x2][x1], self.g_top.mult[x0][x3], self.h_right.mult[x2][x3]]
    }

    /// Renormalization factor sqrt(μ(x0)μ(x2)/(μ(x1)μ(x3))).
    pub fn cross_factor(&self, q: [usize; 4]) -> f64 {
        let w = &self.weights;
        ((w[0][q[0]] * w[2][q[2]]) / (w[1][q[1]] * w[3][q[3]])).sqrt()
    }

    pub fn same_top(&self, other_graph: &BipartiteGraph, other_w0: &[f64], other_w3: &[f64], tol: f64) -> bool {
        self.g_top == *other_graph
            && weights_close(&self.weights[0], other_w0, tol)
            && weights_close(&self.weights[3], other_w3, tol)
    }

    /// Identical graphs, weights equal up to `tol`.
    pub fn compatible(&self, other: &Shape, tol: f64) -> bool {
        self.g_top == other.g_top
            && self.h_left == other.h_left
            && self.g_bot == other.g_bot
            && self.h_right == other.h_right
            && (0..4).all(|i| weights_close(&self.weights[i], &other.weights[i], tol))
    }

    /// True when `self` and `other` share top and bottom graphs and weights.
    pub fn same_horizontal(&self, other: &Shape, tol: f64) -> bool {
        self.g_top == other.g_top
            && self.g_bot == other.g_bot
            && (0..4).all(|i| weights_close(&self.weights[i], &other.weights[i], tol))
    }
}

pub(crate) fn weights_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(1.0))
}

#[derive(Clone, Debug, PartialEq)]
struct Block {
    dims: [usize; 4],
    data: Vec<C64>,
}

impl Block {
    fn zeros(dims: [usize; 4]) -> Self {
        Block { dims, data: vec![ZERO; dims.iter().product()] }
    }
    #[inline]
    fn idx(&self, l: usize, b: usize, t: usize, r: usize) -> usize {
        let [_, nb, nt, nr] = self.dims;
        ((l * nb + b) * nt + t) * nr + r
    }
}

/// A cell given by its four edges, each `(even, odd, index)` in the
/// respective graph, and a value.
#[derive(Clone, Debug, PartialEq)]
pub struct CellValue {
    pub top: (usize, usize, usize),
    pub left: (usize, usize, usize),
    pub bot: (usize, usize, usize),
    pub right: (usize, usize, usize),
    pub value: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    pub shape: Shape,
    blocks: BTreeMap<[usize; 4], Block>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiunitarityReport {
    pub unitarity_residual: f64,
    pub crossing_residual: f64,
    pub pass: bool,
}

/// Unitary (or general) matrices acting on vertical multiplicity spaces:
/// `left[(x0, x1)]` and `right[(x2, x3)]`, each `new × old`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaugeFamily {
    pub left: BTreeMap<(usize, usize), CMat>,
    pub right: BTreeMap<(usize, usize), CMat>,
}

impl Connection {
    /// Builds a connection by evaluating `f(quad, l, b, t, r)` on every cell.
    pub fn from_fn<F>(shape: Shape, mut f: F) -> Self
    where
        F: FnMut([usize; 4], usize, usize, usize, usize) -> C64,
    {
        let mut blocks = BTreeMap::new();
        for q in shape.quads() {
            let mut blk = Block::zeros(shape.dims(q));
            let [nl, nb, nt, nr] = blk.dims;
            for l in 0..nl {
                for b in 0..nb {
                    for t in 0..nt {
                        for r in 0..nr {
                            let i = blk.idx(l, b, t, r);
                            blk.data[i] = f(q, l, b, t, r);
                        }
                    }
                }
            }
            blocks.insert(q, blk);
        }
        Connection { shape, blocks }
    }

    pub fn quads(&self) -> impl Iterator<Item = &[usize; 4]> {
        self.blocks.keys()
    }

    pub fn n_cells(&self) -> usize {
        self.blocks.values().map(|b| b.data.len()).sum()
    }

    #[inline]
    pub fn get(&self, q: [usize; 4], l: usize, b: usize, t: usize, r: usize) -> C64 {
        match self.blocks.get(&q) {
            Some(blk) => blk.data[blk.idx(l, b, t, r)],
            None => ZERO,
        }
    }

    /// Value by vertex ids; `None` when the cell does not exist.
    pub fn get_by_ids(&self, ids: [&str; 4], l: usize, b: usize, t: usize, r: usize) -> Option<C64> {
        let q = [
            self.shape.v(0).iter().position(|x| x == ids[0])?,
            self.shape.v(1).iter().position(|x| x == ids[1])?,
            self.shape.v(2).iter().position(|x| x == ids[2])?,
            self.shape.v(3).iter().position(|x| x == ids[3])?,
        ];
        let blk = self.blocks.get(&q)?;
        let d = blk.dims;
        if l >= d[0] || b >= d[1] || t >= d[2] || r >= d[3] {
            return None;
        }
        Some(blk.data[blk.idx(l, b, t, r)])
    }

    pub fn make(shape: Shape, cells: &[CellValue]) -> Result<Self> {
        shape.validate()?;
        let mut blocks: BTreeMap<[usize; 4], Block> = BTreeMap::new();
        let mut seen: BTreeMap<[usize; 4], Vec<bool>> = BTreeMap::new();
        for q in shape.quads() {
            let blk = Block::zeros(shape.dims(q));
            seen.insert(q, vec![false; blk.data.len()]);
            blocks.insert(q, blk);
        }
        for cv in cells {
            let (x0, x3, t) = cv.top;
            let (x0b, x1, l) = cv.left;
            let (x2, x1b, b) = cv.bot;
            let (x2b, x3b, r) = cv.right;
            if x0 != x0b || x1 != x1b || x2 != x2b || x3 != x3b {
                return Err(Error::Input("dangling edge: cell edges do not close a square".into()));
            }
            let q = [x0, x1, x2, x3];
            let blk = blocks
                .get_mut(&q)
                .ok_or_else(|| Error::Input(format!("dangling edge: no cell at corners {q:?}")))?;
            let d = blk.dims;
            if l >= d[0] || b >= d[1] || t >= d[2] || r >= d[3] {
                return Err(Error::Input(format!("dangling edge: edge index out of range at {q:?}")));
            }
            let i = blk.idx(l, b, t, r);
            let s = seen.get_mut(&q).unwrap();
            if s[i] {
                return Err(Error::Input(format!("duplicate cell at {q:?}")));
            }
            s[i] = true;
            blk.data[i] = cv.value;
        }
        if let Some((q, _)) = seen.iter().find(|(_, s)| s.iter().any(|x| !x)) {
            return Err(Error::Input(format!("missing cell at corners {q:?}")));
        }
        Ok(Connection { shape, blocks })
    }

    pub fn cells(&self) -> Vec<CellValue> {
        let mut out = Vec::with_capacity(self.n_cells());
        for (q, blk) in &self.blocks {
            let [nl, nb, nt, nr] = blk.dims;
            let [x0, x1, x2, x3] = *q;
            for l in 0..nl {
                for b in 0..nb {
                    for t in 0..nt {
                        for r in 0..nr {
                            out.push(CellValue {
                                top: (x0, x3, t),
                                left: (x0, x1, l),
                                bot: (x2, x1, b),
                                right: (x2, x3, r),
                                value: blk.data[blk.idx(l, b, t, r)],
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Corner pairs `(x0, x2)` joined by a left–bottom or top–right path.
    pub fn corner_pairs(&self) -> BTreeSet<(usize, usize)> {
        let s = &self.shape;
        let mut out = BTreeSet::new();
        for x0 in 0..s.n(0) {
            for x2 in 0..s.n(2) {
                let lb = (0..s.n(1)).any(|x1| s.h_left.mult[x0][x1] > 0 && s.g_bot.mult[x2][x1] > 0);
                let tr = (0..s.n(3)).any(|x3| s.g_top.mult[x0][x3] > 0 && s.h_right.mult[x2][x3] > 0);
                if lb || tr {
                    out.insert((x0, x2));
                }
            }
        }
        out
    }

    /// The matrix with rows `(x1, left, bot)` and columns `(x3, top, right)`.
    pub fn corner_matrix(&self, x0: usize, x2: usize) -> (Vec<(usize, usize, usize)>, Vec<(usize, usize, usize)>, CMat) {
        let s = &self.shape;
        let mut rows = Vec::new();
        for x1 in 0..s.n(1) {
            for l in 0..s.h_left.mult[x0][x1] {
                for b in 0..s.g_bot.mult[x2][x1] {
                    rows.push((x1, l, b));
                }
            }
        }
        let mut cols = Vec::new();
        for x3 in 0..s.n(3) {
            for t in 0..s.g_top.mult[x0][x3] {
                for r in 0..s.h_right.mult[x2][x3] {
                    cols.push((x3, t, r));
                }
            }
        }
        let m = CMat::from_fn(rows.len(), cols.len(), |i, j| {
            let (x1, l, b) = rows[i];
            let (x3, t, r) = cols[j];
            self.get([x0, x1, x2, x3], l, b, t, r)
        });
        (rows, cols, m)
    }

    fn unitarity_only(&self) -> f64 {
        self.corner_pairs()
            .into_iter()
            .map(|(x0, x2)| unitarity_residual(&self.corner_matrix(x0, x2).2))
            .fold(0.0, f64::max)
    }

    pub fn verify_biunitarity(&self, tol: f64) -> BiunitarityReport {
        let u = self.unitarity_only();
        let cr = self.conjugate().unitarity_only();
        BiunitarityReport { unitarity_residual: u, crossing_residual: cr, pass: u < tol && cr < tol }
    }

    /// Reflection across the vertical axis with renormalized conjugate values.
    pub fn conjugate(&self) -> Connection {
        let s = &self.shape;
        let w = &s.weights;
        let shape = Shape {
            g_top: s.g_top.transposed(),
            h_left: s.h_right.transposed(),
            g_bot: s.g_bot.transposed(),
            h_right: s.h_left.transposed(),
            weights: [w[3].clone(), w[2].clone(), w[1].clone(), w[0].clone()],
        };
        Connection::from_fn(shape, |q, l, b, t, r| {
            let old = [q[3], q[2], q[1], q[0]];
            self.get(old, r, b, t, l).conj() * c(s.cross_factor(old))
        })
    }

    /// Reflection across the horizontal axis with renormalized conjugate
    /// values: the conjugate bimodule, stackable below `self`.
    pub fn vflip(&self) -> Connection {
        let s = &self.shape;
        let w = &s.weights;
        let shape = Shape {
            g_top: s.g_bot.transposed(),
            h_left: s.h_left.transposed(),
            g_bot: s.g_top.transposed(),
            h_right: s.h_right.transposed(),
            weights: [w[1].clone(), w[0].clone(), w[3].clone(), w[2].clone()],
        };
        Connection::from_fn(shape, |q, l, b, t, r| {
            let old = [q[1], q[0], q[3], q[2]];
            self.get(old, l, t, b, r).conj() * c(s.cross_factor(old))
        })
    }

    /// Rotation by 180 degrees (values unchanged).
    pub fn rotate180(&self) -> Connection {
        let s = &self.shape;
        let w = &s.weights;
        let shape = Shape {
            g_top: s.g_bot.clone(),
            h_left: s.h_right.clone(),
            g_bot: s.g_top.clone(),
            h_right: s.h_left.clone(),
            weights: [w[2].clone(), w[3].clone(), w[0].clone(), w[1].clone()],
        };
        Connection::from_fn(shape, |q, l, b, t, r| {
            let old = [q[2], q[3], q[0], q[1]];
            self.get(old, r, t, b, l)
        })
    }

    /// Exchange horizontal and vertical directions (x1 ↔ x3).
    pub fn transpose(&self) -> Connection {
        let s = &self.shape;
        let w = &s.weights;
        let shape = Shape {
            g_top: s.h_left.clone(),
            h_left: s.g_top.clone(),
            g_bot: s.h_right.clone(),
            h_right: s.g_bot.clone(),
            weights: [w[0].clone(), w[3].clone(), w[2].clone(), w[1].clone()],
        };
        Connection::from_fn(shape, |q, l, b, t, r| {
            let old = [q[0], q[3], q[2], q[1]];
            self.get(old, t, r, l, b)
        })
    }

    pub fn gauge_transform(&self, g: &GaugeFamily, strict: bool, tol: f64) -> Result<Connection> {
        let s = &self.shape;
        let mut h_left = s.h_left.clone();
        let mut h_right = s.h_right.clone();
        for (&(a, b), m) in &g.left {
            if a >= s.n(0) || b >= s.n(1) || m.ncols() != s.h_left.mult[a][b] {
                return Err(Error::Shape(format!("left gauge block {a},{b} has wrong size")));
            }
            h_left.mult[a][b] = m.nrows();
        }
        for (&(a, b), m) in &g.right {
            if a >= s.n(2) || b >= s.n(3) || m.ncols() != s.h_right.mult[a][b] {
                return Err(Error::Shape(format!("right gauge block {a},{b} has wrong size")));
            }
            h_right.mult[a][b] = m.nrows();
        }
        if strict {
            for m in g.left.values().chain(g.right.values()) {
                if unitarity_residual(m) > tol.max(1e-12) {
                    return Err(Error::Input("gauge block is not unitary".into()));
                }
            }
        }
        let shape = Shape { h_left, h_right, ..s.clone() };
        let id = |n: usize| CMat::identity(n, n);
        Ok(Connection::from_fn(shape, |q, l2, b, t, r2| {
            let [x0, x1, x2, x3] = q;
            let gl = g.left.get(&(x0, x1)).cloned().unwrap_or_else(|| id(s.h_left.mult[x0][x1]));
            let gr = g.right.get(&(x2, x3)).cloned().unwrap_or_else(|| id(s.h_right.mult[x2][x3]));
            let mut acc = ZERO;
            for l in 0..gl.ncols() {
                let a = gl[(l2, l)];
                if a == ZERO {
                    continue;
                }
                for r in 0..gr.ncols() {
                    acc += a * self.get(q, l, b, t, r) * gr[(r2, r)].conj();
                }
            }
            acc
        }))
    }

    pub fn direct_sum(&self, other: &Connection) -> Result<Connection> {
        let (s1, s2) = (&self.shape, &other.shape);
        if !s1.same_horizontal(s2, 1e-9) {
            return Err(Error::Shape("direct sum needs identical horizontal graphs".into()));
        }
        let mut h_left = s1.h_left.clone();
        let mut h_right = s1.h_right.clone();
        for a in 0..s1.n(0) {
            for b in 0..s1.n(1) {
                h_left.mult[a][b] += s2.h_left.mult[a][b];
            }
        }
        for a in 0..s1.n(2) {
            for b in 0..s1.n(3) {
                h_right.mult[a][b] += s2.h_right.mult[a][b];
            }
        }
        let shape = Shape { h_left, h_right, ..s1.clone() };
        Ok(Connection::from_fn(shape, |q, l, b, t, r| {
            let ml = s1.h_left.mult[q[0]][q[1]];
            let mr = s1.h_right.mult[q[2]][q[3]];
            match (l < ml, r < mr) {
                (true, true) => self.get(q, l, b, t, r),
                (false, false) => other.get(q, l - ml, b, t, r - mr),
                _ => ZERO,
            }
        }))
    }

    /// Phase-fix vertical edges so that the first non-negligible value
    /// touching each edge is real positive (left edges, then right edges).
    pub fn canonical_gauge(&self) -> Connection {
        let s = &self.shape;
        let mut g = GaugeFamily::default();
        for x0 in 0..s.n(0) {
            for x1 in 0..s.n(1) {
                let m = s.h_left.mult[x0][x1];
                if m == 0 {
                    continue;
                }
                let mut ph = CMat::identity(m, m);
                for l in 0..m {
                    if let Some(z) = self.first_touching(|q, ll, _| q[0] == x0 && q[1] == x1 && ll == l) {
                        ph[(l, l)] = z.conj() / c(z.norm());
                    }
                }
                g.left.insert((x0, x1), ph);
            }
        }
        let tmp = self.gauge_transform(&g, false, 0.0).expect("shape preserved");
        let mut g2 = GaugeFamily::default();
        for x2 in 0..s.n(2) {
            for x3 in 0..s.n(3) {
                let m = s.h_right.mult[x2][x3];
                if m == 0 {
                    continue;
                }
                let mut ph = CMat::identity(m, m);
                for r in 0..m {
                    if let Some(z) = tmp.first_touching(|q, _, rr| q[2] == x2 && q[3] == x3 && rr == r) {
                        // right gauge enters conjugated
                        ph[(r, r)] = z / c(z.norm());
                    }
                }
                g2.right.insert((x2, x3), ph);
            }
        }
        tmp.gauge_transform(&g2, false, 0.0).expect("shape preserved")
    }

    fn first_touching<P: Fn([usize; 4], usize, usize) -> bool>(&self, pred: P) -> Option<C64> {
        for (q, blk) in &self.blocks {
            let [nl, nb, nt, nr] = blk.dims;
            for l in 0..nl {
                for b in 0..nb {
                    for t in 0..nt {
                        for r in 0..nr {
                            if pred(*q, l, r) {
                                let z = blk.data[blk.idx(l, b, t, r)];
                                if z.norm() > 1e-9 {
                                    return Some(z);
                                }
                            }
                        }
                    }
                }
            }
        }
        None
    }

    /// Restriction to vertex subsets of V0..V3 (indices, kept in the given
    /// order). Cells leaving the subsets are dropped.
    pub fn restrict(&self, sets: &[Vec<usize>; 4]) -> Connection {
        let s = &self.shape;
        let pick = |i: usize| -> Vec<f64> { sets[i].iter().map(|&v| s.weights[i][v]).collect() };
        let shape = Shape {
            g_top: s.g_top.restrict(&sets[0], &sets[3]),
            h_left: s.h_left.restrict(&sets[0], &sets[1]),
            g_bot: s.g_bot.restrict(&sets[2], &sets[1]),
            h_right: s.h_right.restrict(&sets[2], &sets[3]),
            weights: [pick(0), pick(1), pick(2), pick(3)],
        };
        Connection::from_fn(shape, |q, l, b, t, r| {
            self.get([sets[0][q[0]], sets[1][q[1]], sets[2][q[2]], sets[3][q[3]]], l, b, t, r)
        })
    }

    /// Maximal absolute difference of values on a common shape (weights
    /// compared up to rounding).
    pub fn max_diff(&self, other: &Connection) -> f64 {
        if !self.shape.compatible(&other.shape, 1e-9) {
            return f64::INFINITY;
        }
        self.blocks
            .iter()
            .map(|(q, b)| {
                let o = &other.blocks[q];
                b.data.iter().zip(&o.data).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Scale a single cell (used for negative tests).
    pub fn with_scaled_cell(&self, q: [usize; 4], l: usize, b: usize, t: usize, r: usize, s: C64) -> Connection {
        let mut out = self.clone();
        if let Some(blk) = out.blocks.get_mut(&q) {
            let i = blk.idx(l, b, t, r);
            blk.data[i] *= s;
        }
        out
    }

    pub fn map_values<F: Fn(C64) -> C64>(&self, f: F) -> Connection {
        let mut out = self.clone();
        for blk in out.blocks.values_mut() {
            for z in blk.data.iter_mut() {
                *z = f(*z);
            }
        }
        out
    }

    /// Identity connection with top graph `g` (weights `w0`, `w3`).
    pub fn identity(g: &BipartiteGraph, w0: &[f64], w3: &[f64]) -> Connection {
        let n0 = g.even.len();
        let n3 = g.odd.len();
        let diag = |n: usize| -> Vec<Vec<usize>> { (0..n).map(|i| (0..n).map(|j| usize::from(i == j)).collect()).collect() };
        let shape = Shape {
            g_top: g.clone(),
            h_left: BipartiteGraph { even: g.even.clone(), odd: g.even.clone(), mult: diag(n0) },
            g_bot: g.transposed(),
            h_right: BipartiteGraph { even: g.odd.clone(), odd: g.odd.clone(), mult: diag(n3) },
            weights: [w0.to_vec(), w0.to_vec(), w3.to_vec(), w3.to_vec()],
        };
        Connection::from_fn(shape, |_, _, b, t, _| if b == t { c(1.0) } else { ZERO })
    }
}

// ---------------------------------------------------------------- JSON

#[allow(non_snake_case)]
#[derive(Serialize, Deserialize)]
struct WeightsDoc {
    V0: BTreeMap<String, f64>,
    V1: BTreeMap<String, f64>,
    V2: BTreeMap<String, f64>,
    V3: BTreeMap<String, f64>,
}

#[allow(non_snake_case)]
#[derive(Serialize, Deserialize)]
struct ShapeDoc {
    V0: Vec<String>,
    V1: Vec<String>,
    V2: Vec<String>,
    V3: Vec<String>,
    g_top: BipartiteGraph,
    h_left: BipartiteGraph,
    g_bot: BipartiteGraph,
    h_right: BipartiteGraph,
    weights: WeightsDoc,
}

#[derive(Serialize, Deserialize)]
struct CellDoc {
    top: (String, String, usize),
    left: (String, String, usize),
    bot: (String, String, usize),
    right: (String, String, usize),
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct ConnectionDoc {
    shape: ShapeDoc,
    cells: Vec<CellDoc>,
}

impl Connection {
    pub fn to_json(&self) -> String {
        let s = &self.shape;
        let wmap = |i: usize| -> BTreeMap<String, f64> {
            s.v(i).iter().cloned().zip(s.weights[i].iter().cloned()).collect()
        };
        let v = |i: usize, x: usize| s.v(i)[x].clone();
        let doc = ConnectionDoc {
            shape: ShapeDoc {
                V0: s.v(0).clone(),
                V1: s.v(1).clone(),
                V2: s.v(2).clone(),
                V3: s.v(3).clone(),
                g_top: s.g_top.clone(),
                h_left: s.h_left.clone(),
                g_bot: s.g_bot.clone(),
                h_right: s.h_right.clone(),
                weights: WeightsDoc { V0: wmap(0), V1: wmap(1), V2: wmap(2), V3: wmap(3) },
            },
            cells: self
                .cells()
                .into_iter()
                .map(|cv| CellDoc {
                    top: (v(0, cv.top.0), v(3, cv.top.1), cv.top.2),
                    left: (v(0, cv.left.0), v(1, cv.left.1), cv.left.2),
                    bot: (v(2, cv.bot.0), v(1, cv.bot.1), cv.bot.2),
                    right: (v(2, cv.right.0), v(3, cv.right.1), cv.right.2),
                    re: cv.value.re,
                    im: cv.value.im,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Connection> {
        let doc: ConnectionDoc = serde_json::from_str(text)?;
        let sd = doc.shape;
        let weights_of = |ids: &Vec<String>, m: &BTreeMap<String, f64>, name: &str| -> Result<Vec<f64>> {
            ids.iter()
                .map(|id| m.get(id).copied().ok_or_else(|| Error::Input(format!("missing weight for {name} vertex {id}"))))
                .collect()
        };
        let weights = [
            weights_of(&sd.V0, &sd.weights.V0, "V0")?,
            weights_of(&sd.V1, &sd.weights.V1, "V1")?,
            weights_of(&sd.V2, &sd.weights.V2, "V2")?,
            weights_of(&sd.V3, &sd.weights.V3, "V3")?,
        ];
        for g in [&sd.g_top, &sd.h_left, &sd.g_bot, &sd.h_right] {
            BipartiteGraph::new(g.even.clone(), g.odd.clone(), g.mult.clone())?;
        }
        let shape = Shape::new(sd.g_top, sd.h_left, sd.g_bot, sd.h_right, weights)?;
        if shape.v(0) != &sd.V0 || shape.v(1) != &sd.V1 || shape.v(2) != &sd.V2 || shape.v(3) != &sd.V3 {
            return Err(Error::Shape("vertex lists disagree with graphs".into()));
        }
        let ix: Vec<BTreeMap<String, usize>> = (0..4).map(|i| index_of(shape.v(i))).collect();
        let look = |i: usize, id: &str| -> Result<usize> {
            ix[i].get(id).copied().ok_or_else(|| Error::Input(format!("dangling edge: unknown vertex {id} in V{i}")))
        };
        let mut cells = Vec::with_capacity(doc.cells.len());
        for cd in &doc.cells {
            cells.push(CellValue {
                top: (look(0, &cd.top.0)?, look(3, &cd.top.1)?, cd.top.2),
                left: (look(0, &cd.left.0)?, look(1, &cd.left.1)?, cd.left.2),
                bot: (look(2, &cd.bot.0)?, look(1, &cd.bot.1)?, cd.bot.2),
                right: (look(2, &cd.right.0)?, look(3, &cd.right.1)?, cd.right.2),
                value: C64::new(cd.re, cd.im),
            });
        }
        Connection::make(shape, &cells)
    }
}

/// Builds the 1-cell connection with the given value and unit weights.
pub fn single_cell(value: C64) -> Connection {
    let g = |a: &str, b: &str| BipartiteGraph { even: vec![a.into()], odd: vec![b.into()], mult: vec![vec![1]] };
    let shape = Shape {
        g_top: g("a", "d"),
        h_left: g("a", "b"),
        g_bot: g("c", "b"),
        h_right: g("c", "d"),
        weights: [vec![1.0], vec![1.0], vec![1.0], vec![1.0]],
    };
    Connection::from_fn(shape, |_, _, _, _, _| value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_cell() {
        let w = single_cell(C64::from_polar(1.0, 0.3));
        let rep = w.verify_biunitarity(1e-9);
        assert!(rep.pass && rep.unitarity_residual < 1e-15);
        let cj = w.conjugate();
        assert!((cj.get([0, 0, 0, 0], 0, 0, 0, 0) - C64::from_polar(1.0, -0.3)).norm() < 1e-15);
    }

    #[test]
    fn missing_and_duplicate() {
        let w = single_cell(c(1.0));
        let err = Connection::make(w.shape.clone(), &[]).unwrap_err();
        assert!(err.to_string().contains("missing cell"));
        let cells = w.cells();
        let two = vec![cells[0].clone(), cells[0].clone()];
        assert!(Connection::make(w.shape.clone(), &two).unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn json_round_trip() {
        let w = single_cell(C64::new(0.6, 0.8));
        let text = w.to_json();
        let back = Connection::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
    }
}
