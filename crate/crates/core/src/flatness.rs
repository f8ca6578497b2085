//! Partition functions of rectangular diagrams, flatness verdicts and the
//! flat part (principal graph) of a connection.
//!
//! Tiling: grid vertex (i, j) lies in V0, V3, V1, V2 for parities
//! (even, even), (even, odd), (odd, even), (odd, odd). The tile with
//! upper-left corner (i, j) is W, its left–right mirror, its up–down mirror
//! or its rotation by π according to the same parities. All four are
//! bi-unitary, so a rectangle is a unitary from (left, bottom) boundary
//! strings to (top, right) ones and |Z| ≤ 1.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::graphs::BipartiteGraph;
use crate::linalg::{C64, ONE, ZERO};

/// A boundary string: `verts.len() == edges.len() + 1`, vertex indices in
/// the grid's vertex sets, edge indices within multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridString {
    pub verts: Vec<u16>,
    pub edges: Vec<u16>,
}

impl GridString {
    pub fn len(&self) -> usize {
        self.edges.len()
    }
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
    pub fn trivial(v: usize) -> Self {
        GridString { verts: vec![v as u16], edges: vec![] }
    }
    fn concat_reversed(&self, other: &GridString) -> GridString {
        let mut verts = self.verts.clone();
        verts.extend(other.verts.iter().rev().skip(1));
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().rev());
        GridString { verts, edges }
    }
}

/// The four tiles of the alternating tiling and the graphs between grid
/// vertex sets.
pub struct Tiling {
    tiles: [Connection; 4],
    /// `lr[t][(ll, ur)]`: admissible lower-right corners of tile type t.
    lr: [HashMap<(usize, usize), Vec<usize>>; 4],
    names: [Vec<String>; 4],
}

#[inline]
fn grid_set(i: usize, j: usize) -> usize {
    match (i % 2, j % 2) {
        (0, 0) => 0,
        (0, _) => 3,
        (_, 0) => 1,
        _ => 2,
    }
}

impl Tiling {
    pub fn new(w: &Connection) -> Self {
        let tiles = [w.clone(), w.conjugate(), w.vflip(), w.rotate180()];
        let lr = std::array::from_fn(|t| {
            let s = &tiles[t].shape;
            let mut m: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
            for x2 in 0..s.n(2) {
                for x1 in 0..s.n(1) {
                    if s.g_bot.mult[x2][x1] == 0 {
                        continue;
                    }
                    for x3 in 0..s.n(3) {
                        if s.h_right.mult[x2][x3] > 0 {
                            m.entry((x1, x3)).or_default().push(x2);
                        }
                    }
                }
            }
            m
        });
        let s = &w.shape;
        let names = [s.v(0).clone(), s.v(1).clone(), s.v(2).clone(), s.v(3).clone()];
        Tiling { tiles, lr, names }
    }

    /// Multiplicity of the horizontal edge in row `i` between columns `j`
    /// and `j+1` with endpoints `a` (column j) and `b`.
    pub fn hmult(&self, i: usize, j: usize, a: usize, b: usize) -> usize {
        let s = &self.tiles[0].shape;
        match (i % 2, j % 2) {
            (0, 0) => s.g_top.mult[a][b],
            (0, _) => s.g_top.mult[b][a],
            (_, 0) => s.g_bot.mult[b][a],
            _ => s.g_bot.mult[a][b],
        }
    }

    /// Multiplicity of the vertical edge in column `j` between rows `i`
    /// and `i+1` with endpoints `a` (row i) and `b`.
    pub fn vmult(&self, i: usize, j: usize, a: usize, b: usize) -> usize {
        let s = &self.tiles[0].shape;
        match (i % 2, j % 2) {
            (0, 0) => s.h_left.mult[a][b],
            (1, 0) => s.h_left.mult[b][a],
            (0, _) => s.h_right.mult[b][a],
            _ => s.h_right.mult[a][b],
        }
    }

    fn set_size(&self, set: usize) -> usize {
        self.names[set].len()
    }

    pub fn vertex_name(&self, i: usize, j: usize, v: usize) -> &str {
        &self.names[grid_set(i, j)][v]
    }

    /// All strings of length `len` starting at `start`, along row `i`
    /// (horizontal, from column `j0`) or column `j` (vertical, from row 0).
    fn strings(&self, start: usize, len: usize, step: impl Fn(usize, usize, usize) -> usize, set_at: impl Fn(usize) -> usize) -> Vec<GridString> {
        let mut out = vec![GridString::trivial(start)];
        for p in 0..len {
            let mut next = Vec::new();
            let target = set_at(p + 1);
            for s in &out {
                let a = *s.verts.last().unwrap() as usize;
                for b in 0..self.set_size(target) {
                    for e in 0..step(p, a, b) {
                        let mut t = s.clone();
                        t.verts.push(b as u16);
                        t.edges.push(e as u16);
                        next.push(t);
                    }
                }
            }
            out = next;
        }
        out
    }

    /// Horizontal strings along row 0 starting at `start` (a V0 index).
    pub fn horizontal_strings(&self, start: usize, len: usize) -> Vec<GridString> {
        self.strings(start, len, |p, a, b| self.hmult(0, p, a, b), |p| grid_set(0, p))
    }

    /// Vertical strings along column `j` starting at row 0 at `start`.
    pub fn vertical_strings(&self, j: usize, start: usize, len: usize) -> Vec<GridString> {
        self.strings(start, len, |p, a, b| self.vmult(p, j, a, b), |p| grid_set(p, j))
    }

    /// Transfers amplitudes on vertical strings of column `j` to column
    /// `j+1` under the top edge `(top_v, top_e)` and bottom edge
    /// `(bot_v, bot_e)` (`*_v` is the endpoint in column j+1).
    pub fn column_step(
        &self,
        j: usize,
        state: &HashMap<GridString, C64>,
        top: (usize, usize),
        bot: (usize, usize),
    ) -> HashMap<GridString, C64> {
        let mut out: HashMap<GridString, C64> = HashMap::new();
        // mixed key: verts = w_0..w_i, v_i..v_L ; edges = f_0..f_{i-1}, h_i, e_i..e_{L-1}
        let mut cur: HashMap<(Vec<u16>, Vec<u16>), C64> = HashMap::new();
        let mut len = 0;
        for (s, &amp) in state {
            len = s.len();
            let v0 = s.verts[0] as usize;
            if self.hmult(0, j, v0, top.0) <= top.1 {
                continue;
            }
            let mut verts = Vec::with_capacity(s.verts.len() + 1);
            verts.push(top.0 as u16);
            verts.extend_from_slice(&s.verts);
            let mut edges = Vec::with_capacity(s.edges.len() + 1);
            edges.push(top.1 as u16);
            edges.extend_from_slice(&s.edges);
            *cur.entry((verts, edges)).or_insert(ZERO) += amp;
        }
        for i in 0..len {
            let t = 2 * (i % 2) + (j % 2);
            let tile = &self.tiles[t];
            let ts = &tile.shape;
            let mut next: HashMap<(Vec<u16>, Vec<u16>), C64> = HashMap::with_capacity(cur.len() * 2);
            let last = i + 1 == len;
            for ((verts, edges), amp) in cur.drain() {
                let (ul, ur, ll) = (verts[i + 1] as usize, verts[i] as usize, verts[i + 2] as usize);
                let (top_e, left_e) = (edges[i] as usize, edges[i + 1] as usize);
                let Some(cands) = self.lr[t].get(&(ll, ur)) else { continue };
                for &lr in cands {
                    if last && lr != bot.0 {
                        continue;
                    }
                    let q = [ul, ll, lr, ur];
                    let nb = ts.g_bot.mult[lr][ll];
                    let nr = ts.h_right.mult[lr][ur];
                    for b in 0..nb {
                        if last && b != bot.1 {
                            continue;
                        }
                        for r in 0..nr {
                            let val = tile.get(q, left_e, b, top_e, r);
                            if val == ZERO {
                                continue;
                            }
                            let mut v2 = verts.clone();
                            v2[i + 1] = lr as u16;
                            let mut e2 = edges.clone();
                            e2[i] = r as u16;
                            e2[i + 1] = b as u16;
                            *next.entry((v2, e2)).or_insert(ZERO) += amp * val;
                        }
                    }
                }
            }
            cur = next;
        }
        if len == 0 {
            // zero-height rectangle: the top and bottom edges coincide
            for ((verts, edges), amp) in cur {
                if verts[0] as usize == bot.0 && edges[0] as usize == bot.1 {
                    *out.entry(GridString { verts: vec![verts[0]], edges: vec![] }).or_insert(ZERO) += amp;
                }
            }
            return out;
        }
        for ((mut verts, mut edges), amp) in cur {
            verts.pop();
            edges.pop();
            if amp.norm() > 1e-300 {
                *out.entry(GridString { verts, edges }).or_insert(ZERO) += amp;
            }
        }
        out
    }
}

/// Value of the diagram with top `sigma`, left `rho`, bottom `sigma2`,
/// right `rho2` (horizontal strings along the top graph direction starting
/// at the left corners, vertical strings starting at the top corners).
pub fn partition_function(w: &Connection, basepoint: &str, sigma: &GridString, rho: &GridString, sigma2: &GridString, rho2: &GridString) -> Result<C64> {
    let tiling = Tiling::new(w);
    partition_function_with(&tiling, w, basepoint, sigma, rho, sigma2, rho2)
}

fn basepoint_index(w: &Connection, basepoint: &str) -> Result<usize> {
    w.shape
        .v(0)
        .iter()
        .position(|x| x == basepoint)
        .ok_or_else(|| Error::Input(format!("basepoint '{basepoint}' is not a V0 vertex")))
}

fn partition_function_with(
    tiling: &Tiling,
    w: &Connection,
    basepoint: &str,
    sigma: &GridString,
    rho: &GridString,
    sigma2: &GridString,
    rho2: &GridString,
) -> Result<C64> {
    let star = basepoint_index(w, basepoint)?;
    if sigma.len() % 2 == 1 || rho.len() % 2 == 1 {
        return Err(Error::Input("boundary strings must have even length".into()));
    }
    if sigma.len() != sigma2.len() || rho.len() != rho2.len() {
        return Err(Error::Input("opposite boundary strings must have equal lengths".into()));
    }
    for s in [sigma, rho, sigma2, rho2] {
        if s.verts.len() != s.edges.len() + 1 {
            return Err(Error::Input("malformed boundary string".into()));
        }
    }
    if sigma.verts[0] as usize != star || rho.verts[0] as usize != star {
        return Err(Error::Input("boundary strings must start at the basepoint".into()));
    }
    if sigma2.verts[0] != *rho.verts.last().unwrap()
        || rho2.verts[0] != *sigma.verts.last().unwrap()
        || sigma2.verts.last() != rho2.verts.last()
    {
        return Err(Error::Input("boundary strings do not close up at the corners".into()));
    }
    let mut state: HashMap<GridString, C64> = HashMap::from([(rho.clone(), ONE)]);
    for j in 0..sigma.len() {
        let top = (sigma.verts[j + 1] as usize, sigma.edges[j] as usize);
        let bot = (sigma2.verts[j + 1] as usize, sigma2.edges[j] as usize);
        state = tiling.column_step(j, &state, top, bot);
    }
    Ok(state.get(rho2).copied().unwrap_or(ZERO))
}

// ------------------------------------------------------------------ flatness

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub size: [usize; 2],
    /// Horizontal loop as vertex names.
    pub sigma: Vec<String>,
    pub sigma_edges: Vec<u16>,
    /// Vertical loop as vertex names.
    pub rho: Vec<String>,
    pub rho_edges: Vec<u16>,
    pub z: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub sizes: Vec<[usize; 2]>,
    pub defect: Vec<f64>,
    pub witness: Option<Witness>,
    pub verdict: String,
}

impl FlatnessReport {
    pub fn is_flat(&self) -> bool {
        self.verdict == "flat"
    }
    pub fn max_defect(&self) -> f64 {
        self.defect.iter().copied().fold(0.0, f64::max)
    }
    pub fn first_violation(&self, tol: f64) -> Option<[usize; 2]> {
        self.sizes.iter().zip(&self.defect).find(|(_, &d)| d > tol).map(|(s, _)| *s)
    }
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

// Packed strings: 4-bit fields in a u128. A vertical string of length L
// keeps vertex v_i in field 1+i and edge e_i in field L+3+i; fields 0 and
// L+2 hold the horizontal edge being pushed down during a column sweep.

#[inline]
fn nib(k: u128, i: usize) -> usize {
    ((k >> (4 * i)) & 0xF) as usize
}

#[inline]
fn set_nib(k: u128, i: usize, v: usize) -> u128 {
    (k & !(0xFu128 << (4 * i))) | ((v as u128) << (4 * i))
}

fn pack(s: &GridString) -> u128 {
    let l = s.len();
    let mut k = 0u128;
    for (i, &v) in s.verts.iter().enumerate() {
        k = set_nib(k, 1 + i, v as usize);
    }
    for (i, &e) in s.edges.iter().enumerate() {
        k = set_nib(k, l + 3 + i, e as usize);
    }
    k
}

type Batch = HashMap<u128, Vec<C64>>;

impl Tiling {
    fn packable(&self, l: usize) -> bool {
        let s = &self.tiles[0].shape;
        let small = |g: &BipartiteGraph| g.mult.iter().flatten().all(|&m| m <= 16);
        2 * l + 3 <= 32
            && (0..4).all(|i| s.n(i) <= 16)
            && small(&s.g_top)
            && small(&s.g_bot)
            && small(&s.h_left)
            && small(&s.h_right)
    }

    /// Packed, batched version of `column_step` for vertical length `l`.
    fn column_step_packed(&self, j: usize, l: usize, state: &Batch, top: (usize, usize), bot: (usize, usize)) -> Batch {
        let mut cur: Batch = HashMap::with_capacity(state.len());
        for (&k, amp) in state {
            if self.hmult(0, j, nib(k, 1), top.0) <= top.1 {
                continue;
            }
            let k2 = set_nib(set_nib(k, 0, top.0), l + 2, top.1);
            cur.insert(k2, amp.clone());
        }
        for i in 0..l {
            let t = 2 * (i % 2) + (j % 2);
            let tile = &self.tiles[t];
            let ts = &tile.shape;
            let last = i + 1 == l;
            let mut next: Batch = HashMap::with_capacity(cur.len() * 2);
            for (k, amp) in cur.drain() {
                let (ul, ur, ll) = (nib(k, i + 1), nib(k, i), nib(k, i + 2));
                let (top_e, left_e) = (nib(k, l + 2 + i), nib(k, l + 3 + i));
                let Some(cands) = self.lr[t].get(&(ll, ur)) else { continue };
                for &lr in cands {
                    if last && lr != bot.0 {
                        continue;
                    }
                    let q = [ul, ll, lr, ur];
                    let k1 = set_nib(k, i + 1, lr);
                    for b in 0..ts.g_bot.mult[lr][ll] {
                        if last && b != bot.1 {
                            continue;
                        }
                        for r in 0..ts.h_right.mult[lr][ur] {
                            let val = tile.get(q, left_e, b, top_e, r);
                            if val == ZERO {
                                continue;
                            }
                            let k2 = set_nib(set_nib(k1, l + 2 + i, r), l + 3 + i, b);
                            let e = next.entry(k2).or_insert_with(|| vec![ZERO; amp.len()]);
                            for (x, y) in e.iter_mut().zip(&amp) {
                                *x += val * y;
                            }
                        }
                    }
                }
            }
            cur = next;
        }
        // back to string layout: drop v_L and h_L, shift by one field
        let mut mask = 0u128;
        for f in (0..=l).chain(l + 2..=2 * l + 1) {
            mask |= 0xFu128 << (4 * f);
        }
        let mut out: Batch = HashMap::with_capacity(cur.len());
        for (k, amp) in cur {
            if amp.iter().any(|z| z.norm() > 1e-300) {
                out.insert((k & mask) << 4, amp);
            }
        }
        out
    }
}

/// Left-half amplitudes for a batch of vertical loops: for every horizontal
/// path `s` of length m ≤ `m_max` from the basepoint, the right-boundary
/// amplitudes of the half rectangle with top and bottom `s`.
fn half_amplitudes(tiling: &Tiling, rhos: &[GridString], m_max: usize, levels: &mut Vec<Vec<(GridString, Batch)>>) {
    let l = rhos[0].len();
    let width = rhos.len();
    let mut init: Batch = HashMap::new();
    for (t, r) in rhos.iter().enumerate() {
        init.entry(pack(r)).or_insert_with(|| vec![ZERO; width])[t] = ONE;
    }
    levels.clear();
    levels.resize_with(m_max + 1, Vec::new);
    fn rec(tiling: &Tiling, l: usize, m_max: usize, s: GridString, st: Batch, levels: &mut Vec<Vec<(GridString, Batch)>>) {
        let j = s.len();
        if j < m_max {
            let a = *s.verts.last().unwrap() as usize;
            let target = grid_set(0, j + 1);
            for b in 0..tiling.set_size(target) {
                for e in 0..tiling.hmult(0, j, a, b) {
                    let next = tiling.column_step_packed(j, l, &st, (b, e), (b, e));
                    let mut s2 = s.clone();
                    s2.verts.push(b as u16);
                    s2.edges.push(e as u16);
                    rec(tiling, l, m_max, s2, next, levels);
                }
            }
        }
        levels[j].push((s, st));
    }
    rec(tiling, l, m_max, GridString::trivial(rhos[0].verts[0] as usize), init, levels);
}

/// Column-wise inner products Σ_τ a[τ]·conj(b[τ]).
fn inner(a: &Batch, b: &Batch, width: usize) -> Vec<C64> {
    let mut acc = vec![ZERO; width];
    let (small, large, swap) = if a.len() <= b.len() { (a, b, false) } else { (b, a, true) };
    for (k, x) in small {
        if let Some(y) = large.get(k) {
            for t in 0..width {
                acc[t] += if swap { y[t] * x[t].conj() } else { x[t] * y[t].conj() };
            }
        }
    }
    acc
}

const BATCH: usize = 32;

/// Flatness test at all sizes (m, n) ≤ `max_size`: horizontal loops of
/// length 2m and vertical loops of length 2n at the basepoint, defect
/// max |Z(σ, ρ, σ, ρ) − 1|. Uses Z = Σ_τ L(σ⁺, ρ, τ)·conj L(σ⁻, ρ, τ) for
/// σ = σ⁺·reverse(σ⁻), where L is the left half rectangle (the right half
/// is its mirror image and the mirror weights cancel).
pub fn is_flat(w: &Connection, basepoint: &str, max_size: (usize, usize), tol: f64) -> Result<FlatnessReport> {
    let star = basepoint_index(w, basepoint)?;
    let tiling = Tiling::new(w);
    let (mm, nn) = max_size;
    if !tiling.packable(2 * nn) {
        return Err(Error::Input("flatness sweep supports at most 16 vertices per set, multiplicities ≤ 16 and n ≤ 7".into()));
    }
    let mut defects: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut best: Option<(f64, Witness)> = None;
    let mut levels: Vec<Vec<(GridString, Batch)>> = Vec::new();
    for n in 1..=nn {
        let rhos: Vec<GridString> = tiling
            .vertical_strings(0, star, 2 * n)
            .into_iter()
            .filter(|r| *r.verts.last().unwrap() as usize == star)
            .collect();
        for m in 1..=mm {
            defects.insert((m, n), 0.0);
        }
        for chunk in rhos.chunks(BATCH) {
            half_amplitudes(&tiling, chunk, mm, &mut levels);
            for m in 1..=mm {
                let mut by_end: HashMap<u16, Vec<usize>> = HashMap::new();
                for (i, item) in levels[m].iter().enumerate() {
                    by_end.entry(*item.0.verts.last().unwrap()).or_default().push(i);
                }
                let d = defects.get_mut(&(m, n)).unwrap();
                for group in by_end.values() {
                    for &ip in group {
                        for &im in group {
                            let (sp, ap) = (&levels[m][ip].0, &levels[m][ip].1);
                            let (sm, am) = (&levels[m][im].0, &levels[m][im].1);
                            let zs = inner(ap, am, chunk.len());
                            for (t, &z) in zs.iter().enumerate() {
                                let dev = (z - ONE).norm();
                                if dev > *d {
                                    *d = dev;
                                }
                                if best.as_ref().map_or(dev > tol, |(b, _)| dev > *b) {
                                    let sigma = sp.concat_reversed(sm);
                                    let rho = &chunk[t];
                                    best = Some((
                                        dev,
                                        Witness {
                                            size: [m, n],
                                            sigma: sigma.verts.iter().enumerate().map(|(j, &v)| tiling.vertex_name(0, j, v as usize).to_string()).collect(),
                                            sigma_edges: sigma.edges.clone(),
                                            rho: rho.verts.iter().enumerate().map(|(i, &v)| tiling.vertex_name(i, 0, v as usize).to_string()).collect(),
                                            rho_edges: rho.edges.clone(),
                                            z: [z.re, z.im],
                                        },
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let sizes: Vec<[usize; 2]> = defects.keys().map(|&(m, n)| [m, n]).collect();
    let defect: Vec<f64> = defects.values().copied().collect();
    let flat = defect.iter().all(|&d| d <= tol);
    Ok(FlatnessReport {
        sizes,
        defect,
        witness: if flat { None } else { best.map(|b| b.1) },
        verdict: if flat { "flat".into() } else { "violated".into() },
    })
}

/// Convenience for the witness: rebuilds `(σ, ρ)` as grid strings.
pub fn witness_strings(w: &Connection, wit: &Witness) -> Result<(GridString, GridString)> {
    let s = &w.shape;
    let idx = |set: usize, name: &str| -> Result<u16> {
        s.v(set).iter().position(|x| x == name).map(|i| i as u16).ok_or_else(|| Error::Input(format!("unknown vertex '{name}'")))
    };
    let sigma = GridString {
        verts: wit.sigma.iter().enumerate().map(|(j, n)| idx(grid_set(0, j), n)).collect::<Result<_>>()?,
        edges: wit.sigma_edges.clone(),
    };
    let rho = GridString {
        verts: wit.rho.iter().enumerate().map(|(i, n)| idx(grid_set(i, 0), n)).collect::<Result<_>>()?,
        edges: wit.rho_edges.clone(),
    };
    Ok((sigma, rho))
}

// ------------------------------------------------------------------ flat part

#[derive(Clone, Debug)]
pub struct FlatPart {
    /// Inclusion graph between consecutive levels of the flat algebra.
    pub bratteli: Vec<BipartiteGraph>,
    pub principal_graph: BipartiteGraph,
    pub stabilized: bool,
}

impl FlatPart {
    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({
            "bratteli": self.bratteli,
            "principal_graph": self.principal_graph,
            "stabilized": self.stabilized,
        });
        serde_json::to_string_pretty(&doc).expect("serializable")
    }
}

/// Principal graph of the connection, computed as the induction graph of
/// the alternating compositions X, XX̄, XX̄X, … with X the transpose of `w`
/// (whose endomorphism algebras are the flat algebras at each level).
/// Stops at `depth` or when two consecutive levels repeat.
pub fn flat_part(w: &Connection, basepoint: &str, depth: usize, tol: f64) -> Result<FlatPart> {
    basepoint_index(w, basepoint)?;
    let x = w.transpose();
    let xb = x.vflip();
    let s = &x.shape;
    let id = Connection::identity(&s.g_top, &s.weights[0], &s.weights[3]);
    // objects[0] even (level parity 0), objects[1] odd
    let mut objects: [Vec<Connection>; 2] = [vec![id], vec![]];
    let mut levels: Vec<Vec<usize>> = vec![vec![0]];
    let mut incl: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut stabilized = false;
    let find = |list: &[Connection], p: &Connection| -> Result<Option<usize>> {
        for (i, o) in list.iter().enumerate() {
            if crate::catops::multiplicity(o, p, tol)? > 0 {
                return Ok(Some(i));
            }
        }
        Ok(None)
    };
    for k in 0..depth {
        let factor = if k % 2 == 0 { &x } else { &xb };
        let (src, dst) = (k % 2, 1 - k % 2);
        let mut next: Vec<usize> = Vec::new();
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        for &z in &levels[k] {
            let prod = crate::catops::compose(&objects[src][z], factor)?;
            for (p, mult) in crate::catops::decompose(&prod, 0, tol)? {
                let idx = match find(&objects[dst], &p)? {
                    Some(i) => i,
                    None => {
                        objects[dst].push(p);
                        objects[dst].len() - 1
                    }
                };
                if !next.contains(&idx) {
                    next.push(idx);
                }
                edges.push((z, idx, mult));
            }
        }
        next.sort();
        let mut m = vec![vec![0usize; next.len()]; levels[k].len()];
        for (z, y, mult) in edges {
            let a = levels[k].iter().position(|&q| q == z).unwrap();
            let b = next.iter().position(|&q| q == y).unwrap();
            m[a][b] += mult;
        }
        incl.push(m);
        levels.push(next);
        let l = levels.len();
        if l >= 4 && levels[l - 1] == levels[l - 3] && levels[l - 2] == levels[l - 4] {
            stabilized = true;
            break;
        }
    }
    let label = |parity: usize, i: usize| format!("{}{}", if parity == 0 { "e" } else { "o" }, i);
    let bratteli = incl
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let (src, dst) = (k % 2, 1 - k % 2);
            BipartiteGraph {
                even: levels[k].iter().map(|&i| label(src, i)).collect(),
                odd: levels[k + 1].iter().map(|&i| label(dst, i)).collect(),
                mult: m.clone(),
            }
        })
        .collect();
    let (ne, no) = (objects[0].len(), objects[1].len());
    let mut pm = vec![vec![0usize; no]; ne];
    for (k, m) in incl.iter().enumerate() {
        for (a, row) in m.iter().enumerate() {
            for (b, &mult) in row.iter().enumerate() {
                let (ia, ib) = (levels[k][a], levels[k + 1][b]);
                let (e, o) = if k % 2 == 0 { (ia, ib) } else { (ib, ia) };
                pm[e][o] = pm[e][o].max(mult);
            }
        }
    }
    let principal_graph = BipartiteGraph {
        even: (0..ne).map(|i| label(0, i)).collect(),
        odd: (0..no).map(|i| label(1, i)).collect(),
        mult: pm,
    };
    Ok(FlatPart { bratteli, principal_graph, stabilized })
}
