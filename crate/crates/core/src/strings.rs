//! String (path) algebras, the commuting square attached to a connection,
//! the triple tower of α-induction and an independent route to W4.
//!
//! The W4 oracle never touches the braiding of λ past μ: it is read off the
//! cube relation W1·W2·W3 = W3·W2·W4 by undoing the two unitary faces on
//! the right-hand side. Whatever is left has to act trivially on the first
//! ι-step, and that is checked rather than assumed.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::ade::ModuleData;
use crate::alpha::{build_w2, build_w3, check_iybe, hexagon_lhs, named_cells, Interner};
use crate::connection::{Connection, Shape};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ZERO};
use crate::planar::Chirality;
use crate::su2k::{label_graph, w1_from_engine};

// ------------------------------------------------------------------ paths

/// Paths from a fixed start vertex through a sequence of multigraphs.
/// `steps[s][x][y]` is the number of edges from x to y at step s.
#[derive(Clone, Debug)]
pub struct PathAlgebra {
    pub start: usize,
    pub steps: Vec<Vec<Vec<usize>>>,
    /// Number of paths ending at each vertex of the last step's target set.
    pub counts: Vec<usize>,
}

impl PathAlgebra {
    pub fn new(start: usize, steps: Vec<Vec<Vec<usize>>>, n_start: usize) -> Result<Self> {
        if start >= n_start {
            return Err(Error::Input(format!("start vertex {start} out of range")));
        }
        let mut counts = vec![0usize; n_start];
        counts[start] = 1;
        for (s, m) in steps.iter().enumerate() {
            if m.len() != counts.len() {
                return Err(Error::Shape(format!("step {s} has {} rows, expected {}", m.len(), counts.len())));
            }
            let ny = m.first().map_or(0, |r| r.len());
            let mut next = vec![0usize; ny];
            for (x, row) in m.iter().enumerate() {
                for (y, &k) in row.iter().enumerate() {
                    next[y] += counts[x] * k;
                }
            }
            counts = next;
        }
        Ok(PathAlgebra { start, steps, counts })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Dimension of the algebra of path pairs with common ends.
    pub fn dim(&self) -> usize {
        self.counts.iter().map(|n| n * n).sum()
    }
}

// ------------------------------------------------------------------ squares

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareReport {
    /// max over matrix units x of ‖E_B E_C(x) − E_A(x)‖₂.
    pub residual: f64,
    /// span{bc} = D.
    pub nondegenerate: bool,
    /// Dimensions of A, B, C, D.
    pub dims: [usize; 4],
}

/// Block-diagonal element of D: one square matrix per end vertex x2.
type Elem = Vec<CMat>;

struct Square {
    /// Column labels `(x0, x3, t, r)` per end block x2.
    cols: Vec<Vec<(usize, usize, usize, usize)>>,
    /// Trace weight of a minimal projection per block.
    tw: Vec<f64>,
    a_units: Vec<(Elem, f64)>,
    b_units: Vec<(Elem, f64)>,
    c_units: Vec<(Elem, f64)>,
}

fn tr(s: &Square, x: &Elem) -> C64 {
    x.iter().zip(&s.tw).map(|(m, &w)| m.trace() * w).sum()
}

fn mul(a: &Elem, b: &Elem) -> Elem {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn axpy(acc: &mut Elem, s: C64, x: &Elem) {
    for (a, m) in acc.iter_mut().zip(x) {
        *a += m * s;
    }
}

fn zero_like(s: &Square) -> Elem {
    s.cols.iter().map(|c| CMat::zeros(c.len(), c.len())).collect()
}

fn l2(s: &Square, x: &Elem) -> f64 {
    x.iter().zip(&s.tw).map(|(m, &w)| m.norm_squared() * w).sum::<f64>().sqrt()
}

/// Trace-orthogonal projection onto the span of mutually orthogonal units.
fn expect(s: &Square, units: &[(Elem, f64)], x: &Elem) -> Elem {
    let mut out = zero_like(s);
    for (e, norm) in units {
        let adj: Elem = e.iter().map(|m| m.adjoint()).collect();
        let coef = tr(s, &mul(&adj, x)) / *norm;
        axpy(&mut out, coef, e);
    }
    out
}

fn finish_units(s: &Square, units: Vec<Elem>) -> Vec<(Elem, f64)> {
    units
        .into_iter()
        .map(|e| {
            let adj: Elem = e.iter().map(|m| m.adjoint()).collect();
            let n = tr(s, &mul(&adj, &e)).re;
            (e, n)
        })
        .filter(|(_, n)| *n > 1e-14)
        .collect()
}

fn unit(n: usize, f: impl Fn(usize, usize) -> bool) -> CMat {
    CMat::from_fn(n, n, |i, j| if f(i, j) { C64::new(1.0, 0.0) } else { ZERO })
}

fn build_square(w: &Connection) -> Result<Square> {
    let sh = &w.shape;
    let pairs = w.corner_pairs();
    let mut cols = Vec::new();
    let mut rows = Vec::new();
    let mut us = Vec::new();
    let mut tw = Vec::new();
    for x2 in 0..sh.n(2) {
        let mut c = Vec::new();
        let mut r = Vec::new();
        let mut blocks = Vec::new();
        for x0 in 0..sh.n(0) {
            if !pairs.contains(&(x0, x2)) {
                continue;
            }
            let (rw, cl, u) = w.corner_matrix(x0, x2);
            if rw.len() != cl.len() {
                return Err(Error::Check(format!("corner block ({x0},{x2}) is not square")));
            }
            r.extend(rw.into_iter().map(|(x1, l, b)| (x0, x1, l, b)));
            c.extend(cl.into_iter().map(|(x3, t, rr)| (x0, x3, t, rr)));
            blocks.push(u);
        }
        if c.is_empty() {
            continue;
        }
        // block-diagonal over x0
        let n = c.len();
        let mut u = CMat::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            let d = b.nrows();
            u.view_mut((off, off), (d, d)).copy_from(&b);
            off += d;
        }
        rows.push(r);
        cols.push(c);
        us.push(u);
        tw.push(sh.weights[2][x2]);
    }
    if cols.is_empty() {
        return Err(Error::Input("connection has no cells".into()));
    }
    let total: f64 = cols.iter().zip(&tw).map(|(c, w)| c.len() as f64 * w).sum();
    for w in tw.iter_mut() {
        *w /= total;
    }
    let mut sq = Square { cols, tw, a_units: Vec::new(), b_units: Vec::new(), c_units: Vec::new() };

    let mut a_units = Vec::new();
    for x0 in 0..sh.n(0) {
        a_units.push(sq.cols.iter().map(|cl| unit(cl.len(), |i, j| i == j && cl[i].0 == x0)).collect());
    }
    // B: E_{(x0,t),(x0',t')} ⊗ 1 over top edges with a common end.
    let mut b_units = Vec::new();
    for x3 in 0..sh.n(3) {
        let ends: Vec<(usize, usize)> =
            (0..sh.n(0)).flat_map(|x0| (0..sh.g_top.mult[x0][x3]).map(move |t| (x0, t))).collect();
        for &(y0, t) in &ends {
            for &(z0, t2) in &ends {
                b_units.push(
                    sq.cols
                        .iter()
                        .map(|cl| {
                            unit(cl.len(), |i, j| {
                                let (a0, a3, ti, ri) = cl[i];
                                let (b0, b3, tj, rj) = cl[j];
                                (a0, a3, ti) == (y0, x3, t) && (b0, b3, tj) == (z0, x3, t2) && ri == rj
                            })
                        })
                        .collect(),
                );
            }
        }
    }
    // C: the same over left edges in the (x0, x1, l, b) basis, moved to
    // (x0, x3, t, r) by the connection: |row i⟩ = Σ_j U_ij |col j⟩.
    let mut c_units = Vec::new();
    for x1 in 0..sh.n(1) {
        let ends: Vec<(usize, usize)> =
            (0..sh.n(0)).flat_map(|x0| (0..sh.h_left.mult[x0][x1]).map(move |l| (x0, l))).collect();
        for &(y0, l) in &ends {
            for &(z0, l2_) in &ends {
                c_units.push(
                    rows.iter()
                        .zip(&us)
                        .map(|(rw, u)| {
                            let x = unit(rw.len(), |i, j| {
                                let (a0, a1, li, bi) = rw[i];
                                let (b0, b1, lj, bj) = rw[j];
                                (a0, a1, li) == (y0, x1, l) && (b0, b1, lj) == (z0, x1, l2_) && bi == bj
                            });
                            u.transpose() * x * u.map(|z| z.conj())
                        })
                        .collect(),
                );
            }
        }
    }
    sq.a_units = finish_units(&sq, a_units);
    sq.b_units = finish_units(&sq, b_units);
    sq.c_units = finish_units(&sq, c_units);
    Ok(sq)
}

/// The square A ⊂ B, C ⊂ D of path algebras over one cell row: A from the
/// V0 vertices, B from top edges, C from left edges and D from length-two
/// paths, with C placed in D through the connection and the trace given by
/// the V2 weights.
pub fn verify_commuting_square(w: &Connection) -> Result<SquareReport> {
    let sq = build_square(w)?;
    let mut residual: f64 = 0.0;
    for (bi, c) in sq.cols.iter().enumerate() {
        for i in 0..c.len() {
            for j in 0..c.len() {
                let mut x = zero_like(&sq);
                x[bi][(i, j)] = C64::new(1.0, 0.0);
                let mut d = expect(&sq, &sq.b_units, &expect(&sq, &sq.c_units, &x));
                let ea = expect(&sq, &sq.a_units, &x);
                axpy(&mut d, C64::new(-1.0, 0.0), &ea);
                residual = residual.max(l2(&sq, &d) / l2(&sq, &x));
            }
        }
    }
    let dim_d: usize = sq.cols.iter().map(|c| c.len() * c.len()).sum();
    let mut vecs: Vec<C64> = Vec::new();
    let mut n_vec = 0;
    for (b, _) in &sq.b_units {
        for (c, _) in &sq.c_units {
            let p = mul(b, c);
            if p.iter().all(|m| m.norm() < 1e-14) {
                continue;
            }
            for m in p {
                vecs.extend(m.iter());
            }
            n_vec += 1;
        }
    }
    let nondegenerate = n_vec >= dim_d && {
        let mat = CMat::from_column_slice(dim_d, n_vec, &vecs);
        let sv = mat.singular_values();
        sv.iter().filter(|&&s| s > 1e-8).count() == dim_d
    };
    Ok(SquareReport {
        residual,
        nondegenerate,
        dims: [sq.a_units.len(), sq.b_units.len(), sq.c_units.len(), dim_d],
    })
}

// ------------------------------------------------------------------ tower

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerCube {
    /// Lower corner (j, k, l).
    pub at: [usize; 3],
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleTower {
    /// dim A_{j,k,l} for all j ≤ J, k ≤ K, l ≤ L.
    pub dims: Vec<([usize; 3], usize)>,
    /// One entry per unit cube of the lattice.
    pub cubes: Vec<TowerCube>,
}

fn mirror(w: &Connection, vertical_odd: bool, horizontal_odd: bool) -> Connection {
    match (vertical_odd, horizontal_odd) {
        (false, false) => w.clone(),
        (true, false) => w.vflip(),
        (false, true) => w.conjugate(),
        (true, true) => w.vflip().conjugate(),
    }
}

/// The triple sequence A_{j,k,l}: λ-strings (j), μ-strings (k) and
/// alternating ι/ῑ strings (l), starting at the identity sector. Every
/// unit cube carries six faces: W1/W4 on the j-k faces (by the parity of
/// l), W2 on the k-l faces, W3 on the j-l faces, each mirrored according to
/// the parities of its own two coordinates. A cube commutes exactly when
/// its hexagon relation holds; its residual is reported.
pub fn build_triple_tower(m: &ModuleData, lambda: usize, mu: usize, ch: Chirality, size: [usize; 3]) -> Result<TripleTower> {
    let w1 = w1_from_engine(&m.delta, lambda, mu)?;
    let w2 = build_w2(m, mu)?;
    let w3 = build_w3(m, lambda, ch)?;
    let w4 = crate::alpha::build_w4(m, lambda, mu, ch)?;
    let [jj, kk, ll] = size;

    let lam = w1.shape.h_left.mult.clone();
    let muu = w1.shape.g_top.mult.clone();
    let iota = w2.shape.h_left.mult.clone();
    let iota_t = w2.shape.h_right.mult.clone();
    let b0 = m.delta.names.iter().position(|n| n == "0").unwrap_or(0);
    let mut dims = Vec::new();
    for j in 0..=jj {
        for k in 0..=kk {
            for l in 0..=ll {
                let mut steps = vec![lam.clone(); j];
                steps.extend(std::iter::repeat(muu.clone()).take(k));
                for s in 0..l {
                    steps.push(if s % 2 == 0 { iota.clone() } else { iota_t.clone() });
                }
                let pa = PathAlgebra::new(b0, steps, m.delta.n())?;
                dims.push(([j, k, l], pa.dim()));
            }
        }
    }

    let mut cubes = Vec::new();
    for j in 0..jj {
        for k in 0..kk {
            for l in 0..ll {
                let (jo, ko, lo) = (j % 2 == 1, k % 2 == 1, l % 2 == 1);
                let (near, far) = if lo { (&w4, &w1) } else { (&w1, &w4) };
                let near = mirror(near, jo, ko);
                let far = mirror(far, jo, ko);
                let kl = mirror(&w2, lo, ko);
                let jl = mirror(&w3, lo, jo);
                let residual = check_iybe(&near, &kl, &jl, &jl, &far)?;
                cubes.push(TowerCube { at: [j, k, l], residual });
            }
        }
    }
    Ok(TripleTower { dims, cubes })
}

// ------------------------------------------------------------------ oracle

#[derive(Clone, Debug)]
pub struct W4Oracle {
    pub connection: Connection,
    /// Largest entry of the closed-up operator that moves the first ι-step.
    pub containment_residual: f64,
    /// Largest disagreement between readings from different start vertices.
    pub consistency_residual: f64,
    /// Cells of the W4 shape never reached (filled with zero).
    pub uncovered: usize,
}

type OracleKey = (u32, u32, u32, u32, [usize; 4]);

/// W4(α^ch_λ, μ) from W1, W2 and W3 alone.
///
/// Writing both sides of the cube as maps from λ·ι·μ paths to μ·ι·λ
/// paths, LHS = W1·W2·W3 and RHS = W3ᵀ·(1 ⊗ W4)·W2 with W2, W3 block
/// unitaries, so 1 ⊗ W4 = conj(W3)·LHS·W2†, summed over every start P.
pub fn extract_w4_oracle(m: &ModuleData, lambda: usize, mu: usize, ch: Chirality) -> Result<W4Oracle> {
    let w1 = w1_from_engine(&m.delta, lambda, mu)?;
    let w2 = build_w2(m, mu)?;
    let w3 = build_w3(m, lambda, ch)?;
    let mut it = Interner(HashMap::new());
    let lhs = hexagon_lhs(&w1, &w2, &w3, &mut it);
    let c2 = named_cells(&w2, &mut it);
    let c3 = named_cells(&w3, &mut it);

    // W3 cells [P, Z, S, R], [PZ, ZS, PR, RS] keyed by (P, R, S, PR, RS).
    let mut w3_by: HashMap<(u32, u32, u32, usize, usize), Vec<usize>> = HashMap::new();
    for (i, (q, e, _)) in c3.iter().enumerate() {
        w3_by.entry((q[0], q[3], q[2], e[2], e[3])).or_default().push(i);
    }
    // W2 cells [P, Z, U, Q], [PZ, ZU, PQ, QU] keyed by (P, Q, U, PQ, QU).
    let mut w2_by: HashMap<(u32, u32, u32, usize, usize), Vec<usize>> = HashMap::new();
    for (i, (q, e, _)) in c2.iter().enumerate() {
        w2_by.entry((q[0], q[3], q[2], e[2], e[3])).or_default().push(i);
    }

    // (P, Z, PZ, Z', PZ', S, U, T, [ZS, ST, Z'U, UT])
    type Full = (u32, u32, usize, u32, usize, u32, u32, u32, [usize; 4]);
    let mut y4: HashMap<Full, C64> = HashMap::new();
    let empty = Vec::new();
    for (key, &lv) in &lhs {
        let ([p, qq, r, s, u, t], [e_pq, e_pr, e_rs, e_st, e_qu, e_ut]) = *key;
        for &i3 in w3_by.get(&(p, r, s, e_pr, e_rs)).unwrap_or(&empty) {
            let ([_, z, _, _], [e_pz, e_zs, _, _], v3) = c3[i3];
            for &i2 in w2_by.get(&(p, qq, u, e_pq, e_qu)).unwrap_or(&empty) {
                let ([_, z2, _, _], [e_pz2, e_zu, _, _], v2) = c2[i2];
                let k = (p, z, e_pz, z2, e_pz2, s, u, t, [e_zs, e_st, e_zu, e_ut]);
                *y4.entry(k).or_insert(ZERO) += v3.conj() * lv * v2.conj();
            }
        }
    }

    let mut containment: f64 = 0.0;
    let mut readings: HashMap<OracleKey, Vec<C64>> = HashMap::new();
    for (k, v) in &y4 {
        let (_, z, e_pz, z2, e_pz2, s, u, t, e) = *k;
        if z != z2 || e_pz != e_pz2 {
            containment = containment.max(v.norm());
        } else {
            readings.entry((z, s, t, u, e)).or_default().push(*v);
        }
    }
    let mut consistency: f64 = 0.0;
    let mut value: HashMap<OracleKey, C64> = HashMap::new();
    for (k, vs) in readings {
        let mean = vs.iter().sum::<C64>() / vs.len() as f64;
        for v in &vs {
            consistency = consistency.max((v - mean).norm());
        }
        value.insert(k, mean);
    }

    let g = &m.sectors;
    let wt = g.mu.clone();
    let shape = Shape::new(
        label_graph(g, mu),
        label_graph(g, lambda),
        label_graph(g, mu),
        label_graph(g, lambda),
        [wt.clone(), wt.clone(), wt.clone(), wt],
    )?;
    let ids: Vec<Option<u32>> = g.names.iter().map(|n| it.0.get(n).copied()).collect();
    let mut uncovered = 0;
    let connection = Connection::from_fn(shape, |q, l, b, t, r| {
        let [z, s, tt, u] = q;
        let got = match (ids[z], ids[s], ids[tt], ids[u]) {
            (Some(z), Some(s), Some(tt), Some(u)) => value.get(&(z, s, tt, u, [l, b, t, r])).copied(),
            _ => None,
        };
        got.unwrap_or_else(|| {
            uncovered += 1;
            ZERO
        })
    });
    Ok(W4Oracle { connection, containment_residual: containment, consistency_residual: consistency, uncovered })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ade::{dynkin, ghj_module};

    #[test]
    fn path_counts_on_a3() {
        let g = vec![vec![0, 1, 0], vec![1, 0, 1], vec![0, 1, 0]];
        let pa = PathAlgebra::new(0, vec![g.clone(), g.clone(), g], 3).unwrap();
        assert_eq!(pa.counts, vec![0, 2, 0]);
        assert_eq!(pa.dim(), 4);
    }

    #[test]
    fn oracle_matches_w4_on_a5() {
        let m = ghj_module(&dynkin("A5").unwrap(), 1e-9).unwrap();
        let o = extract_w4_oracle(&m, 1, 1, Chirality::Plus).unwrap();
        assert_eq!(o.uncovered, 0);
        assert!(o.containment_residual < 1e-10, "{}", o.containment_residual);
        assert!(o.consistency_residual < 1e-10, "{}", o.consistency_residual);
        let w4 = crate::alpha::build_w4(&m, 1, 1, Chirality::Plus).unwrap();
        assert!(o.connection.max_diff(&w4) < 1e-10);
    }
}
