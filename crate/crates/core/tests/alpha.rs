use std::collections::HashMap;
use std::f64::consts::PI;

use biunitary::ade::{dynkin, ghj_module, ocneanu_connection, ModuleData};
use biunitary::alpha::{alpha_system, alpha_system_from, build_w2, build_w3, build_w4, check_conj, check_iybe, iybe_residual, split_graded};
use biunitary::catops::{equivalent, fusion_closure, fusion_table};
use biunitary::flatness::is_flat;
use biunitary::linalg::c;
use biunitary::strings::{build_triple_tower, extract_w4_oracle, verify_commuting_square};
use biunitary::su2k::{braiding_gauge, build_w1, fusion_by_recursion, quantum_data, w1_from_engine};
use biunitary::Chirality::{self, Minus, Plus};
use biunitary::{BipartiteGraph, Connection};

const CH: [Chirality; 2] = [Plus, Minus];

fn module(name: &str) -> ModuleData {
    ghj_module(&dynkin(name).unwrap(), 1e-9).unwrap()
}

fn equiv(a: &Connection, b: &Connection) -> bool {
    equivalent(a, b, 1e-9).unwrap().is_some_and(|e| e.residual < 1e-8)
}

fn verlinde(k: usize, a: usize, b: usize, c: usize) -> i64 {
    let h = (k + 2) as f64;
    let s = |i: usize, j: usize| (2.0 / h).sqrt() * (((i + 1) * (j + 1)) as f64 * PI / h).sin();
    let v: f64 = (0..=k).map(|j| s(a, j) * s(b, j) * s(c, j) / s(0, j)).sum();
    v.round() as i64
}

#[test]
fn w1_fusion_table_at_level_four() {
    let k = 4;
    let q = quantum_data(k, 1e-10).unwrap();
    let gens: Vec<Connection> = (1..=k).map(|l| build_w1(&q, l, 1).unwrap()).collect();
    let s = &gens[0].shape;
    let id = Connection::identity(&s.g_top, &s.weights[0], &s.weights[3]);
    let t = fusion_table(&gens, &id, 32).unwrap();
    assert_eq!(t.labels.len(), k + 1);
    for a in 0..=k {
        for b in 0..=k {
            for cc in 0..=k {
                assert_eq!(t.n[a][b][cc], verlinde(k, a, b, cc), "N_{a}{b}^{cc}");
            }
        }
    }
    assert!(t.to_dot().starts_with("digraph"));
}

#[test]
fn w1_matches_the_engine_and_is_self_dual() {
    for k in [2, 4, 6] {
        let q = quantum_data(k, 1e-10).unwrap();
        let e = biunitary::su2k::regular_engine(k).unwrap();
        for (l, mu) in [(1, 1), (1, 2), (2, 1)] {
            let w = build_w1(&q, l, mu).unwrap();
            assert!(w.verify_biunitarity(1e-10).pass);
            assert!(equiv(&w, &w1_from_engine(&e, l, mu).unwrap()), "k={k} ({l},{mu})");
            assert!(equiv(&w.conjugate(), &w), "k={k} ({l},{mu})");
        }
    }
}

#[test]
fn braiding_relates_the_two_products() {
    for (k, l1, l2) in [(2, 1, 1), (4, 1, 2), (10, 1, 2)] {
        let q = quantum_data(k, 1e-10).unwrap();
        let (a, b) = (build_w1(&q, l1, 1).unwrap(), build_w1(&q, l2, 1).unwrap());
        let ab = biunitary::catops::compose(&a, &b).unwrap();
        let ba = biunitary::catops::compose(&b, &a).unwrap();
        let (fam, _) = braiding_gauge(&q, l1, l2, 1).unwrap();
        let moved = ab.gauge_transform(&fam, false, 1e-9).unwrap();
        assert!(moved.max_diff(&ba) < 1e-12, "k={k}: {}", moved.max_diff(&ba));
    }
}

#[test]
fn theta_and_locality() {
    let cases: [(&str, &[usize], bool); 6] = [
        ("A5", &[0], true),
        ("D4", &[0, 4], true),
        ("D6", &[0, 8], true),
        ("E6", &[0, 6], true),
        ("D5", &[0, 6], false),
        ("E7", &[0, 8, 16], false),
    ];
    for (name, theta, local) in cases {
        let m = module(name);
        assert_eq!(m.theta, theta, "{name}");
        assert_eq!(m.local, local, "{name}");
        assert_eq!(m.local, m.diagram.is_local_type(), "{name}");
        assert_eq!(m.k + 2, m.diagram.coxeter);
    }
}

#[test]
fn generating_module_connection_is_flat_on_e6() {
    let m = module("E6");
    let w2 = build_w2(&m, 1).unwrap();
    let rep = is_flat(&w2, "0", (4, 4), 1e-9).unwrap();
    assert!(rep.is_flat(), "{}", rep.max_defect());
}

#[test]
fn builders_are_biunitary_on_e6() {
    let m = module("E6");
    for ch in CH {
        assert!(build_w3(&m, 1, ch).unwrap().verify_biunitarity(1e-10).pass);
        for mu in 1..=2 {
            let r = build_w4(&m, 1, mu, ch).unwrap().verify_biunitarity(1e-10);
            assert!(r.pass, "{r:?}");
        }
        assert!(iybe_residual(&m, 1, 1, ch).unwrap() < 1e-10);
    }
    assert!(check_conj(&m, 1, 1).unwrap() < 1e-10);
    assert!(check_conj(&m, 2, 2).unwrap() < 1e-10);
}

#[test]
fn iybe_detects_a_chirality_mismatch() {
    let m = module("E6");
    let w1 = w1_from_engine(&m.delta, 1, 1).unwrap();
    let w2 = build_w2(&m, 1).unwrap();
    let w3m = build_w3(&m, 1, Minus).unwrap();
    let w3p = build_w3(&m, 1, Plus).unwrap();
    let w4p = build_w4(&m, 1, 1, Plus).unwrap();
    assert!(check_iybe(&w1, &w2, &w3p, &w3p, &w4p).unwrap() < 1e-10);
    let bad = check_iybe(&w1, &w2, &w3m, &w3m, &w4p).unwrap();
    assert!(bad > 1e-2, "{bad}");
}

#[test]
fn split_graded_on_three_components() {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let g = BipartiteGraph::from_edges(s(&["a", "b", "c"]), s(&["x", "y", "z"]), &[(0, 0), (1, 1), (2, 2)]);
    let id = Connection::identity(&g, &[1.0; 3], &[1.0; 3]);
    let parts = split_graded(&id).unwrap();
    assert_eq!(parts.len(), 3);
    for p in &parts {
        assert_eq!(p.n_cells(), 1);
        assert!(p.verify_biunitarity(1e-12).pass);
    }
    assert_eq!(parts[0].shape.g_top.even, vec!["a"]);
}

#[test]
fn a5_alpha_system_is_the_fusion_ring() {
    let m = module("A5");
    let sys = alpha_system(&m, Plus, 32).unwrap();
    let expect = fusion_by_recursion(m.k);
    assert_eq!(sys.objects.len(), m.k + 1);
    for (a, row) in expect.iter().enumerate() {
        for (b, col) in row.iter().enumerate() {
            for (cc, &n) in col.iter().enumerate() {
                assert_eq!(sys.table.n[a][b][cc], i64::from(n));
            }
        }
    }
}

#[test]
fn e6_chiral_tables_agree() {
    let m = module("E6");
    let p = alpha_system(&m, Plus, 32).unwrap();
    let q = alpha_system(&m, Minus, 32).unwrap();
    assert_eq!(p.objects.len(), 6);
    assert_eq!(p.table.n, q.table.n);
}

#[test]
fn d4_alpha_system_against_the_oracle() {
    let m = module("D4");
    for ch in CH {
        let direct = alpha_system(&m, ch, 32).unwrap();
        assert_eq!(direct.objects.len(), 4);
        // α_2 splits, its pieces are never right factors
        for j in [2, 3] {
            assert!(direct.full[j].is_none());
            assert!(direct.table.n.iter().all(|r| r[j].iter().all(|&x| x == -1)));
        }
        let via = alpha_system_from(&m, 32, |l| extract_w4_oracle(&m, l, 1, ch).map(|o| o.connection)).unwrap();
        assert_eq!(via.objects.len(), 4);
        assert_eq!(via.table.n, direct.table.n);
    }
}

#[test]
fn e7_system_generated_by_alpha_one() {
    let m = module("E7");
    let w = build_w4(&m, 1, 1, Plus).unwrap();
    let g = &m.sectors;
    let id = Connection::identity(&w.shape.g_top, &g.mu, &g.mu);
    let sys = fusion_closure(&[w], &id, 40, 1e-9).unwrap();
    let d10 = dynkin("D10").unwrap();
    assert_eq!(sys.objects.len(), d10.n());
    // multiplication by α_1 is the adjacency of D10
    let j = 1;
    let adj = BipartiteGraph::from_fn(
        (0..sys.objects.len()).map(|i| i.to_string()).collect(),
        (0..sys.objects.len()).map(|i| i.to_string()).collect(),
        |a, b| sys.table.n[a][j][b] as usize,
    );
    let deg: Vec<usize> = adj.mult.iter().map(|r| r.iter().sum()).collect();
    let mut d10deg: Vec<usize> = d10.adj.iter().map(|r| r.iter().sum()).collect();
    let mut got = deg.clone();
    got.sort();
    d10deg.sort();
    assert_eq!(got, d10deg);
}

#[test]
fn w4_oracle_on_d4_and_e7() {
    for name in ["D4", "E7"] {
        let m = module(name);
        for ch in CH {
            let o = extract_w4_oracle(&m, 1, 1, ch).unwrap();
            assert_eq!(o.uncovered, 0);
            assert!(o.containment_residual < 1e-10 && o.consistency_residual < 1e-10);
            assert!(equiv(&o.connection, &build_w4(&m, 1, 1, ch).unwrap()), "{name}{}", ch.symbol());
        }
    }
}

fn rotate_two_rows(w: &Connection, theta: f64) -> Connection {
    let (x0, x2, i, j, rows, cols, m) = w
        .corner_pairs()
        .into_iter()
        .find_map(|(x0, x2)| {
            let (rows, cols, m) = w.corner_matrix(x0, x2);
            let j = rows.iter().position(|r| r.0 != rows[0].0)?;
            Some((x0, x2, 0, j, rows, cols, m))
        })
        .expect("a corner with two rows");
    let (cs, sn) = (theta.cos(), theta.sin());
    let mut vals = HashMap::new();
    for (col, &(x3, t, r)) in cols.iter().enumerate() {
        let (a, b) = (m[(i, col)], m[(j, col)]);
        for (row, v) in [(i, a * c(cs) + b * c(sn)), (j, b * c(cs) - a * c(sn))] {
            let (x1, l, bb) = rows[row];
            vals.insert(([x0, x1, x2, x3], l, bb, t, r), v);
        }
    }
    Connection::from_fn(w.shape.clone(), |q, l, b, t, r| vals.get(&(q, l, b, t, r)).copied().unwrap_or_else(|| w.get(q, l, b, t, r)))
}

#[test]
fn commuting_squares() {
    for name in ["A5", "D4", "E6", "E7"] {
        let w = ocneanu_connection(&dynkin(name).unwrap(), Plus).unwrap();
        let rep = verify_commuting_square(&w).unwrap();
        assert!(rep.residual < 1e-12 && rep.nondegenerate, "{name}: {rep:?}");
    }
    for name in ["A4", "E6"] {
        let w = ocneanu_connection(&dynkin(name).unwrap(), Plus).unwrap();
        let bent = rotate_two_rows(&w, 0.4);
        let u = bent.corner_pairs().into_iter().map(|(a, b)| biunitary::linalg::unitarity_residual(&bent.corner_matrix(a, b).2)).fold(0.0, f64::max);
        assert!(u < 1e-12, "rotation keeps the corner matrices unitary");
        let rep = verify_commuting_square(&bent).unwrap();
        assert!(rep.residual > 1e-2, "{name}: {rep:?}");
    }
}

#[test]
fn triple_tower_cubes_commute() {
    let a5 = module("A5");
    let t = build_triple_tower(&a5, 1, 1, Plus, [1, 1, 1]).unwrap();
    assert_eq!(t.cubes.len(), 1);
    assert!(t.cubes.iter().all(|c| c.residual < 1e-10));
    let e6 = module("E6");
    let t = build_triple_tower(&e6, 1, 1, Minus, [1, 2, 1]).unwrap();
    assert_eq!(t.cubes.len(), 2);
    assert!(t.cubes.iter().all(|c| c.residual < 1e-10), "{:?}", t.cubes.iter().map(|c| c.residual).collect::<Vec<_>>());
    assert!(t.dims.iter().all(|d| d.1 > 0));
    let t = build_triple_tower(&a5, 1, 1, Plus, [0, 0, 0]).unwrap();
    assert!(t.cubes.is_empty());
    assert_eq!(t.dims.len(), 1);
}
