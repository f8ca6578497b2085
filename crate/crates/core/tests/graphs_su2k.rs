use std::collections::VecDeque;
use std::f64::consts::PI;

use biunitary::ade::dynkin;
use biunitary::graphs::{connectivity, graph_isomorphic, graph_isomorphic_unoriented, pf_data, pf_residual};
use biunitary::su2k::{fusion_by_recursion, quantum_data};
use biunitary::BipartiteGraph;
use nalgebra::{DMatrix, SymmetricEigen};

fn distances(adj: &[Vec<usize>], from: usize) -> Vec<usize> {
    let mut d = vec![usize::MAX; adj.len()];
    d[from] = 0;
    let mut q = VecDeque::from([from]);
    while let Some(v) = q.pop_front() {
        for (w, &m) in adj[v].iter().enumerate() {
            if m > 0 && d[w] == usize::MAX {
                d[w] = d[v] + 1;
                q.push_back(w);
            }
        }
    }
    d
}

/// Verlinde formula with the SU(2)_k S-matrix.
fn verlinde(k: usize, a: usize, b: usize, c: usize) -> f64 {
    let h = (k + 2) as f64;
    let s = |i: usize, j: usize| (2.0 / h).sqrt() * (((i + 1) * (j + 1)) as f64 * PI / h).sin();
    (0..=k).map(|j| s(a, j) * s(b, j) * s(c, j) / s(0, j)).sum()
}

#[test]
fn a_series_weights_follow_the_sine_formula() {
    for n in 2..=9 {
        let d = dynkin(&format!("A{n}")).unwrap();
        let h = (n + 1) as f64;
        assert!((d.pf.beta - 2.0 * (PI / h).cos()).abs() < 1e-12, "A{n} beta {}", d.pf.beta);
        let dist = distances(&d.adj, d.basepoint);
        for v in 0..n {
            let expect = ((dist[v] + 1) as f64 * PI / h).sin() / (PI / h).sin();
            assert!((d.mu[v] - expect).abs() < 1e-12, "A{n} vertex {v}: {} vs {expect}", d.mu[v]);
        }
    }
}

#[test]
fn perron_frobenius_matches_a_dense_eigensolver() {
    for name in ["E6", "E7", "E8", "D5", "D7"] {
        let d = dynkin(name).unwrap();
        let n = d.n();
        let a = DMatrix::from_fn(n, n, |i, j| d.adj[i][j] as f64);
        let eig = SymmetricEigen::new(a);
        let top = eig.eigenvalues.argmax().0;
        assert!((eig.eigenvalues[top] - d.pf.beta).abs() < 1e-10, "{name}");
        let v = eig.eigenvectors.column(top);
        let scale = v[d.basepoint];
        for i in 0..n {
            assert!((v[i] / scale - d.mu[i]).abs() < 1e-9, "{name} vertex {i}");
        }
        assert!(pf_residual(&d.graph, &d.pf) < 1e-10);
    }
    let e6 = dynkin("E6").unwrap();
    assert!((e6.pf.beta - 2.0 * (PI / 12.0).cos()).abs() < 1e-12);
    assert_eq!(e6.coxeter, 12);
}

#[test]
fn lightest_vertex_is_the_basepoint() {
    for name in ["A6", "D6", "E6", "E7", "E8"] {
        let d = dynkin(name).unwrap();
        let min = d.mu.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((d.mu[d.basepoint] - 1.0).abs() < 1e-12);
        assert!((min - 1.0).abs() < 1e-12, "{name}");
    }
}

#[test]
fn unknown_diagrams_are_rejected() {
    for bad in ["E9", "D3", "A0", "F4", ""] {
        assert!(dynkin(bad).is_err(), "{bad}");
    }
    assert_eq!(dynkin("E_6").unwrap().n(), 6);
}

#[test]
fn two_components_are_reported() {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let g = BipartiteGraph::from_edges(s(&["a", "b"]), s(&["x", "y"]), &[(0, 0), (1, 1)]);
    let c = connectivity(&g);
    assert!(!c.connected);
    assert_eq!(c.components, vec![(vec![0], vec![0]), (vec![1], vec![1])]);
    assert!(pf_data(&g, 1e-12, None).is_err());
}

#[test]
fn relabeled_graph_is_isomorphic() {
    let a3 = dynkin("A3").unwrap().graph;
    let mut g = a3.clone();
    g.even.reverse();
    g.mult.reverse();
    g.even = g.even.iter().map(|x| format!("v{x}")).collect();
    let (em, om) = graph_isomorphic(&a3, &g).expect("isomorphic");
    for v in 0..a3.even.len() {
        for w in 0..a3.odd.len() {
            assert_eq!(a3.mult[v][w], g.mult[em[v]][om[w]]);
        }
    }
    let a4 = dynkin("A4").unwrap().graph;
    let d4 = dynkin("D4").unwrap().graph;
    assert!(graph_isomorphic(&a4, &d4).is_none());
    assert!(!graph_isomorphic_unoriented(&a4, &d4));
    assert!(graph_isomorphic_unoriented(&a4, &a4.transposed()));
}

#[test]
fn fusion_rules_match_verlinde() {
    for k in 1..=10 {
        let q = quantum_data(k, 1e-10).unwrap();
        let rec = fusion_by_recursion(k);
        for a in 0..=k {
            for b in 0..=k {
                for c in 0..=k {
                    let v = verlinde(k, a, b, c);
                    assert!((v - f64::from(q.n[a][b][c])).abs() < 1e-9, "k={k} N_{a}{b}^{c}");
                    assert_eq!(q.n[a][b][c], rec[a][b][c]);
                }
            }
        }
    }
}

#[test]
fn quantum_dimensions() {
    for k in 1..=10 {
        let q = quantum_data(k, 1e-10).unwrap();
        let h = (k + 2) as f64;
        for a in 0..=k {
            let d = ((a + 1) as f64 * PI / h).sin() / (PI / h).sin();
            assert!((q.qdim[a] - d).abs() < 1e-12);
        }
        assert!(q.pentagon_residual < 1e-10 && q.hexagon_residual < 1e-10, "k={k}");
        assert!(q.f_unitarity_residual() < 1e-12);
    }
    let q = quantum_data(10, 1e-10).unwrap();
    assert!((q.qdim[2] - (1.0 + 3f64.sqrt())).abs() < 1e-12);
}

#[test]
fn ising_f_block() {
    let q = quantum_data(2, 1e-10).unwrap();
    let f: Vec<f64> = [(0, 0), (0, 2), (2, 0), (2, 2)].iter().map(|&(e, g)| q.fsym(1, 1, 1, 1, e, g)).collect();
    for x in &f {
        assert!((x.abs() - 0.5f64.sqrt()).abs() < 1e-12, "{f:?}");
    }
    // real orthogonal 2×2 with entries ±1/√2
    assert!((f[0] * f[1] + f[2] * f[3]).abs() < 1e-12);
    assert!((f[0] * f[3] - f[1] * f[2]).abs() > 0.99);
}
