//! One PASS/FAIL line per acceptance criterion. Runs as a plain binary so
//! the lines always reach the test log.
//!
//! The process fails only when an outcome differs from the recorded one:
//! criterion 2 is a recorded FAIL (D7 carries no violation at sizes up to
//! (4,4); its first witness sits at (5,5), which is printed alongside).

use std::path::PathBuf;
use std::time::{Duration, Instant};

use biunitary::ade::{dynkin, ghj_module, ocneanu_connection, ModuleData};
use biunitary::alpha::{build_w4, check_conj, iybe_residual, split_graded};
use biunitary::catops::{equivalent, fusion_table};
use biunitary::flatness::{flat_part, is_flat};
use biunitary::graphs::{graph_isomorphic_unoriented, BipartiteGraph};
use biunitary::strings::extract_w4_oracle;
use biunitary::su2k::{build_w1, fusion_by_recursion, quantum_data};
use biunitary::{Chirality, Connection};

const CH: [Chirality; 2] = [Chirality::Plus, Chirality::Minus];

struct Line {
    pass: bool,
    detail: String,
}

fn line(pass: bool, detail: impl Into<String>) -> Line {
    Line { pass, detail: detail.into() }
}

fn out_dir() -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn module(name: &str) -> ModuleData {
    ghj_module(&dynkin(name).unwrap(), 1e-9).unwrap()
}

fn names(prefix: char, range: std::ops::RangeInclusive<usize>) -> Vec<String> {
    range.map(|n| format!("{prefix}{n}")).collect()
}

fn within(t: Instant, budget: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e < budget, format!("{:.2}s / {}s", e.as_secs_f64(), budget.as_secs()))
}

fn c1() -> Line {
    let t = Instant::now();
    let mut all = names('A', 2..=9);
    all.extend(names('D', 4..=8));
    all.extend(names('E', 6..=8));
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for n in &all {
        let d = dynkin(n).unwrap();
        for ch in CH {
            let r = ocneanu_connection(&d, ch).unwrap().verify_biunitarity(1e-10);
            ok &= r.pass;
            worst = worst.max(r.unitarity_residual).max(r.crossing_residual);
        }
    }
    let (fast, time) = within(t, Duration::from_secs(5));
    line(ok && fast, format!("{} diagrams × ±, max residual {worst:.1e}, {time}", all.len()))
}

fn c2() -> Line {
    let t = Instant::now();
    let mut all = names('A', 2..=9);
    all.extend(names('D', 4..=8));
    all.extend(names('E', 6..=8));
    let mut wrong = Vec::new();
    let mut summary = Vec::new();
    for n in &all {
        let d = dynkin(n).unwrap();
        let w = ocneanu_connection(&d, Chirality::Plus).unwrap();
        let rep = is_flat(&w, d.basepoint_name(), (4, 4), 1e-8).unwrap();
        let expect_flat = d.is_local_type();
        let flat = rep.max_defect() < 1e-8;
        let violated = rep.max_defect() > 0.1;
        if let Some(wt) = &rep.witness {
            let p = out_dir().join(format!("witness_{n}.json"));
            std::fs::write(p, serde_json::to_string_pretty(wt).unwrap()).unwrap();
        }
        if (expect_flat && !flat) || (!expect_flat && !violated) {
            wrong.push(format!("{n} (max defect {:.1e})", rep.max_defect()));
        }
        if !expect_flat {
            summary.push(format!("{n} first violation {:?}", rep.first_violation(0.1)));
        }
    }
    let (fast, time) = within(t, Duration::from_secs(120));
    // the next size up, for the diagrams the census misses
    let mut beyond = Vec::new();
    for n in &wrong {
        let name = n.split(' ').next().unwrap();
        let d = dynkin(name).unwrap();
        let w = ocneanu_connection(&d, Chirality::Plus).unwrap();
        let rep = is_flat(&w, d.basepoint_name(), (5, 5), 1e-8).unwrap();
        beyond.push(format!("{name} at (5,5): defect {:.3} first at {:?}", rep.max_defect(), rep.first_violation(0.1)));
    }
    let pass = wrong.is_empty() && fast;
    let mut detail = format!("{}; {time}", summary.join(", "));
    if !wrong.is_empty() {
        detail = format!("verdict mismatch: {}; {detail}; {}", wrong.join(", "), beyond.join(", "));
    }
    line(pass, detail)
}

fn c3() -> Line {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 1..=10 {
        let q = quantum_data(k, 1e-10).unwrap();
        worst = worst.max(q.pentagon_residual).max(q.hexagon_residual);
    }
    let mut mismatched = Vec::new();
    for k in 1..=6 {
        let q = quantum_data(k, 1e-10).unwrap();
        let gens: Vec<Connection> = (1..=k).map(|l| build_w1(&q, l, 1).unwrap()).collect();
        let s = &gens[0].shape;
        let id = Connection::identity(&s.g_top, &s.weights[0], &s.weights[3]);
        let table = fusion_table(&gens, &id, 32).unwrap();
        let expect = fusion_by_recursion(k);
        let same = table.n.len() == k + 1
            && (0..=k).all(|a| (0..=k).all(|b| (0..=k).all(|c| table.n[a][b][c] == i64::from(expect[a][b][c]))));
        if !same {
            mismatched.push(k);
        }
    }
    let (fast, time) = within(t, Duration::from_secs(60));
    line(
        worst < 1e-10 && mismatched.is_empty() && fast,
        format!("max pentagon/hexagon {worst:.1e} (k ≤ 10), table mismatches {mismatched:?} (k ≤ 6), {time}"),
    )
}

fn c4() -> Line {
    let mut worst: f64 = 0.0;
    let mut missing = Vec::new();
    for k in 1..=8 {
        let q = quantum_data(k, 1e-10).unwrap();
        let w1 = build_w1(&q, 1, 1).unwrap();
        let piece = split_graded(&w1).unwrap().remove(0);
        let a = ocneanu_connection(&dynkin(&format!("A{}", k + 1)).unwrap(), Chirality::Plus).unwrap();
        match equivalent(&piece, &a, 1e-10).unwrap() {
            Some(e) if e.residual < 1e-8 => worst = worst.max(e.residual),
            _ => missing.push(k),
        }
    }
    line(missing.is_empty(), format!("k = 1..8, max gauge residual {worst:.1e}, failures {missing:?}"))
}

fn c5_c6() -> (Line, Line) {
    let t = Instant::now();
    let (mut iy, mut cj): (f64, f64) = (0.0, 0.0);
    for n in ["A5", "D4", "E6", "E7"] {
        let m = module(n);
        for l in 1..=2 {
            for mu in 1..=2 {
                for ch in CH {
                    iy = iy.max(iybe_residual(&m, l, mu, ch).unwrap());
                }
                cj = cj.max(check_conj(&m, l, mu).unwrap());
            }
        }
    }
    let (fast, time) = within(t, Duration::from_secs(120));
    (
        line(iy < 1e-9 && fast, format!("{{A5, D4, E6, E7}} × λ, μ ∈ {{1,2}} × ±, max {iy:.1e}, {time}")),
        line(cj < 1e-9, format!("same sweep, max {cj:.1e}")),
    )
}

fn c7() -> Line {
    let mut all = names('A', 2..=9);
    all.extend(names('D', 4..=8));
    all.extend(names('E', 6..=8));
    let mut bad = Vec::new();
    for n in &all {
        let m = module(n);
        let g: &BipartiteGraph = &m.diagram.graph;
        for ch in CH {
            let parts = split_graded(&build_w4(&m, 1, 1, ch).unwrap()).unwrap();
            let iso = parts
                .iter()
                .all(|p| graph_isomorphic_unoriented(&p.shape.g_top, g) && graph_isomorphic_unoriented(&p.shape.g_bot, g));
            if parts.len() != 2 || !iso {
                bad.push(format!("{n}{}:{}", ch.symbol(), parts.len()));
            }
        }
    }
    line(bad.is_empty(), format!("{} modules × ±, 2 components with the diagram as horizontal graphs; bad {bad:?}", all.len()))
}

fn c8() -> Line {
    let t = Instant::now();
    let mut worst_local: f64 = 0.0;
    let mut e7_violation = None;
    for n in ["A5", "D4", "E6", "E8", "E7"] {
        let m = module(n);
        let bp = m.diagram.basepoint_name().to_string();
        for l in 1..=2 {
            for mu in 1..=2 {
                let w = build_w4(&m, l, mu, Chirality::Plus).unwrap();
                let rep = is_flat(&w, &bp, (4, 4), 1e-8).unwrap();
                if n == "E7" {
                    if e7_violation.is_none() && rep.max_defect() > 0.1 {
                        e7_violation = Some((l, mu, rep.first_violation(0.1), rep.max_defect()));
                        if let Some(wt) = &rep.witness {
                            let p = out_dir().join(format!("witness_w4_E7_{l}{mu}.json"));
                            std::fs::write(p, serde_json::to_string_pretty(wt).unwrap()).unwrap();
                        }
                    }
                } else {
                    worst_local = worst_local.max(rep.max_defect());
                }
            }
        }
    }
    let (fast, time) = within(t, Duration::from_secs(600));
    line(
        worst_local < 1e-8 && e7_violation.is_some() && fast,
        format!("local max defect {worst_local:.1e}; E7 violation (λ, μ, size, defect) {e7_violation:?}; {time}"),
    )
}

fn c9() -> Line {
    let mut worst: f64 = 0.0;
    let mut worst_cont: f64 = 0.0;
    let mut bad = Vec::new();
    for n in ["A5", "D4", "E6"] {
        let m = module(n);
        let o = extract_w4_oracle(&m, 1, 1, Chirality::Plus).unwrap();
        let w4 = build_w4(&m, 1, 1, Chirality::Plus).unwrap();
        worst_cont = worst_cont.max(o.containment_residual);
        match equivalent(&o.connection, &w4, 1e-10).unwrap() {
            Some(e) if e.residual < 1e-8 && o.uncovered == 0 => worst = worst.max(e.residual),
            _ => bad.push(n),
        }
    }
    line(
        bad.is_empty() && worst_cont < 1e-9,
        format!("A5, D4, E6 at λ = μ = 1: gauge residual {worst:.1e}, containment {worst_cont:.1e}, failures {bad:?}"),
    )
}

fn c10() -> Line {
    let t = Instant::now();
    let d = dynkin("E7").unwrap();
    let w = ocneanu_connection(&d, Chirality::Plus).unwrap();
    let fp = flat_part(&w, d.basepoint_name(), 12, 1e-9).unwrap();
    let d10 = dynkin("D10").unwrap();
    let iso = graph_isomorphic_unoriented(&fp.principal_graph, &d10.graph);
    let (fast, time) = within(t, Duration::from_secs(1800));
    line(
        fp.stabilized && iso && fast,
        format!(
            "depth 12: stabilized {}, principal graph {} vertices ≅ D10: {iso}, {time}",
            fp.stabilized,
            fp.principal_graph.even.len() + fp.principal_graph.odd.len()
        ),
    )
}

fn main() {
    let expected_fail = [2usize];
    let mut results: Vec<(usize, Line)> = Vec::new();
    let mut report = |i: usize, l: Line| {
        println!("criterion {i:>2}: {} — {}", if l.pass { "PASS" } else { "FAIL" }, l.detail);
        results.push((i, l));
    };
    report(1, c1());
    report(2, c2());
    report(3, c3());
    report(4, c4());
    let (l5, l6) = c5_c6();
    report(5, l5);
    report(6, l6);
    report(7, c7());
    report(8, c8());
    report(9, c9());
    report(10, c10());
    let passed = results.iter().filter(|(_, l)| l.pass).count();
    let unexpected: Vec<usize> =
        results.iter().filter(|(i, l)| l.pass == expected_fail.contains(i)).map(|(i, _)| *i).collect();
    println!("acceptance: {passed}/{} PASS; recorded FAIL {expected_fail:?}", results.len());
    if !unexpected.is_empty() {
        println!("acceptance: outcome differs from the record for {unexpected:?}");
        std::process::exit(1);
    }
}
