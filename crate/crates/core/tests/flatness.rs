use biunitary::ade::{dynkin, ocneanu_connection};
use biunitary::flatness::{flat_part, is_flat, partition_function, witness_strings, GridString};
use biunitary::graphs::graph_isomorphic_unoriented;
use biunitary::linalg::C64;
use biunitary::Chirality::Plus;
use biunitary::Connection;

fn ocn(name: &str) -> (Connection, String) {
    let d = dynkin(name).unwrap();
    (ocneanu_connection(&d, Plus).unwrap(), d.basepoint_name().to_string())
}

#[test]
fn a_series_is_flat() {
    for name in ["A3", "A4", "A6"] {
        let (w, bp) = ocn(name);
        let rep = is_flat(&w, &bp, (3, 3), 1e-9).unwrap();
        assert!(rep.is_flat(), "{name}: {}", rep.max_defect());
        assert!(rep.witness.is_none());
        assert_eq!(rep.sizes.len(), 9);
    }
}

#[test]
fn identity_connection_is_flat() {
    let d = dynkin("A4").unwrap();
    let id = Connection::identity(&d.graph, &d.pf.mu_even, &d.pf.mu_odd);
    let rep = is_flat(&id, d.basepoint_name(), (3, 3), 1e-9).unwrap();
    assert!(rep.is_flat(), "{}", rep.max_defect());
}

#[test]
fn d5_violation_has_a_checkable_witness() {
    let (w, bp) = ocn("D5");
    let rep = is_flat(&w, &bp, (3, 3), 1e-9).unwrap();
    assert!(!rep.is_flat());
    assert_eq!(rep.first_violation(0.1), Some([3, 3]));
    let wit = rep.witness.as_ref().unwrap();
    let z = C64::new(wit.z[0], wit.z[1]);
    assert!((z - 1.0).norm() > 0.5, "{z}");
    assert!(((z - 1.0).norm() - rep.max_defect()).abs() < 1e-12);
    // recompute the witness directly with the transfer contraction
    let (sigma, rho) = witness_strings(&w, wit).unwrap();
    assert_eq!(sigma.len(), 2 * wit.size[0]);
    assert_eq!(rho.len(), 2 * wit.size[1]);
    let z2 = partition_function(&w, &bp, &sigma, &rho, &sigma, &rho).unwrap();
    assert!((z2 - z).norm() < 1e-10, "{z2} vs {z}");
}

#[test]
fn small_sizes_do_not_see_d5() {
    let (w, bp) = ocn("D5");
    let rep = is_flat(&w, &bp, (2, 2), 1e-9).unwrap();
    assert!(rep.is_flat(), "{}", rep.max_defect());
}

#[test]
fn report_round_trips_as_json() {
    let (w, bp) = ocn("D5");
    let rep = is_flat(&w, &bp, (3, 3), 1e-9).unwrap();
    let back: biunitary::flatness::FlatnessReport = serde_json::from_str(&rep.to_json()).unwrap();
    assert_eq!(back, rep);
    assert_eq!(back.verdict, "violated");
}

#[test]
fn bad_inputs() {
    let (w, bp) = ocn("A4");
    assert!(is_flat(&w, "nope", (1, 1), 1e-9).is_err());
    let star = w.shape.v(0).iter().position(|x| *x == bp).unwrap();
    let t = GridString::trivial(star);
    let odd = GridString { verts: vec![star as u16, 0], edges: vec![0] };
    assert!(partition_function(&w, &bp, &odd, &t, &odd, &t).is_err());
    // the empty diagram has value one
    let z = partition_function(&w, &bp, &t, &t, &t, &t).unwrap();
    assert!((z - 1.0).norm() < 1e-15);
}

#[test]
fn flat_parts() {
    for (name, expect) in [("A4", "A4"), ("D4", "D4"), ("E6", "E6"), ("D5", "A7")] {
        let (w, bp) = ocn(name);
        let fp = flat_part(&w, &bp, 12, 1e-9).unwrap();
        assert!(fp.stabilized, "{name}");
        let g = dynkin(expect).unwrap().graph;
        assert!(graph_isomorphic_unoriented(&fp.principal_graph, &g), "{name} → {:?}", fp.principal_graph);
        assert!(fp.to_json().contains("principal_graph"));
    }
}
