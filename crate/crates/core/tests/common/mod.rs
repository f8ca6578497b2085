#![allow(dead_code)]

use biunitary::ade::{dynkin, ocneanu_connection};
use biunitary::catops::equivalent;
use biunitary::linalg::random_unitary;
use biunitary::{Chirality, Connection, GaugeFamily};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn ocn(name: &str, ch: Chirality) -> Connection {
    ocneanu_connection(&dynkin(name).unwrap(), ch).unwrap()
}

pub fn equiv(a: &Connection, b: &Connection) -> bool {
    equivalent(a, b, 1e-9).unwrap().is_some_and(|e| e.residual < 1e-8)
}

/// Seeded random unitary on every vertical multiplicity space.
pub fn random_gauge(w: &Connection, seed: u64) -> GaugeFamily {
    let s = &w.shape;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = GaugeFamily::default();
    for a in 0..s.n(0) {
        for b in 0..s.n(1) {
            let m = s.h_left.mult[a][b];
            if m > 0 {
                g.left.insert((a, b), random_unitary(m, &mut rng));
            }
        }
    }
    for a in 0..s.n(2) {
        for b in 0..s.n(3) {
            let m = s.h_right.mult[a][b];
            if m > 0 {
                g.right.insert((a, b), random_unitary(m, &mut rng));
            }
        }
    }
    g
}
