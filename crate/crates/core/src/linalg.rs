//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Frobenius-norm deviation of `U` from being unitary (both sides).
pub fn unitarity_residual(u: &CMat) -> f64 {
    let (m, n) = (u.nrows(), u.ncols());
    let a = (u.adjoint() * u - CMat::identity(n, n)).norm();
    let b = (u * u.adjoint() - CMat::identity(m, m)).norm();
    a.max(b)
}

/// Orthonormal basis (as columns) of the null space of `a`, with singular
/// values below `thr` treated as zero.
pub fn nullspace(a: &CMat, thr: f64) -> CMat {
    let n = a.ncols();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return CMat::identity(n, n);
    }
    // Reduce tall systems to a square triangular factor first.
    let r = if a.nrows() > n {
        a.clone().qr().r()
    } else {
        let mut p = CMat::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    };
    let mut sq = CMat::zeros(n, n);
    sq.view_mut((0, 0), (r.nrows(), n)).copy_from(&r);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let cols: Vec<DVector<C64>> = (0..n)
        .filter(|&i| svd.singular_values[i] < thr)
        .map(|i| vt.row(i).adjoint())
        .collect();
    if cols.is_empty() {
        return CMat::zeros(n, 0);
    }
    CMat::from_columns(&cols)
}

/// Hermitian eigen-decomposition, eigenvalues ascending.
pub fn hermitian_eig(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    if n == 0 {
        return (vec![], CMat::zeros(0, 0));
    }
    let sym = (h + h.adjoint()) * c(0.5);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_columns(&idx.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    (vals, vecs)
}

/// Unitary factor of the polar decomposition of a square matrix, if it is
/// numerically invertible.
pub fn polar_unitary(m: &CMat) -> Option<CMat> {
    if m.nrows() != m.ncols() {
        return None;
    }
    if m.nrows() == 0 {
        return Some(m.clone());
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() < 1e-10 * smax.max(1e-300) {
        return None;
    }
    Some(svd.u.unwrap() * svd.v_t.unwrap())
}

/// Orthonormalize columns (modified Gram–Schmidt), dropping dependent ones.
pub fn orthonormalize(m: &CMat, thr: f64) -> CMat {
    let mut cols: Vec<DVector<C64>> = Vec::new();
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        for _ in 0..2 {
            for q in &cols {
                let p = q.dotc(&v);
                v -= q * p;
            }
        }
        let nv = v.norm();
        if nv > thr {
            cols.push(v / c(nv));
        }
    }
    if cols.is_empty() {
        CMat::zeros(m.nrows(), 0)
    } else {
        CMat::from_columns(&cols)
    }
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Seeded random unitary of size `n` (orthonormalized random matrix).
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    loop {
        let m = CMat::from_fn(n, n, |_, _| random_complex(rng));
        let q = orthonormalize(&m, 1e-6);
        if q.ncols() == n {
            return q;
        }
    }
}

/// Fix the phase of each column so that its first entry above `thr` in
/// modulus is real positive. Returns the applied phases.
pub fn fix_column_phases(m: &mut CMat, thr: f64) -> Vec<C64> {
    let mut phases = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let mut ph = ONE;
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if z.norm() > thr {
                ph = z.conj() / c(z.norm());
                break;
            }
        }
        for i in 0..m.nrows() {
            m[(i, j)] *= ph;
        }
        phases.push(ph);
    }
    phases
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn nullspace_of_rank_one() {
        let a = CMat::from_row_slice(1, 3, &[c(1.0), c(1.0), c(0.0)]);
        let ns = nullspace(&a, 1e-9);
        assert_eq!(ns.ncols(), 2);
        assert!((&a * &ns).norm() < 1e-12);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(4, &mut rng);
        assert!(unitarity_residual(&u) < 1e-12);
        let p = polar_unitary(&(u.clone() * c(2.5))).unwrap();
        assert!((p - u).norm() < 1e-10);
    }
}
