//! Random instances for tests, benchmarks and the self-test: Ginibre
//! matrices, Haar-ish unitaries, density matrices and Kraus channels.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, ComplexMatrix, DEFAULT_TOL};

pub fn normal_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| normal_complex(rng))
}

pub fn hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ginibre(dim, rng).hermitian_part()
}

/// Unitary from Gram-Schmidt on the columns of a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v = g.column(j);
        // two passes keep the basis orthonormal to round-off
        for _ in 0..2 {
            for u in &cols {
                let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

pub fn pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim).map(|_| normal_complex(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Full-rank density matrix `G G^dagger / Tr(G G^dagger)`.
pub fn density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    m.scale_real(1.0 / tr).hermitian_part()
}

/// `count` Kraus operators `G_j S^{-1/2}` with `S = sum G_j^dagger G_j`,
/// which sum to the identity exactly up to round-off.
pub fn kraus_operators<R: Rng + ?Sized>(
    dim: usize,
    count: usize,
    rng: &mut R,
) -> Vec<ComplexMatrix> {
    let gs: Vec<ComplexMatrix> = (0..count).map(|_| ginibre(dim, rng)).collect();
    let mut s = ComplexMatrix::zeros(dim);
    for g in &gs {
        s = &s + &g.adjoint().matmul(g);
    }
    let s_inv_half = linalg::inverse_sqrt(&s.hermitian_part(), DEFAULT_TOL)
        .expect("sum of Ginibre Gram matrices is positive definite");
    gs.iter().map(|g| g.matmul(&s_inv_half)).collect()
}

/// Uniform real entries in `[-1, 1)`.
pub fn real_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}
