#![allow(dead_code)]

use lindloc::{ComplexMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn entry(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let data = (0..d * d).map(|_| entry(rng)).collect();
    ComplexMatrix::from_vec(d, d, data).unwrap()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    random_matrix(rng, d).hermitian_part()
}

/// Full-rank state `G G† / tr(G G†)`.
pub fn random_density(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let g = random_matrix(rng, d);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    m.scale_real(1.0 / tr)
}

pub fn random_pure(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let psi: Vec<C64> = (0..d).map(|_| entry(rng)).collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let psi: Vec<C64> = psi.iter().map(|z| z / norm).collect();
    ComplexMatrix::outer(&psi, &psi)
}

/// A random unitary from the eigenvectors of a random Hermitian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    lindloc::linalg::hermitian_eig(&random_hermitian(rng, d)).unwrap().eigenvectors
}
