//! Seeded random sampling: Haar unitaries, Hermitian matrices, states, drifts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, frob, CMat, RVec};
use crate::operators::{CouplingHamiltonian, LocalUnitary};
use crate::states::{BipartiteState, Kind, SchmidtPoint, Shape};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for task `k` of a run seeded with `seed`.
pub fn stream(seed: u64, k: u64) -> Rng64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(k + 1);
    r
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(d1: usize, d2: usize, rng: &mut R) -> CMat {
    CMat::from_fn(d1, d2, |_, _| c(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2)
}

/// Haar-distributed unitary: QR of a Gaussian matrix, with `R`'s diagonal made positive.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let qr = random_matrix(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= ph;
    }
    q
}

/// GUE-like Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = random_matrix(d, d, rng);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

pub fn random_local_unitary<R: Rng + ?Sized>(shape: &Shape, rng: &mut R) -> LocalUnitary {
    let v = haar_unitary(shape.d1, rng);
    let w = if shape.kind.is_indistinguishable() { v.clone() } else { haar_unitary(shape.d2, rng) };
    LocalUnitary::from_parts(shape.kind, v, w)
}

/// Uniformly random state in the symmetry class of `shape`.
pub fn random_state<R: Rng + ?Sized>(shape: &Shape, rng: &mut R) -> BipartiteState {
    loop {
        let m = random_matrix(shape.d1, shape.d2, rng);
        if let Ok(s) = BipartiteState::renormalized(shape.kind, m) {
            return s;
        }
    }
}

/// Uniform point on the Schmidt sphere (not sorted into the chamber).
pub fn random_point<R: Rng + ?Sized>(shape: &Shape, rng: &mut R) -> SchmidtPoint {
    loop {
        let v = RVec::from_fn(shape.reduced_dim(), |_, _| normal(rng));
        if let Ok(p) = SchmidtPoint::normalized(*shape, v) {
            return p;
        }
    }
}

/// Random drift with `r` Hermitian factor pairs (symmetrized for indistinguishable kinds).
pub fn random_coupling<R: Rng + ?Sized>(
    kind: Kind,
    d1: usize,
    d2: usize,
    r: usize,
    rng: &mut R,
) -> CouplingHamiltonian {
    let factors: Vec<(CMat, CMat)> = (0..r).map(|_| (random_hermitian(d1, rng), random_hermitian(d2, rng))).collect();
    match kind {
        Kind::Distinguishable => CouplingHamiltonian::new(kind, d1, d2, factors),
        _ => CouplingHamiltonian::symmetrized(kind, d1, factors),
    }
    .expect("random factors are Hermitian")
}

/// Random local drift `E⊗𝟙 + 𝟙⊗F` (indistinguishable: `E⊗𝟙 + 𝟙⊗E`).
pub fn random_local_coupling<R: Rng + ?Sized>(kind: Kind, d1: usize, d2: usize, rng: &mut R) -> CouplingHamiltonian {
    let e = random_hermitian(d1, rng);
    let f = random_hermitian(d2, rng);
    CouplingHamiltonian::local(kind, d1, d2, &[e], &[f]).expect("random factors are Hermitian")
}

/// Rescales a matrix to unit Frobenius norm.
pub fn unit(m: CMat) -> CMat {
    let n = frob(&m);
    m / c(n, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitary_defect;

    #[test]
    fn haar_is_unitary_and_seeded() {
        let a = haar_unitary(5, &mut rng(1));
        let b = haar_unitary(5, &mut rng(1));
        assert!(unitary_defect(&a) < 1e-13);
        assert_eq!(a, b);
        assert_ne!(a, haar_unitary(5, &mut rng(2)));
    }

    #[test]
    fn streams_differ() {
        let a: f64 = normal(&mut stream(7, 0));
        let b: f64 = normal(&mut stream(7, 1));
        assert_ne!(a, b);
        assert_eq!(a, normal(&mut stream(7, 0)));
    }

    #[test]
    fn haar_mean_trace_is_small() {
        // E|tr U|² = 1 for Haar U
        let mut r = rng(9);
        let m: f64 = (0..2000).map(|_| haar_unitary(3, &mut r).trace().norm_sqr()).sum::<f64>() / 2000.0;
        assert!((m - 1.0).abs() < 0.1, "{m}");
    }
}
