#![allow(dead_code)]

use rand::Rng;
use schmidt_sphere::factor::regularity_margin;
use schmidt_sphere::lift::{ad_apply, project_perp};
use schmidt_sphere::linalg::hermitian_basis;
pub use schmidt_sphere::linalg::{CMat, RMat, RVec};
use schmidt_sphere::sampling;
use schmidt_sphere::states::project_symmetry;
use schmidt_sphere::{Kind, LocalHamiltonian, SchmidtPoint, Shape};

pub const KINDS: [Kind; 3] = [Kind::Distinguishable, Kind::Bosonic, Kind::Fermionic];

pub fn shape(kind: Kind, d1: usize, d2: usize) -> Shape {
    Shape::new(kind, d1, d2).unwrap()
}

/// A few representative shapes per kind with reduced dimension `2..=n_max`.
pub fn shapes_up_to(kind: Kind, n_max: usize) -> Vec<Shape> {
    match kind {
        Kind::Distinguishable => {
            let mut out = Vec::new();
            for d1 in 2..=n_max {
                out.push(shape(kind, d1, d1));
                out.push(shape(kind, d1, d1 + 1));
                out.push(shape(kind, d1 + 1, d1));
            }
            out
        }
        Kind::Bosonic => (2..=n_max).map(|d| shape(kind, d, d)).collect(),
        Kind::Fermionic => (4..=2 * n_max + 1).map(|d| shape(kind, d, d)).collect(),
    }
}

/// Random point whose regularity margin exceeds `gap`.
pub fn regular_point<R: Rng + ?Sized>(shape: &Shape, gap: f64, rng: &mut R) -> SchmidtPoint {
    loop {
        let p = sampling::random_point(shape, rng);
        if regularity_margin(p.values().as_slice()) > gap {
            return p;
        }
    }
}

/// Random element of the constraint space: symmetry class, orthogonal to the diagonal pattern.
pub fn random_perp<R: Rng + ?Sized>(shape: &Shape, rng: &mut R) -> CMat {
    let m = project_symmetry(shape.kind, &sampling::random_matrix(shape.d1, shape.d2, rng));
    project_perp(shape, &m)
}

/// Minimal-norm least-squares solution of `ad_σ(h) = A`, assembled densely
/// over an orthonormal Hermitian basis and solved through the spectral
/// pseudoinverse of the normal equations.
pub fn lstsq_oracle(p: &SchmidtPoint, a: &CMat) -> LocalHamiltonian {
    let shape = p.shape();
    let kind = shape.kind;
    let mut gens: Vec<LocalHamiltonian> = Vec::new();
    if kind.is_indistinguishable() {
        for g in hermitian_basis(shape.d1) {
            gens.push(LocalHamiltonian::new(kind, g.clone(), g).unwrap());
        }
    } else {
        for g in hermitian_basis(shape.d1) {
            gens.push(LocalHamiltonian::new(kind, g, CMat::zeros(shape.d2, shape.d2)).unwrap());
        }
        for g in hermitian_basis(shape.d2) {
            gens.push(LocalHamiltonian::new(kind, CMat::zeros(shape.d1, shape.d1), g).unwrap());
        }
    }
    let flat = |m: &CMat| -> Vec<f64> { m.iter().flat_map(|z| [z.re, z.im]).collect() };
    let cols: Vec<RVec> = gens.iter().map(|g| RVec::from_vec(flat(&ad_apply(p, g).unwrap()))).collect();
    let mat = RMat::from_columns(&cols);
    let rhs = RVec::from_vec(flat(a));
    let eig = (mat.transpose() * &mat).symmetric_eigen();
    let proj = mat.transpose() * rhs;
    let mut coef = RVec::zeros(gens.len());
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > 1e-12 {
            let v = eig.eigenvectors.column(k);
            coef += v * (v.dot(&proj) / l);
        }
    }
    gens.iter().zip(coef.iter()).fold(LocalHamiltonian::zero(shape), |acc, (g, &w)| acc.add(&g.scale(w)))
}

/// Singular values of `ψ` as the non-negative eigenvalues of the Hermitian
/// dilation `[[0, ψ], [ψ*, 0]]`, sorted non-increasingly.
pub fn dilation_singular_values(psi: &CMat) -> Vec<f64> {
    let (m, n) = psi.shape();
    let mut big = CMat::zeros(m + n, m + n);
    big.view_mut((0, m), (m, n)).copy_from(psi);
    big.view_mut((m, 0), (n, m)).copy_from(&psi.adjoint());
    let mut ev: Vec<f64> = big.symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev.truncate(m.min(n));
    ev.into_iter().map(|x| x.max(0.0)).collect()
}

/// Generator `Im Σ_k (V*E_kV) ∘ (W*F_kW)` on the leading `n×n` block,
/// evaluated entrywise.
pub fn hadamard_field_dist(factors: &[(CMat, CMat)], v: &CMat, w: &CMat, n: usize) -> RMat {
    let mut m = RMat::zeros(n, n);
    for (e, f) in factors {
        let ev = v.adjoint() * e * v;
        let fw = w.adjoint() * f * w;
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += (ev[(i, j)] * fw[(i, j)]).im;
            }
        }
    }
    m
}
