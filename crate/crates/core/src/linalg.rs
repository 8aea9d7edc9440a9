//! Dense complex/real matrix helpers shared by the rest of the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frob_r(m: &RMat) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `‖M − M*‖_F`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    frob(&(m - m.adjoint()))
}

/// `‖M*M − 1‖_F`.
pub fn unitary_defect(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    frob(&(m.adjoint() * m - identity(m.nrows())))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn commutator_r(a: &RMat, b: &RMat) -> RMat {
    a * b - b * a
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Real `‖M + Mᵀ‖_∞` (largest absolute entry).
pub fn skew_defect(m: &RMat) -> f64 {
    (m + m.transpose()).amax()
}

/// Largest singular value.
pub fn spectral_norm(m: &RMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Matrix exponential (scaling and squaring with a Padé approximant).
pub fn expm(m: &CMat) -> CMat {
    m.clone().exp()
}

pub fn expm_r(m: &RMat) -> RMat {
    m.clone().exp()
}

/// `exp(−i·t·H)` for Hermitian `H`, via the eigendecomposition.
pub fn hermitian_propagator(h: &CMat, t: f64) -> CMat {
    let eig = h.clone().symmetric_eigen();
    let phases =
        CMat::from_diagonal(&DVector::from_iterator(h.nrows(), eig.eigenvalues.iter().map(|&l| (-I * l * t).exp())));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Swap operator on `ℂᵈ ⊗ ℂᵈ` in the Kronecker basis `|ij⟩ ↦ i·d + j`.
pub fn swap_operator(d: usize) -> CMat {
    let mut s = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(j * d + i, i * d + j)] = c(1.0, 0.0);
        }
    }
    s
}

/// `|ψ⟩ = vec(ψᵀ)`: row-major flattening of the coefficient matrix.
pub fn vectorize(psi: &CMat) -> DVector<C64> {
    let (r, cols) = psi.shape();
    DVector::from_iterator(r * cols, (0..r).flat_map(|i| (0..cols).map(move |j| psi[(i, j)])))
}

pub fn unvectorize(v: &DVector<C64>, d1: usize, d2: usize) -> CMat {
    CMat::from_fn(d1, d2, |i, j| v[i * d2 + j])
}

/// Real inner product `Re tr(A* B)`.
pub fn re_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Complex inner product `tr(A* B)`.
pub fn inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Orthonormal basis of the Hermitian `d×d` matrices in the Frobenius inner product.
pub fn hermitian_basis(d: usize) -> Vec<CMat> {
    let mut basis = Vec::with_capacity(d * d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        let mut m = CMat::zeros(d, d);
        m[(i, i)] = c(1.0, 0.0);
        basis.push(m);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut m = CMat::zeros(d, d);
            m[(i, j)] = c(s, 0.0);
            m[(j, i)] = c(s, 0.0);
            basis.push(m);
            let mut m = CMat::zeros(d, d);
            m[(i, j)] = c(0.0, -s);
            m[(j, i)] = c(0.0, s);
            basis.push(m);
        }
    }
    basis
}

/// Extends the orthonormal columns of `q` to a full unitary.
pub fn complete_unitary(q: &CMat) -> CMat {
    let d = q.nrows();
    let mut cols: Vec<DVector<C64>> = q.column_iter().map(|c| c.into_owned()).collect();
    let mut k = 0;
    while cols.len() < d && k < d {
        let mut v = DVector::<C64>::zeros(d);
        v[k] = c(1.0, 0.0);
        k += 1;
        // two passes of Gram–Schmidt
        for _ in 0..2 {
            for u in &cols {
                let p = u.dotc(&v);
                v -= u * p;
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            cols.push(v / c(n, 0.0));
        }
    }
    CMat::from_columns(&cols)
}

/// Groups consecutive entries of a non-increasing sequence whose gap is at most `tol`.
pub(crate) fn clusters(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || (values[k - 1] - values[k]).abs() > tol {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// Indices sorting `values` in non-increasing order; ties keep their original order.
pub(crate) fn argsort_desc(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(std::cmp::Ordering::Equal));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectorize_matches_kronecker_convention() {
        // (V ⊗ W)|ψ⟩ = |V ψ Wᵀ⟩
        let v = CMat::from_row_slice(2, 2, &[c(0.0, 1.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, -1.0)]);
        let w = CMat::from_row_slice(3, 3, &(0..9).map(|k| c(k as f64, 0.5 * k as f64)).collect::<Vec<_>>());
        let psi = CMat::from_fn(2, 3, |i, j| c(i as f64 - j as f64, (i * j) as f64));
        let lhs = kron(&v, &w) * vectorize(&psi);
        let rhs = vectorize(&(&v * &psi * w.transpose()));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let b = hermitian_basis(3);
        assert_eq!(b.len(), 9);
        for (i, x) in b.iter().enumerate() {
            assert!(hermitian_defect(x) < 1e-15);
            for (j, y) in b.iter().enumerate() {
                let g = re_inner(x, y);
                assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn propagator_is_unitary() {
        let h = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, -0.2), c(0.3, 0.2), c(-0.5, 0.0)]);
        let u = hermitian_propagator(&h, 0.7);
        assert!(unitary_defect(&u) < 1e-13);
        assert!((u - expm(&(h * c(0.0, -0.7)))).norm() < 1e-12);
    }

    #[test]
    fn clusters_split_on_gaps() {
        let r = clusters(&[3.0, 3.0, 2.0, 1.0, 1.0 - 1e-12], 1e-9);
        assert_eq!(r, vec![0..2, 2..3, 3..5]);
    }
}
