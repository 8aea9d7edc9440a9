//! Complex SVD, Autonne–Takagi and Hua factorizations, and regularity of
//! Schmidt points.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{argsort_desc, c, clusters, complete_unitary, frob, is_finite, CMat, RMat, RVec, C64};
use crate::states::SchmidtPoint;

/// Relative gap below which singular values are treated as one cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Relative tolerance of the (skew-)symmetry precondition.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Default regularity threshold (absolute; points are unit vectors).
pub const REGULARITY_EPS: f64 = 1e-8;

/// `V ψ W* = diag(σ)` with `V`, `W` unitary and `σ` non-increasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub v: CMat,
    pub sigma: RVec,
    pub w: CMat,
}

impl Svd {
    /// `‖V ψ W* − diag(σ)‖_F`.
    pub fn residual(&self, psi: &CMat) -> f64 {
        let mut d = &self.v * psi * self.w.adjoint();
        for (i, s) in self.sigma.iter().enumerate() {
            d[(i, i)] -= c(*s, 0.0);
        }
        frob(&d)
    }
}

pub fn complex_svd(psi: &CMat) -> Result<Svd> {
    if !is_finite(psi) {
        return Err(Error::NonFinite);
    }
    let (d1, d2) = psi.shape();
    let svd = psi.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let s: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let order = argsort_desc(&s);
    let u_cols: Vec<DVector<C64>> = order.iter().map(|&k| u.column(k).into_owned()).collect();
    let w_cols: Vec<DVector<C64>> = order.iter().map(|&k| vt.row(k).adjoint()).collect();
    let u = complete_unitary(&CMat::from_columns(&u_cols));
    let wf = complete_unitary(&CMat::from_columns(&w_cols));
    debug_assert_eq!((u.nrows(), wf.nrows()), (d1, d2));
    Ok(Svd { v: u.adjoint(), sigma: RVec::from_iterator(order.len(), order.iter().map(|&k| s[k])), w: wf.adjoint() })
}

/// `V ψ Vᵀ = diag(σ)` for complex symmetric `ψ`.
#[derive(Clone, Debug)]
pub struct Takagi {
    pub v: CMat,
    pub sigma: RVec,
}

impl Takagi {
    pub fn residual(&self, psi: &CMat) -> f64 {
        let mut d = &self.v * psi * self.v.transpose();
        for (i, s) in self.sigma.iter().enumerate() {
            d[(i, i)] -= c(*s, 0.0);
        }
        frob(&d)
    }
}

fn check_square(psi: &CMat) -> Result<()> {
    if !psi.is_square() {
        return Err(Error::Dimension(format!("expected a square matrix, got {:?}", psi.shape())));
    }
    if !is_finite(psi) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Autonne–Takagi factorization via the SVD with cluster-wise phase fixing.
pub fn takagi(psi: &CMat) -> Result<Takagi> {
    check_square(psi)?;
    let norm = frob(psi);
    let defect = frob(&(psi - psi.transpose()));
    if defect > SYMMETRY_TOL * norm.max(1.0) {
        return Err(Error::Constraint { what: "symmetry ψ = ψᵀ", defect });
    }
    let d = psi.nrows();
    let svd = complex_svd(psi)?;
    let u = svd.v.adjoint();
    let s = svd.sigma.as_slice();
    let tol = CLUSTER_TOL * norm;
    let mut cols: Vec<DVector<C64>> = Vec::with_capacity(d);
    for r in clusters(s, tol) {
        let uc = u.columns(r.start, r.len()).into_owned();
        let mean = s[r.clone()].iter().sum::<f64>() / r.len() as f64;
        if mean <= tol {
            cols.extend(uc.column_iter().map(|c| c.into_owned()));
            continue;
        }
        // Q = U_c* ψ Ū_c / s is symmetric unitary; take its Takagi root Z
        let q = uc.adjoint() * psi * uc.map(|z| z.conj()) / c(mean, 0.0);
        let q = (&q + q.transpose()) * c(0.5, 0.0);
        let z = symmetric_unitary_root(&q);
        cols.extend((uc * z).column_iter().map(|c| c.into_owned()));
    }
    let t = CMat::from_columns(&cols);
    Ok(Takagi { v: t.adjoint(), sigma: svd.sigma })
}

/// For symmetric unitary `Q`, a unitary `Z` with `Q = Z Zᵀ`.
fn symmetric_unitary_root(q: &CMat) -> CMat {
    let k = q.nrows();
    if k == 1 {
        let ph = q[(0, 0)] / q[(0, 0)].norm();
        return CMat::from_element(1, 1, ph.sqrt());
    }
    // Q = A + iB with A, B real symmetric and commuting
    let a = RMat::from_fn(k, k, |i, j| q[(i, j)].re);
    let b = RMat::from_fn(k, k, |i, j| q[(i, j)].im);
    let ea = a.symmetric_eigen();
    let order = argsort_desc(ea.eigenvalues.as_slice());
    let vals: Vec<f64> = order.iter().map(|&i| ea.eigenvalues[i]).collect();
    let vecs = RMat::from_columns(&order.iter().map(|&i| ea.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    let mut o = RMat::zeros(k, k);
    for r in clusters(&vals, 1e-6) {
        let oc = vecs.columns(r.start, r.len()).into_owned();
        let bc = oc.transpose() * &b * &oc;
        let eb = ((&bc + bc.transpose()) * 0.5).symmetric_eigen();
        o.columns_mut(r.start, r.len()).copy_from(&(&oc * eb.eigenvectors));
    }
    let oc = o.map(|x| c(x, 0.0));
    let dq = oc.transpose() * q * &oc;
    let phases = DVector::from_iterator(
        k,
        (0..k).map(|i| {
            let z = dq[(i, i)];
            (z / z.norm()).sqrt()
        }),
    );
    oc * CMat::from_diagonal(&phases)
}

/// `V ψ Vᵀ = ⊕ ξᵢ J` (plus a trailing zero for odd `d`) for skew `ψ`.
#[derive(Clone, Debug)]
pub struct Hua {
    pub v: CMat,
    pub xi: RVec,
}

/// Real quasi-diagonal matrix `⊕ ξᵢ J` of size `d×d`, without normalization factors.
pub fn quasi_diagonal(xi: &[f64], d: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    for (i, &x) in xi.iter().enumerate() {
        m[(2 * i, 2 * i + 1)] = c(x, 0.0);
        m[(2 * i + 1, 2 * i)] = c(-x, 0.0);
    }
    m
}

impl Hua {
    pub fn residual(&self, psi: &CMat) -> f64 {
        let d = psi.nrows();
        frob(&(&self.v * psi * self.v.transpose() - quasi_diagonal(self.xi.as_slice(), d)))
    }
}

/// Hua factorization: pairs `v`, `−ψv̄/‖ψv̄‖` inside each singular subspace.
pub fn hua(psi: &CMat) -> Result<Hua> {
    check_square(psi)?;
    let norm = frob(psi);
    let defect = frob(&(psi + psi.transpose()));
    if defect > SYMMETRY_TOL * norm.max(1.0) {
        return Err(Error::Constraint { what: "antisymmetry ψ = −ψᵀ", defect });
    }
    let d = psi.nrows();
    let svd = complex_svd(psi)?;
    let u = svd.v.adjoint();
    let s = svd.sigma.as_slice();
    let tol = CLUSTER_TOL * norm;
    let mut chosen: Vec<DVector<C64>> = Vec::with_capacity(d);
    let mut xi = Vec::with_capacity(d / 2);
    let mut kernel: Vec<DVector<C64>> = Vec::new();
    for r in clusters(s, tol) {
        let mean = s[r.clone()].iter().sum::<f64>() / r.len() as f64;
        if mean <= tol {
            kernel.extend(r.map(|k| u.column(k).into_owned()));
            continue;
        }
        let start = chosen.len();
        for k in r.clone() {
            if chosen.len() - start >= r.len() - 1 {
                break;
            }
            let Some(v) = orthonormalize(u.column(k).into_owned(), &chosen) else { continue };
            let pv = psi * v.map(|z| z.conj());
            let sv = pv.norm();
            let Some(w) = orthonormalize(-pv / c(sv, 0.0), &chosen) else { continue };
            chosen.push(v);
            chosen.push(w);
            xi.push(sv);
        }
    }
    for k in kernel {
        if let Some(v) = orthonormalize(k, &chosen) {
            chosen.push(v);
        }
    }
    let t = complete_unitary(&CMat::from_columns(&chosen));
    // quasi-diagonal block values, read back from the transformed matrix
    let m = t.adjoint() * psi * t.map(|z| z.conj());
    let mut blocks: Vec<f64> = (0..d / 2).map(|i| 0.5 * (m[(2 * i, 2 * i + 1)] - m[(2 * i + 1, 2 * i)]).re).collect();
    // pairs taken from the kernel are zero blocks
    for b in blocks.iter_mut().skip(xi.len()) {
        *b = 0.0;
    }
    Ok(Hua { v: t.adjoint(), xi: RVec::from_vec(blocks) })
}

/// Gram–Schmidt against `basis`; `None` when `v` is (numerically) in their span.
fn orthonormalize(mut v: DVector<C64>, basis: &[DVector<C64>]) -> Option<DVector<C64>> {
    let n0 = v.norm();
    for _ in 0..2 {
        for b in basis {
            let p = b.dotc(&v);
            v -= b * p;
        }
    }
    let n = v.norm();
    (n > 1e-3 * n0).then(|| v / c(n, 0.0))
}

/// Regularity of a Schmidt point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Regularity {
    Regular,
    /// Index pairs `(i, j)` with `||σᵢ| − |σⱼ|| ≤ eps`.
    Degenerate(Vec<(usize, usize)>),
    /// Indices with `|σᵢ| ≤ eps`.
    Singular(Vec<usize>),
}

impl Regularity {
    pub fn is_regular(&self) -> bool {
        matches!(self, Regularity::Regular)
    }
}

/// Classifies `p` by its absolute values, so the answer is Weyl invariant.
/// Zero values take precedence over collisions.
pub fn regularity(p: &SchmidtPoint, eps: f64) -> Regularity {
    regularity_of(p.values().as_slice(), eps)
}

pub fn regularity_of(values: &[f64], eps: f64) -> Regularity {
    let a: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    let zeros: Vec<usize> = (0..a.len()).filter(|&i| a[i] <= eps).collect();
    if !zeros.is_empty() {
        return Regularity::Singular(zeros);
    }
    let mut pairs = Vec::new();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if (a[i] - a[j]).abs() <= eps {
                pairs.push((i, j));
            }
        }
    }
    if pairs.is_empty() {
        Regularity::Regular
    } else {
        Regularity::Degenerate(pairs)
    }
}

/// Smallest of `|σᵢ|` and `||σᵢ| − |σⱼ||`: the distance to the non-regular set.
pub fn regularity_margin(values: &[f64]) -> f64 {
    let a: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    let mut m = a.iter().cloned().fold(f64::INFINITY, f64::min);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            m = m.min((a[i] - a[j]).abs());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{unitary_defect, I};
    use crate::sampling;
    use crate::states::Shape;
    use approx::assert_abs_diff_eq;

    fn sym(m: &CMat) -> CMat {
        (m + m.transpose()) * c(0.5, 0.0)
    }

    fn skew(m: &CMat) -> CMat {
        (m - m.transpose()) * c(0.5, 0.0)
    }

    /// Independent singular values: square roots of the eigenvalues of ψ*ψ.
    fn oracle_sv(m: &CMat) -> Vec<f64> {
        let mut s: Vec<f64> =
            (m.adjoint() * m).symmetric_eigen().eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    #[test]
    fn svd_examples() {
        let psi = CMat::from_diagonal(&DVector::from_vec(vec![c(3.0, 0.0), c(1.0, 0.0)]));
        let f = complex_svd(&psi).unwrap();
        assert_eq!(f.sigma.as_slice(), &[3.0, 1.0]);
        let p = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let f = complex_svd(&p).unwrap();
        assert_abs_diff_eq!(f.sigma[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.sigma[1], 1.0, epsilon = 1e-15);
        let mut bad = p.clone();
        bad[(0, 0)] = c(f64::NAN, 0.0);
        assert!(matches!(complex_svd(&bad), Err(Error::NonFinite)));
    }

    #[test]
    fn svd_reconstructs_rectangular() {
        let mut r = sampling::rng(1);
        for (d1, d2) in [(3, 5), (5, 3), (4, 4)] {
            let psi = sampling::random_matrix(d1, d2, &mut r);
            let f = complex_svd(&psi).unwrap();
            let mut diag = CMat::zeros(d1, d2);
            for (i, s) in f.sigma.iter().enumerate() {
                diag[(i, i)] = c(*s, 0.0);
            }
            assert!(frob(&(f.v.adjoint() * diag * &f.w - &psi)) <= 1e-10 * frob(&psi));
            assert!(unitary_defect(&f.v) < 1e-12 && unitary_defect(&f.w) < 1e-12);
            assert!(f.sigma.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn takagi_examples() {
        let psi = CMat::from_diagonal(&DVector::from_vec(vec![c(2.0, 0.0), c(1.0, 0.0)]));
        let t = takagi(&psi).unwrap();
        assert_eq!(t.sigma.as_slice(), &[2.0, 1.0]);
        assert!(t.residual(&psi) < 1e-14);
        let th = 0.7;
        let psi = CMat::from_element(1, 1, (I * th).exp());
        let t = takagi(&psi).unwrap();
        assert!(t.residual(&psi) < 1e-14);
        assert_abs_diff_eq!((t.v[(0, 0)] * t.v[(0, 0)] * (I * th).exp()).im, 0.0, epsilon = 1e-15);
        assert!(matches!(takagi(&sampling::random_matrix(3, 3, &mut sampling::rng(0))), Err(Error::Constraint { .. })));
    }

    #[test]
    fn takagi_random_and_degenerate() {
        let mut r = sampling::rng(2);
        for d in 2..=6 {
            let psi = sym(&sampling::random_matrix(d, d, &mut r));
            let t = takagi(&psi).unwrap();
            assert!(t.residual(&psi) <= 1e-8 * frob(&psi));
            for (a, b) in t.sigma.iter().zip(oracle_sv(&psi)) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-8);
            }
            assert_abs_diff_eq!(t.v.determinant().norm(), 1.0, epsilon = 1e-10);
        }
        // exact degeneracy: ψ = U Uᵀ has all singular values 1; plus a kernel
        for d in 2..=5 {
            let u = sampling::haar_unitary(d, &mut r);
            let mut dg = DVector::from_element(d, c(1.0, 0.0));
            dg[d - 1] = c(0.0, 0.0);
            let psi = &u * CMat::from_diagonal(&dg) * u.transpose();
            let t = takagi(&psi).unwrap();
            assert!(t.residual(&psi) <= 1e-8 * frob(&psi), "d={d} res {}", t.residual(&psi));
        }
    }

    #[test]
    fn hua_examples() {
        let j = quasi_diagonal(&[1.0], 2);
        let cc = c(0.3, -1.1);
        let psi = &j * cc;
        let h = hua(&psi).unwrap();
        assert_abs_diff_eq!(h.xi[0], cc.norm(), epsilon = 1e-14);
        assert!(h.residual(&psi) < 1e-13);
        // d = 3 with singular values (s, s, 0)
        let mut r = sampling::rng(4);
        let u = sampling::haar_unitary(3, &mut r);
        let psi = &u * quasi_diagonal(&[0.5], 3) * u.transpose();
        let h = hua(&psi).unwrap();
        assert_eq!(h.xi.len(), 1);
        assert_abs_diff_eq!(h.xi[0], 0.5, epsilon = 1e-14);
        assert!(h.residual(&psi) < 1e-13);
        assert!(hua(&sym(&sampling::random_matrix(2, 2, &mut r))).is_err());
    }

    #[test]
    fn hua_random_and_degenerate() {
        let mut r = sampling::rng(3);
        for d in 2..=8 {
            let psi = skew(&sampling::random_matrix(d, d, &mut r));
            let h = hua(&psi).unwrap();
            assert!(h.residual(&psi) <= 1e-8 * frob(&psi), "d={d}: {}", h.residual(&psi));
            let sv = oracle_sv(&psi);
            for (i, x) in h.xi.iter().enumerate() {
                assert_abs_diff_eq!(*x, sv[2 * i], epsilon = 1e-8);
                assert_abs_diff_eq!(*x, sv[2 * i + 1], epsilon = 1e-8);
            }
            assert!(h.xi.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
        // idempotence on already quasi-diagonal input, equal blocks included
        for xi in [vec![0.8, 0.6], vec![0.5, 0.5], vec![0.6, 0.8]] {
            let psi = quasi_diagonal(&xi, 5);
            let h = hua(&psi).unwrap();
            let mut sorted = xi.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert!((h.xi.clone() - RVec::from_vec(sorted)).amax() < 1e-14);
            assert!(h.residual(&psi) < 1e-13);
        }
    }

    #[test]
    fn regularity_examples() {
        let s2 = Shape::distinguishable(2, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let p = SchmidtPoint::from_slice(s2, &[h, h]).unwrap();
        assert_eq!(regularity(&p, 1e-8), Regularity::Degenerate(vec![(0, 1)]));
        let p = SchmidtPoint::from_slice(s2, &[1.0, 0.0]).unwrap();
        assert_eq!(regularity(&p, 1e-8), Regularity::Singular(vec![1]));
        let p = SchmidtPoint::from_slice(s2, &[0.8, 0.6]).unwrap();
        assert!(regularity(&p, 1e-8).is_regular());
        let p = SchmidtPoint::from_slice(s2, &[0.6, 0.8]).unwrap();
        assert!(regularity(&p, 1e-8).is_regular());
        let p = SchmidtPoint::from_slice(s2, &[-h, h]).unwrap();
        assert!(!regularity(&p, 1e-8).is_regular());
        assert_abs_diff_eq!(regularity_margin(&[0.8, 0.6]), 0.2, epsilon = 1e-15);
    }
}
