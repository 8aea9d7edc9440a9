//! Coupling Hamiltonians `H₀ = Σ E_k ⊗ F_k`, local Hamiltonians `E⊗𝟙 + 𝟙⊗F`
//! and local unitaries `V ⊗ W`.

use crate::error::{Error, Result};
use crate::linalg::{
    c, frob, hermitian_defect, hermitian_propagator, identity, kron, swap_operator, unitary_defect, CMat,
};
use crate::states::{BipartiteState, Kind, Shape};

/// Hermiticity tolerance for factor matrices, relative to their norm.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Unitarity tolerance for local unitaries.
pub const UNITARY_TOL: f64 = 1e-10;

fn check_hermitian(m: &CMat) -> Result<()> {
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL * frob(m).max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

fn check_unitary(m: &CMat) -> Result<()> {
    let defect = unitary_defect(m);
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(())
}

/// Drift Hamiltonian as a list of Hermitian factor pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingHamiltonian {
    shape: Shape,
    factors: Vec<(CMat, CMat)>,
}

impl CouplingHamiltonian {
    /// Validates the factors. For bosonic and fermionic kinds the assembled
    /// operator must commute with the swap; use [`symmetrized`](Self::symmetrized)
    /// to build a swap-symmetric drift from arbitrary factors.
    pub fn new(kind: Kind, d1: usize, d2: usize, factors: Vec<(CMat, CMat)>) -> Result<Self> {
        let shape = Shape::new(kind, d1, d2)?;
        for (k, (e, f)) in factors.iter().enumerate() {
            if e.shape() != (d1, d1) || f.shape() != (d2, d2) {
                return Err(Error::Dimension(format!(
                    "factor {k}: expected {d1}×{d1} and {d2}×{d2}, got {:?} and {:?}",
                    e.shape(),
                    f.shape()
                )));
            }
            if !crate::linalg::is_finite(e) || !crate::linalg::is_finite(f) {
                return Err(Error::NonFinite);
            }
            check_hermitian(e)?;
            check_hermitian(f)?;
        }
        let h = CouplingHamiltonian { shape, factors };
        if kind.is_indistinguishable() {
            let defect = h.swap_defect();
            if defect > 1e-10 * h.frobenius_norm().max(1.0) {
                return Err(Error::Constraint { what: "swap symmetry of H₀", defect });
            }
        }
        Ok(h)
    }

    /// `Σ (E_k⊗F_k + F_k⊗E_k)/2`, stored as the pairs `(E_k/2, F_k), (F_k/2, E_k)`.
    pub fn symmetrized(kind: Kind, d: usize, factors: Vec<(CMat, CMat)>) -> Result<Self> {
        let half = c(0.5, 0.0);
        let sym = match kind {
            Kind::Distinguishable => factors,
            _ => factors.into_iter().flat_map(|(e, f)| [(&e * half, f.clone()), (&f * half, e)]).collect(),
        };
        CouplingHamiltonian::new(kind, d, d, sym)
    }

    /// Local drift `Σ E_k⊗𝟙 + Σ 𝟙⊗F_k`. For indistinguishable kinds each `E`
    /// contributes `E⊗𝟙 + 𝟙⊗E` and `fs` is ignored.
    pub fn local(kind: Kind, d1: usize, d2: usize, es: &[CMat], fs: &[CMat]) -> Result<Self> {
        let mut factors = Vec::new();
        for e in es {
            factors.push((e.clone(), identity(d2)));
            if kind.is_indistinguishable() {
                factors.push((identity(d1), e.clone()));
            }
        }
        if !kind.is_indistinguishable() {
            for f in fs {
                factors.push((identity(d1), f.clone()));
            }
        }
        CouplingHamiltonian::new(kind, d1, d2, factors)
    }

    pub fn zero(shape: Shape) -> Self {
        CouplingHamiltonian { shape, factors: Vec::new() }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn kind(&self) -> Kind {
        self.shape.kind
    }

    pub fn factors(&self) -> &[(CMat, CMat)] {
        &self.factors
    }

    /// Number of factor pairs `r`.
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// Dense `d1d2 × d1d2` operator in the Kronecker basis.
    pub fn assemble(&self) -> CMat {
        let n = self.shape.d1 * self.shape.d2;
        self.factors.iter().fold(CMat::zeros(n, n), |acc, (e, f)| acc + kron(e, f))
    }

    /// `H₀|ψ⟩` in matrix form: `Σ E_k ψ F_kᵀ`.
    pub fn apply(&self, psi: &CMat) -> CMat {
        let mut out = CMat::zeros(psi.nrows(), psi.ncols());
        for (e, f) in &self.factors {
            out += e * psi * f.transpose();
        }
        out
    }

    /// Factors of `U* H₀ U` for `U = V ⊗ W`.
    pub fn conjugated(&self, v: &CMat, w: &CMat) -> Vec<(CMat, CMat)> {
        self.factors.iter().map(|(e, f)| (v.adjoint() * e * v, w.adjoint() * f * w)).collect()
    }

    /// `‖H₀‖_F = √(Σ_{k,l} tr(E_kE_l)·tr(F_kF_l))`, computed from the Gram matrices.
    pub fn frobenius_norm(&self) -> f64 {
        let r = self.factors.len();
        let mut s = 0.0;
        for k in 0..r {
            for l in 0..r {
                let ge = (&self.factors[k].0 * &self.factors[l].0).trace();
                let gf = (&self.factors[k].1 * &self.factors[l].1).trace();
                s += (ge * gf).re;
            }
        }
        s.max(0.0).sqrt()
    }

    /// `√(Σ_k ‖E_k‖²‖F_k‖²)` for the stored factor list.
    pub fn factorwise_norm(&self) -> f64 {
        self.factors.iter().map(|(e, f)| (frob(e) * frob(f)).powi(2)).sum::<f64>().sqrt()
    }

    /// `‖S H₀ S − H₀‖_F` for the swap `S`.
    pub fn swap_defect(&self) -> f64 {
        if self.shape.d1 != self.shape.d2 {
            return f64::INFINITY;
        }
        let h = self.assemble();
        let s = swap_operator(self.shape.d1);
        frob(&(&s * &h * &s - h))
    }

    /// Distance of `H₀` from the local operators `E⊗𝟙 + 𝟙⊗F`.
    pub fn nonlocality(&self) -> f64 {
        // remove the components along 𝟙⊗𝟙, E⊗𝟙 and 𝟙⊗F: what remains is
        // Σ (E_k − tr E_k/d1)⊗(F_k − tr F_k/d2)
        let (d1, d2) = (self.shape.d1 as f64, self.shape.d2 as f64);
        let n = self.shape.d1 * self.shape.d2;
        let mut m = CMat::zeros(n, n);
        for (e, f) in &self.factors {
            let e0 = e - identity(self.shape.d1) * (e.trace() / d1);
            let f0 = f - identity(self.shape.d2) * (f.trace() / d2);
            m += kron(&e0, &f0);
        }
        frob(&m)
    }
}

/// Element of `i·u_loc`: `E⊗𝟙 + 𝟙⊗F` (indistinguishable: `F = E`).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalHamiltonian {
    kind: Kind,
    e: CMat,
    f: CMat,
}

impl LocalHamiltonian {
    pub fn new(kind: Kind, e: CMat, f: CMat) -> Result<Self> {
        if !e.is_square() || !f.is_square() {
            return Err(Error::Dimension("local Hamiltonian factors must be square".into()));
        }
        if kind.is_indistinguishable() && e != f {
            return Err(Error::Constraint { what: "symmetric local Hamiltonian E = F", defect: frob(&(&e - &f)) });
        }
        check_hermitian(&e)?;
        check_hermitian(&f)?;
        Ok(LocalHamiltonian { kind, e, f })
    }

    pub fn distinguishable(e: CMat, f: CMat) -> Result<Self> {
        LocalHamiltonian::new(Kind::Distinguishable, e, f)
    }

    /// `E⊗𝟙 + 𝟙⊗E` for bosonic or fermionic systems.
    pub fn symmetric(kind: Kind, e: CMat) -> Result<Self> {
        LocalHamiltonian::new(kind, e.clone(), e)
    }

    pub(crate) fn from_parts(kind: Kind, e: CMat, f: CMat) -> Self {
        LocalHamiltonian { kind, e, f }
    }

    pub fn zero(shape: Shape) -> Self {
        LocalHamiltonian { kind: shape.kind, e: CMat::zeros(shape.d1, shape.d1), f: CMat::zeros(shape.d2, shape.d2) }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn e(&self) -> &CMat {
        &self.e
    }

    pub fn f(&self) -> &CMat {
        &self.f
    }

    /// `(E⊗𝟙 + 𝟙⊗F)|ψ⟩` in matrix form: `Eψ + ψFᵀ`.
    pub fn apply(&self, psi: &CMat) -> CMat {
        &self.e * psi + psi * self.f.transpose()
    }

    pub fn assemble(&self) -> CMat {
        kron(&self.e, &identity(self.f.nrows())) + kron(&identity(self.e.nrows()), &self.f)
    }

    pub fn add(&self, other: &LocalHamiltonian) -> LocalHamiltonian {
        LocalHamiltonian { kind: self.kind, e: &self.e + &other.e, f: &self.f + &other.f }
    }

    pub fn scale(&self, s: f64) -> LocalHamiltonian {
        LocalHamiltonian { kind: self.kind, e: &self.e * c(s, 0.0), f: &self.f * c(s, 0.0) }
    }

    /// `U H U*` for a local unitary `U`.
    pub fn conjugate(&self, u: &LocalUnitary) -> LocalHamiltonian {
        LocalHamiltonian { kind: self.kind, e: &u.v * &self.e * u.v.adjoint(), f: &u.w * &self.f * u.w.adjoint() }
    }

    /// Drops the component along `𝟙⊗𝟙`. The dynamics change only by a global phase.
    pub fn trace_free(&self) -> LocalHamiltonian {
        let (d1, d2) = (self.e.nrows(), self.f.nrows());
        let e = &self.e - identity(d1) * (self.e.trace() / d1 as f64);
        let f = &self.f - identity(d2) * (self.f.trace() / d2 as f64);
        LocalHamiltonian { kind: self.kind, e, f }
    }

    /// `exp(−itH) = exp(−itE) ⊗ exp(−itF)`.
    pub fn propagator(&self, t: f64) -> LocalUnitary {
        let v = hermitian_propagator(&self.e, t);
        let w = if self.kind.is_indistinguishable() { v.clone() } else { hermitian_propagator(&self.f, t) };
        LocalUnitary { kind: self.kind, v, w }
    }

    /// Frobenius norm of the assembled operator.
    pub fn norm(&self) -> f64 {
        frob(&self.assemble())
    }
}

/// Local unitary `V ⊗ W` (indistinguishable: `W = V`).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalUnitary {
    kind: Kind,
    v: CMat,
    w: CMat,
}

impl LocalUnitary {
    pub fn new(kind: Kind, v: CMat, w: CMat) -> Result<Self> {
        if kind.is_indistinguishable() && v.shape() != w.shape() {
            return Err(Error::Dimension("symmetric local unitary needs V and W of equal size".into()));
        }
        check_unitary(&v)?;
        check_unitary(&w)?;
        if kind.is_indistinguishable() && frob(&(&v - &w)) > UNITARY_TOL {
            return Err(Error::Constraint { what: "symmetric local unitary V = W", defect: frob(&(&v - &w)) });
        }
        Ok(LocalUnitary { kind, v, w })
    }

    pub fn distinguishable(v: CMat, w: CMat) -> Result<Self> {
        LocalUnitary::new(Kind::Distinguishable, v, w)
    }

    pub fn symmetric(kind: Kind, v: CMat) -> Result<Self> {
        LocalUnitary::new(kind, v.clone(), v)
    }

    pub(crate) fn from_parts(kind: Kind, v: CMat, w: CMat) -> Self {
        LocalUnitary { kind, v, w }
    }

    pub fn identity(shape: Shape) -> Self {
        LocalUnitary { kind: shape.kind, v: identity(shape.d1), w: identity(shape.d2) }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn v(&self) -> &CMat {
        &self.v
    }

    pub fn w(&self) -> &CMat {
        &self.w
    }

    /// `(V⊗W)|ψ⟩` in matrix form: `V ψ Wᵀ`.
    pub fn apply(&self, psi: &CMat) -> CMat {
        &self.v * psi * self.w.transpose()
    }

    pub fn apply_state(&self, state: &BipartiteState) -> BipartiteState {
        BipartiteState::from_parts(state.shape(), self.apply(state.matrix()))
    }

    /// `self · other`.
    pub fn compose(&self, other: &LocalUnitary) -> LocalUnitary {
        LocalUnitary { kind: self.kind, v: &self.v * &other.v, w: &self.w * &other.w }
    }

    pub fn adjoint(&self) -> LocalUnitary {
        LocalUnitary { kind: self.kind, v: self.v.adjoint(), w: self.w.adjoint() }
    }

    pub fn assemble(&self) -> CMat {
        kron(&self.v, &self.w)
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitary_defect(&self.v).max(unitary_defect(&self.w))
    }
}

/// Single-qubit Pauli matrices `X`, `Y`, `Z`.
pub mod pauli {
    use crate::linalg::{c, CMat};

    pub fn x() -> CMat {
        CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    pub fn y() -> CMat {
        CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
    }

    pub fn z() -> CMat {
        CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::pauli::{x, y, z};
    use super::*;
    use crate::sampling;
    use approx::assert_abs_diff_eq;

    #[test]
    fn apply_matches_assembled_operator() {
        let mut r = sampling::rng(3);
        let h = sampling::random_coupling(Kind::Distinguishable, 2, 3, 3, &mut r);
        let psi = sampling::random_matrix(2, 3, &mut r);
        let lhs = h.assemble() * crate::linalg::vectorize(&psi);
        let rhs = crate::linalg::vectorize(&h.apply(&psi));
        assert!((lhs - rhs).norm() < 1e-12);
        let loc = LocalHamiltonian::distinguishable(
            sampling::random_hermitian(2, &mut r),
            sampling::random_hermitian(3, &mut r),
        )
        .unwrap();
        let lhs = loc.assemble() * crate::linalg::vectorize(&psi);
        assert!((lhs - crate::linalg::vectorize(&loc.apply(&psi))).norm() < 1e-12);
    }

    #[test]
    fn rejects_invalid_factors() {
        let bad = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            CouplingHamiltonian::new(Kind::Distinguishable, 2, 2, vec![(bad, x())]),
            Err(Error::NotHermitian(_))
        ));
        assert!(matches!(
            CouplingHamiltonian::new(Kind::Bosonic, 2, 2, vec![(x(), y())]),
            Err(Error::Constraint { .. })
        ));
        assert!(CouplingHamiltonian::symmetrized(Kind::Bosonic, 2, vec![(x(), y())]).is_ok());
        assert!(CouplingHamiltonian::new(Kind::Fermionic, 2, 2, vec![(x(), x())]).is_ok());
    }

    #[test]
    fn norms() {
        let h = CouplingHamiltonian::new(Kind::Distinguishable, 2, 2, vec![(x(), y())]).unwrap();
        assert_abs_diff_eq!(h.frobenius_norm(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.factorwise_norm(), 2.0, epsilon = 1e-14);
        let rep = CouplingHamiltonian::new(Kind::Distinguishable, 2, 2, vec![(x(), y()); 5]).unwrap();
        assert_abs_diff_eq!(rep.frobenius_norm(), 10.0, epsilon = 1e-13);
        assert_abs_diff_eq!(rep.frobenius_norm(), frob(&rep.assemble()), epsilon = 1e-12);
    }

    #[test]
    fn nonlocality_detects_local_drift() {
        let h = CouplingHamiltonian::local(Kind::Distinguishable, 2, 2, &[x()], &[z()]).unwrap();
        assert!(h.nonlocality() < 1e-15);
        let xy = CouplingHamiltonian::new(Kind::Distinguishable, 2, 2, vec![(x(), y())]).unwrap();
        assert_abs_diff_eq!(xy.nonlocality(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn trace_free_differs_by_phase() {
        let mut r = sampling::rng(5);
        let e = sampling::random_hermitian(3, &mut r);
        let h = LocalHamiltonian::symmetric(Kind::Bosonic, e).unwrap();
        let psi = sampling::random_matrix(3, 3, &mut r);
        let a = h.propagator(0.9).apply(&psi);
        let b = h.trace_free().propagator(0.9).apply(&psi);
        let ov = crate::linalg::inner(&a, &b).norm();
        assert_abs_diff_eq!(ov, frob(&psi).powi(2), epsilon = 1e-12);
        assert!(h.trace_free().e().trace().norm() < 1e-14);
    }
}
