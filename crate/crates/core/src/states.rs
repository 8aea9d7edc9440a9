//! Bipartite pure states, the state ↔ matrix isomorphism, (quasi-)diagonal
//! embeddings and projections, and the Weyl group `Sₙ ≀ ℤ₂`.
//!
//! A state `|ψ⟩ = Σ ψᵢⱼ |ij⟩` is stored as its `d1×d2` coefficient matrix `ψ`;
//! the Kronecker vector is `vec(ψᵀ)`. A local unitary `V ⊗ W` acts as
//! `ψ ↦ V ψ Wᵀ`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, frob, re_inner, CMat, RMat, RVec};

/// Default relative tolerance for state constraints.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Distinguishable,
    Bosonic,
    Fermionic,
}

impl Kind {
    pub fn is_indistinguishable(self) -> bool {
        !matches!(self, Kind::Distinguishable)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Distinguishable => "distinguishable",
            Kind::Bosonic => "bosonic",
            Kind::Fermionic => "fermionic",
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distinguishable" => Ok(Kind::Distinguishable),
            "bosonic" => Ok(Kind::Bosonic),
            "fermionic" => Ok(Kind::Fermionic),
            other => Err(Error::Config(vec![format!("unknown kind {other:?}")])),
        }
    }
}

/// Subsystem dimensions together with the particle statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    pub kind: Kind,
    pub d1: usize,
    pub d2: usize,
}

impl Shape {
    pub fn new(kind: Kind, d1: usize, d2: usize) -> Result<Self> {
        if d1 < 2 || d2 < 2 {
            return Err(Error::Dimension(format!("subsystem dimensions must be ≥ 2, got {d1}×{d2}")));
        }
        if kind.is_indistinguishable() && d1 != d2 {
            return Err(Error::Dimension(format!("{} systems need equal dimensions, got {d1}×{d2}", kind.name())));
        }
        Ok(Shape { kind, d1, d2 })
    }

    pub fn distinguishable(d1: usize, d2: usize) -> Result<Self> {
        Shape::new(Kind::Distinguishable, d1, d2)
    }

    pub fn bosonic(d: usize) -> Result<Self> {
        Shape::new(Kind::Bosonic, d, d)
    }

    pub fn fermionic(d: usize) -> Result<Self> {
        Shape::new(Kind::Fermionic, d, d)
    }

    pub fn d_min(&self) -> usize {
        self.d1.min(self.d2)
    }

    /// Dimension `n` of the reduced state space `ℝⁿ ⊃ Sⁿ⁻¹`.
    pub fn reduced_dim(&self) -> usize {
        match self.kind {
            Kind::Distinguishable => self.d_min(),
            Kind::Bosonic => self.d1,
            Kind::Fermionic => self.d1 / 2,
        }
    }

    pub(crate) fn require(&self, kind: Kind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::KindMismatch { expected: kind, found: self.kind });
        }
        Ok(())
    }
}

/// Normalized bipartite pure state in matrix form.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    shape: Shape,
    coeffs: CMat,
}

/// `‖ψ − ψᵀ‖` (bosonic) resp. `‖ψ + ψᵀ‖` (fermionic), zero for distinguishable.
pub fn symmetry_defect(kind: Kind, psi: &CMat) -> f64 {
    match kind {
        Kind::Distinguishable => 0.0,
        _ if !psi.is_square() => f64::INFINITY,
        Kind::Bosonic => frob(&(psi - psi.transpose())),
        Kind::Fermionic => frob(&(psi + psi.transpose())),
    }
}

/// Orthogonal projection onto the symmetry class of `kind`.
pub fn project_symmetry(kind: Kind, psi: &CMat) -> CMat {
    match kind {
        Kind::Distinguishable => psi.clone(),
        Kind::Bosonic => (psi + psi.transpose()) * c(0.5, 0.0),
        Kind::Fermionic => (psi - psi.transpose()) * c(0.5, 0.0),
    }
}

impl BipartiteState {
    /// Strict constructor: rejects norm or symmetry violations beyond `1e-10`.
    pub fn new(kind: Kind, coeffs: CMat) -> Result<Self> {
        let shape = Shape::new(kind, coeffs.nrows(), coeffs.ncols())?;
        if !crate::linalg::is_finite(&coeffs) {
            return Err(Error::NonFinite);
        }
        let norm = frob(&coeffs);
        let defect = symmetry_defect(kind, &coeffs);
        if defect > STATE_TOL * norm.max(1.0) {
            return Err(Error::Constraint {
                what: if kind == Kind::Bosonic { "symmetry ψ = ψᵀ" } else { "antisymmetry ψ = −ψᵀ" },
                defect,
            });
        }
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Normalization(norm));
        }
        Ok(BipartiteState { shape, coeffs })
    }

    /// Projects onto the symmetry class of `kind` and rescales to unit norm.
    pub fn renormalized(kind: Kind, coeffs: CMat) -> Result<Self> {
        let shape = Shape::new(kind, coeffs.nrows(), coeffs.ncols())?;
        if !crate::linalg::is_finite(&coeffs) {
            return Err(Error::NonFinite);
        }
        let p = project_symmetry(kind, &coeffs);
        let n = frob(&p);
        if n == 0.0 {
            return Err(Error::Normalization(0.0));
        }
        Ok(BipartiteState { shape, coeffs: p / c(n, 0.0) })
    }

    /// Builds a state without checks. The caller guarantees the invariants.
    pub(crate) fn from_parts(shape: Shape, coeffs: CMat) -> Self {
        BipartiteState { shape, coeffs }
    }

    pub fn kind(&self) -> Kind {
        self.shape.kind
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn d1(&self) -> usize {
        self.shape.d1
    }

    pub fn d2(&self) -> usize {
        self.shape.d2
    }

    /// The coefficient matrix `ψᵢⱼ = ⟨ij|ψ⟩`.
    pub fn matrix(&self) -> &CMat {
        &self.coeffs
    }

    pub fn into_matrix(self) -> CMat {
        self.coeffs
    }

    /// Kronecker vector `|ψ⟩ = vec(ψᵀ)`.
    pub fn vector(&self) -> DVector<crate::linalg::C64> {
        crate::linalg::vectorize(&self.coeffs)
    }

    /// `Re⟨ψ|φ⟩ = Re tr(ψ*φ)`.
    pub fn re_inner(&self, other: &BipartiteState) -> f64 {
        re_inner(&self.coeffs, &other.coeffs)
    }

    /// Singular values in the Weyl chamber; see [`sing_sorted`].
    pub fn sing_sorted(&self) -> SchmidtPoint {
        sing_sorted(self)
    }
}

/// The diagonal state `Σ σᵢ|ii⟩` as a `d1×d2` matrix. Linear isometry.
pub fn embed_diag(sigma: &[f64], d1: usize, d2: usize) -> Result<CMat> {
    if sigma.len() != d1.min(d2) {
        return Err(Error::Dimension(format!(
            "diag: expected {} values for {d1}×{d2}, got {}",
            d1.min(d2),
            sigma.len()
        )));
    }
    let mut m = CMat::zeros(d1, d2);
    for (i, &s) in sigma.iter().enumerate() {
        m[(i, i)] = c(s, 0.0);
    }
    Ok(m)
}

/// The quasi-diagonal state `(1/√2) Σ ξᵢ(|2i−1,2i⟩ − |2i,2i−1⟩)` as a `d×d` matrix.
pub fn embed_qdiag(xi: &[f64], d: usize) -> Result<CMat> {
    if xi.len() != d / 2 {
        return Err(Error::Dimension(format!("qdiag: expected {} values for d = {d}, got {}", d / 2, xi.len())));
    }
    let mut m = CMat::zeros(d, d);
    for (i, &x) in xi.iter().enumerate() {
        m[(2 * i, 2 * i + 1)] = c(x * FRAC_1_SQRT_2, 0.0);
        m[(2 * i + 1, 2 * i)] = c(-x * FRAC_1_SQRT_2, 0.0);
    }
    Ok(m)
}

/// `Π_Σ`: real parts of the first `d_min` diagonal entries.
pub fn project_sigma_matrix(psi: &CMat) -> RVec {
    let n = psi.nrows().min(psi.ncols());
    RVec::from_fn(n, |i, _| psi[(i, i)].re)
}

/// `Π_Ξ`: `√2 · Re ψ_{2i−1,2i}`.
pub fn project_xi_matrix(psi: &CMat) -> RVec {
    let n = psi.nrows() / 2;
    RVec::from_fn(n, |i, _| std::f64::consts::SQRT_2 * psi[(2 * i, 2 * i + 1)].re)
}

pub fn project_sigma(state: &BipartiteState) -> Result<RVec> {
    if state.kind() == Kind::Fermionic {
        return Err(Error::KindMismatch { expected: Kind::Distinguishable, found: Kind::Fermionic });
    }
    Ok(project_sigma_matrix(state.matrix()))
}

pub fn project_xi(state: &BipartiteState) -> Result<RVec> {
    state.shape().require(Kind::Fermionic)?;
    Ok(project_xi_matrix(state.matrix()))
}

/// Embedding `ι` appropriate for `shape` (diag or qdiag).
pub fn embed(shape: &Shape, values: &[f64]) -> Result<CMat> {
    match shape.kind {
        Kind::Fermionic => embed_qdiag(values, shape.d1),
        _ => embed_diag(values, shape.d1, shape.d2),
    }
}

/// Projection `Π` appropriate for `kind` (Π_Σ or Π_Ξ).
pub fn project(kind: Kind, psi: &CMat) -> RVec {
    match kind {
        Kind::Fermionic => project_xi_matrix(psi),
        _ => project_sigma_matrix(psi),
    }
}

/// Point of the reduced state space: (quasi-)singular values on the Schmidt sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtPoint {
    shape: Shape,
    values: RVec,
}

impl SchmidtPoint {
    pub fn new(shape: Shape, values: RVec) -> Result<Self> {
        if values.len() != shape.reduced_dim() {
            return Err(Error::Dimension(format!(
                "Schmidt point needs {} values, got {}",
                shape.reduced_dim(),
                values.len()
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = values.norm();
        if (n - 1.0).abs() > STATE_TOL {
            return Err(Error::Normalization(n));
        }
        Ok(SchmidtPoint { shape, values })
    }

    pub fn normalized(shape: Shape, values: RVec) -> Result<Self> {
        let n = values.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Normalization(n));
        }
        SchmidtPoint::new(shape, values / n)
    }

    pub fn from_slice(shape: Shape, values: &[f64]) -> Result<Self> {
        SchmidtPoint::new(shape, RVec::from_column_slice(values))
    }

    pub(crate) fn from_parts(shape: Shape, values: RVec) -> Self {
        SchmidtPoint { shape, values }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn kind(&self) -> Kind {
        self.shape.kind
    }

    pub fn values(&self) -> &RVec {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// The (quasi-)diagonal state matrix `|σ⟩` resp. `|ξ⟩`.
    pub fn embed(&self) -> CMat {
        embed(&self.shape, self.values.as_slice()).expect("dimensions checked on construction")
    }

    pub fn to_state(&self) -> BipartiteState {
        BipartiteState::from_parts(self.shape, self.embed())
    }

    /// Representative in the Weyl chamber: absolute values, non-increasing.
    pub fn weyl_sorted(&self) -> SchmidtPoint {
        let mut v: Vec<f64> = self.values.iter().map(|x| x.abs()).collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        SchmidtPoint { shape: self.shape, values: RVec::from_vec(v) }
    }
}

/// Weyl-chamber representative of the (quasi-)singular values of a state.
///
/// Distinguishable and bosonic: the singular values of `ψ`. Fermionic: the
/// singular values come in equal pairs; one per pair is kept and multiplied by
/// `√2`, and the zero singular value of odd `d` is dropped.
pub fn sing_sorted(state: &BipartiteState) -> SchmidtPoint {
    let mut s: Vec<f64> = state.matrix().clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let values = match state.kind() {
        Kind::Fermionic => {
            let n = state.d1() / 2;
            (0..n).map(|i| std::f64::consts::SQRT_2 * 0.5 * (s[2 * i] + s[2 * i + 1])).collect::<Vec<_>>()
        }
        _ => s,
    };
    let mut values = RVec::from_vec(values);
    // exact non-negativity and monotonicity
    for i in 0..values.len() {
        values[i] = values[i].max(0.0);
        if i > 0 && values[i] > values[i - 1] {
            values[i] = values[i - 1];
        }
    }
    SchmidtPoint { shape: state.shape(), values }
}

/// Element of `Sₙ ≀ ℤ₂`, acting by `(w·x)ᵢ = sᵢ · x_{π(i)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeylElement {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

/// Largest `n` for which the Weyl group is enumerated.
pub const WEYL_ENUM_MAX: usize = 6;

impl WeylElement {
    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let n = perm.len();
        if signs.len() != n {
            return Err(Error::Dimension("permutation and sign vector lengths differ".into()));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::Dimension(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Dimension("signs must be ±1".into()));
        }
        Ok(WeylElement { perm, signs })
    }

    pub fn identity(n: usize) -> Self {
        WeylElement { perm: (0..n).collect(), signs: vec![1; n] }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn act(&self, x: &RVec) -> RVec {
        RVec::from_fn(self.n(), |i, _| self.signs[i] as f64 * x[self.perm[i]])
    }

    /// `(self ∘ other)·x = self·(other·x)`.
    pub fn compose(&self, other: &WeylElement) -> WeylElement {
        let perm = (0..self.n()).map(|i| other.perm[self.perm[i]]).collect();
        let signs = (0..self.n()).map(|i| self.signs[i] * other.signs[self.perm[i]]).collect();
        WeylElement { perm, signs }
    }

    pub fn inverse(&self) -> WeylElement {
        let n = self.n();
        let mut perm = vec![0; n];
        let mut signs = vec![1; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
            signs[self.perm[i]] = self.signs[i];
        }
        WeylElement { perm, signs }
    }

    /// Signed permutation matrix `M` with `M x = w·x`.
    pub fn matrix(&self) -> RMat {
        let mut m = RMat::zeros(self.n(), self.n());
        for i in 0..self.n() {
            m[(i, self.perm[i])] = self.signs[i] as f64;
        }
        m
    }
}

/// Weyl group action on a Schmidt point.
pub fn weyl_act(w: &WeylElement, p: &SchmidtPoint) -> Result<SchmidtPoint> {
    if w.n() != p.dim() {
        return Err(Error::Dimension(format!("Weyl element of size {} on a point of size {}", w.n(), p.dim())));
    }
    Ok(SchmidtPoint { shape: p.shape, values: w.act(&p.values) })
}

/// All `2ⁿ·n!` elements of `Sₙ ≀ ℤ₂`, for `n ≤ 6`.
pub fn weyl_enumerate(n: usize) -> Result<Vec<WeylElement>> {
    if n > WEYL_ENUM_MAX {
        return Err(Error::Size(format!("Weyl group enumeration limited to n ≤ {WEYL_ENUM_MAX}, got {n}")));
    }
    let mut perms = Vec::new();
    permutations(&mut (0..n).collect::<Vec<_>>(), 0, &mut perms);
    let mut out = Vec::with_capacity(perms.len() << n);
    for p in &perms {
        for mask in 0u32..(1 << n) {
            let signs = (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
            out.push(WeylElement { perm: p.clone(), signs });
        }
    }
    Ok(out)
}

fn permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, out);
        items.swap(k, i);
    }
}
