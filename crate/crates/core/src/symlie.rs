//! Embeddings of the three state spaces into the symmetric Lie algebras of
//! types AIII (distinguishable), CI (bosonic) and DIII (fermionic), with
//! property checks tying the state picture to the Lie picture.
//!
//! AIII and DIII elements are complex block matrices in their standard
//! representation. CI elements are real `2d × 2d` matrices; they are also
//! carried as complex matrices with zero imaginary part by the kind-generic
//! functions so that one set of bracket and trace-form routines serves all.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::induced_field;
use crate::linalg::{c, commutator, frob, re_inner, CMat, RMat, I};
use crate::operators::{CouplingHamiltonian, LocalHamiltonian, LocalUnitary};
use crate::sampling;
use crate::states::{embed, BipartiteState, Kind, Shape};

/// Symmetric Lie algebra type matching a particle kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LieType {
    #[serde(rename = "AIII")]
    Aiii,
    #[serde(rename = "CI")]
    Ci,
    #[serde(rename = "DIII")]
    Diii,
}

impl LieType {
    pub fn of(kind: Kind) -> Self {
        match kind {
            Kind::Distinguishable => LieType::Aiii,
            Kind::Bosonic => LieType::Ci,
            Kind::Fermionic => LieType::Diii,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LieType::Aiii => "AIII",
            LieType::Ci => "CI",
            LieType::Diii => "DIII",
        }
    }
}

fn require(state: &BipartiteState, kind: Kind) -> Result<()> {
    if state.kind() != kind {
        return Err(Error::KindMismatch { expected: kind, found: state.kind() });
    }
    Ok(())
}

fn require_u(u: &LocalUnitary, kind: Kind) -> Result<()> {
    if u.kind() != kind {
        return Err(Error::KindMismatch { expected: kind, found: u.kind() });
    }
    Ok(())
}

fn hollow(psi: &CMat) -> CMat {
    let (d1, d2) = psi.shape();
    let mut m = CMat::zeros(d1 + d2, d1 + d2);
    m.view_mut((0, d1), (d1, d2)).copy_from(psi);
    m.view_mut((d1, 0), (d2, d1)).copy_from(&psi.adjoint());
    m
}

fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = CMat::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// `[[tl, tr], [bl, br]]` from four `d × d` blocks.
fn real_blocks(tl: &RMat, tr: &RMat, bl: &RMat, br: &RMat) -> RMat {
    let d = tl.nrows();
    let mut out = RMat::zeros(2 * d, 2 * d);
    out.view_mut((0, 0), (d, d)).copy_from(tl);
    out.view_mut((0, d), (d, d)).copy_from(tr);
    out.view_mut((d, 0), (d, d)).copy_from(bl);
    out.view_mut((d, d), (d, d)).copy_from(br);
    out
}

fn re(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

fn im(m: &CMat) -> RMat {
    m.map(|z| z.im)
}

fn complexify(m: &RMat) -> CMat {
    m.map(|x| c(x, 0.0))
}

/// `ψ ↦ [[0, ψ], [ψ*, 0]]` into `p` of AIII.
pub fn embed_aiii(state: &BipartiteState) -> Result<CMat> {
    require(state, Kind::Distinguishable)?;
    Ok(hollow(state.matrix()))
}

/// `ψ ↦ [[Re ψ, −Im ψ], [−Im ψ, −Re ψ]]` into `p` of CI.
pub fn embed_ci(state: &BipartiteState) -> Result<RMat> {
    require(state, Kind::Bosonic)?;
    Ok(embed_ci_matrix(state.matrix()))
}

fn embed_ci_matrix(psi: &CMat) -> RMat {
    let (r, i) = (re(psi), im(psi));
    real_blocks(&r, &(-&i), &(-&i), &(-&r))
}

/// `ψ ↦ [[0, ψ], [ψ*, 0]]` into `p` of DIII.
pub fn embed_diii(state: &BipartiteState) -> Result<CMat> {
    require(state, Kind::Fermionic)?;
    Ok(hollow(state.matrix()))
}

/// Embedding of a coefficient matrix of the given kind (no normalization needed).
pub fn embed_matrix(kind: Kind, psi: &CMat) -> CMat {
    match kind {
        Kind::Bosonic => complexify(&embed_ci_matrix(psi)),
        _ => hollow(psi),
    }
}

/// Kind-generic embedding of a state.
pub fn embed_state(state: &BipartiteState) -> CMat {
    embed_matrix(state.kind(), state.matrix())
}

/// Inverse of [`embed_matrix`] on `p`.
pub fn unembed(shape: &Shape, m: &CMat) -> CMat {
    let (d1, d2) = (shape.d1, shape.d2);
    match shape.kind {
        Kind::Bosonic => {
            let cc = re(&m.view((0, 0), (d1, d1)).into_owned());
            let dd = re(&m.view((0, d1), (d1, d1)).into_owned());
            cc.zip_map(&dd, |x, y| c(x, -y))
        }
        _ => m.view((0, d1), (d1, d2)).into_owned(),
    }
}

/// Phase `φ` with `det(e^{iφ}V) · det(conj(e^{−iφ}W)) = 1`, principal root.
pub fn aiii_phase(v: &CMat, w: &CMat) -> f64 {
    let ratio = w.determinant() / v.determinant();
    ratio.arg() / (v.nrows() + w.nrows()) as f64
}

/// `V⊗W ↦ diag(e^{iφ}V, conj(e^{−iφ}W)) ∈ S(U(d₁)×U(d₂))`.
pub fn group_aiii(u: &LocalUnitary) -> Result<CMat> {
    require_u(u, Kind::Distinguishable)?;
    let ph = (I * aiii_phase(u.v(), u.w())).exp();
    Ok(block_diag(&(u.v() * ph), &(u.w() * ph.conj()).map(|z| z.conj())))
}

/// `V⊗V ↦ [[Re V, Im V], [−Im V, Re V]]`.
pub fn group_ci(u: &LocalUnitary) -> Result<RMat> {
    require_u(u, Kind::Bosonic)?;
    Ok(ci_realify(u.v()))
}

fn ci_realify(m: &CMat) -> RMat {
    let (r, i) = (re(m), im(m));
    real_blocks(&r, &i, &(-&i), &r)
}

/// `V⊗V ↦ diag(V, V̄)`.
pub fn group_diii(u: &LocalUnitary) -> Result<CMat> {
    require_u(u, Kind::Fermionic)?;
    Ok(block_diag(u.v(), &u.v().map(|z| z.conj())))
}

/// Kind-generic group map.
pub fn group_element(u: &LocalUnitary) -> CMat {
    match u.kind() {
        Kind::Distinguishable => group_aiii(u).expect("kind checked"),
        Kind::Bosonic => complexify(&ci_realify(u.v())),
        Kind::Fermionic => group_diii(u).expect("kind checked"),
    }
}

/// Element of `k` whose adjoint action is the image of `iH`.
///
/// For AIII the scalar part is removed, which does not change the action.
pub fn algebra_element(h: &LocalHamiltonian) -> CMat {
    let ie = h.e() * I;
    match h.kind() {
        Kind::Distinguishable => {
            let i_f = h.f() * I;
            let mut m = block_diag(&ie, &i_f.map(|z| z.conj()));
            let n = m.nrows();
            let tr = m.trace() / n as f64;
            for k in 0..n {
                m[(k, k)] -= tr;
            }
            m
        }
        Kind::Bosonic => complexify(&ci_realify(&ie)),
        Kind::Fermionic => block_diag(&ie, &(-h.e().map(|z| z.conj()) * I)),
    }
}

/// `Ad_K(X) = K X K*`.
pub fn adjoint_action(k: &CMat, x: &CMat) -> CMat {
    k * x * k.adjoint()
}

/// `‖ȷ(U)ı(ψ) − ı(Uψ)‖_F`.
pub fn compat_residual(u: &LocalUnitary, state: &BipartiteState) -> Result<f64> {
    require_u(u, state.kind())?;
    let lhs = adjoint_action(&group_element(u), &embed_state(state));
    let rhs = embed_matrix(state.kind(), &u.apply(state.matrix()));
    Ok(frob(&(lhs - rhs)))
}

/// `‖ȷ⋆(iH)ı(ψ) − ı(iHψ)‖_F` with `ȷ⋆(iH) = ad_k`.
pub fn compat_residual_infinitesimal(h: &LocalHamiltonian, state: &BipartiteState) -> Result<f64> {
    if h.kind() != state.kind() {
        return Err(Error::KindMismatch { expected: state.kind(), found: h.kind() });
    }
    let lhs = commutator(&algebra_element(h), &embed_state(state));
    let rhs = embed_matrix(state.kind(), &(h.apply(state.matrix()) * I));
    Ok(frob(&(lhs - rhs)))
}

/// Trace form on `p`: `½ tr(XY)`.
pub fn trace_form(x: &CMat, y: &CMat) -> f64 {
    0.5 * (x * y).trace().re
}

/// `|½ tr(ı(ψ)ı(φ)) − Re⟨ψ|φ⟩|`.
pub fn isometry_defect(a: &BipartiteState, b: &BipartiteState) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::KindMismatch { expected: a.kind(), found: b.kind() });
    }
    Ok((trace_form(&embed_state(a), &embed_state(b)) - re_inner(a.matrix(), b.matrix())).abs())
}

fn blocks(shape: &Shape, m: &CMat) -> (CMat, CMat, CMat, CMat) {
    let n = shape.d1;
    let p = m.nrows() - n;
    (
        m.view((0, 0), (n, n)).into_owned(),
        m.view((0, n), (n, p)).into_owned(),
        m.view((n, 0), (p, n)).into_owned(),
        m.view((n, n), (p, p)).into_owned(),
    )
}

fn imag_part(m: &CMat) -> f64 {
    m.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

/// Distance of `m` from `k` (Frobenius norm of the violating parts).
pub fn k_residual(shape: &Shape, m: &CMat) -> f64 {
    let (a, b, cc, d) = blocks(shape, m);
    match shape.kind {
        Kind::Distinguishable => {
            let skew = frob(&(m + m.adjoint())) / 2.0;
            (frob(&b).powi(2) + frob(&cc).powi(2) + skew.powi(2) + m.trace().norm_sqr()).sqrt()
        }
        Kind::Bosonic => {
            // [[A, B], [−B, A]] with A skew, B symmetric, all real
            let (a, b, cc, d) = (re(&a), re(&b), re(&cc), re(&d));
            let parts = [
                (&a - &d).norm(),
                (&b + &cc).norm(),
                (&a + a.transpose()).norm() / 2.0,
                (&b - b.transpose()).norm() / 2.0,
            ];
            parts.iter().map(|x| x * x).sum::<f64>().sqrt().max(imag_part(m))
        }
        Kind::Fermionic => {
            // diag(iH, −i H̄)
            let skew = frob(&(&a + a.adjoint())) / 2.0;
            let tie = frob(&(&d - a.map(|z| z.conj())));
            (frob(&b).powi(2) + frob(&cc).powi(2) + skew.powi(2) + tie.powi(2)).sqrt()
        }
    }
}

/// Distance of `m` from `p`.
pub fn p_residual(shape: &Shape, m: &CMat) -> f64 {
    let (a, b, cc, d) = blocks(shape, m);
    match shape.kind {
        Kind::Bosonic => {
            // [[C, D], [D, −C]] with C, D symmetric, all real
            let (a, b, cc, d) = (re(&a), re(&b), re(&cc), re(&d));
            let parts = [
                (&a + &d).norm(),
                (&b - &cc).norm(),
                (&a - a.transpose()).norm() / 2.0,
                (&b - b.transpose()).norm() / 2.0,
            ];
            parts.iter().map(|x| x * x).sum::<f64>().sqrt().max(imag_part(m))
        }
        kind => {
            let tie = frob(&(&cc - b.adjoint()));
            let skew = if kind == Kind::Fermionic { frob(&(&b + b.transpose())) } else { 0.0 };
            (frob(&a).powi(2) + frob(&d).powi(2) + tie.powi(2) + skew.powi(2)).sqrt()
        }
    }
}

/// Induced field assembled in the Lie picture: the pullback along `ı∘diag`
/// (resp. `ı∘qdiag`) of `Π_a Ad_K⁻¹ X Ad_K` with `−X = ı⋆(iH₀)`, `Ad_K = ȷ(U)`.
pub fn lie_field(h0: &CouplingHamiltonian, u: &LocalUnitary) -> Result<RMat> {
    let shape = h0.shape();
    require_u(u, shape.kind)?;
    let n = shape.reduced_dim();
    let k = group_element(u);
    let basis: Vec<CMat> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            embed_matrix(shape.kind, &embed(&shape, &e).expect("dimensions match"))
        })
        .collect();
    let mut out = RMat::zeros(n, n);
    for (j, p) in basis.iter().enumerate() {
        let moved = adjoint_action(&k, p);
        let psi = unembed(&shape, &moved);
        let x = -embed_matrix(shape.kind, &(h0.apply(&psi) * I));
        let back = adjoint_action(&k.adjoint(), &x);
        for (i, q) in basis.iter().enumerate() {
            out[(i, j)] = trace_form(q, &back);
        }
    }
    Ok(out)
}

/// Outcome of one property check.
#[derive(Clone, Debug, Serialize)]
pub struct LieCheck {
    pub lie_type: LieType,
    pub property: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Tolerance of isometry and bracket checks.
pub const ISOMETRY_TOL: f64 = 1e-12;
/// Tolerance of compatibility and field-correspondence checks.
pub const COMPAT_TOL: f64 = 1e-10;

fn unit_element(m: CMat) -> CMat {
    let n = frob(&m);
    m / c(n, 0.0)
}

/// Runs every property check on `samples` random instances.
pub fn verify_lie<R: Rng + ?Sized>(shape: &Shape, samples: usize, rng: &mut R) -> Vec<LieCheck> {
    let t = LieType::of(shape.kind);
    let mut worst = [0.0f64; 10];
    let d = shape.d1;
    for _ in 0..samples {
        let a = sampling::random_state(shape, rng);
        let b = sampling::random_state(shape, rng);
        let u = sampling::random_local_unitary(shape, rng);
        let e = sampling::random_hermitian(d, rng);
        let f = if shape.kind.is_indistinguishable() { e.clone() } else { sampling::random_hermitian(shape.d2, rng) };
        let h = LocalHamiltonian::new(shape.kind, e, f).expect("Hermitian factors");
        let e2 = sampling::random_hermitian(d, rng);
        let f2 = if shape.kind.is_indistinguishable() { e2.clone() } else { sampling::random_hermitian(shape.d2, rng) };
        let h2 = LocalHamiltonian::new(shape.kind, e2, f2).expect("Hermitian factors");
        let (pa, pb) = (embed_state(&a), embed_state(&b));
        let (ka, kb) = (unit_element(algebra_element(&h)), unit_element(algebra_element(&h2)));
        let sa = sampling::random_point(shape, rng).to_state();
        let sb = sampling::random_point(shape, rng).to_state();
        let h0 = sampling::random_coupling(shape.kind, shape.d1, shape.d2, 2, rng);
        let field = induced_field(&h0, &u).expect("kinds match");
        let lie = lie_field(&h0, &u).expect("kinds match");
        let vals = [
            isometry_defect(&a, &b).expect("same shape"),
            compat_residual(&u, &a).expect("same kind"),
            compat_residual_infinitesimal(&h, &a).expect("same kind"),
            p_residual(shape, &pa),
            k_residual(shape, &ka),
            frob(&commutator(&embed_state(&sa), &embed_state(&sb))),
            k_residual(shape, &commutator(&ka, &kb)),
            p_residual(shape, &commutator(&ka, &pa)),
            k_residual(shape, &commutator(&pa, &pb)),
            (field.matrix() - lie).amax(),
        ];
        for (w, v) in worst.iter_mut().zip(vals) {
            *w = w.max(v);
        }
    }
    let names: [(&'static str, f64); 10] = [
        ("isometry", ISOMETRY_TOL),
        ("compatibility", COMPAT_TOL),
        ("compatibility_infinitesimal", COMPAT_TOL),
        ("state_image_in_p", ISOMETRY_TOL),
        ("algebra_image_in_k", ISOMETRY_TOL),
        ("cartan_subspace_abelian", ISOMETRY_TOL),
        ("bracket_k_k_in_k", ISOMETRY_TOL),
        ("bracket_k_p_in_p", ISOMETRY_TOL),
        ("bracket_p_p_in_k", ISOMETRY_TOL),
        ("field_correspondence", COMPAT_TOL),
    ];
    names
        .iter()
        .zip(worst)
        .map(|(&(property, tolerance), value)| LieCheck {
            lie_type: t,
            property,
            value,
            tolerance,
            pass: value <= tolerance,
        })
        .collect()
}
