//! Induced vector fields `−H_U` on the Schmidt sphere, speed limits, Weyl
//! averages and strong stabilization.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, commutator, frob, identity, unitary_defect, CMat, RMat, I};
use crate::operators::{CouplingHamiltonian, LocalUnitary, UNITARY_TOL};
use crate::sampling;
use crate::states::{weyl_enumerate, Kind, SchmidtPoint, Shape, WeylElement};

/// Skew-symmetric generator `M = −H_U` of the reduced flow `σ̇ = M σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct InducedField {
    kind: Kind,
    matrix: RMat,
}

impl InducedField {
    /// Antisymmetrizes `raw`: `(M − Mᵀ)/2`.
    pub fn from_raw(kind: Kind, raw: &RMat) -> Self {
        InducedField { kind, matrix: (raw - raw.transpose()) * 0.5 }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> RMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Spectral norm `‖H_U‖_∞`.
    pub fn norm(&self) -> f64 {
        crate::linalg::spectral_norm(&self.matrix)
    }
}

/// Entries of `−H_U` before antisymmetrization, from the factors of `U* H₀ U`.
///
/// Distinguishable and bosonic: `Σ_k Im(Ẽ_k ∘ F̃_k)` on the leading `n×n`
/// block. Fermionic: `Σ_k Im(Ẽ_{2i,2j} F̃_{2i+1,2j+1} − Ẽ_{2i,2j+1} F̃_{2i+1,2j})`.
pub fn raw_field(h0: &CouplingHamiltonian, u: &LocalUnitary) -> RMat {
    let shape = h0.shape();
    let n = shape.reduced_dim();
    let mut m = RMat::zeros(n, n);
    for (e, f) in h0.conjugated(u.v(), u.w()) {
        match shape.kind {
            Kind::Fermionic => {
                for i in 0..n {
                    for j in 0..n {
                        let z = e[(2 * i, 2 * j)] * f[(2 * i + 1, 2 * j + 1)]
                            - e[(2 * i, 2 * j + 1)] * f[(2 * i + 1, 2 * j)];
                        m[(i, j)] += z.im;
                    }
                }
            }
            _ => {
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] += (e[(i, j)] * f[(i, j)]).im;
                    }
                }
            }
        }
    }
    m
}

fn check_local_unitary(u: &LocalUnitary, shape: &Shape) -> Result<()> {
    if u.v().nrows() != shape.d1 || u.w().nrows() != shape.d2 {
        return Err(Error::Dimension(format!(
            "local unitary of size {}×{} for a {}×{} system",
            u.v().nrows(),
            u.w().nrows(),
            shape.d1,
            shape.d2
        )));
    }
    let defect = u.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(())
}

/// `−H_U` for a local unitary of the matching kind.
pub fn induced_field(h0: &CouplingHamiltonian, u: &LocalUnitary) -> Result<InducedField> {
    let shape = h0.shape();
    if u.kind() != shape.kind {
        return Err(Error::KindMismatch { expected: shape.kind, found: u.kind() });
    }
    check_local_unitary(u, &shape)?;
    Ok(InducedField::from_raw(shape.kind, &raw_field(h0, u)))
}

/// `−H_{V⊗W} = Σ_k Im(V*E_kV ∘ W*F_kW)`, truncated to `d_min`.
pub fn induced_field_dist(h0: &CouplingHamiltonian, v: &CMat, w: &CMat) -> Result<InducedField> {
    h0.shape().require(Kind::Distinguishable)?;
    induced_field(h0, &LocalUnitary::from_parts(Kind::Distinguishable, v.clone(), w.clone()))
}

/// `−Hˢ_V = Σ_k Im(V*E_kV ∘ V*F_kV)`.
pub fn induced_field_bos(h0: &CouplingHamiltonian, v: &CMat) -> Result<InducedField> {
    h0.shape().require(Kind::Bosonic)?;
    induced_field(h0, &LocalUnitary::from_parts(Kind::Bosonic, v.clone(), v.clone()))
}

/// `−Hᵃ_V` from the 2×2 block pattern of `V*E_kV` and `V*F_kV`.
pub fn induced_field_ferm(h0: &CouplingHamiltonian, v: &CMat) -> Result<InducedField> {
    h0.shape().require(Kind::Fermionic)?;
    induced_field(h0, &LocalUnitary::from_parts(Kind::Fermionic, v.clone(), v.clone()))
}

/// Upper bound on `‖H_U‖_∞` over all local `U`: the Frobenius norm of `H₀`.
///
/// For an orthogonal factor list this equals `√(Σ_k ‖E_k‖²‖F_k‖²)`; unlike
/// that expression it does not depend on how `H₀` is split into factors.
pub fn speed_limit_bound(h0: &CouplingHamiltonian) -> f64 {
    h0.frobenius_norm()
}

/// `(1/|𝕎|) Σ_w w H_U w⁻¹` by exhaustive enumeration (`n ≤ 6`).
pub fn weyl_average(h0: &CouplingHamiltonian, u: &LocalUnitary) -> Result<RMat> {
    let field = induced_field(h0, u)?;
    let n = field.dim();
    let group = weyl_enumerate(n)?;
    let mut acc = RMat::zeros(n, n);
    for w in &group {
        let m = w.matrix();
        acc += &m * field.matrix() * m.transpose();
    }
    Ok(acc / group.len() as f64)
}

/// Local unitary `L` with `H_{U L} = w H_U w⁻¹` for every `U`.
///
/// `L` maps the `j`-th (quasi-)diagonal basis state to `sⱼ` times the
/// `π(j)`-th one; for bosons the sign is carried by the phase `i` on both
/// factors.
pub fn weyl_local_unitary(w: &WeylElement, shape: &Shape) -> Result<LocalUnitary> {
    let n = shape.reduced_dim();
    if w.n() != n {
        return Err(Error::Dimension(format!("Weyl element of size {} for n = {n}", w.n())));
    }
    let (perm, signs) = (w.perm(), w.signs());
    let unit = c(1.0, 0.0);
    match shape.kind {
        Kind::Distinguishable => {
            let mut v = identity(shape.d1);
            let mut wm = identity(shape.d2);
            for j in 0..n {
                v[(j, j)] = c(0.0, 0.0);
                wm[(j, j)] = c(0.0, 0.0);
            }
            for j in 0..n {
                v[(perm[j], j)] = unit;
                wm[(perm[j], j)] = unit * signs[j] as f64;
            }
            Ok(LocalUnitary::from_parts(shape.kind, v, wm))
        }
        Kind::Bosonic => {
            let mut v = CMat::zeros(n, n);
            for j in 0..n {
                v[(perm[j], j)] = if signs[j] < 0 { I } else { unit };
            }
            Ok(LocalUnitary::from_parts(shape.kind, v.clone(), v))
        }
        Kind::Fermionic => {
            let d = shape.d1;
            let mut v = identity(d);
            for j in 0..2 * n {
                v[(j, j)] = c(0.0, 0.0);
            }
            for j in 0..n {
                v[(2 * perm[j], 2 * j)] = unit * signs[j] as f64;
                v[(2 * perm[j] + 1, 2 * j + 1)] = unit;
            }
            Ok(LocalUnitary::from_parts(shape.kind, v.clone(), v))
        }
    }
}

/// Outcome of [`strong_stab_search`].
#[derive(Clone, Debug)]
pub struct Stabilizer {
    pub u: LocalUnitary,
    /// `‖H_U σ‖`.
    pub residual: f64,
    /// `U` comes from the commuting-factors construction, so `H_U ≡ 0`.
    pub exact: bool,
}

const COMMUTE_TOL: f64 = 1e-10;
const SEARCH_ITERS: usize = 200;

/// Searches a local `U` with `H_U σ = 0`.
///
/// When one side of the factor list is a commuting family, its simultaneous
/// eigenbasis gives `H_U ≡ 0`. Otherwise a projected gradient descent on
/// `‖H_U σ‖²` runs from `samples` Haar-random starts and the best point is
/// returned together with its residual.
pub fn strong_stab_search<R: Rng + ?Sized>(
    h0: &CouplingHamiltonian,
    sigma: &SchmidtPoint,
    samples: usize,
    rng: &mut R,
) -> Result<Stabilizer> {
    let shape = h0.shape();
    if sigma.shape().kind != shape.kind || sigma.dim() != shape.reduced_dim() {
        return Err(Error::KindMismatch { expected: shape.kind, found: sigma.kind() });
    }
    if samples == 0 {
        return Err(Error::Size("strong_stab_search needs at least one sample".into()));
    }
    let objective = |u: &LocalUnitary| -> f64 {
        (InducedField::from_raw(shape.kind, &raw_field(h0, u)).matrix() * sigma.values()).norm()
    };
    let id = LocalUnitary::identity(shape);
    let r0 = objective(&id);
    if r0 <= 1e-14 && field_norm(h0, &id) <= 1e-14 {
        return Ok(Stabilizer { u: id, residual: r0, exact: true });
    }
    if let Some(u) = commuting_stabilizer(h0, rng) {
        let residual = objective(&u);
        return Ok(Stabilizer { u, residual, exact: true });
    }
    let mut best = Stabilizer { u: id, residual: r0, exact: false };
    for _ in 0..samples {
        let start = sampling::random_local_unitary(&shape, rng);
        let (u, res) = descend(&shape, start, |u| objective(u).powi(2));
        let res = res.max(0.0).sqrt();
        if res < best.residual {
            best = Stabilizer { u, residual: res, exact: false };
        }
        if best.residual <= 1e-12 {
            break;
        }
    }
    Ok(best)
}

fn field_norm(h0: &CouplingHamiltonian, u: &LocalUnitary) -> f64 {
    crate::linalg::frob_r(&raw_field(h0, u))
}

/// Candidate families from the factor list: first components, second
/// components and, for symmetrized lists `(E/2, F), (F/2, E)`, the two
/// interleavings that recover the original `E`'s or `F`'s.
fn commuting_stabilizer<R: Rng + ?Sized>(h0: &CouplingHamiltonian, rng: &mut R) -> Option<LocalUnitary> {
    let shape = h0.shape();
    let fs = h0.factors();
    let firsts: Vec<&CMat> = fs.iter().map(|(e, _)| e).collect();
    let seconds: Vec<&CMat> = fs.iter().map(|(_, f)| f).collect();
    let mut candidates: Vec<(bool, Vec<&CMat>)> = vec![(true, firsts), (false, seconds)];
    if shape.kind.is_indistinguishable() && fs.len().is_multiple_of(2) {
        let a = fs.iter().enumerate().map(|(k, (e, f))| if k % 2 == 0 { e } else { f }).collect();
        let b = fs.iter().enumerate().map(|(k, (e, f))| if k % 2 == 0 { f } else { e }).collect();
        candidates.push((true, a));
        candidates.push((true, b));
    }
    for (left, family) in candidates {
        if !pairwise_commute(&family) {
            continue;
        }
        let Some(basis) = simultaneous_eigenbasis(&family, rng) else { continue };
        let u = match (shape.kind, left) {
            (Kind::Distinguishable, true) => LocalUnitary::from_parts(shape.kind, basis, identity(shape.d2)),
            (Kind::Distinguishable, false) => LocalUnitary::from_parts(shape.kind, identity(shape.d1), basis),
            _ => LocalUnitary::from_parts(shape.kind, basis.clone(), basis),
        };
        if field_norm(h0, &u) <= 1e-10 * h0.frobenius_norm().max(1.0) {
            return Some(u);
        }
    }
    None
}

fn pairwise_commute(family: &[&CMat]) -> bool {
    let scale = family.iter().map(|m| frob(m)).fold(1.0, f64::max);
    family
        .iter()
        .enumerate()
        .all(|(k, a)| family[k + 1..].iter().all(|b| frob(&commutator(a, b)) <= COMMUTE_TOL * scale * scale))
}

/// Unitary `V` with `V* A V` diagonal for every `A` of a commuting Hermitian family.
pub fn simultaneous_eigenbasis<R: Rng + ?Sized>(family: &[&CMat], rng: &mut R) -> Option<CMat> {
    let d = family.first()?.nrows();
    let scale = family.iter().map(|m| frob(m)).fold(1.0, f64::max);
    for _ in 0..8 {
        let mut combo = CMat::zeros(d, d);
        for a in family {
            combo += *a * c(sampling::normal(rng), 0.0);
        }
        let v = combo.symmetric_eigen().eigenvectors;
        let off = family
            .iter()
            .map(|a| {
                let mut t = v.adjoint() * *a * &v;
                t.fill_diagonal(c(0.0, 0.0));
                frob(&t)
            })
            .fold(0.0, f64::max);
        if off <= 1e-11 * scale {
            return Some(v);
        }
    }
    None
}

/// Gradient descent on `f` over the local group, moving along
/// `U ↦ U·exp(−i Σ θ_a G_a)` with an orthonormal Hermitian basis `{G_a}`.
fn descend(shape: &Shape, start: LocalUnitary, f: impl Fn(&LocalUnitary) -> f64) -> (LocalUnitary, f64) {
    let b1 = crate::linalg::hermitian_basis(shape.d1);
    let b2 = if shape.kind.is_indistinguishable() { Vec::new() } else { crate::linalg::hermitian_basis(shape.d2) };
    let step = |u: &LocalUnitary, theta: &[f64], scale: f64| -> LocalUnitary {
        let mut g1 = CMat::zeros(shape.d1, shape.d1);
        for (t, g) in theta.iter().zip(&b1) {
            g1 += g * c(t * scale, 0.0);
        }
        let e1 = crate::linalg::hermitian_propagator(&g1, 1.0);
        let e2 = if b2.is_empty() {
            e1.clone()
        } else {
            let mut g2 = CMat::zeros(shape.d2, shape.d2);
            for (t, g) in theta[b1.len()..].iter().zip(&b2) {
                g2 += g * c(t * scale, 0.0);
            }
            crate::linalg::hermitian_propagator(&g2, 1.0)
        };
        LocalUnitary::from_parts(shape.kind, u.v() * e1, u.w() * e2)
    };
    let np = b1.len() + b2.len();
    let mut u = start;
    let mut fu = f(&u);
    let mut lr = 1.0;
    let h = 1e-6;
    for _ in 0..SEARCH_ITERS {
        let mut grad = vec![0.0; np];
        let mut e = vec![0.0; np];
        for a in 0..np {
            e[a] = h;
            let fp = f(&step(&u, &e, 1.0));
            let fm = f(&step(&u, &e, -1.0));
            grad[a] = (fp - fm) / (2.0 * h);
            e[a] = 0.0;
        }
        let gn2: f64 = grad.iter().map(|g| g * g).sum();
        if gn2 <= 1e-30 {
            break;
        }
        // Armijo backtracking along −grad
        let mut accepted = false;
        for _ in 0..40 {
            let cand = step(&u, &grad, -lr);
            let fc = f(&cand);
            if fc <= fu - 1e-4 * lr * gn2 {
                u = cand;
                fu = fc;
                lr *= 2.0;
                accepted = true;
                break;
            }
            lr *= 0.5;
        }
        if !accepted || fu <= 1e-28 {
            break;
        }
    }
    // re-unitarize against drift from repeated products
    let fix = |m: &CMat| {
        let svd = m.clone().svd(true, true);
        svd.u.unwrap() * svd.v_t.unwrap()
    };
    let u = if unitary_defect(u.v()) > 1e-13 || unitary_defect(u.w()) > 1e-13 {
        let v = fix(u.v());
        let w = if shape.kind.is_indistinguishable() { v.clone() } else { fix(u.w()) };
        LocalUnitary::from_parts(shape.kind, v, w)
    } else {
        u
    };
    let fu = f(&u);
    (u, fu)
}
