//! Infinitesimal local action `ad`, its closed-form pseudoinverses,
//! compensating Hamiltonians, the full Schrödinger propagator and the
//! full-versus-reduced equivalence harness.
//!
//! Sign convention: `ad_σ(E, F) = −i(Eσ̃ + σ̃F̄)` and `ad_pinv` is its
//! Moore–Penrose inverse, so `ad_σ(ad_pinv(σ, A)) = A` on `Σ⊥` (resp. `Ξ⊥`).

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::{complex_svd, hua, regularity_margin, takagi, REGULARITY_EPS};
use crate::fields::induced_field;
use crate::linalg::{c, expm_r, frob, inner, CMat, RVec, I};
use crate::operators::{CouplingHamiltonian, LocalHamiltonian, LocalUnitary};
use crate::reduced::{schedule_fields, ControlSchedule};
use crate::states::{embed, project, project_symmetry, sing_sorted, BipartiteState, Kind, SchmidtPoint, Shape};

/// Tolerance for membership in `Σ⊥` / `Ξ⊥`, relative to `‖A‖`.
pub const CONSTRAINT_TOL: f64 = 1e-10;
/// Regularity threshold of the equivalence harness.
pub const HARNESS_EPS: f64 = 1e-6;

/// `ad_σ(h) = −i(Eσ̃ + σ̃F̄)` as a coefficient matrix.
pub fn ad_apply(p: &SchmidtPoint, h: &LocalHamiltonian) -> Result<CMat> {
    if h.kind() != p.kind() {
        return Err(Error::KindMismatch { expected: p.kind(), found: h.kind() });
    }
    let shape = p.shape();
    if h.e().nrows() != shape.d1 || h.f().nrows() != shape.d2 {
        return Err(Error::Dimension("local Hamiltonian does not match the point".into()));
    }
    let s = p.embed();
    Ok((h.e() * &s + &s * h.f().map(|z| z.conj())) * (-I))
}

fn require_regular(values: &[f64]) -> Result<()> {
    let margin = regularity_margin(values);
    if margin <= REGULARITY_EPS {
        return Err(Error::NonRegular(format!("smallest value or gap {margin:.3e}")));
    }
    Ok(())
}

fn require_orthogonal(shape: &Shape, a: &CMat) -> Result<()> {
    if a.shape() != (shape.d1, shape.d2) {
        return Err(Error::Dimension(format!(
            "tangent of size {:?} for a {}×{} system",
            a.shape(),
            shape.d1,
            shape.d2
        )));
    }
    let scale = frob(a).max(1.0);
    let along = project(shape.kind, a).amax();
    if along > CONSTRAINT_TOL * scale {
        return Err(Error::Constraint {
            what: "tangent in the orthocomplement of the (quasi-)diagonal states",
            defect: along,
        });
    }
    let sym = crate::states::symmetry_defect(shape.kind, a);
    if sym > CONSTRAINT_TOL * scale {
        return Err(Error::Constraint { what: "tangent in the symmetry class", defect: sym });
    }
    Ok(())
}

fn hermitian_from_upper(mut m: CMat) -> CMat {
    let d = m.nrows();
    for i in 0..d {
        m[(i, i)] = c(m[(i, i)].re, 0.0);
        for j in 0..i {
            m[(i, j)] = m[(j, i)].conj();
        }
    }
    m
}

/// Closed-form `ad_σ⁺` for distinguishable systems, gauge `Eᵢᵢ = Fᵢᵢ`.
pub fn ad_pinv_dist(sigma: &SchmidtPoint, a: &CMat) -> Result<LocalHamiltonian> {
    let shape = sigma.shape();
    shape.require(Kind::Distinguishable)?;
    let s = sigma.values().as_slice();
    require_regular(s)?;
    require_orthogonal(&shape, a)?;
    let (d1, d2, n) = (shape.d1, shape.d2, shape.d_min());
    // work with iE and iF, then divide by i
    let mut ie = CMat::zeros(d1, d1);
    let mut i_f = CMat::zeros(d2, d2);
    for i in 0..n {
        ie[(i, i)] = -a[(i, i)] / (2.0 * s[i]);
        i_f[(i, i)] = ie[(i, i)];
        for j in 0..n {
            if i == j {
                continue;
            }
            let den = s[i] * s[i] - s[j] * s[j];
            ie[(i, j)] = (a[(i, j)] * s[j] + a[(j, i)].conj() * s[i]) / den;
            i_f[(i, j)] = (a[(j, i)] * s[j] + a[(i, j)].conj() * s[i]) / den;
        }
    }
    // extra rows of A (d1 > d2) feed E, extra columns (d1 < d2) feed F
    for i in n..d1 {
        for j in 0..n {
            ie[(i, j)] = -a[(i, j)] / s[j];
            ie[(j, i)] = -ie[(i, j)].conj();
        }
    }
    for i in n..d2 {
        for j in 0..n {
            i_f[(i, j)] = -a[(j, i)] / s[j];
            i_f[(j, i)] = -i_f[(i, j)].conj();
        }
    }
    let e = hermitian_from_upper(ie * (-I));
    let f = hermitian_from_upper(i_f * (-I));
    Ok(LocalHamiltonian::from_parts(Kind::Distinguishable, e, f))
}

/// Closed-form `ad_σ⁺` for bosonic systems.
pub fn ad_pinv_bos(sigma: &SchmidtPoint, a: &CMat) -> Result<LocalHamiltonian> {
    let shape = sigma.shape();
    shape.require(Kind::Bosonic)?;
    let s = sigma.values().as_slice();
    require_regular(s)?;
    require_orthogonal(&shape, a)?;
    let d = shape.d1;
    let mut e = CMat::zeros(d, d);
    for i in 0..d {
        e[(i, i)] = I * a[(i, i)] / (2.0 * s[i]);
        for j in i + 1..d {
            let z = a[(i, j)];
            e[(i, j)] = c(-z.im / (s[i] + s[j]), -z.re / (s[i] - s[j]));
        }
    }
    let e = hermitian_from_upper(e);
    Ok(LocalHamiltonian::from_parts(Kind::Bosonic, e.clone(), e))
}

fn block(m: &CMat, i: usize, j: usize) -> CMat {
    m.view((2 * i, 2 * j), (2, 2)).into_owned()
}

/// Closed-form `ad_ξ⁺` for fermionic systems.
///
/// The block formulas are written for the block values `ξ/√2` of the
/// normalized quasi-diagonal state.
pub fn ad_pinv_ferm(xi: &SchmidtPoint, a: &CMat) -> Result<LocalHamiltonian> {
    let shape = xi.shape();
    shape.require(Kind::Fermionic)?;
    let x = xi.values().as_slice();
    require_regular(x)?;
    require_orthogonal(&shape, a)?;
    let d = shape.d1;
    let n = d / 2;
    let b: Vec<f64> = x.iter().map(|v| v / SQRT_2).collect();
    let j2 = crate::factor::quasi_diagonal(&[1.0], 2);
    let mut ie = CMat::zeros(d, d);
    for i in 0..n {
        // A_(ii) = a_i J
        let ai = a[(2 * i, 2 * i + 1)];
        let v = -ai / (2.0 * b[i]);
        ie[(2 * i, 2 * i)] = v;
        ie[(2 * i + 1, 2 * i + 1)] = v;
        for j in 0..n {
            if i == j {
                continue;
            }
            let aij = block(a, i, j);
            let num = &j2 * aij.map(|z| z.conj()) * c(b[i], 0.0) + &aij * &j2 * c(b[j], 0.0);
            let blk = num / c(b[j] * b[j] - b[i] * b[i], 0.0);
            ie.view_mut((2 * i, 2 * j), (2, 2)).copy_from(&blk);
        }
    }
    if d % 2 == 1 {
        let l = d - 1;
        for i in 0..n {
            ie[(l, 2 * i + 1)] = a[(l, 2 * i)] / b[i];
            ie[(l, 2 * i)] = -a[(l, 2 * i + 1)] / b[i];
            ie[(2 * i + 1, l)] = -ie[(l, 2 * i + 1)].conj();
            ie[(2 * i, l)] = -ie[(l, 2 * i)].conj();
        }
    }
    let e = hermitian_from_upper(ie * (-I));
    Ok(LocalHamiltonian::from_parts(Kind::Fermionic, e.clone(), e))
}

/// Dispatches to the closed form for the kind of `p`.
pub fn ad_pinv(p: &SchmidtPoint, a: &CMat) -> Result<LocalHamiltonian> {
    match p.kind() {
        Kind::Distinguishable => ad_pinv_dist(p, a),
        Kind::Bosonic => ad_pinv_bos(p, a),
        Kind::Fermionic => ad_pinv_ferm(p, a),
    }
}

/// Removes the (quasi-)diagonal real component: `Π⊥ = 𝟙 − ι∘Π`.
pub fn project_perp(shape: &Shape, psi: &CMat) -> CMat {
    let along = embed(shape, project(shape.kind, psi).as_slice()).expect("dimensions match");
    psi - along
}

/// Global-phase handling for full-system comparisons.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseMode {
    #[default]
    Sensitive,
    Insensitive,
}

impl PhaseMode {
    /// `‖ψ₁ − ψ₂‖`, or `1 − |⟨ψ₁|ψ₂⟩|` when insensitive to global phases.
    pub fn distance(self, a: &CMat, b: &CMat) -> f64 {
        match self {
            PhaseMode::Sensitive => frob(&(a - b)),
            PhaseMode::Insensitive => (1.0 - inner(a, b).norm()).max(0.0),
        }
    }
}

/// Local Hamiltonian `H` such that `ψ(t) = U(t)|σ(t)⟩` solves
/// `ψ̇ = −i(H₀ + H)ψ` along a solution of the reduced system.
///
/// `motion` is the generator `G` of the local frame, `U̇ = −iGU`; `None`
/// means the frame is at rest.
pub fn compensating_hamiltonian(
    h0: &CouplingHamiltonian,
    u: &LocalUnitary,
    motion: Option<&LocalHamiltonian>,
    sigma: &SchmidtPoint,
) -> Result<LocalHamiltonian> {
    let shape = h0.shape();
    if sigma.shape() != shape || u.kind() != shape.kind {
        return Err(Error::KindMismatch { expected: shape.kind, found: sigma.kind() });
    }
    require_regular(sigma.values().as_slice())?;
    let s = sigma.embed();
    // Π⊥(U*(iH₀)U|σ⟩)
    let mut b = CMat::zeros(shape.d1, shape.d2);
    for (e, f) in h0.conjugated(u.v(), u.w()) {
        b += e * &s * f.transpose();
    }
    let a = project_symmetry(shape.kind, &project_perp(&shape, &(b * I)));
    let frame = ad_pinv(sigma, &a)?.conjugate(u);
    Ok(match motion {
        Some(g) => frame.add(g),
        None => frame,
    })
}

/// Sampled full-system trajectory.
#[derive(Clone, Debug)]
pub struct FullTrajectory {
    pub shape: Shape,
    pub times: Vec<f64>,
    pub states: Vec<CMat>,
}

impl FullTrajectory {
    pub fn state(&self, k: usize) -> BipartiteState {
        BipartiteState::from_parts(self.shape, self.states[k].clone())
    }

    pub fn sing_sorted(&self, k: usize) -> SchmidtPoint {
        sing_sorted(&self.state(k))
    }
}

/// Piecewise-constant local drive of the full system: at the start of
/// segment `k` the local unitary `kicks[k]` is applied instantaneously, then
/// `ψ̇ = −i(H₀ + hamiltonians[k])ψ` holds until the next breakpoint.
#[derive(Clone, Debug)]
pub struct LocalDrive {
    pub breakpoints: Vec<f64>,
    pub kicks: Vec<Option<LocalUnitary>>,
    pub hamiltonians: Vec<Option<LocalHamiltonian>>,
}

impl LocalDrive {
    /// Realizes a reduced-system schedule by kicks `U_k U_{k−1}*` at its breakpoints.
    pub fn from_schedule(schedule: &ControlSchedule) -> Self {
        let us = schedule.unitaries();
        let kicks = us
            .iter()
            .enumerate()
            .map(|(k, u)| Some(if k == 0 { u.clone() } else { u.compose(&us[k - 1].adjoint()) }))
            .collect();
        LocalDrive { breakpoints: schedule.breakpoints().to_vec(), kicks, hamiltonians: vec![None; schedule.len()] }
    }

    /// A single segment of constant local Hamiltonian.
    pub fn constant(h: Option<LocalHamiltonian>, t: f64) -> Self {
        LocalDrive { breakpoints: vec![0.0, t], kicks: vec![None], hamiltonians: vec![h] }
    }
}

/// Steps between re-projections onto the symmetry class.
const REPROJECT_EVERY: usize = 100;

fn rk4_full(h0: &CouplingHamiltonian, psi: &CMat, h: f64, hloc: [Option<&LocalHamiltonian>; 3]) -> CMat {
    let f = |x: &CMat, l: Option<&LocalHamiltonian>| {
        let mut y = h0.apply(x);
        if let Some(l) = l {
            y += l.apply(x);
        }
        y * (-I)
    };
    let k1 = f(psi, hloc[0]);
    let k2 = f(&(psi + &k1 * c(h / 2.0, 0.0)), hloc[1]);
    let k3 = f(&(psi + &k2 * c(h / 2.0, 0.0)), hloc[1]);
    let k4 = f(&(psi + &k3 * c(h, 0.0)), hloc[2]);
    let y = psi + (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(h / 6.0, 0.0);
    let n = frob(&y);
    y / c(n, 0.0)
}

/// RK4 integration of the full system under a piecewise-constant drive.
pub fn integrate_full(
    h0: &CouplingHamiltonian,
    drive: &LocalDrive,
    psi0: &BipartiteState,
    dt: f64,
) -> Result<FullTrajectory> {
    let shape = h0.shape();
    if psi0.shape() != shape {
        return Err(Error::KindMismatch { expected: shape.kind, found: psi0.kind() });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Schedule(format!("time step must be positive, got {dt}")));
    }
    let k = drive.kicks.len();
    if drive.breakpoints.len() != k + 1 || drive.hamiltonians.len() != k {
        return Err(Error::Schedule("drive segments and breakpoints do not match".into()));
    }
    for l in drive.hamiltonians.iter().flatten() {
        if l.kind() != shape.kind {
            return Err(Error::Constraint { what: "drive Hamiltonian of the system's kind", defect: 1.0 });
        }
    }
    for u in drive.kicks.iter().flatten() {
        if u.kind() != shape.kind {
            return Err(Error::Constraint { what: "kick of the system's kind", defect: 1.0 });
        }
    }
    let mut psi = psi0.matrix().clone();
    let mut out = FullTrajectory { shape, times: vec![0.0], states: vec![psi.clone()] };
    let mut steps = 0usize;
    for seg in 0..k {
        if let Some(u) = &drive.kicks[seg] {
            psi = u.apply(&psi);
            *out.states.last_mut().expect("non-empty") = psi.clone();
        }
        let (t0, t1) = (drive.breakpoints[seg], drive.breakpoints[seg + 1]);
        let len = t1 - t0;
        let m = if len > 0.0 { (len / dt).ceil().max(1.0) as usize } else { 0 };
        let hl = drive.hamiltonians[seg].as_ref();
        for s in 1..=m {
            psi = rk4_full(h0, &psi, len / m as f64, [hl, hl, hl]);
            steps += 1;
            if steps.is_multiple_of(REPROJECT_EVERY) {
                psi = reproject(shape.kind, psi);
            }
            out.times.push(if s == m { t1 } else { t0 + s as f64 * len / m as f64 });
            out.states.push(psi.clone());
        }
    }
    Ok(out)
}

fn reproject(kind: Kind, psi: CMat) -> CMat {
    if kind == Kind::Distinguishable {
        return psi;
    }
    let p = project_symmetry(kind, &psi);
    let n = frob(&p);
    p / c(n, 0.0)
}

/// Outcome of [`equivalence_check`].
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    /// `max_t ‖sing↓(ψ(t)) − σ↓(t)‖` over regular steps.
    pub max_dev: f64,
    /// `max_t d(ψ(t), U(t)|σ(t)⟩)` in the chosen phase mode.
    pub max_state_dev: f64,
    /// Fraction of steps on which the reduced solution is regular.
    pub regular_fraction: f64,
    /// Largest `‖σ̇ + H_U σ‖` along an uncompensated full solution, with `U`
    /// read off its factorization.
    pub projection_gap: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub steps: usize,
    pub phase_mode: PhaseMode,
}

/// Times at which the projection direction is probed.
const PROJECTION_SAMPLES: usize = 16;

/// Compares the reduced solution with its exact lift integrated in the full system.
///
/// Lift direction: on segment `k` the full state `ψ = U_k|σ(t)⟩` is driven by
/// `H₀ +` the compensating Hamiltonian along the exact reduced flow, and
/// `U_k U_{k−1}*` is applied at each breakpoint. A step touching a point with
/// regularity margin `≤ 1e-6` is not integrated; the state is re-seeded from
/// the lift and the step is excluded from `regular_fraction`.
///
/// Projection direction: the uncompensated drive of the schedule is run in
/// the full system, and the finite-difference velocity of `sing↓(ψ)` is
/// compared with `−H_U σ`.
pub fn equivalence_check(
    h0: &CouplingHamiltonian,
    schedule: &ControlSchedule,
    p0: &SchmidtPoint,
    dt: f64,
    mode: PhaseMode,
) -> Result<EquivalenceReport> {
    let shape = h0.shape();
    if p0.shape() != shape || schedule.shape() != shape {
        return Err(Error::KindMismatch { expected: shape.kind, found: p0.kind() });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Schedule(format!("time step must be positive, got {dt}")));
    }
    let fields = schedule_fields(h0, schedule)?;
    let us = schedule.unitaries();
    let mut sigma = p0.values().clone();
    let mut psi = us[0].apply(&p0.embed());
    let (mut max_dev, mut max_state_dev) = (0.0f64, 0.0f64);
    let (mut steps, mut regular) = (0usize, 0usize);
    let point = |v: &RVec| SchmidtPoint::from_parts(shape, v.clone());
    let compensator = |u: &LocalUnitary, v: &RVec| -> Result<LocalHamiltonian> {
        let h = compensating_hamiltonian(h0, u, None, &point(v))?;
        Ok(if mode == PhaseMode::Insensitive { h.trace_free() } else { h })
    };
    for (k, hstep, m) in schedule.grid(dt) {
        let u = &us[k];
        if k > 0 {
            psi = u.compose(&us[k - 1].adjoint()).apply(&psi);
        }
        let gen = fields[k].matrix();
        let full_step = expm_r(&(gen * hstep));
        let half_step = expm_r(&(gen * (hstep / 2.0)));
        for _ in 0..m {
            let mid = &half_step * &sigma;
            let next = &full_step * &sigma;
            steps += 1;
            let ok = [&sigma, &mid, &next].iter().all(|v| regularity_margin(v.as_slice()) > HARNESS_EPS);
            if ok {
                let h1 = compensator(u, &sigma)?;
                let h2 = compensator(u, &mid)?;
                let h3 = compensator(u, &next)?;
                psi = rk4_full(h0, &psi, hstep, [Some(&h1), Some(&h2), Some(&h3)]);
                psi = reproject(shape.kind, psi);
                regular += 1;
            } else {
                psi = u.apply(&point(&next).embed());
            }
            sigma = next;
            if ok {
                let lifted = u.apply(&point(&sigma).embed());
                let sv = sing_sorted(&BipartiteState::from_parts(shape, psi.clone()));
                let target = point(&sigma).weyl_sorted();
                max_dev = max_dev.max((sv.values() - target.values()).norm());
                max_state_dev = max_state_dev.max(mode.distance(&psi, &lifted));
            }
        }
    }
    let projection_gap = projection_gap(h0, schedule, p0, dt)?;
    Ok(EquivalenceReport {
        max_dev,
        max_state_dev,
        regular_fraction: if steps == 0 { 1.0 } else { regular as f64 / steps as f64 },
        projection_gap,
        dt,
        t: schedule.duration(),
        steps,
        phase_mode: mode,
    })
}

/// Local unitary `U` and Schmidt point `σ` with `ψ = U|σ⟩`.
pub fn local_frame(state: &BipartiteState) -> Result<(LocalUnitary, SchmidtPoint)> {
    let shape = state.shape();
    let psi = state.matrix();
    match shape.kind {
        Kind::Distinguishable => {
            let f = complex_svd(psi)?;
            let u = LocalUnitary::from_parts(shape.kind, f.v.adjoint(), f.w.transpose());
            let v: Vec<f64> = f.sigma.iter().cloned().collect();
            Ok((u, SchmidtPoint::from_parts(shape, RVec::from_vec(v))))
        }
        Kind::Bosonic => {
            let f = takagi(psi)?;
            let v = f.v.adjoint();
            Ok((LocalUnitary::from_parts(shape.kind, v.clone(), v), SchmidtPoint::from_parts(shape, f.sigma)))
        }
        Kind::Fermionic => {
            let f = hua(psi)?;
            let v = f.v.adjoint();
            Ok((LocalUnitary::from_parts(shape.kind, v.clone(), v), SchmidtPoint::from_parts(shape, f.xi * SQRT_2)))
        }
    }
}

/// Largest `‖σ̇ + H_U σ‖` along the uncompensated full solution of the
/// schedule, at regular sample times.
pub fn projection_gap(h0: &CouplingHamiltonian, schedule: &ControlSchedule, p0: &SchmidtPoint, dt: f64) -> Result<f64> {
    let shape = h0.shape();
    let drive = LocalDrive::from_schedule(schedule);
    let psi0 = p0.to_state();
    let traj = integrate_full(h0, &drive, &psi0, dt)?;
    let hm = h0.assemble();
    let eps = 1e-4;
    let prop_p = crate::linalg::hermitian_propagator(&hm, eps);
    let prop_m = crate::linalg::hermitian_propagator(&hm, -eps);
    let stride = (traj.states.len() / PROJECTION_SAMPLES).max(1);
    let mut gap = 0.0f64;
    for idx in (stride / 2..traj.states.len()).step_by(stride) {
        let state = traj.state(idx);
        let (u, sigma) = local_frame(&state)?;
        if regularity_margin(sigma.values().as_slice()) <= 1e-3 {
            continue;
        }
        let v = crate::linalg::vectorize(state.matrix());
        let shift = |p: &CMat| {
            let m = crate::linalg::unvectorize(&(p * &v), shape.d1, shape.d2);
            sing_sorted(&BipartiteState::from_parts(shape, m)).values().clone()
        };
        let fd = (shift(&prop_p) - shift(&prop_m)) / (2.0 * eps);
        let field = induced_field(h0, &u)?;
        gap = gap.max((fd - field.matrix() * sigma.values()).norm());
    }
    Ok(gap)
}
