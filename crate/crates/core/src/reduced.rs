//! Reduced dynamics `σ̇ = −H_{U(t)} σ` under piecewise-constant local
//! controls, the operator lift `Ṙ = −H_U R`, Lie-rank tests and Weyl-chamber
//! geometry.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{induced_field, speed_limit_bound, InducedField};
use crate::linalg::{commutator_r, expm_r, RMat, RVec};
use crate::operators::{CouplingHamiltonian, LocalHamiltonian, LocalUnitary};
use crate::sampling;
use crate::states::{SchmidtPoint, Shape};

/// Control on one segment of a schedule.
#[derive(Clone, Debug, PartialEq)]
pub enum SegmentControl {
    Identity,
    Unitary(LocalUnitary),
    /// Constant generator `G`; the segment unitary is `exp(−iG)`.
    Generator(LocalHamiltonian),
}

/// Piecewise-constant local control `U(t)` on `0 = t₀ < … < t_K = T`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSchedule {
    shape: Shape,
    breakpoints: Vec<f64>,
    controls: Vec<SegmentControl>,
    unitaries: Vec<LocalUnitary>,
}

impl ControlSchedule {
    pub fn new(shape: Shape, breakpoints: Vec<f64>, controls: Vec<SegmentControl>) -> Result<Self> {
        if breakpoints.len() != controls.len() + 1 || controls.is_empty() {
            return Err(Error::Schedule(format!("{} breakpoints for {} segments", breakpoints.len(), controls.len())));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::Schedule("the first breakpoint must be 0".into()));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) || breakpoints.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Schedule("breakpoints must be finite and non-decreasing".into()));
        }
        let mut unitaries = Vec::with_capacity(controls.len());
        for (k, c) in controls.iter().enumerate() {
            let u = match c {
                SegmentControl::Identity => LocalUnitary::identity(shape),
                SegmentControl::Unitary(u) => u.clone(),
                SegmentControl::Generator(g) => g.propagator(1.0),
            };
            if u.kind() != shape.kind || u.v().nrows() != shape.d1 || u.w().nrows() != shape.d2 {
                return Err(Error::Schedule(format!("segment {k}: control does not match the system")));
            }
            let defect = u.unitarity_defect();
            if defect > crate::operators::UNITARY_TOL {
                return Err(Error::Schedule(format!("segment {k}: not unitary, defect {defect:.3e}")));
            }
            unitaries.push(u);
        }
        Ok(ControlSchedule { shape, breakpoints, controls, unitaries })
    }

    /// A single segment holding `u` on `[0, T]`.
    pub fn constant(u: LocalUnitary, t: f64) -> Result<Self> {
        let shape = Shape::new(u.kind(), u.v().nrows(), u.w().nrows())?;
        ControlSchedule::new(shape, vec![0.0, t], vec![SegmentControl::Unitary(u)])
    }

    pub fn identity(shape: Shape, t: f64) -> Result<Self> {
        ControlSchedule::new(shape, vec![0.0, t], vec![SegmentControl::Identity])
    }

    /// `k` Haar-random segments with uniformly random breakpoints.
    pub fn random<R: Rng + ?Sized>(shape: Shape, t: f64, k: usize, rng: &mut R) -> Self {
        let mut cuts: Vec<f64> = (1..k).map(|_| rng.random::<f64>() * t).collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut bp = vec![0.0];
        bp.extend(cuts);
        bp.push(t);
        let controls = (0..k).map(|_| SegmentControl::Unitary(sampling::random_local_unitary(&shape, rng))).collect();
        ControlSchedule::new(shape, bp, controls).expect("valid by construction")
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn controls(&self) -> &[SegmentControl] {
        &self.controls
    }

    /// Segment unitaries.
    pub fn unitaries(&self) -> &[LocalUnitary] {
        &self.unitaries
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn duration(&self) -> f64 {
        *self.breakpoints.last().expect("non-empty")
    }

    /// Same controls with all durations scaled so the schedule ends at `t`.
    pub fn rescaled(&self, t: f64) -> Result<Self> {
        let total = self.duration();
        if total <= 0.0 {
            return Err(Error::Schedule("cannot rescale a schedule of zero length".into()));
        }
        let bp = self.breakpoints.iter().map(|b| b * t / total).collect();
        ControlSchedule::new(self.shape, bp, self.controls.clone())
    }

    /// Index of the segment active at time `t` (right-continuous).
    pub fn segment_at(&self, t: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= t);
        k.saturating_sub(1).min(self.len() - 1)
    }

    /// Uniform subdivision of each segment into steps no longer than `dt`.
    pub(crate) fn grid(&self, dt: f64) -> Vec<(usize, f64, usize)> {
        (0..self.len())
            .map(|k| {
                let len = self.breakpoints[k + 1] - self.breakpoints[k];
                let m = if len > 0.0 { (len / dt).ceil().max(1.0) as usize } else { 0 };
                (k, if m > 0 { len / m as f64 } else { 0.0 }, m)
            })
            .collect()
    }
}

/// One-step method for the per-segment linear flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    /// Exact `exp(h M)` per step.
    Exponential,
    /// Classical Runge–Kutta of order 4 with renormalization.
    Rk4,
}

/// Exponentials are used up to this reduced dimension.
pub const EXPM_MAX_DIM: usize = 32;

/// Sampled reduced trajectory.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub shape: Shape,
    pub times: Vec<f64>,
    pub points: Vec<RVec>,
    /// Active segment at each sample.
    pub segments: Vec<usize>,
}

impl Trajectory {
    pub fn point(&self, k: usize) -> SchmidtPoint {
        SchmidtPoint::from_parts(self.shape, self.points[k].clone())
    }

    pub fn last(&self) -> SchmidtPoint {
        self.point(self.points.len() - 1)
    }

    /// Largest `‖σ(t+dt) − σ(t)‖ / dt` over the grid.
    pub fn max_discrete_speed(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.points.windows(2))
            .filter(|(t, _)| t[1] > t[0])
            .map(|(t, p)| (&p[1] - &p[0]).norm() / (t[1] - t[0]))
            .fold(0.0, f64::max)
    }
}

fn rk4_step(m: &RMat, x: &RVec, h: f64) -> RVec {
    let k1 = m * x;
    let k2 = m * (x + &k1 * (h / 2.0));
    let k3 = m * (x + &k2 * (h / 2.0));
    let k4 = m * (x + &k3 * h);
    let y = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    let n = y.norm();
    y / n
}

/// Per-segment induced fields of a schedule.
pub fn schedule_fields(h0: &CouplingHamiltonian, schedule: &ControlSchedule) -> Result<Vec<InducedField>> {
    if h0.shape() != schedule.shape() {
        return Err(Error::KindMismatch { expected: h0.kind(), found: schedule.shape().kind });
    }
    schedule.unitaries().iter().map(|u| induced_field(h0, u)).collect()
}

/// Integrates `σ̇ = −H_{U(t)} σ` with the exponential integrator (`n ≤ 32`)
/// or RK4 beyond.
pub fn integrate_reduced(
    h0: &CouplingHamiltonian,
    schedule: &ControlSchedule,
    p0: &SchmidtPoint,
    dt: f64,
) -> Result<Trajectory> {
    let method = if p0.dim() <= EXPM_MAX_DIM { Integrator::Exponential } else { Integrator::Rk4 };
    integrate_reduced_with(h0, schedule, p0, dt, method)
}

pub fn integrate_reduced_with(
    h0: &CouplingHamiltonian,
    schedule: &ControlSchedule,
    p0: &SchmidtPoint,
    dt: f64,
    method: Integrator,
) -> Result<Trajectory> {
    if p0.shape() != h0.shape() {
        return Err(Error::KindMismatch { expected: h0.kind(), found: p0.kind() });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Schedule(format!("time step must be positive, got {dt}")));
    }
    let fields = schedule_fields(h0, schedule)?;
    let mut x = p0.values().clone();
    let mut traj = Trajectory { shape: p0.shape(), times: vec![0.0], points: vec![x.clone()], segments: vec![0] };
    for (k, h, m) in schedule.grid(dt) {
        let gen = fields[k].matrix();
        let t0 = schedule.breakpoints()[k];
        let step = expm_r(&(gen * h));
        for s in 1..=m {
            x = match method {
                Integrator::Exponential => &step * &x,
                Integrator::Rk4 => rk4_step(gen, &x, h),
            };
            traj.times.push(if s == m { schedule.breakpoints()[k + 1] } else { t0 + s as f64 * h });
            traj.points.push(x.clone());
            traj.segments.push(k);
        }
    }
    Ok(traj)
}

/// Sampled operator lift `R(t) ∈ SO(n)`, `R(0) = 𝟙`.
#[derive(Clone, Debug)]
pub struct LiftTrajectory {
    pub times: Vec<f64>,
    pub rotations: Vec<RMat>,
}

pub fn integrate_lift(h0: &CouplingHamiltonian, schedule: &ControlSchedule, dt: f64) -> Result<LiftTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Schedule(format!("time step must be positive, got {dt}")));
    }
    let fields = schedule_fields(h0, schedule)?;
    let n = h0.shape().reduced_dim();
    let mut r = RMat::identity(n, n);
    let mut out = LiftTrajectory { times: vec![0.0], rotations: vec![r.clone()] };
    for (k, h, m) in schedule.grid(dt) {
        let step = expm_r(&(fields[k].matrix() * h));
        for s in 1..=m {
            r = &step * r;
            out.times.push(if s == m {
                schedule.breakpoints()[k + 1]
            } else {
                schedule.breakpoints()[k] + s as f64 * h
            });
            out.rotations.push(r.clone());
        }
    }
    Ok(out)
}

/// Coordinates of a skew matrix in the orthonormal basis `(e_ij − e_ji)/√2`, `i < j`.
fn skew_coords(m: &RMat) -> RVec {
    let n = m.nrows();
    let mut v = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            v.push((m[(i, j)] - m[(j, i)]) * std::f64::consts::FRAC_1_SQRT_2);
        }
    }
    RVec::from_vec(v)
}

/// Rank tolerance of the commutator closure.
pub const LIE_RANK_TOL: f64 = 1e-9;

/// Dimension of the Lie algebra generated by skew matrices.
pub fn lie_closure_dim(generators: &[RMat]) -> usize {
    let Some(first) = generators.first() else { return 0 };
    let n = first.nrows();
    let full = n * (n - 1) / 2;
    let scale = generators.iter().map(|g| g.amax()).fold(0.0, f64::max);
    if scale == 0.0 || full == 0 {
        return 0;
    }
    let mut basis: Vec<RMat> = Vec::new();
    let mut coords: Vec<RVec> = Vec::new();
    let push = |m: &RMat, basis: &mut Vec<RMat>, coords: &mut Vec<RVec>| -> bool {
        let mut v = skew_coords(m);
        let n0 = v.norm();
        if n0 == 0.0 {
            return false;
        }
        v /= n0;
        for _ in 0..2 {
            for b in coords.iter() {
                let p = b.dot(&v);
                v -= b * p;
            }
        }
        let r = v.norm();
        if r <= LIE_RANK_TOL {
            return false;
        }
        v /= r;
        // rebuild the matrix from orthonormalized coordinates
        let mut mm = RMat::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                mm[(i, j)] = v[k] * std::f64::consts::FRAC_1_SQRT_2;
                mm[(j, i)] = -v[k] * std::f64::consts::FRAC_1_SQRT_2;
                k += 1;
            }
        }
        basis.push(mm);
        coords.push(v);
        true
    };
    for g in generators {
        if basis.len() == full {
            break;
        }
        push(&(g / scale), &mut basis, &mut coords);
    }
    let mut i = 0;
    while i < basis.len() && basis.len() < full {
        for j in 0..i {
            let c = commutator_r(&basis[i], &basis[j]);
            push(&c, &mut basis, &mut coords);
            if basis.len() == full {
                break;
            }
        }
        i += 1;
    }
    basis.len()
}

/// Dimension of the Lie algebra generated by `samples` random induced fields.
pub fn lie_rank<R: Rng + ?Sized>(h0: &CouplingHamiltonian, samples: usize, rng: &mut R) -> Result<usize> {
    if samples == 0 {
        return Err(Error::Size("lie_rank needs at least one sample".into()));
    }
    let shape = h0.shape();
    // fields at rounding level count as zero
    let floor = 1e-12 * speed_limit_bound(h0).max(1.0);
    let mut fields = Vec::with_capacity(samples);
    for _ in 0..samples {
        let u = sampling::random_local_unitary(&shape, rng);
        let f = induced_field(h0, &u)?.into_matrix();
        if f.amax() > floor {
            fields.push(f);
        }
    }
    Ok(lie_closure_dim(&fields))
}

/// Geodesic distance `arccos(pᵀq)` on the unit sphere.
pub fn chamber_distance(p: &RVec, q: &RVec) -> f64 {
    p.dot(q).clamp(-1.0, 1.0).acos()
}

/// Diameter `arccos(1/√n)` of the Weyl chamber in `S^{n−1}`.
pub fn chamber_diameter(n: usize) -> f64 {
    (1.0 / (n as f64).sqrt()).acos()
}

/// `π / (4 · speed_limit_bound)`, infinite for a local drift.
pub fn control_time_lower_bound(h0: &CouplingHamiltonian) -> f64 {
    let b = speed_limit_bound(h0);
    if b == 0.0 {
        f64::INFINITY
    } else {
        std::f64::consts::FRAC_PI_4 / b
    }
}

/// Segments per random schedule in [`reach_sample`].
pub const REACH_SEGMENTS: usize = 8;

/// Endpoints of `trials` random piecewise-constant schedules of length `t`.
///
/// Trial `k` draws from its own stream of `seed`, so the cloud does not depend
/// on the thread count.
pub fn reach_sample(
    h0: &CouplingHamiltonian,
    p0: &SchmidtPoint,
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<SchmidtPoint>> {
    if trials == 0 {
        return Err(Error::Size("reach_sample needs at least one trial".into()));
    }
    if p0.shape() != h0.shape() {
        return Err(Error::KindMismatch { expected: h0.kind(), found: p0.kind() });
    }
    if t == 0.0 {
        return Ok(vec![p0.clone(); trials]);
    }
    let shape = h0.shape();
    (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = sampling::stream(seed, k);
            let schedule = ControlSchedule::random(shape, t, REACH_SEGMENTS, &mut rng);
            let fields = schedule_fields(h0, &schedule)?;
            let mut x = p0.values().clone();
            for (f, w) in fields.iter().zip(schedule.breakpoints().windows(2)) {
                x = expm_r(&(f.matrix() * (w[1] - w[0]))) * x;
            }
            let n = x.norm();
            Ok(SchmidtPoint::from_parts(shape, x / n))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;
    use crate::operators::pauli::{x, y};
    use crate::states::Kind;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

    fn xy() -> CouplingHamiltonian {
        CouplingHamiltonian::new(Kind::Distinguishable, 2, 2, vec![(x(), y())]).unwrap()
    }

    fn s22() -> Shape {
        Shape::distinguishable(2, 2).unwrap()
    }

    #[test]
    fn xy_rotation_reaches_bell_point() {
        let sch = ControlSchedule::identity(s22(), FRAC_PI_4).unwrap();
        let p0 = SchmidtPoint::from_slice(s22(), &[1.0, 0.0]).unwrap();
        let tr = integrate_reduced(&xy(), &sch, &p0, 1e-3).unwrap();
        let end = tr.last();
        assert_abs_diff_eq!(end.values()[0], FRAC_PI_4.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(end.values()[1], FRAC_PI_4.sin(), epsilon = 1e-12);
        for p in &tr.points {
            assert_abs_diff_eq!(p.norm(), 1.0, epsilon = 1e-12);
        }
        assert_eq!(*tr.times.last().unwrap(), FRAC_PI_4);
    }

    #[test]
    fn local_drift_freezes_points() {
        let mut r = sampling::rng(1);
        let h = sampling::random_local_coupling(Kind::Bosonic, 3, 3, &mut r);
        let sch = ControlSchedule::random(h.shape(), 2.0, 4, &mut r);
        let p0 = sampling::random_point(&h.shape(), &mut r);
        let tr = integrate_reduced(&h, &sch, &p0, 0.01).unwrap();
        for p in &tr.points {
            assert!((p - p0.values()).amax() < 1e-12);
        }
    }

    #[test]
    fn rk4_matches_exponential() {
        let mut r = sampling::rng(2);
        let h = sampling::random_coupling(Kind::Distinguishable, 3, 3, 2, &mut r);
        let sch = ControlSchedule::random(h.shape(), 1.0, 3, &mut r);
        let p0 = sampling::random_point(&h.shape(), &mut r);
        let a = integrate_reduced_with(&h, &sch, &p0, 1e-3, Integrator::Exponential).unwrap();
        let b = integrate_reduced_with(&h, &sch, &p0, 1e-3, Integrator::Rk4).unwrap();
        assert_eq!(a.times, b.times);
        for (x, y) in a.points.iter().zip(&b.points) {
            assert!((x - y).amax() < 1e-12);
        }
    }

    #[test]
    fn lift_is_consistent() {
        let mut r = sampling::rng(3);
        let h = sampling::random_coupling(Kind::Fermionic, 6, 6, 2, &mut r);
        let sch = ControlSchedule::random(h.shape(), 1.5, 4, &mut r);
        let p0 = sampling::random_point(&h.shape(), &mut r);
        let tr = integrate_reduced(&h, &sch, &p0, 0.01).unwrap();
        let lift = integrate_lift(&h, &sch, 0.01).unwrap();
        assert_eq!(tr.times, lift.times);
        for (p, rm) in tr.points.iter().zip(&lift.rotations) {
            assert!((rm * p0.values() - p).amax() < 1e-10);
            assert!((rm.transpose() * rm - RMat::identity(3, 3)).amax() < 1e-8);
        }
        assert_abs_diff_eq!(lift.rotations.last().unwrap().determinant(), 1.0, epsilon = 1e-10);
        // single segment: R(t) = exp(−tH_U)
        let u = sampling::random_local_unitary(&h.shape(), &mut r);
        let one = integrate_lift(&h, &ControlSchedule::constant(u.clone(), 0.7).unwrap(), 0.1).unwrap();
        let f = induced_field(&h, &u).unwrap();
        assert!((one.rotations.last().unwrap() - expm_r(&(f.matrix() * 0.7))).amax() < 1e-12);
    }

    #[test]
    fn zero_field_lift_is_identity() {
        let h = CouplingHamiltonian::zero(s22());
        let lift = integrate_lift(&h, &ControlSchedule::identity(s22(), 1.0).unwrap(), 0.1).unwrap();
        assert!(lift.rotations.iter().all(|r| r == &RMat::identity(2, 2)));
    }

    #[test]
    fn schedule_validation() {
        let id = LocalUnitary::identity(s22());
        assert!(ControlSchedule::new(s22(), vec![0.0, 1.0, 0.5], vec![SegmentControl::Identity; 2]).is_err());
        assert!(ControlSchedule::new(s22(), vec![0.1, 1.0], vec![SegmentControl::Identity]).is_err());
        assert!(ControlSchedule::new(s22(), vec![0.0, 1.0], vec![]).is_err());
        let bad =
            LocalUnitary::from_parts(Kind::Distinguishable, identity(2) * crate::linalg::c(2.0, 0.0), identity(2));
        assert!(ControlSchedule::new(s22(), vec![0.0, 1.0], vec![SegmentControl::Unitary(bad)]).is_err());
        let sch = ControlSchedule::new(
            s22(),
            vec![0.0, 1.0, 3.0],
            vec![SegmentControl::Unitary(id), SegmentControl::Identity],
        )
        .unwrap();
        assert_eq!(sch.segment_at(0.5), 0);
        assert_eq!(sch.segment_at(1.0), 1);
        assert_eq!(sch.segment_at(3.0), 1);
        assert_eq!(sch.rescaled(1.5).unwrap().breakpoints(), &[0.0, 0.5, 1.5]);
        let g = LocalHamiltonian::distinguishable(x(), y()).unwrap();
        let sch = ControlSchedule::new(s22(), vec![0.0, 1.0], vec![SegmentControl::Generator(g.clone())]).unwrap();
        assert_eq!(sch.unitaries()[0], g.propagator(1.0));
    }

    #[test]
    fn lie_rank_examples() {
        let mut r = sampling::rng(4);
        let loc = sampling::random_local_coupling(Kind::Distinguishable, 3, 3, &mut r);
        assert_eq!(lie_rank(&loc, 10, &mut r).unwrap(), 0);
        assert_eq!(lie_rank(&xy(), 5, &mut r).unwrap(), 1);
        let h = sampling::random_coupling(Kind::Distinguishable, 3, 3, 1, &mut r);
        assert_eq!(lie_rank(&h, 50, &mut r).unwrap(), 3);
        // single generator of so(3) spans only itself
        let g = RMat::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(lie_closure_dim(&[g.clone(), g * 2.0]), 1);
    }

    #[test]
    fn geometry() {
        assert_abs_diff_eq!(chamber_diameter(2), FRAC_PI_4, epsilon = 2.0 * f64::EPSILON);
        assert_abs_diff_eq!(chamber_diameter(4), PI / 3.0, epsilon = 2.0 * f64::EPSILON);
        let e1 = RVec::from_vec(vec![1.0, 0.0]);
        let e2 = RVec::from_vec(vec![0.0, 1.0]);
        assert_abs_diff_eq!(chamber_distance(&e1, &e2), PI / 2.0);
        assert_abs_diff_eq!(control_time_lower_bound(&xy()), FRAC_PI_8, epsilon = 1e-15);
        assert_eq!(control_time_lower_bound(&CouplingHamiltonian::zero(s22())), f64::INFINITY);
    }

    #[test]
    fn reach_examples() {
        let p0 = SchmidtPoint::from_slice(s22(), &[1.0, 0.0]).unwrap();
        let pts = reach_sample(&xy(), &p0, 0.0, 3, 0).unwrap();
        assert!(pts.iter().all(|p| p == &p0));
        let loc = CouplingHamiltonian::local(Kind::Distinguishable, 2, 2, &[x()], &[y()]).unwrap();
        let pts = reach_sample(&loc, &p0, 3.0, 20, 0).unwrap();
        assert!(pts.iter().all(|p| (p.values() - p0.values()).amax() < 1e-12));
        let a = reach_sample(&xy(), &p0, 3.0, 20, 5).unwrap();
        let b = reach_sample(&xy(), &p0, 3.0, 20, 5).unwrap();
        assert_eq!(a, b);
    }
}
