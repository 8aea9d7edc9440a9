//! Command-line front end: `run(argv)` parses flags, runs one experiment,
//! writes `report.json` (and `trajectory.csv` where applicable) to `--out`
//! and prints a one-line summary.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error, 3 numerical
//! failure (non-regular trajectory, failed verification).

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::factor::{complex_svd, hua, takagi};
use crate::fields::{induced_field, speed_limit_bound, strong_stab_search};
use crate::io;
use crate::lift::{compensating_hamiltonian, equivalence_check, integrate_full, LocalDrive, PhaseMode};
use crate::operators::{CouplingHamiltonian, LocalUnitary};
use crate::reduced::{
    chamber_diameter, control_time_lower_bound, integrate_reduced, lie_rank, reach_sample, ControlSchedule,
};
use crate::sampling;
use crate::states::{BipartiteState, Kind, SchmidtPoint, Shape};
use crate::symlie::verify_lie;

#[derive(Parser, Debug)]
#[command(name = "schmidt", version, about = "Reduced control on the Schmidt sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment file; explicit flags take precedence over its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Drift Hamiltonian JSON.
    #[arg(long, global = true)]
    h0: Option<PathBuf>,
    /// State JSON.
    #[arg(long, global = true)]
    state: Option<PathBuf>,
    /// Control schedule JSON.
    #[arg(long, global = true)]
    schedule: Option<PathBuf>,
    /// Local unitary JSON `{"V", "W"}` for `field`.
    #[arg(long, global = true)]
    unitary: Option<PathBuf>,
    /// Initial Schmidt point, comma separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    sigma0: Option<String>,
    /// Final time; a schedule is rescaled to end here.
    #[arg(long = "T", global = true)]
    t: Option<f64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "schmidt-out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sampling loops.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Sample count for `rank`, `verify-lie` and `stabilize`; trial count for `reach`.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    phase_insensitive: bool,
    /// Print factorization residuals.
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Singular values (or Hua block values) and local unitaries of a state.
    Factorize,
    /// Induced field of H₀ at a local unitary (identity by default).
    Field,
    /// Reduced dynamics along a schedule.
    EvolveReduced,
    /// Full Schrödinger dynamics with the schedule's unitaries as kicks.
    EvolveFull,
    /// Compensating Hamiltonians along the reduced trajectory.
    Lift,
    /// Full-versus-reduced equivalence harness.
    VerifyEquivalence,
    /// Symmetric Lie algebra property checks.
    VerifyLie,
    /// Lie rank of sampled induced fields.
    Rank,
    /// Speed limit and control-time lower bound.
    Bounds,
    /// Monte-Carlo endpoints of random schedules.
    Reach,
    /// Search for a strongly stabilizing local unitary.
    Stabilize,
}

/// Inputs merged from `--config` and explicit flags.
struct Inputs {
    cli: Cli,
    cfg: io::ExperimentConfig,
}

impl Inputs {
    fn h0(&self) -> Result<CouplingHamiltonian> {
        match (&self.cli.h0, &self.cfg.h0) {
            (Some(p), _) => io::load_coupling(p),
            (None, Some(h)) => Ok(h.clone()),
            _ => Err(Error::Config(vec!["--h0: required".into()])),
        }
    }

    fn state(&self) -> Result<Option<BipartiteState>> {
        match (&self.cli.state, &self.cfg.state) {
            (Some(p), _) => io::load_state(p).map(Some),
            (None, s) => Ok(s.clone()),
        }
    }

    fn seed(&self) -> u64 {
        self.cli.seed.or(self.cfg.seed).unwrap_or(0)
    }

    fn t(&self) -> Option<f64> {
        self.cli.t.or(self.cfg.t)
    }

    fn dt(&self) -> Result<f64> {
        let dt = self.cli.dt.or(self.cfg.dt).ok_or_else(|| Error::Config(vec!["--dt: required".into()]))?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(vec![format!("--dt: must be positive, got {dt}")]));
        }
        Ok(dt)
    }

    fn phase(&self) -> PhaseMode {
        if self.cli.phase_insensitive || self.cfg.phase_insensitive {
            PhaseMode::Insensitive
        } else {
            PhaseMode::Sensitive
        }
    }

    /// `--sigma0`, else the sorted Schmidt values of `--state`.
    fn sigma0(&self, shape: &Shape) -> Result<SchmidtPoint> {
        let values = match (&self.cli.sigma0, &self.cfg.sigma0) {
            (Some(s), _) => Some(io::parse_values(s).map_err(|e| tag(e, "--sigma0"))?),
            (None, Some(v)) => Some(v.clone()),
            _ => None,
        };
        match values {
            Some(v) => SchmidtPoint::from_slice(*shape, &v).map_err(|e| Error::Config(vec![format!("--sigma0: {e}")])),
            None => match self.state()? {
                Some(s) if s.shape() == *shape => Ok(s.sing_sorted()),
                Some(_) => Err(Error::Config(vec!["--state: does not match the drift".into()])),
                None => Err(Error::Config(vec!["--sigma0: required (or give --state)".into()])),
            },
        }
    }

    /// `--schedule` rescaled to `--T`, or the identity schedule on `[0, T]`.
    fn schedule(&self, shape: &Shape) -> Result<ControlSchedule> {
        let base = match (&self.cli.schedule, &self.cfg.schedule) {
            (Some(p), _) => Some(io::load_schedule(p, shape)?),
            (None, Some(s)) => Some(s.clone()),
            _ => None,
        };
        match (base, self.t()) {
            (Some(s), Some(t)) if (s.duration() - t).abs() > 1e-15 * t.max(1.0) => s.rescaled(t),
            (Some(s), _) => Ok(s),
            (None, Some(t)) => ControlSchedule::identity(*shape, t),
            (None, None) => Err(Error::Config(vec!["--schedule or --T: required".into()])),
        }
    }

    fn out(&self, name: &str) -> Result<PathBuf> {
        io::output_path(&self.cli.out, name)
    }
}

fn tag(e: Error, flag: &str) -> Error {
    match e {
        Error::Config(list) => Error::Config(list.into_iter().map(|m| format!("{flag}{m}")).collect()),
        other => other,
    }
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonRegular(_) | Error::NonFinite => 3,
        _ => 2,
    }
}

/// Runs the command line `argv` (including the program name) and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let cfg = match &cli.config {
        Some(p) => match io::load_config(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code(&e);
            }
        },
        None => io::ExperimentConfig::default(),
    };
    let jobs = cli.jobs;
    let inputs = Inputs { cli, cfg };
    let result = match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&inputs)),
            Err(e) => Err(Error::Config(vec![format!("--jobs: {e}")])),
        },
        None => dispatch(&inputs),
    };
    match result {
        Ok(Outcome { summary, ok }) => {
            println!("{summary}");
            if ok {
                0
            } else {
                3
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

struct Outcome {
    summary: String,
    ok: bool,
}

impl Outcome {
    fn ok(summary: String) -> Self {
        Outcome { summary, ok: true }
    }
}

fn dispatch(inp: &Inputs) -> Result<Outcome> {
    match inp.cli.command {
        Command::Factorize => factorize(inp),
        Command::Field => field(inp),
        Command::EvolveReduced => evolve_reduced(inp),
        Command::EvolveFull => evolve_full(inp),
        Command::Lift => lift(inp),
        Command::VerifyEquivalence => verify_equivalence(inp),
        Command::VerifyLie => verify_lie_cmd(inp),
        Command::Rank => rank(inp),
        Command::Bounds => bounds(inp),
        Command::Reach => reach(inp),
        Command::Stabilize => stabilize(inp),
    }
}

const ODD_FERMION_NOTE: &str = "odd d: the zero singular value is dropped from the reported values";

fn fmt_values(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.8}")).collect();
    format!("({})", parts.join(", "))
}

fn point_header(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn factorize(inp: &Inputs) -> Result<Outcome> {
    let st = inp.state()?.ok_or_else(|| Error::Config(vec!["--state: required".into()]))?;
    let psi = st.matrix();
    let (report, values, residual, label) = match st.kind() {
        Kind::Distinguishable => {
            let f = complex_svd(psi)?;
            let r = f.residual(psi);
            let v: Vec<f64> = f.sigma.iter().cloned().collect();
            (
                json!({ "kind": "distinguishable", "sigma": v, "V": io::matrix_to_json(&f.v), "W": io::matrix_to_json(&f.w) }),
                v,
                r,
                "sigma",
            )
        }
        Kind::Bosonic => {
            let f = takagi(psi)?;
            let r = f.residual(psi);
            let v: Vec<f64> = f.sigma.iter().cloned().collect();
            (json!({ "kind": "bosonic", "sigma": v, "V": io::matrix_to_json(&f.v) }), v, r, "sigma")
        }
        Kind::Fermionic => {
            let f = hua(psi)?;
            let r = f.residual(psi);
            let v: Vec<f64> = f.xi.iter().cloned().collect();
            let mut rep = json!({ "kind": "fermionic", "xi": v, "V": io::matrix_to_json(&f.v) });
            if psi.nrows() % 2 == 1 {
                rep["note"] = json!(ODD_FERMION_NOTE);
            }
            (rep, v, r, "xi")
        }
    };
    let mut report = report;
    report["residual"] = json!(residual);
    io::write_json(&inp.out("report.json")?, &report)?;
    let mut summary = format!("{label}={}", fmt_values(&values));
    if inp.cli.check {
        summary.push_str(&format!(" residual={residual:.3e}"));
    }
    Ok(Outcome::ok(summary))
}

fn field(inp: &Inputs) -> Result<Outcome> {
    let h0 = inp.h0()?;
    let shape = h0.shape();
    let u = match &inp.cli.unitary {
        Some(p) => io::parse_local_unitary(&io::read_json(p)?, &shape)?,
        None => LocalUnitary::identity(shape),
    };
    let f = induced_field(&h0, &u)?;
    let bound = speed_limit_bound(&h0);
    let report = json!({
        "kind": shape.kind.name(),
        "field": io::real_matrix_to_json(f.matrix()),
        "spectral_norm": f.norm(),
        "speed_limit_bound": bound,
    });
    io::write_json(&inp.out("report.json")?, &report)?;
    Ok(Outcome::ok(format!("field norm={:.8} bound={bound:.8}", f.norm())))
}

fn evolve_reduced(inp: &Inputs) -> Result<Outcome> {
    let h0 = inp.h0()?;
    let shape = h0.shape();
    let sch = inp.schedule(&shape)?;
    let p0 = inp.sigma0(&shape)?;
    let dt = inp.dt()?;
    let tr = integrate_reduced(&h0, &sch, &p0, dt)?;
    let n = shape.reduced_dim();
    let mut header = vec!["t".to_string()];
    header.extend(point_header("s", n));
    let rows: Vec<Vec<f64>> =
        tr.times.iter().zip(&tr.points).map(|(t, p)| std::iter::once(*t).chain(p.iter().cloned()).collect()).collect();
    io::write_csv(&inp.out("trajectory.csv")?, &header, &rows)?;
    let last: Vec<f64> = tr.points.last().expect("non-empty").iter().cloned().collect();
    let report = json!({
        "T": sch.duration(), "dt": dt, "steps": tr.times.len() - 1, "final": last,
        "max_discrete_speed": tr.max_discrete_speed(), "speed_limit_bound": speed_limit_bound(&h0),
    });
    io::write_json(&inp.out("report.json")?, &report)?;
    Ok(Outcome::ok(format!("T={} final={}", sch.duration(), fmt_values(&last))))
}

fn evolve_full(inp: &Inputs) -> Result<Outcome> {
    let h0 = inp.h0()?;
    let shape = h0.shape();
    let sch = inp.schedule(&shape)?;
    let dt = inp.dt()?;
    let psi0 = match inp.state()? {
        Some(s) if s.shape() == shape => s,
        Some(_) => return Err(Error::Config(vec!["--state: does not match the drift".into()])),
        None => inp.sigma0(&shape)?.to_state(),
    };
    let tr = integrate_full(&h0, &LocalDrive::from_schedule(&sch), &psi0, dt)?;
    let (d1, d2) = (shape.d1, shape.d2);
    let mut header = vec!["t".to_string()];
    for part in ["re", "im"] {
        for i in 1..=d1 {
            for j in 1..=d2 {
                header.push(format!("{part}_{i}_{j}"));
            }
        }
    }
    header.extend(point_header("s", shape.reduced_dim()));
    let mut rows = Vec::with_capacity(tr.times.len());
    for (k, t) in tr.times.iter().enumerate() {
        let m = &tr.states[k];
        let mut row = vec![*t];
        row.extend((0..d1).flat_map(|i| (0..d2).map(move |j| m[(i, j)].re)));
        row.extend((0..d1).flat_map(|i| (0..d2).map(move |j| m[(i, j)].im)));
        row.extend(tr.sing_sorted(k).values().iter().cloned());
        rows.push(row);
    }
    io::write_csv(&inp.out("trajectory.csv")?, &header, &rows)?;
    let last: Vec<f64> = tr.sing_sorted(tr.times.len() - 1).values().iter().cloned().collect();
    let mut report = json!({ "T": sch.duration(), "dt": dt, "steps": tr.times.len() - 1, "final_sing": last });
    if shape.kind == Kind::Fermionic && shape.d1 % 2 == 1 {
        report["note"] = json!(ODD_FERMION_NOTE);
    }
    io::write_json(&inp.out("report.json")?, &report)?;
    Ok(Outcome::ok(format!("T={} sing={}", sch.duration(), fmt_values(&last))))
}

fn lift(inp: &Inputs) -> Result<Outcome> {
    let h0 = inp.h0()?;
    let shape = h0.shape();
    let sch = inp.schedule(&shape)?;
    let p0 = inp.sigma0(&shape)?;
    let dt = inp.dt()?;
    let tr = integrate_reduced(&h0, &sch, &p0, dt)?;
    let mut entries = Vec::with_capacity(tr.times.len());
    let mut rows = Vec::with_capacity(tr.times.len());
    for (k, t) in tr.times.iter().enumerate() {
        let seg = tr.segments[k];
        let p = tr.point(k);
        let h = compensating_hamiltonian(&h0, &sch.unitaries()[seg], None, &p).map_err(|e| match e {
            Error::NonRegular(m) => Error::NonRegular(format!("at t={t}: {m}")),
            other => other,
        })?;
        let h = if inp.phase() == PhaseMode::Insensitive { h.trace_free() } else { h };
        rows.push(std::iter::once(*t).chain(p.values().iter().cloned()).chain([h.norm()]).collect::<Vec<f64>>());
        let mut e = io::local_hamiltonian_to_json(&h);
        e["t"] = json!(t);
        e["segment"] = json!(seg);
        entries.push(e);
    }
    let mut header = vec!["t".to_string()];
    header.extend(point_header("s", shape.reduced_dim()));
    header.push("norm_H".into());
    io::write_csv(&inp.out("trajectory.csv")?, &header, &rows)?;
    let max_norm = rows.iter().map(|r| *r.last().expect("non-empty")).fold(0.0, f64::max);
    let report = json!({ "T": sch.duration(), "dt": dt, "max_norm": max_norm, "hamiltonians": entries });
    io::write_json(&inp.out("report.json")?, &report)?;
    Ok(Outcome::ok(format!("lift of {} points, max |H|={max_norm:.6e}", rows.len())))
}

fn verify_equivalence(inp: &Inputs) -> Result<Outcome> {
    let h0 = inp.h0()?;
    let shape = h0.shape();
    let sch = inp.schedule(&shape)?;
    let p0 = inp.sigma0(&shape)?;
    let rep = equivalence_check(&h0, &sch, &p0, inp.dt()?, inp.phase())?;
    io::write_json(&inp.out("report.json")?, &serde_json::to_value(&rep).expect("serializable"))?;
    Ok(Outcome::ok(format!(
        "max_dev={:.3e} regular_fraction={:.6} projection_gap={:.3e}",
        rep.max_dev, rep.regular_fraction, rep.projection_gap
    )))
}

fn verify_lie_cmd(inp: &Inputs) -> Result<Outcome> {
    let shapes = match (&inp.cli.h0, &inp.cfg.h0, inp.state()?) {
        (Some(_), _, _) | (None, Some(_), _) => vec![inp.h0()?.shape()],
        (None, None, Some(s)) => vec![s.shape()],
        _ => vec![Shape::distinguishable(2, 3)?, Shape::bosonic(3)?, Shape::fermionic(4)?, Shape::fermionic(5)?],
    };
    let samples = inp.cli.samples.unwrap_or(100).max(1);
    let mut rng = sampling::rng(inp.seed());
    let mut checks = Vec::new();
    for s in &shapes {
        for chk in verify_lie(s, samples, &mut rng) {
            let mut v = serde_json::to_value(&chk).expect("serializable");
            v["d1"] = json!(s.d1);
            v["d2"] = json!(s.d2);
            checks.push((chk.pass, v));
        }
    }
    let passed = checks.iter().filter(|c| c.0).count();
    let all = checks.len();
    let report = json!({ "samples": samples, "pass": passed == all, "checks": checks.into_iter().map(|c| c.1).collect::<Vec<Value>>() });
    io::write_json(&inp.out("report.json")?, &report)?;
    Ok(Outcome { summary: format!("{passed}/{all} checks passed"), ok: passed == all })
}

fn rank(inp: &Inputs) -> Result<Outcome> {
    let h0 = inp.h0()?;
    let n = h0.shape().reduced_dim();
    let samples = inp.cli.samples.unwrap_or(50).max(1);
    let r = lie_rank(&h0, samples, &mut sampling::rng(inp.seed()))?;
    let full = n * (n - 1) / 2;
    let report = json!({ "rank": r, "so_dim": full, "full_rank": r == full, "samples": samples, "seed": inp.seed() });
    io::write_json(&inp.out("report.json")?, &report)?;
    Ok(Outcome::ok(format!("rank={r} of dim so({n})={full}")))
}

fn bounds(inp: &Inputs) -> Result<Outcome> {
    let h0 = inp.h0()?;
    let n = h0.shape().reduced_dim();
    let b = speed_limit_bound(&h0);
    let t = control_time_lower_bound(&h0);
    let report = json!({
        "speed_limit_bound": b,
        "control_time_lower_bound": if t.is_finite() { json!(t) } else { json!("inf") },
        "chamber_diameter": chamber_diameter(n),
    });
    io::write_json(&inp.out("report.json")?, &report)?;
    Ok(Outcome::ok(format!("speed_limit_bound={b:.12} control_time_lower_bound={t:.12}")))
}

fn reach(inp: &Inputs) -> Result<Outcome> {
    let h0 = inp.h0()?;
    let shape = h0.shape();
    let p0 = inp.sigma0(&shape)?;
    let t = inp.t().ok_or_else(|| Error::Config(vec!["--T: required".into()]))?;
    let trials = inp.cli.samples.unwrap_or(200).max(1);
    let pts = reach_sample(&h0, &p0, t, trials, inp.seed())?;
    let mut header = vec!["trial".to_string()];
    header.extend(point_header("s", shape.reduced_dim()));
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .enumerate()
        .map(|(k, p)| std::iter::once(k as f64).chain(p.values().iter().cloned()).collect())
        .collect();
    io::write_csv(&inp.out("trajectory.csv")?, &header, &rows)?;
    let spread = pts.iter().map(|p| (p.values() - p0.values()).norm()).fold(0.0, f64::max);
    let report = json!({ "T": t, "trials": trials, "seed": inp.seed(), "max_distance_from_start": spread });
    io::write_json(&inp.out("report.json")?, &report)?;
    Ok(Outcome::ok(format!("{trials} endpoints, max distance from start {spread:.6}")))
}

fn stabilize(inp: &Inputs) -> Result<Outcome> {
    let h0 = inp.h0()?;
    let shape = h0.shape();
    let p0 = inp.sigma0(&shape)?;
    let restarts = inp.cli.samples.unwrap_or(16).max(1);
    let st = strong_stab_search(&h0, &p0, restarts, &mut sampling::rng(inp.seed()))?;
    let mut report = io::local_unitary_to_json(&st.u);
    report["residual"] = json!(st.residual);
    report["exact"] = json!(st.exact);
    io::write_json(&inp.out("report.json")?, &report)?;
    Ok(Outcome::ok(format!("residual={:.3e} exact={}", st.residual, st.exact)))
}
