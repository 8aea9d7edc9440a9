//! JSON and CSV input/output.
//!
//! Matrices are written as `{"re": [[..]], "im": [[..]]}` (row-major). On
//! input a matrix may also be a nested array of `[re, im]` pairs or of plain
//! real numbers. Parsers collect every problem with its path and report them
//! together as [`Error::Config`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::linalg::{c, frob, hermitian_defect, unitary_defect, CMat};
use crate::operators::{CouplingHamiltonian, LocalHamiltonian, LocalUnitary, HERMITIAN_TOL, UNITARY_TOL};
use crate::reduced::{ControlSchedule, SegmentControl};
use crate::states::{BipartiteState, Kind, Shape};

/// Accumulates validation problems with their paths.
#[derive(Default)]
struct Issues(Vec<String>);

impl Issues {
    fn push(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.0.push(format!("{path}: {msg}"));
    }

    fn finish<T>(self, value: Option<T>) -> Result<T> {
        match value {
            Some(v) if self.0.is_empty() => Ok(v),
            _ if self.0.is_empty() => Err(Error::Config(vec!["invalid input".into()])),
            _ => Err(Error::Config(self.0)),
        }
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn field<'a>(v: &'a Value, path: &str, key: &str, issues: &mut Issues) -> Option<&'a Value> {
    match v.get(key) {
        Some(x) => Some(x),
        None => {
            issues.push(&join(path, key), "missing");
            None
        }
    }
}

fn kind_at(v: &Value, path: &str, issues: &mut Issues) -> Option<Kind> {
    let x = field(v, path, "kind", issues)?;
    match x.as_str().map(str::parse::<Kind>) {
        Some(Ok(k)) => Some(k),
        _ => {
            issues.push(
                &join(path, "kind"),
                format!("expected one of \"distinguishable\", \"bosonic\", \"fermionic\", got {x}"),
            );
            None
        }
    }
}

fn usize_at(v: &Value, path: &str, key: &str, issues: &mut Issues) -> Option<usize> {
    let x = v.get(key)?;
    match x.as_u64() {
        Some(n) => Some(n as usize),
        None => {
            issues.push(&join(path, key), format!("expected a non-negative integer, got {x}"));
            None
        }
    }
}

fn number(x: &Value, path: &str, issues: &mut Issues) -> Option<f64> {
    match x.as_f64() {
        Some(f) if f.is_finite() => Some(f),
        _ => {
            issues.push(path, format!("expected a finite number, got {x}"));
            None
        }
    }
}

fn real_rows(x: &Value, path: &str, issues: &mut Issues) -> Option<Vec<Vec<f64>>> {
    let rows = match x.as_array() {
        Some(r) => r,
        None => {
            issues.push(path, "expected an array of rows");
            return None;
        }
    };
    let mut out = Vec::with_capacity(rows.len());
    let mut ok = true;
    for (i, row) in rows.iter().enumerate() {
        let p = format!("{path}[{i}]");
        match row.as_array() {
            Some(entries) => {
                let vals: Vec<Option<f64>> =
                    entries.iter().enumerate().map(|(j, e)| number(e, &format!("{p}[{j}]"), issues)).collect();
                ok &= vals.iter().all(Option::is_some);
                out.push(vals.into_iter().flatten().collect());
            }
            None => {
                issues.push(&p, "expected an array");
                ok = false;
            }
        }
    }
    ok.then_some(out)
}

fn rectangular(rows: &[Vec<f64>], path: &str, issues: &mut Issues) -> Option<(usize, usize)> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        issues.push(path, "empty matrix");
        return None;
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
        issues.push(path, format!("row {i} has {} entries, expected {m}", r.len()));
        return None;
    }
    Some((n, m))
}

/// Parses a complex matrix in any of the accepted layouts.
fn matrix_at(x: &Value, path: &str, issues: &mut Issues) -> Option<CMat> {
    if let Some(obj) = x.as_object() {
        let re = match obj.get("re") {
            Some(r) => real_rows(r, &join(path, "re"), issues)?,
            None => {
                issues.push(&join(path, "re"), "missing");
                return None;
            }
        };
        let (n, m) = rectangular(&re, &join(path, "re"), issues)?;
        let im = match obj.get("im") {
            Some(i) => {
                let im = real_rows(i, &join(path, "im"), issues)?;
                if rectangular(&im, &join(path, "im"), issues)? != (n, m) {
                    issues.push(&join(path, "im"), format!("shape differs from re ({n}×{m})"));
                    return None;
                }
                im
            }
            None => vec![vec![0.0; m]; n],
        };
        return Some(CMat::from_fn(n, m, |i, j| c(re[i][j], im[i][j])));
    }
    let rows = match x.as_array() {
        Some(r) if !r.is_empty() => r,
        _ => {
            issues.push(path, "expected a matrix: {\"re\", \"im\"}, rows of [re, im] pairs, or rows of numbers");
            return None;
        }
    };
    let paired = rows.iter().any(|r| r.as_array().is_some_and(|e| e.iter().any(Value::is_array)));
    if !paired {
        let re = real_rows(x, path, issues)?;
        let (n, m) = rectangular(&re, path, issues)?;
        return Some(CMat::from_fn(n, m, |i, j| c(re[i][j], 0.0)));
    }
    let mut entries: Vec<Vec<crate::linalg::C64>> = Vec::new();
    let mut ok = true;
    for (i, row) in rows.iter().enumerate() {
        let mut out = Vec::new();
        for (j, e) in row.as_array().map(Vec::as_slice).unwrap_or(&[]).iter().enumerate() {
            let p = format!("{path}[{i}][{j}]");
            match e.as_array().map(Vec::as_slice) {
                Some([a, b]) => match (number(a, &format!("{p}[0]"), issues), number(b, &format!("{p}[1]"), issues)) {
                    (Some(a), Some(b)) => out.push(c(a, b)),
                    _ => ok = false,
                },
                _ => {
                    issues.push(&p, format!("expected an [re, im] pair, got {e}"));
                    ok = false;
                }
            }
        }
        entries.push(out);
    }
    if !ok {
        return None;
    }
    let m = entries[0].len();
    if m == 0 || entries.iter().any(|r| r.len() != m) {
        issues.push(path, "rows of unequal or zero length");
        return None;
    }
    Some(CMat::from_fn(entries.len(), m, |i, j| entries[i][j]))
}

fn hermitian_at(x: &Value, path: &str, d: Option<usize>, issues: &mut Issues) -> Option<CMat> {
    let m = matrix_at(x, path, issues)?;
    if !m.is_square() {
        issues.push(path, format!("not square: {}×{}", m.nrows(), m.ncols()));
        return None;
    }
    if let Some(d) = d {
        if m.nrows() != d {
            issues.push(path, format!("expected {d}×{d}, got {}×{}", m.nrows(), m.ncols()));
            return None;
        }
    }
    let defect = hermitian_defect(&m);
    if defect > HERMITIAN_TOL * frob(&m).max(1.0) {
        issues.push(path, format!("not Hermitian: defect {defect:.3e}"));
        return None;
    }
    Some(m)
}

fn unitary_at(x: &Value, path: &str, d: usize, issues: &mut Issues) -> Option<CMat> {
    let m = matrix_at(x, path, issues)?;
    if m.shape() != (d, d) {
        issues.push(path, format!("expected {d}×{d}, got {}×{}", m.nrows(), m.ncols()));
        return None;
    }
    let defect = unitary_defect(&m);
    if defect > UNITARY_TOL {
        issues.push(path, format!("not unitary: defect {defect:.3e}"));
        return None;
    }
    Some(m)
}

fn bool_at(v: &Value, path: &str, key: &str, issues: &mut Issues) -> bool {
    match v.get(key) {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(x) => {
            issues.push(&join(path, key), format!("expected a boolean, got {x}"));
            false
        }
    }
}

fn state_at(v: &Value, path: &str, issues: &mut Issues) -> Option<BipartiteState> {
    let kind = kind_at(v, path, issues);
    let d1 = usize_at(v, path, "d1", issues);
    let d2 = usize_at(v, path, "d2", issues);
    let normalize = bool_at(v, path, "normalize", issues);
    let m = if let Some(coeffs) = v.get("coeffs") {
        matrix_at(coeffs, &join(path, "coeffs"), issues)
    } else {
        let re = field(v, path, "re", issues);
        let mut obj = Map::new();
        if let Some(re) = re {
            obj.insert("re".into(), re.clone());
        }
        if let Some(im) = v.get("im") {
            obj.insert("im".into(), im.clone());
        }
        if re.is_some() {
            matrix_at(&Value::Object(obj), path, issues)
        } else {
            None
        }
    };
    let (kind, m) = (kind?, m?);
    for (key, d, got) in [("d1", d1, m.nrows()), ("d2", d2, m.ncols())] {
        if let Some(d) = d {
            if d != got {
                issues.push(&join(path, key), format!("is {d} but the coefficient matrix has {got}"));
            }
        }
    }
    if let Err(e) = Shape::new(kind, m.nrows(), m.ncols()) {
        issues.push(path, e);
        return None;
    }
    let built = if normalize { BipartiteState::renormalized(kind, m) } else { BipartiteState::new(kind, m) };
    match built {
        Ok(s) => Some(s),
        Err(e) => {
            let msg = match &e {
                Error::Normalization(n) => format!("norm is {n:.12}, expected 1 (set \"normalize\": true to rescale)"),
                _ => e.to_string(),
            };
            issues.push(path, msg);
            None
        }
    }
}

fn coupling_at(v: &Value, path: &str, issues: &mut Issues) -> Option<CouplingHamiltonian> {
    let kind = kind_at(v, path, issues);
    let d1 = usize_at(v, path, "d1", issues);
    let d2 = usize_at(v, path, "d2", issues);
    let symmetrize = bool_at(v, path, "symmetrize", issues);
    let factors = match field(v, path, "factors", issues).map(|f| f.as_array()) {
        Some(Some(f)) => f,
        Some(None) => {
            issues.push(&join(path, "factors"), "expected an array");
            return None;
        }
        None => return None,
    };
    let mut pairs = Vec::new();
    let mut ok = true;
    let (mut d1, mut d2) = (d1, d2);
    for (k, fac) in factors.iter().enumerate() {
        let p = format!("{}[{k}]", join(path, "factors"));
        let e = field(fac, &p, "E", issues).and_then(|x| hermitian_at(x, &join(&p, "E"), d1, issues));
        let f = field(fac, &p, "F", issues).and_then(|x| hermitian_at(x, &join(&p, "F"), d2, issues));
        match (e, f) {
            (Some(e), Some(f)) => {
                d1.get_or_insert(e.nrows());
                d2.get_or_insert(f.nrows());
                pairs.push((e, f));
            }
            _ => ok = false,
        }
    }
    let kind = kind?;
    if !ok {
        return None;
    }
    let (d1, d2) = match (d1, d2) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            issues.push(path, "no factors given: \"d1\" and \"d2\" are required");
            return None;
        }
    };
    let built = if symmetrize {
        if d1 != d2 {
            issues.push(path, "symmetrize needs equal dimensions");
            return None;
        }
        CouplingHamiltonian::symmetrized(kind, d1, pairs)
    } else {
        CouplingHamiltonian::new(kind, d1, d2, pairs)
    };
    match built {
        Ok(h) => Some(h),
        Err(e) => {
            issues.push(path, format!("{e} (set \"symmetrize\": true to symmetrize the factors)"));
            None
        }
    }
}

fn control_at(v: &Value, path: &str, shape: &Shape, issues: &mut Issues) -> Option<SegmentControl> {
    let ty = v.get("type").and_then(Value::as_str).unwrap_or(if v.get("V").is_some() {
        "unitary"
    } else if v.get("E").is_some() {
        "generator"
    } else {
        "identity"
    });
    let indist = shape.kind.is_indistinguishable();
    match ty {
        "identity" => Some(SegmentControl::Identity),
        "unitary" => {
            let vv = field(v, path, "V", issues).and_then(|x| unitary_at(x, &join(path, "V"), shape.d1, issues));
            let ww = match (indist, v.get("W")) {
                (true, Some(_)) => {
                    issues.push(&join(path, "W"), "not allowed for indistinguishable particles (W = V)");
                    None
                }
                (true, None) => vv.clone(),
                (false, _) => {
                    field(v, path, "W", issues).and_then(|x| unitary_at(x, &join(path, "W"), shape.d2, issues))
                }
            };
            Some(SegmentControl::Unitary(LocalUnitary::new(shape.kind, vv?, ww?).ok()?))
        }
        "generator" => {
            let e = field(v, path, "E", issues).and_then(|x| hermitian_at(x, &join(path, "E"), Some(shape.d1), issues));
            let f = match (indist, v.get("F")) {
                (true, Some(_)) => {
                    issues.push(&join(path, "F"), "not allowed for indistinguishable particles (F = E)");
                    None
                }
                (true, None) => e.clone(),
                (false, _) => {
                    field(v, path, "F", issues).and_then(|x| hermitian_at(x, &join(path, "F"), Some(shape.d2), issues))
                }
            };
            Some(SegmentControl::Generator(LocalHamiltonian::new(shape.kind, e?, f?).ok()?))
        }
        other => {
            issues.push(&join(path, "type"), format!("unknown control type {other:?}"));
            None
        }
    }
}

fn schedule_at(v: &Value, path: &str, shape: &Shape, issues: &mut Issues) -> Option<ControlSchedule> {
    if v.get("kind").is_some() {
        if let Some(k) = kind_at(v, path, issues) {
            if k != shape.kind {
                issues.push(
                    &join(path, "kind"),
                    format!("{} does not match the drift ({})", k.name(), shape.kind.name()),
                );
            }
        }
    }
    let controls = match field(v, path, "controls", issues).map(Value::as_array) {
        Some(Some(c)) => c,
        Some(None) => {
            issues.push(&join(path, "controls"), "expected an array");
            return None;
        }
        None => return None,
    };
    let breakpoints: Option<Vec<f64>> = match (v.get("breakpoints"), v.get("durations")) {
        (Some(b), None) => b.as_array().map(|b| {
            b.iter()
                .enumerate()
                .filter_map(|(i, x)| number(x, &format!("{}[{i}]", join(path, "breakpoints")), issues))
                .collect()
        }),
        (None, Some(d)) => d.as_array().map(|d| {
            let mut acc = vec![0.0];
            for (i, x) in d.iter().enumerate() {
                if let Some(x) = number(x, &format!("{}[{i}]", join(path, "durations")), issues) {
                    acc.push(acc.last().unwrap() + x);
                }
            }
            acc
        }),
        (Some(_), Some(_)) => {
            issues.push(path, "give either \"breakpoints\" or \"durations\", not both");
            None
        }
        (None, None) => {
            issues.push(&join(path, "breakpoints"), "missing");
            None
        }
    };
    let parsed: Vec<Option<SegmentControl>> = controls
        .iter()
        .enumerate()
        .map(|(k, c)| control_at(c, &format!("{}[{k}]", join(path, "controls")), shape, issues))
        .collect();
    let breakpoints = breakpoints?;
    let parsed: Option<Vec<SegmentControl>> = parsed.into_iter().collect();
    match ControlSchedule::new(*shape, breakpoints, parsed?) {
        Ok(s) => Some(s),
        Err(e) => {
            issues.push(path, e);
            None
        }
    }
}

/// Parses a state object.
pub fn parse_state(v: &Value) -> Result<BipartiteState> {
    let mut issues = Issues::default();
    let s = state_at(v, "", &mut issues);
    issues.finish(s)
}

/// Parses a drift Hamiltonian object.
pub fn parse_coupling(v: &Value) -> Result<CouplingHamiltonian> {
    let mut issues = Issues::default();
    let h = coupling_at(v, "", &mut issues);
    issues.finish(h)
}

/// Parses a schedule object for a system of the given shape.
pub fn parse_schedule(v: &Value, shape: &Shape) -> Result<ControlSchedule> {
    let mut issues = Issues::default();
    let s = schedule_at(v, "", shape, &mut issues);
    issues.finish(s)
}

/// Parses a local unitary `{"V": .., "W": ..}` (`W` omitted for indistinguishable kinds).
pub fn parse_local_unitary(v: &Value, shape: &Shape) -> Result<LocalUnitary> {
    let mut issues = Issues::default();
    let obj = match v {
        Value::Object(m) => {
            let mut m = m.clone();
            m.insert("type".into(), json!("unitary"));
            Value::Object(m)
        }
        _ => v.clone(),
    };
    let u = control_at(&obj, "", shape, &mut issues).and_then(|c| match c {
        SegmentControl::Unitary(u) => Some(u),
        _ => None,
    });
    issues.finish(u)
}

/// Parses comma-separated values such as `"1,0"`.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let mut issues = Issues::default();
    let vals: Vec<Option<f64>> = text
        .split(',')
        .enumerate()
        .map(|(i, s)| match s.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            _ => {
                issues.push(&format!("[{i}]"), format!("not a finite number: {:?}", s.trim()));
                None
            }
        })
        .collect();
    let vals: Option<Vec<f64>> = vals.into_iter().collect();
    issues.finish(vals)
}

/// Validated experiment description.
#[derive(Clone, Debug, Default)]
pub struct ExperimentConfig {
    pub h0: Option<CouplingHamiltonian>,
    pub state: Option<BipartiteState>,
    pub schedule: Option<ControlSchedule>,
    pub sigma0: Option<Vec<f64>>,
    pub t: Option<f64>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub phase_insensitive: bool,
}

const CONFIG_KEYS: [&str; 8] = ["h0", "state", "schedule", "sigma0", "T", "dt", "seed", "phase_insensitive"];

fn inline_or_file(v: &Value, base: &Path, path: &str, issues: &mut Issues) -> Option<Value> {
    match v.as_str() {
        Some(file) => match read_json(&base.join(file)) {
            Ok(x) => Some(x),
            Err(e) => {
                issues.push(path, e);
                None
            }
        },
        None => Some(v.clone()),
    }
}

/// Parses an experiment object. String values of `h0`, `state` and
/// `schedule` are file names relative to `base`.
pub fn parse_config(v: &Value, base: &Path) -> Result<ExperimentConfig> {
    let mut issues = Issues::default();
    let obj = match v.as_object() {
        Some(o) => o,
        None => return Err(Error::Config(vec!["top level: expected an object".into()])),
    };
    for key in obj.keys() {
        if !CONFIG_KEYS.contains(&key.as_str()) {
            issues.push(key, format!("unknown key (expected one of {})", CONFIG_KEYS.join(", ")));
        }
    }
    let mut cfg = ExperimentConfig::default();
    if let Some(x) = obj.get("h0").and_then(|x| inline_or_file(x, base, "h0", &mut issues)) {
        cfg.h0 = coupling_at(&x, "h0", &mut issues);
    }
    if let Some(x) = obj.get("state").and_then(|x| inline_or_file(x, base, "state", &mut issues)) {
        cfg.state = state_at(&x, "state", &mut issues);
    }
    if let Some(x) = obj.get("schedule").and_then(|x| inline_or_file(x, base, "schedule", &mut issues)) {
        match &cfg.h0 {
            Some(h) => cfg.schedule = schedule_at(&x, "schedule", &h.shape(), &mut issues),
            None if obj.contains_key("h0") => {}
            None => issues.push("schedule", "needs \"h0\" to fix the system"),
        }
    }
    if let Some(x) = obj.get("sigma0") {
        cfg.sigma0 = match x.as_array() {
            Some(a) => a.iter().enumerate().map(|(i, e)| number(e, &format!("sigma0[{i}]"), &mut issues)).collect(),
            None => {
                issues.push("sigma0", "expected an array of numbers");
                None
            }
        };
    }
    for (key, slot) in [("T", &mut cfg.t), ("dt", &mut cfg.dt)] {
        if let Some(x) = obj.get(key) {
            match number(x, key, &mut issues) {
                Some(f) if f > 0.0 => *slot = Some(f),
                Some(f) => issues.push(key, format!("must be positive, got {f}")),
                None => {}
            }
        }
    }
    if let Some(x) = obj.get("seed") {
        cfg.seed = x.as_u64();
        if cfg.seed.is_none() {
            issues.push("seed", format!("expected a non-negative integer, got {x}"));
        }
    }
    cfg.phase_insensitive = bool_at(v, "", "phase_insensitive", &mut issues);
    issues.finish(Some(cfg))
}

/// Reads and validates an experiment file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let v = read_json(path)?;
    parse_config(&v, path.parent().unwrap_or(Path::new(".")))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(vec![format!("{}: invalid JSON: {e}", path.display())]))
}

pub fn load_state(path: &Path) -> Result<BipartiteState> {
    parse_state(&read_json(path)?).map_err(|e| prefix(e, path))
}

pub fn load_coupling(path: &Path) -> Result<CouplingHamiltonian> {
    parse_coupling(&read_json(path)?).map_err(|e| prefix(e, path))
}

pub fn load_schedule(path: &Path, shape: &Shape) -> Result<ControlSchedule> {
    parse_schedule(&read_json(path)?, shape).map_err(|e| prefix(e, path))
}

fn prefix(e: Error, path: &Path) -> Error {
    match e {
        Error::Config(list) => Error::Config(list.into_iter().map(|m| format!("{}: {m}", path.display())).collect()),
        other => other,
    }
}

/// `{"re": [[..]], "im": [[..]]}`.
pub fn matrix_to_json(m: &CMat) -> Value {
    let part = |f: fn(&crate::linalg::C64) -> f64| -> Value {
        Value::Array(
            (0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| json!(f(&m[(i, j)]))).collect())).collect(),
        )
    };
    json!({ "re": part(|z| z.re), "im": part(|z| z.im) })
}

pub fn real_matrix_to_json(m: &crate::linalg::RMat) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| json!(m[(i, j)])).collect())).collect())
}

pub fn state_to_json(s: &BipartiteState) -> Value {
    let mut v = matrix_to_json(s.matrix());
    let obj = v.as_object_mut().expect("object");
    obj.insert("kind".into(), json!(s.kind().name()));
    obj.insert("d1".into(), json!(s.d1()));
    obj.insert("d2".into(), json!(s.d2()));
    v
}

pub fn coupling_to_json(h: &CouplingHamiltonian) -> Value {
    let s = h.shape();
    let factors: Vec<Value> =
        h.factors().iter().map(|(e, f)| json!({ "E": matrix_to_json(e), "F": matrix_to_json(f) })).collect();
    json!({ "kind": s.kind.name(), "d1": s.d1, "d2": s.d2, "factors": factors })
}

pub fn local_unitary_to_json(u: &LocalUnitary) -> Value {
    json!({ "V": matrix_to_json(u.v()), "W": matrix_to_json(u.w()) })
}

pub fn local_hamiltonian_to_json(h: &LocalHamiltonian) -> Value {
    json!({ "E": matrix_to_json(h.e()), "F": matrix_to_json(h.f()) })
}

pub fn schedule_to_json(s: &ControlSchedule) -> Value {
    let indist = s.shape().kind.is_indistinguishable();
    let controls: Vec<Value> = s
        .controls()
        .iter()
        .map(|c| match c {
            SegmentControl::Identity => json!({ "type": "identity" }),
            SegmentControl::Unitary(u) if indist => json!({ "type": "unitary", "V": matrix_to_json(u.v()) }),
            SegmentControl::Unitary(u) => {
                json!({ "type": "unitary", "V": matrix_to_json(u.v()), "W": matrix_to_json(u.w()) })
            }
            SegmentControl::Generator(g) if indist => json!({ "type": "generator", "E": matrix_to_json(g.e()) }),
            SegmentControl::Generator(g) => {
                json!({ "type": "generator", "E": matrix_to_json(g.e()), "F": matrix_to_json(g.f()) })
            }
        })
        .collect();
    json!({ "kind": s.shape().kind.name(), "breakpoints": s.breakpoints(), "controls": controls })
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).expect("serializable");
    std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Formats with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a CSV file with a header row and 17-significant-digit values.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt17(x)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    std::fs::write(path, out).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Creates the output directory if needed and returns the path of `name` in it.
pub fn output_path(dir: &Path, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir.join(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::pauli::{x, y};
    use crate::sampling::{self, rng};

    #[test]
    fn missing_kind_is_named() {
        let v = json!({ "re": [[1.0, 0.0], [0.0, 0.0]] });
        match parse_state(&v) {
            Err(Error::Config(list)) => assert!(list.iter().any(|m| m.starts_with("kind: missing")), "{list:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pair_entries_accepted() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = json!({ "kind": "distinguishable", "coeffs": [[[h, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, h]]] });
        let s = parse_state(&v).unwrap();
        assert_eq!(s.matrix()[(1, 1)], c(0.0, h));
        let v = json!({ "kind": "distinguishable", "d1": 2, "d2": 2, "re": [[h, 0.0], [0.0, h]], "im": [[0.0, 0.0], [0.0, 0.0]] });
        assert!(parse_state(&v).is_ok());
    }

    #[test]
    fn every_error_reported_with_path() {
        let bad = json!({
            "kind": "distinguishable",
            "factors": [
                { "E": [[1.0, 0.0], [0.0, 1.0]], "F": [[0.0, 1.0], [0.0, 0.0]] },
                { "E": [[1.0, 0.0], [0.0]], "F": [[1.0, 0.0], [0.0, 1.0]] },
                { "E": [[1.0, 0.0], [0.0, 1.0]], "F": [[0.0, [1.0, 3e-4]], [[1.0, 0.0], 0.0]] },
                { "F": [[1.0, 0.0], [0.0, 1.0]] }
            ]
        });
        match parse_coupling(&bad) {
            Err(Error::Config(list)) => {
                assert!(list.iter().any(|m| m.starts_with("factors[0].F: not Hermitian")), "{list:?}");
                assert!(list.iter().any(|m| m.starts_with("factors[1].E: row 1")), "{list:?}");
                assert!(list.iter().any(|m| m.starts_with("factors[2].F")), "{list:?}");
                assert!(list.iter().any(|m| m.starts_with("factors[3].E: missing")), "{list:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trips() {
        let mut r = rng(1);
        for (kind, d1, d2) in [(Kind::Distinguishable, 2, 3), (Kind::Bosonic, 3, 3), (Kind::Fermionic, 4, 4)] {
            let shape = Shape::new(kind, d1, d2).unwrap();
            let st = sampling::random_state(&shape, &mut r);
            let text = serde_json::to_string(&state_to_json(&st)).unwrap();
            assert_eq!(parse_state(&serde_json::from_str(&text).unwrap()).unwrap(), st);
            let h0 = sampling::random_coupling(kind, d1, d2, 2, &mut r);
            let text = serde_json::to_string(&coupling_to_json(&h0)).unwrap();
            assert_eq!(parse_coupling(&serde_json::from_str(&text).unwrap()).unwrap(), h0);
            let mut sch = ControlSchedule::random(shape, 1.3, 3, &mut r);
            let g = LocalHamiltonian::new(
                kind,
                sampling::random_hermitian(d1, &mut r),
                sampling::random_hermitian(d2, &mut r),
            );
            if let Ok(g) = g {
                let mut controls = sch.controls().to_vec();
                controls.push(SegmentControl::Generator(g));
                controls.push(SegmentControl::Identity);
                let mut bp = sch.breakpoints().to_vec();
                bp.extend([1.5, 2.0]);
                sch = ControlSchedule::new(shape, bp, controls).unwrap();
            }
            let text = serde_json::to_string(&schedule_to_json(&sch)).unwrap();
            assert_eq!(parse_schedule(&serde_json::from_str(&text).unwrap(), &shape).unwrap(), sch);
        }
    }

    #[test]
    fn config_with_files_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let h0 = CouplingHamiltonian::new(Kind::Distinguishable, 2, 2, vec![(x(), y())]).unwrap();
        write_json(&dir.path().join("h0.json"), &coupling_to_json(&h0)).unwrap();
        let cfg = json!({ "h0": "h0.json", "schedule": { "durations": [0.5, 0.25], "controls": [{}, { "type": "identity" }] },
                          "sigma0": [1.0, 0.0], "T": 0.75, "dt": 1e-3, "seed": 4 });
        write_json(&dir.path().join("cfg.json"), &cfg).unwrap();
        let c = load_config(&dir.path().join("cfg.json")).unwrap();
        assert_eq!(c.h0.unwrap(), h0);
        assert_eq!(c.schedule.unwrap().breakpoints(), &[0.0, 0.5, 0.75]);
        assert_eq!(c.seed, Some(4));
        let bad = json!({ "h0": "nope.json", "T": -1.0, "dt": "x", "extra": 1 });
        match parse_config(&bad, dir.path()) {
            Err(Error::Config(list)) => assert_eq!(list.len(), 4, "{list:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn values_and_csv() {
        assert_eq!(parse_values("1, 0").unwrap(), vec![1.0, 0.0]);
        assert!(matches!(parse_values("1,a"), Err(Error::Config(_))));
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt17(0.1).parse::<f64>().unwrap(), 0.1);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, &["t".into(), "s1".into()], &[vec![0.0, 1.0], vec![0.5, 0.25]]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("t,s1\n"));
    }
}
