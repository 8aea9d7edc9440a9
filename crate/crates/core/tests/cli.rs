use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const XY: &str =
    r#"{"kind":"distinguishable","factors":[{"E":[[0,1],[1,0]],"F":{"re":[[0,0],[0,0]],"im":[[0,-1],[1,0]]}}]}"#;
const BELL: &str = r#"{"kind":"distinguishable","d1":2,"d2":2,"re":[[0.7071067811865476,0],[0,0.7071067811865476]]}"#;
const IDENTITY: &str = r#"{"breakpoints":[0,1],"controls":[{"type":"identity"}]}"#;

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Self {
        let w = Work { dir: TempDir::new().unwrap() };
        w.file("xy.json", XY);
        w.file("bell.json", BELL);
        w.file("id.json", IDENTITY);
        w
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, body).unwrap();
        p
    }

    /// Runs the binary inside the work directory.
    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_schmidt")).current_dir(self.dir.path()).args(args).output().unwrap()
    }

    fn report(&self, out: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.path(out).join("report.json")).unwrap()).unwrap()
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn bounds_prints_speed_limit_and_control_time() {
    let w = Work::new();
    let o = w.run(&["bounds", "--h0", "xy.json", "--out", "b"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("speed_limit_bound=2.000000000000"));
    let r = w.report("b");
    assert_eq!(r["speed_limit_bound"].as_f64().unwrap(), 2.0);
    assert!((r["control_time_lower_bound"].as_f64().unwrap() - std::f64::consts::FRAC_PI_8).abs() < 1e-15);
    assert!((r["chamber_diameter"].as_f64().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
}

#[test]
fn verify_equivalence_on_the_rotation_experiment() {
    let w = Work::new();
    let o = w.run(&[
        "verify-equivalence",
        "--h0",
        "xy.json",
        "--schedule",
        "id.json",
        "--sigma0",
        "1,0",
        "--T",
        "0.7853981634",
        "--dt",
        "1e-4",
        "--out",
        "eq",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = w.report("eq");
    assert!(r["max_dev"].as_f64().unwrap() <= 1e-6);
    assert!(r["regular_fraction"].as_f64().unwrap() > 0.99);
    assert_eq!(r["dt"].as_f64().unwrap(), 1e-4);
    // the T flag is echoed as given
    assert_eq!(r["T"].as_f64().unwrap(), "0.7853981634".parse::<f64>().unwrap());
}

#[test]
fn factorize_bell_state() {
    let w = Work::new();
    let o = w.run(&["factorize", "--state", "bell.json", "--check", "--out", "f"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("sigma=(0.70710678, 0.70710678) residual="));
    let r = w.report("f");
    for s in r["sigma"].as_array().unwrap() {
        assert!((s.as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }
    assert!(r["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn factorize_odd_fermionic_state_notes_the_dropped_zero() {
    let w = Work::new();
    let mut re = vec![vec![0.0; 5]; 5];
    re[0][1] = 0.6;
    re[1][0] = -0.6;
    re[2][3] = 0.8;
    re[3][2] = -0.8;
    w.file("f5.json", &json!({ "kind": "fermionic", "d1": 5, "d2": 5, "re": re, "normalize": true }).to_string());
    let o = w.run(&["factorize", "--state", "f5.json", "--out", "f"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = w.report("f");
    let xi: Vec<f64> = r["xi"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(xi.len(), 2);
    assert!(xi[0] >= xi[1]);
    assert!((xi[0] / xi[1] - 0.8 / 0.6).abs() < 1e-12);
    assert!(r["note"].as_str().unwrap().contains("zero singular value"));
}

#[test]
fn field_of_xy_at_identity() {
    let w = Work::new();
    let o = w.run(&["field", "--h0", "xy.json", "--out", "fd"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = w.report("fd");
    assert_eq!(r["field"], json!([[0.0, -1.0], [1.0, 0.0]]));
    assert!((r["spectral_norm"].as_f64().unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn field_with_a_given_unitary() {
    let w = Work::new();
    // V = W = X swaps the basis and flips the rotation
    w.file("u.json", r#"{"V":[[0,1],[1,0]],"W":[[0,1],[1,0]]}"#);
    let o = w.run(&["field", "--h0", "xy.json", "--unitary", "u.json", "--out", "fd"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(w.report("fd")["field"], json!([[0.0, 1.0], [-1.0, 0.0]]));
}

#[test]
fn evolve_reduced_reaches_the_bell_point() {
    let w = Work::new();
    let o = w.run(&[
        "evolve-reduced",
        "--h0",
        "xy.json",
        "--sigma0",
        "1,0",
        "--T",
        "0.7853981633974483",
        "--dt",
        "1e-3",
        "--out",
        "r",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(&w.path("r").join("trajectory.csv"));
    assert_eq!(rows[0], vec!["t", "s1", "s2"]);
    let last = rows.last().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((last[1].parse::<f64>().unwrap() - h).abs() < 1e-12);
    assert!((last[2].parse::<f64>().unwrap() - h).abs() < 1e-12);
    // 17 significant digits
    assert!(rows[1][1].contains('e') && rows[1][1].split('e').next().unwrap().len() >= 18);
}

#[test]
fn evolve_full_matches_the_rotation() {
    let w = Work::new();
    let o =
        w.run(&["evolve-full", "--h0", "xy.json", "--sigma0", "1,0", "--T", "0.5", "--dt", "1e-3", "--out", "full"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(&w.path("full").join("trajectory.csv"));
    assert_eq!(rows[0].len(), 1 + 8 + 2);
    assert_eq!(rows[0][1], "re_1_1");
    let last = rows.last().unwrap();
    let t: f64 = last[0].parse().unwrap();
    assert!((last[9].parse::<f64>().unwrap() - t.cos()).abs() < 1e-9);
    assert!((last[10].parse::<f64>().unwrap() - t.sin()).abs() < 1e-9);
}

#[test]
fn lift_from_a_regular_point_and_from_an_edge() {
    let w = Work::new();
    let o = w.run(&[
        "lift",
        "--h0",
        "xy.json",
        "--sigma0",
        "0.9,0.4358898943540674",
        "--T",
        "0.2",
        "--dt",
        "0.05",
        "--out",
        "l",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = w.report("l");
    let hs = r["hamiltonians"].as_array().unwrap();
    assert_eq!(hs.len(), 5);
    assert!(hs[0].get("E").is_some() && hs[0].get("F").is_some());
    // σ₂ = 0 is not regular
    let o = w.run(&["lift", "--h0", "xy.json", "--sigma0", "1,0", "--T", "0.2", "--dt", "0.05", "--out", "l2"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("regular"), "{}", stderr(&o));
}

#[test]
fn verify_lie_passes() {
    let w = Work::new();
    let o = w.run(&["verify-lie", "--samples", "20", "--out", "v"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = w.report("v");
    assert_eq!(r["pass"], json!(true));
    assert_eq!(r["checks"].as_array().unwrap().len(), 40);
}

#[test]
fn rank_reach_and_stabilize() {
    let w = Work::new();
    let o = w.run(&["rank", "--h0", "xy.json", "--out", "rk"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(w.report("rk")["rank"], json!(1));

    let o = w.run(&["reach", "--h0", "xy.json", "--sigma0", "1,0", "--T", "1", "--samples", "20", "--out", "re"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(csv_rows(&w.path("re").join("trajectory.csv")).len(), 21);

    let o = w.run(&["stabilize", "--h0", "xy.json", "--sigma0", "0.8,0.6", "--out", "st"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = w.report("st");
    assert!(r["residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn same_seed_gives_byte_identical_output() {
    let w = Work::new();
    for out in ["a", "b"] {
        let o = w.run(&[
            "reach",
            "--h0",
            "xy.json",
            "--sigma0",
            "0.8,0.6",
            "--T",
            "2",
            "--samples",
            "30",
            "--seed",
            "7",
            "--out",
            out,
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let a = fs::read(w.path("a").join("trajectory.csv")).unwrap();
    let b = fs::read(w.path("b").join("trajectory.csv")).unwrap();
    assert_eq!(a, b);
    let o = w.run(&[
        "reach",
        "--h0",
        "xy.json",
        "--sigma0",
        "0.8,0.6",
        "--T",
        "2",
        "--samples",
        "30",
        "--seed",
        "8",
        "--out",
        "c",
    ]);
    assert_eq!(code(&o), 0);
    assert_ne!(a, fs::read(w.path("c").join("trajectory.csv")).unwrap());
    // the thread count does not change the result
    let o = w.run(&[
        "reach",
        "--h0",
        "xy.json",
        "--sigma0",
        "0.8,0.6",
        "--T",
        "2",
        "--samples",
        "30",
        "--seed",
        "7",
        "--jobs",
        "3",
        "--out",
        "d",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(a, fs::read(w.path("d").join("trajectory.csv")).unwrap());
}

#[test]
fn config_file_and_flag_precedence() {
    let w = Work::new();
    w.file("exp.json", r#"{"h0":"xy.json","schedule":"id.json","sigma0":[1,0],"T":0.7853981633974483,"dt":0.001}"#);
    let o = w.run(&["evolve-reduced", "--config", "exp.json", "--out", "c1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(w.report("c1")["steps"], json!(786));
    let o = w.run(&["evolve-reduced", "--config", "exp.json", "--dt", "0.01", "--out", "c2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(w.report("c2")["steps"], json!(79));
}

#[test]
fn validation_errors_name_their_paths() {
    let w = Work::new();
    w.file("nokind.json", r#"{"factors":[{"E":[[0,1],[1,0]],"F":[[1,0],[0,1]]}]}"#);
    let o = w.run(&["bounds", "--h0", "nokind.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("kind: missing"), "{}", stderr(&o));

    w.file(
        "bad.json",
        r#"{"kind":"distinguishable","factors":[{"E":[[0,1],[1,0]],"F":[[1,0],[0,1]]},{"E":[[0,1],[0,0]],"F":[[1,0],[0,1]]}]}"#,
    );
    let o = w.run(&["bounds", "--h0", "bad.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("factors[1].E: not Hermitian"), "{}", stderr(&o));

    // [re, im] pairs are accepted
    w.file("pairs.json", r#"{"kind":"distinguishable","factors":[{"E":[[[0,0],[1,0]],[[1,0],[0,0]]],"F":[[[0,0],[0,-1]],[[0,1],[0,0]]]}]}"#);
    let o = w.run(&["bounds", "--h0", "pairs.json", "--out", "p"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(w.report("p")["speed_limit_bound"].as_f64().unwrap(), 2.0);

    w.file("exp.json", r#"{"h0":"xy.json","bogus":1}"#);
    let o = w.run(&["bounds", "--config", "exp.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));

    let o = w.run(&["bounds"]);
    assert_eq!(code(&o), 2);
    let o = w.run(&["evolve-reduced", "--h0", "xy.json", "--sigma0", "1,0", "--T", "1", "--dt=-1"]);
    assert_eq!(code(&o), 2);
    let o = w.run(&["evolve-reduced", "--h0", "xy.json", "--sigma0", "0.5,0.5", "--T", "1", "--dt", "0.1"]);
    assert_eq!(code(&o), 2, "unnormalized sigma0");
}

#[test]
fn usage_errors_exit_with_one() {
    let w = Work::new();
    let o = w.run(&["frobnicate"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).to_lowercase().contains("usage"));
    let o = w.run(&[]);
    assert_eq!(code(&o), 1);
    let o = w.run(&["bounds", "--no-such-flag"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn written_configs_load_back_unchanged() {
    use schmidt_sphere::io;
    use schmidt_sphere::sampling;
    use schmidt_sphere::{Kind, Shape};
    let w = Work::new();
    let mut r = sampling::rng(3);
    for kind in [Kind::Distinguishable, Kind::Bosonic, Kind::Fermionic] {
        let d = if kind == Kind::Fermionic { 4 } else { 3 };
        let h0 = sampling::random_coupling(kind, d, d, 2, &mut r);
        let p = w.path("h.json");
        io::write_json(&p, &io::coupling_to_json(&h0)).unwrap();
        assert_eq!(io::load_coupling(&p).unwrap().assemble(), h0.assemble());
        let st = sampling::random_state(&Shape::new(kind, d, d).unwrap(), &mut r);
        io::write_json(&p, &io::state_to_json(&st)).unwrap();
        assert_eq!(io::load_state(&p).unwrap().matrix(), st.matrix());
    }
}
