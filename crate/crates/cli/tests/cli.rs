//! Runs the `maskstl` binary end to end.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maskstl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exited")
}

fn temp_file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn eval_example_one() {
    let csv = data("example1.csv");
    let v = json_ok(&["eval", "F[1,3] (s > 0)", csv.to_str().unwrap(), "--padding", "last"]);
    assert_eq!(v["value"], json!(3.0));
    assert_eq!(v["engine"], json!("masking"));
    assert_eq!(v["mode"], json!("hard"));
    assert_eq!(v["L"], json!(8));
}

#[test]
fn trace_example_one() {
    let csv = data("example1.csv");
    let csv = csv.to_str().unwrap();
    let v = json_ok(&["trace", "F[1,3] (s > 0)", csv]);
    assert_eq!(v, json!([3.0, 4.0, 5.0, 6.0, 7.0, 7.0, 7.0, 7.0]));
    let v = json_ok(&["trace", "F[1,3] (s > 0)", csv, "--padding=const:-1e5"]);
    assert_eq!(v, json!([3.0, 4.0, 5.0, 6.0, 7.0, 7.0, 7.0, -100000.0]));
}

#[test]
fn true_and_single_row() {
    let csv = data("two_channel.csv");
    let v = json_ok(&["eval", "TRUE", csv.to_str().unwrap()]);
    assert_eq!(v["value"], json!(1e5));
    let one = temp_file("x\n0.25\n");
    let v = json_ok(&["trace", "G (x > 0)", one.path().to_str().unwrap()]);
    assert_eq!(v, json!([0.25]));
}

#[test]
fn engines_agree_on_shipped_data() {
    let formulas = [
        ("example1.csv", "F[1,3] (s > 0)"),
        ("example1.csv", "G (s > 2) | F[0,2] (s < 1)"),
        ("example1.csv", "(s > 1) U[1,4] (s > 5)"),
        ("two_channel.csv", "G[0,5] (x > -0.5) & F (y < 0)"),
        ("two_channel.csv", "(x > 0) U (y < 0.5)"),
        ("two_channel.csv", "F G[2,4] ~(x < 0.3)"),
    ];
    for (file, f) in formulas {
        let csv = data(file);
        for padding in ["last", "const:-2"] {
            let vals: Vec<Value> = ["masking", "recurrent", "reference"]
                .iter()
                .map(|e| json_ok(&["trace", f, csv.to_str().unwrap(), "--engine", e, "--padding", padding]))
                .collect();
            for v in &vals[1..] {
                let (a, b) = (vals[0].as_array().unwrap(), v.as_array().unwrap());
                assert_eq!(a.len(), b.len());
                for (x, y) in a.iter().zip(b) {
                    assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() <= 1e-9, "{f}");
                }
            }
        }
    }
}

#[test]
fn smooth_modes_are_accepted() {
    let csv = data("two_channel.csv");
    let v = json_ok(&[
        "eval",
        "F (x > 0.5)",
        csv.to_str().unwrap(),
        "--mode",
        "lse",
        "--temp",
        "4",
    ]);
    assert_eq!(v["mode"], json!({"lse": 4.0}));
}

#[test]
fn input_errors_exit_2() {
    let csv = data("example1.csv");
    let csv = csv.to_str().unwrap();
    let out = run(&["eval", "F (q > 0) & G (r < 1)", csv]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("\"q\"") && err.contains("\"r\""), "{err}");
    assert_eq!(code(&["eval", "F[3,1] (s > 0)", csv]), 2);
    assert_eq!(code(&["eval", "F (s >", csv]), 2);
    let bad = temp_file("s\n1\nnope\n");
    assert_eq!(code(&["eval", "F (s > 0)", bad.path().to_str().unwrap()]), 2);
    assert_eq!(code(&["eval", "F (s > 0)", "/nonexistent.csv"]), 2);
    assert_eq!(code(&["eval", "F (s > 0)", csv, "--padding", "zero"]), 2);
    assert_eq!(code(&["eval", "F (s > 0)", csv, "--mode", "lse", "--temp", "-1"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
}

#[test]
fn bench_report_and_reps_check() {
    let v = json_ok(&["bench", "--sizes", "16", "--formulas", "1,3", "--no-grad"]);
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 4);
    assert!(entries
        .iter()
        .all(|e| e["median_ns"].as_f64().unwrap() > 0.0 && e["reps"] == json!(10)));
    assert_eq!(v["relative"].as_array().unwrap().len(), 2);
    assert_eq!(code(&["bench", "--reps", "0"]), 2);
    assert_eq!(code(&["bench", "--formulas", "7"]), 2);
}

#[test]
fn mine_generated_and_contour() {
    let v = json_ok(&["mine", "--generate", "42"]);
    let (a, b) = (v["final"]["a"].as_f64().unwrap(), v["final"]["b"].as_f64().unwrap());
    assert!((a - 0.23).abs() <= 0.05 && (b - 0.59).abs() <= 0.05, "({a}, {b})");
    assert_eq!(v["seed"], json!(42));
    assert_eq!(v["history"].as_array().unwrap().len(), 5000);
    assert_eq!(v["config"]["gamma"], json!(0.15));

    let cfg = temp_file("steps = 5\n");
    let dir = tempfile::tempdir().unwrap();
    let contour = dir.path().join("grid.csv");
    let v = json_ok(&[
        "mine",
        "--config",
        cfg.path().to_str().unwrap(),
        "--contour",
        "50",
        "--contour-out",
        contour.to_str().unwrap(),
    ]);
    assert_eq!(v["contour_rows"], json!(1225));
    let text = std::fs::read_to_string(&contour).unwrap();
    assert_eq!(text.lines().next(), Some("a,b,loss"));
    assert_eq!(text.lines().count(), 1226);
}

#[test]
fn mine_from_csv_and_bad_config() {
    let d = temp_file("s0,s1\n0,0\n1,1\n1,1\n1,1\n0,0\n");
    let cfg = temp_file("steps = 20\n");
    let v = json_ok(&[
        "mine",
        "--data",
        d.path().to_str().unwrap(),
        "--config",
        cfg.path().to_str().unwrap(),
    ]);
    assert!(v["final"]["a"].as_f64().unwrap() < v["final"]["b"].as_f64().unwrap());
    let bad = temp_file("gamma = -1\n");
    assert_eq!(code(&["mine", "--config", bad.path().to_str().unwrap()]), 2);
    let typo = temp_file("stpes = 3\n");
    assert_eq!(code(&["mine", "--config", typo.path().to_str().unwrap()]), 2);
}

#[test]
fn plan_default_and_states_csv() {
    let dir = tempfile::tempdir().unwrap();
    let states = dir.path().join("states.csv");
    let cfg = data("plan.toml");
    let v = json_ok(&[
        "plan",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "0",
        "--states",
        states.to_str().unwrap(),
    ]);
    let f = &v["final"];
    assert!(f["hard_robustness"].as_f64().unwrap() >= 0.0);
    assert!(f["b"].as_f64().unwrap() - f["a"].as_f64().unwrap() >= 0.2);
    let text = std::fs::read_to_string(&states).unwrap();
    assert_eq!(text.lines().next(), Some("t,x,y"));
    assert_eq!(text.lines().count(), 53);
    // same seed, same output
    assert_eq!(v, json_ok(&["plan", "--config", cfg.to_str().unwrap(), "--seed", "0"]));
}

#[test]
fn plan_without_stl_term_rests() {
    let cfg = temp_file("gammas = [0.0, 0.0, 2.0, 0.5]\nlearning_rate = 25.0\nsteps = 300\n");
    let v = json_ok(&["plan", "--config", cfg.path().to_str().unwrap()]);
    for u in v["final"]["controls"].as_array().unwrap() {
        assert!(u[0].as_f64().unwrap().abs() < 1e-3 && u[1].as_f64().unwrap().abs() < 1e-3);
    }
}

#[test]
fn plan_errors() {
    assert_eq!(code(&["plan", "--config", "/nonexistent/plan.toml"]), 2);
    let diverge = temp_file("learning_rate = 1e300\nsteps = 5\n");
    assert_eq!(code(&["plan", "--config", diverge.path().to_str().unwrap()]), 3);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let csv = data("example1.csv");
    let o = run(&[
        "eval",
        "F[1,3] (s > 0)",
        csv.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success() && o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["value"], json!(3.0));
}
