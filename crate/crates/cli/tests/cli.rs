use std::path::Path;
use std::process::{Command, Output};

use qcat::qfunctor::{make_weight_zero, IrrepFunctor};
use qcat::repcat::RepCat;
use serde_json::Value;

fn qcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcat"))
        .args(args)
        .env_remove("QCAT_TOL")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a json report")
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    let hits: Vec<&Value> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"] == name)
        .collect();
    assert_eq!(hits.len(), 1, "{name} should appear once");
    hits[0]
}

fn row(r: &Value, grade: u64) -> &Value {
    r["dimensions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|x| x["grade"] == grade)
        .expect("grade row")
}

fn fiber_lambda() -> String {
    let l = ((0.52 + 0.1104f64.sqrt()) / 2.0).sqrt();
    format!("{l},{l}")
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("wall_time_s");
            m.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[test]
fn weight_zero_dimension_table() {
    let out = qcat(&["--mu", "0.5", "--functor", "weight-zero", "--max-spin", "3", "--checks", "axioms,bounds"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["schema_version"], "qcat-report/1");
    assert_eq!(check(&r, "axioms")["status"], "pass");
    assert_eq!(check(&r, "bounds")["status"], "pass");
    assert_eq!(row(&r, 0)["mult"], 1);
    assert_eq!(row(&r, 1)["mult"], 0);
    let g2 = row(&r, 2);
    assert_eq!(g2["mult"], 1);
    assert!((g2["qmult"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((g2["qdim"].as_f64().unwrap() - 5.25).abs() < 1e-6);
    assert_eq!(g2["equality"], false);
}

#[test]
fn fiber_grade_one_row() {
    let pairs = fiber_lambda();
    let out = qcat(&["--mu", "0.2", "--functor", "fiber", "--fiber-pairs", &pairs, "--fiber-dim", "4", "--checks", "bounds"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let g1 = row(&r, 1);
    assert_eq!(g1["mult"], 4);
    assert!((g1["qmult"].as_f64().unwrap() - 5.2).abs() < 1e-6);
    assert!((g1["qdim"].as_f64().unwrap() - 5.2).abs() < 1e-6);
    assert_eq!(g1["equality"], true);
}

#[test]
fn classical_limit_is_commutative() {
    let out = qcat(&["--mu", "1.0", "--functor", "weight-zero", "--checks", "commutativity"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(check(&r, "commutativity")["max_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn failing_check_exits_one_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = qcat(&[
        "--mu", "0.5", "--checks", "commutativity", "--max-spin", "2",
        "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let c = check(&r, "commutativity");
    assert_eq!(c["status"], "fail");
    assert!(c["max_residual"].as_f64().unwrap() >= 1e-3);
}

#[test]
fn tolerance_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qcat"))
        .args(["--mu", "0.5", "--checks", "commutativity", "--max-spin", "2"])
        .env("QCAT_TOL", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["config"]["tol"], 10.0);
}

#[test]
fn invalid_configurations_exit_two() {
    let out = qcat(&["--mu", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mu"));

    let l = ((0.52 + 0.1104f64.sqrt()) / 2.0).sqrt();
    let bad = format!("{},{l}", (l * l + 0.1).sqrt());
    let out = qcat(&["--mu", "0.2", "--functor", "fiber", "--fiber-pairs", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("residual"));

    let pairs = fiber_lambda();
    let out = qcat(&["--mu", "0.2", "--functor", "fiber", "--fiber-pairs", &pairs, "--fiber-dim", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"schema\": \"qcat-functor/1\", \"mu\": 0.5").unwrap();
    let out = qcat(&["--mu", "0.5", "--functor", "user-file", "--functor-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = qcat(&["--mu", "0.5", "--checks", "everything"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn default_checks_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| -> Value {
        let path = dir.path().join(name);
        let out = qcat(&["--mu", "0.7", "--functor", "embedding", "--max-spin", "1", "--max-word", "3", "--output", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "noncommutative at mu < 1");
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        strip_timing(&mut v);
        v
    };
    let a = run("a.json");
    for name in ["axioms", "bounds", "algebra", "subgroup", "commutativity"] {
        check(&a, name);
    }
    assert_eq!(a["checks"].as_array().unwrap().len(), 5);
    assert_eq!(check(&a, "algebra")["status"], "pass");
    assert_eq!(check(&a, "subgroup")["status"], "pass");
    assert!(a["structure"]["entries"].as_u64().unwrap() > 0);
    let b = run("b.json");
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn csv_is_the_dimension_table() {
    let out = qcat(&["--mu", "0.5", "--checks", "bounds", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("grade,mult,qmult,qmult_trace,qdim,equality"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn user_file_functor() {
    let cat = RepCat::shared(0.5).unwrap();
    let ir = IrrepFunctor::from_functor(&make_weight_zero(cat), 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wz.json");
    std::fs::write(&path, ir.to_json().unwrap()).unwrap();
    let p = path.to_str().unwrap();
    let out = qcat(&["--mu", "0.5", "--functor", "user-file", "--functor-file", p, "--max-spin", "1", "--checks", "axioms,bounds,algebra,subgroup"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(check(&r, "subgroup")["status"], "skipped");
    assert_eq!(row(&r, 2)["mult"], 1);

    let out = qcat(&["--mu", "0.6", "--functor", "user-file", "--functor-file", p]);
    assert_eq!(out.status.code(), Some(2));
    assert!(Path::new(p).exists());
}
