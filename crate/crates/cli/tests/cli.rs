use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trotterkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(o));
    serde_json::from_str(&stdout(o)).expect("stdout is JSON")
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn schemes_list_is_tab_separated() {
    let o = run(&["schemes", "list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name\torder\tq\tsymmetric\tcomplex"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split('\t').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 5));
    let fr = rows.iter().find(|r| r[0] == "forest-ruth").unwrap();
    assert_eq!(fr[1], "4");
    assert_eq!(fr[2], "3");
}

#[test]
fn validate_known_scheme() {
    let v = json(&run(&["schemes", "validate", "strang"]));
    assert_eq!(v[0]["pass"], Value::Bool(true));
    let slope = v[0]["fitted_order"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.3);
}

#[test]
fn validate_unknown_name() {
    let o = run(&["schemes", "validate", "bogus-name"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:not-found:"), "{}", stderr(&o));
}

#[test]
fn validate_file_with_inconsistent_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"name": "bad", "order": 2, "a": [[0.5, 0], [0.5, 0]], "b": [[0.9, 0]], "symmetric": true, "source": ""}"#,
    )
    .unwrap();
    let o = run(&["schemes", "validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["pass"], Value::Bool(false));
    assert!((v[0]["b_residual"].as_f64().unwrap() - 0.1).abs() < 1e-12);
    assert!(v[0]["fitted_order"].is_null());
}

#[test]
fn validate_file_with_good_scheme_array() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("good.json");
    std::fs::write(
        &path,
        r#"[{"name": "mine", "order": 2, "a": [[0.5, 0], [0.5, 0]], "b": [[1, 0]], "symmetric": true, "source": ""}]"#,
    )
    .unwrap();
    let v = json(&run(&["schemes", "validate", path.to_str().unwrap()]));
    assert_eq!(v[0]["name"], "mine");
    assert_eq!(v[0]["pass"], Value::Bool(true));
}

#[test]
fn efficiency_output() {
    let v = json(&run(&["schemes", "efficiency", "suzuki", "--seed", "7"]));
    assert_eq!(v["order"], 4);
    assert_eq!(v["q"], 5);
    assert!(v["eff"].as_f64().unwrap() > 0.0);
}

#[test]
fn adapt_forest_ruth_sums_to_one() {
    let v = json(&run(&["adapt", "forest-ruth"]));
    let c = v["c"].as_array().unwrap();
    let d = v["d"].as_array().unwrap();
    assert_eq!(c.len(), 3);
    assert_eq!(d.len(), 3);
    let sc: f64 = c.iter().map(|x| complex(x).0).sum();
    let sd: f64 = d.iter().map(|x| complex(x).0).sum();
    assert!((sc + sd - 1.0).abs() < 1e-14);
    for (x, y) in c.iter().zip(d) {
        assert_eq!(complex(x), complex(y), "forest-ruth is self-reversed");
    }
}

#[test]
fn adapt_check_fits_order() {
    let v = json(&run(&["adapt", "--check", "suzuki", "--lambda", "4"]));
    assert_eq!(v["lambda"], 4);
    let slope = v["slope"].as_f64().unwrap();
    assert!((slope - 4.0).abs() < 0.3, "{slope}");
}

#[test]
fn lambda_without_check_is_usage_error() {
    assert_eq!(run(&["adapt", "strang", "--lambda", "3"]).status.code(), Some(2));
}

#[test]
fn taylor_zeros_with_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let first = run(&["zeros", "--family", "taylor", "--k", "12", "--zeros-cache", cache]);
    let v = json(&first);
    assert_eq!(v["zeros"].as_array().unwrap().len(), 12);
    assert!(Path::new(cache).join("taylor_12.json").is_file());
    // A second run reads the cache and prints the same thing.
    let second = run(&["zeros", "--family", "taylor", "--k", "12", "--zeros-cache", cache]);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn chebyshev_zeros_need_gamma_h() {
    let o = run(&["zeros", "--family", "chebyshev", "--k", "8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:invalid:"));
    let v = json(&run(&["zeros", "--family", "chebyshev", "--k", "8", "--gamma-h", "3"]));
    assert_eq!(v["axis"], "imaginary");
    assert_eq!(v["gammas"].as_array().unwrap().len(), 8);
}

#[test]
fn expm_prod_and_sum() {
    let prod = json(&run(&["expm", "--method", "taylor", "--k", "30", "--prod", "--scalar", "-2"]));
    let sum = json(&run(&["expm", "--method", "taylor", "--k", "30", "--sum", "--scalar", "-2,0"]));
    assert_eq!(prod["evaluation"], "prod");
    assert_eq!(sum["evaluation"], "sum");
    let expected = (-2.0f64).exp();
    for v in [&prod, &sum] {
        let (re, im) = complex(&v["value"]);
        assert!((re - expected).abs() < 1e-15 && im.abs() < 1e-15);
    }
    assert_eq!(run(&["expm", "--method", "taylor", "--k", "3", "--sum", "--prod", "--scalar", "1"]).status.code(), Some(2));
}

#[test]
fn expm_chebyshev_on_imaginary_axis() {
    let v = json(&run(&[
        "expm", "--method", "chebyshev", "--k", "40", "--gamma-h", "10", "--scalar", "0,7",
    ]));
    let (re, im) = complex(&v["value"]);
    assert!((re - 7f64.cos()).abs() < 1e-12);
    assert!((im - 7f64.sin()).abs() < 1e-12);
}

#[test]
fn model_spectrum_to_stdout_and_file() {
    let o = run(&["model", "xxz", "--L", "2", "--delta", "1.0", "--bc", "open"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let eigs: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let expected = [-3.0, 1.0, 1.0, 1.0];
    for (a, b) in eigs.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{eigs:?}");
    }

    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("spectrum.csv");
    let v = json(&run(&["model", "xxz", "--L", "6", "--bc", "periodic", "--dump", dump.to_str().unwrap()]));
    assert_eq!(v["dim"], 64);
    assert_eq!(v["groups"], 3);
    let lines = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(lines.lines().count(), 65);
}

#[test]
fn model_capacity_error() {
    let o = run(&["model", "xxz", "--L", "13"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:capacity:"));
}

const PLAN: &str = r#"{
  "model": {"sites": 4, "anisotropy": 0.5, "boundary": "open"},
  "t_total": 1.0,
  "methods": [
    {"type": "scheme", "name": "forest-ruth"},
    {"type": "polynomial", "family": "taylor"},
    {"type": "polynomial", "family": "chebyshev", "evaluation": "sum"},
    {"type": "exact"}
  ],
  "h_grid": [0.5, 0.25, 0.125]
}"#;

#[test]
fn bench_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(&plan, PLAN).unwrap();
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    let plot = dir.path().join("a.dat");
    let v = json(&run(&[
        "bench",
        "--config",
        plan.to_str().unwrap(),
        "--out",
        out1.to_str().unwrap(),
        "--plot-data",
        plot.to_str().unwrap(),
    ]));
    assert_eq!(v["records"], 12);
    json(&run(&["bench", "--config", plan.to_str().unwrap(), "--out", out2.to_str().unwrap()]));
    let a = std::fs::read(&out1).unwrap();
    assert_eq!(a, std::fs::read(&out2).unwrap());

    let text = String::from_utf8(a).unwrap();
    assert!(text.lines().any(|l| l.starts_with("#") && l.contains("kappa=6")));
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "method,h,steps,cost,error,wall_time");
    assert_eq!(body.len(), 13);
    for row in &body[1..] {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f.len(), 6);
        let err: f64 = f[4].parse().unwrap();
        assert!(err >= 0.0);
    }
    let plot_text = std::fs::read_to_string(&plot).unwrap();
    assert_eq!(plot_text.split("\n\n\n").count(), 4);
}

#[test]
fn bench_rejects_bad_plan() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(&plan, PLAN.replace("\"t_total\": 1.0,", "\"t_total\": 1.0, \"kappa\": 0,")).unwrap();
    let o = run(&["bench", "--config", plan.to_str().unwrap(), "--out", dir.path().join("x.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:invalid:"));
}

#[test]
fn probe_stability_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("probe.csv");
    let v = json(&run(&["probe-stability", "--k", "10,20", "--z=-5", "--z=0,8", "--out", out.to_str().unwrap()]));
    assert_eq!(v["rows"], 4);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,z_re,z_im,err_sum,err_prod"));
    for l in lines {
        let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[3] < 1e-12 && f[4] < 1e-12, "{l}");
    }
}

#[test]
fn custom_catalog_flag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cat.json");
    std::fs::write(
        &path,
        r#"[{"name": "only", "order": 2, "a": [[0.5, 0], [0.5, 0]], "b": [[1, 0]], "symmetric": true, "source": ""}]"#,
    )
    .unwrap();
    let o = run(&["schemes", "list", "--catalog", path.to_str().unwrap()]);
    assert_eq!(stdout(&o).lines().count(), 2);
    let missing = run(&["schemes", "list", "--catalog", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).starts_with("error:io:"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["schemes", "list", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["zeros", "--family", "taylor"]).status.code(), Some(2));
}

#[test]
fn every_subcommand_has_help() {
    for path in [
        vec!["schemes"],
        vec!["schemes", "list"],
        vec!["schemes", "validate"],
        vec!["schemes", "efficiency"],
        vec!["adapt"],
        vec!["zeros"],
        vec!["expm"],
        vec!["model", "xxz"],
        vec!["bench"],
        vec!["probe-stability"],
    ] {
        let mut args = path.clone();
        args.push("--help");
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "{path:?}");
        assert!(stdout(&o).contains("Usage:"));
    }
}

#[test]
fn identical_invocations_identical_output() {
    let a = run(&["schemes", "efficiency", "blanes-moan"]);
    let b = run(&["schemes", "efficiency", "blanes-moan"]);
    assert_eq!(a.stdout, b.stdout);
}
