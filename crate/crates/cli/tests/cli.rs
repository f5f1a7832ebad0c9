use std::path::Path;
use std::process::{Command, Output};

fn polybohr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polybohr")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// Data rows of a single CSV section, split into cells.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn radii_tables() {
    let o = polybohr(&["radii", "--k", "1:2", "--m", "2:3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut sections = text.split("\n\n");
    let k = csv_rows(sections.next().unwrap());
    assert_eq!(k[0][0], "1");
    assert_eq!(k[0][2], "0.333333333333");
    assert_eq!(k[0][3], "");
    let gamma2: f64 = k[1][2].parse().unwrap();
    assert!((gamma2 - 0.24822748598685068).abs() < 1e-11);
    let m = csv_rows(sections.next().unwrap());
    let t2: f64 = m[0][1].parse().unwrap();
    assert!((t2 - 0.5176380902050415).abs() < 1e-11);
}

#[test]
fn radii_json_is_locale_free_and_deterministic() {
    let a = polybohr(&["radii", "--k", "1:4", "--m", "2:4", "--format", "json"]);
    let b = polybohr(&["radii", "--k", "1:4", "--m", "2:4", "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["k"].as_array().unwrap().len(), 4);
    assert_eq!(v["m"][0]["m"], 2);
}

#[test]
fn curves() {
    let o = polybohr(&["curve", "--kind", "Omega", "--k", "3", "--grid", "0:0.3333:12"]);
    assert!(o.status.success());
    for row in csv_rows(&stdout(&o)) {
        assert_eq!(row[1], "1");
    }
    let c = csv_rows(&stdout(&polybohr(&["curve", "--kind", "C", "--k", "2", "--grid", "0:0.9:31"])));
    let k = csv_rows(&stdout(&polybohr(&["curve", "--kind", "K", "--k", "2", "--grid", "0:0.9:31"])));
    for (a, b) in c.iter().zip(&k) {
        assert!(b[1].parse::<f64>().unwrap() <= a[1].parse::<f64>().unwrap());
    }
    // C is continuous where c = 1/2, i.e. r = 1/3 for k = 1.
    let c1 = csv_rows(&stdout(&polybohr(&["curve", "--kind", "C", "--grid", "0.333333:0.3333336:2"])));
    let (lo, hi): (f64, f64) = (c1[0][1].parse().unwrap(), c1[1][1].parse().unwrap());
    assert!((hi - lo).abs() < 1e-6);
    let missing = polybohr(&["curve", "--kind", "D"]);
    assert!(!missing.status.success());
}

#[test]
fn norm_numrad_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let constant = write(dir.path(), "c.json", r#"{"n":[2],"m":1,"terms":[{"word":[[]],"coeff":[[[0.6,-0.8]]]}]}"#);
    let letter = write(dir.path(), "s.json", r#"{"n":[1],"m":1,"terms":[{"word":[[1]],"coeff":[[[1,0]]]}]}"#);
    let rows = csv_rows(&stdout(&polybohr(&["norm", "--file", &constant])));
    assert!((rows[0][3].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
    let rows = csv_rows(&stdout(&polybohr(&["norm", "--file", &letter, "--r", "0.7"])));
    assert!((rows[0][3].parse::<f64>().unwrap() - 0.7).abs() < 1e-10);
    // Numerical radius of the truncated shift grows with the truncation.
    let o = polybohr(&["numrad", "--file", &letter, "--trunc", "6", "--sweep"]);
    let values: Vec<f64> = csv_rows(&stdout(&o)).iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(values.len(), 6);
    assert!(values.windows(2).all(|w| w[0] < w[1]));
    assert!((values[0] - 0.5).abs() < 1e-10);
    let o = polybohr(&["eval", "--file", &letter, "--point", "0.3-0.1i"]);
    assert_eq!(stdout(&o), "row,col,re,im\n0,0,0.3,-0.1\n");
    let bad = polybohr(&["norm", "--file", &letter, "--trunc", "3,3"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn invalid_configuration_is_rejected() {
    assert_eq!(polybohr(&["radii", "--tol", "0"]).status.code(), Some(2));
    assert_eq!(polybohr(&["radii", "--k", "3:1"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let letter = write(dir.path(), "s.json", r#"{"n":[1],"m":1,"terms":[{"word":[[1]],"coeff":[[[1,0]]]}]}"#);
    assert_eq!(polybohr(&["norm", "--file", &letter, "--trunc", "0"]).status.code(), Some(2));
}

#[test]
fn verify_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |out: &Path| {
        vec![
            "verify".to_string(),
            "--suite".into(),
            "wiener,harnack,fejer".into(),
            "--trials".into(),
            "40".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let run = |out: &Path| {
        let v = args(out);
        polybohr(&v.iter().map(String::as_str).collect::<Vec<_>>())
    };
    let oa = run(&a);
    let ob = run(&b);
    assert!(oa.status.success(), "{}", String::from_utf8_lossy(&oa.stderr));
    assert!(ob.status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let reports: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 3);
    assert!(reports.as_array().unwrap().iter().all(|r| r["pass"] == true));
}

#[test]
fn perturbed_constant_fails_verification() {
    let o = polybohr(&["verify", "--suite", "landau_op", "--trials", "10", "--perturb-constant", "0.75"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("landau_op,10,"));
    assert!(stdout(&o).trim_end().ends_with("false"));
}

#[test]
fn unknown_suite_is_an_error() {
    assert_eq!(polybohr(&["verify", "--suite", "nope", "--trials", "1"]).status.code(), Some(2));
}
