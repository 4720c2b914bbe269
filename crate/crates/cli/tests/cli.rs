use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn stefan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stefan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn coefficient(rows: &[Vec<String>], name: &str, index: i64) -> f64 {
    rows.iter()
        .find(|r| r[0] == name && r[1] == index.to_string())
        .unwrap_or_else(|| panic!("{name}{index} missing"))[2]
        .parse()
        .unwrap()
}

fn max_rel_err(path: &Path) -> f64 {
    let (_, rows) = read_csv(path);
    rows.iter()
        .filter(|r| !r[3].is_empty())
        .map(|r| r[3].parse::<f64>().unwrap())
        .fold(0.0, f64::max)
}

#[test]
fn solve_writes_the_exact_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = stefan(&["solve", "--config", "testproblem", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("coefficients.csv"));
    assert_eq!(header, ["name", "index", "value"]);
    assert!((coefficient(&rows, "A", 1) + 3.004).abs() < 1e-3);
    assert_eq!(coefficient(&rows, "B", 1), 0.5);
    assert_eq!(coefficient(&rows, "A", 2), 0.0);
    assert_eq!(coefficient(&rows, "B", 2), 0.0);
    assert_eq!(rows[0][2], "8.65117217e-1");
}

#[test]
fn output_is_bit_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = stefan(&["collocate", "--out", d.path().to_str().unwrap()]);
        assert!(o.status.success());
    }
    for f in ["coefficients.csv", "flux.csv", "flux_small_t.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap()
        );
    }
}

#[test]
fn collocation_flux_error() {
    let dir = tempfile::tempdir().unwrap();
    for conv in ["derived", "printed"] {
        let mut errs = Vec::new();
        for points in ["0,0.5,1", "0,0.25,0.5,0.75,1"] {
            let out = dir.path().join(format!("{conv}-{}", points.len()));
            let o = stefan(&[
                "collocate",
                "--convention",
                conv,
                "--points",
                points,
                "--out",
                out.to_str().unwrap(),
            ]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            let (header, rows) = read_csv(&out.join("flux.csv"));
            assert_eq!(header, ["t", "flux_exact", "flux_approx", "rel_err"]);
            assert_eq!(rows.len(), 200);
            assert_eq!(rows[0][0], "5.00000000e-2");
            assert_eq!(rows[199][0], "1.00000000e0");
            errs.push(max_rel_err(&out.join("flux.csv")));
        }
        assert!(errs[0] <= 0.05, "{conv}: {errs:?}");
        assert!(errs[1] <= errs[0] + 1e-12, "{conv}: {errs:?}");
    }
}

#[test]
fn printed_collocation_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = stefan(&[
        "collocate",
        "--convention",
        "printed",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let (_, rows) = read_csv(&dir.path().join("coefficients.csv"));
    assert!((coefficient(&rows, "A", 0) - 0.579).abs() <= 0.03);
    assert!((coefficient(&rows, "B", 0) + 0.183).abs() <= 0.03);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let o = stefan(&["solve", "--config", "missing-file", "--out", out]);
    assert_eq!(o.status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"problem": {"geometry": "planar", "f_taylor": [0, 1], "front": {"alphas": [1]},
            "params": {"a1": 1, "a2": 1, "lambda1": -1, "lambda2": 1, "l_gamma": 1, "t_melt": 0}}}"#,
    )
    .unwrap();
    let o = stefan(&["solve", "--config", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda1"));

    fs::write(&bad, r#"{"problem": {"geometry": "planar", "f_taylor": "x"}}"#).unwrap();
    let o = stefan(&["solve", "--config", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("problem.f_taylor"));

    let o = stefan(&["collocate", "--points", "0.5", "--out", out]);
    assert_eq!(o.status.code(), Some(3));

    let o = stefan(&["solve", "--convention", "sideways", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reduce_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = |s: &str| dir.path().join(s).to_str().unwrap().to_string();
    let o = stefan(&["reduce", "--config", "testsphere", "--out", &d("r")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let written = fs::read_to_string(dir.path().join("r/reduced.json")).unwrap();
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), written.trim());

    // the reduced config loads, validates, and yields the sphere's v-coefficients
    let reduced = d("r/reduced.json");
    let o = stefan(&["solve", "--config", &reduced, "--out", &d("planar")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = stefan(&["solve", "--config", "testsphere", "--out", &d("sphere")]);
    assert!(o.status.success());
    let (_, planar) = read_csv(&dir.path().join("planar/coefficients.csv"));
    let (_, sphere) = read_csv(&dir.path().join("sphere/coefficients.csv"));
    let series = |rows: &[Vec<String>]| -> Vec<Vec<String>> {
        rows.iter().filter(|r| r[0] != "P").cloned().collect()
    };
    assert_eq!(series(&planar), series(&sphere));

    // a reduced problem is planar and cannot be reduced again
    let o = stefan(&["reduce", "--config", &reduced, "--out", &d("again")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_run_writes_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = stefan(&["oracle", "--grid", "100", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("front.csv"));
    assert_eq!(header, ["t", "front"]);
    let front: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(front.windows(2).all(|w| w[1] > w[0]));
    let (header, _) = read_csv(&dir.path().join("flux.csv"));
    assert_eq!(header, ["t", "flux_exact", "flux_approx", "rel_err"]);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report["report"]["flux_rel_sup"].as_f64().unwrap() <= 0.03);
    assert!(report["report"]["temperature_sup"].as_f64().unwrap() <= 1e-2);
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = stefan(&["verify", "--out", dir.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.contains(", 0 failed"));
    assert!(!stdout.contains("FAIL"));
    let results: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert!(results.as_array().unwrap().len() >= 25);
}
