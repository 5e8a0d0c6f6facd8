use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_caustics"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("valid json")
}

/// `d.dddddddddddddddde[-]d+`: 17 significant digits, lowercase exponent.
fn is_sci17(field: &str) -> bool {
    let body = field.strip_prefix('-').unwrap_or(field);
    let Some((mant, exp)) = body.split_once('e') else {
        return false;
    };
    let exp = exp.strip_prefix('-').unwrap_or(exp);
    let mut parts = mant.split('.');
    let (Some(int), Some(frac), None) = (parts.next(), parts.next(), parts.next()) else {
        return false;
    };
    int.len() == 1
        && frac.len() == 16
        && mant
            .chars()
            .filter(|c| *c != '.')
            .all(|c| c.is_ascii_digit())
        && !exp.is_empty()
        && exp.chars().all(|c| c.is_ascii_digit())
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

const SCAN_KS: [&str; 8] = ["--k", "31", "--k", "63", "--k", "127", "--k", "255"];

fn scan_args<'a>(tail: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["scan", "--m0", "1", "--N0", "1"];
    v.extend_from_slice(&SCAN_KS);
    v.extend_from_slice(tail);
    v
}

#[test]
fn legendre_reference_values() {
    let o = run(&["legendre", "--N", "1", "--m", "1", "--x", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0].join(","), "N,m,x,phi,mantissa,exp10,value,mode_u");
    let v: f64 = rows[1][6].parse().unwrap();
    assert!((v - 8.660254037844386e-1).abs() < 1e-15);

    let o = run(&[
        "legendre", "--N", "1", "--m", "0", "--x", "1", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o)["rows"][0]["value"].as_f64().unwrap();
    assert!((v - 1.224744871391589).abs() < 1e-15);
}

#[test]
fn legendre_rejects_order_above_degree() {
    let o = run(&["legendre", "--N", "1", "--m", "3", "--x", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("order exceeds degree"));
    assert!(o.stdout.is_empty());
}

#[test]
fn bad_flags_are_validation_errors() {
    assert_eq!(
        run(&["scan", "--m0", "1", "--N0", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["measure", "--N", "0", "--c0", "0.8"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["measure", "--N", "100", "--c0", "0.8", "--f", "t3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "scan",
            "--m0",
            "1",
            "--N0",
            "1",
            "--k",
            "3",
            "--phi",
            "1.9",
            "--caustic",
            "2"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn scan_single_k_has_null_orders() {
    let o = run(&[
        "scan", "--m0", "1", "--N0", "1", "--k", "63", "--phi", "1.9", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let j = json(&o);
    assert!(j["fitted_order_wkb"].is_null());
    assert!(j["fitted_order_airy"].is_null());
    assert_eq!(j["rows"].as_array().unwrap().len(), 1);

    let o = run(&[
        "scan", "--m0", "1", "--N0", "1", "--k", "63", "--phi", "1.9",
    ]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 2);
}

#[test]
fn scan_caustic_airy_order() {
    let o = run(&scan_args(&["--caustic", "4", "--format", "json"]));
    assert_eq!(o.status.code(), Some(0));
    let j = json(&o);
    let order = j["fitted_order_airy"].as_f64().unwrap();
    assert!(order >= 0.2, "airy order {order}");
    assert_eq!(j["rows"].as_array().unwrap().len(), 16);

    // the same grid through the --phi spelling
    let o2 = run(&scan_args(&["--phi", "caustic:4", "--format", "json"]));
    assert_eq!(o.stdout, o2.stdout);
}

#[test]
fn scan_fixed_angle_wkb_order() {
    let o = run(&scan_args(&["--phi", "1.9", "--format", "json"]));
    assert_eq!(o.status.code(), Some(0));
    let order = json(&o)["fitted_order_wkb"].as_f64().unwrap();
    assert!((0.8..=1.3).contains(&order), "wkb order {order}");
}

#[test]
fn scan_csv_layout() {
    let o = run(&scan_args(&["--phi", "1.9", "--phi", "1.8"]));
    let text = stdout(&o);
    assert!(text.ends_with('\n') && !text.contains('\r'));
    let rows = csv_rows(&text);
    assert_eq!(
        rows[0].join(","),
        "k,N,m,h,phi,exact,wkb,airy,err_wkb,err_airy"
    );
    assert_eq!(rows.len(), 9);
    let keys: Vec<(u64, f64)> = rows[1..]
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[4].parse().unwrap()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    assert_eq!(keys, sorted);
    for r in &rows[1..] {
        for f in &r[3..] {
            assert!(f.is_empty() || is_sci17(f), "bad float field {f:?}");
        }
    }
}

#[test]
fn measure_examples() {
    let o = run(&["measure", "--N", "500", "--c0", "0.8", "--f", "one"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0].join(","), "N,f_or_s,empirical,limit,gap");
    let vals: Vec<f64> = rows[1][2..].iter().map(|v| v.parse().unwrap()).collect();
    assert!((vals[0] - 1.0).abs() <= 1e-10);
    assert!((vals[1] - 1.0).abs() <= 1e-10);
    assert!(vals[2] <= 1e-10);

    let o = run(&[
        "measure", "--N", "4000", "--c0", "0.8", "--f", "t2", "--format", "json",
    ]);
    let row = &json(&o)["rows"][0];
    assert!((row["limit"].as_f64().unwrap() - 0.32).abs() < 1e-12);
    assert!(row["gap"].as_f64().unwrap() <= 0.02);

    let o = run(&[
        "measure", "--N", "500", "--c0", "0.8", "--s", "5", "--format", "json",
    ]);
    let row = &json(&o)["rows"][0];
    assert!(row["gap"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn measure_trend_verdicts() {
    let o = run(&[
        "measure", "--N", "250", "--N", "500", "--N", "1000", "--c0", "0.5", "--f", "t4",
        "--format", "json",
    ]);
    let trend = &json(&o)["trends"][0];
    assert_eq!(trend["f"], "t4");
    assert_eq!(trend["gaps"].as_array().unwrap().len(), 3);
    assert_eq!(trend["decreasing"], true);
}

#[test]
fn selftest_fresh_build_passes() {
    let o = run(&["selftest"]);
    let j = json(&o);
    let failed: Vec<&str> = j["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] != true)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.is_empty(), "failing checks: {failed:?}");
    assert_eq!(j["passed"], true);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn selftest_notices_corrupted_recurrence() {
    let o = run(&["selftest", "--corrupt-recurrence", "1e-6"]);
    assert_eq!(o.status.code(), Some(1));
    let j = json(&o);
    assert_eq!(j["passed"], false);
    let ortho = j["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "legendre_orthonormality")
        .unwrap();
    assert_eq!(ortho["passed"], false);
}

#[test]
fn output_is_byte_deterministic() {
    let commands: [Vec<&str>; 3] = [
        scan_args(&["--caustic", "4", "--format", "json"]),
        vec![
            "measure", "--N", "300", "--N", "900", "--c0", "0.5", "--s", "1", "--s", "20",
        ],
        vec!["selftest"],
    ];
    for args in &commands {
        let first = run(args).stdout;
        assert_eq!(first, run(args).stdout, "{args:?}");
        for threads in ["1", "3"] {
            let o = bin()
                .args(args)
                .env("RAYON_NUM_THREADS", threads)
                .output()
                .unwrap();
            assert_eq!(first, o.stdout, "{args:?} with {threads} threads");
        }
    }
}

#[test]
fn out_flag_writes_file() {
    let path: PathBuf =
        std::env::temp_dir().join(format!("caustics-out-{}.csv", std::process::id()));
    let o = run(&[
        "legendre",
        "--N",
        "7",
        "--m",
        "2",
        "--phi",
        "0.4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    let _ = std::fs::remove_file(&path);
    let direct = stdout(&run(&["legendre", "--N", "7", "--m", "2", "--phi", "0.4"]));
    assert_eq!(written, direct);
}

#[test]
fn float_fields_use_seventeen_digits() {
    assert!(is_sci17("8.6602540378443860e-1"));
    assert!(is_sci17("-1.0000000000000000e0"));
    assert!(!is_sci17("1.0e0"));
    assert!(!is_sci17("8.6602540378443860E-1"));
    let o = run(&[
        "legendre", "--N", "300", "--m", "150", "--x", "-0.2", "--x", "0.7",
    ]);
    for r in &csv_rows(&stdout(&o))[1..] {
        for (i, f) in r.iter().enumerate() {
            if i == 0 || i == 1 || i == 5 {
                assert!(f.parse::<i64>().is_ok());
            } else {
                assert!(is_sci17(f), "{f}");
            }
        }
    }
}
