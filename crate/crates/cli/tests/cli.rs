use std::path::Path;
use std::process::{Command, Output};

fn igauss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_igauss")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const F1: &str = r#"{"dim": 1, "terms": [{"exponents": [2], "coeff_re": 1.0}, {"exponents": [1], "coeff_re": 0.5}]}"#;

#[test]
fn apply_reports_agreement_as_csv() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "f.json", F1);
    let p = write(d.path(), "p.json", "[[0.3], [-1.2], [2.0]]");
    for op in ["heat:0.4", "neg-power:1", "riesz:1", "riesz-bar:2", "imaginary:1.5"] {
        let out = igauss(&["apply", "--op", op, "--input", &f, "--points", &p]);
        assert_eq!(out.status.code(), Some(0), "{op}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x1,spectral_re,spectral_im,pv_re,pv_im,abs_diff");
        for line in lines {
            let diff: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!(diff <= 1e-5, "{op}: {line}");
        }
    }
}

#[test]
fn apply_fails_with_code_one_when_tolerance_is_unreachable() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "f.json", F1);
    let p = write(d.path(), "p.json", "[[0.3]]");
    // A one-node Gauss–Hermite rule cannot integrate the degree-2 input.
    let out = igauss(&["apply", "--op", "heat:0.5", "--input", &f, "--points", &p, "--order", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "f.json", F1);
    let p = write(d.path(), "p.json", "[[0.3]]");
    let cases: Vec<Vec<&str>> = vec![
        vec!["apply", "--op", "bogus:1", "--input", &f, "--points", &p],
        vec!["apply", "--op", "riesz:1", "--input", "/nonexistent.json", "--points", &p],
        vec!["apply", "--op", "riesz:1", "--input", &f, "--points", &p, "--dim", "2"],
        vec!["kernel", "--kernel", "mehler:0.5", "--dim", "4"],
        vec!["kernel", "--kernel", "riesz:1,1", "--dim", "1"],
        vec!["certify", "--estimate", "no-such-estimate"],
        vec!["show-config", "--degree", "61"],
        vec!["frobnicate"],
    ];
    for args in cases {
        assert_eq!(igauss(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn kernel_dump_skips_the_diagonal() {
    let out = igauss(&["kernel", "--kernel", "neg-power:1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x1,y1,value_re,value_im");
    assert_eq!(text.lines().count(), 1 + 21 * 20);
    assert!(String::from_utf8(out.stderr).unwrap().contains("21 diagonal points skipped"));

    let out = igauss(&["kernel", "--kernel", "mehler:0.5", "--dim", "2", "--lo", "-1", "--hi", "1", "--count", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 81);
    assert_eq!(text.lines().nth(1).unwrap().split(',').take(4).collect::<Vec<_>>(), ["-1", "-1", "-1", "-1"]);
}

#[test]
fn certificate_is_written_atomically_to_out() {
    let d = tempfile::tempdir().unwrap();
    let out_path = d.path().join("cert.json");
    let out = igauss(&["certify", "--estimate", "mbeta-global", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(v["estimate"], "mbeta-global");
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["disclaimer"], "numerical evidence only");
    for key in ["calibrated_C", "worst_ratio", "worst_sample", "grid", "seed", "params", "region"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let leftovers: Vec<_> = std::fs::read_dir(d.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let d = tempfile::tempdir().unwrap();
    let c = write(d.path(), "c.json", r#"{"dim": 2, "tol": 1e-6, "beta": 2.0}"#);
    let out = igauss(&["show-config", "--config", &c, "--tol", "1e-4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["dim"], 2);
    assert_eq!(v["tol"], 1e-4);
    assert_eq!(v["beta"], 2.0);
    assert_eq!(v["degree"], 24);

    let bad = write(d.path(), "bad.json", r#"{"dimension": 2}"#);
    assert_eq!(igauss(&["show-config", "--config", &bad]).status.code(), Some(2));
}

#[test]
fn pv_sweep_prints_the_ladder_and_its_limit() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "f.json", F1);
    let out = igauss(&["pv-sweep", "--op", "imaginary:1", "--input", &f, "--point", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps,shell_re,shell_im,corrected_re,corrected_im");
    assert_eq!(lines.len(), 1 + 13 + 1);
    assert!(lines.last().unwrap().starts_with("extrapolated,,,"));
}
