use std::path::{Path, PathBuf};

use qcat::cli::run;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Runs `qcat` with model paths resolved against the workspace and output
/// files redirected into `out_dir`.
fn qcat(args: &[String], out_dir: &Path) -> (i32, String, String) {
    let mut argv = vec!["qcat".to_string()];
    let mut redirect = false;
    for a in args {
        if redirect {
            argv.push(out_dir.join(a).display().to_string());
            redirect = false;
            continue;
        }
        redirect = a == "-o" || a == "--output";
        if a.starts_with("models/") {
            argv.push(root().join(a).display().to_string());
        } else {
            argv.push(a.clone());
        }
    }
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn q(line: &str) -> (i32, String, String) {
    let dir = tempfile::tempdir().unwrap();
    qcat(&shell_words::split(line).unwrap(), dir.path())
}

#[test]
fn readme_examples_run() {
    let readme = std::fs::read_to_string(root().join("README.md")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let lines: Vec<&str> = readme.lines().filter(|l| l.starts_with("qcat ")).collect();
    assert!(lines.len() >= 10);
    for line in lines {
        let words = shell_words::split(line).unwrap();
        let (code, _, err) = qcat(&words[1..], dir.path());
        assert_eq!(code, 0, "`{line}` failed: {err}");
    }
    let ppm = std::fs::read(dir.path().join("gpm4.ppm")).unwrap();
    assert!(ppm.starts_with(b"P5\n400 400\n255\n"));
    assert_eq!(ppm.len(), "P5\n400 400\n255\n".len() + 400 * 400);
    let csv = std::fs::read_to_string(dir.path().join("nnim10.csv")).unwrap();
    assert_eq!(csv.lines().count(), 242);
}

#[test]
fn secular_forms() {
    let (c, out, _) = q("secular -m models/gpm4.json --s");
    assert_eq!(c, 0);
    assert!(out.starts_with("s^2 + (a^2 + b^2 - 3)*s + a^2*b^2 - a^2 + 2*a*b + 1 = 0"), "{out}");
    let (c, out, _) = q("secular -m models/aom4.json --shift 4 --s");
    assert_eq!(c, 0);
    assert!(out.starts_with("s^2 + (a + 2*b - 10)*s + b^2 - 9*a + 6*b + 9 = 0"), "{out}");
    // odd powers survive without the centring shift
    let (c, _, err) = q("secular -m models/aom4.json --even");
    assert_eq!(c, 2, "{err}");
}

#[test]
fn mep_table_and_json() {
    let (c, out, _) = q("mep -m models/gpm4.json");
    assert_eq!(c, 0);
    assert!(out.contains("1.691739510") && out.contains("1.683771565"), "{out}");
    let (c, out, _) = q("mep -m models/aom4.json --format json");
    assert_eq!(c, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v.as_array().unwrap().iter().any(|s| s["exact"]["a"] == "4" && s["exact"]["b"] == "3"));
}

#[test]
fn spectrum_json_reports_reality() {
    let (c, out, _) = q("spectrum -m models/gpm3.json --set a=3/2 --format json");
    assert_eq!(c, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["reality"], false);
    let (_, out, _) = q("spectrum -m models/gpm3.json --set a=1 --format json");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["reality"], true);
}

#[test]
fn inline_model_and_overrides() {
    let (c, out, _) = q(r#"spectrum -m '{"family":"nnim","dim":2,"params":{"c":"3/5"}}' --format csv"#);
    assert_eq!(c, 0);
    // 2 ± 4/5
    assert!(out.contains("1.2") && out.contains("2.8"), "{out}");
}

#[test]
fn exit_codes() {
    // unbound parameters
    assert_eq!(q("spectrum -m models/gpm4.json").0, 2);
    // unknown parameter
    assert_eq!(q("spectrum -m models/gpm3.json --set z=1").0, 2);
    // malformed box
    assert_eq!(q("scan -m models/gpm4.json --box=-2:2").0, 2);
    // format the command does not offer
    assert_eq!(q("mep -m models/gpm4.json --format ppm").0, 2);
    // missing file
    assert_eq!(q("build -m models/none.json").0, 2);
    // clap usage error
    assert_eq!(q("frobnicate").0, 2);
    // non-diagonalizable point: the metric is refused numerically
    assert_eq!(q("metric -m models/aom4.json --set a=4 --set b=3").0, 3);
    assert_eq!(q("--version").0, 0);
}
