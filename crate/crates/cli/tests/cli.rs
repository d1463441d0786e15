use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn nearcircle(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nearcircle")).current_dir(dir).args(args).output().unwrap()
}

fn domain(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn stderr_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn ellipse_spectrum() {
    let d = TempDir::new().unwrap();
    domain(d.path(), "e.cfg", "ellipse_eccentricity = 0.1\n");
    let o = nearcircle(d.path(), &["spectrum", "--domain", "e.cfg", "--qmax", "12"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("spectrum.json")).unwrap()).unwrap();
    let bands = v["bands"].as_array().unwrap();
    assert_eq!(bands[0]["T_q"].as_f64().unwrap(), 4.0);
    // 4b with b = √(1 − 0.01)
    assert!((bands[0]["t_q"].as_f64().unwrap() - 4.0 * 0.99f64.sqrt()).abs() < 1e-12);
    let tops: Vec<f64> = bands.iter().map(|b| b["T_q"].as_f64().unwrap()).collect();
    let gaps: Vec<f64> = tops.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(gaps.windows(2).all(|g| g[1] < g[0]), "{gaps:?}");
}

#[test]
fn disk_loops_are_constant() {
    let d = TempDir::new().unwrap();
    domain(d.path(), "d.cfg", "tau = 0\n");
    let o = nearcircle(d.path(), &["loops", "--domain", "d.cfg", "--q", "3"]);
    assert!(o.status.success());
    let text = fs::read_to_string(d.path().join("loops_q3.csv")).unwrap();
    let exact = 3.0 * 3f64.sqrt();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let l: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((l - exact).abs() < 1e-9, "{l}");
        rows += 1;
    }
    assert!(rows >= 64);
}

#[test]
fn disk_verify_passes() {
    let d = TempDir::new().unwrap();
    domain(d.path(), "d.cfg", "tau = 0\n");
    let o = nearcircle(d.path(), &["verify", "--domain", "d.cfg"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(d.path().join("verify.json").exists());
}

#[test]
fn output_is_reproducible_across_runs_and_workers() {
    let d = TempDir::new().unwrap();
    domain(d.path(), "f.cfg", "tau = 1\ncos[3] = 0.005\nsin[2] = 0.003\n");
    let runs = [("a", "1"), ("b", "4"), ("c", "4")];
    for (out, workers) in runs {
        let o = nearcircle(d.path(), &["spectrum", "--domain", "f.cfg", "--qmax", "8", "--workers", workers, "--out", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["spectrum.json", "spectrum.csv"] {
        let a = fs::read(d.path().join("a").join(file)).unwrap();
        for other in ["b", "c"] {
            assert_eq!(a, fs::read(d.path().join(other).join(file)).unwrap(), "{file} differs in {other}");
        }
    }
}

#[test]
fn validation_errors_exit_1() {
    let d = TempDir::new().unwrap();
    domain(d.path(), "e.cfg", "ellipse_eccentricity = 0.1\n");
    domain(d.path(), "broken.cfg", "tau = 1\ncos[x] = 0.1\n");
    for args in [
        &["spectrum", "--domain", "e.cfg", "--grid", "100"][..],
        &["spectrum", "--domain", "e.cfg", "--q", "3", "--qmax", "5"],
        &["spectrum"],
        &["spectrum", "--domain", "broken.cfg"],
        &["hear", "--perimeter", "6.28"],
    ] {
        let o = nearcircle(d.path(), args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert_eq!(stderr_json(&o)["exit_code"], 1);
    }
}

#[test]
fn solver_failure_exits_2() {
    let d = TempDir::new().unwrap();
    domain(d.path(), "n.cfg", "tau = 0.02\ncos[3] = 0.5\n");
    let o = nearcircle(d.path(), &["osc", "--domain", "n.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "noisy-fit");
}

#[test]
fn invariant_failure_exits_3() {
    let d = TempDir::new().unwrap();
    domain(d.path(), "bad.cfg", "tau = 1\ncos[2] = 0.1\n");
    let o = nearcircle(d.path(), &["verify", "--domain", "bad.cfg"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "invariant-failure");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn hear_labels_ellipse_lengths() {
    let d = TempDir::new().unwrap();
    domain(d.path(), "e.cfg", "ellipse_eccentricity = 0.1\n");
    let o = nearcircle(d.path(), &["spectrum", "--domain", "e.cfg", "--qmax", "6"]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    let perimeter = stdout.lines().find_map(|l| l.strip_prefix("perimeter ")).expect("perimeter line").trim().to_string();
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("spectrum.json")).unwrap()).unwrap();
    let mut lengths = String::from("# band values\n");
    for b in v["bands"].as_array().unwrap() {
        for x in b["values"].as_array().unwrap() {
            lengths.push_str(&format!("{}\n", x.as_f64().unwrap()));
        }
    }
    fs::write(d.path().join("lengths.txt"), lengths).unwrap();
    let o = nearcircle(d.path(), &["hear", "--lengths", "lengths.txt", "--perimeter", &perimeter]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let heard: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("hear.json")).unwrap()).unwrap();
    let heard = heard.as_array().unwrap();
    let bands = v["bands"].as_array().unwrap();
    assert_eq!(heard.len(), bands.len());
    for (h, b) in heard.iter().zip(bands) {
        assert_eq!(h["q"], b["q"]);
        assert_eq!(h["values"], b["values"]);
    }
}
