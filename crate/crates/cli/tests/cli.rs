use std::path::Path;
use std::process::{Command, Output};

use entlab::anchors::ANCHORS;
use serde_json::Value;

fn entlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("ENTLAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn report(dir: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{name}.json"))).expect("report written");
    serde_json::from_str(&text).expect("report is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn entropy_row_for_two_hyperbolic_threes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "e.toml", "[profile]\ndims = [3, 3]\nentropies = [2.0, 2.0]\n");
    let out = entlab(&["entropy", "--config", &cfg, "--csv"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = &report(tmp.path(), "entropy")["records"][0];
    let o = &rec["outputs"];
    assert!((o["h_min"].as_f64().unwrap() - 8f64.sqrt()).abs() < 1e-12);
    assert!((o["gm_factor"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    for a in o["alphas"].as_array().unwrap() {
        assert!((a.as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("h_min = 2.828427, alpha = (1, 1), gm_factor = 0.333333"), "{stdout}");
}

#[test]
fn empty_config_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "empty.toml", "# nothing\n");
    let out = entlab(&["entropy", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("empty") && err.contains("[profile]"), "{err}");
    assert!(!tmp.path().join("entropy.json").exists());
}

#[test]
fn invalid_values_and_flags_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.toml", "[solver]\ntol = -1.0\n");
    let out = entlab(&["barycenter", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = entlab(&["entropy", "--no-such-flag"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let out = entlab(&["growth", "--tol", "-0.1"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_subcommand_must_match() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", "[run]\nsubcommand = \"bcg\"\n");
    let out = entlab(&["entropy", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let cfg = write(tmp.path(), "g.toml", "[ghnet]\nspace = \"tree\"\nsamples = 60\n");
    for dir in [&a, &b] {
        let out = entlab(&["ghnet", "--config", &cfg, "--seed", "7", "--csv"], dir);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
    for file in ["ghnet.json", "ghnet.approximation.csv"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file}");
    }
    assert_eq!(report(&a, "ghnet")["config"]["run"]["seed"], 7);
}

#[test]
fn every_record_carries_a_shipped_anchor() {
    let tmp = tempfile::tempdir().unwrap();
    for cmd in ["entropy", "bcg", "ghnet"] {
        entlab(&[cmd], tmp.path());
        for rec in report(tmp.path(), cmd)["records"].as_array().unwrap() {
            let name = rec["name"].as_str().unwrap();
            let anchor = rec["anchor"].as_str().unwrap();
            assert!(ANCHORS.contains(&(name, anchor)), "{name}: {anchor}");
            assert!(!rec["tolerance"].is_null(), "{name}");
        }
    }
}

#[test]
fn csv_tables_have_a_header_and_lf_endings() {
    let tmp = tempfile::tempdir().unwrap();
    let out = entlab(&["bcg", "--csv"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(tmp.path().join("bcg.bcg.csv")).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("n,"));
    assert_eq!(lines.count(), 3);
    assert!(tmp.path().join("bcg.timings.json").exists());
}

#[test]
fn json_flag_prints_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = entlab(&["entropy", "--json"], tmp.path());
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed, report(tmp.path(), "entropy"));
    assert_eq!(printed["status"], "pass");
}

#[test]
fn out_dir_falls_back_to_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out =
        Command::new(env!("CARGO_BIN_EXE_entlab")).arg("entropy").env("ENTLAB_OUT_DIR", tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("entropy.json").exists());
}

#[test]
fn unreadable_space_file_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "s.toml", "[ghnet]\nspace = \"csv\"\npath = \"/nonexistent/space.csv\"\n");
    let out = entlab(&["ghnet", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}
