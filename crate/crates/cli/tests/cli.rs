use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

fn meridian(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_meridian"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("run.toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .filter(|(name, _)| name != "config.toml")
        .collect();
    files.sort();
    files
}

fn assert_deterministic(args: &[&str], config: Option<&str>) {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = meridian(args, config, a.path());
    let second = meridian(args, config, b.path());
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.status.code(), second.status.code());
    let (fa, fb) = (read_all(&a.path().join("out")), read_all(&b.path().join("out")));
    assert!(!fa.is_empty());
    assert_eq!(fa, fb);
}

#[test]
fn bmo_is_deterministic_and_flat() {
    assert_deterministic(&["bmo"], None);
    let dir = tempfile::tempdir().unwrap();
    assert!(meridian(&["bmo"], None, dir.path()).status.success());
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("out/bmo.json")).unwrap()).unwrap();
    assert!(json["max_mean_error"].as_f64().unwrap() < 1e-8);
    assert_eq!(json["variants"].as_array().unwrap().len(), 3);
    let csv = fs::read_to_string(dir.path().join("out/bmo.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn feasibility_is_deterministic_under_seed() {
    let cfg = "[feasibility]\nmus = [0.6, 1.0]\nn_delta = 40\nn_q = 40\nrandom_checks = 50\n[feasibility.sweep]\nmu_min = 0.67\nmu_max = 3.0\nn = 5\n";
    assert_deterministic(&["feasibility", "--seed", "7"], Some(cfg));
}

#[test]
fn feasibility_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = meridian(&["feasibility"], Some("[feasibility]\nmus = [0.6, 1.0]\nrandom_checks = 0\n"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("out/feasibility.json")).unwrap()).unwrap();
    let entries = json["entries"].as_array().unwrap();
    assert_eq!(entries[0]["verdict"], "infeasible");
    assert_eq!(entries[0]["region_nonempty"], false);
    assert_eq!(entries[1]["verdict"], "feasible");
    assert_eq!(entries[1]["construction_inside"], true);
}

#[test]
fn kernel_scan_refined_is_deterministic() {
    let cfg = "[kernel_scan]\nalphas = [0.0, 1.0]\n[kernel_scan.grid]\nn_r = 3\nn_ratio = 9\nn_zeta = 7\n";
    assert_deterministic(&["kernel-scan", "--refine"], Some(cfg));
    let dir = tempfile::tempdir().unwrap();
    assert!(meridian(&["kernel-scan", "--refine"], Some(cfg), dir.path()).status.success());
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("out/kernel_scan_summary.json")).unwrap()).unwrap();
    assert_eq!(json["refined"], true);
    assert!(json["scans"][0]["stability"]["overall_change"].is_number());
}

#[test]
fn roundtrip_zero_field_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = meridian(&["roundtrip"], Some("[roundtrip]\ncase = \"zero\"\nn_r = 2\nn_z = 1\n"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("out/roundtrip.json")).unwrap()).unwrap();
    assert_eq!(json["max_abs_error"].as_f64(), Some(0.0));
}

#[test]
fn violated_property_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[roundtrip]\nn_r = 1\nn_z = 1\nthreshold = 1e-30\n";
    let out = meridian(&["roundtrip"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn decay_above_two_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[decay]\nbeta = 3.0\nlevels = 5\n";
    let out = meridian(&["decay"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = fs::read_to_string(dir.path().join("out/decay_trace.csv")).unwrap();
    assert!(trace.starts_with("r,z,value,quad_err,tail_bound,I1"));
    assert_eq!(trace.lines().count(), 6);
}

#[test]
fn invalid_configs_fail_fast_with_status_two() {
    let cases = [
        ("decay", "[decay]\nbeta = 0.9\n", "beta"),
        ("decay", "[decay]\nbta = 3.0\n", "bta"),
        ("kernel-scan", "[kernel_scan]\nalphas = [7.0]\n", "alphas"),
        ("roundtrip", "[roundtrip]\nr_range = [0.5, 2.0]\n", "r_range"),
        ("bmo", "[bmo]\nratio_limit = 0.5\n", "ratio_limit"),
        ("feasibility", "[feasibility]\nmus = [-1.0]\n", "mus"),
        ("decay", "seed = \"x\"\n", "seed"),
        ("decay", "[decay]\nlevels = 3\n", "levels"),
    ];
    for (cmd, cfg, needle) in cases {
        let dir = tempfile::tempdir().unwrap();
        let t = Instant::now();
        let out = meridian(&[cmd], Some(cfg), dir.path());
        assert!(t.elapsed().as_secs_f64() < 1.0, "{cmd}: validation took too long");
        assert_eq!(out.status.code(), Some(2), "{cmd} with {cfg:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{err}");
        assert!(!dir.path().join("out").exists(), "no work before validation");
    }
}

#[test]
fn print_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = meridian(&["print-config", "--seed", "11"], None, dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed = 11"));
    let again = meridian(&["print-config"], Some(&text), dir.path());
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}
