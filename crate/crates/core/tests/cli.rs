use std::path::Path;
use std::process::{Command, Output};
use znd_core::cli::config::ScanConfig;
use znd_core::cli::emit::{records_csv, records_json};
use znd_core::cli::scan::ScanRecord;

fn znd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_znd")).args(args).output().expect("run znd")
}

fn small_config(dir: &Path) -> String {
    let cfg = serde_json::json!({
        "zeta_grid": {"box": {"re": [0.0, 1.0], "im": [-1.0, 1.0], "n_re": 3, "n_im": 3}, "refinement": false},
        "h_list": [0.1, 0.05],
        "outputs": {"directory": dir.join("out"), "formats": ["csv", "json", "svg"]}
    });
    let p = dir.join("cfg.json");
    std::fs::write(&p, cfg.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn empty_h_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"h_list": []}"#).unwrap();
    let out = znd(&["scan", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("h_list"));
}

#[test]
fn rerun_reads_cache_and_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let first = znd(&["scan", "--config", &cfg]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let out = dir.path().join("out");
    let csv1 = std::fs::read(out.join("records.csv")).unwrap();
    let json1 = std::fs::read(out.join("records.json")).unwrap();
    let second = znd(&["scan", "--config", &cfg]);
    assert!(String::from_utf8_lossy(&second.stdout).contains("(cache)"));
    assert_eq!(std::fs::read(out.join("records.csv")).unwrap(), csv1);
    assert_eq!(std::fs::read(out.join("records.json")).unwrap(), json1);
    // 9 box points × 2 step sizes plus the header.
    assert_eq!(String::from_utf8(csv1).unwrap().lines().count(), 19);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(znd(&["scan", "--config", &cfg, "--jobs", "1", "--out", a.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(znd(&["scan", "--config", &cfg, "--jobs", "3", "--out", b.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(std::fs::read(a.join("records.json")).unwrap(), std::fs::read(b.join("records.json")).unwrap());
}

#[test]
fn svg_is_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    assert_eq!(znd(&["scan", "--config", &cfg, "--format", "svg"]).status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("out/scan.svg")).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed XML");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    assert!(!text.contains("href"), "no external assets");
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 2);
}

fn one_record() -> ScanRecord {
    ScanRecord {
        zeta: znd_core::c64(0.25, -0.5),
        h: 0.02,
        class: "I".into(),
        regime: None,
        v: Some(znd_core::c64(1.5, -2.0)),
        abs_v: Some(2.5),
        l1: Some(znd_core::c64(0.1, 0.2)),
        theta1_residual: Some(1e-3),
        warnings: vec![],
    }
}

#[test]
fn single_record_csv_has_two_lines() {
    let csv = records_csv(&[one_record()]).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "zeta_re,zeta_im,h,class,regime,V_re,V_im,abs_V,abs_L1,theta1_residual");
    assert!(lines[1].starts_with("0.25,-0.5,0.02,I,,1.5,-2,2.5,"));
}

#[test]
fn json_round_trips() {
    let mut recs = vec![one_record(), one_record()];
    recs[1].v = None;
    recs[1].abs_v = None;
    recs[1].warnings.push("numerical failure: x".into());
    recs[1].zeta = znd_core::c64(0.1 + 0.2, 1.0 / 3.0);
    let back: Vec<ScanRecord> = serde_json::from_str(&records_json(&recs).unwrap()).unwrap();
    assert_eq!(back, recs);
}

#[test]
fn single_point_commands() {
    let ev = znd(&["evans", "--zeta", "0.5,0.9", "--h", "0.05", "--format", "csv"]);
    assert_eq!(ev.status.code(), Some(0));
    let text = String::from_utf8(ev.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    let m = znd(&["matrices", "--zeta", "0.1,0.9", "--x", "inf"]);
    assert_eq!(m.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&m.stdout).unwrap();
    assert_eq!(v["phi0"].as_array().unwrap().len(), 5);
    assert_eq!(znd(&["model-check", "--format", "csv"]).status.code(), Some(0));
    let p = znd(&["profile", "--samples", "5", "--format", "csv"]);
    assert_eq!(String::from_utf8(p.stdout).unwrap().lines().count(), 6);
}

#[test]
fn regimes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "zeta_grid": {"box": {"re": [0.0, 0.0], "im": [0.8, 0.9], "n_re": 1, "n_im": 3}, "refinement": false},
        "h_list": [0.01]
    });
    let p = dir.path().join("r.json");
    std::fs::write(&p, cfg.to_string()).unwrap();
    let out = znd(&["regimes", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["zeta_re", "zeta_im", "h", "class", "regime", "x_tp"]);
    // Im ζ = 0.85 is interior III₊: finite turning point, Regime II near ζ∞.
    assert_eq!(rows[2][3], "III+");
    assert!(rows[2][5].parse::<f64>().unwrap() > 0.0);
    assert_eq!(rows[2][4], "II");
    // Im ζ = 0.8 < |ζ∞| has no turning point.
    assert_eq!(rows[1][5], "");
}

#[test]
fn exit_codes() {
    assert_eq!(znd(&["evans", "--zeta=-1,0", "--h", "0.1"]).status.code(), Some(2));
    assert_eq!(znd(&["evans", "--zeta", "1", "--h", "0.1"]).status.code(), Some(1));
    assert_eq!(znd(&["nonsense"]).status.code(), Some(1));
    assert_eq!(znd(&["--help"]).status.code(), Some(0));
    assert_eq!(znd(&["scan", "--config", "/nonexistent/cfg.json"]).status.code(), Some(1));
}

#[test]
fn reference_config_parses() {
    let text = serde_json::to_string(&ScanConfig::default()).unwrap();
    assert_eq!(ScanConfig::from_json(&text).unwrap(), ScanConfig::default());
    let shipped = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/reference.json");
    assert_eq!(ScanConfig::from_path(Path::new(shipped)).unwrap(), ScanConfig::default());
}
