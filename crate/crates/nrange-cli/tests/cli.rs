use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_nrange");

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nrange-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary must run")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

const JORDAN2: &str =
    r#"{"dim": 2, "entries": [[[0.0,0.0],[1.0,0.0]],[[0.0,0.0],[0.0,0.0]]]}"#;

// ‖T‖ = 2: not a contraction
const DOUBLE: &str = r#"{"dim": 1, "entries": [[[2.0,0.0]]]}"#;

// eigenvalue 1 on the circle, defect index 1
const MIXED: &str = r#"{"dim": 2, "entries": [[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.5,0.0]]]}"#;

#[test]
fn range_reports_the_jordan_disk() {
    let dir = scratch("range");
    let input = dir.join("m.json");
    fs::write(&input, JORDAN2).unwrap();
    let out = run(&["range", input.to_str().unwrap(), "--phi-samples", "128"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["dim"], 2);
    let radius = report["numerical_radius"].as_f64().unwrap();
    assert!((radius - 0.5).abs() < 1e-3, "radius {radius}");
    let h = report["region"]["h"].as_array().unwrap();
    assert_eq!(h.len(), 128);
    for v in h {
        assert!((v.as_f64().unwrap() - 0.5).abs() < 1e-10);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = scratch("determinism");
    let input = dir.join("m.json");
    fs::write(&input, JORDAN2).unwrap();
    let one = dir.join("one.json");
    let two = dir.join("two.json");
    for out in [&one, &two] {
        let r = run(&[
            "range",
            input.to_str().unwrap(),
            "--phi-samples",
            "64",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&r), 0);
    }
    assert_eq!(fs::read(&one).unwrap(), fs::read(&two).unwrap());
}

#[test]
fn bad_grids_and_bad_json_exit_3() {
    let dir = scratch("badinput");
    let input = dir.join("m.json");
    fs::write(&input, JORDAN2).unwrap();
    let out = run(&["range", input.to_str().unwrap(), "--phi-samples", "10"]);
    assert_eq!(code(&out), 3);
    let out = run(&["range", input.to_str().unwrap(), "--phi-samples", "129"]);
    assert_eq!(code(&out), 3, "odd grids are rejected");
    let broken = dir.join("broken.json");
    fs::write(&broken, "{не json").unwrap();
    let out = run(&["range", broken.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let out = run(&["range", dir.join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let out = run(&["verify", input.to_str().unwrap(), "--lam-samples", "12"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn dilate_places_the_requested_eigenvalue() {
    let dir = scratch("dilate");
    let input = dir.join("m.json");
    fs::write(&input, JORDAN2).unwrap();
    let outfile = dir.join("dilation.json");
    let out = run(&[
        "dilate",
        input.to_str().unwrap(),
        "--eig",
        "0.0,1.0",
        "--out",
        outfile.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&outfile).unwrap()).unwrap();
    assert_eq!(record["dim"], 3);
    assert_eq!(record["base_dim"], 2);
    assert_eq!(record["targets"][0]["lambda"][1], 1.0);
    assert_eq!(record["targets"][0]["multiplicity"], 1);
    assert!(record["omega"]["dim"].as_u64().unwrap() == 1);
}

#[test]
fn dilate_without_targets_is_the_plain_completion() {
    let dir = scratch("dilateplain");
    let input = dir.join("m.json");
    fs::write(&input, JORDAN2).unwrap();
    let out = run(&["dilate", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let record: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(record["dim"], 3);
    assert!(record["targets"].as_array().unwrap().is_empty());
}

#[test]
fn contraction_and_spectrum_failures_have_distinct_codes() {
    let dir = scratch("failcodes");
    let double = dir.join("double.json");
    fs::write(&double, DOUBLE).unwrap();
    let out = run(&["dilate", double.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let mixed = dir.join("mixed.json");
    fs::write(&mixed, MIXED).unwrap();
    // 1 already sits in the spectrum: nothing to place there
    let out = run(&["dilate", mixed.to_str().unwrap(), "--eig", "1.0,0.0"]);
    assert_eq!(code(&out), 4, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let jordan = dir.join("jordan.json");
    fs::write(&jordan, JORDAN2).unwrap();
    // defect index is 1, so multiplicities must sum to 1
    let out = run(&["dilate", jordan.to_str().unwrap(), "--eig", "1.0,0.0:2"]);
    assert_eq!(code(&out), 5);
}

#[test]
fn verify_passes_and_fails_by_tolerance() {
    let dir = scratch("verify");
    let input = dir.join("m.json");
    fs::write(&input, JORDAN2).unwrap();
    let out = run(&[
        "verify",
        input.to_str().unwrap(),
        "--phi-samples",
        "256",
        "--lam-samples",
        "90",
        "--tol",
        "0.02",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert!(report["shrink_factor"].as_f64().unwrap() > 1.5);

    let out = run(&[
        "verify",
        input.to_str().unwrap(),
        "--phi-samples",
        "256",
        "--lam-samples",
        "90",
        "--tol",
        "1e-9",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn verify_needs_defect_one() {
    let dir = scratch("defect2");
    // I - T*T = (3/4)·I on two dimensions: defect index 2
    let input = dir.join("half.json");
    fs::write(
        &input,
        r#"{"dim": 2, "entries": [[[0.5,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.5]]]}"#,
    )
    .unwrap();
    let out = run(&["verify", input.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn model_writes_the_report_files() {
    let dir = scratch("model");
    let input = dir.join("theta.json");
    fs::write(&input, r#"{"zeros": [[0.0,0.0],[0.5,0.0]], "atoms": [], "tail": null}"#).unwrap();
    let outdir = dir.join("report");
    let svg = dir.join("picture.svg");
    let out = run(&[
        "model",
        input.to_str().unwrap(),
        "--phi-samples",
        "256",
        "--lam-samples",
        "36",
        "--out",
        outdir.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for name in ["region.json", "classification.json", "matrix.json", "poncelet.json"] {
        assert!(outdir.join(name).exists(), "{name} missing");
    }
    let poncelet: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(outdir.join("poncelet.json")).unwrap()).unwrap();
    let rows = poncelet.as_array().unwrap();
    assert_eq!(rows.len(), 36);
    for row in rows {
        assert!(row["max_side_gap"].as_f64().unwrap() < 1e-8);
        assert_eq!(row["angles"].as_array().unwrap().len(), 3);
    }
    let picture = fs::read_to_string(&svg).unwrap();
    assert!(picture.starts_with("<svg"));

    // atoms and tails have no finite matrix model: only the function-side
    // outputs appear
    let atom_input = dir.join("atom.json");
    fs::write(&atom_input, r#"{"zeros": [], "atoms": [{"angle": 0.0, "mass": 0.4}]}"#).unwrap();
    let atom_out = dir.join("atomreport");
    let out = run(&[
        "model",
        atom_input.to_str().unwrap(),
        "--phi-samples",
        "256",
        "--out",
        atom_out.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(atom_out.join("region.json").exists());
    assert!(!atom_out.join("matrix.json").exists());
}

#[test]
fn undeclared_tail_verdict_exits_6() {
    let dir = scratch("tail6");
    let input = dir.join("theta.json");
    fs::write(
        &input,
        r#"{"zeros": [], "atoms": [],
            "tail": {"kind": "geometric_stolz",
                     "params": {"angle": 1.0, "ratio": 0.5, "scale": 0.01}}}"#,
    )
    .unwrap();
    let out = run(&["model", input.to_str().unwrap(), "--phi-samples", "256"]);
    assert_eq!(code(&out), 6, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}
