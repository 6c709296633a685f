use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lambshift(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lambshift"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("LAMBSHIFT_OUT_DIR")
        .output()
        .expect("spawn lambshift")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &[&str] = &[
    "--set",
    "array.n_atoms=4",
    "--set",
    "scan.points=11",
    "--realizations",
    "3",
];

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = lambshift(&["selftest"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("selftest.json"));
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 5);
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn single_atom_spectrum_is_unshifted() {
    let dir = tempfile::tempdir().unwrap();
    let out = lambshift(
        &["spectrum", "--set", "array.n_atoms=1", "--set", "trap.model=none"],
        dir.path(),
    );
    assert!(out.status.success());
    let report = json(&dir.path().join("spectrum.json"));
    let shift = report["summary"]["shift_hz"].as_f64().unwrap();
    let err = report["summary"]["shift_err_hz"].as_f64().unwrap();
    assert!(shift.abs() <= err.max(1.0), "{shift} ± {err}");
    let csv = fs::read_to_string(dir.path().join("spectrum_spectrum.csv")).unwrap();
    assert!(csv.starts_with("delta_l_hz,fraction,stderr,n,analytic_fraction\n"));
}

#[test]
fn manifest_lists_existing_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = lambshift(&["depump"], dir.path());
    assert!(out.status.success());
    let m = json(&dir.path().join("depump_manifest.json"));
    assert_eq!(m["success"], true);
    assert_eq!(m["seed"], 1);
    let artifacts = m["artifacts"].as_array().unwrap();
    assert_eq!(artifacts.len(), 2);
    for a in artifacts {
        assert!(Path::new(a.as_str().unwrap()).exists());
    }
    let csv = fs::read_to_string(dir.path().join("depump_curve.csv")).unwrap();
    assert!(csv.starts_with("t_s,p_remain,"));
}

#[test]
fn precedence_file_then_set_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "seed = 3\nn_realizations = 2\n[array]\nn_atoms = 3\nspacing_um = 2.0\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();

    let out = lambshift(&["depump", "--config", c], dir.path());
    assert!(out.status.success());
    let m = json(&dir.path().join("depump_manifest.json"));
    assert_eq!(m["config"]["seed"], 3);
    assert_eq!(m["config"]["array"]["n_atoms"], 3);
    assert_eq!(m["config"]["array"]["spacing_um"], 2.0);

    let out = lambshift(
        &["depump", "--config", c, "--set", "seed=4", "--set", "array.n_atoms=5"],
        dir.path(),
    );
    assert!(out.status.success());
    let m = json(&dir.path().join("depump_manifest.json"));
    assert_eq!(m["config"]["seed"], 4);
    assert_eq!(m["config"]["array"]["n_atoms"], 5);
    assert_eq!(m["config"]["array"]["spacing_um"], 2.0);

    let out = lambshift(
        &[
            "depump",
            "--config",
            c,
            "--set",
            "seed=4",
            "--seed",
            "8",
            "--realizations",
            "7",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let m = json(&dir.path().join("depump_manifest.json"));
    assert_eq!(m["config"]["seed"], 8);
    assert_eq!(m["config"]["n_realizations"], 7);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lambshift"))
        .arg("depump")
        .env("LAMBSHIFT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("depump.json").exists());
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["spectrum", "--set", "array.n_atoms=0"],
        &["spectrum", "--set", "array.bogus=1"],
        &["spectrum", "--set", "drive.rabi_gamma=\"strong\""],
        &["spectrum", "--config", "/nonexistent/run.toml"],
        &["spectrum", "--set", "noequals"],
        &["depump", "--threads", "0"],
    ];
    for args in cases {
        let out = lambshift(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(
            String::from_utf8_lossy(&out.stderr).contains("config error"),
            "{args:?}"
        );
    }
    let out = lambshift(&["spectrum", "--set", "array.n_atoms=0"], dir.path());
    assert!(String::from_utf8_lossy(&out.stderr).contains("array.n_atoms"));
}

#[test]
fn numerical_failure_exits_with_3_and_partial_manifest() {
    let dir = tempfile::tempdir().unwrap();
    // Three scan points cannot support a three-parameter line fit.
    let out = lambshift(
        &[
            "spectrum",
            "--set",
            "array.n_atoms=2",
            "--set",
            "scan.points=3",
            "--realizations",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let m = json(&dir.path().join("spectrum_manifest.json"));
    assert_eq!(m["success"], false);
    assert!(m["error"].as_str().unwrap().contains("fit"));
    assert_eq!(m["config"]["scan"]["points"], 3);
    assert!(m["artifacts"].as_array().unwrap().is_empty());
}

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.file_name().unwrap().to_str().unwrap().ends_with("_manifest.json"))
        .map(|p| {
            (
                p.file_name().unwrap().to_str().unwrap().to_string(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    for cmd in ["spectrum", "position-resolved"] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut args = vec![cmd];
        args.extend_from_slice(SMALL);
        let mut one = args.clone();
        one.extend(["--threads", "1"]);
        let mut four = args.clone();
        four.extend(["--threads", "4"]);
        assert!(lambshift(&one, a.path()).status.success());
        assert!(lambshift(&four, b.path()).status.success());
        let (oa, ob) = (outputs(a.path()), outputs(b.path()));
        assert!(oa.len() >= 2);
        assert_eq!(oa, ob, "{cmd}");
    }
}

#[test]
fn ramsey_emits_fringes_and_shift_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = lambshift(
        &[
            "ramsey",
            "--set",
            "array.n_atoms=3",
            "--set",
            "ramsey.pulse_areas_pi=[0.5]",
            "--set",
            "ramsey.wait_gamma_t=[0.7, 1.5]",
            "--set",
            "ramsey.trap.model=none",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let shift = fs::read_to_string(dir.path().join("ramsey_shift.csv")).unwrap();
    assert_eq!(shift.lines().count(), 3);
    let fringes = fs::read_to_string(dir.path().join("ramsey_fringes.csv")).unwrap();
    assert_eq!(fringes.lines().count(), 1 + 2 * 41);
}
