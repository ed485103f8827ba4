use std::path::Path;
use std::process::{Command, Output};

fn yil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yil")).args(args).env_remove("YIL_THREADS").output().expect("spawn yil")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn phase_sweep_reports_three_regimes() {
    let o = yil(&["phase", "--sigmas", "0.05,0.112736,0.2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let winners: Vec<&str> = out.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(out.lines().next().unwrap(), "sigma,r_opt,disk_energy,annulus_energy,winner");
    assert_eq!(winners, ["annulus", "tie", "disk"]);
}

#[test]
fn energy_both_methods_agree() {
    let o = yil(&["energy", "--shape", "disk", "--lambda", "2", "--alpha", "1", "--method", "both"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reps = v["reports"].as_array().unwrap();
    assert_eq!(reps.len(), 2);
    let t = |i: usize| reps[i]["total"].as_f64().unwrap();
    let e = |i: usize| reps[i]["est_error"].as_f64().unwrap();
    assert!((t(0) - t(1)).abs() <= e(0) + e(1));
    assert_eq!(reps[0]["method"], "bulk");
    assert_eq!(reps[1]["method"], "boundary_isotropic");
}

#[test]
fn energy_csv_has_twelve_significant_digits() {
    let o = yil(&["energy", "--shape", "ellipse", "--a", "1.5", "--b", "0.8", "--lambda", "3", "--alpha", "0.7", "--csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    let total = row.split(',').nth(5).unwrap();
    let mantissa = total.trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.replace('.', "").len(), 12, "{total}");
}

#[test]
fn validation_errors_exit_two_with_one_line() {
    for args in [
        &["energy", "--shape", "disk", "--a", "2"][..],
        &["energy", "--shape", "triangle"],
        &["energy", "--shape", "file", "--file", "/definitely/missing.json"],
        &["energy", "--lambda", "-1"],
        &["energy", "--alpha", "1", "--sigma", "0.5"],
        &["nonsense"],
        &["centered", "--inner", "1", "--offsets", "0.9"],
    ] {
        let o = yil(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        let err = stderr(&o);
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn numerical_failure_exits_three() {
    // Raster spacing too coarse for the kernel decay.
    let o = yil(&["energy", "--method", "bulk", "--lambda", "40", "--alpha", "1", "--h", "0.01"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn help_names_the_result_for_every_subcommand() {
    for (cmd, phrase) in [
        ("energy", "boundary"),
        ("expansion", "expansion"),
        ("phase", "phase diagram"),
        ("flow", "gradient flow"),
        ("centered", "annulus"),
        ("kernels", "Yukawa"),
        ("validate", "half-plane"),
    ] {
        let o = yil(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains(phrase), "{cmd}: {}", stdout(&o));
    }
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"subcommand": "phase", "sigmas": [0.05, 0.3]}"#).unwrap();
    let c = cfg.to_str().unwrap();

    let from_file = stdout(&yil(&["--config", c, "phase"]));
    assert_eq!(from_file.lines().count(), 3);
    let overridden = stdout(&yil(&["--config", c, "phase", "--sigmas", "0.2"]));
    assert_eq!(overridden.lines().count(), 2);
    assert!(overridden.lines().nth(1).unwrap().starts_with("2.00000000000e-1"));

    let wrong = yil(&["--config", c, "energy"]);
    assert_eq!(wrong.status.code(), Some(2));

    std::fs::write(&cfg, r#"{"sigmas": [0.05], "colour": "blue"}"#).unwrap();
    assert_eq!(yil(&["--config", c, "phase"]).status.code(), Some(2));
}

#[test]
fn output_file_is_written_whole() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("phase.csv");
    let o = yil(&["--output", out.to_str().unwrap(), "phase", "--sigmas", "0.1,0.2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text, stdout(&yil(&["phase", "--sigmas", "0.1,0.2"])));
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1, "temporary files left behind");
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["energy", "--shape", "ellipse", "--lambda", "3", "--alpha", "0.8", "--method", "all"];
    let run = |n: &str| {
        let mut full = vec!["--threads", n];
        full.extend_from_slice(&args);
        let v: serde_json::Value = serde_json::from_str(&stdout(&yil(&full))).unwrap();
        v["reports"].as_array().unwrap().iter().map(|r| r["total"].as_f64().unwrap()).collect::<Vec<_>>()
    };
    let (one, four) = (run("1"), run("4"));
    assert_eq!(one.len(), 3);
    for (a, b) in one.iter().zip(&four) {
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn threads_fall_back_to_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_yil"))
        .args(["phase", "--sigmas", "0.1"])
        .env("YIL_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_is_byte_identical() {
    let a = yil(&["--threads", "2", "validate"]);
    let b = yil(&["--threads", "2", "validate"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.starts_with("check,value,expected,abs_err,tolerance,pass\n"));
    assert!(out.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn flow_writes_trace_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let snaps = dir.path().join("snaps");
    let o = yil(&[
        "flow",
        "--steps",
        "40",
        "--snapshot-every",
        "20",
        "--snapshot-dir",
        snaps.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().next().unwrap(), "step,energy,area,residual");
    let steps: Vec<usize> = out.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(steps, [0, 10, 20, 30, 40]);
    let mut names: Vec<String> =
        std::fs::read_dir(&snaps).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["shape_0000000.json", "shape_0000020.json", "shape_0000040.json"]);
    let shape = yil_core::CurveSystem::load(Path::new(&snaps.join("shape_0000040.json"))).unwrap();
    assert!((shape.area() - std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn file_shape_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ann.json");
    let sys = yil_core::CurveSystem::unit_mass_annulus(2.0, 64, 64).unwrap();
    std::fs::write(&path, sys.to_json_string().unwrap()).unwrap();
    let from_file = stdout(&yil(&["energy", "--shape", "file", "--file", path.to_str().unwrap(), "--csv"]));
    let built = stdout(&yil(&["energy", "--shape", "annulus", "--inner", "2", "--csv"]));
    let total = |s: &str| s.lines().nth(1).unwrap().split(',').nth(5).unwrap().parse::<f64>().unwrap();
    assert!((total(&from_file) - total(&built)).abs() < 1e-9);
}

#[test]
fn kernels_prints_comparison_and_slope() {
    let o = yil(&["kernels", "--radii", "0.5,2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 3);
    assert!(stderr(&o).contains("log-slope"));
    assert_eq!(yil(&["kernels", "--kappa", "0"]).status.code(), Some(2));
}

#[test]
fn critical_point_as_json() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&yil(&["phase", "--critical"]))).unwrap();
    assert!((v["sigma_bar"].as_f64().unwrap() - 0.112736).abs() < 1e-4);
    assert!((v["r_bar"].as_f64().unwrap() - 3.66882).abs() < 1e-3);
}

#[test]
fn expansion_and_critical_tables() {
    let o = yil(&["expansion", "--lambdas", "16,32"]);
    assert!(stdout(&o).starts_with("lambda,total,scaled_excess,extrapolated,target\n"));
    let o = yil(&["expansion", "--sigma", "1", "--lambdas", "16"]);
    assert!(stdout(&o).starts_with("lambda,scaled_energy,limit_value,rel_err\n"));
}
