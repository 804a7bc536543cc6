//! Output files written by the runner and the command-line front end.

use std::fs;
use std::path::Path;
use std::process::Command;

use cpstab::runner::output::{read_f64_le, read_json, read_state, read_survival_csv, FrameSidecar};
use cpstab::runner::{load_manifest, parse_config_with, run, RunOutcome};

const SMALL: &str = "\
n = 16
spacing = 0.4
sigma = 1.25
n_cycles = 1
dt = 0.05
absorber_width = 1.5
frame_every_cycles = 0.5
snapshot_times = 2.0
survival_every = 5
relax_tol = 1e-8
scan_fields = 0.5, 1.0
force = true
";

fn run_small(dir: &Path, mode: &str, extra: &[(&str, &str)]) -> RunOutcome {
    let mut ov = vec![
        ("mode", mode.to_string()),
        ("out_dir", dir.display().to_string()),
    ];
    ov.extend(extra.iter().map(|(k, v)| (*k, v.to_string())));
    let cfg = parse_config_with(SMALL, &ov).unwrap();
    run(&cfg, |_| {}).unwrap()
}

#[test]
fn manifest_lists_every_file_with_record_counts() {
    let dir = tempfile::tempdir().unwrap();
    run_small(dir.path(), "scan", &[]);
    let m = load_manifest(dir.path()).unwrap();
    assert_eq!(m.runs.len(), 2);

    let mut on_disk: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    let mut listed: Vec<String> = m.files.iter().map(|f| f.path.clone()).collect();
    listed.sort();
    assert_eq!(on_disk, listed);

    for f in &m.files {
        let p = dir.path().join(&f.path);
        if f.path.ends_with(".csv") {
            assert_eq!(
                read_survival_csv(&p).unwrap().len(),
                f.records,
                "{}",
                f.path
            );
        } else if f.path.ends_with(".bin") {
            assert_eq!(read_f64_le(&p).unwrap().len(), f.records, "{}", f.path);
        }
    }

    let g = m.grid;
    for r in &m.runs {
        // frames at 0, τ/2, τ and the extra snapshot
        assert_eq!(r.slices.len(), 4);
        assert_eq!(r.profiles.len(), 4);
        assert!(r.overlap.is_some());
        assert!(r.end_interior_norm <= r.end_total_norm);
        for s in &r.slices {
            let side: FrameSidecar = read_json(&dir.path().join(&s.sidecar)).unwrap();
            assert_eq!(side.kind, "slice");
            assert_eq!(side.shape, vec![g.n_x, g.n_y]);
            assert_eq!(side.data, s.data);
            let data = read_f64_le(&dir.path().join(&s.data)).unwrap();
            assert!(data.iter().all(|v| v.is_finite() && *v >= 0.0));
        }
        for p in &r.profiles {
            let side: FrameSidecar = read_json(&dir.path().join(&p.sidecar)).unwrap();
            assert_eq!(side.kind, "profile");
            assert_eq!(side.shape, vec![g.n_x]);
            assert_eq!(side.maxima, p.maxima);
            assert!((side.origin[0] + 0.5 * (g.n_x - 1) as f64 * g.spacing).abs() < 1e-12);
        }
    }

    let ground = m.ground_state.unwrap();
    let psi = read_state(&dir.path().join(&ground.data), &g).unwrap();
    assert!((psi.norm() - 1.0).abs() < 1e-10);
    assert!(ground.energy < 0.0);
}

#[test]
fn reruns_are_byte_identical_and_fields_are_independent() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    run_small(a.path(), "scan", &[]);
    run_small(b.path(), "scan", &[]);
    run_small(c.path(), "pulse", &[("peak_field", "1.0")]);
    let read = |d: &Path, name: &str| fs::read(d.join(name)).unwrap();
    for name in [
        "survival_F0.500.csv",
        "survival_F1.000.csv",
        "ground_state.bin",
    ] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    // a field's run does not depend on which other fields share the scan
    assert_eq!(
        read(a.path(), "survival_F1.000.csv"),
        read(c.path(), "survival_F1.000.csv")
    );
}

#[test]
fn cached_ground_state_is_reused_only_when_settings_match() {
    let dir = tempfile::tempdir().unwrap();
    run_small(dir.path(), "relax", &[]);
    let first = fs::metadata(dir.path().join("ground_state.bin"))
        .unwrap()
        .modified()
        .unwrap();
    let logged = |extra: &[(&str, &str)]| {
        let mut ov = vec![
            ("mode", "pulse".to_string()),
            ("peak_field", "0.5".to_string()),
            ("out_dir", dir.path().display().to_string()),
        ];
        ov.extend(extra.iter().map(|(k, v)| (*k, v.to_string())));
        let cfg = parse_config_with(SMALL, &ov).unwrap();
        let mut lines = Vec::new();
        run(&cfg, |l| lines.push(l.to_string())).unwrap();
        lines
    };
    assert!(logged(&[])
        .iter()
        .any(|l| l.starts_with("ground state loaded")));
    let again = fs::metadata(dir.path().join("ground_state.bin"))
        .unwrap()
        .modified()
        .unwrap();
    assert_eq!(first, again);
    assert!(logged(&[("relax_tol", "1e-7")])
        .iter()
        .any(|l| l == "relaxing ground state"));
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cpstab"))
}

#[test]
fn check_prints_one_line_per_field() {
    let out = cli().arg("check").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("F=2.5000 U_p=1.085069 k_max=2.740514 margin=6.876734"));
    assert!(lines.iter().all(|l| l.ends_with("PASS")));
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "spacing = 1.0\nsigma = 3.0\nn = 40\n").unwrap();
    let status = |args: &[&str]| cli().args(args).output().unwrap().status.code();

    // resolution gate
    assert_eq!(
        status(&["pulse", "--config", cfg.to_str().unwrap()]),
        Some(1)
    );
    fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(
        status(&["check", "--config", cfg.to_str().unwrap()]),
        Some(1)
    );
    assert_eq!(
        status(&["check", "--config", "/nonexistent/run.cfg"]),
        Some(3)
    );
    // relaxation on a box too small to bind runs out of steps
    fs::write(
        &cfg,
        "n = 4\nspacing = 0.3\nabsorber_width = 0\nrelax_max_steps = 3\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    assert_eq!(
        status(&[
            "relax",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        Some(2)
    );
}
