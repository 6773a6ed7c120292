use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qfim_cli::golden::{asymmetric_cloud, three_collinear, two_sources, intensity_params};
use qfim_cli::report::deviation;
use qfim_cli::{compute, resolve_tolerances, run_sweep, write_sweep, ReportFile, SceneFile, SceneOptions, Sweep};
use qfim_core::imaging::{Axis, ParamSpec, Source};
use qfim_core::QfimOptions;

fn qfim_bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qfim"));
    c.env_remove("QFIM_RANK_TOL");
    c
}

fn two_source_file(compare: bool) -> SceneFile {
    SceneFile {
        schema_version: 1,
        scene: two_sources(
            [1e-3, -2e-3, 0.0],
            [5e-4, 1.5e-4, 0.0],
            0.3,
            asymmetric_cloud(0.05),
            2000.0,
            vec![
                ParamSpec::Relative { axis: Axis::X, sources: [0, 1] },
                ParamSpec::Centroid { axis: Axis::X, sources: [0, 1] },
                ParamSpec::Probability { source: 0 },
            ],
        ),
        options: SceneOptions {
            compare_closed_form: compare,
            ..SceneOptions::default()
        },
    }
}

fn write_scene(dir: &Path, name: &str, file: &SceneFile) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, file.to_json()).unwrap();
    p
}

fn run(args: &[&str], dir: &Path) -> Output {
    qfim_bin().args(args).current_dir(dir).output().unwrap()
}

#[test]
fn report_round_trips_field_for_field() {
    let file = two_source_file(true);
    let rep = compute(&file, QfimOptions::default()).unwrap();
    let back = ReportFile::from_json(&rep.to_json(), "memory").unwrap();
    assert_eq!(back, rep);
    assert_eq!(back.h_matrix().max_abs_diff(&rep.h_matrix()), 0.0);
    assert_eq!(back.labels, vec!["dx", "cx", "p1"]);
}

#[test]
fn scene_file_round_trips() {
    let file = two_source_file(false);
    assert_eq!(SceneFile::from_json(&file.to_json(), "memory").unwrap(), file);
}

#[test]
fn two_source_comparison_is_within_tolerance() {
    let rep = compute(&two_source_file(true), QfimOptions::default()).unwrap();
    let cf = rep.closed_form.as_ref().expect("two-source comparison");
    assert_eq!(cf.kind, "two_source");
    assert_eq!(cf.labels.len(), 7);
    let worst = cf.h_deviation.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    assert!(worst < 2e-2, "{worst}");
    assert!(cf.gamma.is_some());
}

#[test]
fn three_source_comparison_uses_the_intensity_form() {
    let file = SceneFile {
        schema_version: 1,
        scene: three_collinear(1e-3, 1.0 / 3.0, 1.0 / 3.0, asymmetric_cloud(0.05), 2000.0, intensity_params()),
        options: SceneOptions {
            compare_closed_form: true,
            ..SceneOptions::default()
        },
    };
    let rep = compute(&file, QfimOptions::default()).unwrap();
    let cf = rep.closed_form.unwrap();
    assert_eq!(cf.kind, "three_source_intensity");
    assert!(cf.h_deviation.iter().flatten().all(|&d| d < 2e-2));
}

#[test]
fn unsupported_comparisons_warn() {
    let mut file = two_source_file(true);
    file.scene.sources.push(Source::new(3e-3, 1e-3, 0.0, 0.5));
    let rep = compute(&file, QfimOptions::default()).unwrap();
    assert!(rep.closed_form.is_none());
    assert!(rep.warnings.iter().any(|w| w.contains("no closed form")));
}

#[test]
fn deviation_uses_column_scale_for_zero_entries() {
    let cf = qfim_core::RealMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
    let num = qfim_core::RealMatrix::from_rows(&[vec![2.2, 0.04], vec![0.01, 4.0]]).unwrap();
    let d = deviation(&num, &cf, &[(0, 1), (1, 1)]);
    assert!((d[(0, 0)] - 0.1).abs() < 1e-12);
    assert!((d[(0, 1)] - 0.01).abs() < 1e-12);
    assert!((d[(1, 0)] - 0.005).abs() < 1e-12);
    assert_eq!(d[(1, 1)], 0.0);
}

#[test]
fn compute_is_bit_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "s.json", &two_source_file(true));
    let a = run(&["compute", scene.to_str().unwrap()], dir.path());
    let b = run(&["compute", scene.to_str().unwrap()], dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);

    let out = dir.path().join("r.json");
    let c = run(&["compute", scene.to_str().unwrap(), "-o", out.to_str().unwrap()], dir.path());
    assert_eq!(c.status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
}

#[test]
fn rank_deficient_scene_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut file = two_source_file(false);
    file.scene.sources[1] = file.scene.sources[0];
    file.scene.sources[1].intensity = 0.7;
    let scene = write_scene(dir.path(), "s.json", &file);
    let o = run(&["compute", scene.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("rank deficient") && err.contains("[0, 1]"), "{err}");
}

#[test]
fn unparsable_or_invalid_scenes_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let good = two_source_file(false).to_json();
    let cases = [
        ("garbage.json", "{ not json".to_string()),
        ("schema.json", good.replace("\"schema_version\": 1", "\"schema_version\": 2")),
        ("k.json", good.replace("\"k\": 2000.0", "\"k\": -1.0")),
        ("unknown.json", good.replace("\"schema_version\": 1", "\"schema_version\": 1, \"extra\": 0")),
    ];
    for (name, text) in cases {
        assert_ne!(text, good, "{name} did not modify the scene");
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        let o = run(&["compute", p.to_str().unwrap()], dir.path());
        assert_eq!(o.status.code(), Some(3), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn missing_scene_is_a_generic_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["compute", "does-not-exist.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify"], dir.path());
    let out = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 3, "{out}");
}

#[test]
fn tolerance_precedence() {
    let mut opts = SceneOptions::default();
    std::env::set_var("QFIM_RANK_TOL", "1e-9");
    assert_eq!(resolve_tolerances(&opts, None, None).unwrap().rank_tol, 1e-9);
    opts.rank_tol = Some(1e-8);
    assert_eq!(resolve_tolerances(&opts, None, None).unwrap().rank_tol, 1e-8);
    assert_eq!(resolve_tolerances(&opts, Some(1e-7), None).unwrap().rank_tol, 1e-7);
    std::env::remove_var("QFIM_RANK_TOL");
    assert_eq!(
        resolve_tolerances(&SceneOptions::default(), None, None).unwrap(),
        QfimOptions::default()
    );
    assert!(resolve_tolerances(&SceneOptions::default(), Some(-1.0), None).is_err());
    assert!(resolve_tolerances(&SceneOptions::default(), None, Some(0.0)).is_err());
}

#[test]
fn environment_and_flags_reach_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "s.json", &two_source_file(false));
    let o = qfim_bin()
        .env("QFIM_RANK_TOL", "3e-11")
        .args(["compute", scene.to_str().unwrap()])
        .output()
        .unwrap();
    let rep = ReportFile::from_json(&String::from_utf8(o.stdout).unwrap(), "stdout").unwrap();
    assert_eq!(rep.diagnostics.rank_tol, 3e-11);

    let o = qfim_bin()
        .env("QFIM_RANK_TOL", "3e-11")
        .args(["--rank-tol", "2e-12", "--solve-tol", "1e-13", "compute", scene.to_str().unwrap()])
        .output()
        .unwrap();
    let rep = ReportFile::from_json(&String::from_utf8(o.stdout).unwrap(), "stdout").unwrap();
    assert_eq!(rep.diagnostics.rank_tol, 2e-12);
    assert_eq!(rep.diagnostics.solve_tol, 1e-13);
}

fn sweep_file() -> SceneFile {
    let mut file = two_source_file(false);
    file.scene.estimate = vec![ParamSpec::Probability { source: 0 }];
    file.options.sweep = Some(Sweep {
        parameter: "delta.x".into(),
        values: vec![1e-4, 3e-4, 1e-3],
    });
    file
}

#[test]
fn sweep_writes_reports_and_csv_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let file = sweep_file();
    let res = write_sweep(&file, QfimOptions::default(), &out).unwrap();
    assert_eq!(res.report_paths.len(), 3);
    for (i, p) in res.report_paths.iter().enumerate() {
        let rep = ReportFile::from_json(&std::fs::read_to_string(p).unwrap(), "sweep").unwrap();
        assert_eq!(rep, res.reports[i].1);
    }
    let mut rd = csv::Reader::from_path(&res.csv_path).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, vec!["delta.x", "max_relative_residual", "H[p1,p1]"]);
    let rows: Vec<Vec<f64>> = rd
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![1e-4, 3e-4, 1e-3]);
    assert!(rows.windows(2).all(|w| w[1][2] > w[0][2]));
    for (row, (_, rep)) in rows.iter().zip(&res.reports) {
        assert_eq!(row[2], rep.h[0][0]);
    }
    assert_eq!(run_sweep(&file, QfimOptions::default()).unwrap(), res.reports);
}

#[test]
fn sweep_command_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "s.json", &sweep_file());
    let o = run(&["sweep", scene.to_str().unwrap(), "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lib = tempfile::tempdir().unwrap();
    write_sweep(&sweep_file(), QfimOptions::default(), lib.path()).unwrap();
    assert_eq!(
        std::fs::read(dir.path().join("out/sweep.csv")).unwrap(),
        std::fs::read(lib.path().join("sweep.csv")).unwrap()
    );
}

#[test]
fn sweep_without_section_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), "s.json", &two_source_file(false));
    let o = run(&["sweep", scene.to_str().unwrap(), "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let mut bad = sweep_file();
    bad.options.sweep.as_mut().unwrap().parameter = "source.x".into();
    let scene = write_scene(dir.path(), "bad.json", &bad);
    let o = run(&["sweep", scene.to_str().unwrap(), "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bundled_scenes_compute() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenes");
    for name in ["two_sources.json", "three_sources_intensity.json"] {
        let file = SceneFile::load(&dir.join(name)).unwrap();
        let rep = compute(&file, QfimOptions::default()).unwrap();
        let cf = rep.closed_form.expect(name);
        assert!(cf.h_deviation.iter().flatten().all(|&d| d < 2e-2), "{name}");
        assert!(rep.warnings.is_empty(), "{name}: {:?}", rep.warnings);
    }
    let sweep = SceneFile::load(&dir.join("separation_sweep.json")).unwrap();
    assert_eq!(run_sweep(&sweep, QfimOptions::default()).unwrap().len(), 3);
}
