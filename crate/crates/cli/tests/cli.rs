use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn relaxlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaxlab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("RELAXLAB_JOBS")
        .output()
        .expect("binary runs")
}

fn run_dir(out: &Path) -> std::path::PathBuf {
    let mut dirs: Vec<_> = fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.pop().unwrap()
}

#[test]
fn spectrum_config_writes_svg_and_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("spectrum.json");
    fs::write(&cfg, r#"{"experiment": "spectrum", "model": {"a": [1], "eps": 1, "d": 1}}"#).unwrap();
    let out = tmp.path().join("runs");
    let o = relaxlab(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().count(), 1, "{stdout}");
    assert!(stdout.starts_with("spectrum:"));
    let dir = run_dir(&out);
    for f in ["config.json", "fits.json", "norms.csv", "curves.svg", "spectrum.csv"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
}

#[test]
fn bad_config_names_the_path_and_exits_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, r#"{"experiment": "spectrum", "model": {"a": [-1], "eps": 1, "d": 1}}"#).unwrap();
    let o = relaxlab(&["--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("model.a[0]") && err.contains("a_i > 0"), "{err}");
}

#[test]
fn selftest_preset_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = relaxlab(&["--preset", "selftest", "--out", "r", "--jobs", "2"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("19/19 checks passed"));
}

#[test]
fn seed_changes_the_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    relaxlab(&["--preset", "selftest", "--out", a.to_str().unwrap()], tmp.path());
    relaxlab(&["--preset", "selftest", "--out", b.to_str().unwrap(), "--seed", "3"], tmp.path());
    assert_ne!(run_dir(&a).file_name(), run_dir(&b).file_name());
}

#[test]
fn same_config_twice_gives_identical_fits() {
    let tmp = tempfile::tempdir().unwrap();
    let read = |dir: &str| {
        let o = relaxlab(&["--preset", "fig1-overdamping", "--out", dir], tmp.path());
        assert!(o.status.success());
        fs::read(run_dir(&tmp.path().join(dir)).join("fits.json")).unwrap()
    };
    assert_eq!(read("x"), read("y"));
}

#[test]
fn plot_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("d.csv");
    fs::write(&csv, "t,y\n1,1\n2,0.5\n4,0.25\n").unwrap();
    let svg = tmp.path().join("d.svg");
    let o = relaxlab(&["plot", csv.to_str().unwrap(), "--kind", "log-log", "-o", svg.to_str().unwrap()], tmp.path());
    assert!(o.status.success());
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 1);

    fs::write(&csv, "").unwrap();
    let o = relaxlab(&["plot", csv.to_str().unwrap(), "-o", svg.to_str().unwrap()], tmp.path());
    assert!(!o.status.success());
}

#[test]
fn missing_input_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = relaxlab(&[], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--preset"));
    let o = relaxlab(&["--preset", "nope"], tmp.path());
    assert!(String::from_utf8_lossy(&o.stderr).contains("thm1-uniform"));
}
