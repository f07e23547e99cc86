use std::path::Path;
use std::process::{Command, Output};

fn fiolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fiolab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn csv_files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn converge_writes_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = fiolab(&["converge", "--out", out.to_str().unwrap(), "--seed", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("PASS"));
    let files = csv_files(&out);
    assert_eq!(files.len(), 2);
    assert!(files.iter().all(|f| f.with_extension("svg").exists()));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        assert!(fiolab(&["converge", "--quiet", "--out", d.to_str().unwrap(), "--seed", "4"]).status.success());
    }
    for (x, y) in csv_files(&a).iter().zip(csv_files(&b)) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
}

#[test]
fn fit_and_plot_reproduce_the_run_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    assert!(fiolab(&["converge", "--quiet", "--out", run.to_str().unwrap()]).status.success());
    let file = csv_files(&run).remove(0);
    let redo = dir.path().join("redo");
    let o = fiolab(&["fit", file.to_str().unwrap(), "--out", redo.to_str().unwrap(), "--quiet"]);
    assert!(o.status.success());
    let name = file.file_name().unwrap();
    assert_eq!(std::fs::read(&file).unwrap(), std::fs::read(redo.join(name)).unwrap());
    let o = fiolab(&["plot", file.to_str().unwrap(), "--out", redo.to_str().unwrap()]);
    assert!(o.status.success());
    let svg = file.with_file_name(format!("{}.svg", file.file_stem().unwrap().to_str().unwrap()));
    assert_eq!(
        std::fs::read(&svg).unwrap(),
        std::fs::read(redo.join(svg.file_name().unwrap())).unwrap()
    );
}

#[test]
fn failing_verdicts_give_a_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.json");
    // the fitted rate is close to 1 but not exactly 1
    std::fs::write(&cfg, r#"{"experiment": "convergence", "tolerance": 0.0, "phases": [{"kind": "euclidean"}]}"#).unwrap();
    let out = dir.path().join("out");
    let o = fiolab(&["converge", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stdout).unwrap().contains("FAIL"));
}

#[test]
fn bad_configs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    std::fs::write(&cfg, r#"{"thetta": 0.3}"#).unwrap();
    let o = fiolab(&["tube", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("thetta"));

    std::fs::write(&cfg, r#"{"experiment": "flow_lemma"}"#).unwrap();
    let o = fiolab(&["tube", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
