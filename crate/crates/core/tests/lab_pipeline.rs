use fiolab::lab::{self, render_svg, ExperimentConfig, ExperimentKind, Report, Verdict};
use fiolab::Error;

fn quick_flow() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::FlowLemma);
    cfg.k_min = Some(3);
    cfg.k_max = Some(6);
    cfg
}

#[test]
fn reports_survive_the_file_round_trip() {
    let reports = lab::run(&quick_flow()).unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(Report::passed));
    let dir = tempfile::tempdir().unwrap();
    let paths = lab::write_reports(&reports, dir.path()).unwrap();
    for (rep, path) in reports.iter().zip(&paths) {
        assert!(path.file_name().unwrap().to_str().unwrap().starts_with("flow-"));
        let text = std::fs::read_to_string(path).unwrap();
        let back = Report::from_csv(&text).unwrap();
        assert_eq!(&back, rep);
        assert_eq!(back.refit(), back);
        let svg = std::fs::read_to_string(path.with_extension("svg")).unwrap();
        assert_eq!(svg, render_svg(&back));
    }
}

#[test]
fn json_configs_drive_the_runner() {
    let cfg = ExperimentConfig::from_json(
        r#"{"experiment": "convergence", "seed": 3, "phases": [{"kind": "euclidean"}]}"#,
    )
    .unwrap();
    let reports = lab::run(&cfg).unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].checks[0].verdict(), Verdict::Pass);
    assert_eq!(reports[0].file_stem(), "converge-euclidean_2_inf_na");

    let typo = ExperimentConfig::from_json(r#"{"experiment": "convergence", "seeds": 3}"#);
    assert!(matches!(typo, Err(Error::Config(_))));
}

#[test]
fn configuration_errors_stop_the_run() {
    let mut cfg = quick_flow();
    cfg.k_max = Some(4);
    assert!(matches!(lab::run(&cfg), Err(Error::Config(_))));
    let mut cfg = ExperimentConfig::new(ExperimentKind::MeanOracle);
    cfg.dim = 3;
    assert!(lab::run(&cfg).is_err());
}

#[test]
fn clashing_file_names_are_refused() {
    let mut a = Report::new("same", 2, Some(2.0), None, "x");
    a.push(1.0, 2.0, 1.0);
    let dir = tempfile::tempdir().unwrap();
    let err = lab::write_reports(&[a.clone(), a], dir.path());
    assert!(matches!(err, Err(Error::Config(_))), "{err:?}");
}

#[test]
fn intermediate_exponents_carry_no_verdict() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::KnappSharpness);
    cfg.p_list = vec![4.0];
    cfg.k_min = Some(3);
    cfg.k_max = Some(6);
    let reports = lab::run(&cfg).unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].checks[0].verdict(), Verdict::Na);
}
