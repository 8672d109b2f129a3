use modal_diversity::experiments::{
    distance_gain_percent, distance_gain_table, plot_data_csv, render_plot_data, run_sweep, BerTable, ExperimentPlan,
    PlanConfig,
};
use modal_diversity::turbulence::AtmosphereModel;

fn quick_plan(sweep_mm: &[f64]) -> ExperimentPlan {
    let mut cfg = PlanConfig::builtin("paper-n4");
    cfg.bits_per_screen = Some(500);
    cfg.screens = Some(16);
    cfg.grid_samples = Some(128);
    cfg.r0_sweep_mm = Some(sweep_mm.to_vec());
    let mut plan = cfg.build(None).unwrap();
    plan.output_dir = None;
    plan
}

#[test]
fn single_point_sweep_gives_one_row() {
    let curve = run_sweep(&quick_plan(&[4.5])).unwrap();
    let csv = curve.to_csv();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("4.5,"));
}

#[test]
fn sweep_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = quick_plan(&[1.0, 4.5, 17.0]);
    plan.output_dir = Some(dir.path().to_path_buf());
    let first = run_sweep(&plan).unwrap();
    let path = plan.ber_csv_path().unwrap();
    let bytes = std::fs::read(&path).unwrap();
    plan.link.threads = Some(3);
    run_sweep(&plan).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), bytes);
    let table = BerTable::read(&path).unwrap();
    assert_eq!(table.labels, vec!["HG22", "LG21", "EGC2221"]);
    assert_eq!(table.r0.len(), 3);
    assert_eq!(first.points.len(), 3);
}

#[test]
fn different_seed_changes_results() {
    let a = quick_plan(&[3.0]);
    let mut b = a.clone();
    b.link.master_seed += 1;
    assert_ne!(run_sweep(&a).unwrap().to_csv(), run_sweep(&b).unwrap().to_csv());
}

#[test]
fn n4_plot_columns() {
    let dir = tempfile::tempdir().unwrap();
    let curve = run_sweep(&quick_plan(&[2.0, 8.0, 17.0])).unwrap();
    let files = render_plot_data(&curve, dir.path().join("paper-n4_plot")).unwrap();
    let text = std::fs::read_to_string(files.data).unwrap();
    assert_eq!(text.lines().next().unwrap(), "r0,HG22,LG21,EGC2221");
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn empty_curve_cannot_be_plotted() {
    let mut curve = run_sweep(&quick_plan(&[3.0])).unwrap();
    curve.points.clear();
    assert!(plot_data_csv(&curve).is_err());
}

#[test]
fn n8_pair_is_orthogonal_and_runs() {
    let mut cfg = PlanConfig::builtin("paper-n8");
    cfg.bits_per_screen = Some(200);
    cfg.screens = Some(4);
    cfg.r0_sweep_mm = Some(vec![6.0]);
    let mut plan = cfg.build(None).unwrap();
    plan.output_dir = None;
    plan.validate().unwrap();
    let curve = run_sweep(&plan).unwrap();
    assert_eq!(curve.labels(), vec!["HG44", "LG61", "EGC4461"]);
}

#[test]
fn gains_of_reference_r0_pairs() {
    assert!((distance_gain_percent(16.6e-3, 12.8e-3) - 54.0).abs() < 1.0);
    assert!((distance_gain_percent(10.2e-3, 7.4e-3) - 71.0).abs() < 1.0);
    assert!((distance_gain_percent(4.5e-3, 2.68e-3) - 137.0).abs() < 1.0);
}

#[test]
fn distance_table_from_sweep() {
    let curve = run_sweep(&quick_plan(&[0.5, 1.0, 2.0, 4.5, 8.0, 17.0])).unwrap();
    let atm = AtmosphereModel::new(1e-14, 660e-9).unwrap();
    let hg = curve.series("HG22").unwrap();
    let same = distance_gain_table(&hg, &hg, &[0.3, 0.1, 1e-9], &atm).unwrap();
    assert!(same.rows[0].gain_percent.unwrap().abs() < 1e-9);
    assert!(same.rows[1].gain_percent.unwrap().abs() < 1e-9);
    assert_eq!(same.rows[2].gain_percent, None);

    let div = curve.series("EGC2221").unwrap();
    let t = distance_gain_table(&hg, &div, &[0.1], &atm).unwrap();
    let row = &t.rows[0];
    let (rs, rd) = (row.siso.r0().unwrap(), row.diversity.r0().unwrap());
    assert!((row.gain_percent.unwrap() - distance_gain_percent(rs, rd)).abs() < 1e-9);
}

#[test]
fn gains_do_not_depend_on_atmosphere() {
    let curve = run_sweep(&quick_plan(&[0.5, 1.0, 2.0, 4.5, 8.0, 17.0])).unwrap();
    let hg = curve.series("HG22").unwrap();
    let lg = curve.series("LG21").unwrap();
    let a = distance_gain_table(&hg, &lg, &[0.2, 0.05], &AtmosphereModel::new(1e-14, 660e-9).unwrap()).unwrap();
    let b = distance_gain_table(&hg, &lg, &[0.2, 0.05], &AtmosphereModel::new(3e-15, 1550e-9).unwrap()).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        match (x.gain_percent, y.gain_percent) {
            (Some(p), Some(q)) => assert!((p - q).abs() < 1e-9),
            (p, q) => assert_eq!(p, q),
        }
    }
}
