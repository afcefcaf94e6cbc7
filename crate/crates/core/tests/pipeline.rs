use std::path::PathBuf;

use rdiscord_core::experiment::{
    detect_plateau, read_series_csv, run_sweep, run_timeseries, write_sweep_csv, ExperimentConfig,
    SweepAxis,
};
use rdiscord_core::OptimizerSettings;

fn fixtures() -> Vec<(PathBuf, ExperimentConfig)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            let cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&path).unwrap())
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            (path, cfg)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn coarse(mut cfg: ExperimentConfig, n_points: usize) -> ExperimentConfig {
    cfg.time_grid.n_points = n_points;
    cfg.optimizer = OptimizerSettings {
        grid_theta: 8,
        grid_phi: 16,
        ..OptimizerSettings::default()
    };
    cfg
}

#[test]
fn every_fixture_validates() {
    let all = fixtures();
    assert!(all.len() >= 6);
    for (path, cfg) in &all {
        cfg.validate()
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn sweep_fixtures_cover_each_axis() {
    let axes: Vec<SweepAxis> = fixtures()
        .into_iter()
        .filter_map(|(_, cfg)| cfg.sweep.map(|s| s.axis))
        .collect();
    for axis in [SweepAxis::Q, SweepAxis::T, SweepAxis::Alpha] {
        assert!(axes.contains(&axis), "{axis:?} missing");
    }
}

#[test]
fn temperature_sweep_round_trips_through_csv() {
    let (_, cfg) = fixtures()
        .into_iter()
        .find(|(_, c)| c.sweep.as_ref().is_some_and(|s| s.axis == SweepAxis::T))
        .unwrap();
    let cfg = coarse(cfg, 12);
    let rows = run_sweep(&cfg).unwrap();
    let n_values = cfg.sweep.as_ref().unwrap().values.len();
    assert_eq!(rows.len(), n_values * 12);

    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf).unwrap();
    let series = read_series_csv(buf.as_slice()).unwrap();
    assert_eq!(series.len(), n_values);
    for s in &series {
        assert_eq!(s.points.len(), 12);
        let report = detect_plateau(&s.points, 1e-3, 10).unwrap();
        let max = s.points.iter().map(|p| p.1).fold(f64::NAN, f64::max);
        assert_eq!(report.series_max, max);
        assert!(s.points.iter().all(|p| p.1 >= -1e-9 && p.1 <= 2.0));
    }
}

#[test]
fn sci_fixture_runs() {
    let (_, cfg) = fixtures()
        .into_iter()
        .find(|(p, _)| p.ends_with("sci_state.json"))
        .unwrap();
    let rows = run_timeseries(&coarse(cfg, 8)).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.d_alpha.is_finite() && r.converged));
}
