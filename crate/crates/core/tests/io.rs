mod common;

use common::heterogeneous;
use subjective_core::io::{
    export_plot_data, load_dataset, load_params, load_results, read_plot_data, save_dataset,
    save_params, save_results, ResultFile,
};
use subjective_core::{mos, solve, synth, Condition, Experiment, MethodId, SolverConfig};

#[test]
fn synthetic_dataset_round_trips_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let (full, _) = heterogeneous(25, 9, 4, 1);
    let m = synth::subsample(&full, 0.7, 2).unwrap();
    for name in ["data.csv", "data.json"] {
        let path = dir.path().join(name);
        save_dataset(&m, &path).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(back.mask(), m.mask(), "{name}");
        assert_eq!(back.content_map(), m.content_map(), "{name}");
        for ((_, _, a), (_, _, b)) in back.observations().zip(m.observations()) {
            assert_eq!(a.to_bits(), b.to_bits(), "{name}");
        }
    }
}

#[test]
fn mle_results_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (m, _) = heterogeneous(20, 8, 4, 3);
    let cfg = SolverConfig::default();
    let est = solve(&m, &cfg).unwrap();
    let file = ResultFile::from_estimates(&m, &est, &cfg);
    let path = dir.path().join("mle.json");
    save_results(&file, &path).unwrap();
    let back = load_results(&path).unwrap();
    assert_eq!(back, file);
    for (v, x) in back.videos.iter().zip(&est.params.x) {
        assert!((v.score - x).abs() <= 1e-12);
    }
    let subjects = back.subjects.unwrap();
    assert_eq!(subjects.len(), 8);
    assert_eq!(back.contents.unwrap().len(), 4);
    assert!(back.solver.unwrap().converged);
}

#[test]
fn result_files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (m, _) = heterogeneous(20, 8, 4, 4);
    let write = |name: &str| {
        let cfg = SolverConfig::default();
        let est = solve(&m, &cfg).unwrap();
        let path = dir.path().join(name);
        save_results(&ResultFile::from_estimates(&m, &est, &cfg), &path).unwrap();
        std::fs::read(path).unwrap()
    };
    assert_eq!(write("a.json"), write("b.json"));
}

#[test]
fn single_score_video_writes_inf_token() {
    let dir = tempfile::tempdir().unwrap();
    let m = subjective_core::ScoreMatrix::from_optional_rows(
        &[vec![Some(2.0), None], vec![Some(1.0), Some(3.0)]],
        vec![0, 0],
    )
    .unwrap();
    let path = dir.path().join("mos.json");
    save_results(
        &ResultFile::from_baseline(&m, MethodId::Mos, &mos(&m)),
        &path,
    )
    .unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"ci_halfwidth\": \"inf\""));
    assert!(load_results(&path).unwrap().videos[0]
        .ci_halfwidth
        .is_unbounded());
}

#[test]
fn params_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = synth::draw_params(6, 3, 2, &Default::default(), 9);
    let path = dir.path().join("params.json");
    save_params(&p, &path).unwrap();
    assert_eq!(load_params(&path).unwrap(), p);
}

#[test]
fn plot_data_shape_order_and_precision() {
    let dir = tempfile::tempdir().unwrap();
    let (m, _) = heterogeneous(20, 10, 4, 5);
    let reports = Experiment::new(&m, &[MethodId::Mos])
        .reps(4)
        .seed(1)
        .run(&Condition::RandomCorruption(vec![0.4, 0.0, 0.2]))
        .unwrap();
    let path = dir.path().join("plot.csv");
    export_plot_data(&reports, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(
        lines[0],
        "method,condition,rmse_mean,rmse_std,repetitions,dropped"
    );
    let rows = read_plot_data(&path).unwrap();
    let conditions: Vec<f64> = rows.iter().map(|r| r.condition).collect();
    assert_eq!(conditions, vec![0.0, 0.2, 0.4]);
    let r = &reports[0];
    for row in &rows {
        let i = r
            .condition_axis
            .iter()
            .position(|&c| c == row.condition)
            .unwrap();
        assert!((row.rmse_mean - r.rmse_mean[i]).abs() <= 1e-9);
        assert!((row.rmse_std - r.rmse_std[i]).abs() <= 1e-9);
        assert_eq!(row.repetitions, r.repetitions[i]);
    }
}

#[test]
fn empty_report_list_still_has_a_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plot.csv");
    export_plot_data(&[], &path).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "method,condition,rmse_mean,rmse_std,repetitions,dropped\n"
    );
    assert!(read_plot_data(&path).unwrap().is_empty());
}
