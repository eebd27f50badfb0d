use graph_max_shift::density::ModeOptions;
use graph_max_shift::experiments::{self, EpsRule, ExperimentConfig, SweepConfig, SweepGrid};
use graph_max_shift::{Error, GaussianMixture};

fn config(n: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new("trimodal", n, EpsRule::Fixed(0.35), 2, seed)
}

#[test]
fn runs_are_deterministic() {
    let a = experiments::run(&config(800, 3)).unwrap();
    let b = experiments::run(&config(800, 3)).unwrap();
    let mut ra = a.report.clone();
    let mut rb = b.report.clone();
    ra.runtime_ms = Default::default();
    rb.runtime_ms = Default::default();
    assert_eq!(ra, rb);
    assert_eq!(a.shift, b.shift);
    assert_eq!(a.reference, b.reference);
    assert_eq!(a.points, b.points);
}

#[test]
fn sweep_cells_match_standalone_runs() {
    let base = config(500, 0);
    let grid = SweepGrid {
        n: Some(vec![500, 300]),
        tau: Some(vec![2, 0]),
        seed: Some(vec![4, 1]),
        ..Default::default()
    };
    let rows = experiments::sweep(&SweepConfig {
        base: base.clone(),
        grid,
    })
    .unwrap();
    assert_eq!(rows.len(), 8);
    let keys: Vec<_> = rows.iter().map(|r| (r.n, r.tau, r.seed)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for r in &rows {
        let mut c = base.clone();
        c.n = r.n;
        c.tau = r.tau;
        c.seed = r.seed;
        let out = experiments::run(&c).unwrap();
        let a = out.report.agreement.unwrap();
        assert_eq!(r.k, Some(out.report.k));
        assert_eq!(r.rand_index, Some(a.rand_index));
        assert_eq!(r.miscluster_fraction, Some(a.miscluster_fraction));
        assert_eq!(r.error, None);
    }
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = experiments::run(&config(400, 2)).unwrap();
    out.write_to(dir.path(), true).unwrap();
    for f in [
        "points.csv",
        "labels.csv",
        "degrees.csv",
        "modes.csv",
        "report.json",
        "paths.txt",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let labels = std::fs::read_to_string(dir.path().join("labels.csv")).unwrap();
    assert!(labels.starts_with("id,gms_label,ref_label,endpoint\n1,"));
    assert_eq!(labels.lines().count(), 401);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["agreement"].as_object().unwrap().len(), 5);
    assert_eq!(report["config"]["n"], 400);
}

#[test]
fn flat_topped_mode_is_found_once() {
    // Two unit Gaussians at +-1: a single mode at 0 with vanishing curvature.
    let cfg = ExperimentConfig::from_json(
        r#"{"mixture": {"d": 1, "weights": [0.5, 0.5], "means": [[-1.0], [1.0]],
            "covariances": [[[1.0]], [[1.0]]]}, "n": 200, "eps": 0.3, "seed": 1}"#,
    )
    .unwrap();
    let out = experiments::run(&cfg).unwrap();
    assert_eq!(out.report.error, None);
    assert_eq!(out.report.mode_count, Some(1));
    assert!(out.modes.unwrap().modes[0][0].abs() < 1e-2);
}

#[test]
fn mode_search_that_cannot_converge_is_degenerate() {
    let gm = GaussianMixture::fixture("trimodal").unwrap();
    let opts = ModeOptions {
        max_iter: 1,
        ..Default::default()
    };
    assert!(matches!(gm.find_modes(&opts), Err(Error::Degenerate(_))));
}

#[test]
fn paths_from_the_same_start() {
    let pair = experiments::paths(&config(600, 1), 10).unwrap();
    assert_eq!(pair.graph_path.start(), 10);
    assert_eq!(pair.graph_points[0], pair.density_path[0]);
    assert!(experiments::path_deviation(&pair.graph_points, &pair.density_path).is_finite());
    assert!(experiments::paths(&config(600, 1), 600).is_err());
}
