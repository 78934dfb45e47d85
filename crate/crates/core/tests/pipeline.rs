use std::f64::consts::FRAC_PI_2;

use worldsheet::curve::{conformalize, curve_registry, parse_node_file, CurveError, InitialCurve};
use worldsheet::diagnostics::{
    causal_check, conformal_factor, degeneracy_profile, locate_minimum, null_drift, oracle_registry, sample_oracle,
    summarize, time_slice_preimage, AnalyticSolution, CollapsingCircle, OracleGrid, DEFAULT_TOL_CAUSAL,
};
use worldsheet::export::{read_json, write_csv, write_json};
use worldsheet::metric::{ExponentialScale, Flrw, Minkowski};
use worldsheet::solver::{continue_backward, continue_to_time, DeltaPolicy, SolverError, SolverOptions};
use worldsheet::Params;

fn circle(n: usize, params: Params) -> InitialCurve {
    curve_registry().build("circle", &params).unwrap().sample(n, 3).unwrap()
}

#[test]
fn minkowski_slice_is_flat() {
    let m = Minkowski::new(3);
    let s = continue_to_time(&m, &circle(64, Params::new()), 1.0, &SolverOptions::default()).unwrap();
    let g = time_slice_preimage(&s, 1.0).unwrap();
    // y⁰ = t holds up to the second-order lattice error
    let worst = g.f.iter().fold(0.0f64, |w, f| w.max((f - 1.0).abs()));
    assert!(worst < s.h * s.h, "{worst}");
    let spread = g.f.iter().fold(0.0f64, |w, f| w.max((f - g.f[0]).abs()));
    assert!(spread < 1e-12);
    assert_eq!(g.lipschitz_defect, 0.0);
    assert!(time_slice_preimage(&s, -0.5).is_err());
}

#[test]
fn collapse_is_found_near_quarter_period() {
    let m = Minkowski::new(3);
    let s = continue_to_time(&m, &circle(128, Params::new()), 2.0, &SolverOptions::default()).unwrap();
    let profile = degeneracy_profile(&m, &s).unwrap();
    let times: Vec<f64> = (0..s.n_rows()).map(|k| s.t(k)).collect();
    let t = locate_minimum(&profile, &times).unwrap();
    assert!((t - FRAC_PI_2).abs() <= 2.0 * s.h, "collapse at {t}");
    // the collapsed ring is still a causal, conformal surface
    let c = causal_check(&m, &s, DEFAULT_TOL_CAUSAL).unwrap();
    assert!(c.passed());
    assert!(!c.degenerate.is_empty());
    assert!(conformal_factor(&m, &s).unwrap().min_lambda >= -1e-8);
}

#[test]
fn radius_two_circle_is_a_plain_wave_map() {
    let m = Minkowski::new(3);
    let s = continue_to_time(&m, &circle(128, Params::new().with("radius", 2.0)), 1.0, &SolverOptions::default())
        .unwrap();
    let o = oracle_registry().build("minkowski-circle", &Params::new().with("radius", 2.0)).unwrap();
    let exact = sample_oracle(o.as_ref(), OracleGrid { nodes: 128, rows: s.n_rows(), dimension: 3 }).unwrap();
    assert!(s.max_difference(&exact, &m).unwrap() < 2e-3);
    // not conformal: the trace defect is r² − 1 everywhere
    let c = conformal_factor(&m, &exact).unwrap();
    assert!((c.max_trace_defect - 3.0).abs() < 1e-12);
}

#[test]
fn radius_two_circle_conformalizes_to_longer_string() {
    let m = Minkowski::new(3);
    let c = conformalize(&circle(128, Params::new().with("radius", 2.0)), &m).unwrap();
    assert!((c.period() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    let s = continue_to_time(&m, &c, 1.0, &SolverOptions::default()).unwrap();
    assert!((s.scale - 2.0).abs() < 1e-12);
    // in rescaled coordinates the solution is twice the unit one
    let unit = CollapsingCircle { radius: 1.0 };
    let mut worst: f64 = 0.0;
    for k in 0..s.n_rows() {
        for j in 0..s.n_nodes {
            let (y, _, _) = unit.eval(s.x(j), s.t(k), 3);
            for a in 0..3 {
                worst = worst.max((s.y(k, j)[a] - 2.0 * y[a]).abs());
            }
        }
    }
    assert!(worst < 2e-3, "{worst}");
}

#[test]
fn backward_run_mirrors_the_oracle() {
    let m = Minkowski::new(3);
    let s = continue_backward(&m, &circle(128, Params::new()), -1.0, &SolverOptions::default()).unwrap();
    let last = s.n_rows() - 1;
    assert_eq!(s.t(last), 0.0);
    assert!(s.t(0) <= -1.0);
    let oracle = CollapsingCircle { radius: 1.0 };
    let mut worst: f64 = 0.0;
    for k in 0..s.n_rows() {
        for j in 0..s.n_nodes {
            let (y, yt, yx) = oracle.eval(s.x(j), s.t(k), 3);
            for a in 0..3 {
                worst = worst
                    .max((s.y(k, j)[a] - y[a]).abs())
                    .max((s.u(k, j)[a] - yt[a] - yx[a]).abs())
                    .max((s.v(k, j)[a] - yt[a] + yx[a]).abs());
            }
        }
    }
    assert!(worst < 2e-3, "{worst}");
}

#[test]
fn backward_flrw_run_stays_causal() {
    let m = Flrw::new(3, Box::new(ExponentialScale::new(0.1)));
    let c = conformalize(&circle(128, Params::new()), &m).unwrap();
    let s = continue_backward(&m, &c, -0.5, &SolverOptions::default()).unwrap();
    assert!(causal_check(&m, &s, DEFAULT_TOL_CAUSAL).unwrap().passed());
    assert!(null_drift(&m, &s).unwrap().max() < 1e-4);
}

#[test]
fn solved_surface_round_trips_through_json() {
    let m = Flrw::new(3, Box::new(ExponentialScale::new(0.1)));
    let c = conformalize(&circle(64, Params::new()), &m).unwrap();
    let s = continue_to_time(&m, &c, 0.5, &SolverOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_json(&s, &mut buf).unwrap();
    assert_eq!(read_json(buf.as_slice()).unwrap(), s);
    let mut csv = Vec::new();
    write_csv(&m, &s, &mut csv).unwrap();
    let lines = String::from_utf8(csv).unwrap().lines().count();
    assert_eq!(lines, 1 + s.n_rows() * s.n_nodes);
}

#[test]
fn starvation_reports_partial_surface() {
    let m = Flrw::new(3, Box::new(ExponentialScale::new(2.0)));
    let c = conformalize(&circle(16, Params::new()), &m).unwrap();
    let mut opts = SolverOptions::default();
    opts.delta = DeltaPolicy::Fixed { delta: 1e-3 };
    opts.starvation_patience = 0;
    let f = continue_to_time(&m, &c, 1.0, &opts).unwrap_err();
    assert!(matches!(f.error, SolverError::StepStarvation { .. }), "{:?}", f.error);
    assert!(f.partial.is_some());
}

#[test]
fn target_before_start_is_rejected() {
    let m = Minkowski::new(3);
    let c = circle(16, Params::new());
    let f = continue_to_time(&m, &c, -1.0, &SolverOptions::default()).unwrap_err();
    assert!(matches!(f.error, SolverError::PreconditionViolated(_)));
    assert!(continue_backward(&m, &c, 1.0, &SolverOptions::default()).is_err());
}

#[test]
fn summary_of_oracle_is_clean() {
    let m = Minkowski::new(3);
    let o = oracle_registry().build("minkowski-circle", &Params::new()).unwrap();
    let s = sample_oracle(o.as_ref(), OracleGrid { nodes: 64, rows: 8, dimension: 3 }).unwrap();
    let d = summarize(&m, &s, DEFAULT_TOL_CAUSAL).unwrap();
    assert_eq!(d.causal_violations, 0);
    assert!(d.max_null_drift < 1e-14);
    assert_eq!(d.riemannian_nodes, 0);
}

#[test]
fn node_file_feeds_the_solver() {
    let n = 16;
    let mut text = String::from("# x t y z vt vy vz\n");
    for j in 0..n {
        let x = std::f64::consts::TAU * j as f64 / n as f64;
        text.push_str(&format!("{x} 0 {} {} 1 0 0\n", x.sin(), x.cos()));
    }
    let c = parse_node_file(&text).unwrap();
    assert_eq!(c.n_nodes(), n);
    let err = parse_node_file("0 0 0 1 1 0 0\nnonsense\n").unwrap_err();
    assert!(matches!(err, CurveError::Parse { line: 2, .. }));
}
