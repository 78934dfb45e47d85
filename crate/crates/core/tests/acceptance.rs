//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use worldsheet::curve::{conformalize, curve_registry, InitialCurve};
use worldsheet::diagnostics::{
    causal_check, energy_stability, null_drift, oracle_registry, sample_oracle, time_slice_preimage, OracleGrid,
    DEFAULT_TOL_CAUSAL,
};
use worldsheet::metric::{
    christoffel, christoffel_fd, ExponentialScale, Flrw, Minkowski, PolynomialScale, TargetMetric,
};
use worldsheet::solver::{
    continue_to_time, march_rows, sweep, Lattice, SolutionSurface, SolverOptions, StepEstimate, StripFields,
};
use worldsheet::Params;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn circle(n: usize, params: Params) -> InitialCurve {
    curve_registry().build("circle", &params).unwrap().sample(n, 3).unwrap()
}

fn flrw() -> Flrw {
    Flrw::new(3, Box::new(ExponentialScale::new(0.1)))
}

fn flrw_run(n: usize) -> SolutionSurface {
    let m = flrw();
    let c = conformalize(&circle(n, Params::new()), &m).unwrap();
    continue_to_time(&m, &c, 1.0, &SolverOptions::default()).unwrap()
}

/// The expanding-universe run at N = 256 shared by several criteria.
fn shared_run() -> &'static SolutionSurface {
    static RUN: OnceLock<SolutionSurface> = OnceLock::new();
    RUN.get_or_init(|| flrw_run(256))
}

fn oracle_error(n: usize) -> (f64, f64) {
    let m = Minkowski::new(3);
    let start = Instant::now();
    let s = continue_to_time(&m, &circle(n, Params::new()), 1.2, &SolverOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let o = oracle_registry().build("minkowski-circle", &Params::new()).unwrap();
    let exact = sample_oracle(
        o.as_ref(),
        OracleGrid {
            nodes: n,
            rows: s.n_rows(),
            dimension: 3,
        },
    )
    .unwrap();
    (s.max_difference(&exact, &m).unwrap(), secs)
}

fn oracle_agreement() -> Outcome {
    let (e256, secs) = oracle_error(256);
    let (e512, _) = oracle_error(512);
    let ratio = e256 / e512;
    check(
        e256 <= 5e-4 && (3.4..=4.6).contains(&ratio) && secs < 60.0,
        format!("error {e256:.3e} at N=256, refinement ratio {ratio:.3}, {secs:.2}s"),
    )
}

fn conformality() -> Outcome {
    let m = flrw();
    let d256 = null_drift(&m, shared_run()).unwrap().max();
    let d512 = null_drift(&m, &flrw_run(512)).unwrap().max();
    let ratio = d256 / d512;
    check(
        d256 <= 1e-5 && (3.4..=4.6).contains(&ratio),
        format!("null drift {d256:.3e} at N=256, refinement ratio {ratio:.3}"),
    )
}

fn causality() -> Outcome {
    let r = causal_check(&flrw(), shared_run(), DEFAULT_TOL_CAUSAL).unwrap();
    check(
        r.passed() && r.min_time_component > 0.0,
        format!(
            "{} violations, min (y_t)^0 = {:.6}",
            r.violations.len(),
            r.min_time_component
        ),
    )
}

fn uniqueness() -> Outcome {
    let m = flrw();
    let c = conformalize(&circle(128, Params::new()), &m).unwrap();
    let plain = SolverOptions::default();
    let mut perturbed = SolverOptions::default();
    perturbed.seed = "perturbed".into();
    perturbed.seed_params = Params::new().with("amount", 0.05);
    let a = continue_to_time(&m, &c, 1.0, &plain).unwrap();
    let b = continue_to_time(&m, &c, 1.0, &perturbed).unwrap();
    let rows_match = a.n_rows() == b.n_rows();
    let diff = a.max_difference(&b, &m).unwrap();
    let bound = 10.0 * plain.tol;
    let floor = energy_stability(&a, &b, plain.tol).unwrap().within_floor;
    check(
        rows_match && diff <= bound && floor == Some(true),
        format!("surface difference {diff:.3e} (bound {bound:.0e}), energy on floor: {floor:?}"),
    )
}

fn gronwall() -> Outcome {
    let m = flrw();
    let n = 128;
    let opts = SolverOptions::default();
    let base = march_rows(&m, &circle(n, Params::new()), 128, &opts).unwrap();
    let mut reports = Vec::new();
    for eps in [1e-3, 5e-4] {
        let s = march_rows(&m, &circle(n, Params::new().with("epsilon", eps)), 128, &opts).unwrap();
        reports.push(energy_stability(&s, &base, opts.tol).unwrap());
    }
    let e_ratio = reports[0].energy[0] / reports[1].energy[0];
    let (k1, k2) = match (reports[0].fitted_rate, reports[1].fitted_rate) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err("no fitted rate".into()),
    };
    let spread = (k1 - k2).abs() / k1.abs().max(k2.abs());
    let bounded = reports.iter().all(|r| match r.empirical_constant {
        Some(k) => r.energy.iter().zip(&r.times).all(|(e, s)| *e <= r.energy[0] * (k * s).exp() * (1.0 + 1e-12)),
        None => false,
    });
    check(
        (e_ratio - 4.0).abs() <= 0.4 && spread <= 0.2 && bounded,
        format!("E(0) ratio {e_ratio:.4}, fitted rates {k1:.5} and {k2:.5} (spread {spread:.2e})"),
    )
}

fn strip_constants() -> Outcome {
    let e = StepEstimate::from_constants(f64::INFINITY, 0.0, 1.0, 2.0, 2.0, 1e-3).map_err(|e| e.to_string())?;
    // L = min(∞, ∞, 1/5) = 0.2, l = 0.2/4, K = 3·4/l, K' = 4·4
    let ok = e.l_k == 0.2 && e.l == 0.05 && e.k == 240.0 && e.k_prime == 16.0;
    let g = StepEstimate::from_constants(1.0, 2.0, 1.0, 1.0, 0.5, 1e-3).map_err(|e| e.to_string())?;
    // L = min(1/5, 1/22, 1/5) = 1/22, l = (1/22)/1.5
    let ok2 = g.l_k == 1.0 / 22.0 && (g.l - 1.0 / 33.0).abs() <= 1e-17;
    check(
        ok && ok2,
        format!("l = {}, K = {}, K' = {}; curved case L = {:.6}", e.l, e.k, e.k_prime, g.l_k),
    )
}

fn slices() -> Outcome {
    let s = shared_run();
    let lo = (0..s.n_nodes).map(|j| s.y(0, j)[0]).fold(f64::NEG_INFINITY, f64::max);
    let hi = s.row_min_time(s.n_rows() - 1);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let level = lo + (hi - lo) * (i as f64 + 0.5) / 10.0;
        let g = time_slice_preimage(s, level).map_err(|e| e.to_string())?;
        worst = worst.max(g.lipschitz_defect);
    }
    check(
        worst <= 2.0 * s.h,
        format!("10 slices in [{lo:.3}, {hi:.3}], worst Lipschitz defect {worst:.3e} (2h = {:.3e})", 2.0 * s.h),
    )
}

fn fixed_point() -> Outcome {
    let m = flrw();
    let c = curve_registry()
        .build("antitangent-circle", &Params::new())
        .unwrap()
        .sample(128, 3)
        .unwrap();
    let data = c.null_decompose(&m).map_err(|e| e.to_string())?;
    let mut lat = Lattice::new(&data, TAU);
    lat.startup(&m).map_err(|e| e.to_string())?;
    let (n, nodes) = (lat.n, lat.nodes);
    let shift = |row: &[f64], by: usize| -> Vec<f64> {
        (0..nodes)
            .flat_map(|j| {
                let src = (j + nodes - by % nodes) % nodes;
                row[src * n..(src + 1) * n].to_vec()
            })
            .collect()
    };
    // the exact discrete solution: u = û = 0, y = z and v = v̂ carried along ξ
    let rows = 6;
    let mut state = StripFields::zeros(rows, nodes * n);
    for i in 0..rows {
        state.y[i] = shift(&lat.y[1], i + 1);
        state.z[i] = state.y[i].clone();
        state.v[i] = shift(&lat.eta[0], i + 1);
        state.vh[i] = state.v[i].clone();
    }
    let (next, change) = sweep(&m, &lat, &state).map_err(|e| e.to_string())?;
    let u_zero = next.u.iter().chain(&next.uh).flatten().all(|&x| x == 0.0);
    check(
        u_zero && change <= 1e-13,
        format!("one sweep moves the state by {change:.2e}, u stays zero: {u_zero}"),
    )
}

fn symmetric_collapse() -> Outcome {
    let s = shared_run();
    let bound = 10.0 * SolverOptions::default().tol;
    let worst = s.strips.iter().map(|r| r.symmetric_defect).fold(0.0, f64::max);
    check(
        !s.strips.is_empty() && worst <= bound,
        format!("{} strips, worst |y - z| {worst:.2e} (bound {bound:.0e})", s.strips.len()),
    )
}

fn christoffel_oracle() -> Outcome {
    let metrics: Vec<Box<dyn TargetMetric>> = vec![
        Box::new(flrw()),
        Box::new(Flrw::new(4, Box::new(PolynomialScale::new(0.3)))),
    ];
    let mut worst: f64 = 0.0;
    for m in &metrics {
        let dim = m.dimension();
        for i in 0..50 {
            // deterministic spread over [-1, 1] in time and [-3, 3] in space
            let p: Vec<f64> = (0..dim)
                .map(|a| {
                    let s = ((i * 7 + a * 13) as f64 * 0.618_033_988_75).fract();
                    if a == 0 {
                        2.0 * s - 1.0
                    } else {
                        6.0 * s - 3.0
                    }
                })
                .collect();
            let exact = christoffel(m.as_ref(), &p).unwrap();
            let fd = christoffel_fd(m.as_ref(), &p).unwrap();
            let scale = exact.max_abs().max(f64::MIN_POSITIVE);
            for a in 0..dim {
                for b in 0..dim {
                    for c in 0..dim {
                        worst = worst.max((exact.get(a, b, c) - fd.get(a, b, c)).abs() / scale);
                    }
                }
            }
        }
    }
    check(worst <= 1e-6, format!("100 points, worst relative error {worst:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle agreement", oracle_agreement),
        ("conformality propagation", conformality),
        ("causality", causality),
        ("discrete uniqueness", uniqueness),
        ("energy growth", gronwall),
        ("strip constants", strip_constants),
        ("slice graphs", slices),
        ("Picard fixed point", fixed_point),
        ("symmetric collapse", symmetric_collapse),
        ("Christoffel oracle", christoffel_oracle),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({detail})", i + 1)
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
