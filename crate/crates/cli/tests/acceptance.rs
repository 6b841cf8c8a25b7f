//! End-to-end acceptance checks. Prints one line per criterion and exits
//! nonzero when any of them fails.
//!
//! The full-resolution scenario dominates the runtime (several minutes per
//! core).

use std::process::{Command, ExitCode};
use std::time::Instant;

use ksnudge::harness::{decay_rate, MACHINE_PRECISION_THRESHOLD};
use ksnudge::kse::{linear_symbol, DEFAULT_DT, DEFAULT_LENGTH};
use ksnudge::{
    run_scenario_with, EtdCoefficients, Execution, FeedbackLaw, InitKind, KseParams, KseStepper,
    LawKind, MethodSpec, Observer, PhysicalField, RunArtifacts, ScenarioConfig, SpectralGrid,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const ORDER: [&str; 4] = ["cc_g0.1", "hybrid_g0.1", "power_g0.1", "linear"];

struct Check {
    id: u32,
    pass: bool,
    detail: String,
}

impl Check {
    fn new(id: u32, pass: bool, detail: impl Into<String>) -> Self {
        Self { id, pass, detail: detail.into() }
    }
}

fn times(r: &RunArtifacts, labels: &[&str]) -> Vec<Option<f64>> {
    labels
        .iter()
        .map(|l| r.method(l).and_then(|m| m.convergence_time))
        .collect()
}

fn fmt_times(labels: &[&str], t: &[Option<f64>]) -> String {
    labels
        .iter()
        .zip(t)
        .map(|(l, t)| match t {
            Some(t) => format!("{l}={t:.3}"),
            None => format!("{l}=none"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn strictly_ordered(t: &[Option<f64>]) -> bool {
    t.iter().all(Option::is_some) && t.windows(2).all(|w| w[0].unwrap() < w[1].unwrap())
}

fn run(cfg: &ScenarioConfig) -> RunArtifacts {
    run_scenario_with(cfg, Execution::Parallel).expect("scenario runs")
}

fn full_scale(r: &RunArtifacts) -> Vec<Check> {
    let expected = [17.4, 20.0, 27.3, 49.8];
    let t = times(r, &ORDER);
    let within = t
        .iter()
        .zip(expected)
        .all(|(t, e)| t.is_some_and(|t| (t - e).abs() <= 0.2 * e));
    let ordered = strictly_ordered(&t);
    let c1 = Check::new(
        1,
        within && ordered,
        format!(
            "{} (expected {:?} within 20%, within={within}, ordered={ordered})",
            fmt_times(&ORDER, &t),
            expected
        ),
    );

    let c2 = match (t[3], t[0]) {
        (Some(lin), Some(cc)) => {
            let s = lin / cc;
            Check::new(2, s >= 2.2, format!("speedup linear/cc = {s:.3} (need >= 2.2)"))
        }
        _ => Check::new(2, false, "a convergence time is missing"),
    };

    let rates = |label: &str| {
        let m = r.method(label).expect("method present");
        (
            decay_rate(&m.series, [5.0, 15.0], MACHINE_PRECISION_THRESHOLD),
            decay_rate(&m.series, [20.0, 26.0], MACHINE_PRECISION_THRESHOLD),
        )
    };
    let c3 = match (rates("power_g0.1"), rates("linear")) {
        ((Ok(p1), Ok(p2)), (Ok(l1), Ok(l2))) => {
            let accel = p2.abs() >= 1.5 * p1.abs();
            let steady = (l2 - l1).abs() <= 0.3 * l1.abs().max(l2.abs());
            Check::new(
                3,
                accel && steady,
                format!("power rates {p1:.4}, {p2:.4}; linear rates {l1:.4}, {l2:.4}"),
            )
        }
        ((p1, p2), (l1, l2)) => Check::new(
            3,
            false,
            format!("rate unavailable: power {p1:?}, {p2:?}; linear {l1:?}, {l2:?}"),
        ),
    };

    let spectrum = &r.reference.spectrum;
    let cutoff = r.grid.dealias_cutoff();
    let peak = spectrum.iter().cloned().fold(0.0, f64::max);
    let first_below = (1..=cutoff).find(|&m| spectrum[m] < 1e-14 * peak);
    let c10 = Check::new(
        10,
        peak > 0.0 && first_below.is_some(),
        match first_below {
            Some(m) => format!("spectrum below 1e-14 of peak {peak:.3e} from mode {m} (cutoff {cutoff})"),
            None => format!("spectrum never drops below 1e-14 of peak {peak:.3e} before mode {cutoff}"),
        },
    );
    vec![c1, c2, c3, c10]
}

fn desk_scale(r: &RunArtifacts) -> Check {
    let t = times(r, &ORDER);
    let converged = r
        .methods
        .iter()
        .all(|m| m.final_error_l2 < MACHINE_PRECISION_THRESHOLD && m.convergence_time.is_some());
    let ordered = strictly_ordered(&t);
    Check::new(
        4,
        converged && ordered,
        format!("{} (converged={converged}, ordered={ordered})", fmt_times(&ORDER, &t)),
    )
}

fn linear_exactness() -> Check {
    let grid = SpectralGrid::new(8192, DEFAULT_LENGTH).unwrap();
    let lambda = 2.0;
    let coeffs = EtdCoefficients::new(&grid, &KseParams::new(lambda, DEFAULT_DT).unwrap());
    let mut stepper = KseStepper::new(&grid, coeffs).unwrap().without_nonlinearity();
    let mut rng = StdRng::seed_from_u64(5);
    let field = PhysicalField((0..grid.n_points()).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let mut s = grid.to_spectral(&field).unwrap().project_mean_free();
    let band = 128;
    for c in &mut s.0[band + 1..] {
        *c *= 0.0;
    }
    let start = s.clone();
    let steps = 1000;
    for n in 1..=steps {
        stepper.step(&mut s, None, n as f64 * DEFAULT_DT).unwrap();
    }
    let t = steps as f64 * DEFAULT_DT;
    let symbol = linear_symbol(&grid, lambda);
    let worst = (1..=band)
        .map(|m| {
            let exact = start.0[m] * (symbol[m] * t).exp();
            (s.0[m] - exact).norm() / exact.norm()
        })
        .fold(0.0, f64::max);
    Check::new(
        5,
        worst <= 1e-10,
        format!("max relative mode error after {steps} steps = {worst:.3e} (modes 1..={band})"),
    )
}

fn transform_invariants() -> Check {
    let grid = SpectralGrid::new(8192, DEFAULT_LENGTH).unwrap();
    let observer = Observer::for_grid(32, &grid).unwrap();
    let mut rng = StdRng::seed_from_u64(6);
    let (mut parseval, mut round_trip) = (0.0f64, 0.0f64);
    let mut idempotent = true;
    for _ in 0..100 {
        let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
        let u = PhysicalField(
            (0..grid.n_points())
                .map(|_| scale * rng.gen_range(-1.0..1.0))
                .collect(),
        );
        let s = grid.to_spectral(&u).unwrap();
        let rms = u.rms();
        parseval = parseval.max((s.l2_norm() - rms).abs() / rms);
        let back = grid.to_physical(&s).unwrap();
        let peak = u.0.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let diff = u.0.iter().zip(&back.0).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        round_trip = round_trip.max(diff / peak);
        let d = grid.dealias(&s).unwrap();
        let o = observer.observe(&s).unwrap();
        idempotent &= grid.dealias(&d).unwrap().0 == d.0;
        idempotent &= observer.observe(&o).unwrap().0 == o.0;
    }
    Check::new(
        6,
        parseval <= 1e-12 && round_trip <= 1e-12 && idempotent,
        format!(
            "parseval rel err {parseval:.3e}, round-trip rel err {round_trip:.3e}, idempotent={idempotent}"
        ),
    )
}

fn gamma_zero_equivalence() -> Check {
    let cfg = ScenarioConfig {
        methods: vec![MethodSpec::linear(), MethodSpec::new(LawKind::Power, 0.0)],
        ..ScenarioConfig::desk()
    };
    let r = run(&cfg);
    let a = &r.methods[0];
    let b = &r.methods[1];
    let state = a.final_state.max_abs_diff(&b.final_state);
    let series = a
        .series
        .err_l2
        .iter()
        .zip(&b.series.err_l2)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Check::new(
        7,
        state <= 1e-14,
        format!("max coefficient difference {state:.3e}, max error-series difference {series:.3e}"),
    )
}

fn law_properties() -> Check {
    let n = 1000;
    let grid: Vec<f64> = (0..n).map(|i| -4.0 + 8.0 * i as f64 / (n - 1) as f64).collect();
    let unit: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
    let above: Vec<f64> = (1..=n).map(|i| 1.0 + 3.0 * i as f64 / n as f64).collect();
    let mut failures = Vec::new();
    for &gamma in &[0.05, 0.1, 0.125, 0.25, 0.5] {
        let law = |kind| FeedbackLaw::new(kind, gamma, 1.0).unwrap();
        for kind in LawKind::ALL {
            let f = law(kind);
            let tag = format!("{kind} gamma={gamma}");
            if !grid.iter().all(|&x| f.apply(-x) == -f.apply(x)) {
                failures.push(format!("{tag}: oddness"));
            }
            if !grid.windows(2).all(|w| f.apply(w[1]) > f.apply(w[0])) {
                failures.push(format!("{tag}: monotonicity"));
            }
            if f.apply(0.0) != 0.0 || f.apply(1.0) != 1.0 || f.apply(-1.0) != -1.0 {
                failures.push(format!("{tag}: fixed points"));
            }
            let continuous = (3..=12).all(|p| {
                let h = 10f64.powi(-p);
                [1.0, -1.0]
                    .iter()
                    .all(|&x: &f64| (f.apply(x + h) - f.apply(x - h)).abs() <= 4.0 * h)
            });
            if !continuous {
                failures.push(format!("{tag}: continuity at |x|=1"));
            }
            if kind != LawKind::Linear && !unit.iter().all(|&x| f.apply(x) > x) {
                failures.push(format!("{tag}: small-error amplification"));
            }
        }
        let (power, cc) = (law(LawKind::Power), law(LawKind::ConcaveConvex));
        if !above.iter().all(|&x| cc.apply(x) > x && x > power.apply(x)) {
            failures.push(format!("gamma={gamma}: large-error ordering"));
        }
    }
    Check::new(
        8,
        failures.is_empty(),
        if failures.is_empty() {
            format!("all laws, 5 gammas, {n}-point grids")
        } else {
            failures.join("; ")
        },
    )
}

fn non_convergence() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_ksnudge"))
        .args(["run", "--preset", "desk", "--methods", "power", "--gamma", "0.25", "--out"])
        .arg(dir.path())
        .output()
        .expect("binary runs");
    let summary: serde_json::Value = std::fs::read(dir.path().join("summary.json"))
        .ok()
        .and_then(|b| serde_json::from_slice(&b).ok())
        .unwrap_or_default();
    let t = &summary["methods"][0]["convergence_time"];
    let ok = output.status.success();
    Check::new(
        9,
        ok && t.is_null(),
        format!("exit status {:?}, reported t* = {t}", output.status.code()),
    )
}

fn chaotic_restart(fresh: &RunArtifacts) -> Check {
    let cfg = ScenarioConfig { init: InitKind::ChaoticRestart, ..ScenarioConfig::desk() };
    let r = run(&cfg);
    let t = times(&r, &ORDER);
    let t_fresh = times(fresh, &ORDER);
    let converged = t.iter().all(Option::is_some);
    let slower = t
        .iter()
        .zip(&t_fresh)
        .all(|(a, b)| matches!((a, b), (Some(a), Some(b)) if a >= b));
    let ordered = strictly_ordered(&t);
    Check::new(
        11,
        converged && slower && ordered,
        format!(
            "restart {} vs fresh {} (converged={converged}, slower={slower}, ordered={ordered})",
            fmt_times(&ORDER, &t),
            fmt_times(&ORDER, &t_fresh)
        ),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut checks = Vec::new();

    let desk = run(&ScenarioConfig::desk());
    checks.push(desk_scale(&desk));
    checks.push(linear_exactness());
    checks.push(transform_invariants());
    checks.push(gamma_zero_equivalence());
    checks.push(law_properties());
    checks.push(non_convergence());
    checks.push(chaotic_restart(&desk));

    let full = run(&ScenarioConfig::full());
    checks.extend(full_scale(&full));

    checks.sort_by_key(|c| c.id);
    for c in &checks {
        println!(
            "criterion {:>2}: {} - {}",
            c.id,
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        checks.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
