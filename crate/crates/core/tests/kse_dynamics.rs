use ksnudge::kse::{initial_condition, DEFAULT_LENGTH};
use ksnudge::{EtdCoefficients, KseParams, KseStepper, SpectralField, SpectralGrid};

fn advance(grid: &SpectralGrid, lambda: f64, dt: f64, t_end: f64) -> (SpectralField, f64) {
    let coeffs = EtdCoefficients::new(grid, &KseParams::new(lambda, dt).unwrap());
    let mut stepper = KseStepper::new(grid, coeffs).unwrap();
    let mut u = initial_condition(grid);
    let steps = (t_end / dt).round() as usize;
    let mut peak = u.l2_norm();
    for n in 1..=steps {
        stepper.step(&mut u, None, n as f64 * dt).unwrap();
        peak = peak.max(u.l2_norm());
    }
    (u, peak)
}

#[test]
fn chaotic_trajectory_stays_bounded() {
    let grid = SpectralGrid::new(1024, DEFAULT_LENGTH).unwrap();
    let (u, peak) = advance(&grid, 2.0, 1.0 / 1024.0, 60.0);
    assert!(u.is_finite());
    assert!(peak < 1e2, "peak l2 norm {peak}");
    assert!(u.0[0].norm() == 0.0);
}

#[test]
fn etd1_is_first_order() {
    let grid = SpectralGrid::new(512, DEFAULT_LENGTH).unwrap();
    let t_end = 0.5;
    let (fine, _) = advance(&grid, 2.0, 2f64.powi(-16), t_end);
    let err = |dt: f64| (&advance(&grid, 2.0, dt, t_end).0 - &fine).l2_norm();
    let coarse = err(2f64.powi(-7));
    let half = err(2f64.powi(-8));
    let order = (coarse / half).log2();
    assert!((0.8..=1.2).contains(&order), "observed order {order}");
}
