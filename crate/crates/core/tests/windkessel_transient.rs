use vessel_fsi::windkessel::{windkessel_step, WindkesselParams, WindkesselState};

const PARAMS: WindkesselParams = WindkesselParams {
    r_p: 200.0,
    c: 1e-4,
    r_d: 2000.0,
    p_venous: 50.0,
};

fn analytic(q: f64, t: f64) -> f64 {
    PARAMS.p_venous + q * PARAMS.r_d * (1.0 - (-t / PARAMS.time_constant()).exp())
}

/// Max error of `P_c` over `[0, horizon]` under constant inflow.
fn max_error(q: f64, horizon: f64, steps: usize) -> f64 {
    let dt = horizon / steps as f64;
    let mut state = WindkesselState::at_rest(&PARAMS);
    let mut worst: f64 = 0.0;
    for k in 1..=steps {
        (state, _) = windkessel_step(&PARAMS, &state, q, dt).unwrap();
        worst = worst.max((state.p_c - analytic(q, k as f64 * dt)).abs());
    }
    worst
}

#[test]
fn transient_error_halves_with_step() {
    let horizon = 3.0 * PARAMS.time_constant();
    let errors: Vec<f64> = [50, 100, 200, 400]
        .iter()
        .map(|&n| max_error(10.0, horizon, n))
        .collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((1.8..=2.2).contains(&ratio), "{errors:?}");
    }
    assert!(errors[3] < 1e-2 * 10.0 * PARAMS.r_d);
}

#[test]
fn outlet_pressure_adds_proximal_drop() {
    let q = 3.0;
    let (state, p_out) =
        windkessel_step(&PARAMS, &WindkesselState::at_rest(&PARAMS), q, 1e-3).unwrap();
    assert!((p_out - (state.p_c + PARAMS.r_p * q)).abs() < 1e-12);
    assert!((state.t - 1e-3).abs() < 1e-18);
}
