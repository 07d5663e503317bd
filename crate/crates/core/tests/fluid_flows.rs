use vessel_fsi::ale::AleState;
use vessel_fsi::fluid::{
    advance_fluid, advance_fluid_with, divergence_norms, domain_area, flow_rate, section_flux,
    FluidBoundary, FluidConfig, FluidState, InflowPulse, SideCondition,
};
use vessel_fsi::mesh::{build_channel_mesh, BoundaryTag, Point, ReferenceMesh};

const LENGTH: f64 = 5.0;
const RADIUS: f64 = 0.5;
// Reynolds number U_max·R₀/ν ≈ 10.
const DELTA_P: f64 = 1.0;

fn poiseuille_config() -> FluidConfig {
    FluidConfig {
        inflow_pulse: InflowPulse::Constant(DELTA_P),
        p0: 0.0,
        ..FluidConfig::default()
    }
}

/// Marches the rigid channel to steady state under a constant traction drop.
fn steady_poiseuille(mesh: &ReferenceMesh, cfg: &FluidConfig) -> FluidState {
    let dt = 0.5;
    let zero_wall = vec![0.0; mesh.wall_nodes().len()];
    let mut state = FluidState::rest(mesh.num_nodes(), 0.0, 0.0);
    for k in 0..400 {
        let ale = AleState::at_rest(mesh, k as f64 * dt, dt).unwrap();
        let next = advance_fluid(mesh, &state, &ale, &zero_wall, 0.0, cfg)
            .unwrap()
            .state;
        let change = next
            .u
            .iter()
            .zip(&state.u)
            .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
            .fold(0.0, f64::max);
        state = next;
        if change < 1e-11 {
            break;
        }
    }
    state
}

/// Planar Poiseuille profile for the half channel, kinematic pressure drop.
fn poiseuille_velocity(r: f64, cfg: &FluidConfig) -> f64 {
    let gradient = DELTA_P / cfg.rho / LENGTH;
    gradient / (2.0 * cfg.nu) * (RADIUS * RADIUS - r * r)
}

#[test]
fn rigid_channel_reaches_poiseuille_profile() {
    let mesh = build_channel_mesh(LENGTH, RADIUS, 40, 16).unwrap();
    let cfg = poiseuille_config();
    let state = steady_poiseuille(&mesh, &cfg);
    let u_max = poiseuille_velocity(0.0, &cfg);
    let err = mesh
        .nodes()
        .iter()
        .zip(&state.u)
        .map(|(y, u)| {
            (u[0] - poiseuille_velocity(y[1], &cfg))
                .abs()
                .max(u[1].abs())
        })
        .fold(0.0, f64::max);
    assert!(
        err < 0.02 * u_max,
        "max error {err:.3e} vs u_max {u_max:.3e}"
    );

    let ale = AleState::at_rest(&mesh, 0.0, 1.0).unwrap();
    let q_in = flow_rate(&mesh, &state, &ale, BoundaryTag::Inflow);
    let q_out = flow_rate(&mesh, &state, &ale, BoundaryTag::Outflow);
    assert!(q_in < 0.0 && q_out > 0.0);
    assert!((q_in + q_out).abs() <= 1e-3 * q_in.abs());

    let (div, grad) = divergence_norms(&mesh, mesh.nodes(), &state.u);
    assert!(div < 1e-2 * grad, "div {div:.3e} grad {grad:.3e}");
}

#[test]
fn uniform_translation_keeps_translation_velocity() {
    let mesh = build_channel_mesh(1.0, 0.5, 20, 8).unwrap();
    let w: Point = [0.8, -0.3];
    let dt = 1e-3;
    let cfg = FluidConfig {
        solver: vessel_fsi::numerics::SolverOptions {
            tol: 1e-13,
            max_iterations: Some(5000),
            restart: 80,
        },
        ..FluidConfig::default()
    };
    let bc = FluidBoundary {
        inflow: SideCondition::Velocity(w),
        outflow: SideCondition::Free,
        wall: SideCondition::Velocity(w),
        axis: SideCondition::Velocity(w),
    };
    let mut coords = mesh.nodes().to_vec();
    let mut state = FluidState {
        u: vec![w; mesh.num_nodes()],
        p: vec![0.0; mesh.num_nodes()],
        t: 0.0,
    };
    for k in 0..100 {
        let next: Vec<Point> = coords
            .iter()
            .map(|y| [y[0] + w[0] * dt, y[1] + w[1] * dt])
            .collect();
        let ale = AleState::new(&mesh, coords, next.clone(), k as f64 * dt, dt).unwrap();
        state = advance_fluid_with(&mesh, &state, &ale, &bc, &cfg)
            .unwrap()
            .state;
        coords = next;
    }
    let scale = w[0].hypot(w[1]);
    for u in &state.u {
        assert!((u[0] - w[0]).hypot(u[1] - w[1]) <= 1e-8 * scale);
    }
}

#[test]
fn moving_wall_area_change_balances_section_fluxes() {
    // Prescribed wall motion η(z, t) = ε t sin(πz/L): the enclosed area
    // grows at the rate of the wall flux, which the sections must supply.
    let mesh = build_channel_mesh(1.0, 0.5, 24, 8).unwrap();
    let ext = vessel_fsi::ale::HarmonicExtension::new(&mesh);
    let cfg = FluidConfig {
        inflow_pulse: InflowPulse::Constant(0.0),
        ..FluidConfig::default()
    };
    let z = mesh.wall_coordinates();
    let profile: Vec<f64> = z.iter().map(|z| (std::f64::consts::PI * z).sin()).collect();
    let rate = 0.5;

    let mut errors = Vec::new();
    for dt in [2e-3, 1e-3] {
        let mut coords = mesh.nodes().to_vec();
        let mut state = FluidState::rest(mesh.num_nodes(), 0.0, 0.0);
        let steps = (0.01 / dt) as usize;
        let mut worst: f64 = 0.0;
        for k in 0..steps {
            let t_new = (k + 1) as f64 * dt;
            let eta: Vec<f64> = profile.iter().map(|s| rate * t_new * s).collect();
            let next = vessel_fsi::ale::deformed_coordinates(&mesh, &ext, &eta).unwrap();
            let ale =
                AleState::new(&mesh, coords.clone(), next.clone(), k as f64 * dt, dt).unwrap();
            let wall_velocity: Vec<f64> = profile.iter().map(|s| rate * s).collect();
            state = advance_fluid(&mesh, &state, &ale, &wall_velocity, 0.0, &cfg)
                .unwrap()
                .state;
            let darea = (domain_area(&mesh, &next) - domain_area(&mesh, &coords)) / dt;
            let q_sections = section_flux(&mesh, &state.u, &next, BoundaryTag::Inflow)
                + section_flux(&mesh, &state.u, &next, BoundaryTag::Outflow);
            worst = worst.max((darea + q_sections).abs());
            coords = next;
        }
        errors.push(worst);
    }
    let area_rate = rate * 2.0 / std::f64::consts::PI;
    assert!(errors[0] < 0.05 * area_rate, "{errors:?}");
    assert!(errors[1] <= errors[0] + 1e-9, "{errors:?}");
}
