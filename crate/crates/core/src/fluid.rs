//! Incompressible Navier–Stokes in ALE form on the moving channel mesh.
//!
//! Equal-order P1/P1 elements with Brezzi–Pitkäranta pressure stabilization.
//! One step is a backward-Euler update assembled on the end-of-slab
//! configuration, with the ALE time derivative taken nodewise on the
//! reference nodes and the convective field lagged as `u^k − w`.
//!
//! Pressure is kinematic (divided by ρ) inside [`FluidState`]; boundary
//! pressures handed to this module are in dyn/cm².
//!
//! Unknowns are interleaved per node as `(u_z, u_r, p)`.

use thiserror::Error;

use crate::ale::{p1_gradients, AleState};
use crate::mesh::{BoundaryTag, Point, ReferenceMesh};
use crate::numerics::{solve_general, NumericsError, SolverOptions, SolverReport, SparseMatrix};
use crate::params::PhysicalParams;

const DOFS_PER_NODE: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FluidError {
    #[error("invalid fluid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("fluid solve did not converge (residual {:.3e} after {} iterations)", .0.final_residual, .0.iterations)]
    SolverFailure(SolverReport),
    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("wall velocity data can only be prescribed on the wall")]
    WallDataOffWall,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Inflow pressure waveform, gauge pressure in dyn/cm².
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InflowPulse {
    Constant(f64),
    /// `amplitude · sin(π t / duration)` for `t ∈ [0, duration]`, zero afterwards.
    HalfSine {
        amplitude: f64,
        duration: f64,
    },
}

impl InflowPulse {
    pub fn pressure(&self, t: f64) -> f64 {
        match *self {
            Self::Constant(p) => p,
            Self::HalfSine {
                amplitude,
                duration,
            } => {
                if (0.0..=duration).contains(&t) {
                    amplitude * (std::f64::consts::PI * t / duration).sin()
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidConfig {
    /// Kinematic viscosity, cm²/s.
    pub nu: f64,
    /// Density, g/cm³.
    pub rho: f64,
    /// Body force per unit mass, cm/s².
    pub f_body: Point,
    /// Pressure stabilization coefficient; the element weight is `δ h²/ν`.
    pub stab_delta: f64,
    pub inflow_pulse: InflowPulse,
    /// External pressure, dyn/cm².
    pub p0: f64,
    pub solver: SolverOptions,
}

impl Default for FluidConfig {
    fn default() -> Self {
        Self {
            nu: 0.035,
            rho: 1.0,
            f_body: [0.0, 0.0],
            stab_delta: 0.02,
            inflow_pulse: InflowPulse::HalfSine {
                amplitude: 2.0e4,
                duration: 5.0e-3,
            },
            p0: 0.0,
            solver: SolverOptions {
                tol: 1e-10,
                max_iterations: Some(5000),
                restart: 80,
            },
        }
    }
}

impl FluidConfig {
    pub fn validate(&self) -> Result<(), FluidError> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(FluidError::InvalidConfig("nu must be positive"));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(FluidError::InvalidConfig("rho must be positive"));
        }
        if !(self.stab_delta >= 0.0 && self.stab_delta.is_finite()) {
            return Err(FluidError::InvalidConfig("stab_delta must be non-negative"));
        }
        Ok(())
    }

    /// Absolute inflow pressure at time `t`, dyn/cm².
    pub fn inflow_pressure(&self, t: f64) -> f64 {
        self.p0 + self.inflow_pulse.pressure(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    /// Nodal velocity, cm/s.
    pub u: Vec<Point>,
    /// Nodal kinematic pressure, cm²/s².
    pub p: Vec<f64>,
    pub t: f64,
}

impl FluidState {
    /// Fluid at rest with uniform kinematic pressure.
    pub fn rest(num_nodes: usize, p_kinematic: f64, t: f64) -> Self {
        Self {
            u: vec![[0.0, 0.0]; num_nodes],
            p: vec![p_kinematic; num_nodes],
            t,
        }
    }
}

/// Condition imposed on one tagged part of the boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum SideCondition {
    /// Normal traction `−P n` with `P` in dyn/cm², radial velocity held at zero.
    NormalTraction(f64),
    /// Zero traction.
    Free,
    /// Zero radial velocity and zero tangential traction.
    Slip,
    /// The same velocity at every node.
    Velocity(Point),
    /// Radial velocity per wall node (in wall-grid order), zero axial velocity.
    WallVelocity(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidBoundary {
    pub inflow: SideCondition,
    pub outflow: SideCondition,
    pub wall: SideCondition,
    pub axis: SideCondition,
}

impl FluidBoundary {
    /// Pressure-driven vessel: traction sections, moving wall, symmetric axis.
    pub fn vessel(p_in: f64, p_out: f64, wall_velocity: Vec<f64>) -> Self {
        Self {
            inflow: SideCondition::NormalTraction(p_in),
            outflow: SideCondition::NormalTraction(p_out),
            wall: SideCondition::WallVelocity(wall_velocity),
            axis: SideCondition::Slip,
        }
    }

    fn side(&self, tag: BoundaryTag) -> &SideCondition {
        match tag {
            BoundaryTag::Inflow => &self.inflow,
            BoundaryTag::Outflow => &self.outflow,
            BoundaryTag::Wall => &self.wall,
            BoundaryTag::Axis => &self.axis,
        }
    }
}

/// Solution of one fluid step together with its linear solver report.
#[derive(Debug, Clone)]
pub struct FluidStep {
    pub state: FluidState,
    pub report: SolverReport,
}

/// One ALE backward-Euler step with the standard vessel boundary conditions.
///
/// `wall_velocity` is the radial wall velocity per wall node and
/// `outflow_pressure` the distal pressure in dyn/cm²; the inflow pressure is
/// taken from the pulse at the end of the slab.
pub fn advance_fluid(
    mesh: &ReferenceMesh,
    state: &FluidState,
    ale: &AleState,
    wall_velocity: &[f64],
    outflow_pressure: f64,
    cfg: &FluidConfig,
) -> Result<FluidStep, FluidError> {
    if wall_velocity.len() != mesh.wall_nodes().len() {
        return Err(FluidError::LengthMismatch {
            expected: mesh.wall_nodes().len(),
            actual: wall_velocity.len(),
        });
    }
    let bc = FluidBoundary::vessel(
        cfg.inflow_pressure(ale.t_new()),
        outflow_pressure,
        wall_velocity.to_vec(),
    );
    advance_fluid_with(mesh, state, ale, &bc, cfg)
}

/// One ALE backward-Euler step with arbitrary boundary conditions.
pub fn advance_fluid_with(
    mesh: &ReferenceMesh,
    state: &FluidState,
    ale: &AleState,
    bc: &FluidBoundary,
    cfg: &FluidConfig,
) -> Result<FluidStep, FluidError> {
    cfg.validate()?;
    let n = mesh.num_nodes();
    for len in [state.u.len(), state.p.len(), ale.y_new.len()] {
        if len != n {
            return Err(FluidError::LengthMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    let fixed = dirichlet_values(mesh, bc)?;
    let (matrix, rhs) = assemble_system(mesh, state, ale, bc, cfg, &fixed);
    let (x, report) = solve_general(&matrix, &rhs, &cfg.solver)?;
    if !report.converged {
        return Err(FluidError::SolverFailure(report));
    }
    let u = (0..n)
        .map(|i| [x[DOFS_PER_NODE * i], x[DOFS_PER_NODE * i + 1]])
        .collect();
    let p = (0..n).map(|i| x[DOFS_PER_NODE * i + 2]).collect();
    Ok(FluidStep {
        state: FluidState {
            u,
            p,
            t: ale.t_new(),
        },
        report,
    })
}

/// Prescribed value per degree of freedom, `None` when free.
fn dirichlet_values(
    mesh: &ReferenceMesh,
    bc: &FluidBoundary,
) -> Result<Vec<Option<f64>>, FluidError> {
    let n = mesh.num_nodes();
    let mut fixed = vec![None; DOFS_PER_NODE * n];
    let mut wall_index = vec![usize::MAX; n];
    for (k, &node) in mesh.wall_nodes().iter().enumerate() {
        wall_index[node] = k;
    }

    // Component constraints first so full velocity data wins at corners.
    for pass in 0..2 {
        for edge in mesh.boundary_edges() {
            let side = bc.side(edge.tag);
            for &node in &edge.nodes {
                match (pass, side) {
                    (0, SideCondition::NormalTraction(_) | SideCondition::Slip) => {
                        fixed[DOFS_PER_NODE * node + 1] = Some(0.0);
                    }
                    (1, SideCondition::Velocity(v)) => {
                        fixed[DOFS_PER_NODE * node] = Some(v[0]);
                        fixed[DOFS_PER_NODE * node + 1] = Some(v[1]);
                    }
                    (1, SideCondition::WallVelocity(values)) => {
                        let k = wall_index[node];
                        if k == usize::MAX {
                            return Err(FluidError::WallDataOffWall);
                        }
                        if values.len() != mesh.wall_nodes().len() {
                            return Err(FluidError::LengthMismatch {
                                expected: mesh.wall_nodes().len(),
                                actual: values.len(),
                            });
                        }
                        fixed[DOFS_PER_NODE * node] = Some(0.0);
                        fixed[DOFS_PER_NODE * node + 1] = Some(values[k]);
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(fixed)
}

/// Longest edge of a triangle.
fn element_size(p: [Point; 3]) -> f64 {
    let d = |a: Point, b: Point| (a[0] - b[0]).hypot(a[1] - b[1]);
    d(p[0], p[1]).max(d(p[1], p[2])).max(d(p[2], p[0]))
}

fn assemble_system(
    mesh: &ReferenceMesh,
    state: &FluidState,
    ale: &AleState,
    bc: &FluidBoundary,
    cfg: &FluidConfig,
    fixed: &[Option<f64>],
) -> (SparseMatrix, Vec<f64>) {
    let ndof = DOFS_PER_NODE * mesh.num_nodes();
    let coords = &ale.y_new;
    let inv_dt = 1.0 / ale.dt;
    let nu = cfg.nu;
    let mut triplets = Vec::with_capacity(81 * mesh.triangles().len());
    let mut rhs = vec![0.0; ndof];

    for tri in mesh.triangles() {
        let pts = [coords[tri[0]], coords[tri[1]], coords[tri[2]]];
        let g = p1_gradients(pts);
        let area = g.area;
        let tau = cfg.stab_delta * element_size(pts).powi(2) / nu;
        let adv: [Point; 3] = std::array::from_fn(|m| {
            let (u, w) = (state.u[tri[m]], ale.w[tri[m]]);
            [u[0] - w[0], u[1] - w[1]]
        });

        for a in 0..3 {
            // ∫ φ_a (u^k − w) over the element.
            let weighted: Point = std::array::from_fn(|c| {
                (0..3)
                    .map(|m| if m == a { 2.0 } else { 1.0 } * adv[m][c])
                    .sum::<f64>()
                    * area
                    / 12.0
            });
            for b in 0..3 {
                let mass = if a == b { area / 6.0 } else { area / 12.0 };
                let lap = area * (g.grad[a][0] * g.grad[b][0] + g.grad[a][1] * g.grad[b][1]);
                let conv = weighted[0] * g.grad[b][0] + weighted[1] * g.grad[b][1];
                for alpha in 0..2 {
                    let row = DOFS_PER_NODE * tri[a] + alpha;
                    triplets.push((
                        row,
                        DOFS_PER_NODE * tri[b] + alpha,
                        mass * inv_dt + conv + nu * lap,
                    ));
                    for beta in 0..2 {
                        triplets.push((
                            row,
                            DOFS_PER_NODE * tri[b] + beta,
                            nu * area * g.grad[a][beta] * g.grad[b][alpha],
                        ));
                    }
                    triplets.push((
                        row,
                        DOFS_PER_NODE * tri[b] + 2,
                        -area / 3.0 * g.grad[a][alpha],
                    ));
                    rhs[row] += mass * (inv_dt * state.u[tri[b]][alpha] + cfg.f_body[alpha]);
                }
                let prow = DOFS_PER_NODE * tri[a] + 2;
                for beta in 0..2 {
                    triplets.push((
                        prow,
                        DOFS_PER_NODE * tri[b] + beta,
                        -area / 3.0 * g.grad[b][beta],
                    ));
                }
                triplets.push((prow, DOFS_PER_NODE * tri[b] + 2, -tau * lap));
            }
        }
    }

    for edge in mesh.boundary_edges() {
        if let SideCondition::NormalTraction(pressure) = bc.side(edge.tag) {
            let (normal, len) = outward_normal(coords[edge.nodes[0]], coords[edge.nodes[1]]);
            let p_kin = pressure / cfg.rho;
            for &node in &edge.nodes {
                for alpha in 0..2 {
                    rhs[DOFS_PER_NODE * node + alpha] -= p_kin * normal[alpha] * 0.5 * len;
                }
            }
        }
    }

    // Eliminate prescribed values: identity rows, known columns moved to the rhs.
    let mut reduced = Vec::with_capacity(triplets.len());
    for (row, col, v) in triplets {
        if fixed[row].is_some() {
            continue;
        }
        match fixed[col] {
            Some(g) => rhs[row] -= v * g,
            None => reduced.push((row, col, v)),
        }
    }
    for (dof, value) in fixed.iter().enumerate() {
        if let Some(g) = value {
            reduced.push((dof, dof, 1.0));
            rhs[dof] = *g;
        }
    }
    let matrix = SparseMatrix::assemble(ndof, ndof, &reduced).expect("dof indices in range");
    (matrix, rhs)
}

/// Outward unit normal and length of a counter-clockwise boundary edge.
pub fn outward_normal(a: Point, b: Point) -> (Point, f64) {
    let t = [b[0] - a[0], b[1] - a[1]];
    let len = t[0].hypot(t[1]);
    ([t[1] / len, -t[0] / len], len)
}

/// `∫ u·n ds` over a boundary section of the current configuration, by
/// edgewise trapezoidal quadrature. Positive out of the domain.
pub fn flow_rate(
    mesh: &ReferenceMesh,
    state: &FluidState,
    ale: &AleState,
    section: BoundaryTag,
) -> f64 {
    section_flux(mesh, &state.u, &ale.y_new, section)
}

/// [`flow_rate`] on explicit node coordinates.
pub fn section_flux(
    mesh: &ReferenceMesh,
    u: &[Point],
    coords: &[Point],
    section: BoundaryTag,
) -> f64 {
    mesh.edges_with_tag(section)
        .map(|e| {
            let [i, j] = e.nodes;
            let (n, len) = outward_normal(coords[i], coords[j]);
            let un = |k: usize| u[k][0] * n[0] + u[k][1] * n[1];
            0.5 * len * (un(i) + un(j))
        })
        .sum()
}

/// Length-weighted mean of the kinematic pressure over a boundary section.
pub fn section_mean_pressure(
    mesh: &ReferenceMesh,
    state: &FluidState,
    coords: &[Point],
    section: BoundaryTag,
) -> f64 {
    let (mut integral, mut length) = (0.0, 0.0);
    for e in mesh.edges_with_tag(section) {
        let [i, j] = e.nodes;
        let (_, len) = outward_normal(coords[i], coords[j]);
        integral += 0.5 * len * (state.p[i] + state.p[j]);
        length += len;
    }
    integral / length
}

/// Velocity gradient on one triangle, `grad[α][β] = ∂u_α/∂x_β`.
fn velocity_gradient(coords: &[Point], u: &[Point], tri: [usize; 3]) -> ([[f64; 2]; 2], f64) {
    let g = p1_gradients([coords[tri[0]], coords[tri[1]], coords[tri[2]]]);
    let mut grad = [[0.0; 2]; 2];
    for (a, &node) in tri.iter().enumerate() {
        for (alpha, row) in grad.iter_mut().enumerate() {
            for (beta, entry) in row.iter_mut().enumerate() {
                *entry += u[node][alpha] * g.grad[a][beta];
            }
        }
    }
    (grad, g.area)
}

/// Wall forcing for the string model at each wall node:
/// `H = g (ρ / (ρ_w h₀)) [(p − p₀) n − T(u) n]·e_r`.
///
/// `T = ν(∇u + ∇uᵀ)` is taken from the triangle owning each wall segment,
/// the pressure is the segment average, `n` is the outward normal of the
/// deformed segment and `g` its deformed-to-reference length ratio. Nodal
/// values average the adjacent segments.
pub fn wall_traction_forcing(
    mesh: &ReferenceMesh,
    state: &FluidState,
    ale: &AleState,
    params: &PhysicalParams,
) -> Vec<f64> {
    let coords = &ale.y_new;
    let reference = mesh.nodes();
    let wall = mesh.wall_nodes();
    let scale = params.rho / (params.rho_w * params.h0);
    let p0 = params.p0_kinematic();

    let segment: Vec<f64> = (0..wall.len() - 1)
        .map(|k| {
            // Wall nodes run in +z, so the counter-clockwise edge is (k+1, k).
            let (i, j) = (wall[k + 1], wall[k]);
            let (n, len) = outward_normal(coords[i], coords[j]);
            let (_, ref_len) = outward_normal(reference[i], reference[j]);
            let metric = len / ref_len;
            let tri = mesh.triangles()[mesh.wall_edge_triangle(k)];
            let (grad, _) = velocity_gradient(coords, &state.u, tri);
            let stress =
                |alpha: usize, beta: usize| params.nu * (grad[alpha][beta] + grad[beta][alpha]);
            let p = 0.5 * (state.p[i] + state.p[j]) - p0;
            // Radial component of (p n − T n).
            let radial = p * n[1] - (stress(1, 0) * n[0] + stress(1, 1) * n[1]);
            metric * scale * radial
        })
        .collect();

    let last = wall.len() - 1;
    (0..wall.len())
        .map(|k| match k {
            0 => segment[0],
            k if k == last => segment[last - 1],
            k => 0.5 * (segment[k - 1] + segment[k]),
        })
        .collect()
}

/// `(‖div u‖_{L²}, ‖∇u‖_{L²})` on the given configuration.
pub fn divergence_norms(mesh: &ReferenceMesh, coords: &[Point], u: &[Point]) -> (f64, f64) {
    let (mut div2, mut grad2) = (0.0, 0.0);
    for tri in mesh.triangles() {
        let (grad, area) = velocity_gradient(coords, u, *tri);
        let div = grad[0][0] + grad[1][1];
        div2 += area * div * div;
        grad2 += area * grad.iter().flatten().map(|v| v * v).sum::<f64>();
    }
    (div2.sqrt(), grad2.sqrt())
}

/// Area enclosed by the current configuration.
pub fn domain_area(mesh: &ReferenceMesh, coords: &[Point]) -> f64 {
    mesh.triangles()
        .iter()
        .map(|t| crate::mesh::signed_area(coords[t[0]], coords[t[1]], coords[t[2]]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_channel_mesh;

    fn params() -> PhysicalParams {
        PhysicalParams::default()
    }

    #[test]
    fn half_sine_pulse_shape() {
        let p = InflowPulse::HalfSine {
            amplitude: 2.0,
            duration: 0.01,
        };
        assert_eq!(p.pressure(0.0), 0.0);
        assert!((p.pressure(0.005) - 2.0).abs() < 1e-15);
        assert_eq!(p.pressure(0.02), 0.0);
        assert_eq!(p.pressure(-1.0), 0.0);
    }

    #[test]
    fn rest_state_is_preserved() {
        let mesh = build_channel_mesh(1.0, 0.5, 8, 4).unwrap();
        let cfg = FluidConfig {
            inflow_pulse: InflowPulse::Constant(0.0),
            p0: 50.0,
            ..FluidConfig::default()
        };
        let mut state = FluidState::rest(mesh.num_nodes(), 50.0, 0.0);
        let zero_wall = vec![0.0; mesh.wall_nodes().len()];
        for k in 0..3 {
            let ale = AleState::at_rest(&mesh, k as f64 * 1e-3, 1e-3).unwrap();
            state = advance_fluid(&mesh, &state, &ale, &zero_wall, 50.0, &cfg)
                .unwrap()
                .state;
        }
        for (u, p) in state.u.iter().zip(&state.p) {
            assert!(u[0].abs() < 1e-9 && u[1].abs() < 1e-9);
            assert!((p - 50.0).abs() < 1e-8);
        }
    }

    #[test]
    fn flow_rate_examples() {
        let mesh = build_channel_mesh(2.0, 0.5, 4, 6).unwrap();
        let ale = AleState::at_rest(&mesh, 0.0, 1.0).unwrap();
        let mut state = FluidState::rest(mesh.num_nodes(), 0.0, 0.0);
        assert_eq!(flow_rate(&mesh, &state, &ale, BoundaryTag::Outflow), 0.0);

        state.u = vec![[3.0, 0.0]; mesh.num_nodes()];
        assert!((flow_rate(&mesh, &state, &ale, BoundaryTag::Outflow) - 1.5).abs() < 1e-14);
        assert!((flow_rate(&mesh, &state, &ale, BoundaryTag::Inflow) + 1.5).abs() < 1e-14);

        // Parabola on a fine section: trapezoid error is O(h²).
        let fine = build_channel_mesh(1.0, 0.5, 2, 400).unwrap();
        let ale = AleState::at_rest(&fine, 0.0, 1.0).unwrap();
        let um = 2.0;
        let u: Vec<Point> = fine
            .nodes()
            .iter()
            .map(|p| [um * (1.0 - (p[1] / 0.5).powi(2)), 0.0])
            .collect();
        let state = FluidState {
            u,
            p: vec![0.0; fine.num_nodes()],
            t: 0.0,
        };
        let q = flow_rate(&fine, &state, &ale, BoundaryTag::Outflow);
        assert!((q - 2.0 / 3.0 * um * 0.5).abs() < 1e-5);
    }

    #[test]
    fn traction_forcing_examples() {
        let mesh = build_channel_mesh(1.0, 0.5, 6, 3).unwrap();
        let ale = AleState::at_rest(&mesh, 0.0, 1.0).unwrap();
        let prm = PhysicalParams {
            p0: 30.0,
            ..params()
        };
        let p0_kin = prm.p0_kinematic();

        let rest = FluidState::rest(mesh.num_nodes(), p0_kin, 0.0);
        assert!(wall_traction_forcing(&mesh, &rest, &ale, &prm)
            .iter()
            .all(|h| h.abs() < 1e-12));

        let p_bar = 120.0;
        let loaded = FluidState::rest(mesh.num_nodes(), p0_kin + p_bar, 0.0);
        let expected = prm.rho * p_bar / (prm.rho_w * prm.h0);
        for h in wall_traction_forcing(&mesh, &loaded, &ale, &prm) {
            assert!((h - expected).abs() < 1e-9 * expected);
        }

        let shear = FluidState {
            u: mesh.nodes().iter().map(|p| [4.0 * p[1], 0.0]).collect(),
            p: vec![p0_kin; mesh.num_nodes()],
            t: 0.0,
        };
        assert!(wall_traction_forcing(&mesh, &shear, &ale, &prm)
            .iter()
            .all(|h| h.abs() < 1e-12));
    }

    #[test]
    fn metric_scales_forcing() {
        // Uniformly stretched wall in z doubles the segment lengths.
        let mesh = build_channel_mesh(1.0, 0.5, 4, 2).unwrap();
        let y_new: Vec<Point> = mesh.nodes().iter().map(|p| [2.0 * p[0], p[1]]).collect();
        let ale = AleState::new(&mesh, mesh.nodes().to_vec(), y_new, 0.0, 1.0).unwrap();
        let prm = params();
        let state = FluidState::rest(mesh.num_nodes(), 10.0, 0.0);
        let expected = 2.0 * prm.rho * 10.0 / (prm.rho_w * prm.h0);
        for h in wall_traction_forcing(&mesh, &state, &ale, &prm) {
            assert!((h - expected).abs() < 1e-9 * expected);
        }
    }

    #[test]
    fn wall_data_must_match_grid() {
        let mesh = build_channel_mesh(1.0, 0.5, 4, 2).unwrap();
        let ale = AleState::at_rest(&mesh, 0.0, 1e-3).unwrap();
        let state = FluidState::rest(mesh.num_nodes(), 0.0, 0.0);
        let err = advance_fluid(&mesh, &state, &ale, &[0.0; 3], 0.0, &FluidConfig::default())
            .unwrap_err();
        assert!(matches!(err, FluidError::LengthMismatch { .. }));
        let bad = FluidBoundary {
            axis: SideCondition::WallVelocity(vec![0.0; 5]),
            ..FluidBoundary::vessel(0.0, 0.0, vec![0.0; 5])
        };
        assert_eq!(
            advance_fluid_with(&mesh, &state, &ale, &bad, &FluidConfig::default()).unwrap_err(),
            FluidError::WallDataOffWall
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = FluidConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.nu = -1.0;
        assert!(cfg.validate().is_err());
        cfg = FluidConfig {
            stab_delta: -0.5,
            ..FluidConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
