//! Strongly coupled time step between the fluid and the wall.
//!
//! Each step extrapolates the wall, then repeats until the wall update
//! stagnates:
//!
//! 1. move the mesh to the current wall iterate by harmonic extension,
//! 2. solve the fluid with the iterate's wall velocity as Dirichlet data,
//! 3. advance the wall under the resulting fluid load,
//! 4. accept if the change in displacement plus velocity is within `τ`,
//!    otherwise relax with weight `θ` on the previous iterate and repeat.
//!
//! Non-convergence fails the step; the last iterate is never accepted.

use thiserror::Error;

use crate::ale::{deformed_coordinates, AleError, AleState, HarmonicExtension};
use crate::fluid::{advance_fluid, wall_traction_forcing, FluidConfig, FluidError, FluidState};
use crate::mesh::ReferenceMesh;
use crate::params::PhysicalParams;
use crate::wall::{StringOperators, WallError, WallState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    /// Tolerance on `‖Δη‖ + ‖Δη̇‖` (discrete L² on the wall).
    pub tau: f64,
    /// Weight of the previous iterate in the relaxation, `0 < θ ≤ 1`.
    pub theta: f64,
    pub max_subiters: usize,
    pub dt: f64,
    pub t_end: f64,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            tau: 1e-5,
            theta: 0.5,
            max_subiters: 50,
            dt: 1e-4,
            t_end: 0.02,
        }
    }
}

impl CouplingConfig {
    pub fn violations(&self) -> Vec<(&'static str, &'static str)> {
        let mut out = Vec::new();
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            out.push(("tau", "tolerance must be positive"));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            out.push(("theta", "theta must satisfy 0<θ≤1"));
        }
        if self.max_subiters < 1 {
            out.push(("max_subiters", "must be at least 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            out.push(("dt", "time step must be positive"));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            out.push(("t_end", "must be at least dt"));
        }
        out
    }

    pub fn validate(&self) -> Result<(), CouplingError> {
        match self.violations().first() {
            None => Ok(()),
            Some((field, rule)) => Err(CouplingError::InvalidConfig(format!("{field}: {rule}"))),
        }
    }

    /// Number of whole steps in `[0, t_end]`.
    pub fn num_steps(&self) -> usize {
        (self.t_end / self.dt * (1.0 + 1e-12)).floor() as usize
    }
}

/// One line of the subiteration log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubiterationRecord {
    /// Index `k + 1` of the time level being computed.
    pub step: usize,
    /// Subiteration counter `j`, from 0.
    pub subiteration: usize,
    pub disp_residual: f64,
    pub vel_residual: f64,
    pub fluid_iterations: usize,
}

impl SubiterationRecord {
    pub fn residual(&self) -> f64 {
        self.disp_residual + self.vel_residual
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error("invalid coupling configuration: {0}")]
    InvalidConfig(String),
    #[error("step {step} did not converge in {} subiterations (last residual {:.3e})", .history.len(), .history.last().map_or(f64::NAN, |r| r.residual()))]
    NotConverged {
        step: usize,
        history: Vec<SubiterationRecord>,
    },
    #[error("step {step}: {source}")]
    Mesh { step: usize, source: AleError },
    #[error("step {step}: {source}")]
    Fluid { step: usize, source: FluidError },
    #[error("step {step}: {source}")]
    Wall { step: usize, source: WallError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub fluid: FluidState,
    pub wall: WallState,
    /// Slab ending at the current time; `y_new` is the current configuration.
    pub ale: AleState,
    pub step_index: usize,
}

impl CoupledState {
    pub fn time(&self) -> f64 {
        self.fluid.t
    }
}

/// Displacement and velocity pair on the wall grid.
pub type WallPair = (Vec<f64>, Vec<f64>);

/// Predictor: `η₍₀₎ = η^k + Δt η̇^k`, `η̇₍₀₎ = η̇^k`.
pub fn extrapolate(wall: &WallState, dt: f64) -> WallPair {
    let eta = wall
        .eta
        .iter()
        .zip(&wall.eta_dot)
        .map(|(e, v)| e + dt * v)
        .collect();
    (eta, wall.eta_dot.clone())
}

/// `θ·current + (1 − θ)·candidate`, componentwise for both fields.
pub fn relax(current: (&[f64], &[f64]), candidate: (&[f64], &[f64]), theta: f64) -> WallPair {
    let mix = |a: &[f64], b: &[f64]| -> Vec<f64> {
        assert_eq!(a.len(), b.len(), "relaxation on different grids");
        a.iter()
            .zip(b)
            .map(|(x, y)| theta * x + (1.0 - theta) * y)
            .collect()
    };
    (mix(current.0, candidate.0), mix(current.1, candidate.1))
}

/// `(‖η* − η₍ⱼ₎‖, ‖η̇* − η̇₍ⱼ₎‖)` in the mass-weighted L² norm of the wall.
pub fn interface_residuals(
    ops: &StringOperators,
    candidate: (&[f64], &[f64]),
    iterate: (&[f64], &[f64]),
) -> (f64, f64) {
    let diff = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
    (
        ops.l2_norm(&diff(candidate.0, iterate.0)),
        ops.l2_norm(&diff(candidate.1, iterate.1)),
    )
}

/// True iff `‖η* − η₍ⱼ₎‖ + ‖η̇* − η̇₍ⱼ₎‖ ≤ τ`.
pub fn convergence_test(
    ops: &StringOperators,
    candidate: (&[f64], &[f64]),
    iterate: (&[f64], &[f64]),
    tau: f64,
) -> bool {
    let (d, v) = interface_residuals(ops, candidate, iterate);
    d + v <= tau
}

/// Everything a coupled step needs besides the state.
#[derive(Debug, Clone)]
pub struct CoupledProblem {
    pub mesh: ReferenceMesh,
    pub extension: HarmonicExtension,
    pub wall_ops: StringOperators,
    pub fluid: FluidConfig,
    pub params: PhysicalParams,
    pub coupling: CouplingConfig,
}

impl CoupledProblem {
    pub fn new(
        mesh: ReferenceMesh,
        params: PhysicalParams,
        fluid: FluidConfig,
        coupling: CouplingConfig,
    ) -> Result<Self, CouplingError> {
        coupling.validate()?;
        fluid
            .validate()
            .map_err(|source| CouplingError::Fluid { step: 0, source })?;
        let wall_ops = StringOperators::new(&mesh.wall_coordinates(), params.string_params())
            .map_err(|source| CouplingError::Wall { step: 0, source })?;
        let extension = HarmonicExtension::new(&mesh);
        Ok(Self {
            mesh,
            extension,
            wall_ops,
            fluid,
            params,
            coupling,
        })
    }

    /// Fluid at rest at the external pressure, undeformed wall, `t = 0`.
    pub fn initial_state(&self) -> CoupledState {
        let n = self.mesh.num_nodes();
        let dt = self.coupling.dt;
        CoupledState {
            fluid: FluidState::rest(n, self.fluid.p0 / self.fluid.rho, 0.0),
            wall: WallState::zero(self.mesh.wall_nodes().len(), 0.0),
            ale: AleState::at_rest(&self.mesh, -dt, dt).expect("reference mesh is valid"),
            step_index: 0,
        }
    }

    /// Advances `state` from `t^k` to `t^{k+1}` with the distal pressure
    /// `outflow_pressure` (dyn/cm²) held fixed over the step.
    pub fn coupled_step(
        &self,
        state: &CoupledState,
        outflow_pressure: f64,
    ) -> Result<(CoupledState, Vec<SubiterationRecord>), CouplingError> {
        let cfg = &self.coupling;
        let dt = cfg.dt;
        let step = state.step_index + 1;
        let t_old = state.step_index as f64 * dt;
        let mesh_err = |source| CouplingError::Mesh { step, source };

        let (mut eta_j, mut eta_dot_j) = extrapolate(&state.wall, dt);
        let mut history = Vec::new();

        for j in 0..cfg.max_subiters {
            let y_new =
                deformed_coordinates(&self.mesh, &self.extension, &eta_j).map_err(mesh_err)?;
            let ale = AleState::new(&self.mesh, state.ale.y_new.clone(), y_new, t_old, dt)
                .map_err(mesh_err)?;

            let fluid = advance_fluid(
                &self.mesh,
                &state.fluid,
                &ale,
                &eta_dot_j,
                outflow_pressure,
                &self.fluid,
            )
            .map_err(|source| CouplingError::Fluid { step, source })?;

            let load = wall_traction_forcing(&self.mesh, &fluid.state, &ale, &self.params);
            let wall_star = self
                .wall_ops
                .newmark_step(&state.wall, &load, dt)
                .map_err(|source| CouplingError::Wall { step, source })?;

            let (disp_residual, vel_residual) = interface_residuals(
                &self.wall_ops,
                (&wall_star.eta, &wall_star.eta_dot),
                (&eta_j, &eta_dot_j),
            );
            let record = SubiterationRecord {
                step,
                subiteration: j,
                disp_residual,
                vel_residual,
                fluid_iterations: fluid.report.iterations,
            };
            log::debug!(
                "step {step} subiter {j}: disp {disp_residual:.3e} vel {vel_residual:.3e} fluid its {}",
                fluid.report.iterations
            );
            history.push(record);

            if disp_residual + vel_residual <= cfg.tau {
                // The mesh follows the accepted wall displacement.
                let y_final = deformed_coordinates(&self.mesh, &self.extension, &wall_star.eta)
                    .map_err(mesh_err)?;
                let ale = AleState::new(&self.mesh, state.ale.y_new.clone(), y_final, t_old, dt)
                    .map_err(mesh_err)?;
                let next = CoupledState {
                    fluid: fluid.state,
                    wall: wall_star,
                    ale,
                    step_index: step,
                };
                return Ok((next, history));
            }

            (eta_j, eta_dot_j) = relax(
                (&eta_j, &eta_dot_j),
                (&wall_star.eta, &wall_star.eta_dot),
                cfg.theta,
            );
        }

        Err(CouplingError::NotConverged { step, history })
    }

    /// Fluid-only step on the undeformed mesh with a motionless wall.
    pub fn rigid_step(
        &self,
        state: &CoupledState,
        outflow_pressure: f64,
    ) -> Result<(CoupledState, Vec<SubiterationRecord>), CouplingError> {
        let dt = self.coupling.dt;
        let step = state.step_index + 1;
        let ale = AleState::at_rest(&self.mesh, state.step_index as f64 * dt, dt)
            .map_err(|source| CouplingError::Mesh { step, source })?;
        let still = vec![0.0; self.mesh.wall_nodes().len()];
        let fluid = advance_fluid(
            &self.mesh,
            &state.fluid,
            &ale,
            &still,
            outflow_pressure,
            &self.fluid,
        )
        .map_err(|source| CouplingError::Fluid { step, source })?;
        let record = SubiterationRecord {
            step,
            subiteration: 0,
            disp_residual: 0.0,
            vel_residual: 0.0,
            fluid_iterations: fluid.report.iterations,
        };
        let next = CoupledState {
            fluid: fluid.state,
            wall: WallState::zero(still.len(), ale.t_new()),
            ale,
            step_index: step,
        };
        Ok((next, vec![record]))
    }
}

pub fn coupled_step(
    problem: &CoupledProblem,
    state: &CoupledState,
    outflow_pressure: f64,
) -> Result<(CoupledState, Vec<SubiterationRecord>), CouplingError> {
    problem.coupled_step(state, outflow_pressure)
}
