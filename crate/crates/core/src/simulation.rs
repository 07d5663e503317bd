//! Time loop: coupled steps with a staggered Windkessel outflow.
//!
//! The distal pressure is frozen during a step and updated from the
//! converged outflow rate between steps.

use thiserror::Error;

use crate::coupler::{CoupledProblem, CoupledState, CouplingError, SubiterationRecord};
use crate::fluid::{flow_rate, section_mean_pressure};
use crate::mesh::BoundaryTag;
use crate::windkessel::{windkessel_step, WindkesselError, WindkesselParams, WindkesselState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallMode {
    Compliant,
    /// Fixed mesh and motionless wall; the fluid is solved once per step.
    Rigid,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error(transparent)]
    Windkessel(#[from] WindkesselError),
}

/// Observables at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    /// Section flow rates, positive out of the domain (cm²/s).
    pub q_in: f64,
    pub q_out: f64,
    /// Section-averaged pressures (dyn/cm²).
    pub p_in_mean: f64,
    pub p_out_mean: f64,
    pub max_wall_disp: f64,
    /// Wall displacement at the probe locations.
    pub probes: Vec<f64>,
    pub windkessel: WindkesselState,
    /// Distal pressure applied during the step that produced this record.
    pub p_out: f64,
    pub subiterations: Vec<SubiterationRecord>,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    problem: CoupledProblem,
    windkessel: WindkesselParams,
    mode: WallMode,
    probes: Vec<f64>,
    state: CoupledState,
    wk_state: WindkesselState,
    p_out: f64,
}

impl Simulation {
    pub fn new(
        problem: CoupledProblem,
        windkessel: WindkesselParams,
        mode: WallMode,
        probes: Vec<f64>,
    ) -> Result<Self, SimulationError> {
        windkessel.validate()?;
        let state = problem.initial_state();
        let wk_state = WindkesselState::at_rest(&windkessel);
        let p_out = wk_state.outlet_pressure(&windkessel, 0.0);
        Ok(Self {
            problem,
            windkessel,
            mode,
            probes,
            state,
            wk_state,
            p_out,
        })
    }

    pub fn problem(&self) -> &CoupledProblem {
        &self.problem
    }

    pub fn state(&self) -> &CoupledState {
        &self.state
    }

    pub fn windkessel(&self) -> &WindkesselParams {
        &self.windkessel
    }

    pub fn num_steps(&self) -> usize {
        self.problem.coupling.num_steps()
    }

    /// Record of the current state with the given subiteration log.
    pub fn record(&self, subiterations: Vec<SubiterationRecord>) -> StepRecord {
        let mesh = &self.problem.mesh;
        let coords = &self.state.ale.y_new;
        let fluid = &self.state.fluid;
        let rho = self.problem.fluid.rho;
        let z = self.problem.wall_ops.z.as_slice();
        StepRecord {
            step: self.state.step_index,
            t: self.state.step_index as f64 * self.problem.coupling.dt,
            q_in: flow_rate(mesh, fluid, &self.state.ale, BoundaryTag::Inflow),
            q_out: flow_rate(mesh, fluid, &self.state.ale, BoundaryTag::Outflow),
            p_in_mean: rho * section_mean_pressure(mesh, fluid, coords, BoundaryTag::Inflow),
            p_out_mean: rho * section_mean_pressure(mesh, fluid, coords, BoundaryTag::Outflow),
            max_wall_disp: self.state.wall.max_abs_displacement(),
            probes: self
                .probes
                .iter()
                .map(|&zp| interpolate_linear(z, &self.state.wall.eta, zp))
                .collect(),
            windkessel: self.wk_state,
            p_out: self.p_out,
            subiterations,
        }
    }

    /// Advances one step and updates the Windkessel from the new outflow.
    pub fn step(&mut self) -> Result<StepRecord, SimulationError> {
        let p_applied = self.p_out;
        let (next, history) = match self.mode {
            WallMode::Compliant => self.problem.coupled_step(&self.state, p_applied)?,
            WallMode::Rigid => self.problem.rigid_step(&self.state, p_applied)?,
        };
        self.state = next;
        let q_out = flow_rate(
            &self.problem.mesh,
            &self.state.fluid,
            &self.state.ale,
            BoundaryTag::Outflow,
        );
        let (wk, p_next) = windkessel_step(
            &self.windkessel,
            &self.wk_state,
            q_out,
            self.problem.coupling.dt,
        )?;
        self.wk_state = wk;
        let mut record = self.record(history);
        record.p_out = p_applied;
        self.p_out = p_next;
        Ok(record)
    }

    /// Runs to `t_end`, handing every record (including `t = 0`) to `sink`.
    pub fn run<F>(&mut self, mut sink: F) -> Result<(), SimulationError>
    where
        F: FnMut(&StepRecord),
    {
        sink(&self.record(Vec::new()));
        for _ in 0..self.num_steps() {
            let record = self.step()?;
            sink(&record);
        }
        Ok(())
    }
}

/// Piecewise-linear interpolation of nodal values, clamped to the grid ends.
pub fn interpolate_linear(x: &[f64], values: &[f64], at: f64) -> f64 {
    let last = x.len() - 1;
    if at <= x[0] {
        return values[0];
    }
    if at >= x[last] {
        return values[last];
    }
    let k = x.partition_point(|&xi| xi <= at).clamp(1, last);
    let s = (at - x[k - 1]) / (x[k] - x[k - 1]);
    (1.0 - s) * values[k - 1] + s * values[k]
}
