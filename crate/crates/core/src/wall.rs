//! P1 finite elements and average-acceleration Newmark stepping for the
//! generalised string model of the radial wall displacement `η(z, t)`:
//!
//! ```text
//! η_tt − a η_zz + b η − c η_tzz = H,   η(0, t) = η(L, t) = 0.
//! ```
//!
//! In matrix form `M η̈ + K_c η̇ + (K_a + b M) η = M H`.

use thiserror::Error;

use crate::numerics::{solve_spd, NumericsError, SolverOptions, SolverReport, SparseMatrix};

const NEWMARK_BETA: f64 = 0.25;
const NEWMARK_GAMMA: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WallError {
    #[error("invalid string parameter: {0}")]
    InvalidParams(String),
    #[error("wall grid needs at least 3 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("wall grid spacing must be positive (segment {0})")]
    DegenerateSpacing(usize),
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("expected {expected} wall values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("wall solve did not converge (residual {:.3e})", .0.final_residual)]
    SolverFailure(SolverReport),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Coefficients of the string model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StringParams {
    /// Wave coefficient, cm²/s².
    pub a: f64,
    /// Elastic foundation coefficient, s⁻².
    pub b: f64,
    /// Viscoelastic coefficient, cm²/s.
    pub c: f64,
    /// Wall density, g/cm³.
    pub rho_w: f64,
    /// Wall thickness, cm.
    pub h0: f64,
}

impl StringParams {
    /// Requires `a > 0`, `b ≥ 0`, `c ≥ 0` and positive wall density and thickness.
    ///
    /// `b = 0` is accepted so the pure wave equation can be exercised; the
    /// scenario configuration insists on `b > 0`.
    pub fn validate(&self) -> Result<(), WallError> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(WallError::InvalidParams(msg.to_string()))
            }
        };
        check(self.a > 0.0 && self.a.is_finite(), "a must be positive")?;
        check(
            self.b >= 0.0 && self.b.is_finite(),
            "b must be non-negative",
        )?;
        check(
            self.c >= 0.0 && self.c.is_finite(),
            "c must be non-negative",
        )?;
        check(self.rho_w > 0.0, "rho_w must be positive")?;
        check(self.h0 > 0.0, "h0 must be positive")
    }
}

/// Wall displacement, velocity and acceleration at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WallState {
    pub eta: Vec<f64>,
    pub eta_dot: Vec<f64>,
    pub eta_ddot: Vec<f64>,
    pub t: f64,
}

impl WallState {
    pub fn zero(n: usize, t: f64) -> Self {
        Self {
            eta: vec![0.0; n],
            eta_dot: vec![0.0; n],
            eta_ddot: vec![0.0; n],
            t,
        }
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn max_abs_displacement(&self) -> f64 {
        self.eta.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Assembled string operators on a 1D wall grid.
///
/// The matrices are unconstrained; the clamped ends are imposed on the
/// effective systems solved by [`StringOperators::newmark_step`] and
/// [`StringOperators::static_response`].
#[derive(Debug, Clone)]
pub struct StringOperators {
    pub z: Vec<f64>,
    pub params: StringParams,
    /// Consistent P1 mass matrix.
    pub mass: SparseMatrix,
    /// `a ∫ η' v'`.
    pub stiffness: SparseMatrix,
    /// `b M`.
    pub foundation: SparseMatrix,
    /// `c ∫ η̇' v'`.
    pub damping: SparseMatrix,
    /// `K_a + b M`.
    elastic: SparseMatrix,
    solver: SolverOptions,
}

pub fn assemble_string_operators(
    z: &[f64],
    params: StringParams,
) -> Result<StringOperators, WallError> {
    StringOperators::new(z, params)
}

impl StringOperators {
    pub fn new(z: &[f64], params: StringParams) -> Result<Self, WallError> {
        params.validate()?;
        let n = z.len();
        if n < 3 {
            return Err(WallError::TooFewNodes(n));
        }
        let mut m = Vec::with_capacity(4 * (n - 1));
        let mut k = Vec::with_capacity(4 * (n - 1));
        for e in 0..n - 1 {
            let h = z[e + 1] - z[e];
            if !(h > 0.0) {
                return Err(WallError::DegenerateSpacing(e));
            }
            for (i, j) in [(e, e), (e, e + 1), (e + 1, e), (e + 1, e + 1)] {
                let same = i == j;
                m.push((i, j, if same { h / 3.0 } else { h / 6.0 }));
                k.push((i, j, if same { 1.0 / h } else { -1.0 / h }));
            }
        }
        let mass = SparseMatrix::assemble(n, n, &m)?;
        let laplace = SparseMatrix::assemble(n, n, &k)?;
        let zero = SparseMatrix::assemble(n, n, &[])?;
        let stiffness = laplace.linear_combination(params.a, &zero, 0.0);
        let foundation = mass.linear_combination(params.b, &zero, 0.0);
        let damping = laplace.linear_combination(params.c, &zero, 0.0);
        let elastic = stiffness.linear_combination(1.0, &foundation, 1.0);
        Ok(Self {
            z: z.to_vec(),
            params,
            mass,
            stiffness,
            foundation,
            damping,
            elastic,
            solver: SolverOptions::with_tol(1e-14),
        })
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Clamped end nodes.
    pub fn fixed_nodes(&self) -> [usize; 2] {
        [0, self.z.len() - 1]
    }

    /// `K_a + b M`.
    pub fn elastic(&self) -> &SparseMatrix {
        &self.elastic
    }

    fn check_len(&self, v: &[f64]) -> Result<(), WallError> {
        if v.len() != self.len() {
            return Err(WallError::LengthMismatch {
                expected: self.len(),
                actual: v.len(),
            });
        }
        Ok(())
    }

    fn solve_clamped(
        &self,
        matrix: &SparseMatrix,
        mut rhs: Vec<f64>,
    ) -> Result<Vec<f64>, WallError> {
        let fixed = self.fixed_nodes();
        let constrained = matrix.constrain_symmetric(&fixed);
        for i in fixed {
            rhs[i] = 0.0;
        }
        let (x, report) = solve_spd(&constrained, &rhs, &self.solver)?;
        if !report.converged {
            return Err(WallError::SolverFailure(report));
        }
        Ok(x)
    }

    /// State with the given displacement and velocity and the acceleration
    /// that satisfies the equation of motion under forcing `h`.
    pub fn initial_state(
        &self,
        eta: Vec<f64>,
        eta_dot: Vec<f64>,
        h: &[f64],
        t: f64,
    ) -> Result<WallState, WallError> {
        self.check_len(&eta)?;
        self.check_len(&eta_dot)?;
        self.check_len(h)?;
        let mh = self.mass.matvec(h);
        let ku = self.elastic.matvec(&eta);
        let cv = self.damping.matvec(&eta_dot);
        let rhs: Vec<f64> = (0..self.len()).map(|i| mh[i] - ku[i] - cv[i]).collect();
        let eta_ddot = self.solve_clamped(&self.mass, rhs)?;
        Ok(WallState {
            eta,
            eta_dot,
            eta_ddot,
            t,
        })
    }

    /// One average-acceleration Newmark step (β = 1/4, γ = 1/2) under the
    /// forcing `h` evaluated at the new time level.
    pub fn newmark_step(
        &self,
        state: &WallState,
        h: &[f64],
        dt: f64,
    ) -> Result<WallState, WallError> {
        if !(dt > 0.0) {
            return Err(WallError::NonPositiveStep(dt));
        }
        self.check_len(h)?;
        self.check_len(&state.eta)?;
        let n = self.len();
        let (beta, gamma) = (NEWMARK_BETA, NEWMARK_GAMMA);

        let eta_pred: Vec<f64> = (0..n)
            .map(|i| {
                state.eta[i] + dt * state.eta_dot[i] + (0.5 - beta) * dt * dt * state.eta_ddot[i]
            })
            .collect();
        let vel_pred: Vec<f64> = (0..n)
            .map(|i| state.eta_dot[i] + (1.0 - gamma) * dt * state.eta_ddot[i])
            .collect();

        let effective = self
            .mass
            .linear_combination(1.0, &self.damping, gamma * dt)
            .linear_combination(1.0, &self.elastic, beta * dt * dt);
        let mh = self.mass.matvec(h);
        let ku = self.elastic.matvec(&eta_pred);
        let cv = self.damping.matvec(&vel_pred);
        let rhs: Vec<f64> = (0..n).map(|i| mh[i] - ku[i] - cv[i]).collect();
        let eta_ddot = self.solve_clamped(&effective, rhs)?;

        let mut eta: Vec<f64> = (0..n)
            .map(|i| eta_pred[i] + beta * dt * dt * eta_ddot[i])
            .collect();
        let mut eta_dot: Vec<f64> = (0..n)
            .map(|i| vel_pred[i] + gamma * dt * eta_ddot[i])
            .collect();
        for i in self.fixed_nodes() {
            eta[i] = 0.0;
            eta_dot[i] = 0.0;
        }
        Ok(WallState {
            eta,
            eta_dot,
            eta_ddot,
            t: state.t + dt,
        })
    }

    /// Steady displacement under time-independent forcing:
    /// `(K_a + b M) η = M H` with clamped ends.
    pub fn static_response(&self, h: &[f64]) -> Result<Vec<f64>, WallError> {
        self.check_len(h)?;
        self.solve_clamped(&self.elastic, self.mass.matvec(h))
    }

    /// `½ (η̇ᵀ M η̇ + ηᵀ (K_a + b M) η)`.
    pub fn energy(&self, state: &WallState) -> f64 {
        0.5 * (self.mass.quadratic_form(&state.eta_dot) + self.elastic.quadratic_form(&state.eta))
    }

    /// Mass-weighted discrete L² norm on the wall.
    pub fn l2_norm(&self, v: &[f64]) -> f64 {
        self.mass.quadratic_form(v).max(0.0).sqrt()
    }
}

pub fn newmark_step(
    ops: &StringOperators,
    state: &WallState,
    h: &[f64],
    dt: f64,
) -> Result<WallState, WallError> {
    ops.newmark_step(state, h, dt)
}

pub fn wall_energy(ops: &StringOperators, state: &WallState) -> f64 {
    ops.energy(state)
}

/// Uniform grid of `n` nodes on `[0, length]`.
pub fn uniform_grid(length: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                length
            } else {
                i as f64 * length / (n - 1) as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64, c: f64) -> StringParams {
        StringParams {
            a,
            b,
            c,
            rho_w: 1.1,
            h0: 0.1,
        }
    }

    #[test]
    fn three_node_stiffness_diagonal() {
        let a = 3.5;
        let ops = StringOperators::new(&uniform_grid(2.0, 3), params(a, 1.0, 0.0)).unwrap();
        let h = 1.0;
        assert!((ops.stiffness.get(1, 1) - 2.0 * a / h).abs() < 1e-14);
        assert!((ops.stiffness.get(0, 1) + a / h).abs() < 1e-14);
        assert_eq!(ops.damping.nnz(), ops.stiffness.nnz());
    }

    #[test]
    fn mass_rows_sum_to_element_weights() {
        let z = [0.0, 0.3, 0.5, 1.2, 1.25];
        let ops = StringOperators::new(&z, params(1.0, 1.0, 0.0)).unwrap();
        let ones = vec![1.0; z.len()];
        let sums = ops.mass.matvec(&ones);
        for i in 0..z.len() {
            let left = if i > 0 { z[i] - z[i - 1] } else { 0.0 };
            let right = if i + 1 < z.len() {
                z[i + 1] - z[i]
            } else {
                0.0
            };
            assert!((sums[i] - 0.5 * (left + right)).abs() < 1e-15);
        }
    }

    #[test]
    fn contract_violations_rejected() {
        let z = uniform_grid(1.0, 4);
        assert!(matches!(
            StringOperators::new(&z, params(0.0, 1.0, 0.0)),
            Err(WallError::InvalidParams(_))
        ));
        assert!(StringOperators::new(&z, params(1.0, -1.0, 0.0)).is_err());
        assert!(StringOperators::new(&z, params(1.0, 1.0, -0.1)).is_err());
        assert!(matches!(
            StringOperators::new(&[0.0, 1.0], params(1.0, 1.0, 0.0)),
            Err(WallError::TooFewNodes(2))
        ));
        assert!(matches!(
            StringOperators::new(&[0.0, 0.5, 0.5, 1.0], params(1.0, 1.0, 0.0)),
            Err(WallError::DegenerateSpacing(1))
        ));
    }

    #[test]
    fn zero_forcing_keeps_zero_state() {
        let ops = StringOperators::new(&uniform_grid(1.0, 9), params(4.0, 2.0, 0.3)).unwrap();
        let mut s = WallState::zero(9, 0.0);
        let h = vec![0.0; 9];
        for _ in 0..20 {
            s = ops.newmark_step(&s, &h, 0.01).unwrap();
        }
        assert!(s
            .eta
            .iter()
            .chain(&s.eta_dot)
            .chain(&s.eta_ddot)
            .all(|&v| v == 0.0));
        assert!((s.t - 0.2).abs() < 1e-12);
    }

    #[test]
    fn ends_stay_clamped_and_energy_non_negative() {
        let n = 17;
        let ops = StringOperators::new(&uniform_grid(2.0, n), params(2.0, 5.0, 0.1)).unwrap();
        let mut s = WallState::zero(n, 0.0);
        let h: Vec<f64> = ops.z.iter().map(|z| 10.0 * (3.0 * z).sin()).collect();
        for _ in 0..50 {
            s = ops.newmark_step(&s, &h, 0.05).unwrap();
            assert_eq!(s.eta[0], 0.0);
            assert_eq!(s.eta[n - 1], 0.0);
            assert!(ops.energy(&s) >= 0.0);
        }
    }

    #[test]
    fn newmark_identities_hold() {
        let n = 9;
        let dt = 0.02;
        let ops = StringOperators::new(&uniform_grid(1.0, n), params(1.0, 3.0, 0.2)).unwrap();
        let h: Vec<f64> = ops.z.iter().map(|z| z * (1.0 - z)).collect();
        let s0 = ops
            .initial_state(vec![0.0; n], vec![0.0; n], &h, 0.0)
            .unwrap();
        let s1 = ops.newmark_step(&s0, &h, dt).unwrap();
        for i in 1..n - 1 {
            let disp =
                s0.eta[i] + dt * s0.eta_dot[i] + 0.25 * dt * dt * (s0.eta_ddot[i] + s1.eta_ddot[i]);
            let vel = s0.eta_dot[i] + 0.5 * dt * (s0.eta_ddot[i] + s1.eta_ddot[i]);
            assert!((disp - s1.eta[i]).abs() < 1e-15);
            assert!((vel - s1.eta_dot[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn energy_of_zero_state_is_zero() {
        let ops = StringOperators::new(&uniform_grid(1.0, 5), params(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(ops.energy(&WallState::zero(5, 0.0)), 0.0);
    }

    #[test]
    fn l2_norm_of_constant() {
        let ops = StringOperators::new(&uniform_grid(2.5, 11), params(1.0, 1.0, 0.0)).unwrap();
        let d = 0.3;
        assert!((ops.l2_norm(&[d; 11]) - d * 2.5f64.sqrt()).abs() < 1e-14);
    }
}
