//! Three-element Windkessel (RCR) downstream of the outflow section.
//!
//! Pressures are in dyn/cm², flow rates in cm²/s (per unit depth of the
//! planar channel), resistances in dyn·s/cm⁴ and compliance in cm⁴/dyn.
//!
//! ```text
//! C dP_c/dt = Q − (P_c − P_venous)/R_d,    P_out = P_c + R_p Q
//! ```

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WindkesselError {
    #[error("invalid Windkessel parameter: {0}")]
    InvalidParams(&'static str),
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindkesselParams {
    /// Proximal resistance.
    pub r_p: f64,
    /// Compliance.
    pub c: f64,
    /// Distal resistance.
    pub r_d: f64,
    pub p_venous: f64,
}

impl WindkesselParams {
    pub fn validate(&self) -> Result<(), WindkesselError> {
        if !(self.r_p >= 0.0 && self.r_p.is_finite()) {
            return Err(WindkesselError::InvalidParams("r_p must be non-negative"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(WindkesselError::InvalidParams("c must be positive"));
        }
        if !(self.r_d > 0.0 && self.r_d.is_finite()) {
            return Err(WindkesselError::InvalidParams("r_d must be positive"));
        }
        if !self.p_venous.is_finite() {
            return Err(WindkesselError::InvalidParams("p_venous must be finite"));
        }
        Ok(())
    }

    /// `R_d C`, the relaxation time of the compliance node.
    pub fn time_constant(&self) -> f64 {
        self.r_d * self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindkesselState {
    /// Compliance-node pressure.
    pub p_c: f64,
    pub t: f64,
}

impl WindkesselState {
    pub fn at_rest(params: &WindkesselParams) -> Self {
        Self {
            p_c: params.p_venous,
            t: 0.0,
        }
    }

    /// Outlet pressure seen by the fluid for flow `q`.
    pub fn outlet_pressure(&self, params: &WindkesselParams, q: f64) -> f64 {
        self.p_c + params.r_p * q
    }
}

/// Implicit Euler step under outflow `q`; returns the new state and `P_out`.
pub fn windkessel_step(
    params: &WindkesselParams,
    state: &WindkesselState,
    q: f64,
    dt: f64,
) -> Result<(WindkesselState, f64), WindkesselError> {
    if !(dt > 0.0) {
        return Err(WindkesselError::NonPositiveStep(dt));
    }
    // C (P − P_old)/dt = q − (P − P_v)/R_d
    let k = dt / (params.c * params.r_d);
    let excess = (state.p_c - params.p_venous + dt * q / params.c) / (1.0 + k);
    let p_c = params.p_venous + excess;
    let next = WindkesselState {
        p_c,
        t: state.t + dt,
    };
    Ok((next, next.outlet_pressure(params, q)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> WindkesselParams {
        WindkesselParams {
            r_p: 150.0,
            c: 2e-4,
            r_d: 1500.0,
            p_venous: 100.0,
        }
    }

    #[test]
    fn equilibrium_is_unchanged() {
        let p = params();
        let s = WindkesselState::at_rest(&p);
        let (next, p_out) = windkessel_step(&p, &s, 0.0, 0.01).unwrap();
        assert_eq!(next.p_c, p.p_venous);
        assert_eq!(p_out, p.p_venous);
    }

    #[test]
    fn constant_flow_reaches_fixed_point() {
        let p = params();
        let q = 4.0;
        let mut s = WindkesselState::at_rest(&p);
        let mut p_out = 0.0;
        for _ in 0..2000 {
            (s, p_out) = windkessel_step(&p, &s, q, 0.01).unwrap();
        }
        assert!((s.p_c - (p.p_venous + q * p.r_d)).abs() < 1e-8);
        assert!((p_out - (p.p_venous + q * (p.r_d + p.r_p))).abs() < 1e-8);
    }

    #[test]
    fn free_decay_is_monotone_for_any_step() {
        let p = params();
        for dt in [1e-4, 0.3, 1e3] {
            let mut s = WindkesselState {
                p_c: 5000.0,
                t: 0.0,
            };
            let mut gap = (s.p_c - p.p_venous).abs();
            for _ in 0..50 {
                (s, _) = windkessel_step(&p, &s, 0.0, dt).unwrap();
                let g = (s.p_c - p.p_venous).abs();
                assert!(g <= gap && g.is_finite());
                gap = g;
            }
        }
    }

    #[test]
    fn invalid_inputs() {
        let mut p = params();
        assert!(windkessel_step(&p, &WindkesselState::at_rest(&p), 1.0, 0.0).is_err());
        p.c = 0.0;
        assert!(p.validate().is_err());
        p = params();
        p.r_d = -1.0;
        assert!(p.validate().is_err());
        p = params();
        p.r_p = -1.0;
        assert!(p.validate().is_err());
        assert!(params().validate().is_ok());
    }
}
