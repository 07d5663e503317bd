//! Physical constants of the coupled problem, in CGS units.

use crate::wall::StringParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Fluid density, g/cm³.
    pub rho: f64,
    /// Wall density, g/cm³.
    pub rho_w: f64,
    /// Wall thickness, cm.
    pub h0: f64,
    /// Kinematic viscosity, cm²/s.
    pub nu: f64,
    /// String wave coefficient, cm²/s².
    pub a: f64,
    /// String foundation coefficient, s⁻².
    pub b: f64,
    /// String viscoelastic coefficient, cm²/s.
    pub c: f64,
    /// External pressure, dyn/cm².
    pub p0: f64,
    /// Reference radius, cm.
    pub r0: f64,
    /// Vessel length, cm.
    pub length: f64,
}

impl Default for PhysicalParams {
    /// Blood-like fluid in a short, thick-walled segment.
    ///
    /// `a = G/ρ_w` and `b = E/(ρ_w R₀²(1 − ξ²))` with `E = 3·10⁶ dyn/cm²`,
    /// Poisson ratio `ξ = 0.5` and `G = E/(2(1 + ξ))`.
    fn default() -> Self {
        let (young, poisson, rho_w, r0) = (3.0e6, 0.5, 1.1, 0.5);
        let shear = young / (2.0 * (1.0 + poisson));
        Self {
            rho: 1.0,
            rho_w,
            h0: 0.1,
            nu: 0.035,
            a: shear / rho_w,
            b: young / (rho_w * r0 * r0 * (1.0 - poisson * poisson)),
            c: 20.0,
            p0: 0.0,
            r0,
            length: 1.0,
        }
    }
}

impl PhysicalParams {
    pub fn string_params(&self) -> StringParams {
        StringParams {
            a: self.a,
            b: self.b,
            c: self.c,
            rho_w: self.rho_w,
            h0: self.h0,
        }
    }

    /// External pressure in kinematic units (divided by ρ).
    pub fn p0_kinematic(&self) -> f64 {
        self.p0 / self.rho
    }

    /// Violations of the positivity constraints, as `(field, rule)` pairs.
    pub fn violations(&self) -> Vec<(&'static str, &'static str)> {
        let mut out = Vec::new();
        let positive = [
            ("rho", self.rho),
            ("rho_w", self.rho_w),
            ("h0", self.h0),
            ("nu", self.nu),
            ("a", self.a),
            ("b", self.b),
            ("radius", self.r0),
            ("length", self.length),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                out.push((name, "must be positive"));
            }
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            out.push(("c", "must be non-negative"));
        }
        if !self.p0.is_finite() {
            out.push(("p0", "must be finite"));
        }
        out
    }
}
