use crate::error::{Error, Result};

/// Which trace object is subtracted in the first bracket of the translational-diffusion operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TraceVariant {
    /// Subtract (δ/3)Q, as written.
    #[default]
    Q,
    /// Subtract (δ/3)M⁽²⁾ = (δ/3)(Q + I/3).
    M2,
}

/// Nondimensional parameters of the coupled Q–velocity system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowParams {
    pub de: f64,
    pub re: f64,
    /// Solvent viscosity fraction γ.
    pub gamma_solvent: f64,
    pub eps: f64,
    pub alpha_ms: f64,
    pub g_const: f64,
    pub gamma_par: f64,
    pub gamma_perp: f64,
    pub trace_variant: TraceVariant,
    /// Limit-study runs tie ε to De.
    pub eps_equals_de: bool,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            de: 1.0,
            re: 1.0,
            gamma_solvent: 0.5,
            eps: 0.01,
            alpha_ms: 7.0,
            g_const: 1.0,
            gamma_par: 0.0,
            gamma_perp: 0.0,
            trace_variant: TraceVariant::Q,
            eps_equals_de: false,
        }
    }
}

impl FlowParams {
    /// γ = 1 is accepted: it decouples the velocity from Q.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        let pos = |x: f64| x.is_finite() && x > 0.0;
        let nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !pos(self.de) {
            return bad("de must be positive");
        }
        if !pos(self.re) {
            return bad("re must be positive");
        }
        if !(self.gamma_solvent > 0.0 && self.gamma_solvent <= 1.0) {
            return bad("gamma_solvent must lie in (0, 1]");
        }
        if !nonneg(self.eps) {
            return bad("eps must be non-negative");
        }
        if !pos(self.alpha_ms) {
            return bad("alpha must be positive");
        }
        if !nonneg(self.g_const) {
            return bad("G must be non-negative");
        }
        if !nonneg(self.gamma_par) || !nonneg(self.gamma_perp) {
            return bad("translational diffusion coefficients must be non-negative");
        }
        if self.eps_equals_de && (self.eps - self.de).abs() > 1e-14 * self.de {
            return bad("eps must equal de when eps_equals_de is set");
        }
        Ok(())
    }

    pub fn with_eps_tied(mut self, de: f64) -> Self {
        self.de = de;
        self.eps = de;
        self.eps_equals_de = true;
        self
    }

    /// (1−γ)/(Re·De), the weight of the Q-energy in the total energy.
    pub fn energy_weight(&self) -> f64 {
        (1.0 - self.gamma_solvent) / (self.re * self.de)
    }

    pub fn has_translational(&self) -> bool {
        self.eps > 0.0 && (self.gamma_par > 0.0 || self.gamma_perp > 0.0)
    }

    /// Homogeneous linearization rate at Q = 0 per unit Deborah time.
    pub fn isotropic_rate(&self) -> f64 {
        (-6.0 + 0.8 * self.alpha_ms) / self.de
    }
}
