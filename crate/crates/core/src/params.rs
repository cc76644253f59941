use serde::{Deserialize, Serialize};

use crate::rings::RingSpec;
use crate::{Error, Result};

/// `ν = ε² |log ε|^γ`.
pub fn viscosity_schedule(eps: f64, gamma: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter { name: "epsilon", reason: format!("ε ∉ (0,1): {eps}") });
    }
    if !(gamma >= 0.0) {
        return Err(Error::InvalidParameter { name: "gamma", reason: format!("γ must be non-negative: {gamma}") });
    }
    Ok(eps * eps * eps.ln().abs().powf(gamma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub nu: f64,
    pub t_final: f64,
    /// Fixed time step; chosen from the stability limits when absent.
    pub dt: Option<f64>,
    pub chi: f64,
    pub r_hat: f64,
    pub sample_interval: f64,
    /// Separation constant `D`.
    pub separation: f64,
    /// Exponent of the concentration radius `ϱ = ε exp(|log ε|^η)`.
    pub conc_eta: f64,
    /// Radii for the tail masses `m_t(h)`.
    pub tail_h: Vec<f64>,
    /// `(R, h)` of the mollified tail mass.
    pub mollifier: (f64, f64),
    pub cfl_max: f64,
    /// Upper limit accepted for the sup-bound constant `M`.
    pub m_bound: f64,
    /// Recentre the window on the rings' mean axial position.
    pub recenter: bool,
    /// Include the self-induced velocity (off for pure transport tests).
    pub self_induced: bool,
}

impl SimParams {
    /// Defaults for a run at core size `eps`, with `ν` from the schedule.
    pub fn new(eps: f64, gamma: f64, t_final: f64) -> Result<Self> {
        let nu = viscosity_schedule(eps, gamma)?;
        Ok(Self {
            epsilon: eps,
            gamma,
            nu,
            t_final,
            dt: None,
            chi: 2.5,
            r_hat: 0.2,
            sample_interval: 0.1,
            separation: 0.25,
            conc_eta: 0.8,
            tail_h: vec![2.0 * eps, 4.0 * eps, 0.1],
            mollifier: (4.0 * eps, 2.0 * eps),
            cfl_max: 0.5,
            m_bound: 10.0,
            recenter: true,
            self_induced: true,
        })
    }

    #[inline]
    pub fn log_eps(&self) -> f64 {
        self.epsilon.ln().abs()
    }

    /// Concentration radius `ϱ_ε = ε exp(|log ε|^η)`.
    pub fn conc_radius(&self) -> f64 {
        self.epsilon * self.log_eps().powf(self.conc_eta).exp()
    }

    pub fn validate(&self, specs: &[RingSpec]) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon", format!("ε ∉ (0,1): {}", self.epsilon));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma", format!("γ ∉ (0,1): {}", self.gamma));
        }
        let nu_max = viscosity_schedule(self.epsilon, self.gamma)?;
        if !(self.nu >= 0.0) || self.nu > nu_max * (1.0 + 1e-12) {
            return bad("nu", format!("ν = {} exceeds ε²|log ε|^γ = {nu_max}", self.nu));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return bad("t_final", format!("T must be finite and non-negative: {}", self.t_final));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return bad("dt", format!("dt must be positive: {dt}"));
            }
        }
        if !(self.chi > 2.0) {
            return bad("chi", format!("χ must exceed 2: {}", self.chi));
        }
        if !(self.sample_interval > 0.0) {
            return bad("sample_interval", format!("must be positive: {}", self.sample_interval));
        }
        if !(self.separation > 0.0) {
            return bad("separation", format!("D must be positive: {}", self.separation));
        }
        if !(self.epsilon < self.separation) {
            return bad("separation", format!("ε = {} must be below D = {}", self.epsilon, self.separation));
        }
        if !(self.conc_eta > self.gamma && self.conc_eta < 1.0) {
            return bad("conc_eta", format!("η ∉ (γ,1): {}", self.conc_eta));
        }
        if self.tail_h.iter().any(|h| !(*h >= 0.0)) {
            return bad("tail_h", "tail radii must be non-negative".into());
        }
        let (wr, wh) = self.mollifier;
        if !(wh > 0.0 && wr >= wh) {
            return bad("mollifier", format!("need h > 0 and R ≥ h, got R = {wr}, h = {wh}"));
        }
        if !(self.cfl_max > 0.0 && self.cfl_max <= 0.5) {
            return bad("cfl_max", format!("must lie in (0, 0.5]: {}", self.cfl_max));
        }
        if !(self.r_hat > 0.0) {
            return bad("r_hat", format!("r̂ must be positive: {}", self.r_hat));
        }
        for s in specs {
            if !(self.r_hat < s.center[1] / 4.0) {
                return bad("r_hat", format!("r̂ = {} must be below r₀/4 = {}", self.r_hat, s.center[1] / 4.0));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn schedule_values() {
        assert_relative_eq!(viscosity_schedule(0.01, 0.5).unwrap(), 2.1460e-4, max_relative = 1e-4);
        assert_relative_eq!(viscosity_schedule(0.01, 1e-12).unwrap(), 1e-4, max_relative = 1e-10);
        assert!(viscosity_schedule(1.0, 0.5).is_err());
    }

    #[test]
    fn gamma_out_of_range_names_field() {
        let mut p = SimParams::new(0.1, 0.5, 1.0).unwrap();
        p.gamma = 1.5;
        match p.validate(&[]) {
            Err(Error::InvalidParameter { name, reason }) => {
                assert_eq!(name, "gamma");
                assert!(reason.contains("γ ∉ (0,1)"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn viscosity_above_schedule_rejected() {
        let mut p = SimParams::new(0.1, 0.5, 1.0).unwrap();
        assert!(p.validate(&[]).is_ok());
        p.nu *= 1.01;
        assert!(p.validate(&[]).is_err());
    }
}
