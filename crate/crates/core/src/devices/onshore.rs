//! Onshore grid equivalent: aggregated inertia with a lagged governor.

use super::{check_finite, DeviceError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnshoreParams {
    pub s_base_mva: f64,
    pub h: f64,
    pub r: f64,
    pub t_g: f64,
}

impl Default for OnshoreParams {
    fn default() -> Self {
        Self { s_base_mva: 20_000.0, h: 5.0, r: 0.05, t_g: 5.0 }
    }
}

impl OnshoreParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        for (name, v) in [("onshore_base", self.s_base_mva), ("h_on", self.h), ("r_on", self.r), ("t_g", self.t_g)] {
            if !(v > 0.0) {
                return Err(DeviceError::InvalidParameter { name, reason: "must be > 0".into() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OnshoreState {
    pub dw: f64,
    pub p_gov: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnshoreOutput {
    pub deriv: OnshoreState,
    pub df_hz: f64,
}

/// `dp` is the loss of delivered power on the equivalent's own base.
pub fn onshore_derivatives(prm: &OnshoreParams, s: &OnshoreState, dp: f64, f_base_hz: f64) -> Result<OnshoreOutput, DeviceError> {
    check_finite("onshore equivalent", &[s.dw, s.p_gov, dp])?;
    let deriv = OnshoreState { dw: (s.p_gov - dp) / (2.0 * prm.h), p_gov: (-s.dw / prm.r - s.p_gov) / prm.t_g };
    Ok(OnshoreOutput { deriv, df_hz: s.dw * f_base_hz })
}
