//! Aggregated wind farm: unity power factor converter whose active current
//! follows the power order with a first-order lag. In EMT mode the current is
//! placed on its own SRF-PLL angle; the phasor model aligns it with the
//! terminal voltage.

use num_complex::Complex64;

use super::gfl::srf_pll;
use super::{check_finite, DeviceError, Fidelity, SystemBase};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindFarmParams {
    pub rating_mva: f64,
    pub tau_w: f64,
    pub kp_pll: f64,
    pub ki_pll: f64,
}

impl Default for WindFarmParams {
    fn default() -> Self {
        Self { rating_mva: 800.0, tau_w: 0.05, kp_pll: 0.08, ki_pll: 2.0 }
    }
}

impl WindFarmParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        for (name, v) in [("rating_mva", self.rating_mva), ("tau_w", self.tau_w), ("kp_pll", self.kp_pll), ("ki_pll", self.ki_pll)] {
            if !(v > 0.0) {
                return Err(DeviceError::InvalidParameter { name, reason: "must be > 0".into() });
            }
        }
        Ok(())
    }
}

/// `theta, x_pll` are only used in EMT mode. `i_d` is the active current.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WindFarmState {
    pub theta: f64,
    pub x_pll: f64,
    pub i_d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindFarmOutput {
    pub deriv: WindFarmState,
    pub i_inj: Complex64,
    pub p: f64,
    pub q: f64,
}

/// Active current for `p_order` (system base) at terminal voltage `v`.
pub fn windfarm_reference(p_order: f64, v: Complex64) -> f64 {
    p_order / v.norm().max(0.1)
}

pub fn windfarm_equilibrium(p_order: f64, v: Complex64) -> WindFarmState {
    WindFarmState { theta: v.arg(), x_pll: 0.0, i_d: windfarm_reference(p_order, v) }
}

pub fn windfarm_derivatives(
    prm: &WindFarmParams,
    base: &SystemBase,
    s: &WindFarmState,
    p_order: f64,
    v: Complex64,
    mode: Fidelity,
) -> Result<WindFarmOutput, DeviceError> {
    check_finite("wind farm", &[s.theta, s.x_pll, s.i_d, p_order, v.re, v.im])?;
    let mut d = WindFarmState { i_d: (windfarm_reference(p_order, v) - s.i_d) / prm.tau_w, ..Default::default() };
    let dir = match mode {
        Fidelity::Emt => {
            let (_, dth, dx) = srf_pll(prm.kp_pll, prm.ki_pll, base, s.theta, s.x_pll, v);
            d.theta = dth;
            d.x_pll = dx;
            Complex64::from_polar(1.0, s.theta)
        }
        Fidelity::Phasor => {
            if v.norm() < 1e-9 {
                Complex64::new(1.0, 0.0)
            } else {
                v / v.norm()
            }
        }
    };
    let i = dir * s.i_d;
    let sp = v * i.conj();
    Ok(WindFarmOutput { deriv: d, i_inj: i, p: sp.re, q: sp.im })
}
