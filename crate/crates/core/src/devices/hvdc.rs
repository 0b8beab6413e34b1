//! Point-to-point VSC-HVDC link: DC capacitors at both ends, series R–L line,
//! onshore converter regulating its DC voltage with a PI.

use super::{check_finite, DeviceError, Fidelity};

/// DC quantities in pu of the DC voltage base; power on the system base, so
/// capacitances and inductance are time constants in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HvdcParams {
    pub v_dc_base_kv: f64,
    pub c_off: f64,
    pub c_on: f64,
    pub l: f64,
    pub r: f64,
    pub kp: f64,
    pub ki: f64,
    pub v_min: f64,
}

impl Default for HvdcParams {
    fn default() -> Self {
        Self { v_dc_base_kv: 640.0, c_off: 0.04, c_on: 0.04, l: 0.0005, r: 0.01, kp: 11.2, ki: 800.0, v_min: 0.5 }
    }
}

impl HvdcParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        for (name, v) in [("c_off", self.c_off), ("c_on", self.c_on), ("l_dc", self.l), ("kp_dc", self.kp), ("ki_dc", self.ki)] {
            if !(v > 0.0) {
                return Err(DeviceError::InvalidParameter { name, reason: "must be > 0".into() });
            }
        }
        if !(self.r >= 0.0) {
            return Err(DeviceError::InvalidParameter { name: "r_dc", reason: "must be >= 0".into() });
        }
        Ok(())
    }

    /// Steady state carrying `p_in` from the offshore end with `v_on` = 1.
    pub fn equilibrium(&self, p_in: f64) -> HvdcState {
        let v_off = if self.r == 0.0 { 1.0 } else { 0.5 * (1.0 + (1.0 + 4.0 * self.r * p_in).sqrt()) };
        let i = p_in / v_off;
        HvdcState { v_off, v_on: 1.0, i, xi: i }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HvdcState {
    pub v_off: f64,
    pub v_on: f64,
    /// line current; algebraic in phasor mode
    pub i: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HvdcOutput {
    /// derivative, or the line residual in the `i` slot for phasor mode
    pub deriv: HvdcState,
    pub p_out: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("DC voltage {v:.3} pu below trip threshold")]
pub struct DcUndervoltage {
    pub v: f64,
}

pub fn hvdc_derivatives(prm: &HvdcParams, s: &HvdcState, p_in: f64, mode: Fidelity) -> Result<HvdcOutput, DeviceError> {
    check_finite("HVDC link", &[s.v_off, s.v_on, s.i, s.xi, p_in])?;
    let err = s.v_on - 1.0;
    let p_out = prm.kp * err + s.xi;
    let mut d = HvdcState {
        v_off: (p_in / s.v_off - s.i) / prm.c_off,
        v_on: (s.i - p_out / s.v_on) / prm.c_on,
        i: 0.0,
        xi: prm.ki * err,
    };
    let g = s.v_off - s.v_on - prm.r * s.i;
    d.i = match mode {
        Fidelity::Emt => g / prm.l,
        Fidelity::Phasor => g,
    };
    Ok(HvdcOutput { deriv: d, p_out })
}

/// Undervoltage check applied after every accepted step.
pub fn check_dc_voltage(prm: &HvdcParams, s: &HvdcState) -> Result<(), DcUndervoltage> {
    let v = s.v_off.min(s.v_on);
    if v < prm.v_min {
        Err(DcUndervoltage { v })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(d: &HvdcState) -> f64 {
        [d.v_off, d.v_on, d.i, d.xi].iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }

    #[test]
    fn balanced_steady_state() {
        let prm = HvdcParams::default();
        let s = prm.equilibrium(0.8);
        for mode in [Fidelity::Emt, Fidelity::Phasor] {
            let out = hvdc_derivatives(&prm, &s, 0.8, mode).unwrap();
            assert!(norm(&out.deriv) < 1e-12);
            assert!((0.8 - out.p_out - s.i * s.i * prm.r).abs() < 1e-12);
        }
    }

    #[test]
    fn idle_link_is_constant() {
        let prm = HvdcParams::default();
        let s = prm.equilibrium(0.0);
        let out = hvdc_derivatives(&prm, &s, 0.0, Fidelity::Emt).unwrap();
        assert_eq!(out.p_out, 0.0);
        assert_eq!(norm(&out.deriv), 0.0);
    }

    #[test]
    fn input_step_transient_then_recovers() {
        let prm = HvdcParams::default();
        let mut s = prm.equilibrium(0.6);
        let dt = 1e-6;
        let mut v_max: f64 = 1.0;
        for _ in 0..300_000 {
            let a = hvdc_derivatives(&prm, &s, 0.8, Fidelity::Emt).unwrap().deriv;
            let p = HvdcState {
                v_off: s.v_off + dt * a.v_off,
                v_on: s.v_on + dt * a.v_on,
                i: s.i + dt * a.i,
                xi: s.xi + dt * a.xi,
            };
            let b = hvdc_derivatives(&prm, &p, 0.8, Fidelity::Emt).unwrap().deriv;
            s.v_off += 0.5 * dt * (a.v_off + b.v_off);
            s.v_on += 0.5 * dt * (a.v_on + b.v_on);
            s.i += 0.5 * dt * (a.i + b.i);
            s.xi += 0.5 * dt * (a.xi + b.xi);
            v_max = v_max.max(s.v_on);
        }
        assert!(v_max > 1.001);
        assert!((s.v_on - 1.0).abs() < 1e-6, "{}", s.v_on);
        let target = prm.equilibrium(0.8);
        assert!((s.v_off - target.v_off).abs() < 1e-6);
        assert!(check_dc_voltage(&prm, &s).is_ok());
        assert!(check_dc_voltage(&prm, &HvdcState { v_on: 0.4, ..s }).is_err());
    }
}
