//! Synchronous condenser: one-axis transient model with a first-order AVR.

use num_complex::Complex64;

use super::{c, check_finite, DeviceError, Fidelity, SystemBase};

/// Parameters on the machine rating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScParams {
    pub rating_mva: f64,
    pub h: f64,
    /// damper-winding equivalent, pu power per pu speed
    pub d: f64,
    pub x_d: f64,
    /// transient reactance including the step-up transformer
    pub x_dp: f64,
    pub r_a: f64,
    pub t_d0p: f64,
    pub k_a: f64,
    pub t_a: f64,
    pub e_fd_min: f64,
    pub e_fd_max: f64,
}

impl Default for ScParams {
    fn default() -> Self {
        Self {
            rating_mva: 350.0,
            h: 2.0,
            d: 2.0,
            x_d: 1.8,
            x_dp: 0.3,
            r_a: 0.003,
            t_d0p: 6.0,
            k_a: 200.0,
            t_a: 0.02,
            e_fd_min: -5.0,
            e_fd_max: 5.0,
        }
    }
}

impl ScParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        if !(1.0..=6.0).contains(&self.h) {
            return Err(DeviceError::InvalidParameter { name: "sc_h", reason: "must lie in 1..=6 s".into() });
        }
        if !(self.x_d > self.x_dp && self.x_dp > 0.0 && self.t_d0p > 0.0 && self.t_a > 0.0 && self.k_a > 0.0) {
            return Err(DeviceError::InvalidParameter {
                name: "sc",
                reason: "need x_d > x_dp > 0 and positive time constants".into(),
            });
        }
        if !(self.e_fd_min < self.e_fd_max) {
            return Err(DeviceError::InvalidParameter { name: "e_fd_max", reason: "must exceed e_fd_min".into() });
        }
        Ok(())
    }

    fn k(&self, base: &SystemBase) -> f64 {
        self.rating_mva / base.s_base_mva
    }

    /// stator impedance on the system base
    pub fn z_sys(&self, base: &SystemBase) -> Complex64 {
        c(self.r_a, self.x_dp) / self.k(base)
    }
}

/// `i` is the injected stator current (EMT only).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScState {
    pub delta: f64,
    pub dw: f64,
    pub e_qp: f64,
    pub e_fd: f64,
    pub i: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScOutput {
    pub deriv: ScState,
    pub i_inj: Complex64,
    /// electrical power on the system base (generator convention)
    pub p: f64,
    pub q: f64,
    pub field_limited: bool,
}

pub fn sc_derivatives(
    prm: &ScParams,
    base: &SystemBase,
    s: &ScState,
    v: Complex64,
    v_ref: f64,
    mode: Fidelity,
) -> Result<ScOutput, DeviceError> {
    check_finite("synchronous condenser", &[s.delta, s.dw, s.e_qp, s.e_fd, s.i.re, s.i.im, v.re, v.im, v_ref])?;
    let k = prm.k(base);
    let z = prm.z_sys(base);
    let e = Complex64::from_polar(s.e_qp, s.delta);
    let mut d = ScState::default();
    let i = match mode {
        Fidelity::Emt => {
            d.i = (e - v - z * s.i) * (base.omega_b / z.im);
            s.i
        }
        Fidelity::Phasor => (e - v) / z,
    };
    // machine-base quantities
    let i_m = i / k;
    let p_e = (e * i.conj()).re / k;
    let i_d = (i_m * Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, -s.delta)).re;
    d.delta = base.omega_b * s.dw;
    d.dw = (-p_e - prm.d * s.dw) / (2.0 * prm.h);
    d.e_qp = (s.e_fd - s.e_qp - (prm.x_d - prm.x_dp) * i_d) / prm.t_d0p;
    // clamped target keeps the right-hand side continuous
    let demand = prm.k_a * (v_ref - v.norm());
    let limited = demand > prm.e_fd_max || demand < prm.e_fd_min;
    d.e_fd = (demand.clamp(prm.e_fd_min, prm.e_fd_max) - s.e_fd) / prm.t_a;
    let sp = v * i.conj();
    Ok(ScOutput { deriv: d, i_inj: i, p: sp.re, q: sp.im, field_limited: limited })
}

/// Equilibrium with the machine at speed delivering `q_inj` (system base) at
/// `v`. No mechanical power is available, so the terminal absorbs the stator
/// losses. Returns the state, the AVR reference and the injected power.
pub fn sc_equilibrium(prm: &ScParams, base: &SystemBase, v: Complex64, q_inj: f64) -> (ScState, f64, Complex64) {
    let z = prm.z_sys(base);
    let v2 = v.norm_sqr();
    let mut p = 0.0;
    for _ in 0..50 {
        p = -z.re * (p * p + q_inj * q_inj) / v2;
    }
    let s_inj = Complex64::new(p, q_inj);
    let i = (s_inj / v).conj();
    let e = v + z * i;
    let delta = e.arg();
    let k = prm.k(base);
    let i_d = (i / k * Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, -delta)).re;
    let e_qp = e.norm();
    let e_fd = e_qp + (prm.x_d - prm.x_dp) * i_d;
    let v_ref = v.norm() + e_fd / prm.k_a;
    (ScState { delta, dw: 0.0, e_qp, e_fd, i }, v_ref, s_inj)
}
