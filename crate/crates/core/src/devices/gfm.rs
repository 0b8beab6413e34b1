//! Grid-forming VSC: power–frequency droop, voltage setpoint, transient
//! virtual impedance and an L filter towards the hub.

use num_complex::Complex64;

use super::{c, check_finite, clamp_magnitude, DeviceError, Fidelity, SystemBase};

/// Parameters on the converter's own rating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfmParams {
    pub rating_mva: f64,
    /// pu frequency per pu power
    pub m_p: f64,
    pub tau_p: f64,
    pub r_v: f64,
    pub x_v: f64,
    /// virtual-impedance high-pass corner, rad/s
    pub omega_hp: f64,
    /// filter + transformer series impedance
    pub r_f: f64,
    pub x_f: f64,
    /// filter capacitor susceptance (placed at the hub bus)
    pub b_f: f64,
    pub i_max: f64,
    /// optional Q–V droop on the voltage magnitude command, 0 = off
    pub k_q: f64,
}

impl Default for GfmParams {
    fn default() -> Self {
        Self {
            rating_mva: 1100.0,
            m_p: 0.005,
            tau_p: 0.02,
            r_v: 0.05,
            x_v: 0.1,
            omega_hp: 50.0,
            r_f: 0.005,
            x_f: 0.15,
            b_f: 0.0,
            i_max: 1.2,
            k_q: 0.0,
        }
    }
}

impl GfmParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        let bad = |name, reason: &str| Err(DeviceError::InvalidParameter { name, reason: reason.into() });
        if !(self.m_p > 0.0) {
            return bad("droop_mp", "must be > 0");
        }
        if !(self.i_max >= 1.0) {
            return bad("i_max", "must be >= 1");
        }
        if !(self.tau_p > 0.0 && self.x_f > 0.0 && self.rating_mva > 0.0 && self.omega_hp > 0.0) {
            return bad("gfm", "tau_p, x_f, rating and omega_hp must be > 0");
        }
        Ok(())
    }

    /// ratio device rating / system base
    fn k(&self, base: &SystemBase) -> f64 {
        self.rating_mva / base.s_base_mva
    }

    pub fn z_filter_sys(&self, base: &SystemBase) -> Complex64 {
        c(self.r_f, self.x_f) / self.k(base)
    }

    pub fn z_virtual_sys(&self, base: &SystemBase) -> Complex64 {
        c(self.r_v, self.x_v) / self.k(base)
    }

    pub fn i_max_sys(&self, base: &SystemBase) -> f64 {
        self.i_max * self.k(base)
    }

    pub fn m_p_sys(&self, base: &SystemBase) -> f64 {
        self.m_p / self.k(base)
    }
}

/// Dynamic state. `i_lp` and `i` are used in EMT mode only.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GfmState {
    pub delta: f64,
    pub p_filt: f64,
    pub q_filt: f64,
    pub i_lp: Complex64,
    pub i: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfmInputs {
    pub v: Complex64,
    pub p_ref: f64,
    pub q_ref: f64,
    pub v_set: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfmOutput {
    pub deriv: GfmState,
    /// converter internal voltage command
    pub e: Complex64,
    /// absorbed current
    pub i: Complex64,
    pub i_inj: Complex64,
    pub p: f64,
    pub q: f64,
    pub omega: f64,
    pub saturated: bool,
}

pub fn gfm_derivatives(
    prm: &GfmParams,
    base: &SystemBase,
    s: &GfmState,
    inp: &GfmInputs,
    mode: Fidelity,
) -> Result<GfmOutput, DeviceError> {
    check_finite(
        "grid-forming converter",
        &[s.delta, s.p_filt, s.i.re, s.i.im, s.i_lp.re, s.i_lp.im, inp.v.re, inp.v.im, inp.p_ref],
    )?;
    let zf = prm.z_filter_sys(base);
    let omega = 1.0 + prm.m_p_sys(base) * (s.p_filt - inp.p_ref);
    let mag = inp.v_set + prm.k_q * (s.q_filt - inp.q_ref);
    let mut e = Complex64::from_polar(mag, s.delta);
    if mode == Fidelity::Emt {
        e += prm.z_virtual_sys(base) * (s.i - s.i_lp);
    }
    let (i_cmd, saturated) = clamp_magnitude((inp.v - e) / zf, prm.i_max_sys(base));
    if saturated {
        e = inp.v - zf * i_cmd;
    }
    let mut d = GfmState::default();
    let i = match mode {
        Fidelity::Emt => {
            d.i = (inp.v - e - zf * s.i) * (base.omega_b / zf.im);
            d.i_lp = (s.i - s.i_lp) * prm.omega_hp;
            s.i
        }
        Fidelity::Phasor => i_cmd,
    };
    let sp = inp.v * i.conj();
    d.p_filt = (sp.re - s.p_filt) / prm.tau_p;
    d.q_filt = (sp.im - s.q_filt) / prm.tau_p;
    d.delta = base.omega_b * (omega - 1.0);
    Ok(GfmOutput { deriv: d, e, i, i_inj: -i, p: sp.re, q: sp.im, omega, saturated })
}

/// Equilibrium for a converter absorbing `s_abs` at `v`. Returns the state
/// and `v_set`; the matching `p_ref`, `q_ref` are `s_abs`.
pub fn gfm_equilibrium(prm: &GfmParams, base: &SystemBase, v: Complex64, s_abs: Complex64) -> (GfmState, f64) {
    let i = (s_abs / v).conj();
    let e = v - prm.z_filter_sys(base) * i;
    (GfmState { delta: e.arg(), p_filt: s_abs.re, q_filt: s_abs.im, i_lp: i, i }, e.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SystemBase {
        SystemBase::default()
    }

    fn equilibrium(mode: Fidelity) -> (GfmParams, GfmState, GfmInputs) {
        let p = GfmParams { k_q: 0.05, ..Default::default() };
        let v = Complex64::from_polar(1.0, 0.1);
        let (mut s, v_set) = gfm_equilibrium(&p, &base(), v, Complex64::new(0.8, 0.05));
        if mode == Fidelity::Phasor {
            s.i = Complex64::default();
        }
        (p, s, GfmInputs { v, p_ref: 0.8, q_ref: 0.05, v_set })
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        for mode in [Fidelity::Emt, Fidelity::Phasor] {
            let (p, s, inp) = equilibrium(mode);
            let out = gfm_derivatives(&p, &base(), &s, &inp, mode).unwrap();
            let d = out.deriv;
            let norm = [d.delta, d.p_filt, d.q_filt, d.i.re, d.i.im, d.i_lp.re, d.i_lp.im]
                .iter()
                .fold(0.0f64, |a, x| a.max(x.abs()));
            assert!(norm < 1e-8, "{mode:?}: {norm}");
            assert!((out.p - 0.8).abs() < 1e-12);
        }
    }

    #[test]
    fn droop_algebra_on_isolated_converter() {
        // unloaded converter: P stays 0; a +0.2 pu generation order is an
        // absorbed-power order of -0.2, so ω rises by m_p · 0.2
        let p = GfmParams { m_p: 0.01, rating_mva: 1000.0, ..Default::default() };
        let s = GfmState::default();
        let inp = GfmInputs { v: Complex64::new(1.0, 0.0), p_ref: -0.2, q_ref: 0.0, v_set: 1.0 };
        let out = gfm_derivatives(&p, &base(), &s, &inp, Fidelity::Phasor).unwrap();
        assert!((out.omega - 1.002).abs() < 1e-15);
    }

    #[test]
    fn current_clamp_boundary() {
        let p = GfmParams { rating_mva: 1000.0, i_max: 1.2, r_f: 0.0, x_f: 0.1, ..Default::default() };
        // 1.5 pu demanded: (v - e)/z = 0.15/0.1
        let s = GfmState { delta: 0.0, ..Default::default() };
        let inp = GfmInputs { v: Complex64::new(1.0, 0.15), p_ref: 0.0, q_ref: 0.0, v_set: 1.0 };
        let out = gfm_derivatives(&p, &base(), &s, &inp, Fidelity::Phasor).unwrap();
        assert!(out.saturated);
        assert!((out.i.norm() - 1.2).abs() < 1e-12);
    }

    #[test]
    fn nan_is_fatal() {
        let (p, mut s, inp) = equilibrium(Fidelity::Emt);
        s.delta = f64::NAN;
        assert!(gfm_derivatives(&p, &base(), &s, &inp, Fidelity::Emt).is_err());
    }

    #[test]
    fn validation() {
        assert!(GfmParams { m_p: -0.01, ..Default::default() }.validate().is_err());
        assert!(GfmParams { i_max: 0.9, ..Default::default() }.validate().is_err());
        assert!(GfmParams::default().validate().is_ok());
    }
}
