//! Grid-following VSC: SRF-PLL, P–f and Q–V outer droops, inner current PI
//! in the PLL frame with filtered voltage feed-forward.

use num_complex::Complex64;

use super::{c, check_finite, clamp_magnitude, DeviceError, Fidelity, SystemBase};

/// Parameters on the converter's own rating unless noted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GflParams {
    pub rating_mva: f64,
    /// PLL PI gains acting on the q-axis voltage (pu freq per pu voltage, and per s)
    pub kp_pll: f64,
    pub ki_pll: f64,
    /// pu power per pu frequency
    pub k_f: f64,
    /// pu reactive power per pu voltage
    pub k_v: f64,
    /// inner current-loop bandwidth, rad/s
    pub omega_c: f64,
    /// voltage feed-forward filter corner, rad/s
    pub omega_ff: f64,
    /// outer-loop lag used by the phasor model, s
    pub tau_pq: f64,
    /// lag of the phasor model's terminal-frequency measurement, s
    pub tau_f: f64,
    /// lag of the voltage magnitude used to turn power into current orders, s
    pub tau_v: f64,
    pub r_f: f64,
    pub x_f: f64,
    pub i_max: f64,
}

impl Default for GflParams {
    fn default() -> Self {
        Self {
            rating_mva: 1100.0,
            kp_pll: 0.5,
            ki_pll: 11.46,
            k_f: 5.0,
            k_v: 2.0,
            omega_c: 2.0 * std::f64::consts::PI * 400.0,
            omega_ff: 2.0 * std::f64::consts::PI * 100.0,
            tau_pq: 0.01,
            tau_f: 0.035,
            tau_v: 0.05,
            r_f: 0.005,
            x_f: 0.15,
            i_max: 1.2,
        }
    }
}

impl GflParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        let pos = [
            ("rating_mva", self.rating_mva),
            ("kp_pll", self.kp_pll),
            ("ki_pll", self.ki_pll),
            ("omega_c", self.omega_c),
            ("omega_ff", self.omega_ff),
            ("tau_pq", self.tau_pq),
            ("tau_f", self.tau_f),
            ("tau_v", self.tau_v),
            ("x_f", self.x_f),
        ];
        for (name, v) in pos {
            if !(v > 0.0) {
                return Err(DeviceError::InvalidParameter { name, reason: "must be > 0".into() });
            }
        }
        if !(self.i_max >= 1.0) {
            return Err(DeviceError::InvalidParameter { name: "i_max", reason: "must be >= 1".into() });
        }
        if !(self.k_f >= 0.0 && self.k_v >= 0.0) {
            return Err(DeviceError::InvalidParameter { name: "k_f", reason: "droops must be >= 0".into() });
        }
        Ok(())
    }

    fn k(&self, base: &SystemBase) -> f64 {
        self.rating_mva / base.s_base_mva
    }

    pub fn z_filter_sys(&self, base: &SystemBase) -> Complex64 {
        c(self.r_f, self.x_f) / self.k(base)
    }

    pub fn i_max_sys(&self, base: &SystemBase) -> f64 {
        self.i_max * self.k(base)
    }

    pub fn k_f_sys(&self, base: &SystemBase) -> f64 {
        self.k_f * self.k(base)
    }

    pub fn k_v_sys(&self, base: &SystemBase) -> f64 {
        self.k_v * self.k(base)
    }

    /// PI gains of the inner loop on the system base
    pub fn current_pi_sys(&self, base: &SystemBase) -> (f64, f64) {
        let z = self.z_filter_sys(base);
        (z.im * self.omega_c / base.omega_b, z.re * self.omega_c)
    }
}

/// EMT states: `theta, x_pll, xi, i, v_ff, v_m`. Phasor states: `theta, p_l, q_l, v_m`,
/// where `theta` is the lagged terminal-voltage angle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GflState {
    pub theta: f64,
    pub x_pll: f64,
    pub xi: Complex64,
    pub i: Complex64,
    pub v_ff: Complex64,
    pub p_l: f64,
    pub q_l: f64,
    pub v_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GflInputs {
    pub v: Complex64,
    /// absorbed-power setpoints and voltage reference, system base
    pub p0: f64,
    pub q0: f64,
    pub v_set: f64,
    /// central-controller correction
    pub dp_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GflOutput {
    pub deriv: GflState,
    /// absorbed current
    pub i: Complex64,
    pub i_inj: Complex64,
    pub p: f64,
    pub q: f64,
    pub omega: f64,
    pub p_ref: f64,
    pub q_ref: f64,
    pub saturated: bool,
    pub lost_lock: bool,
}

/// SRF-PLL frequency and derivatives `(omega_pll, dtheta, dx_pll)`.
pub(crate) fn srf_pll(kp: f64, ki: f64, base: &SystemBase, theta: f64, x_pll: f64, v: Complex64) -> (f64, f64, f64) {
    let v_q = (v * Complex64::from_polar(1.0, -theta)).im;
    let omega = 1.0 + kp * v_q + x_pll;
    (omega, base.omega_b * (omega - 1.0), ki * v_q)
}

fn pll(prm: &GflParams, base: &SystemBase, theta: f64, x_pll: f64, v: Complex64) -> (f64, f64, f64) {
    srf_pll(prm.kp_pll, prm.ki_pll, base, theta, x_pll, v)
}

pub fn gfl_derivatives(
    prm: &GflParams,
    base: &SystemBase,
    s: &GflState,
    inp: &GflInputs,
    mode: Fidelity,
) -> Result<GflOutput, DeviceError> {
    check_finite(
        "grid-following converter",
        &[
            s.theta, s.x_pll, s.xi.re, s.xi.im, s.i.re, s.i.im, s.v_ff.re, s.v_ff.im, s.p_l, s.q_l, s.v_m,
            inp.v.re, inp.v.im, inp.p0, inp.q0, inp.dp_c,
        ],
    )?;
    let vm = inp.v.norm();
    let lost_lock = vm < 0.1;
    let mut d = GflState { v_m: (vm - s.v_m) / prm.tau_v, ..Default::default() };
    let v_m = s.v_m.max(0.1);
    let q_ref = inp.q0 - prm.k_v_sys(base) * (inp.v_set - s.v_m);
    match mode {
        Fidelity::Emt => {
            let (omega, dth, dx) = pll(prm, base, s.theta, s.x_pll, inp.v);
            d.theta = dth;
            d.x_pll = dx;
            // droop acts on the integrator estimate, free of the proportional path
            let p_ref = inp.p0 + inp.dp_c + prm.k_f_sys(base) * s.x_pll;
            let rot = Complex64::from_polar(1.0, -s.theta);
            let (iref_p, saturated) = clamp_magnitude(c(p_ref, -q_ref) / v_m, prm.i_max_sys(base));
            let (kp, ki) = prm.current_pi_sys(base);
            let err = iref_p - s.i * rot;
            let u = (err * kp + s.xi) * rot.conj();
            d.xi = err * ki;
            let zf = prm.z_filter_sys(base);
            let e = s.v_ff - c(0.0, zf.im) * s.i - u;
            d.i = (inp.v - e - zf * s.i) * (base.omega_b / zf.im);
            d.v_ff = (inp.v - s.v_ff) * prm.omega_ff;
            let sp = inp.v * s.i.conj();
            Ok(GflOutput {
                deriv: d,
                i: s.i,
                i_inj: -s.i,
                p: sp.re,
                q: sp.im,
                omega,
                p_ref,
                q_ref,
                saturated,
                lost_lock,
            })
        }
        Fidelity::Phasor => {
            // filtered derivative of the terminal angle
            let lead = (inp.v * Complex64::from_polar(1.0, -s.theta)).arg();
            d.theta = lead / prm.tau_f;
            let omega = 1.0 + d.theta / base.omega_b;
            let p_ref = inp.p0 + inp.dp_c + prm.k_f_sys(base) * (omega - 1.0);
            d.p_l = (p_ref - s.p_l) / prm.tau_pq;
            d.q_l = (q_ref - s.q_l) / prm.tau_pq;
            let dir = if vm < 1e-9 { Complex64::new(1.0, 0.0) } else { inp.v / vm };
            let (i_p, saturated) = clamp_magnitude(c(s.p_l, -s.q_l) / v_m, prm.i_max_sys(base));
            let i = i_p * dir;
            let sp = inp.v * i.conj();
            Ok(GflOutput {
                deriv: d,
                i,
                i_inj: -i,
                p: sp.re,
                q: sp.im,
                omega,
                p_ref,
                q_ref,
                saturated,
                lost_lock,
            })
        }
    }
}

/// Equilibrium state for a converter absorbing `s_abs` at terminal voltage `v`.
pub fn gfl_equilibrium(prm: &GflParams, base: &SystemBase, v: Complex64, s_abs: Complex64) -> GflState {
    let i = (s_abs / v).conj();
    let rot = Complex64::from_polar(1.0, -v.arg());
    GflState {
        theta: v.arg(),
        x_pll: 0.0,
        xi: prm.z_filter_sys(base).re * i * rot,
        i,
        v_ff: v,
        p_l: s_abs.re,
        q_l: s_abs.im,
        v_m: v.norm(),
    }
}
