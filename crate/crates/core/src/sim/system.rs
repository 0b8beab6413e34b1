//! The offshore hub as one DAE: network (dynamic phasors or algebraic), wind
//! farms, offshore converters with their HVDC links and onshore equivalents,
//! optional condensers and the central frequency controller.

use std::collections::HashMap;

use num_complex::Complex64;

use super::{Dynamics, Event, EventKind, SimError};
use crate::devices::{
    check_dc_voltage, gfl_derivatives, gfl_equilibrium, gfm_derivatives, gfm_equilibrium, hvdc_derivatives,
    onshore_derivatives, sc_derivatives, sc_equilibrium, windfarm_derivatives, windfarm_equilibrium, CentralFreqController, Fidelity,
    GflInputs, GflParams, GflState, GfmInputs, GfmParams, GfmState, HvdcParams, HvdcState, OnshoreParams,
    OnshoreState, ScParams, ScState, SystemBase, WindFarmParams, WindFarmState,
};
use crate::grid::{power_flow, BusSetpoint, DeviceKind, HubLayout, Network, PerUnitBase, HUB_BUS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InertiaConfig {
    /// grid-forming offshore converters only
    Zero,
    /// synchronous condensers with grid-following converters
    Low,
}

impl InertiaConfig {
    pub fn name(self) -> &'static str {
        match self {
            InertiaConfig::Zero => "zero",
            InertiaConfig::Low => "low",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub base: PerUnitBase,
    pub layout: HubLayout,
    pub inertia: InertiaConfig,
    /// condensers used by the low-inertia configuration
    pub condensers: usize,
    /// active-power order per wind farm, MW
    pub wind_power_mw: Vec<f64>,
    pub hub_voltage: f64,
    pub gfm: GfmParams,
    pub gfl: GflParams,
    pub sc: ScParams,
    pub hvdc: HvdcParams,
    pub onshore: OnshoreParams,
    pub wind: WindFarmParams,
    /// central controller gain, pu power per pu speed per second (system base)
    pub k_c: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let layout = HubLayout::default();
        let farms = layout.farm_distances_km.len();
        Self {
            base: PerUnitBase::default(),
            layout,
            inertia: InertiaConfig::Zero,
            condensers: 2,
            wind_power_mw: vec![800.0; farms],
            hub_voltage: 1.0,
            gfm: GfmParams::default(),
            gfl: GflParams::default(),
            sc: ScParams::default(),
            hvdc: HvdcParams::default(),
            onshore: OnshoreParams::default(),
            wind: WindFarmParams::default(),
            k_c: 30.0,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.gfm.validate()?;
        self.gfl.validate()?;
        self.wind.validate()?;
        self.sc.validate()?;
        self.hvdc.validate()?;
        self.onshore.validate()?;
        if self.wind_power_mw.len() != self.layout.farm_distances_km.len() {
            return Err(SimError::Config(format!(
                "{} wind orders for {} farms",
                self.wind_power_mw.len(),
                self.layout.farm_distances_km.len()
            )));
        }
        if self.layout.converters == 0 {
            return Err(SimError::Config("at least one converter is required".into()));
        }
        if self.inertia == InertiaConfig::Low && self.condensers == 0 {
            return Err(SimError::Config("low-inertia configuration needs condensers".into()));
        }
        if !(self.k_c >= 0.0) {
            return Err(SimError::Config("k_c must be >= 0".into()));
        }
        Ok(())
    }

    pub fn system_base(&self) -> SystemBase {
        SystemBase { s_base_mva: self.base.s_base_mva, omega_b: self.base.omega_base(), f_base_hz: self.base.f_base_hz }
    }
}

/// How a state transforms under a uniform phase rotation of the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Angle,
    Re,
    Im,
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ctrl {
    Gfm,
    Gfl,
}

#[derive(Debug, Clone)]
struct Conv {
    name: String,
    bus: usize,
    off: usize,
    ctrl: Ctrl,
    p_ref: f64,
    q_ref: f64,
    v_set: f64,
    on: bool,
}

#[derive(Debug, Clone)]
struct Sc {
    name: String,
    bus: usize,
    off: usize,
    v_ref: f64,
    on: bool,
}

#[derive(Debug, Clone)]
struct Wf {
    name: String,
    bus: usize,
    off: usize,
    p_order: f64,
    on: bool,
}

#[derive(Debug, Clone)]
struct Link {
    off: usize,
    on_off: usize,
    p_out0: f64,
}

/// Quantities derived from a state vector, one entry per device.
#[derive(Debug, Clone, Default)]
pub struct Observables {
    pub v: Vec<Complex64>,
    pub conv_p: Vec<f64>,
    pub conv_q: Vec<f64>,
    /// current magnitude on the converter rating
    pub conv_i: Vec<f64>,
    pub conv_omega: Vec<f64>,
    pub conv_sat: Vec<bool>,
    pub sc_dw: Vec<f64>,
    pub sc_p: Vec<f64>,
    pub sc_q: Vec<f64>,
    pub wf_p: Vec<f64>,
    pub vdc_off: Vec<f64>,
    pub vdc_on: Vec<f64>,
    pub p_on: Vec<f64>,
    pub df_on_hz: Vec<f64>,
    pub f_offshore_hz: f64,
}

#[derive(Debug, Clone)]
pub struct SimSystem {
    pub cfg: SystemConfig,
    pub mode: Fidelity,
    pub sb: SystemBase,
    pub net: Network,
    names: Vec<String>,
    kinds: Vec<StateKind>,
    alg: Vec<bool>,
    active: Vec<bool>,
    held: Vec<f64>,
    index: HashMap<String, usize>,
    bus_b: Vec<f64>,
    bus_on: Vec<bool>,
    branch_on: Vec<bool>,
    trafo_on: Vec<bool>,
    br_off: usize,
    tr_off: usize,
    convs: Vec<Conv>,
    scs: Vec<Sc>,
    wfs: Vec<Wf>,
    links: Vec<Link>,
    central: Option<(CentralFreqController, usize)>,
}

struct Layout {
    names: Vec<String>,
    kinds: Vec<StateKind>,
    alg: Vec<bool>,
}

impl Layout {
    fn push(&mut self, name: String, kind: StateKind, alg: bool) -> usize {
        self.names.push(name);
        self.kinds.push(kind);
        self.alg.push(alg);
        self.names.len() - 1
    }

    fn complex(&mut self, name: &str, alg: bool) -> usize {
        let k = self.push(format!("{name}.re"), StateKind::Re, alg);
        self.push(format!("{name}.im"), StateKind::Im, alg);
        k
    }
}

#[inline]
fn cx(x: &[f64], k: usize) -> Complex64 {
    Complex64::new(x[k], x[k + 1])
}

#[inline]
fn put(f: &mut [f64], k: usize, v: Complex64) {
    f[k] = v.re;
    f[k + 1] = v.im;
}

impl SimSystem {
    fn get_wf(&self, x: &[f64], o: usize) -> WindFarmState {
        match self.mode {
            Fidelity::Emt => WindFarmState { theta: x[o], x_pll: x[o + 1], i_d: x[o + 2] },
            Fidelity::Phasor => WindFarmState { i_d: x[o], ..Default::default() },
        }
    }

    fn put_wf(&self, f: &mut [f64], o: usize, s: &WindFarmState) {
        match self.mode {
            Fidelity::Emt => {
                f[o] = s.theta;
                f[o + 1] = s.x_pll;
                f[o + 2] = s.i_d;
            }
            Fidelity::Phasor => f[o] = s.i_d,
        }
    }

    /// Builds the system, solves the power flow and initializes every device
    /// at equilibrium. Returns the system and its initial state.
    pub fn build(cfg: SystemConfig, mode: Fidelity) -> Result<(Self, Vec<f64>), SimError> {
        cfg.validate()?;
        let sb = cfg.system_base();
        let mut layout = cfg.layout.clone();
        layout.condensers = match cfg.inertia {
            InertiaConfig::Zero => 0,
            InertiaConfig::Low => cfg.condensers,
        };
        if cfg.inertia == InertiaConfig::Zero {
            layout.hub_filter_b = cfg.gfm.b_f * cfg.gfm.rating_mva / sb.s_base_mva;
        }
        let net = Network::hub_and_spoke(cfg.base.clone(), &layout)?;
        let emt = mode == Fidelity::Emt;
        let nb = net.bus_count();

        let mut bus_b: Vec<f64> = net.buses.iter().map(|b| b.shunt_b).collect();
        for br in &net.branches {
            bus_b[br.from_bus] += br.b_half;
            bus_b[br.to_bus] += br.b_half;
        }
        if emt {
            if let Some(b) = bus_b.iter().position(|b| !(*b > 0.0)) {
                return Err(SimError::Config(format!("bus {} has no shunt capacitance for the EMT model", net.buses[b].name)));
            }
        }

        let mut lay = Layout { names: vec![], kinds: vec![], alg: vec![] };
        for b in &net.buses {
            lay.complex(&format!("{}.v", b.name), !emt);
        }
        let br_off = lay.names.len();
        if emt {
            for k in 0..net.branches.len() {
                lay.complex(&format!("branch{k}.i"), false);
            }
        }
        let tr_off = lay.names.len();
        if emt {
            for k in 0..net.transformers.len() {
                lay.complex(&format!("trafo{k}.i"), false);
            }
        }

        let mut convs = vec![];
        let mut scs = vec![];
        let mut wfs = vec![];
        let mut links = vec![];
        let ctrl = match cfg.inertia {
            InertiaConfig::Zero => Ctrl::Gfm,
            InertiaConfig::Low => Ctrl::Gfl,
        };
        let mut farm_k = 0;
        for a in &net.attachments {
            let n = &a.name;
            match a.kind {
                DeviceKind::Converter => {
                    let off = match (ctrl, emt) {
                        (Ctrl::Gfm, true) => {
                            let k = lay.push(format!("{n}.delta"), StateKind::Angle, false);
                            lay.push(format!("{n}.p_filt"), StateKind::Scalar, false);
                            lay.push(format!("{n}.q_filt"), StateKind::Scalar, false);
                            lay.complex(&format!("{n}.i_lp"), false);
                            lay.complex(&format!("{n}.i"), false);
                            k
                        }
                        (Ctrl::Gfm, false) => {
                            let k = lay.push(format!("{n}.delta"), StateKind::Angle, false);
                            lay.push(format!("{n}.p_filt"), StateKind::Scalar, false);
                            lay.push(format!("{n}.q_filt"), StateKind::Scalar, false);
                            k
                        }
                        (Ctrl::Gfl, true) => {
                            let k = lay.push(format!("{n}.theta"), StateKind::Angle, false);
                            lay.push(format!("{n}.x_pll"), StateKind::Scalar, false);
                            lay.push(format!("{n}.xi.d"), StateKind::Scalar, false);
                            lay.push(format!("{n}.xi.q"), StateKind::Scalar, false);
                            lay.complex(&format!("{n}.i"), false);
                            lay.complex(&format!("{n}.v_ff"), false);
                            lay.push(format!("{n}.v_m"), StateKind::Scalar, false);
                            k
                        }
                        (Ctrl::Gfl, false) => {
                            let k = lay.push(format!("{n}.theta"), StateKind::Angle, false);
                            lay.push(format!("{n}.p_l"), StateKind::Scalar, false);
                            lay.push(format!("{n}.q_l"), StateKind::Scalar, false);
                            lay.push(format!("{n}.v_m"), StateKind::Scalar, false);
                            k
                        }
                    };
                    convs.push(Conv { name: n.clone(), bus: a.bus, off, ctrl, p_ref: 0.0, q_ref: 0.0, v_set: 1.0, on: true });
                    let link = convs.len();
                    let l_off = lay.push(format!("link{link}.v_off"), StateKind::Scalar, false);
                    lay.push(format!("link{link}.v_on"), StateKind::Scalar, false);
                    lay.push(format!("link{link}.i"), StateKind::Scalar, !emt);
                    lay.push(format!("link{link}.xi"), StateKind::Scalar, false);
                    let on_off = lay.push(format!("onshore{link}.dw"), StateKind::Scalar, false);
                    lay.push(format!("onshore{link}.p_gov"), StateKind::Scalar, false);
                    links.push(Link { off: l_off, on_off, p_out0: 0.0 });
                }
                DeviceKind::Condenser => {
                    let off = lay.push(format!("{n}.delta"), StateKind::Angle, false);
                    lay.push(format!("{n}.dw"), StateKind::Scalar, false);
                    lay.push(format!("{n}.e_qp"), StateKind::Scalar, false);
                    lay.push(format!("{n}.e_fd"), StateKind::Scalar, false);
                    if emt {
                        lay.complex(&format!("{n}.i"), false);
                    }
                    scs.push(Sc { name: n.clone(), bus: a.bus, off, v_ref: 1.0, on: true });
                }
                DeviceKind::WindFarm => {
                    let off = if emt {
                        let off = lay.push(format!("{n}.theta"), StateKind::Angle, false);
                        lay.push(format!("{n}.x_pll"), StateKind::Scalar, false);
                        off
                    } else {
                        lay.names.len()
                    };
                    lay.push(format!("{n}.i_d"), StateKind::Scalar, false);
                    let p_order = cfg.wind_power_mw[farm_k] / sb.s_base_mva;
                    farm_k += 1;
                    wfs.push(Wf { name: n.clone(), bus: a.bus, off, p_order, on: true });
                }
            }
        }
        let central = if cfg.inertia == InertiaConfig::Low {
            let off = lay.push("central.z".into(), StateKind::Scalar, false);
            Some((CentralFreqController::equal(cfg.k_c, convs.len()), off))
        } else {
            None
        };

        let n = lay.names.len();
        let index = lay.names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut sys = SimSystem {
            sb,
            mode,
            names: lay.names,
            kinds: lay.kinds,
            alg: lay.alg,
            active: vec![true; n],
            held: vec![0.0; n],
            index,
            bus_b,
            bus_on: vec![true; nb],
            branch_on: vec![true; net.branches.len()],
            trafo_on: vec![true; net.transformers.len()],
            br_off,
            tr_off,
            convs,
            scs,
            wfs,
            links,
            central,
            net,
            cfg,
        };
        let x0 = sys.initialize()?;
        sys.held = x0.clone();
        Ok((sys, x0))
    }

    fn initialize(&mut self) -> Result<Vec<f64>, SimError> {
        let sb = self.sb;
        let emt = self.mode == Fidelity::Emt;
        let nb = self.net.bus_count();
        let mut sp = vec![BusSetpoint::Pq { p: 0.0, q: 0.0 }; nb];
        sp[HUB_BUS] = BusSetpoint::Slack { v: self.cfg.hub_voltage, angle: 0.0 };
        for w in &self.wfs {
            if w.bus == HUB_BUS {
                return Err(SimError::Init("wind farms must not connect at the hub".into()));
            }
            sp[w.bus] = BusSetpoint::Pq { p: w.p_order, q: 0.0 };
        }
        let op = power_flow(&self.net, &sp).map_err(|e| SimError::Init(format!("power flow: {e}")))?;
        let mut x = vec![0.0; self.dim()];
        for (b, v) in op.v.iter().enumerate() {
            put(&mut x, 2 * b, *v);
        }
        if emt {
            for (k, br) in self.net.branches.iter().enumerate() {
                let i = (op.v[br.from_bus] - op.v[br.to_bus]) / Complex64::new(br.r, br.x);
                put(&mut x, self.br_off + 2 * k, i);
            }
            for (k, t) in self.net.transformers.iter().enumerate() {
                let i = (op.v[t.from_bus] / t.ratio - op.v[t.to_bus]) / Complex64::new(t.r, t.x);
                put(&mut x, self.tr_off + 2 * k, i);
            }
        }
        for w in &self.wfs {
            let st = windfarm_equilibrium(w.p_order, op.v[w.bus]);
            self.put_wf(&mut x, w.off, &st);
        }

        let v_hub = op.v[HUB_BUS];
        let s_hub = op.s_injected[HUB_BUS];
        let nc = self.convs.len() as f64;
        let s_abs_each = match self.cfg.inertia {
            InertiaConfig::Zero => -s_hub / nc,
            InertiaConfig::Low => {
                let r_sc = self.cfg.sc.rating_mva;
                let r_total = r_sc * self.scs.len() as f64 + self.cfg.gfl.rating_mva * nc;
                let mut s_sc_total = Complex64::new(0.0, 0.0);
                for k in 0..self.scs.len() {
                    let q = s_hub.im * r_sc / r_total;
                    let (st, v_ref, s_inj) = sc_equilibrium(&self.cfg.sc, &sb, v_hub, q);
                    self.scs[k].v_ref = v_ref;
                    s_sc_total += s_inj;
                    let o = self.scs[k].off;
                    x[o] = st.delta;
                    x[o + 1] = st.dw;
                    x[o + 2] = st.e_qp;
                    x[o + 3] = st.e_fd;
                    if emt {
                        put(&mut x, o + 4, st.i);
                    }
                }
                (s_sc_total - s_hub) / nc
            }
        };
        let rating = match self.cfg.inertia {
            InertiaConfig::Zero => self.cfg.gfm.rating_mva,
            InertiaConfig::Low => self.cfg.gfl.rating_mva,
        } / sb.s_base_mva;
        let loading = s_abs_each.norm() / v_hub.norm() / rating;
        if loading > 1.0 {
            return Err(SimError::Init(format!(
                "each converter would carry {:.0}% of its rating",
                100.0 * loading
            )));
        }

        for k in 0..self.convs.len() {
            let o = self.convs[k].off;
            let p_dc = match self.convs[k].ctrl {
                Ctrl::Gfm => {
                    let (st, v_set) = gfm_equilibrium(&self.cfg.gfm, &sb, v_hub, s_abs_each);
                    x[o] = st.delta;
                    x[o + 1] = st.p_filt;
                    x[o + 2] = st.q_filt;
                    if emt {
                        put(&mut x, o + 3, st.i_lp);
                        put(&mut x, o + 5, st.i);
                    }
                    self.convs[k].v_set = v_set;
                    s_abs_each.re - self.cfg.gfm.z_filter_sys(&sb).re * st.i.norm_sqr()
                }
                Ctrl::Gfl => {
                    let st = gfl_equilibrium(&self.cfg.gfl, &sb, v_hub, s_abs_each);
                    if emt {
                        x[o] = st.theta;
                        x[o + 1] = st.x_pll;
                        x[o + 2] = st.xi.re;
                        x[o + 3] = st.xi.im;
                        put(&mut x, o + 4, st.i);
                        put(&mut x, o + 6, st.v_ff);
                        x[o + 8] = st.v_m;
                    } else {
                        x[o] = st.theta;
                        x[o + 1] = st.p_l;
                        x[o + 2] = st.q_l;
                        x[o + 3] = st.v_m;
                    }
                    self.convs[k].v_set = v_hub.norm();
                    s_abs_each.re - self.cfg.gfl.z_filter_sys(&sb).re * st.i.norm_sqr()
                }
            };
            self.convs[k].p_ref = s_abs_each.re;
            self.convs[k].q_ref = s_abs_each.im;
            let hs = self.cfg.hvdc.equilibrium(p_dc);
            let l = &mut self.links[k];
            x[l.off] = hs.v_off;
            x[l.off + 1] = hs.v_on;
            x[l.off + 2] = hs.i;
            x[l.off + 3] = hs.xi;
            l.p_out0 = hs.xi;
        }

        let mut f = vec![0.0; x.len()];
        self.rhs(&x, &mut f)?;
        let norm = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !(norm < 1e-8) {
            return Err(SimError::Init(format!("derivative norm {norm:.3e} after initialization")));
        }
        Ok(x)
    }

    pub fn state_names(&self) -> &[String] {
        &self.names
    }

    pub fn state_kinds(&self) -> &[StateKind] {
        &self.kinds
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn converter_names(&self) -> Vec<&str> {
        self.convs.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn condenser_count(&self) -> usize {
        self.scs.len()
    }

    pub fn converter_in_service(&self) -> Vec<bool> {
        self.convs.iter().map(|c| c.on).collect()
    }

    /// Absorbed-power order of each converter (system pu).
    pub fn converter_orders(&self) -> Vec<f64> {
        self.convs.iter().map(|c| c.p_ref).collect()
    }

    /// Infinity norm of the differential derivatives and algebraic residuals.
    pub fn derivative_norm(&self, x: &[f64]) -> Result<f64, SimError> {
        let mut f = vec![0.0; x.len()];
        self.rhs(x, &mut f)?;
        Ok(f.iter().fold(0.0f64, |a, v| a.max(v.abs())))
    }

    fn freeze(&mut self, x: &[f64], range: std::ops::Range<usize>) {
        for k in range {
            self.active[k] = false;
            self.held[k] = x[k];
        }
    }

    fn conv_states(&self, k: usize) -> std::ops::Range<usize> {
        let o = self.convs[k].off;
        let n = match (self.convs[k].ctrl, self.mode) {
            (Ctrl::Gfm, Fidelity::Emt) => 7,
            (Ctrl::Gfm, Fidelity::Phasor) => 3,
            (Ctrl::Gfl, Fidelity::Emt) => 9,
            (Ctrl::Gfl, Fidelity::Phasor) => 4,
        };
        o..o + n
    }

    /// Applies one event to the system. Islanding is checked by
    /// [`SimSystem::finish_events`] once all simultaneous events are in.
    pub fn apply_event(&mut self, x: &mut [f64], ev: &Event) -> Result<(), SimError> {
        match &ev.kind {
            EventKind::SetpointStep { device, field, delta } => {
                if let Some(c) = self.convs.iter_mut().find(|c| &c.name == device) {
                    match field.as_str() {
                        "p" => c.p_ref += delta,
                        "q" => c.q_ref += delta,
                        "v" => c.v_set += delta,
                        _ => return Err(SimError::InvalidEvent(format!("{device} has no setpoint {field}"))),
                    }
                } else if let Some(w) = self.wfs.iter_mut().find(|w| &w.name == device) {
                    match field.as_str() {
                        "p" => w.p_order += delta,
                        _ => return Err(SimError::InvalidEvent(format!("{device} has no setpoint {field}"))),
                    }
                } else if let Some(s) = self.scs.iter_mut().find(|s| &s.name == device) {
                    match field.as_str() {
                        "v" => s.v_ref += delta,
                        _ => return Err(SimError::InvalidEvent(format!("{device} has no setpoint {field}"))),
                    }
                } else {
                    return Err(SimError::UnknownTarget(device.clone()));
                }
            }
            EventKind::DeviceTrip { device } => {
                if let Some(k) = self.convs.iter().position(|c| &c.name == device) {
                    if !self.convs[k].on {
                        return Err(SimError::InvalidEvent(format!("{device} already tripped")));
                    }
                    self.convs[k].on = false;
                    let r = self.conv_states(k);
                    self.freeze(x, r);
                    let on: Vec<bool> = self.convs.iter().map(|c| c.on).collect();
                    if let Some((c, _)) = &mut self.central {
                        c.renormalize(&on);
                    }
                } else if let Some(k) = self.scs.iter().position(|s| &s.name == device) {
                    self.scs[k].on = false;
                    let o = self.scs[k].off;
                    let n = if self.mode == Fidelity::Emt { 6 } else { 4 };
                    self.freeze(x, o..o + n);
                } else if let Some(k) = self.wfs.iter().position(|w| &w.name == device) {
                    self.wfs[k].on = false;
                    let o = self.wfs[k].off;
                    let n = if self.mode == Fidelity::Emt { 3 } else { 1 };
                    self.freeze(x, o..o + n);
                } else {
                    return Err(SimError::UnknownTarget(device.clone()));
                }
            }
            EventKind::BranchTrip { branch } => {
                let c = self.net.cable_index(branch).ok_or_else(|| SimError::UnknownTarget(branch.clone()))?;
                for s in self.net.cables[c].sections.clone() {
                    self.branch_on[s] = false;
                    if self.mode == Fidelity::Emt {
                        let o = self.br_off + 2 * s;
                        x[o] = 0.0;
                        x[o + 1] = 0.0;
                        self.freeze(x, o..o + 2);
                    }
                }
            }
        }
        Ok(())
    }

    /// Freezes buses cut off from the hub and rejects islanded devices.
    pub fn finish_events(&mut self, x: &mut [f64]) -> Result<(), SimError> {
        let labels = self.net.islands(&self.branch_on, &self.trafo_on);
        let hub = labels[HUB_BUS];
        for (b, &label) in labels.iter().enumerate() {
            if label != hub && self.bus_on[b] {
                self.bus_on[b] = false;
                self.freeze(x, 2 * b..2 * b + 2);
            }
        }
        for (k, br) in self.net.branches.iter().enumerate() {
            if self.branch_on[k] && !(self.bus_on[br.from_bus] && self.bus_on[br.to_bus]) {
                self.branch_on[k] = false;
            }
        }
        let dead = |bus: usize| !self.bus_on[bus];
        if let Some(c) = self.convs.iter().find(|c| c.on && dead(c.bus)) {
            return Err(SimError::Islanded(c.name.clone()));
        }
        if let Some(s) = self.scs.iter().find(|s| s.on && dead(s.bus)) {
            return Err(SimError::Islanded(s.name.clone()));
        }
        if let Some(w) = self.wfs.iter().find(|w| w.on && dead(w.bus)) {
            return Err(SimError::Islanded(w.name.clone()));
        }
        Ok(())
    }

    /// DC undervoltage check on every in-service link.
    pub fn check_limits(&self, x: &[f64], t: f64) -> Result<(), SimError> {
        for (k, l) in self.links.iter().enumerate() {
            let s = HvdcState { v_off: x[l.off], v_on: x[l.off + 1], i: x[l.off + 2], xi: x[l.off + 3] };
            if let Err(e) = check_dc_voltage(&self.cfg.hvdc, &s) {
                return Err(SimError::DcUndervoltage { link: k + 1, v: e.v, t });
            }
        }
        Ok(())
    }

    pub fn observe(&self, x: &[f64]) -> Result<Observables, SimError> {
        let mut obs = Observables::default();
        self.eval(x, None, Some(&mut obs))?;
        Ok(obs)
    }

    fn eval(&self, x: &[f64], mut f: Option<&mut [f64]>, mut obs: Option<&mut Observables>) -> Result<(), SimError> {
        let sb = &self.sb;
        let mode = self.mode;
        let emt = mode == Fidelity::Emt;
        let nb = self.net.bus_count();
        let v: Vec<Complex64> = (0..nb).map(|b| cx(x, 2 * b)).collect();
        let mut inj = vec![Complex64::new(0.0, 0.0); nb];
        if let Some(f) = f.as_deref_mut() {
            f.iter_mut().for_each(|v| *v = 0.0);
        }
        macro_rules! out {
            ($k:expr, $val:expr) => {
                if let Some(f) = f.as_deref_mut() {
                    f[$k] = $val;
                }
            };
        }

        let on_sc: Vec<&Sc> = self.scs.iter().filter(|s| s.on).collect();
        let dw_sc =
            if on_sc.is_empty() { 0.0 } else { on_sc.iter().map(|s| x[s.off + 1]).sum::<f64>() / on_sc.len() as f64 };
        let z = self.central.as_ref().map(|(_, o)| x[*o]).unwrap_or(0.0);

        if let Some(o) = obs.as_deref_mut() {
            o.v = v.clone();
        }
        let mut omega_sum = 0.0;
        let mut omega_n = 0;
        for (k, c) in self.convs.iter().enumerate() {
            let o = c.off;
            let mut p_dc = 0.0;
            let (mut p, mut q, mut imag, mut om, mut sat) = (0.0, 0.0, 0.0, 1.0, false);
            if c.on {
                match c.ctrl {
                    Ctrl::Gfm => {
                        let st = GfmState {
                            delta: x[o],
                            p_filt: x[o + 1],
                            q_filt: x[o + 2],
                            i_lp: if emt { cx(x, o + 3) } else { Complex64::default() },
                            i: if emt { cx(x, o + 5) } else { Complex64::default() },
                        };
                        let inp = GfmInputs { v: v[c.bus], p_ref: c.p_ref, q_ref: c.q_ref, v_set: c.v_set };
                        let r = gfm_derivatives(&self.cfg.gfm, sb, &st, &inp, mode)?;
                        if let Some(f) = f.as_deref_mut() {
                            f[o] = r.deriv.delta;
                            f[o + 1] = r.deriv.p_filt;
                            f[o + 2] = r.deriv.q_filt;
                            if emt {
                                put(f, o + 3, r.deriv.i_lp);
                                put(f, o + 5, r.deriv.i);
                            }
                        }
                        inj[c.bus] += r.i_inj;
                        p_dc = (r.e * r.i.conj()).re;
                        (p, q, imag, om, sat) = (r.p, r.q, r.i.norm() / self.cfg.gfm.k_sys(sb), r.omega, r.saturated);
                    }
                    Ctrl::Gfl => {
                        let st = if emt {
                            GflState {
                                theta: x[o],
                                x_pll: x[o + 1],
                                xi: Complex64::new(x[o + 2], x[o + 3]),
                                i: cx(x, o + 4),
                                v_ff: cx(x, o + 6),
                                v_m: x[o + 8],
                                ..Default::default()
                            }
                        } else {
                            GflState { theta: x[o], p_l: x[o + 1], q_l: x[o + 2], v_m: x[o + 3], ..Default::default() }
                        };
                        let dp_c = self.central.as_ref().map(|(cc, _)| cc.alpha[k] * z).unwrap_or(0.0);
                        let inp = GflInputs {
                            v: v[c.bus],
                            p0: c.p_ref,
                            q0: c.q_ref,
                            v_set: c.v_set,
                            dp_c,
                        };
                        let r = gfl_derivatives(&self.cfg.gfl, sb, &st, &inp, mode)?;
                        if let Some(f) = f.as_deref_mut() {
                            if emt {
                                f[o] = r.deriv.theta;
                                f[o + 1] = r.deriv.x_pll;
                                f[o + 2] = r.deriv.xi.re;
                                f[o + 3] = r.deriv.xi.im;
                                put(f, o + 4, r.deriv.i);
                                put(f, o + 6, r.deriv.v_ff);
                                f[o + 8] = r.deriv.v_m;
                            } else {
                                f[o] = r.deriv.theta;
                                f[o + 1] = r.deriv.p_l;
                                f[o + 2] = r.deriv.q_l;
                                f[o + 3] = r.deriv.v_m;
                            }
                        }
                        inj[c.bus] += r.i_inj;
                        p_dc = r.p - self.cfg.gfl.z_filter_sys(sb).re * r.i.norm_sqr();
                        (p, q, imag, om, sat) = (r.p, r.q, r.i.norm() / self.cfg.gfl.k_sys(sb), r.omega, r.saturated);
                    }
                }
                if c.ctrl == Ctrl::Gfm {
                    omega_sum += om;
                    omega_n += 1;
                }
            }
            let l = &self.links[k];
            let hs = HvdcState { v_off: x[l.off], v_on: x[l.off + 1], i: x[l.off + 2], xi: x[l.off + 3] };
            let hr = hvdc_derivatives(&self.cfg.hvdc, &hs, p_dc, mode)?;
            let deficit = (l.p_out0 - hr.p_out) * sb.s_base_mva / self.cfg.onshore.s_base_mva;
            let os = OnshoreState { dw: x[l.on_off], p_gov: x[l.on_off + 1] };
            let or = onshore_derivatives(&self.cfg.onshore, &os, deficit, sb.f_base_hz)?;
            if let Some(f) = f.as_deref_mut() {
                f[l.off] = hr.deriv.v_off;
                f[l.off + 1] = hr.deriv.v_on;
                f[l.off + 2] = hr.deriv.i;
                f[l.off + 3] = hr.deriv.xi;
                f[l.on_off] = or.deriv.dw;
                f[l.on_off + 1] = or.deriv.p_gov;
            }
            if let Some(ob) = obs.as_deref_mut() {
                ob.conv_p.push(p);
                ob.conv_q.push(q);
                ob.conv_i.push(imag);
                ob.conv_omega.push(om);
                ob.conv_sat.push(sat);
                ob.vdc_off.push(hs.v_off);
                ob.vdc_on.push(hs.v_on);
                ob.p_on.push(hr.p_out);
                ob.df_on_hz.push(or.df_hz);
            }
        }

        for s in &self.scs {
            let o = s.off;
            let (mut p, mut q) = (0.0, 0.0);
            if s.on {
                let st = ScState {
                    delta: x[o],
                    dw: x[o + 1],
                    e_qp: x[o + 2],
                    e_fd: x[o + 3],
                    i: if emt { cx(x, o + 4) } else { Complex64::default() },
                };
                let r = sc_derivatives(&self.cfg.sc, sb, &st, v[s.bus], s.v_ref, mode)?;
                if let Some(f) = f.as_deref_mut() {
                    f[o] = r.deriv.delta;
                    f[o + 1] = r.deriv.dw;
                    f[o + 2] = r.deriv.e_qp;
                    f[o + 3] = r.deriv.e_fd;
                    if emt {
                        put(f, o + 4, r.deriv.i);
                    }
                }
                inj[s.bus] += r.i_inj;
                (p, q) = (r.p, r.q);
            }
            if let Some(ob) = obs.as_deref_mut() {
                ob.sc_dw.push(x[o + 1]);
                ob.sc_p.push(p);
                ob.sc_q.push(q);
            }
        }

        for w in &self.wfs {
            let mut p = 0.0;
            if w.on {
                let st = self.get_wf(x, w.off);
                let r = windfarm_derivatives(&self.cfg.wind, &self.sb, &st, w.p_order, v[w.bus], self.mode)?;
                if let Some(f) = f.as_deref_mut() {
                    self.put_wf(f, w.off, &r.deriv);
                }
                inj[w.bus] += r.i_inj;
                p = r.p;
            }
            if let Some(ob) = obs.as_deref_mut() {
                ob.wf_p.push(p);
            }
        }

        if let Some((_, o)) = &self.central {
            out!(*o, self.cfg.k_c * dw_sc);
        }

        // network
        let ob = sb.omega_b;
        for (k, br) in self.net.branches.iter().enumerate() {
            if !self.branch_on[k] {
                continue;
            }
            let zs = Complex64::new(br.r, br.x);
            let (a, b) = (br.from_bus, br.to_bus);
            let i = if emt {
                let s = self.br_off + 2 * k;
                let i = cx(x, s);
                if let Some(f) = f.as_deref_mut() {
                    put(f, s, (v[a] - v[b] - zs * i) * (ob / br.x));
                }
                i
            } else {
                (v[a] - v[b]) / zs
            };
            inj[a] -= i;
            inj[b] += i;
        }
        for (k, t) in self.net.transformers.iter().enumerate() {
            if !self.trafo_on[k] {
                continue;
            }
            let zs = Complex64::new(t.r, t.x);
            let (a, b) = (t.from_bus, t.to_bus);
            let i = if emt {
                let s = self.tr_off + 2 * k;
                let i = cx(x, s);
                if let Some(f) = f.as_deref_mut() {
                    put(f, s, (v[a] / t.ratio - v[b] - zs * i) * (ob / t.x));
                }
                i
            } else {
                (v[a] / t.ratio - v[b]) / zs
            };
            inj[a] -= i / t.ratio;
            inj[b] += i;
        }
        if let Some(f) = f {
            for b in 0..nb {
                if !self.bus_on[b] {
                    continue;
                }
                let net_i = inj[b] - Complex64::new(0.0, self.bus_b[b]) * v[b];
                if emt {
                    put(f, 2 * b, net_i * (ob / self.bus_b[b]));
                } else {
                    put(f, 2 * b, net_i);
                }
            }
            for k in 0..f.len() {
                if !self.active[k] {
                    f[k] = if self.alg[k] { self.held[k] - x[k] } else { 0.0 };
                }
            }
        }

        if let Some(o) = obs {
            o.f_offshore_hz = match self.cfg.inertia {
                InertiaConfig::Zero if omega_n > 0 => sb.f_base_hz * omega_sum / omega_n as f64,
                _ => sb.f_base_hz * (1.0 + dw_sc),
            };
        }
        Ok(())
    }
}

impl Dynamics for SimSystem {
    fn dim(&self) -> usize {
        self.names.len()
    }

    fn algebraic(&self) -> &[bool] {
        &self.alg
    }

    fn rhs(&self, x: &[f64], f: &mut [f64]) -> Result<(), SimError> {
        self.eval(x, Some(f), None)
    }

    fn excluded(&self) -> Vec<bool> {
        self.active.iter().map(|a| !a).collect()
    }

    fn rotation(&self, x: &[f64]) -> Option<Vec<f64>> {
        let r = self
            .kinds
            .iter()
            .enumerate()
            .map(|(k, kind)| {
                if !self.active[k] {
                    return 0.0;
                }
                match kind {
                    StateKind::Angle => 1.0,
                    StateKind::Re => -x[k + 1],
                    StateKind::Im => x[k - 1],
                    StateKind::Scalar => 0.0,
                }
            })
            .collect();
        Some(r)
    }
}

trait RatingBase {
    fn k_sys(&self, base: &SystemBase) -> f64;
}

impl RatingBase for GfmParams {
    fn k_sys(&self, base: &SystemBase) -> f64 {
        self.rating_mva / base.s_base_mva
    }
}

impl RatingBase for GflParams {
    fn k_sys(&self, base: &SystemBase) -> f64 {
        self.rating_mva / base.s_base_mva
    }
}
