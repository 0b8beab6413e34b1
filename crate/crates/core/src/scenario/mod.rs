//! The three large-disturbance studies of the hub, their security metrics and
//! the EMT-versus-phasor comparison.

mod metrics;
mod mismatch;

pub use metrics::{compute_metrics, propagation_report, Bands, MetricReport, PropagationReport};
pub use mismatch::{mismatch, resample_mean, ChannelMismatch, MismatchReport};

use crate::devices::Fidelity;
use crate::sim::{Event, InertiaConfig, RunStats, SimError, SimSystem, SolverOptions, SystemConfig, Trace};

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioKind {
    /// extra export requested by the onshore grid of `link` (1-based)
    PowerRequest { mw: f64, link: usize },
    ConverterTrip { link: usize },
    /// farm and all its export cables are disconnected
    WindfarmTrip { farm: usize },
}

impl ScenarioKind {
    pub const IDS: [&'static str; 3] = ["s1-power-request", "s2-converter-trip", "s3-windfarm-trip"];

    pub fn id(&self) -> &'static str {
        match self {
            ScenarioKind::PowerRequest { .. } => Self::IDS[0],
            ScenarioKind::ConverterTrip { .. } => Self::IDS[1],
            ScenarioKind::WindfarmTrip { .. } => Self::IDS[2],
        }
    }

    /// Default parameters for a stable scenario identifier.
    pub fn from_id(id: &str, system: &SystemConfig) -> Option<Self> {
        match id {
            "s1-power-request" => Some(ScenarioKind::PowerRequest { mw: 200.0, link: 1 }),
            "s2-converter-trip" => Some(ScenarioKind::ConverterTrip { link: 1 }),
            "s3-windfarm-trip" => Some(ScenarioKind::WindfarmTrip { farm: furthest_farm(&system.layout.farm_distances_km) }),
            _ => None,
        }
    }
}

/// 1-based index of the farm with the longest export cable (first on ties).
pub fn furthest_farm(distances_km: &[f64]) -> usize {
    let mut best = 0;
    for (k, d) in distances_km.iter().enumerate() {
        if *d > distances_km[best] {
            best = k;
        }
    }
    best + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelection {
    Emt,
    Phasor,
    Both,
}

impl ModeSelection {
    pub fn name(self) -> &'static str {
        match self {
            ModeSelection::Emt => "emt",
            ModeSelection::Phasor => "phasor",
            ModeSelection::Both => "both",
        }
    }

    pub fn modes(self) -> Vec<Fidelity> {
        match self {
            ModeSelection::Emt => vec![Fidelity::Emt],
            ModeSelection::Phasor => vec![Fidelity::Phasor],
            ModeSelection::Both => vec![Fidelity::Emt, Fidelity::Phasor],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// device and network data; `system.inertia` selects the configuration
    pub system: SystemConfig,
    pub scenario: ScenarioKind,
    pub mode: ModeSelection,
    pub t_event: f64,
    pub t_end: f64,
    pub dt_emt: f64,
    pub dt_phasor: f64,
    pub solver: SolverOptions,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            scenario: ScenarioKind::PowerRequest { mw: 200.0, link: 1 },
            mode: ModeSelection::Both,
            t_event: 1.0,
            t_end: 5.0,
            dt_emt: 1e-4,
            dt_phasor: 5e-3,
            solver: SolverOptions::default(),
        }
    }
}

fn is_multiple(t: f64, dt: f64) -> bool {
    let n = (t / dt).round();
    (n * dt - t).abs() <= 1e-9 * t.abs().max(1.0)
}

impl ScenarioConfig {
    /// Scenario `id` with default timing on the given system.
    pub fn new(id: &str, inertia: InertiaConfig) -> Option<Self> {
        let system = SystemConfig { inertia, ..Default::default() };
        let scenario = ScenarioKind::from_id(id, &system)?;
        Some(Self { system, scenario, ..Default::default() })
    }

    pub fn inertia(&self) -> InertiaConfig {
        self.system.inertia
    }

    /// All violations, not just the first.
    pub fn check(&self) -> Vec<String> {
        let mut errs = vec![];
        let n_conv = self.system.layout.converters;
        let n_farm = self.system.layout.farm_distances_km.len();
        match &self.scenario {
            ScenarioKind::PowerRequest { mw, link } => {
                if !mw.is_finite() {
                    errs.push(format!("power request must be finite, got {mw}"));
                }
                if *link == 0 || *link > n_conv {
                    errs.push(format!("link {link} does not exist (1..={n_conv})"));
                }
            }
            ScenarioKind::ConverterTrip { link } => {
                if *link == 0 || *link > n_conv {
                    errs.push(format!("link {link} does not exist (1..={n_conv})"));
                }
            }
            ScenarioKind::WindfarmTrip { farm } => {
                if *farm == 0 || *farm > n_farm {
                    errs.push(format!("farm {farm} does not exist (1..={n_farm})"));
                }
            }
        }
        if !(self.t_event >= 0.0 && self.t_event < self.t_end) {
            errs.push(format!("need 0 <= t_event < t_end, got {} and {}", self.t_event, self.t_end));
        }
        for (name, dt) in [("dt_emt", self.dt_emt), ("dt_phasor", self.dt_phasor)] {
            if !(dt > 0.0) {
                errs.push(format!("{name} must be > 0, got {dt}"));
            } else if self.t_event >= 0.0 && self.t_end > 0.0 && !(is_multiple(self.t_event, dt) && is_multiple(self.t_end, dt)) {
                errs.push(format!("t_event and t_end must be multiples of {name} = {dt}"));
            }
        }
        if let Err(e) = self.system.validate() {
            errs.push(e.to_string());
        }
        errs
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let errs = self.check();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Invalid(errs))
        }
    }

    pub fn events(&self) -> Vec<Event> {
        let t = self.t_event;
        match &self.scenario {
            ScenarioKind::PowerRequest { mw, link } => {
                vec![Event::setpoint(t, &format!("conv{link}"), "p", mw / self.system.base.s_base_mva)]
            }
            ScenarioKind::ConverterTrip { link } => vec![Event::trip(t, &format!("conv{link}"))],
            ScenarioKind::WindfarmTrip { farm } => {
                let mut ev = vec![Event::trip(t, &format!("wf{farm}"))];
                for c in 1..=self.system.layout.cables_per_farm {
                    ev.push(Event::branch_trip(t, &format!("wf{farm}.c{c}")));
                }
                ev
            }
        }
    }

    pub fn dt(&self, mode: Fidelity) -> f64 {
        match mode {
            Fidelity::Emt => self.dt_emt,
            Fidelity::Phasor => self.dt_phasor,
        }
    }

    pub fn label(&self, mode: Fidelity) -> String {
        format!("{} ({} inertia, {})", self.scenario.id(), self.inertia().name(), mode.name())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("{context}: {source}")]
    Sim { context: String, source: SimError },
    #[error("{0}")]
    Metric(String),
}

#[derive(Debug, Clone)]
pub struct ModeRun {
    pub mode: Fidelity,
    pub trace: Trace,
    pub stats: RunStats,
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub runs: Vec<ModeRun>,
}

impl ScenarioRun {
    pub fn get(&self, mode: Fidelity) -> Option<&ModeRun> {
        self.runs.iter().find(|r| r.mode == mode)
    }
}

/// Runs one fidelity of the scenario.
pub fn run_mode(cfg: &ScenarioConfig, mode: Fidelity) -> Result<ModeRun, ScenarioError> {
    cfg.validate()?;
    let ctx = |source| ScenarioError::Sim { context: cfg.label(mode), source };
    let (mut sys, mut x) = SimSystem::build(cfg.system.clone(), mode).map_err(ctx)?;
    let (trace, stats) = sys.run(&mut x, &cfg.events(), cfg.t_end, cfg.dt(mode), cfg.solver).map_err(ctx)?;
    Ok(ModeRun { mode, trace, stats })
}

/// Builds, initializes and integrates the scenario in the selected mode(s).
/// With both modes the two runs execute on separate threads.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun, ScenarioError> {
    cfg.validate()?;
    let modes = cfg.mode.modes();
    let results: Vec<Result<ModeRun, ScenarioError>> = if modes.len() == 1 {
        vec![run_mode(cfg, modes[0])]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = modes.iter().map(|&m| s.spawn(move || run_mode(cfg, m))).collect();
            handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
        })
    };
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(ScenarioRun { config: cfg.clone(), runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn furthest_farm_is_the_25_km_one() {
        let cfg = ScenarioConfig::new("s3-windfarm-trip", InertiaConfig::Zero).unwrap();
        assert_eq!(cfg.scenario, ScenarioKind::WindfarmTrip { farm: 5 });
        let ev = cfg.events();
        assert_eq!(ev.len(), 3);
        assert_eq!(ev[2].describe(), "open wf5.c2");
        assert_eq!(furthest_farm(&[3.0, 9.0, 9.0]), 2);
    }

    #[test]
    fn ids_round_trip() {
        let sys = SystemConfig::default();
        for id in ScenarioKind::IDS {
            assert_eq!(ScenarioKind::from_id(id, &sys).unwrap().id(), id);
        }
        assert!(ScenarioKind::from_id("s4", &sys).is_none());
    }

    #[test]
    fn power_request_is_a_setpoint_step_in_system_pu() {
        let cfg = ScenarioConfig::default();
        assert_eq!(cfg.events()[0].describe(), "setpoint conv1.p +0.2");
    }

    #[test]
    fn validation_collects_every_error() {
        let cfg = ScenarioConfig {
            scenario: ScenarioKind::ConverterTrip { link: 9 },
            t_event: 6.0,
            dt_phasor: 0.0,
            ..Default::default()
        };
        let errs = cfg.check();
        assert_eq!(errs.len(), 3, "{errs:?}");
        let cfg = ScenarioConfig { t_event: 1.00005, ..Default::default() };
        assert!(cfg.check().iter().any(|e| e.contains("dt_phasor")));
    }

    #[test]
    fn scenario_errors_carry_context() {
        let mut cfg = ScenarioConfig::new("s2-converter-trip", InertiaConfig::Zero).unwrap();
        cfg.system.layout.converters = 1;
        cfg.system.hvdc.v_min = 0.5;
        cfg.t_end = 0.5;
        cfg.t_event = 0.1;
        cfg.mode = ModeSelection::Phasor;
        // one converter carrying 4 GW cannot be initialized
        let err = run_scenario(&cfg).unwrap_err().to_string();
        assert!(err.starts_with("s2-converter-trip (zero inertia, phasor)"), "{err}");
    }

    fn phasor_trace(id: &str, inertia: InertiaConfig) -> Trace {
        let cfg = ScenarioConfig { mode: ModeSelection::Phasor, ..ScenarioConfig::new(id, inertia).unwrap() };
        run_mode(&cfg, Fidelity::Phasor).unwrap().trace
    }

    #[test]
    fn trip_reaches_onshore_faster_without_inertia() {
        let z = phasor_trace("s2-converter-trip", InertiaConfig::Zero);
        let l = phasor_trace("s2-converter-trip", InertiaConfig::Low);
        let r = propagation_report(&z, &l, 1.0).unwrap();
        assert!(r.low_is_slower && r.ratio > 2.0, "{r:?}");
    }

    #[test]
    fn power_request_overshoots_only_with_inertia() {
        let z = compute_metrics(&phasor_trace("s1-power-request", InertiaConfig::Zero), 1.0, Bands::default()).unwrap();
        let l = compute_metrics(&phasor_trace("s1-power-request", InertiaConfig::Low), 1.0, Bands::default()).unwrap();
        assert!(z.links[0].overshoot < 0.01, "{:?}", z.links[0]);
        assert!(l.links[0].overshoot > 0.05, "{:?}", l.links[0]);
        for m in [&z, &l] {
            assert!((m.links[0].delivered_change - 0.156).abs() < 0.002);
        }
    }
}
