//! Shared fixtures for the solver benchmarks in `benches/`.

use hubsim_core::devices::Fidelity;
use hubsim_core::scenario::ScenarioConfig;
use hubsim_core::sim::{InertiaConfig, SimSystem};

/// Converter-trip scenario on the default hub, shortened to `t_end` with the
/// event at `t_end / 2`.
pub fn short_trip(inertia: InertiaConfig, t_end: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new("s2-converter-trip", inertia).expect("known scenario");
    cfg.t_end = t_end;
    cfg.t_event = t_end / 2.0;
    cfg
}

/// Initialized system of the default hub.
pub fn initialized(inertia: InertiaConfig, mode: Fidelity) -> (SimSystem, Vec<f64>) {
    let cfg = ScenarioConfig::new("s1-power-request", inertia).expect("known scenario");
    SimSystem::build(cfg.system, mode).expect("default system initializes")
}
