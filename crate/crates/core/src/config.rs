//! Run configuration: a TOML document with `[network]`, `[devices]`,
//! `[scenario]`, `[solver]` and `[tco]` tables. Dimensioned values are
//! strings carrying their unit (`"1000 MVA"`, `"5 ms"`); per-unit values and
//! gains are bare numbers. Every key is optional and overrides a default.

use std::fmt::Write as _;

use crate::scenario::{furthest_farm, Bands, ModeSelection, ScenarioConfig, ScenarioKind};
use crate::sim::InertiaConfig;
use crate::techno::{CableLoading, ResistanceSource, TcoAssumptions, TransformerCostSource};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSettings {
    /// mismatch threshold, pu
    pub epsilon: f64,
    pub bands: Bands,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self { epsilon: 0.01, bands: Bands::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TcoSettings {
    pub assumptions: TcoAssumptions,
    pub wind_power_mw: f64,
    pub distance_km: f64,
    pub max_distance_km: f64,
    pub step_km: f64,
}

impl Default for TcoSettings {
    fn default() -> Self {
        Self { assumptions: TcoAssumptions::default(), wind_power_mw: 400.0, distance_km: 30.0, max_distance_km: 100.0, step_km: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    /// system, event, timing and solver settings of the dynamic study
    pub scenario: ScenarioConfig,
    pub analysis: AnalysisSettings,
    pub tco: TcoSettings,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}", .errors.join("\n"))]
pub struct ConfigError {
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Mva,
    Mw,
    Kv,
    Ka,
    Hz,
    Seconds,
    RadPerS,
    Km,
    MohmPerKm,
    UfPerKm,
    MhPerKm,
    EurPerMwh,
}

impl Unit {
    /// Accepted spellings with their factor to the canonical (first) one.
    fn spellings(self) -> &'static [(&'static str, f64)] {
        match self {
            Unit::Mva => &[("MVA", 1.0), ("GVA", 1e3)],
            Unit::Mw => &[("MW", 1.0), ("GW", 1e3)],
            Unit::Kv => &[("kV", 1.0), ("V", 1e-3)],
            Unit::Ka => &[("kA", 1.0), ("A", 1e-3)],
            Unit::Hz => &[("Hz", 1.0)],
            Unit::Seconds => &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("µs", 1e-6)],
            Unit::RadPerS => &[("rad/s", 1.0)],
            Unit::Km => &[("km", 1.0), ("m", 1e-3)],
            Unit::MohmPerKm => &[("mOhm/km", 1.0), ("mΩ/km", 1.0)],
            Unit::UfPerKm => &[("uF/km", 1.0), ("µF/km", 1.0)],
            Unit::MhPerKm => &[("mH/km", 1.0)],
            Unit::EurPerMwh => &[("EUR/MWh", 1.0), ("€/MWh", 1.0)],
        }
    }

    fn symbol(self) -> &'static str {
        self.spellings()[0].0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Check {
    Positive,
    NonNegative,
    AtLeast(f64),
    /// closed interval [0, 1]
    Fraction,
    Finite,
}

impl Check {
    fn test(self, v: f64) -> Result<(), String> {
        let ok = match self {
            Check::Positive => v > 0.0,
            Check::NonNegative => v >= 0.0,
            Check::AtLeast(m) => v >= m,
            Check::Fraction => (0.0..=1.0).contains(&v),
            Check::Finite => v.is_finite(),
        };
        if ok && v.is_finite() {
            return Ok(());
        }
        Err(match self {
            Check::Positive => "must be > 0".into(),
            Check::NonNegative => "must be >= 0".into(),
            Check::AtLeast(m) => format!("must be >= {m}"),
            Check::Fraction => "must be within [0, 1]".into(),
            Check::Finite => "must be finite".into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Quantity(Unit),
    Number,
    Count,
}

type Get = fn(&RunConfig) -> f64;
type Set = fn(&mut RunConfig, f64);

struct Field {
    section: &'static str,
    key: &'static str,
    kind: Kind,
    check: Check,
    get: Get,
    set: Set,
}

macro_rules! field {
    ($section:literal, $key:literal, $kind:expr, $check:expr, |$c:ident| $path:expr) => {
        Field { section: $section, key: $key, kind: $kind, check: $check, get: |$c| $path as f64, set: |$c, v| $path = v as _ }
    };
}

use Check::*;
use Kind::*;
use Unit::*;

fn fields() -> Vec<Field> {
    vec![
        field!("network", "s_base", Quantity(Mva), Positive, |c| c.scenario.system.base.s_base_mva),
        field!("network", "f_base", Quantity(Hz), Positive, |c| c.scenario.system.base.f_base_hz),
        field!("network", "hub_voltage", Number, Positive, |c| c.scenario.system.hub_voltage),
        field!("network", "converters", Count, AtLeast(1.0), |c| c.scenario.system.layout.converters),
        field!("network", "condensers", Count, NonNegative, |c| c.scenario.system.condensers),
        field!("network", "cables_per_farm", Count, AtLeast(1.0), |c| c.scenario.system.layout.cables_per_farm),
        field!("network", "km_per_section", Quantity(Km), Positive, |c| c.scenario.system.layout.km_per_section),
        field!("network", "hub_filter_b", Number, NonNegative, |c| c.scenario.system.layout.hub_filter_b),
        field!("network", "cable_s_rated", Quantity(Mva), Positive, |c| c.scenario.system.layout.cable.s_rated_mva),
        field!("network", "cable_i_rated", Quantity(Ka), Positive, |c| c.scenario.system.layout.cable.i_rated_ka),
        field!("network", "cable_c", Quantity(UfPerKm), Positive, |c| c.scenario.system.layout.cable.c_uf_per_km),
        field!("network", "cable_l", Quantity(MhPerKm), Positive, |c| c.scenario.system.layout.cable.l_mh_per_km),
        field!("network", "cable_r_dc", Quantity(MohmPerKm), Positive, |c| c.scenario.system.layout.cable.r_dc_mohm_per_km),
        field!("devices", "k_c", Number, NonNegative, |c| c.scenario.system.k_c),
        field!("devices", "gfm_rating", Quantity(Mva), Positive, |c| c.scenario.system.gfm.rating_mva),
        field!("devices", "droop_mp", Number, Positive, |c| c.scenario.system.gfm.m_p),
        field!("devices", "droop_kq", Number, NonNegative, |c| c.scenario.system.gfm.k_q),
        field!("devices", "gfm_tau_p", Quantity(Seconds), Positive, |c| c.scenario.system.gfm.tau_p),
        field!("devices", "gfm_r_v", Number, NonNegative, |c| c.scenario.system.gfm.r_v),
        field!("devices", "gfm_x_v", Number, NonNegative, |c| c.scenario.system.gfm.x_v),
        field!("devices", "gfm_omega_hp", Quantity(RadPerS), Positive, |c| c.scenario.system.gfm.omega_hp),
        field!("devices", "gfm_r_f", Number, NonNegative, |c| c.scenario.system.gfm.r_f),
        field!("devices", "gfm_x_f", Number, Positive, |c| c.scenario.system.gfm.x_f),
        field!("devices", "gfm_b_f", Number, NonNegative, |c| c.scenario.system.gfm.b_f),
        field!("devices", "gfm_i_max", Number, AtLeast(1.0), |c| c.scenario.system.gfm.i_max),
        field!("devices", "gfl_rating", Quantity(Mva), Positive, |c| c.scenario.system.gfl.rating_mva),
        field!("devices", "droop_kf", Number, NonNegative, |c| c.scenario.system.gfl.k_f),
        field!("devices", "droop_kv", Number, NonNegative, |c| c.scenario.system.gfl.k_v),
        field!("devices", "gfl_kp_pll", Number, Positive, |c| c.scenario.system.gfl.kp_pll),
        field!("devices", "gfl_ki_pll", Number, Positive, |c| c.scenario.system.gfl.ki_pll),
        field!("devices", "gfl_omega_c", Quantity(RadPerS), Positive, |c| c.scenario.system.gfl.omega_c),
        field!("devices", "gfl_omega_ff", Quantity(RadPerS), Positive, |c| c.scenario.system.gfl.omega_ff),
        field!("devices", "gfl_tau_pq", Quantity(Seconds), Positive, |c| c.scenario.system.gfl.tau_pq),
        field!("devices", "gfl_tau_f", Quantity(Seconds), Positive, |c| c.scenario.system.gfl.tau_f),
        field!("devices", "gfl_tau_v", Quantity(Seconds), Positive, |c| c.scenario.system.gfl.tau_v),
        field!("devices", "gfl_r_f", Number, NonNegative, |c| c.scenario.system.gfl.r_f),
        field!("devices", "gfl_x_f", Number, Positive, |c| c.scenario.system.gfl.x_f),
        field!("devices", "gfl_i_max", Number, AtLeast(1.0), |c| c.scenario.system.gfl.i_max),
        field!("devices", "sc_rating", Quantity(Mva), Positive, |c| c.scenario.system.sc.rating_mva),
        field!("devices", "sc_h", Quantity(Seconds), Positive, |c| c.scenario.system.sc.h),
        field!("devices", "sc_d", Number, NonNegative, |c| c.scenario.system.sc.d),
        field!("devices", "sc_x_d", Number, Positive, |c| c.scenario.system.sc.x_d),
        field!("devices", "sc_x_dp", Number, Positive, |c| c.scenario.system.sc.x_dp),
        field!("devices", "sc_r_a", Number, NonNegative, |c| c.scenario.system.sc.r_a),
        field!("devices", "sc_t_d0p", Quantity(Seconds), Positive, |c| c.scenario.system.sc.t_d0p),
        field!("devices", "sc_k_a", Number, Positive, |c| c.scenario.system.sc.k_a),
        field!("devices", "sc_t_a", Quantity(Seconds), Positive, |c| c.scenario.system.sc.t_a),
        field!("devices", "sc_e_fd_min", Number, Finite, |c| c.scenario.system.sc.e_fd_min),
        field!("devices", "sc_e_fd_max", Number, Finite, |c| c.scenario.system.sc.e_fd_max),
        field!("devices", "hvdc_v_dc_base", Quantity(Kv), Positive, |c| c.scenario.system.hvdc.v_dc_base_kv),
        field!("devices", "hvdc_c_off", Number, Positive, |c| c.scenario.system.hvdc.c_off),
        field!("devices", "hvdc_c_on", Number, Positive, |c| c.scenario.system.hvdc.c_on),
        field!("devices", "hvdc_l", Number, Positive, |c| c.scenario.system.hvdc.l),
        field!("devices", "hvdc_r", Number, NonNegative, |c| c.scenario.system.hvdc.r),
        field!("devices", "hvdc_kp", Number, Positive, |c| c.scenario.system.hvdc.kp),
        field!("devices", "hvdc_ki", Number, Positive, |c| c.scenario.system.hvdc.ki),
        field!("devices", "hvdc_v_min", Number, Fraction, |c| c.scenario.system.hvdc.v_min),
        field!("devices", "onshore_s_base", Quantity(Mva), Positive, |c| c.scenario.system.onshore.s_base_mva),
        field!("devices", "onshore_h", Quantity(Seconds), Positive, |c| c.scenario.system.onshore.h),
        field!("devices", "onshore_r", Number, Positive, |c| c.scenario.system.onshore.r),
        field!("devices", "onshore_t_g", Quantity(Seconds), Positive, |c| c.scenario.system.onshore.t_g),
        field!("devices", "wind_rating", Quantity(Mva), Positive, |c| c.scenario.system.wind.rating_mva),
        field!("devices", "wind_tau_w", Quantity(Seconds), Positive, |c| c.scenario.system.wind.tau_w),
        field!("devices", "wind_kp_pll", Number, Positive, |c| c.scenario.system.wind.kp_pll),
        field!("devices", "wind_ki_pll", Number, Positive, |c| c.scenario.system.wind.ki_pll),
        field!("scenario", "t_event", Quantity(Seconds), NonNegative, |c| c.scenario.t_event),
        field!("scenario", "t_end", Quantity(Seconds), Positive, |c| c.scenario.t_end),
        field!("scenario", "dt_emt", Quantity(Seconds), Positive, |c| c.scenario.dt_emt),
        field!("scenario", "dt_phasor", Quantity(Seconds), Positive, |c| c.scenario.dt_phasor),
        field!("scenario", "epsilon", Number, Positive, |c| c.analysis.epsilon),
        field!("scenario", "band_v", Number, Positive, |c| c.analysis.bands.v_pu),
        field!("scenario", "band_f", Quantity(Hz), Positive, |c| c.analysis.bands.f_hz),
        field!("solver", "tol", Number, Positive, |c| c.scenario.solver.tol),
        field!("solver", "max_iter", Count, AtLeast(1.0), |c| c.scenario.solver.max_iter),
        field!("solver", "refresh_after", Count, AtLeast(1.0), |c| c.scenario.solver.refresh_after),
        field!("tco", "wind_power", Quantity(Mw), Positive, |c| c.tco.wind_power_mw),
        field!("tco", "distance", Quantity(Km), NonNegative, |c| c.tco.distance_km),
        field!("tco", "max_distance", Quantity(Km), NonNegative, |c| c.tco.max_distance_km),
        field!("tco", "step", Quantity(Km), Positive, |c| c.tco.step_km),
        field!("tco", "turbine_rating", Quantity(Mva), Positive, |c| c.tco.assumptions.turbine_mva),
        field!("tco", "years", Count, AtLeast(1.0), |c| c.tco.assumptions.years),
        field!("tco", "interest_rate", Number, NonNegative, |c| c.tco.assumptions.interest_rate),
        field!("tco", "price", Quantity(EurPerMwh), NonNegative, |c| c.tco.assumptions.price_eur_per_mwh),
        field!("tco", "utilization", Number, Fraction, |c| c.tco.assumptions.utilization),
    ]
}

/// Keys that are not plain numbers; handled individually.
const SPECIAL: [(&str, &str); 13] = [
    ("network", "farm_distances"),
    ("network", "wind_power"),
    ("network", "cable_r_series"),
    ("scenario", "inertia"),
    ("scenario", "scenario"),
    ("scenario", "mode"),
    ("scenario", "request"),
    ("scenario", "link"),
    ("scenario", "farm"),
    ("tco", "resistance"),
    ("tco", "transformer_cost"),
    ("tco", "cable_loading"),
    ("tco", "power_factor"),
];

const SECTIONS: [&str; 5] = ["network", "devices", "scenario", "solver", "tco"];

fn quantity(v: &toml::Value, unit: Unit) -> Result<f64, String> {
    let example = format!("e.g. \"1 {}\"", unit.symbol());
    let s = match v {
        toml::Value::String(s) => s,
        toml::Value::Integer(_) | toml::Value::Float(_) => {
            return Err(format!("needs a unit ({}), {example}", unit.symbol()));
        }
        _ => return Err(format!("expected a quantity string, {example}")),
    };
    let mut parts = s.split_whitespace();
    let (Some(num), Some(sym), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(format!("expected \"<number> <unit>\", {example}, got {s:?}"));
    };
    let x: f64 = num.parse().map_err(|_| format!("{num:?} is not a number"))?;
    match unit.spellings().iter().find(|(u, _)| *u == sym) {
        Some((_, k)) => Ok(x * k),
        None => Err(format!("unit mismatch: got {sym:?}, expected {}", unit.symbol())),
    }
}

fn number(v: &toml::Value) -> Result<f64, String> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::String(s) => Err(format!("expected a bare number, got {s:?}")),
        _ => Err("expected a number".into()),
    }
}

fn count(v: &toml::Value) -> Result<f64, String> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as f64),
        _ => Err("expected a non-negative integer".into()),
    }
}

fn string(v: &toml::Value) -> Result<&str, String> {
    v.as_str().ok_or_else(|| "expected a string".to_string())
}

fn quantity_list(v: &toml::Value, unit: Unit, check: Check) -> Result<Vec<f64>, String> {
    let arr = v.as_array().ok_or_else(|| format!("expected an array of quantities, e.g. [\"1 {}\"]", unit.symbol()))?;
    let mut out = Vec::with_capacity(arr.len());
    for (i, item) in arr.iter().enumerate() {
        let x = quantity(item, unit).map_err(|e| format!("entry {}: {e}", i + 1))?;
        check.test(x).map_err(|e| format!("entry {}: {e}", i + 1))?;
        out.push(x);
    }
    if out.is_empty() {
        return Err("must not be empty".into());
    }
    Ok(out)
}

fn choice<T: Copy>(v: &toml::Value, options: &[(&str, T)]) -> Result<T, String> {
    let s = string(v)?;
    options.iter().find(|(n, _)| *n == s).map(|(_, t)| *t).ok_or_else(|| {
        let names: Vec<_> = options.iter().map(|(n, _)| format!("{n:?}")).collect();
        format!("{s:?} is not one of {}", names.join(", "))
    })
}

const INERTIA: [(&str, InertiaConfig); 2] = [("zero", InertiaConfig::Zero), ("low", InertiaConfig::Low)];
const MODES: [(&str, ModeSelection); 3] =
    [("emt", ModeSelection::Emt), ("phasor", ModeSelection::Phasor), ("both", ModeSelection::Both)];
const RESISTANCE: [(&str, ResistanceSource); 2] =
    [("tabulated", ResistanceSource::Tabulated), ("kelvin", ResistanceSource::Kelvin)];
const TRANSFORMER: [(&str, TransformerCostSource); 2] =
    [("tabulated", TransformerCostSource::Tabulated), ("modelled", TransformerCostSource::Modelled)];

/// Parses and validates a configuration document. All problems are reported
/// together.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError { errors: vec![format!("syntax: {e}")] })?;
    let mut errs = vec![];
    let mut cfg = RunConfig::default();
    let fields = fields();

    let empty = toml::Table::new();
    let mut tables = std::collections::BTreeMap::new();
    for (name, v) in &doc {
        match (SECTIONS.contains(&name.as_str()), v.as_table()) {
            (true, Some(t)) => {
                tables.insert(name.as_str(), t);
            }
            (true, None) => errs.push(format!("[{name}] must be a table")),
            (false, _) => errs.push(format!("unknown section [{name}]")),
        }
    }
    let table = |s: &str| *tables.get(s).unwrap_or(&&empty);

    for s in SECTIONS {
        for key in table(s).keys() {
            let known = fields.iter().any(|f| f.section == s && f.key == key) || SPECIAL.contains(&(s, key.as_str()));
            if !known {
                errs.push(format!("[{s}] unknown key {key:?}"));
            }
        }
    }

    for f in &fields {
        let Some(v) = table(f.section).get(f.key) else { continue };
        let parsed = match f.kind {
            Quantity(u) => quantity(v, u),
            Number => number(v),
            Count => count(v),
        };
        match parsed.and_then(|x| f.check.test(x).map(|_| x).map_err(|e| format!("{} ({})", e, fmt_value(f.kind, x)))) {
            Ok(x) => (f.set)(&mut cfg, x),
            Err(e) => errs.push(format!("[{}] {}: {e}", f.section, f.key)),
        }
    }

    let net = table("network");
    let sys = &mut cfg.scenario.system;
    let mut err = |key: &str, section: &str, e: String| errs.push(format!("[{section}] {key}: {e}"));
    if let Some(v) = net.get("farm_distances") {
        match quantity_list(v, Km, Positive) {
            Ok(d) => {
                if !net.contains_key("wind_power") {
                    sys.wind_power_mw = vec![sys.wind_power_mw[0]; d.len()];
                }
                sys.layout.farm_distances_km = d;
            }
            Err(e) => err("farm_distances", "network", e),
        }
    }
    if let Some(v) = net.get("wind_power") {
        match quantity_list(v, Mw, NonNegative) {
            Ok(p) => sys.wind_power_mw = p,
            Err(e) => err("wind_power", "network", e),
        }
    }
    if let Some(v) = net.get("cable_r_series") {
        match quantity(v, MohmPerKm).and_then(|x| Positive.test(x).map(|_| x)) {
            Ok(x) => sys.layout.cable.r_series_mohm_per_km = Some(x),
            Err(e) => err("cable_r_series", "network", e),
        }
    }

    let sc = table("scenario");
    if let Some(v) = sc.get("inertia") {
        match choice(v, &INERTIA) {
            Ok(i) => sys.inertia = i,
            Err(e) => err("inertia", "scenario", e),
        }
    }
    if let Some(v) = sc.get("mode") {
        match choice(v, &MODES) {
            Ok(m) => cfg.scenario.mode = m,
            Err(e) => err("mode", "scenario", e),
        }
    }
    let id = match sc.get("scenario") {
        None => Some(cfg.scenario.scenario.id()),
        Some(v) => match string(v) {
            Ok(s) if ScenarioKind::IDS.contains(&s) => ScenarioKind::IDS.iter().copied().find(|i| *i == s),
            Ok(s) => {
                err("scenario", "scenario", format!("{s:?} is not one of {}", ScenarioKind::IDS.join(", ")));
                None
            }
            Err(e) => {
                err("scenario", "scenario", e);
                None
            }
        },
    };
    if let Some(id) = id {
        let uses = |key: &str| match key {
            "request" => id == ScenarioKind::IDS[0],
            "link" => id != ScenarioKind::IDS[2],
            _ => id == ScenarioKind::IDS[2],
        };
        for key in ["request", "link", "farm"] {
            if sc.contains_key(key) && !uses(key) {
                err(key, "scenario", format!("not used by {id}"));
            }
        }
        let mut index = |key: &str, default: usize| match sc.get(key) {
            None => default,
            Some(v) => match count(v) {
                Ok(x) => x as usize,
                Err(e) => {
                    err(key, "scenario", e);
                    default
                }
            },
        };
        cfg.scenario.scenario = match id {
            "s1-power-request" => {
                let link = index("link", 1);
                let mw = match sc.get("request").map(|v| quantity(v, Mw)) {
                    None => 200.0,
                    Some(Ok(x)) => x,
                    Some(Err(e)) => {
                        err("request", "scenario", e);
                        200.0
                    }
                };
                ScenarioKind::PowerRequest { mw, link }
            }
            "s2-converter-trip" => ScenarioKind::ConverterTrip { link: index("link", 1) },
            _ => {
                let furthest = furthest_farm(&sys.layout.farm_distances_km);
                ScenarioKind::WindfarmTrip { farm: index("farm", furthest) }
            }
        };
    }

    let tco = table("tco");
    let a = &mut cfg.tco.assumptions;
    if let Some(v) = tco.get("resistance") {
        match choice(v, &RESISTANCE) {
            Ok(r) => a.resistance = r,
            Err(e) => err("resistance", "tco", e),
        }
    }
    if let Some(v) = tco.get("transformer_cost") {
        match choice(v, &TRANSFORMER) {
            Ok(t) => a.transformer_cost = t,
            Err(e) => err("transformer_cost", "tco", e),
        }
    }
    let pf = match tco.get("power_factor").map(|v| number(v).and_then(|x| Check::Fraction.test(x).map(|_| x))) {
        None => None,
        Some(Ok(x)) if x > 0.0 => Some(x),
        Some(Ok(_)) => {
            err("power_factor", "tco", "must be > 0".into());
            None
        }
        Some(Err(e)) => {
            err("power_factor", "tco", e);
            None
        }
    };
    match tco.get("cable_loading").map(|v| choice(v, &[("rated", false), ("shared", true)])) {
        None => {
            if pf.is_some() {
                err("power_factor", "tco", "only used with cable_loading = \"shared\"".into());
            }
        }
        Some(Ok(false)) => {
            a.cable_loading = CableLoading::Rated;
            if pf.is_some() {
                err("power_factor", "tco", "only used with cable_loading = \"shared\"".into());
            }
        }
        Some(Ok(true)) => a.cable_loading = CableLoading::Shared { power_factor: pf.unwrap_or(0.95) },
        Some(Err(e)) => err("cable_loading", "tco", e),
    }

    if errs.is_empty() {
        errs.extend(cfg.scenario.check());
        if cfg.tco.max_distance_km < cfg.tco.step_km {
            errs.push("[tco] max_distance must be at least one step".into());
        }
    }
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { errors: errs })
    }
}

fn fmt_value(kind: Kind, x: f64) -> String {
    match kind {
        Quantity(u) => format!("{x} {}", u.symbol()),
        Number => format!("{x}"),
        Count => format!("{}", x as i64),
    }
}

fn toml_value(kind: Kind, x: f64) -> String {
    match kind {
        Quantity(u) => format!("\"{x} {}\"", u.symbol()),
        Number => format!("{x:?}"),
        Count => format!("{}", x as i64),
    }
}

fn name_of<T: PartialEq>(options: &[(&'static str, T)], v: &T) -> &'static str {
    options.iter().find(|(_, t)| t == v).map(|(n, _)| *n).expect("value listed")
}

fn list(xs: &[f64], unit: Unit) -> String {
    let items: Vec<_> = xs.iter().map(|x| format!("\"{x} {}\"", unit.symbol())).collect();
    format!("[{}]", items.join(", "))
}

/// Writes every setting. `parse_config(&serialize_config(c))` reproduces `c`.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let fields = fields();
    let mut out = String::new();
    let sys = &cfg.scenario.system;
    for (i, s) in SECTIONS.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "[{s}]");
        match *s {
            "network" => {
                let _ = writeln!(out, "farm_distances = {}", list(&sys.layout.farm_distances_km, Km));
                let _ = writeln!(out, "wind_power = {}", list(&sys.wind_power_mw, Mw));
                let r = sys.layout.cable.r_series_mohm_per_km.unwrap_or(sys.layout.cable.r_dc_mohm_per_km);
                let _ = writeln!(out, "cable_r_series = \"{r} {}\"", MohmPerKm.symbol());
            }
            "scenario" => {
                let _ = writeln!(out, "scenario = \"{}\"", cfg.scenario.scenario.id());
                let _ = writeln!(out, "inertia = \"{}\"", name_of(&INERTIA, &sys.inertia));
                let _ = writeln!(out, "mode = \"{}\"", name_of(&MODES, &cfg.scenario.mode));
                match &cfg.scenario.scenario {
                    ScenarioKind::PowerRequest { mw, link } => {
                        let _ = writeln!(out, "request = \"{mw} MW\"\nlink = {link}");
                    }
                    ScenarioKind::ConverterTrip { link } => {
                        let _ = writeln!(out, "link = {link}");
                    }
                    ScenarioKind::WindfarmTrip { farm } => {
                        let _ = writeln!(out, "farm = {farm}");
                    }
                }
            }
            "tco" => {
                let a = &cfg.tco.assumptions;
                let _ = writeln!(out, "resistance = \"{}\"", name_of(&RESISTANCE, &a.resistance));
                let _ = writeln!(out, "transformer_cost = \"{}\"", name_of(&TRANSFORMER, &a.transformer_cost));
                match a.cable_loading {
                    CableLoading::Rated => {
                        let _ = writeln!(out, "cable_loading = \"rated\"");
                    }
                    CableLoading::Shared { power_factor } => {
                        let _ = writeln!(out, "cable_loading = \"shared\"\npower_factor = {power_factor:?}");
                    }
                }
            }
            _ => {}
        }
        for f in fields.iter().filter(|f| f.section == *s) {
            let _ = writeln!(out, "{} = {}", f.key, toml_value(f.kind, (f.get)(cfg)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
    }

    #[test]
    fn defaults_round_trip() {
        let text = serialize_config(&RunConfig::default());
        let back = parse_config(&text).unwrap();
        assert_eq!(back, RunConfig::default());
        assert_eq!(serialize_config(&back), text);
    }

    #[test]
    fn negative_droop_names_key_and_constraint() {
        let err = parse_config("[devices]\ndroop_mp = -0.01\n").unwrap_err();
        assert_eq!(err.errors, vec!["[devices] droop_mp: must be > 0 (-0.01)".to_string()]);
    }

    #[test]
    fn every_error_is_reported() {
        let text = "[network]\ns_base = 1000\nbogus = 1\n[devices]\ngfl_tau_v = \"50 kV\"\n[scenario]\nmode = \"fast\"\nfarm = 2\n[extra]\n";
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.errors.len(), 6, "{:#?}", err.errors);
        let all = err.to_string();
        for needle in ["unknown section [extra]", "unknown key \"bogus\"", "s_base: needs a unit (MVA)", "unit mismatch", "\"fast\" is not one of", "farm: not used by"] {
            assert!(all.contains(needle), "{needle} missing from\n{all}");
        }
    }

    #[test]
    fn units_convert_to_canonical() {
        let cfg = parse_config("[scenario]\ndt_phasor = \"5 ms\"\nt_end = \"3 s\"\n[tco]\nwind_power = \"0.4 GW\"\n").unwrap();
        assert_eq!(cfg.scenario.dt_phasor, 0.005);
        assert_eq!(cfg.scenario.t_end, 3.0);
        assert_eq!(cfg.tco.wind_power_mw, 400.0);
    }

    #[test]
    fn scenario_keys_follow_the_kind() {
        let cfg = parse_config("[network]\nfarm_distances = [\"30 km\", \"5 km\"]\n[scenario]\nscenario = \"s3-windfarm-trip\"\n").unwrap();
        assert_eq!(cfg.scenario.scenario, ScenarioKind::WindfarmTrip { farm: 1 });
        assert_eq!(cfg.scenario.system.wind_power_mw.len(), 2);
        let cfg = parse_config("[scenario]\nrequest = \"-150 MW\"\nlink = 3\n").unwrap();
        assert_eq!(cfg.scenario.scenario, ScenarioKind::PowerRequest { mw: -150.0, link: 3 });
        let err = parse_config("[scenario]\nscenario = \"s2-converter-trip\"\nlink = 7\n").unwrap_err();
        assert!(err.errors[0].contains("link 7 does not exist"), "{err}");
    }

    #[test]
    fn shared_loading_round_trips() {
        let text = "[tco]\ncable_loading = \"shared\"\npower_factor = 0.9\nresistance = \"kelvin\"\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.tco.assumptions.cable_loading, CableLoading::Shared { power_factor: 0.9 });
        assert_eq!(parse_config(&serialize_config(&cfg)).unwrap(), cfg);
        assert!(parse_config("[tco]\npower_factor = 0.9\n").is_err());
    }

    #[test]
    fn syntax_errors_are_reported() {
        let err = parse_config("[network\n").unwrap_err();
        assert!(err.errors[0].starts_with("syntax:"));
    }
}
