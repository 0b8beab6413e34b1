//! Total cost of ownership of the collection/transmission options.

use super::costs::{annuity_total, cable_supply_cost, platform_cost, CABLE_INSTALL_MEUR_PER_KM};
use super::losses::{annual_energy_loss, full_load_loss, loss_cost};
use super::transformer::{
    transformer_design, ReferenceTransformer, STEP_220_400, STEP_66_220, STEP_66_400, TURBINE_0_67_66,
};
use super::{ConductorModel, TechnoError};
use crate::grid::CableSpec;

pub const F_LOW: f64 = 50.0 / 3.0;
pub const F_NOMINAL: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CollectionVoltage {
    Kv66,
    Kv220,
}

impl CollectionVoltage {
    pub fn kv(self) -> f64 {
        match self {
            Self::Kv66 => 66.0,
            Self::Kv220 => 220.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridFrequency {
    Low,
    Nominal,
}

impl GridFrequency {
    pub fn hz(self) -> f64 {
        match self {
            Self::Low => F_LOW,
            Self::Nominal => F_NOMINAL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOption {
    pub voltage: CollectionVoltage,
    pub frequency: GridFrequency,
    pub wind_power_mw: f64,
    pub distance_km: f64,
}

impl GridOption {
    pub const ALL: [(CollectionVoltage, GridFrequency); 4] = [
        (CollectionVoltage::Kv66, GridFrequency::Nominal),
        (CollectionVoltage::Kv66, GridFrequency::Low),
        (CollectionVoltage::Kv220, GridFrequency::Nominal),
        (CollectionVoltage::Kv220, GridFrequency::Low),
    ];

    pub fn new(voltage: CollectionVoltage, frequency: GridFrequency, distance_km: f64) -> Self {
        Self { voltage, frequency, wind_power_mw: 400.0, distance_km }
    }

    pub fn label(&self) -> String {
        option_label(self.voltage, self.frequency)
    }
}

pub fn option_label(v: CollectionVoltage, f: GridFrequency) -> String {
    let f = match f {
        GridFrequency::Low => "16.67Hz",
        GridFrequency::Nominal => "50Hz",
    };
    format!("{}kV_{f}", v.kv())
}

/// Where the AC resistance used for the loss term comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResistanceSource {
    /// Published per-frequency resistances (29.5 / 29.7 / 34.9 mΩ/km).
    Tabulated,
    /// Solid-cylinder skin-effect model.
    Kelvin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformerCostSource {
    /// Published active-material costs.
    Tabulated,
    /// Calibrated parametric design.
    Modelled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CableLoading {
    /// Every parallel cable carries its rated current during full-load hours.
    Rated,
    /// The wind power is shared equally at the given power factor.
    Shared { power_factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcoAssumptions {
    pub turbine_mva: f64,
    pub years: u32,
    pub interest_rate: f64,
    pub price_eur_per_mwh: f64,
    pub utilization: f64,
    pub resistance: ResistanceSource,
    pub transformer_cost: TransformerCostSource,
    pub cable_loading: CableLoading,
}

impl Default for TcoAssumptions {
    fn default() -> Self {
        Self {
            turbine_mva: 10.0,
            years: 20,
            interest_rate: 0.02,
            price_eur_per_mwh: 30.0,
            utilization: 0.5,
            resistance: ResistanceSource::Tabulated,
            transformer_cost: TransformerCostSource::Tabulated,
            cable_loading: CableLoading::Rated,
        }
    }
}

/// Itemised cost of ownership, M€.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub transformers: f64,
    pub platform: f64,
    pub cables_supply: f64,
    pub cables_install: f64,
    pub losses_20yr: f64,
    pub financing: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn capex(&self) -> f64 {
        self.transformers + self.platform + self.cables_supply + self.cables_install
    }
}

/// Tabulated AC resistance of the 630 mm² conductor in mΩ/km.
pub fn tabulated_resistance(f_hz: f64) -> f64 {
    if f_hz <= 0.0 {
        29.5
    } else if f_hz < 30.0 {
        29.7
    } else {
        34.9
    }
}

pub fn resistance(source: ResistanceSource, f_hz: f64) -> f64 {
    match source {
        ResistanceSource::Tabulated => tabulated_resistance(f_hz),
        ResistanceSource::Kelvin => ConductorModel::copper_630().ac_resistance(f_hz),
    }
}

fn transformer_cost(t: &ReferenceTransformer, f_hz: f64, a: &TcoAssumptions) -> Result<f64, TechnoError> {
    Ok(match a.transformer_cost {
        TransformerCostSource::Tabulated => t.cost_at(f_hz),
        TransformerCostSource::Modelled => transformer_design(&t.spec(f_hz))?.cost_meur,
    })
}

pub fn tco(option: &GridOption) -> Result<CostBreakdown, TechnoError> {
    tco_with(option, &TcoAssumptions::default())
}

pub fn tco_with(option: &GridOption, a: &TcoAssumptions) -> Result<CostBreakdown, TechnoError> {
    if !(option.distance_km >= 0.0) {
        return Err(TechnoError::InvalidInput(format!("distance must be >= 0, got {}", option.distance_km)));
    }
    if !(option.wind_power_mw > 0.0) {
        return Err(TechnoError::InvalidInput("wind power must be > 0".into()));
    }
    let f = option.frequency.hz();
    let v = option.voltage.kv();
    let cable = match option.voltage {
        CollectionVoltage::Kv66 => CableSpec::mv_66kv(),
        CollectionVoltage::Kv220 => CableSpec::hv_220kv(),
    };

    let n_turbines = (option.wind_power_mw / a.turbine_mva).ceil();
    let mut transformers = n_turbines * transformer_cost(&TURBINE_0_67_66, f, a)?;
    let mut platform = 0.0;
    match option.voltage {
        CollectionVoltage::Kv66 => transformers += transformer_cost(&STEP_66_400, f, a)?,
        CollectionVoltage::Kv220 => {
            transformers += transformer_cost(&STEP_66_220, f, a)? + transformer_cost(&STEP_220_400, f, a)?;
            platform = platform_cost(f)?.total();
        }
    }

    let n_cables = (option.wind_power_mw / cable.s_rated_mva).ceil();
    let d = option.distance_km;
    let cables_supply = n_cables * d * cable_supply_cost(v)?;
    let cables_install = n_cables * d * CABLE_INSTALL_MEUR_PER_KM;

    let current = match a.cable_loading {
        CableLoading::Rated => cable.i_rated_ka,
        CableLoading::Shared { power_factor } => {
            option.wind_power_mw / (n_cables * 3f64.sqrt() * v * power_factor)
        }
    };
    let per_cable = loss_cost(
        annual_energy_loss(full_load_loss(current, resistance(a.resistance, f)), a.utilization),
        a.years as f64,
        a.price_eur_per_mwh,
    );
    let losses_20yr = n_cables * d * per_cable;

    let capex = transformers + platform + cables_supply + cables_install;
    let financing = annuity_total(capex, a.interest_rate, a.years)? - capex;
    Ok(CostBreakdown {
        transformers,
        platform,
        cables_supply,
        cables_install,
        losses_20yr,
        financing,
        total: capex + losses_20yr + financing,
    })
}

/// One row per distance with the total cost of each option.
#[derive(Debug, Clone, PartialEq)]
pub struct TcoSweep {
    pub distances_km: Vec<f64>,
    pub labels: Vec<String>,
    pub totals: Vec<Vec<f64>>,
}

impl TcoSweep {
    /// Index (into `labels`) of the cheapest option at each distance.
    pub fn argmin(&self) -> Vec<usize> {
        self.totals
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap_or(0)
            })
            .collect()
    }
}

pub fn tco_sweep(
    wind_power_mw: f64,
    max_km: f64,
    step_km: f64,
    a: &TcoAssumptions,
) -> Result<TcoSweep, TechnoError> {
    if !(step_km > 0.0) {
        return Err(TechnoError::InvalidInput("sweep step must be > 0".into()));
    }
    let n = (max_km / step_km).round() as usize;
    let mut out = TcoSweep {
        distances_km: Vec::with_capacity(n + 1),
        labels: GridOption::ALL.iter().map(|&(v, f)| option_label(v, f)).collect(),
        totals: Vec::with_capacity(n + 1),
    };
    for k in 0..=n {
        let d = k as f64 * step_km;
        let mut row = Vec::with_capacity(4);
        for &(v, f) in &GridOption::ALL {
            let opt = GridOption { voltage: v, frequency: f, wind_power_mw, distance_km: d };
            row.push(tco_with(&opt, a)?.total);
        }
        out.distances_km.push(d);
        out.totals.push(row);
    }
    Ok(out)
}

/// Distance where option `a` stops being cheaper than option `b` (linear
/// interpolation between sweep points), if it happens inside the sweep.
pub fn crossover(sweep: &TcoSweep, a: usize, b: usize) -> Option<f64> {
    let diff: Vec<f64> = sweep.totals.iter().map(|r| r[a] - r[b]).collect();
    for k in 1..diff.len() {
        if diff[k - 1] < 0.0 && diff[k] >= 0.0 {
            let (x0, x1) = (sweep.distances_km[k - 1], sweep.distances_km[k]);
            return Some(x0 + (x1 - x0) * (-diff[k - 1]) / (diff[k] - diff[k - 1]));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_distance_has_no_cable_terms() {
        let c = tco(&GridOption::new(CollectionVoltage::Kv66, GridFrequency::Nominal, 0.0)).unwrap();
        assert_eq!(c.cables_supply + c.cables_install + c.losses_20yr, 0.0);
        assert_eq!(c.platform, 0.0);
        assert!((c.total - (c.transformers + c.financing)).abs() < 1e-12);
        // 40 turbine units + hub transformer, financed over 20 years at 2%
        let capex = 40.0 * 0.04 + 1.64;
        assert!((c.total - annuity_total(capex, 0.02, 20).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn breakdown_sums() {
        for &(v, f) in &GridOption::ALL {
            let c = tco(&GridOption::new(v, f, 37.0)).unwrap();
            let sum = c.capex() + c.losses_20yr + c.financing;
            assert!((sum - c.total).abs() < 1e-9);
            for x in [c.transformers, c.platform, c.cables_supply, c.cables_install, c.losses_20yr, c.financing] {
                assert!(x >= 0.0);
            }
        }
        assert!(tco(&GridOption::new(CollectionVoltage::Kv66, GridFrequency::Low, -1.0)).is_err());
    }

    #[test]
    fn monotone_and_few_argmin_changes() {
        for a in [TcoAssumptions::default(), TcoAssumptions { resistance: ResistanceSource::Kelvin, ..Default::default() }] {
            let s = tco_sweep(400.0, 100.0, 0.5, &a).unwrap();
            for k in 1..s.totals.len() {
                for j in 0..4 {
                    assert!(s.totals[k][j] >= s.totals[k - 1][j]);
                }
            }
            let am = s.argmin();
            let changes = am.windows(2).filter(|w| w[0] != w[1]).count();
            assert!(changes <= 2);
        }
    }

    #[test]
    fn shared_loading_reduces_losses() {
        let opt = GridOption::new(CollectionVoltage::Kv66, GridFrequency::Nominal, 30.0);
        let rated = tco(&opt).unwrap();
        let shared = tco_with(&opt, &TcoAssumptions { cable_loading: CableLoading::Shared { power_factor: 0.95 }, ..Default::default() }).unwrap();
        assert!(shared.losses_20yr < rated.losses_20yr);
    }
}
