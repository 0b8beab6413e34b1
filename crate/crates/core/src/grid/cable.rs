//! Cable data and π-section chains.

use super::{GridError, PerUnitBase};

/// Three-core AC export cable data.
#[derive(Debug, Clone, PartialEq)]
pub struct CableSpec {
    pub v_rated_kv: f64,
    pub s_rated_mva: f64,
    pub i_rated_ka: f64,
    pub conductor_area_mm2: f64,
    pub conductor_diameter_mm: f64,
    pub r_dc_mohm_per_km: f64,
    pub c_uf_per_km: f64,
    pub l_mh_per_km: f64,
    /// Series resistance used in the network model; `None` means `r_dc`.
    pub r_series_mohm_per_km: Option<f64>,
}

impl CableSpec {
    /// 220 kV, 400 MVA, 630 mm² copper export cable.
    pub fn hv_220kv() -> Self {
        Self {
            v_rated_kv: 220.0,
            s_rated_mva: 400.0,
            i_rated_ka: 1.05,
            conductor_area_mm2: 630.0,
            conductor_diameter_mm: 28.3,
            r_dc_mohm_per_km: 29.5,
            c_uf_per_km: 0.2,
            l_mh_per_km: 0.38,
            r_series_mohm_per_km: None,
        }
    }

    /// 66 kV, 120 MVA variant of the same conductor.
    pub fn mv_66kv() -> Self {
        Self { v_rated_kv: 66.0, s_rated_mva: 120.0, ..Self::hv_220kv() }
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let fields = [
            ("v_rated", self.v_rated_kv),
            ("s_rated", self.s_rated_mva),
            ("i_rated", self.i_rated_ka),
            ("conductor_area", self.conductor_area_mm2),
            ("conductor_diameter", self.conductor_diameter_mm),
            ("r_dc_per_km", self.r_dc_mohm_per_km),
            ("c_per_km", self.c_uf_per_km),
            ("l_per_km", self.l_mh_per_km),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(GridError::InvalidCable(format!("{name} must be positive, got {v}")));
            }
        }
        let s = 3f64.sqrt() * self.v_rated_kv * self.i_rated_ka;
        if (s - self.s_rated_mva).abs() > 0.05 * self.s_rated_mva {
            return Err(GridError::InvalidCable(format!(
                "√3·V·I = {s:.1} MVA inconsistent with s_rated = {} MVA",
                self.s_rated_mva
            )));
        }
        Ok(())
    }

    fn r_series(&self) -> f64 {
        self.r_series_mohm_per_km.unwrap_or(self.r_dc_mohm_per_km)
    }
}

/// One π-section between two buses, in system per-unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiSection {
    pub from_bus: usize,
    pub to_bus: usize,
    pub r: f64,
    pub x: f64,
    pub b_half: f64,
}

/// Number of sections for a cable of the given length: `ceil(length / km_per_section)`, at least one.
pub fn default_sections(length_km: f64, km_per_section: f64) -> usize {
    ((length_km / km_per_section).ceil() as usize).max(1)
}

/// Splits a cable into `n_sections` identical π-sections with placeholder
/// bus ids `0..=n_sections` (section k runs from bus k to bus k+1).
pub fn build_pi_chain(
    spec: &CableSpec,
    length_km: f64,
    n_sections: usize,
    base: &PerUnitBase,
    zone: &str,
) -> Result<Vec<PiSection>, GridError> {
    if !(length_km > 0.0) {
        return Err(GridError::InvalidCable(format!("length must be > 0, got {length_km}")));
    }
    if n_sections == 0 {
        return Err(GridError::InvalidCable("n_sections must be >= 1".into()));
    }
    spec.validate()?;
    let z_base = base.z_base(zone)?;
    let w = base.omega_base();
    let seg = length_km / n_sections as f64;
    let r = spec.r_series() * 1e-3 * seg / z_base;
    let x = w * spec.l_mh_per_km * 1e-3 * seg / z_base;
    let b = w * spec.c_uf_per_km * 1e-6 * seg * z_base;
    Ok((0..n_sections)
        .map(|k| PiSection { from_bus: k, to_bus: k + 1, r, x, b_half: b / 2.0 })
        .collect())
}
