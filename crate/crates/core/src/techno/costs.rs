//! Cost tables, annuity and wind-area sizing.

use super::TechnoError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformCost {
    pub jacket: f64,
    pub topside: f64,
    pub installation: f64,
}

impl PlatformCost {
    pub fn total(&self) -> f64 {
        self.jacket + self.topside + self.installation
    }
}

const PLATFORM_50HZ: PlatformCost = PlatformCost { jacket: 9.2, topside: 22.0, installation: 7.36 };
const LOW_FREQUENCY_PLATFORM_FACTOR: f64 = 3.0;

/// Offshore AC platform cost in M€ for a 400 MW, 220 kV substation.
pub fn platform_cost(f_hz: f64) -> Result<PlatformCost, TechnoError> {
    if (f_hz - 50.0).abs() < 1e-6 {
        Ok(PLATFORM_50HZ)
    } else if (f_hz - 50.0 / 3.0).abs() < 0.01 {
        let k = LOW_FREQUENCY_PLATFORM_FACTOR;
        Ok(PlatformCost {
            jacket: PLATFORM_50HZ.jacket * k,
            topside: PLATFORM_50HZ.topside * k,
            installation: PLATFORM_50HZ.installation * k,
        })
    } else {
        Err(TechnoError::UnsupportedFrequency(f_hz))
    }
}

/// Cable supply cost in M€/km by voltage level.
pub fn cable_supply_cost(v_kv: f64) -> Result<f64, TechnoError> {
    match v_kv {
        v if (v - 66.0).abs() < 1e-9 => Ok(0.72),
        v if (v - 220.0).abs() < 1e-9 => Ok(1.31),
        v => Err(TechnoError::InvalidInput(format!("no cable cost for {v} kV"))),
    }
}

pub const CABLE_INSTALL_MEUR_PER_KM: f64 = 0.345;

/// Annual annuity payment for `capex` repaid over `years` at `rate`.
pub fn annuity(capex: f64, rate: f64, years: u32) -> f64 {
    let n = years as f64;
    if rate.abs() < 1e-12 {
        return capex / n;
    }
    capex * rate / (1.0 - (1.0 + rate).powf(-n))
}

/// Total repaid over the amortisation period, `n · A`.
pub fn annuity_total(capex: f64, rate: f64, years: u32) -> Result<f64, TechnoError> {
    if rate < 0.0 || years == 0 {
        return Err(TechnoError::InvalidInput("rate must be >= 0 and years >= 1".into()));
    }
    Ok(annuity(capex, rate, years) * years as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindArea {
    pub area_km2: f64,
    pub radius_km: f64,
}

/// Area needed for `p_gw` at `density_w_per_m2` and the radius of the equivalent disc.
pub fn wind_area(p_gw: f64, density_w_per_m2: f64) -> Result<WindArea, TechnoError> {
    if !(density_w_per_m2 > 0.0) {
        return Err(TechnoError::InvalidInput("density must be > 0".into()));
    }
    // GW / (W/m²) = 1e9 m² = 1e3 km²
    let area = p_gw / density_w_per_m2 * 1e3;
    Ok(WindArea { area_km2: area, radius_km: (area / std::f64::consts::PI).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn platform_table() {
        assert!((platform_cost(50.0).unwrap().total() - 38.56).abs() < 1e-12);
        let lf = platform_cost(50.0 / 3.0).unwrap();
        assert!((lf.total() - 115.68).abs() < 1e-9);
        assert!((lf.jacket - 27.6).abs() < 1e-12);
        assert!(platform_cost(60.0).is_err());
    }

    #[test]
    fn annuity_values() {
        assert!((annuity(1.0, 0.02, 20) - 0.06116).abs() < 1e-5);
        assert!((annuity_total(1.0, 0.02, 20).unwrap() - 1.2232).abs() < 1e-4);
        assert!((annuity_total(38.56, 0.02, 20).unwrap() - 47.16).abs() < 0.01);
        assert!((annuity_total(5.0, 0.0, 20).unwrap() - 5.0).abs() < 1e-12);
        assert!(annuity_total(1.0, 0.02, 0).is_err());
    }

    #[test]
    fn wind_areas() {
        let a = wind_area(4.0, 6.0).unwrap();
        assert!((a.area_km2 - 666.7).abs() < 0.1);
        assert!((a.radius_km - 14.57).abs() < 0.01);
        let b = wind_area(36.0, 6.0).unwrap();
        assert!((b.area_km2 - 6000.0).abs() < 1e-9);
        assert!((40.0..=50.0).contains(&b.radius_km));
        assert_eq!(wind_area(0.0, 6.0).unwrap().radius_km, 0.0);
    }
}
