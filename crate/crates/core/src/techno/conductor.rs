//! Solid round conductor: skin depth and AC resistance.

use std::f64::consts::PI;

use super::TechnoError;

pub const MU0: f64 = 4.0e-7 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConductorModel {
    pub area_mm2: f64,
    pub radius_mm: f64,
    /// Ω·m
    pub resistivity: f64,
    /// H/m
    pub permeability: f64,
}

impl ConductorModel {
    /// Resistivity back-computed from a DC resistance and cross-section.
    pub fn from_dc(r_dc_mohm_per_km: f64, area_mm2: f64, diameter_mm: f64) -> Self {
        // mΩ/km = 1e-6 Ω/m; mm² = 1e-6 m²
        let resistivity = r_dc_mohm_per_km * 1e-6 * area_mm2 * 1e-6;
        Self { area_mm2, radius_mm: diameter_mm / 2.0, resistivity, permeability: MU0 }
    }

    /// 630 mm², 28.3 mm copper conductor with 29.5 mΩ/km DC resistance.
    pub fn copper_630() -> Self {
        Self::from_dc(29.5, 630.0, 28.3)
    }

    pub fn r_dc(&self) -> f64 {
        self.resistivity / (self.area_mm2 * 1e-6) * 1e6
    }

    /// Skin depth in mm, `δ = √(ρ / (π f µ))`.
    pub fn skin_depth(&self, f_hz: f64) -> Result<f64, TechnoError> {
        if !(f_hz > 0.0) {
            return Err(TechnoError::InvalidInput(format!("frequency must be > 0, got {f_hz}")));
        }
        Ok((self.resistivity / (PI * f_hz * self.permeability)).sqrt() * 1e3)
    }

    /// AC resistance in mΩ/km from the exact solid-cylinder ratio.
    pub fn ac_resistance(&self, f_hz: f64) -> f64 {
        if f_hz <= 0.0 {
            return self.r_dc();
        }
        let delta = self.skin_depth(f_hz).expect("positive frequency");
        let x = std::f64::consts::SQRT_2 * self.radius_mm / delta;
        self.r_dc() * kelvin_ratio(x)
    }
}

/// `R_ac / R_dc` of a solid round wire with `x = √2 r / δ`:
/// `(x/2) (ber·bei' − bei·ber') / (ber'² + bei'²)`.
pub fn kelvin_ratio(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x > 30.0 {
        // asymptotic; the power series loses precision here
        return x / (2.0 * std::f64::consts::SQRT_2) + 0.25;
    }
    let k = kelvin(x);
    0.5 * x * (k.ber * k.dbei - k.bei * k.dber) / (k.dber * k.dber + k.dbei * k.dbei)
}

#[derive(Debug, Clone, Copy)]
pub struct Kelvin {
    pub ber: f64,
    pub bei: f64,
    pub dber: f64,
    pub dbei: f64,
}

/// Kelvin functions of order zero and their derivatives by power series.
pub fn kelvin(x: f64) -> Kelvin {
    let h = x / 2.0;
    let (mut ber, mut bei, mut dber, mut dbei) = (0.0, 0.0, 0.0, 0.0);
    // term_k = (x/2)^{2m} / (m!)^2 with m = 2k (ber) or 2k+1 (bei)
    let mut fact = 1.0f64; // m!
    let mut pow = 1.0f64; // h^{2m}
    for m in 0..200usize {
        if m > 0 {
            fact *= m as f64;
            pow *= h * h;
        }
        let term = pow / (fact * fact);
        let dterm = if m > 0 { m as f64 * pow / h / (fact * fact) } else { 0.0 };
        let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if m % 2 == 0 {
            ber += sign * term;
            dber += sign * dterm;
        } else {
            bei += sign * term;
            dbei += sign * dterm;
        }
        if m > 4 && term < 1e-18 * (ber.abs() + bei.abs()) {
            break;
        }
    }
    Kelvin { ber, bei, dber, dbei }
}
