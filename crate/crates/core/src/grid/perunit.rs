//! Per-unit bases.

use super::GridError;

/// Physical quantity kinds that can be normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Line-to-line voltage in kV.
    Voltage,
    /// Line current in kA.
    Current,
    /// Three-phase power in MVA (MW, MVAr).
    Power,
    /// Impedance in ohm.
    Impedance,
}

/// A named AC voltage zone and its line-to-line base voltage.
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageZone {
    pub name: String,
    pub v_base_kv: f64,
}

/// System-wide per-unit base: one power base, one frequency base and a
/// voltage base per zone.
#[derive(Debug, Clone, PartialEq)]
pub struct PerUnitBase {
    pub s_base_mva: f64,
    pub f_base_hz: f64,
    pub zones: Vec<VoltageZone>,
}

impl Default for PerUnitBase {
    fn default() -> Self {
        Self::new(1000.0, 50.0, &[("offshore", 220.0)]).expect("valid default base")
    }
}

impl PerUnitBase {
    pub fn new(s_base_mva: f64, f_base_hz: f64, zones: &[(&str, f64)]) -> Result<Self, GridError> {
        if !(s_base_mva > 0.0) {
            return Err(GridError::InvalidBase(format!("s_base must be > 0, got {s_base_mva}")));
        }
        if !(f_base_hz > 0.0) {
            return Err(GridError::InvalidBase(format!("f_base must be > 0, got {f_base_hz}")));
        }
        let mut out = Vec::with_capacity(zones.len());
        for (name, v) in zones {
            if !(*v > 0.0) {
                return Err(GridError::InvalidBase(format!("zone {name}: v_base must be > 0")));
            }
            out.push(VoltageZone { name: name.to_string(), v_base_kv: *v });
        }
        Ok(Self { s_base_mva, f_base_hz, zones: out })
    }

    pub fn omega_base(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.f_base_hz
    }

    pub fn v_base(&self, zone: &str) -> Result<f64, GridError> {
        self.zones
            .iter()
            .find(|z| z.name == zone)
            .map(|z| z.v_base_kv)
            .ok_or_else(|| GridError::UnknownZone(zone.to_string()))
    }

    /// Impedance base in ohm, `V² / S`.
    pub fn z_base(&self, zone: &str) -> Result<f64, GridError> {
        let v = self.v_base(zone)?;
        Ok(v * v / self.s_base_mva)
    }

    /// Current base in kA, `S / (√3 V)`.
    pub fn i_base(&self, zone: &str) -> Result<f64, GridError> {
        let v = self.v_base(zone)?;
        Ok(self.s_base_mva / (3f64.sqrt() * v))
    }

    fn base_of(&self, kind: Quantity, zone: &str) -> Result<f64, GridError> {
        match kind {
            Quantity::Voltage => self.v_base(zone),
            Quantity::Current => self.i_base(zone),
            Quantity::Power => {
                // power base is zone independent, but the zone must still exist
                self.v_base(zone)?;
                Ok(self.s_base_mva)
            }
            Quantity::Impedance => self.z_base(zone),
        }
    }

    pub fn to_pu(&self, value: f64, kind: Quantity, zone: &str) -> Result<f64, GridError> {
        Ok(value / self.base_of(kind, zone)?)
    }

    pub fn from_pu(&self, value: f64, kind: Quantity, zone: &str) -> Result<f64, GridError> {
        Ok(value * self.base_of(kind, zone)?)
    }
}
