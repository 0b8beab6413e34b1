//! Dynamic device models. Every model is a pure function of its state and
//! terminal quantities; the simulation engine owns the state vectors.
//!
//! Conventions: all network quantities are complex phasors in a frame rotating
//! at nominal frequency, on the system power base. Converter powers are
//! *absorbed* from the AC grid (positive = exported over HVDC); every device
//! also reports the current it injects into its bus (`i_inj`).

mod central;
mod gfl;
mod gfm;
mod hvdc;
mod onshore;
mod sc;
mod windfarm;

pub use central::{central_controller_step, CentralFreqController};
pub use gfl::{gfl_derivatives, gfl_equilibrium, GflInputs, GflOutput, GflParams, GflState};
pub use gfm::{gfm_derivatives, gfm_equilibrium, GfmInputs, GfmOutput, GfmParams, GfmState};
pub use hvdc::{check_dc_voltage, hvdc_derivatives, DcUndervoltage, HvdcOutput, HvdcParams, HvdcState};
pub use onshore::{onshore_derivatives, OnshoreOutput, OnshoreParams, OnshoreState};
pub use sc::{sc_derivatives, sc_equilibrium, ScOutput, ScParams, ScState};
pub use windfarm::{windfarm_derivatives, windfarm_equilibrium, windfarm_reference, WindFarmOutput, WindFarmParams, WindFarmState};

use num_complex::Complex64;

/// Modelling fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fidelity {
    /// Network L/C and fast converter loops as dynamic phasors.
    Emt,
    /// Algebraic network at nominal frequency, fast loops neglected.
    Phasor,
}

impl Fidelity {
    pub fn name(self) -> &'static str {
        match self {
            Fidelity::Emt => "emt",
            Fidelity::Phasor => "phasor",
        }
    }
}

/// System constants shared by all device models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemBase {
    pub s_base_mva: f64,
    pub omega_b: f64,
    pub f_base_hz: f64,
}

impl Default for SystemBase {
    fn default() -> Self {
        Self { s_base_mva: 1000.0, omega_b: 2.0 * std::f64::consts::PI * 50.0, f_base_hz: 50.0 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeviceError {
    #[error("{0}: non-finite input")]
    NonFinite(&'static str),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub(crate) fn check_finite(what: &'static str, values: &[f64]) -> Result<(), DeviceError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(DeviceError::NonFinite(what))
    }
}

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Scales `i` onto the circle of radius `limit` if it lies outside.
pub fn clamp_magnitude(i: Complex64, limit: f64) -> (Complex64, bool) {
    let m = i.norm();
    if m > limit {
        (i * (limit / m), true)
    } else {
        (i, false)
    }
}
