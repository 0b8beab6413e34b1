//! Centralized integral frequency controller acting on the condenser speed.

use super::DeviceError;

#[derive(Debug, Clone, PartialEq)]
pub struct CentralFreqController {
    /// pu power per pu frequency per second, system base
    pub k_c: f64,
    pub alpha: Vec<f64>,
    /// integral of K_c · Δω
    pub z: f64,
}

impl CentralFreqController {
    /// Equal participation over `n` converters.
    pub fn equal(k_c: f64, n: usize) -> Self {
        Self { k_c, alpha: vec![1.0 / n as f64; n], z: 0.0 }
    }

    pub fn new(k_c: f64, alpha: Vec<f64>) -> Result<Self, DeviceError> {
        let sum: f64 = alpha.iter().sum();
        if alpha.iter().any(|a| *a < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(DeviceError::InvalidParameter { name: "alpha", reason: format!("must be >= 0 and sum to 1 (sum {sum})") });
        }
        Ok(Self { k_c, alpha, z: 0.0 })
    }

    /// Re-normalizes the participation factors over units still in service.
    pub fn renormalize(&mut self, in_service: &[bool]) {
        for (a, on) in self.alpha.iter_mut().zip(in_service) {
            if !on {
                *a = 0.0;
            }
        }
        let s: f64 = self.alpha.iter().sum();
        if s > 0.0 {
            self.alpha.iter_mut().for_each(|a| *a /= s);
        }
    }

    pub fn derivative(&self, dw_sc: f64) -> f64 {
        self.k_c * dw_sc
    }

    pub fn corrections_for(&self, z: f64) -> Vec<f64> {
        self.alpha.iter().map(|a| a * z).collect()
    }
}

/// Advances the integral over `dt` with constant `dw_sc` and returns the
/// per-converter corrections.
pub fn central_controller_step(state: &mut CentralFreqController, dw_sc: f64, dt: f64) -> Vec<f64> {
    state.z += state.k_c * dw_sc * dt;
    state.corrections_for(state.z)
}
