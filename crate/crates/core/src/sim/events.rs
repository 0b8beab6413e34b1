//! Discrete events applied at step boundaries.

use super::SimError;

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    /// Adds `delta` (system pu) to a setpoint: converters `p`, `q`, `v`;
    /// wind farms `p`; condensers `v`.
    SetpointStep { device: String, field: String, delta: f64 },
    DeviceTrip { device: String },
    /// Opens every section of the named cable.
    BranchTrip { branch: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

impl Event {
    pub fn setpoint(time: f64, device: &str, field: &str, delta: f64) -> Self {
        Self { time, kind: EventKind::SetpointStep { device: device.into(), field: field.into(), delta } }
    }

    pub fn trip(time: f64, device: &str) -> Self {
        Self { time, kind: EventKind::DeviceTrip { device: device.into() } }
    }

    pub fn branch_trip(time: f64, branch: &str) -> Self {
        Self { time, kind: EventKind::BranchTrip { branch: branch.into() } }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            EventKind::SetpointStep { device, field, delta } => format!("setpoint {device}.{field} {delta:+}"),
            EventKind::DeviceTrip { device } => format!("trip {device}"),
            EventKind::BranchTrip { branch } => format!("open {branch}"),
        }
    }

    pub fn validate(&self, t_end: f64) -> Result<(), SimError> {
        if !(self.time >= 0.0 && self.time < t_end) {
            return Err(SimError::InvalidEvent(format!("{} at {} s outside [0, {t_end})", self.describe(), self.time)));
        }
        if let EventKind::SetpointStep { delta, .. } = &self.kind {
            if !delta.is_finite() {
                return Err(SimError::InvalidEvent(self.describe()));
            }
        }
        Ok(())
    }
}
