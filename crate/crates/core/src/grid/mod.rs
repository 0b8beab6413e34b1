//! Electrical data model: per-unit bases, cables, topology, admittance and
//! steady-state power flow.

mod admittance;
mod cable;
mod network;
mod perunit;
mod powerflow;

pub use admittance::{assemble_admittance, assemble_with, shunt_per_bus};
pub use cable::{build_pi_chain, default_sections, CableSpec, PiSection};
pub use network::{
    Attachment, Bus, BusKind, CableInfo, DeviceKind, HubLayout, Network, Transformer, HUB_BUS, ZONE,
};
pub use perunit::{PerUnitBase, Quantity, VoltageZone};
pub use powerflow::{injections, power_flow, power_flow_with, BusSetpoint, OperatingPoint};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("invalid per-unit base: {0}")]
    InvalidBase(String),
    #[error("unknown voltage zone `{0}`")]
    UnknownZone(String),
    #[error("invalid cable: {0}")]
    InvalidCable(String),
    #[error("unknown bus {0}")]
    UnknownBus(usize),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("bus {0} has no branch and no shunt (singular admittance matrix)")]
    SingularAdmittance(usize),
    #[error("power flow diverged after {iterations} iterations (mismatch {mismatch:.3e} pu)")]
    Diverged { iterations: usize, mismatch: f64 },
    #[error("infeasible operating point: {0}")]
    Infeasible(String),
}
