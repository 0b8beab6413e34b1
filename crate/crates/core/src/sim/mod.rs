//! Time-domain simulation: generic DAE interface, fixed-step trapezoidal
//! integrator, the assembled hub system, events, traces and linearization.

mod events;
mod integrator;
mod linearize;
mod run;
mod system;
mod trace;

pub use events::{Event, EventKind};
pub use integrator::{fd_jacobian, solve_algebraic, SolverOptions, StepStats, Trapezoidal};
pub use linearize::{linearize, linearize_with, match_modes, Eigenmode, SmallSignal};
pub use run::RunStats;
pub use system::{InertiaConfig, Observables, SimSystem, StateKind, SystemConfig};
pub use trace::Trace;

use crate::devices::DeviceError;
use crate::grid::GridError;

/// Semi-explicit DAE `x' = f(x)` on differential rows, `0 = f(x)` on
/// algebraic rows.
pub trait Dynamics {
    fn dim(&self) -> usize;
    fn algebraic(&self) -> &[bool];
    fn rhs(&self, x: &[f64], f: &mut [f64]) -> Result<(), SimError>;
    /// Tangent of a continuous symmetry of `f` at `x`, if any. Used to deflate
    /// the resulting neutral mode in small-signal analysis.
    fn rotation(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
    /// States excluded from small-signal analysis (frozen after a trip).
    fn excluded(&self) -> Vec<bool> {
        vec![false; self.dim()]
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("Newton iteration failed at t = {t:.6} s (residual {residual:.3e})")]
    NewtonFailed { t: f64, residual: f64 },
    #[error("singular iteration matrix at t = {t:.6} s")]
    Singular { t: f64 },
    #[error("device {0} is islanded from the hub")]
    Islanded(String),
    #[error("unknown event target {0}")]
    UnknownTarget(String),
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("HVDC link {link}: DC voltage {v:.3} pu below trip threshold at t = {t:.4} s")]
    DcUndervoltage { link: usize, v: f64, t: f64 },
    #[error("initialization failed: {0}")]
    Init(String),
    #[error("state is not an equilibrium (derivative norm {0:.3e})")]
    NotEquilibrium(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
}
