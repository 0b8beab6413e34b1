//! Offshore wind power hub studies: techno-economic sizing of the AC
//! collection grid and dual-fidelity (dynamic-phasor EMT / phasor) simulation
//! of zero- and low-inertia hub configurations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod devices;
pub mod grid;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod techno;

pub use num_complex::Complex64;
