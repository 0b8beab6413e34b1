//! Techno-economic assessment of offshore AC collection options: skin effect,
//! charging limits, transformer sizing and 20-year cost of ownership.

mod conductor;
mod costs;
mod losses;
mod tco;
mod transformer;

pub use conductor::{kelvin, kelvin_ratio, ConductorModel, Kelvin, MU0};
pub use costs::{
    annuity, annuity_total, cable_supply_cost, platform_cost, wind_area, PlatformCost, WindArea,
    CABLE_INSTALL_MEUR_PER_KM,
};
pub use losses::{
    annual_energy_loss, cable_charging, critical_length, full_load_loss, loss_cost, max_power_transfer,
    HOURS_PER_YEAR,
};
pub use tco::{
    crossover, option_label, resistance, tabulated_resistance, tco, tco_sweep, tco_with, CableLoading,
    CollectionVoltage, CostBreakdown, GridFrequency, GridOption, ResistanceSource, TcoAssumptions, TcoSweep,
    TransformerCostSource, F_LOW, F_NOMINAL,
};
pub use transformer::{
    core_area, mass_calibration, transformer_design, ReferenceTransformer, TransformerDesign,
    TransformerDesignSpec, COPPER_EUR_PER_KG, REFERENCE_TRANSFORMERS, STEEL_EUR_PER_KG, STEP_220_400,
    STEP_66_220, STEP_66_400, TURBINE_0_67_66,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TechnoError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported frequency {0} Hz")]
    UnsupportedFrequency(f64),
    #[error("infeasible design: {0}")]
    Infeasible(String),
}
