//! Cable loss chain and charging limits.

use std::f64::consts::PI;

pub const HOURS_PER_YEAR: f64 = 8760.0;

/// Full-load loss `3 I² R` in W/m for current in kA and resistance in mΩ/km.
pub fn full_load_loss(i_ka: f64, r_ac_mohm_per_km: f64) -> f64 {
    // (kA)² · mΩ/km = 1e6 A² · 1e-6 Ω/m
    3.0 * i_ka * i_ka * r_ac_mohm_per_km
}

/// Annual energy loss in MWh/km/year; `utilization` is the full-load-hour fraction.
pub fn annual_energy_loss(p_loss_w_per_m: f64, utilization: f64) -> f64 {
    // W/m · h = Wh/m = MWh/km · 1e-3 · 1e3
    p_loss_w_per_m * HOURS_PER_YEAR * utilization * 1e-3
}

/// Undiscounted loss cost in M€/km.
pub fn loss_cost(annual_mwh_per_km: f64, years: f64, price_eur_per_mwh: f64) -> f64 {
    annual_mwh_per_km * years * price_eur_per_mwh * 1e-6
}

/// Three-phase charging reactive power in MVAr, `Q = 2π f C' V² L`.
pub fn cable_charging(v_kv: f64, c_uf_per_km: f64, f_hz: f64, length_km: f64) -> f64 {
    // kV² · µF = 1e6 · 1e-6 → MVAr·s
    2.0 * PI * f_hz * c_uf_per_km * v_kv * v_kv * length_km * 1e-6
}

/// Active-power capability of a cable compensated at both terminals:
/// `P = √(S² − (Q/2)²)`, zero once half the charging reaches the rating.
pub fn max_power_transfer(s_rated_mva: f64, v_kv: f64, c_uf_per_km: f64, f_hz: f64, length_km: f64) -> f64 {
    let half_q = 0.5 * cable_charging(v_kv, c_uf_per_km, f_hz, length_km);
    if half_q >= s_rated_mva {
        0.0
    } else {
        (s_rated_mva * s_rated_mva - half_q * half_q).sqrt()
    }
}

/// Length at which the capability reaches zero, `2S / (2π f C' V²)`.
pub fn critical_length(s_rated_mva: f64, v_kv: f64, c_uf_per_km: f64, f_hz: f64) -> f64 {
    2.0 * s_rated_mva / cable_charging(v_kv, c_uf_per_km, f_hz, 1.0)
}
