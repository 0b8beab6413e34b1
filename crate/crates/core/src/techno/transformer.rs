//! Parametric sizing of the active material of three-limb core-type transformers.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::TechnoError;

pub const COPPER_EUR_PER_KG: f64 = 7.0;
pub const STEEL_EUR_PER_KG: f64 = 3.0;
const STEEL_DENSITY: f64 = 7650.0;
const COPPER_DENSITY: f64 = 8960.0;
const WINDOW_FILL: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformerDesignSpec {
    pub v_primary_kv: f64,
    pub v_secondary_kv: f64,
    pub s_rated_mva: f64,
    pub f_hz: f64,
    /// T
    pub b_max: f64,
    /// A/mm²
    pub j_max: f64,
    /// V/turn
    pub dv_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformerDesign {
    pub core_area_m2: f64,
    pub turns_primary: u32,
    pub turns_secondary: u32,
    pub conductor_area_primary_mm2: f64,
    pub conductor_area_secondary_mm2: f64,
    pub window_side_m: f64,
    pub mass_steel_t: f64,
    pub mass_copper_t: f64,
    pub cost_meur: f64,
}

impl TransformerDesign {
    pub fn mass_t(&self) -> f64 {
        self.mass_steel_t + self.mass_copper_t
    }
}

/// A row of the reference transformer table: design parameters plus the
/// published masses and costs at 16.67 Hz and 50 Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceTransformer {
    pub v_primary_kv: f64,
    pub v_secondary_kv: f64,
    pub s_rated_mva: f64,
    pub b_max: f64,
    pub j_max: f64,
    pub dv_max: f64,
    pub mass_lf_t: f64,
    pub mass_50_t: f64,
    pub cost_lf_meur: f64,
    pub cost_50_meur: f64,
}

impl ReferenceTransformer {
    pub fn spec(&self, f_hz: f64) -> TransformerDesignSpec {
        TransformerDesignSpec {
            v_primary_kv: self.v_primary_kv,
            v_secondary_kv: self.v_secondary_kv,
            s_rated_mva: self.s_rated_mva,
            f_hz,
            b_max: self.b_max,
            j_max: self.j_max,
            dv_max: self.dv_max,
        }
    }

    pub fn label(&self) -> String {
        format!("{}/{}", fmt_kv(self.v_primary_kv), fmt_kv(self.v_secondary_kv))
    }

    pub fn mass_at(&self, f_hz: f64) -> f64 {
        if f_hz < 30.0 { self.mass_lf_t } else { self.mass_50_t }
    }

    pub fn cost_at(&self, f_hz: f64) -> f64 {
        if f_hz < 30.0 { self.cost_lf_meur } else { self.cost_50_meur }
    }
}

fn fmt_kv(v: f64) -> String {
    format!("{v}")
}

pub const TURBINE_0_67_66: ReferenceTransformer = ReferenceTransformer {
    v_primary_kv: 0.67,
    v_secondary_kv: 66.0,
    s_rated_mva: 10.0,
    b_max: 1.0,
    j_max: 7.0,
    dv_max: 22.0,
    mass_lf_t: 27.0,
    mass_50_t: 9.0,
    cost_lf_meur: 0.10,
    cost_50_meur: 0.04,
};
pub const STEP_66_220: ReferenceTransformer = ReferenceTransformer {
    v_primary_kv: 66.0,
    v_secondary_kv: 220.0,
    s_rated_mva: 400.0,
    b_max: 1.0,
    j_max: 3.0,
    dv_max: 220.0,
    mass_lf_t: 1075.0,
    mass_50_t: 371.0,
    cost_lf_meur: 3.75,
    cost_50_meur: 1.49,
};
pub const STEP_220_400: ReferenceTransformer = ReferenceTransformer {
    v_primary_kv: 220.0,
    v_secondary_kv: 400.0,
    s_rated_mva: 400.0,
    b_max: 1.0,
    j_max: 3.0,
    dv_max: 220.0,
    mass_lf_t: 1387.0,
    mass_50_t: 489.0,
    cost_lf_meur: 4.78,
    cost_50_meur: 1.93,
};
pub const STEP_66_400: ReferenceTransformer = ReferenceTransformer {
    v_primary_kv: 66.0,
    v_secondary_kv: 400.0,
    s_rated_mva: 400.0,
    b_max: 1.0,
    j_max: 3.0,
    dv_max: 220.0,
    mass_lf_t: 1207.0,
    mass_50_t: 417.0,
    cost_lf_meur: 4.16,
    cost_50_meur: 1.64,
};

pub const REFERENCE_TRANSFORMERS: [ReferenceTransformer; 4] =
    [TURBINE_0_67_66, STEP_66_220, STEP_220_400, STEP_66_400];

/// Core cross-section `A = dV / (4.44 f B)` in m².
pub fn core_area(dv_max: f64, f_hz: f64, b_max: f64) -> f64 {
    dv_max / (4.44 * f_hz * b_max)
}

struct Raw {
    core_area: f64,
    n1: u32,
    n2: u32,
    a1: f64,
    a2: f64,
    window: f64,
    steel_t: f64,
    copper_t: f64,
}

fn raw_design(spec: &TransformerDesignSpec) -> Result<Raw, TechnoError> {
    let fields = [
        ("v_primary", spec.v_primary_kv),
        ("v_secondary", spec.v_secondary_kv),
        ("s_rated", spec.s_rated_mva),
        ("f", spec.f_hz),
        ("b_max", spec.b_max),
        ("j_max", spec.j_max),
        ("dv_max", spec.dv_max),
    ];
    for (name, v) in fields {
        if !(v > 0.0) || !v.is_finite() {
            return Err(TechnoError::InvalidInput(format!("{name} must be positive, got {v}")));
        }
    }
    let a_core = core_area(spec.dv_max, spec.f_hz, spec.b_max);
    let winding = |v_kv: f64| {
        let v_phase = v_kv * 1e3 / 3f64.sqrt();
        let turns = (v_phase / spec.dv_max).ceil() as u32;
        let i_phase = spec.s_rated_mva * 1e6 / (3.0 * v_phase);
        (turns, i_phase / spec.j_max)
    };
    let (n1, a1) = winding(spec.v_primary_kv);
    let (n2, a2) = winding(spec.v_secondary_kv);
    // copper cross-section threading one window, m²
    let cu_window = (n1 as f64 * a1 + n2 as f64 * a2) * 1e-6;
    let window_area = cu_window / WINDOW_FILL;
    let w = window_area.sqrt();
    let d_core = (4.0 * a_core / PI).sqrt();
    let steel_path = 3.0 * w + 2.0 * (2.0 * w + 3.0 * d_core);
    let steel_t = a_core * steel_path * STEEL_DENSITY * 1e-3;
    let mean_turn = PI * (d_core + w / 2.0);
    let copper_t = 3.0 * cu_window * mean_turn * COPPER_DENSITY * 1e-3;
    if !(steel_t.is_finite() && copper_t.is_finite() && w > 0.0) {
        return Err(TechnoError::Infeasible("window geometry does not close".into()));
    }
    Ok(Raw { core_area: a_core, n1, n2, a1, a2, window: w, steel_t, copper_t })
}

/// Single scale factor mapping raw geometric masses onto the published
/// 417 t of the 66/400 kV, 50 Hz unit.
pub fn mass_calibration() -> f64 {
    static K: OnceLock<f64> = OnceLock::new();
    *K.get_or_init(|| {
        let r = raw_design(&STEP_66_400.spec(50.0)).expect("reference design is feasible");
        STEP_66_400.mass_50_t / (r.steel_t + r.copper_t)
    })
}

pub fn transformer_design(spec: &TransformerDesignSpec) -> Result<TransformerDesign, TechnoError> {
    let r = raw_design(spec)?;
    let k = mass_calibration();
    let steel = k * r.steel_t;
    let copper = k * r.copper_t;
    // t · €/kg = k€
    let cost = (copper * COPPER_EUR_PER_KG + steel * STEEL_EUR_PER_KG) * 1e-3;
    Ok(TransformerDesign {
        core_area_m2: r.core_area,
        turns_primary: r.n1,
        turns_secondary: r.n2,
        conductor_area_primary_mm2: r.a1,
        conductor_area_secondary_mm2: r.a2,
        window_side_m: r.window,
        mass_steel_t: steel,
        mass_copper_t: copper,
        cost_meur: cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_area_closed_form() {
        assert!((core_area(220.0, 50.0, 1.0) - 0.991).abs() < 5e-4);
        let a50 = core_area(220.0, 50.0, 1.0);
        let a16 = core_area(220.0, 50.0 / 3.0, 1.0);
        assert!((a16 / a50 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn calibrated_reference_unit() {
        let d = transformer_design(&STEP_66_400.spec(50.0)).unwrap();
        assert!((d.mass_t() - 417.0).abs() < 1e-9);
        assert!((d.cost_meur - 1.64).abs() < 0.3 * 1.64, "{}", d.cost_meur);
        assert_eq!(d.turns_secondary, (400e3 / 3f64.sqrt() / 220.0).ceil() as u32);
    }

    #[test]
    fn mass_ratio_band() {
        for t in REFERENCE_TRANSFORMERS {
            let lf = transformer_design(&t.spec(50.0 / 3.0)).unwrap();
            let hf = transformer_design(&t.spec(50.0)).unwrap();
            let ratio = lf.mass_t() / hf.mass_t();
            assert!((2.7..=3.2).contains(&ratio), "{}: {ratio}", t.label());
        }
    }

    #[test]
    fn invalid_spec_rejected() {
        let mut s = STEP_66_400.spec(50.0);
        s.b_max = 0.0;
        assert!(transformer_design(&s).is_err());
    }
}
