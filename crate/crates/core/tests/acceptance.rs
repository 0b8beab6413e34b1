//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use hubsim_core::devices::Fidelity;
use hubsim_core::scenario::{compute_metrics, mismatch, run_mode, Bands, ScenarioConfig};
use hubsim_core::sim::{linearize, Dynamics, InertiaConfig, SimError, SimSystem, Trace};
use hubsim_core::techno::{
    annual_energy_loss, annuity, core_area, critical_length, crossover, full_load_loss, loss_cost, max_power_transfer,
    platform_cost, tco_sweep, transformer_design, ConductorModel, TcoAssumptions, F_LOW, F_NOMINAL,
    REFERENCE_TRANSFORMERS,
};
use hubsim_core::Complex64;

const INERTIAS: [InertiaConfig; 2] = [InertiaConfig::Zero, InertiaConfig::Low];
const MODES: [Fidelity; 2] = [Fidelity::Emt, Fidelity::Phasor];

/// Collects failed checks of one criterion with the measured numbers.
#[derive(Default)]
struct Check {
    notes: Vec<String>,
    failures: Vec<String>,
}

impl Check {
    fn expect(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn within(&mut self, name: &str, got: f64, want: f64, rel: f64) {
        let ok = ((got - want) / want).abs() <= rel;
        self.expect(ok, format!("{name} {got:.4} vs {want:.4} (±{}%)", rel * 100.0));
    }
}

fn report(n: usize, title: &str, c: Check) -> bool {
    let ok = c.failures.is_empty();
    let detail = if ok { c.notes.join("; ") } else { c.failures.join("; ") };
    println!("criterion {n:>2} {} {title}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn loss_chain() -> Check {
    let mut c = Check::default();
    let i_rated = 1.05;
    let cols = [("DC", 29.5, [97.6, 427.0, 0.256]), ("16.67 Hz", 29.7, [98.2, 430.0, 0.258]), ("50 Hz", 34.9, [115.4, 506.0, 0.303])];
    for (name, r, published) in cols {
        let p = full_load_loss(i_rated, r);
        let e = annual_energy_loss(p, 0.5);
        let cost = loss_cost(e, 20.0, 30.0);
        for (k, (got, want)) in [p, e, cost].into_iter().zip(published).enumerate() {
            let label = ["full-load W/m", "annual MWh/km", "20-yr MEUR/km"][k];
            c.within(&format!("{name} {label}"), got, want, 0.01);
        }
    }
    c
}

fn skin_effect() -> Check {
    let mut c = Check::default();
    let cu = ConductorModel::copper_630();
    c.within("R_ac(16.67 Hz) mOhm/km", cu.ac_resistance(F_LOW), 29.7, 0.02);
    c.within("R_ac(50 Hz) mOhm/km", cu.ac_resistance(F_NOMINAL), 34.9, 0.10);
    c
}

fn transformers() -> Check {
    let mut c = Check::default();
    for t in &REFERENCE_TRANSFORMERS {
        let ratio = core_area(t.dv_max, F_LOW, t.b_max) / core_area(t.dv_max, F_NOMINAL, t.b_max);
        c.expect((ratio - 3.0).abs() < 1e-12, format!("{} core area ratio {ratio}", t.label()));
        let lf = transformer_design(&t.spec(F_LOW)).unwrap();
        let hf = transformer_design(&t.spec(F_NOMINAL)).unwrap();
        let m = lf.mass_t() / hf.mass_t();
        c.expect((2.7..=3.2).contains(&m), format!("{} mass ratio {m:.3}", t.label()));
        if t.s_rated_mva >= 400.0 {
            for (f, d) in [(F_LOW, lf), (F_NOMINAL, hf)] {
                c.within(&format!("{} {:.2} Hz mass t", t.label(), f), d.mass_t(), t.mass_at(f), 0.25);
                c.within(&format!("{} {:.2} Hz cost MEUR", t.label(), f), d.cost_meur, t.cost_at(f), 0.30);
            }
        }
    }
    c
}

fn platform_and_annuity() -> Check {
    let mut c = Check::default();
    let hf = platform_cost(F_NOMINAL).unwrap().total();
    let lf = platform_cost(F_LOW).unwrap().total();
    c.expect((hf - 38.56).abs() < 1e-9, format!("50 Hz platform {hf:.2}"));
    c.expect((lf - 115.68).abs() < 1e-9, format!("16.67 Hz platform {lf:.2}"));
    let a = annuity(1.0, 0.02, 20);
    c.expect((a - 0.06116).abs() <= 1e-5, format!("annuity {a:.6} MEUR/yr"));
    c
}

fn power_transfer() -> Check {
    let mut c = Check::default();
    let (s, v, cap) = (400.0, 220.0, 0.2);
    let p0 = max_power_transfer(s, v, cap, F_NOMINAL, 0.0);
    c.expect(p0 == s, format!("P(0) = {p0} MW"));
    let l = critical_length(s, v, cap, F_NOMINAL);
    c.expect((l - 263.0).abs() <= 1.0, format!("220 kV/50 Hz critical length {l:.1} km"));
    let end = max_power_transfer(s, v, cap, F_NOMINAL, l);
    c.expect(end == 0.0, format!("P(critical length) = {end}"));
    let mut worst: f64 = 0.0;
    for k in 0..=100 {
        let len = 5.0 * k as f64;
        for (s, v) in [(400.0, 220.0), (120.0, 66.0)] {
            let a = max_power_transfer(s, v, cap, F_NOMINAL / 3.0, 3.0 * len);
            let b = max_power_transfer(s, v, cap, F_NOMINAL, len);
            worst = worst.max((a - b).abs() / s);
        }
    }
    c.expect(worst <= 1e-12, format!("duality P(f/3, 3L) - P(f, L) max {worst:.1e} of rating"));
    c
}

fn tco_ordering() -> Check {
    let mut c = Check::default();
    let t0 = Instant::now();
    let s = tco_sweep(400.0, 100.0, 1.0, &TcoAssumptions::default()).unwrap();
    let wall = t0.elapsed().as_secs_f64();
    let x = crossover(&s, 0, 1);
    c.expect(x.is_some_and(|d| (20.0..=40.0).contains(&d)), format!("66 kV crossover {} km", x.map_or("none".into(), |d| format!("{d:.1}"))));
    let best = s.argmin();
    let lbl = |i: usize| s.labels[i].clone();
    let bad: Vec<f64> = (0..best.len()).filter(|&k| (20.0..=60.0).contains(&s.distances_km[k]) && best[k] != 2).map(|k| s.distances_km[k]).collect();
    c.expect(bad.is_empty(), format!("{} cheapest over 20-60 km (exceptions {bad:?})", lbl(2)));
    let lf: Vec<f64> = (0..best.len()).filter(|&k| s.distances_km[k] < 60.0 && best[k] == 3).map(|k| s.distances_km[k]).collect();
    c.expect(lf.is_empty(), format!("{} never cheapest below 60 km (exceptions {lf:?})", lbl(3)));
    c.expect(wall < 1.0, format!("sweep {:.1} ms", wall * 1e3));
    c
}

fn max_drift(tr: &Trace) -> (f64, String) {
    let mut worst = (0.0, String::new());
    for (name, ch) in tr.names.iter().zip(&tr.data) {
        let d = ch.iter().fold(0.0f64, |a, v| a.max((v - ch[0]).abs()));
        if d > worst.0 {
            worst = (d, name.clone());
        }
    }
    worst
}

fn equilibrium() -> Check {
    let mut c = Check::default();
    for inertia in INERTIAS {
        for mode in MODES {
            let cfg = ScenarioConfig::new("s1-power-request", inertia).unwrap();
            let tag = format!("{}/{}", inertia.name(), mode.name());
            let (mut sys, mut x) = match SimSystem::build(cfg.system.clone(), mode) {
                Ok(v) => v,
                Err(e) => {
                    c.expect(false, format!("{tag} init failed: {e}"));
                    continue;
                }
            };
            let norm = sys.derivative_norm(&x).unwrap();
            c.expect(norm < 1e-8, format!("{tag} |f| {norm:.1e}"));
            match sys.run(&mut x, &[], 1.0, cfg.dt(mode), cfg.solver) {
                Ok((tr, _)) => {
                    let (d, ch) = max_drift(&tr);
                    c.expect(d < 1e-6, format!("{tag} 1 s drift {d:.1e} ({ch})"));
                }
                Err(e) => c.expect(false, format!("{tag} run failed: {e}")),
            }
        }
    }
    c
}

struct Record {
    id: &'static str,
    inertia: InertiaConfig,
    mode: Fidelity,
    cfg: ScenarioConfig,
    trace: Result<Trace, String>,
    wall_s: f64,
}

/// Every scenario in both inertia configurations and both modes, run one at
/// a time so that wall times are comparable.
struct Runs(Vec<Record>);

impl Runs {
    fn execute() -> Self {
        let mut runs = vec![];
        for id in ["s1-power-request", "s2-converter-trip", "s3-windfarm-trip"] {
            for inertia in INERTIAS {
                let cfg = ScenarioConfig::new(id, inertia).unwrap();
                for mode in MODES {
                    let t0 = Instant::now();
                    let trace = run_mode(&cfg, mode).map(|r| r.trace).map_err(|e| e.to_string());
                    let wall_s = t0.elapsed().as_secs_f64();
                    runs.push(Record { id, inertia, mode, cfg: cfg.clone(), trace, wall_s });
                }
            }
        }
        Self(runs)
    }

    fn record(&self, id: &str, inertia: InertiaConfig, mode: Fidelity) -> &Record {
        self.0.iter().find(|r| r.id == id && r.inertia == inertia && r.mode == mode).expect("all combinations run")
    }

    fn get(&self, id: &str, inertia: InertiaConfig, mode: Fidelity) -> Result<(&ScenarioConfig, &Trace), String> {
        let r = self.record(id, inertia, mode);
        match &r.trace {
            Ok(t) => Ok((&r.cfg, t)),
            Err(e) => Err(format!("{id} {} {}: {e}", inertia.name(), mode.name())),
        }
    }

    fn wall(&self, id: &str, inertia: InertiaConfig, mode: Fidelity) -> Option<f64> {
        let r = self.record(id, inertia, mode);
        r.trace.is_ok().then_some(r.wall_s)
    }
}

/// Mean over the last 0.5 s minus the value at the event sample, MW.
fn power_change(cfg: &ScenarioConfig, tr: &Trace, k: usize) -> f64 {
    let p = tr.channel(&format!("p_conv{k}_pu")).unwrap();
    let k0 = tr.index_at(cfg.t_event);
    let tail = tr.index_at(cfg.t_end - 0.5);
    let fin = p[tail..].iter().sum::<f64>() / (p.len() - tail) as f64;
    (fin - p[k0]) * cfg.system.base.s_base_mva
}

/// Steady-state change of each converter's power when the set-point change
/// `dp_set` (MW) is applied and the mismatch is shared in proportion to 1/m_p.
fn droop_oracle(dp_set: &[f64], m_p: &[f64]) -> Vec<f64> {
    let total: f64 = dp_set.iter().sum();
    let g: f64 = m_p.iter().map(|m| 1.0 / m).sum();
    dp_set.iter().zip(m_p).map(|(d, m)| d - total * (1.0 / m) / g).collect()
}

fn droop_sharing(runs: &Runs) -> Check {
    let mut c = Check::default();
    for mode in MODES {
        match runs.get("s1-power-request", InertiaConfig::Zero, mode) {
            Ok((cfg, tr)) => {
                let n = cfg.system.layout.converters;
                let mut dp = vec![0.0; n];
                dp[0] = 200.0;
                let want = droop_oracle(&dp, &vec![cfg.system.gfm.m_p; n]);
                for (k, w) in want.iter().enumerate() {
                    let got = power_change(cfg, tr, k + 1);
                    c.within(&format!("S1 {} conv{} dP MW", mode.name(), k + 1), got, *w, 0.01);
                }
            }
            Err(e) => c.expect(false, e),
        }
        match runs.get("s2-converter-trip", InertiaConfig::Zero, mode) {
            Ok((cfg, tr)) => {
                let n = cfg.system.layout.converters;
                let k0 = tr.index_at(cfg.t_event);
                let tripped = tr.channel("p_conv1_pu").unwrap()[k0] * cfg.system.base.s_base_mva;
                for k in 2..=n {
                    let got = power_change(cfg, tr, k);
                    c.within(&format!("S2 {} conv{k} dP MW", mode.name()), got, tripped / (n - 1) as f64, 0.01);
                }
            }
            Err(e) => c.expect(false, e),
        }
    }
    c
}

fn frequency_bands(runs: &Runs) -> Check {
    let mut c = Check::default();
    for id in ["s1-power-request", "s2-converter-trip", "s3-windfarm-trip"] {
        for mode in MODES {
            match runs.get(id, InertiaConfig::Zero, mode) {
                Ok((cfg, tr)) => {
                    let m = compute_metrics(tr, cfg.t_event, Bands::default()).unwrap();
                    c.expect(m.max_df_hz < 0.07, format!("zero {id} {} |df| {:.3} Hz", mode.name(), m.max_df_hz));
                }
                Err(e) => c.expect(false, e),
            }
        }
    }
    for id in ["s2-converter-trip", "s3-windfarm-trip"] {
        for mode in MODES {
            match runs.get(id, InertiaConfig::Low, mode) {
                Ok((cfg, tr)) => {
                    let m = compute_metrics(tr, cfg.t_event, Bands::default()).unwrap();
                    let ok = (0.5..=2.0).contains(&m.max_df_hz);
                    c.expect(ok, format!("low {id} {} nadir {:.2} Hz", mode.name(), m.max_df_hz));
                }
                Err(e) => c.expect(false, e),
            }
        }
    }
    c
}

fn emt_vs_phasor(runs: &Runs) -> Check {
    let mut c = Check::default();
    let mut ttn = [None, None];
    for (k, inertia) in INERTIAS.into_iter().enumerate() {
        let (Ok((_, emt)), Ok((_, ph))) =
            (runs.get("s2-converter-trip", inertia, Fidelity::Emt), runs.get("s2-converter-trip", inertia, Fidelity::Phasor))
        else {
            c.expect(false, format!("{} S2 runs missing", inertia.name()));
            continue;
        };
        let r = mismatch(emt, ph, 0.01).unwrap();
        let t = r.worst_time_to_negligible("p_conv");
        let limit = [0.1, 0.3][k];
        c.expect(t.is_some_and(|t| t <= limit), format!("{} S2 active-power time to negligible {} (<= {limit} s)", inertia.name(), t.map_or("never".into(), |t| format!("{t:.3} s"))));
        ttn[k] = t;
    }
    if let [Some(z), Some(l)] = ttn {
        c.expect(l > z, format!("low {l:.3} s > zero {z:.3} s"));
    }
    for inertia in INERTIAS {
        let (Ok((cfg, emt)), Ok((_, ph))) =
            (runs.get("s3-windfarm-trip", inertia, Fidelity::Emt), runs.get("s3-windfarm-trip", inertia, Fidelity::Phasor))
        else {
            c.expect(false, format!("{} S3 runs missing", inertia.name()));
            continue;
        };
        let me = compute_metrics(emt, cfg.t_event, Bands::default()).unwrap().max_dv_hub_pu;
        let mp = compute_metrics(ph, cfg.t_event, Bands::default()).unwrap().max_dv_hub_pu;
        c.expect(me >= mp, format!("{} S3 max |dV_hub| EMT {me:.3} >= phasor {mp:.3} pu", inertia.name()));
    }
    c
}

/// Damped oscillator with one algebraic output row:
/// x' = y, y' = -w² x - 2 z w y, 0 = u - (x + y).
struct Oscillator {
    w: f64,
    z: f64,
    alg: [bool; 3],
}

impl Dynamics for Oscillator {
    fn dim(&self) -> usize {
        3
    }

    fn algebraic(&self) -> &[bool] {
        &self.alg
    }

    fn rhs(&self, x: &[f64], f: &mut [f64]) -> Result<(), SimError> {
        f[0] = x[1];
        f[1] = -self.w * self.w * x[0] - 2.0 * self.z * self.w * x[1];
        f[2] = x[2] - (x[0] + x[1]);
        Ok(())
    }
}

fn linearization() -> Check {
    let mut c = Check::default();
    let osc = Oscillator { w: 7.0, z: 0.2, alg: [false, false, true] };
    let ss = linearize(&osc, &[0.0; 3]).unwrap();
    let wd = osc.w * (1.0 - osc.z * osc.z).sqrt();
    let exact = [Complex64::new(-osc.z * osc.w, wd), Complex64::new(-osc.z * osc.w, -wd)];
    let err = exact.iter().map(|e| ss.modes.iter().map(|m| (m.lambda - e).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    c.expect(ss.modes.len() == 2 && err < 1e-6, format!("2-state oscillator error {err:.1e}"));
    for inertia in INERTIAS {
        for mode in MODES {
            let cfg = ScenarioConfig::new("s1-power-request", inertia).unwrap();
            let (sys, x) = SimSystem::build(cfg.system, mode).unwrap();
            match linearize(&sys, &x) {
                Ok(ss) => {
                    let tag = format!("{}/{}", inertia.name(), mode.name());
                    c.expect(ss.max_real() < 0.0, format!("{tag} max Re {:.3}", ss.max_real()));
                    c.expect(ss.eps_sensitivity < 1e-3, format!("{tag} halving change {:.1e}", ss.eps_sensitivity));
                }
                Err(e) => c.expect(false, format!("{} {}: {e}", inertia.name(), mode.name())),
            }
        }
    }
    c
}

fn performance(runs: &Runs) -> Check {
    let mut c = Check::default();
    for id in ["s1-power-request", "s2-converter-trip", "s3-windfarm-trip"] {
        for inertia in INERTIAS {
            let (Some(e), Some(p)) = (runs.wall(id, inertia, Fidelity::Emt), runs.wall(id, inertia, Fidelity::Phasor)) else {
                c.expect(false, format!("{id} {} did not complete", inertia.name()));
                continue;
            };
            c.expect(e < 60.0, format!("{id} {} EMT {e:.2} s", inertia.name()));
            c.expect(p < 0.05 * e, format!("phasor {:.1}%", 100.0 * p / e));
        }
    }
    c
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= report(1, "cable loss chain", loss_chain());
    ok &= report(2, "skin-effect resistance", skin_effect());
    ok &= report(3, "transformer sizing", transformers());
    ok &= report(4, "platform cost and annuity", platform_and_annuity());
    ok &= report(5, "cable power transfer", power_transfer());
    ok &= report(6, "cost-of-ownership ordering", tco_ordering());
    ok &= report(7, "equilibrium", equilibrium());
    let runs = Runs::execute();
    ok &= report(8, "droop sharing", droop_sharing(&runs));
    ok &= report(9, "frequency-deviation bands", frequency_bands(&runs));
    ok &= report(10, "EMT vs phasor mismatch", emt_vs_phasor(&runs));
    ok &= report(11, "linearization", linearization());
    ok &= report(12, "performance", performance(&runs));
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
