//! CSV traces, plot-ready figure data and markdown/CSV reports.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::grid::CableSpec;
use crate::scenario::{MetricReport, MismatchReport, PropagationReport};
use crate::sim::Trace;
use crate::techno::{
    annual_energy_loss, annuity, core_area, crossover, full_load_loss, loss_cost, max_power_transfer,
    platform_cost, tabulated_resistance, tco_sweep, transformer_design, ConductorModel, GridOption, TcoAssumptions,
    TcoSweep, TechnoError, F_LOW, F_NOMINAL, REFERENCE_TRANSFORMERS,
};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
    #[error(transparent)]
    Techno(#[from] TechnoError),
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io { path: path.display().to_string(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ReportError + '_ {
    move |source| ReportError::Csv { path: path.display().to_string(), source }
}

/// Shortest decimal that reads back to the same `f64` (at most 17 significant
/// digits).
fn num(x: f64) -> String {
    format!("{x:?}")
}

/// `run.csv` → `run.events.csv`.
pub fn events_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.events.csv"))
}

/// Writes `time_s,<channel>...` with one row per sample, plus the event
/// markers to the `.events.csv` sidecar.
pub fn write_trace(trace: &Trace, path: &Path) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path).map_err(io(path))?));
    let mut header = vec!["time_s".to_string()];
    header.extend(trace.names.iter().cloned());
    w.write_record(&header).map_err(csv_err(path))?;
    let mut row = Vec::with_capacity(header.len());
    for (i, t) in trace.time.iter().enumerate() {
        row.clear();
        row.push(num(*t));
        row.extend(trace.data.iter().map(|c| num(c[i])));
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io(path))?;

    let ev = events_path(path);
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&ev).map_err(io(&ev))?));
    w.write_record(["time_s", "event"]).map_err(csv_err(&ev))?;
    for (t, d) in &trace.events {
        w.write_record([num(*t), d.clone()]).map_err(csv_err(&ev))?;
    }
    w.flush().map_err(io(&ev))
}

/// Reads a trace written by [`write_trace`]; the sidecar is optional.
pub fn read_trace(path: &Path) -> Result<Trace, ReportError> {
    let bad = |msg: String| ReportError::Format { path: path.display().to_string(), msg };
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("time_s") {
        return Err(bad("first column must be time_s".into()));
    }
    let mut trace = Trace::new(header[1..].to_vec());
    let mut row = vec![0.0; header.len() - 1];
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let mut vals = rec.iter().map(|s| s.parse::<f64>());
        let t = vals.next().and_then(Result::ok).ok_or_else(|| bad(format!("row {}: bad time", k + 1)))?;
        for (c, v) in row.iter_mut().enumerate() {
            *v = vals.next().and_then(Result::ok).ok_or_else(|| bad(format!("row {}: bad value in column {}", k + 1, c + 2)))?;
        }
        trace.push(t, &row);
    }
    let ev = events_path(path);
    if ev.exists() {
        let mut r = csv::Reader::from_path(&ev).map_err(csv_err(&ev))?;
        for rec in r.records() {
            let rec = rec.map_err(csv_err(&ev))?;
            let t = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad event time".into()))?;
            trace.events.push((t, rec.get(1).unwrap_or_default().to_string()));
        }
    }
    Ok(trace)
}

/// Writes a table with a header row; values as shortest round-trip decimals.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path).map_err(io(path))?));
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(r.iter().map(|x| num(*x))).map_err(csv_err(path))?;
    }
    w.flush().map_err(io(path))
}

/// Writes text to `path`.
pub fn write_text(path: &Path, text: &str) -> Result<(), ReportError> {
    let mut f = BufWriter::new(File::create(path).map_err(io(path))?);
    f.write_all(text.as_bytes()).map_err(io(path))?;
    f.flush().map_err(io(path))
}

/// Column header of the figure tables.
fn figure_header() -> Vec<String> {
    let mut h = vec!["length_km".to_string()];
    h.extend(GridOption::ALL.iter().map(|&(v, f)| crate::techno::option_label(v, f)));
    h
}

/// Maximum active power transfer (MW) of each option against cable length.
pub fn figure3(max_km: f64, step_km: f64) -> (Vec<String>, Vec<Vec<f64>>) {
    let n = (max_km / step_km).round() as usize;
    let rows = (0..=n)
        .map(|k| {
            let d = k as f64 * step_km;
            let mut row = vec![d];
            for &(v, f) in &GridOption::ALL {
                let c = match v {
                    crate::techno::CollectionVoltage::Kv66 => CableSpec::mv_66kv(),
                    crate::techno::CollectionVoltage::Kv220 => CableSpec::hv_220kv(),
                };
                row.push(max_power_transfer(c.s_rated_mva, c.v_rated_kv, c.c_uf_per_km, f.hz(), d));
            }
            row
        })
        .collect();
    (figure_header(), rows)
}

/// Total cost of ownership (M€) of each option against distance.
pub fn figure4(sweep: &TcoSweep) -> (Vec<String>, Vec<Vec<f64>>) {
    let rows = sweep
        .distances_km
        .iter()
        .zip(&sweep.totals)
        .map(|(d, t)| std::iter::once(*d).chain(t.iter().copied()).collect())
        .collect();
    (figure_header(), rows)
}

fn rel(computed: f64, published: f64) -> String {
    format!("{:+.1}%", 100.0 * (computed - published) / published)
}

/// Markdown reproduction of the four techno-economic tables with published
/// and computed values side by side, followed by the distance sweep summary.
pub fn techno_report(a: &TcoAssumptions, wind_power_mw: f64, max_km: f64, step_km: f64) -> Result<String, ReportError> {
    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(w, "# Techno-economic assessment\n");
    let _ = writeln!(w, "Wind power {wind_power_mw} MW, {} years at {}% interest, {} EUR/MWh, utilization {}.\n", a.years, a.interest_rate * 100.0, a.price_eur_per_mwh, a.utilization);

    let _ = writeln!(w, "## Table 1: mass and cost of active material\n");
    let _ = writeln!(w, "| Voltage (kV) | S (MVA) | B_max (T) | J_max (A/mm2) | dV_max (V) | f (Hz) | core area (m2) | mass published (t) | mass computed (t) | diff | cost published (MEUR) | cost computed (MEUR) | diff |");
    let _ = writeln!(w, "|---|---|---|---|---|---|---|---|---|---|---|---|---|");
    for t in &REFERENCE_TRANSFORMERS {
        for f in [F_LOW, F_NOMINAL] {
            let d = transformer_design(&t.spec(f))?;
            let _ = writeln!(
                w,
                "| {} | {} | {} | {} | {} | {:.2} | {:.4} | {} | {:.0} | {} | {:.2} | {:.2} | {} |",
                t.label(),
                t.s_rated_mva,
                t.b_max,
                t.j_max,
                t.dv_max,
                f,
                core_area(t.dv_max, f, t.b_max),
                t.mass_at(f),
                d.mass_t(),
                rel(d.mass_t(), t.mass_at(f)),
                t.cost_at(f),
                d.cost_meur,
                rel(d.cost_meur, t.cost_at(f)),
            );
        }
    }

    let _ = writeln!(w, "\n## Table 2: cable resistances, annual losses and related costs\n");
    let _ = writeln!(w, "Rated current 1.05 kA per cable; computed columns use the published resistances, the Kelvin column is the solid-conductor skin-effect model.\n");
    let _ = writeln!(w, "| | DC published | DC computed | 16.67 Hz published | 16.67 Hz computed | 50 Hz published | 50 Hz computed |");
    let _ = writeln!(w, "|---|---|---|---|---|---|---|");
    let i = CableSpec::hv_220kv().i_rated_ka;
    let freqs = [0.0, F_LOW, F_NOMINAL];
    let published = [[29.5, 29.7, 34.9], [97.6, 98.2, 115.4], [427.0, 430.0, 506.0], [0.256, 0.258, 0.303]];
    let computed: Vec<[f64; 4]> = freqs
        .iter()
        .map(|&f| {
            let r = tabulated_resistance(f);
            let p = full_load_loss(i, r);
            let e = annual_energy_loss(p, a.utilization);
            [r, p, e, loss_cost(e, a.years as f64, a.price_eur_per_mwh)]
        })
        .collect();
    let rows = ["Resistance (mOhm/km)", "Full-load losses 3 I^2 R (W/m)", "Annual losses (MWh/km)", "Cost of 20-year losses (MEUR/km)"];
    for (k, name) in rows.iter().enumerate() {
        let digits = if k == 3 { 4 } else { 1 };
        let _ = write!(w, "| {name} |");
        for c in 0..3 {
            let _ = write!(w, " {} | {:.*} |", published[k][c], digits, computed[c][k]);
        }
        let _ = writeln!(w);
    }
    let cu = ConductorModel::copper_630();
    let _ = writeln!(w, "| Kelvin-model resistance (mOhm/km) | | {:.2} | | {:.2} | | {:.2} |", cu.ac_resistance(0.0), cu.ac_resistance(F_LOW), cu.ac_resistance(F_NOMINAL));

    let _ = writeln!(w, "\n## Table 3: cost of offshore AC platform (MEUR)\n");
    let _ = writeln!(w, "| | 16.67 Hz published | 16.67 Hz computed | 50 Hz published | 50 Hz computed |");
    let _ = writeln!(w, "|---|---|---|---|---|");
    let (lf, hf) = (platform_cost(F_LOW)?, platform_cost(F_NOMINAL)?);
    let published3 = [(27.6, 9.2), (66.0, 22.0), (22.08, 7.36), (115.68, 38.56)];
    let comp3 = [(lf.jacket, hf.jacket), (lf.topside, hf.topside), (lf.installation, hf.installation), (lf.total(), hf.total())];
    for ((name, p), c) in ["Jacket", "Topside", "Installation", "Total"].iter().zip(published3).zip(comp3) {
        let _ = writeln!(w, "| {name} | {} | {:.2} | {} | {:.2} |", p.0, c.0, p.1, c.1);
    }

    let _ = writeln!(w, "\n## Table 4: cost of power cables\n");
    let _ = writeln!(w, "| Voltage (kV) | Rating (MVA) | Supply (MEUR/km) | Installation (MEUR/km) |");
    let _ = writeln!(w, "|---|---|---|---|");
    for c in [CableSpec::mv_66kv(), CableSpec::hv_220kv()] {
        let _ = writeln!(w, "| {} | {} | {} | {} |", c.v_rated_kv, c.s_rated_mva, crate::techno::cable_supply_cost(c.v_rated_kv)?, crate::techno::CABLE_INSTALL_MEUR_PER_KM);
    }
    let _ = writeln!(w, "\nAnnuity of 1 MEUR at {}% over {} years: {:.5} MEUR/yr.", a.interest_rate * 100.0, a.years, annuity(1.0, a.interest_rate, a.years));

    let sweep = tco_sweep(wind_power_mw, max_km, step_km, a)?;
    let _ = writeln!(w, "\n## Total cost of ownership against distance\n");
    let _ = writeln!(w, "| distance (km) | {} | cheapest |", sweep.labels.join(" | "));
    let _ = writeln!(w, "|---|{}---|", "---|".repeat(sweep.labels.len()));
    let best = sweep.argmin();
    let every = ((10.0 / step_km).round() as usize).max(1);
    for k in (0..sweep.distances_km.len()).step_by(every) {
        let cells: Vec<String> = sweep.totals[k].iter().map(|x| format!("{x:.2}")).collect();
        let _ = writeln!(w, "| {} | {} | {} |", sweep.distances_km[k], cells.join(" | "), sweep.labels[best[k]]);
    }
    match crossover(&sweep, 0, 1) {
        Some(d) => {
            let _ = writeln!(w, "\n66 kV: 16.67 Hz becomes cheaper than 50 Hz beyond {d:.1} km.");
        }
        None => {
            let _ = writeln!(w, "\n66 kV: no 50 Hz / 16.67 Hz crossover within {max_km} km.");
        }
    }
    Ok(s)
}

/// Plain-text summary of the security metrics of one run.
pub fn metric_text(label: &str, m: &MetricReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{label}");
    let _ = writeln!(s, "  event at {} s", m.t_event);
    let _ = writeln!(s, "  max |dV_hub|     {:.4} pu", m.max_dv_hub_pu);
    let _ = writeln!(s, "  max |df_offshore| {:.4} Hz", m.max_df_hz);
    for st in &m.settling {
        let t = st.time_s.map_or("not settled".to_string(), |t| format!("{t:.3} s"));
        let _ = writeln!(s, "  settling {} (band {}): {t}", st.channel, st.band);
    }
    for l in &m.links {
        let _ = writeln!(
            s,
            "  link {}: max |dP/dt| {:.3} pu/s, delivered change {:+.4} pu, overshoot {:.1}%, onshore df {:+.4} Hz",
            l.link,
            l.max_dpdt,
            l.delivered_change,
            100.0 * l.overshoot,
            l.nadir_hz
        );
    }
    s
}

pub fn metric_csv(m: &MetricReport) -> (Vec<String>, Vec<Vec<f64>>) {
    let header = ["link", "max_dpdt_pu_per_s", "delivered_change_pu", "overshoot", "onshore_df_hz"];
    let rows = m.links.iter().map(|l| vec![l.link as f64, l.max_dpdt, l.delivered_change, l.overshoot, l.nadir_hz]).collect();
    (header.iter().map(|s| s.to_string()).collect(), rows)
}

pub fn mismatch_text(r: &MismatchReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "EMT vs phasor (epsilon {} pu, event at {} s)", r.epsilon, r.t_event);
    let _ = writeln!(s, "  {:<16} {:>12} {:>12} {:>18}", "channel", "rms", "max", "time to negligible");
    for c in &r.channels {
        let t = c.time_to_negligible.map_or("never".to_string(), |t| format!("{t:.3} s"));
        let _ = writeln!(s, "  {:<16} {:>12.5} {:>12.5} {:>18}", c.channel, c.rms, c.max, t);
    }
    s
}

/// One row per channel; a missing time-to-negligible is written as `inf`.
pub fn mismatch_csv(path: &Path, r: &MismatchReport) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path).map_err(io(path))?));
    w.write_record(["channel", "rms", "max", "time_to_negligible_s"]).map_err(csv_err(path))?;
    for c in &r.channels {
        let t = c.time_to_negligible.map_or("inf".to_string(), num);
        w.write_record([c.channel.clone(), num(c.rms), num(c.max), t]).map_err(csv_err(path))?;
    }
    w.flush().map_err(io(path))
}

pub fn propagation_text(p: &PropagationReport) -> String {
    format!(
        "onshore propagation: max |dP/dt| zero {:.3} pu/s, low {:.3} pu/s (ratio {:.2}); onshore df zero {:+.4} Hz, low {:+.4} Hz\n",
        p.zero_max_dpdt, p.low_max_dpdt, p.ratio, p.zero_nadir_hz, p.low_nadir_hz
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_trace_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_trace(&Trace::new(vec!["v_hub_pu".into(), "f_offshore_hz".into()]), &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "time_s,v_hub_pu,f_offshore_hz\n");
        assert_eq!(std::fs::read_to_string(events_path(&p)).unwrap(), "time_s,event\n");
    }

    #[test]
    fn trace_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.csv");
        let mut tr = Trace::new(vec!["a".into(), "b".into()]);
        for i in 0..50 {
            let t = i as f64 * 1e-4;
            tr.push(t, &[(t * 1234.5678).sin() / 3.0, 1e-300 * i as f64 - 7.0e12]);
        }
        tr.events.push((0.002, "trip conv1".into()));
        write_trace(&tr, &p).unwrap();
        assert_eq!(read_trace(&p).unwrap(), tr);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(!text.contains(' '));
    }

    #[test]
    fn figure4_has_a_row_per_kilometre() {
        let sweep = tco_sweep(400.0, 100.0, 1.0, &TcoAssumptions::default()).unwrap();
        let (h, rows) = figure4(&sweep);
        assert_eq!(h.len(), 5);
        assert_eq!(h[0], "length_km");
        assert_eq!(rows.len(), 101);
        assert_eq!(rows[100][0], 100.0);
    }

    #[test]
    fn figure3_starts_at_rating() {
        let (_, rows) = figure3(300.0, 1.0);
        assert_eq!(rows[0][1..], [120.0, 120.0, 400.0, 400.0]);
        assert!(rows[263][3] > 0.0);
        assert_eq!(rows[264][3], 0.0);
    }

    #[test]
    fn report_lists_published_and_computed_values() {
        let md = techno_report(&TcoAssumptions::default(), 400.0, 100.0, 1.0).unwrap();
        assert!(md.contains("| Annual losses (MWh/km) | 427 | 427.4 | 430 | 430.3 | 506 | 505.6 |"), "{md}");
        assert!(md.contains("| Total | 115.68 | 115.68 | 38.56 | 38.56 |"));
        assert!(md.contains("## Table 1") && md.contains("## Table 4"));
    }
}
