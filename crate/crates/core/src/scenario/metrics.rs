//! Secure-operation metrics of one trace and the onshore-impact comparison of
//! the two inertia configurations.

use super::ScenarioError;
use crate::sim::Trace;

/// Settling bands around the final value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bands {
    pub v_pu: f64,
    pub f_hz: f64,
}

impl Default for Bands {
    fn default() -> Self {
        Self { v_pu: 0.01, f_hz: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settling {
    pub channel: String,
    pub band: f64,
    /// after the event, s; `None` when the channel is still outside the band
    /// at the end of the trace
    pub time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkImpact {
    pub link: usize,
    /// max |dP/dt| of the power delivered onshore, pu/s
    pub max_dpdt: f64,
    /// final minus pre-event delivered power, pu
    pub delivered_change: f64,
    /// peak excursion beyond the final value relative to the change
    pub overshoot: f64,
    /// signed extreme onshore frequency deviation, Hz
    pub nadir_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub t_event: f64,
    pub max_dv_hub_pu: f64,
    pub max_df_hz: f64,
    pub settling: Vec<Settling>,
    /// links whose offshore converter is still in service
    pub links: Vec<LinkImpact>,
}

impl MetricReport {
    pub fn max_dpdt(&self) -> f64 {
        self.links.iter().fold(0.0, |a, l| a.max(l.max_dpdt))
    }

    pub fn worst_onshore_nadir_hz(&self) -> f64 {
        self.links.iter().map(|l| l.nadir_hz).fold(0.0, |a: f64, n| if n.abs() > a.abs() { n } else { a })
    }

    pub fn settling_of(&self, channel: &str) -> Option<&Settling> {
        self.settling.iter().find(|s| s.channel == channel)
    }
}

fn channel<'a>(trace: &'a Trace, name: &str) -> Result<&'a [f64], ScenarioError> {
    trace.channel(name).ok_or_else(|| ScenarioError::Metric(format!("trace has no channel {name}")))
}

/// Largest |y − y[k0]| after sample `k0`.
fn max_dev(y: &[f64], k0: usize) -> f64 {
    y[k0 + 1..].iter().fold(0.0, |a, v| a.max((v - y[k0]).abs()))
}

fn signed_extreme(y: &[f64], k0: usize) -> f64 {
    y[k0 + 1..].iter().map(|v| v - y[k0]).fold(0.0, |a: f64, d| if d.abs() > a.abs() { d } else { a })
}

/// Mean over the final 10% of the post-event window (at least one sample).
fn final_value(y: &[f64], k0: usize) -> f64 {
    let post = y.len() - k0 - 1;
    let n = (post / 10).max(1);
    y[y.len() - n..].iter().sum::<f64>() / n as f64
}

fn settling(time: &[f64], y: &[f64], k0: usize, band: f64) -> Option<f64> {
    let fin = final_value(y, k0);
    match (k0 + 1..y.len()).rev().find(|&i| (y[i] - fin).abs() > band) {
        None => Some(0.0),
        Some(i) if i + 1 == y.len() => None,
        Some(i) => Some(time[i + 1] - time[k0]),
    }
}

/// Metrics of the post-event window. The sample at the event time is the
/// pre-event reference.
pub fn compute_metrics(trace: &Trace, t_event: f64, bands: Bands) -> Result<MetricReport, ScenarioError> {
    if trace.len() < 2 {
        return Err(ScenarioError::Metric("trace needs at least two samples".into()));
    }
    let k0 = trace.index_at(t_event);
    if k0 + 1 >= trace.len() {
        return Err(ScenarioError::Metric(format!("no samples after t_event = {t_event}")));
    }
    let v = channel(trace, "v_hub_pu")?;
    let f = channel(trace, "f_offshore_hz")?;
    let settling = vec![
        Settling { channel: "v_hub_pu".into(), band: bands.v_pu, time_s: settling(&trace.time, v, k0, bands.v_pu) },
        Settling { channel: "f_offshore_hz".into(), band: bands.f_hz, time_s: settling(&trace.time, f, k0, bands.f_hz) },
    ];
    let mut links = vec![];
    for k in 1.. {
        let Some(p_conv) = trace.channel(&format!("p_conv{k}_pu")) else { break };
        if p_conv[k0 + 1..].iter().all(|p| *p == 0.0) {
            continue;
        }
        let p = channel(trace, &format!("p_on{k}_pu"))?;
        let df = channel(trace, &format!("df_on{k}_hz"))?;
        let mut max_dpdt: f64 = 0.0;
        for i in k0..p.len() - 1 {
            max_dpdt = max_dpdt.max(((p[i + 1] - p[i]) / (trace.time[i + 1] - trace.time[i])).abs());
        }
        let fin = final_value(p, k0);
        let change = fin - p[k0];
        let peak = signed_extreme(p, k0);
        let overshoot = if change.abs() > 1e-9 { ((peak - change) / change).max(0.0) } else { 0.0 };
        links.push(LinkImpact { link: k, max_dpdt, delivered_change: change, overshoot, nadir_hz: signed_extreme(df, k0) });
    }
    Ok(MetricReport { t_event, max_dv_hub_pu: max_dev(v, k0), max_df_hz: max_dev(f, k0), settling, links })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationReport {
    pub zero_max_dpdt: f64,
    pub low_max_dpdt: f64,
    pub zero_nadir_hz: f64,
    pub low_nadir_hz: f64,
    /// zero-inertia over low-inertia max |dP/dt|
    pub ratio: f64,
    pub low_is_slower: bool,
}

/// Onshore impact of the same scenario under both inertia configurations.
pub fn propagation_report(zero: &Trace, low: &Trace, t_event: f64) -> Result<PropagationReport, ScenarioError> {
    let links = |t: &Trace| t.names.iter().filter(|n| n.starts_with("p_on")).cloned().collect::<Vec<_>>();
    if links(zero) != links(low) || zero.len() != low.len() || zero.dt() != low.dt() {
        return Err(ScenarioError::Metric("traces differ in links or time grid".into()));
    }
    let z = compute_metrics(zero, t_event, Bands::default())?;
    let l = compute_metrics(low, t_event, Bands::default())?;
    let (zd, ld) = (z.max_dpdt(), l.max_dpdt());
    Ok(PropagationReport {
        zero_max_dpdt: zd,
        low_max_dpdt: ld,
        zero_nadir_hz: z.worst_onshore_nadir_hz(),
        low_nadir_hz: l.worst_onshore_nadir_hz(),
        ratio: if ld > 0.0 { zd / ld } else if zd > 0.0 { f64::INFINITY } else { 1.0 },
        low_is_slower: ld < zd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(n: usize, dt: f64, f: impl Fn(f64) -> [f64; 6]) -> Trace {
        let names = ["v_hub_pu", "f_offshore_hz", "p_conv1_pu", "p_on1_pu", "df_on1_hz", "p_conv2_pu"];
        let mut tr = Trace::new(names.iter().map(|s| s.to_string()).collect());
        for i in 0..n {
            let t = i as f64 * dt;
            tr.push(t, &f(t));
        }
        tr
    }

    #[test]
    fn flat_trace_has_zero_metrics() {
        let tr = synthetic(101, 0.01, |_| [1.0, 50.0, 0.8, 0.8, 0.0, 0.0]);
        let m = compute_metrics(&tr, 0.2, Bands::default()).unwrap();
        assert_eq!(m.max_dv_hub_pu, 0.0);
        assert_eq!(m.max_df_hz, 0.0);
        assert!(m.settling.iter().all(|s| s.time_s == Some(0.0)));
        assert_eq!(m.max_dpdt(), 0.0);
        assert_eq!(m.links.len(), 1, "tripped-looking link 2 has no p_on channel");
    }

    #[test]
    fn step_metrics() {
        // v dips 0.05 and recovers at t = 0.5; p ramps 1 pu/s for 0.1 s
        let tr = synthetic(101, 0.01, |t| {
            let v = if t > 0.2 && t < 0.5 { 0.95 } else { 1.0 };
            let p = 0.8 + (t - 0.2).clamp(0.0, 0.1);
            [v, 50.0 - 0.1 * (t > 0.2) as u8 as f64, 0.8, p, 0.0, 0.0]
        });
        let m = compute_metrics(&tr, 0.2, Bands::default()).unwrap();
        assert!((m.max_dv_hub_pu - 0.05).abs() < 1e-12);
        assert!((m.max_df_hz - 0.1).abs() < 1e-9);
        let s = m.settling_of("v_hub_pu").unwrap().time_s.unwrap();
        assert!((s - 0.3).abs() < 1e-9, "{s}");
        assert!((m.max_dpdt() - 1.0).abs() < 1e-9);
        assert!((m.links[0].delivered_change - 0.1).abs() < 1e-9);
        assert!(m.links[0].overshoot.abs() < 1e-9);
    }

    #[test]
    fn unsettled_channel_is_flagged() {
        let tr = synthetic(101, 0.01, |t| [1.0 + 0.2 * (t - 0.2).max(0.0) * (40.0 * t).sin(), 50.0, 0.8, 0.8, 0.0, 0.0]);
        let m = compute_metrics(&tr, 0.2, Bands::default()).unwrap();
        assert_eq!(m.settling_of("v_hub_pu").unwrap().time_s, None);
    }

    #[test]
    fn missing_channel_is_an_error() {
        let mut tr = Trace::new(vec!["v_hub_pu".into()]);
        tr.push(0.0, &[1.0]);
        tr.push(0.1, &[1.0]);
        assert!(matches!(compute_metrics(&tr, 0.0, Bands::default()), Err(ScenarioError::Metric(_))));
    }

    #[test]
    fn no_event_propagation_has_zero_rates() {
        let tr = synthetic(51, 0.01, |_| [1.0, 50.0, 0.8, 0.8, 0.0, 0.0]);
        let r = propagation_report(&tr, &tr, 0.1).unwrap();
        assert_eq!(r.zero_max_dpdt, 0.0);
        assert_eq!(r.low_max_dpdt, 0.0);
        assert!(!r.low_is_slower);
    }
}
