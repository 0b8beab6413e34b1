//! EMT against phasor: the EMT trace is averaged onto the phasor time grid
//! and compared channel by channel.

use super::ScenarioError;
use crate::sim::Trace;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMismatch {
    pub channel: String,
    /// over the post-event window
    pub rms: f64,
    pub max: f64,
    /// after the event; `None` if the difference is still above ε at the end
    pub time_to_negligible: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MismatchReport {
    pub epsilon: f64,
    pub t_event: f64,
    pub channels: Vec<ChannelMismatch>,
}

impl MismatchReport {
    pub fn get(&self, channel: &str) -> Option<&ChannelMismatch> {
        self.channels.iter().find(|c| c.channel == channel)
    }

    /// Largest time-to-negligible over channels whose name starts with
    /// `prefix`; `None` if any of them never becomes negligible.
    pub fn worst_time_to_negligible(&self, prefix: &str) -> Option<f64> {
        let mut worst: f64 = 0.0;
        for c in self.channels.iter().filter(|c| c.channel.starts_with(prefix)) {
            worst = worst.max(c.time_to_negligible?);
        }
        Some(worst)
    }
}

/// Mean of `fine` over a window of width `h` centred on each time of `grid`.
/// Near the ends of `fine` the window is shifted inward to keep its width.
pub fn resample_mean(fine: &Trace, grid: &[f64], h: f64) -> Trace {
    let mut out = Trace::new(fine.names.clone());
    out.events = fine.events.clone();
    let mut row = vec![0.0; fine.names.len()];
    let Some(dt) = fine.dt() else { return out };
    let n = ((h / dt).round() as usize).clamp(1, fine.len());
    for &t in grid {
        let lo = fine.index_at(t).saturating_sub(n / 2).min(fine.len() - n);
        let hi = lo + n;
        for (r, c) in row.iter_mut().zip(&fine.data) {
            *r = c[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        }
        out.push(t, &row);
    }
    out
}

/// Compares an EMT and a phasor trace of the same scenario. The event time is
/// taken from the traces' event markers.
pub fn mismatch(emt: &Trace, phasor: &Trace, epsilon: f64) -> Result<MismatchReport, ScenarioError> {
    if !(epsilon > 0.0) {
        return Err(ScenarioError::Metric(format!("epsilon must be > 0, got {epsilon}")));
    }
    if emt.names != phasor.names {
        return Err(ScenarioError::Metric("EMT and phasor traces have different channels".into()));
    }
    let ev = |t: &Trace| t.events.iter().map(|(_, d)| d.clone()).collect::<Vec<_>>();
    if ev(emt) != ev(phasor) {
        return Err(ScenarioError::Metric("EMT and phasor traces come from different scenarios".into()));
    }
    if phasor.len() < 2 || emt.is_empty() {
        return Err(ScenarioError::Metric("traces too short to compare".into()));
    }
    let (t0, t1) = (emt.time[0], emt.time[emt.len() - 1]);
    let span = |t: &Trace| (t.time[0], t.time[t.len() - 1]);
    let (p0, p1) = span(phasor);
    let h = phasor.dt().unwrap_or(0.0);
    if (p0 - t0).abs() > 1e-9 || (p1 - t1).abs() > 1e-9 {
        return Err(ScenarioError::Metric(format!("time spans differ: EMT [{t0}, {t1}] vs phasor [{p0}, {p1}]")));
    }
    let t_event = phasor.events.first().map(|e| e.0).unwrap_or(p0);
    let avg = resample_mean(emt, &phasor.time, h);
    let k0 = phasor.index_at(t_event);
    let channels = phasor
        .names
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let d: Vec<f64> = (0..phasor.len()).map(|i| (avg.data[c][i] - phasor.data[c][i]).abs()).collect();
            let post = &d[k0..];
            let rms = (post.iter().map(|x| x * x).sum::<f64>() / post.len() as f64).sqrt();
            let max = post.iter().fold(0.0f64, |a, x| a.max(*x));
            let time_to_negligible = match (k0..d.len()).rev().find(|&i| d[i] >= epsilon) {
                None => Some(0.0),
                Some(i) if i + 1 == d.len() => None,
                Some(i) => Some(phasor.time[i + 1] - t_event),
            };
            ChannelMismatch { channel: name.clone(), rms, max, time_to_negligible }
        })
        .collect();
    Ok(MismatchReport { epsilon, t_event, channels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trace(dt: f64, t_end: f64, f: impl Fn(f64) -> f64) -> Trace {
        let mut tr = Trace::new(vec!["p_conv1_pu".into(), "v_hub_pu".into()]);
        let n = (t_end / dt).round() as usize;
        for i in 0..=n {
            let t = i as f64 * dt;
            tr.push(t, &[f(t), 1.0]);
        }
        tr.events.push((0.1, "trip conv2".into()));
        tr
    }

    #[test]
    fn identical_traces_give_zeros() {
        let tr = trace(0.005, 1.0, |t| (3.0 * t).sin());
        let r = mismatch(&tr, &tr, 0.01).unwrap();
        for c in &r.channels {
            assert_eq!((c.rms, c.max, c.time_to_negligible), (0.0, 0.0, Some(0.0)));
        }
    }

    #[test]
    fn averaging_removes_fast_ripple() {
        // 1 kHz ripple averages out exactly over a 5 ms window of 100 µs samples
        let slow = |t: f64| 0.5 + 0.1 * t;
        let emt = trace(1e-4, 1.0, |t| slow(t) + 0.2 * (2.0 * std::f64::consts::PI * 1000.0 * t).sin());
        let ph = trace(5e-3, 1.0, slow);
        let r = mismatch(&emt, &ph, 0.01).unwrap();
        let c = r.get("p_conv1_pu").unwrap();
        assert!(c.max < 0.01, "{}", c.max);
    }

    #[test]
    fn decaying_error_time_to_negligible() {
        // difference e^{-(t-0.1)/0.05} after the event crosses 0.01 at 0.05·ln 100
        let emt = trace(5e-3, 1.0, |t| if t > 0.1 { (-(t - 0.1) / 0.05).exp() } else { 0.0 });
        let ph = trace(5e-3, 1.0, |_| 0.0);
        let r = mismatch(&emt, &ph, 0.01).unwrap();
        let ttn = r.get("p_conv1_pu").unwrap().time_to_negligible.unwrap();
        let exact = 0.05 * 100f64.ln();
        assert!(ttn >= exact && ttn < exact + 0.005 + 1e-9, "{ttn} vs {exact}");
        assert_eq!(r.worst_time_to_negligible("p_conv"), Some(ttn));
    }

    #[test]
    fn different_scenarios_are_rejected() {
        let a = trace(5e-3, 1.0, |_| 0.0);
        let mut b = a.clone();
        b.events[0].1 = "trip conv3".into();
        assert!(mismatch(&a, &b, 0.01).is_err());
        let c = trace(5e-3, 0.5, |_| 0.0);
        assert!(mismatch(&a, &c, 0.01).is_err());
    }

    proptest! {
        #[test]
        fn shrinking_epsilon_never_shortens(amp in 0.0f64..1.0, tau in 0.01f64..0.5, e1 in 1e-4f64..0.5, e2 in 1e-4f64..0.5) {
            let emt = trace(5e-3, 1.0, |t| if t > 0.1 { amp * (-(t - 0.1) / tau).exp() * (20.0 * t).cos() } else { 0.0 });
            let ph = trace(5e-3, 1.0, |_| 0.0);
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let a = mismatch(&emt, &ph, lo).unwrap().get("p_conv1_pu").unwrap().time_to_negligible;
            let b = mismatch(&emt, &ph, hi).unwrap().get("p_conv1_pu").unwrap().time_to_negligible;
            let key = |x: Option<f64>| x.unwrap_or(f64::INFINITY);
            prop_assert!(key(a) >= key(b));
        }
    }
}
