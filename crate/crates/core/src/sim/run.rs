//! Fixed-step time integration with events.

use super::system::Observables;
use super::{solve_algebraic, Event, SimError, SimSystem, SolverOptions, StepStats, Trace, Trapezoidal};
use crate::devices::Fidelity;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunStats {
    pub steps: usize,
    pub solver: StepStats,
    pub wall_s: f64,
}

impl SimSystem {
    pub fn channel_names(&self) -> Vec<String> {
        let mut n = vec!["v_hub_pu".to_string(), "f_offshore_hz".to_string()];
        let nc = self.converter_names().len();
        for k in 1..=nc {
            n.push(format!("p_conv{k}_pu"));
            n.push(format!("q_conv{k}_pu"));
            n.push(format!("i_conv{k}_pu"));
        }
        for k in 1..=nc {
            n.push(format!("vdc_off{k}_pu"));
            n.push(format!("vdc_on{k}_pu"));
            n.push(format!("p_on{k}_pu"));
            n.push(format!("df_on{k}_hz"));
        }
        for k in 1..=self.condenser_count() {
            n.push(format!("dw_sc{k}_pu"));
            n.push(format!("q_sc{k}_pu"));
        }
        for k in 1..=self.cfg.wind_power_mw.len() {
            n.push(format!("p_wf{k}_pu"));
        }
        n
    }

    pub fn channel_values(&self, o: &Observables) -> Vec<f64> {
        let mut v = vec![o.v[crate::grid::HUB_BUS].norm(), o.f_offshore_hz];
        for k in 0..o.conv_p.len() {
            v.extend([o.conv_p[k], o.conv_q[k], o.conv_i[k]]);
        }
        for k in 0..o.conv_p.len() {
            v.extend([o.vdc_off[k], o.vdc_on[k], o.p_on[k], o.df_on_hz[k]]);
        }
        for k in 0..o.sc_dw.len() {
            v.extend([o.sc_dw[k], o.sc_q[k]]);
        }
        v.extend(o.wf_p.iter().copied());
        v
    }

    /// Integrates from `x` to `t_end` with step `dt`, applying `events` at the
    /// nearest step boundary. The sample at an event time is the pre-event state.
    pub fn run(
        &mut self,
        x: &mut [f64],
        events: &[Event],
        t_end: f64,
        dt: f64,
        opts: SolverOptions,
    ) -> Result<(Trace, RunStats), SimError> {
        if !(dt > 0.0 && t_end > 0.0) {
            return Err(SimError::Config(format!("need dt > 0 and t_end > 0, got {dt}, {t_end}")));
        }
        for e in events {
            e.validate(t_end)?;
        }
        let start = std::time::Instant::now();
        let n_steps = (t_end / dt).round() as usize;
        let mut pending: Vec<(usize, &Event)> = events.iter().map(|e| ((e.time / dt).round() as usize, e)).collect();
        pending.sort_by_key(|(k, _)| *k);
        let mut trace = Trace::new(self.channel_names());
        let mut integ = Trapezoidal::new(opts);
        let mut next = 0;
        for n in 0..=n_steps {
            let t = n as f64 * dt;
            let obs = self.observe(x)?;
            trace.push(t, &self.channel_values(&obs));
            if n == n_steps {
                break;
            }
            let mut fired = false;
            while next < pending.len() && pending[next].0 == n {
                let ev = pending[next].1;
                self.apply_event(x, ev)?;
                trace.events.push((t, ev.describe()));
                fired = true;
                next += 1;
            }
            if fired {
                self.finish_events(x)?;
                integ.invalidate();
                if self.mode == Fidelity::Phasor {
                    solve_algebraic(self, x, 1e-10, 20)?;
                }
            }
            integ.step(self, x, dt, t)?;
            self.check_limits(x, t + dt)?;
        }
        let stats = RunStats { steps: n_steps, solver: integ.total, wall_s: start.elapsed().as_secs_f64() };
        Ok((trace, stats))
    }
}
