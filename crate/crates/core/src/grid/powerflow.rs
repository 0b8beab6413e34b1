//! Newton–Raphson power flow in polar coordinates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{admittance::assemble_admittance, GridError, Network};

/// Specified quantities per bus. Injections use generator convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BusSetpoint {
    Slack { v: f64, angle: f64 },
    Pv { p: f64, v: f64 },
    Pq { p: f64, q: f64 },
}

/// Converged steady state.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub v: Vec<Complex64>,
    /// Net complex power injected into the network at each bus.
    pub s_injected: Vec<Complex64>,
    pub iterations: usize,
    pub mismatch: f64,
}

pub const PF_TOL: f64 = 1e-12;
pub const PF_MAX_ITER: usize = 50;

/// `S = V · conj(Y V)`.
pub fn injections(y: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    let vv = DVector::from_column_slice(v);
    let i = y * &vv;
    v.iter().zip(i.iter()).map(|(v, i)| v * i.conj()).collect()
}

pub fn power_flow(net: &Network, setpoints: &[BusSetpoint]) -> Result<OperatingPoint, GridError> {
    let y = assemble_admittance(net, net.base.f_base_hz)?;
    power_flow_with(&y, setpoints)
}

pub fn power_flow_with(y: &DMatrix<Complex64>, setpoints: &[BusSetpoint]) -> Result<OperatingPoint, GridError> {
    let n = y.nrows();
    if setpoints.len() != n {
        return Err(GridError::InvalidTopology(format!(
            "{} setpoints for {} buses",
            setpoints.len(),
            n
        )));
    }
    let slacks = setpoints.iter().filter(|s| matches!(s, BusSetpoint::Slack { .. })).count();
    if slacks != 1 {
        return Err(GridError::InvalidTopology(format!("expected one slack setpoint, got {slacks}")));
    }

    // flat start
    let mut vm = vec![1.0; n];
    let mut va = vec![0.0; n];
    for (i, s) in setpoints.iter().enumerate() {
        match *s {
            BusSetpoint::Slack { v, angle } => {
                vm[i] = v;
                va[i] = angle;
            }
            BusSetpoint::Pv { v, .. } => vm[i] = v,
            BusSetpoint::Pq { .. } => {}
        }
    }
    let ang_idx: Vec<usize> =
        (0..n).filter(|&i| !matches!(setpoints[i], BusSetpoint::Slack { .. })).collect();
    let mag_idx: Vec<usize> = (0..n).filter(|&i| matches!(setpoints[i], BusSetpoint::Pq { .. })).collect();
    let na = ang_idx.len();
    let dim = na + mag_idx.len();

    let compose = |vm: &[f64], va: &[f64]| -> Vec<Complex64> {
        vm.iter().zip(va).map(|(&m, &a)| Complex64::from_polar(m, a)).collect()
    };

    let mut it = 0;
    loop {
        let v = compose(&vm, &va);
        let s = injections(y, &v);
        let mut f = DVector::<f64>::zeros(dim);
        for (r, &i) in ang_idx.iter().enumerate() {
            let p_spec = match setpoints[i] {
                BusSetpoint::Pv { p, .. } | BusSetpoint::Pq { p, .. } => p,
                BusSetpoint::Slack { .. } => unreachable!(),
            };
            f[r] = s[i].re - p_spec;
        }
        for (r, &i) in mag_idx.iter().enumerate() {
            if let BusSetpoint::Pq { q, .. } = setpoints[i] {
                f[na + r] = s[i].im - q;
            }
        }
        let mismatch = f.amax();
        if !mismatch.is_finite() {
            return Err(GridError::Infeasible("non-finite mismatch".into()));
        }
        if mismatch < PF_TOL {
            return Ok(OperatingPoint { s_injected: s, v, iterations: it, mismatch });
        }
        if it >= PF_MAX_ITER {
            return Err(GridError::Diverged { iterations: it, mismatch });
        }
        it += 1;

        // dS/dVa and dS/dVm (dense)
        let vv = DVector::from_column_slice(&v);
        let ibus = y * &vv;
        let mut ds_da = DMatrix::<Complex64>::zeros(n, n);
        let mut ds_dm = DMatrix::<Complex64>::zeros(n, n);
        let vnorm: Vec<Complex64> = v.iter().map(|x| x / x.norm()).collect();
        for i in 0..n {
            for j in 0..n {
                let yij = y[(i, j)];
                // -j V_i conj(Y_ij V_j) for j != i, plus diagonal j V_i conj(I_i)
                let mut a = -Complex64::i() * v[i] * (yij * v[j]).conj();
                let mut m = v[i] * (yij * vnorm[j]).conj();
                if i == j {
                    a += Complex64::i() * v[i] * ibus[i].conj();
                    m += ibus[i].conj() * vnorm[i];
                }
                ds_da[(i, j)] = a;
                ds_dm[(i, j)] = m;
            }
        }
        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        for (r, &i) in ang_idx.iter().enumerate() {
            for (c, &j) in ang_idx.iter().enumerate() {
                jac[(r, c)] = ds_da[(i, j)].re;
            }
            for (c, &j) in mag_idx.iter().enumerate() {
                jac[(r, na + c)] = ds_dm[(i, j)].re;
            }
        }
        for (r, &i) in mag_idx.iter().enumerate() {
            for (c, &j) in ang_idx.iter().enumerate() {
                jac[(na + r, c)] = ds_da[(i, j)].im;
            }
            for (c, &j) in mag_idx.iter().enumerate() {
                jac[(na + r, na + c)] = ds_dm[(i, j)].im;
            }
        }
        let dx = jac
            .lu()
            .solve(&(-f))
            .ok_or_else(|| GridError::Infeasible("singular power-flow Jacobian".into()))?;
        for (r, &i) in ang_idx.iter().enumerate() {
            va[i] += dx[r];
        }
        for (r, &i) in mag_idx.iter().enumerate() {
            vm[i] += dx[na + r];
            if !(vm[i] > 0.2) {
                return Err(GridError::Infeasible(format!("voltage collapse at bus {i}")));
            }
        }
    }
}
