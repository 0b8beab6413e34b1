//! Bus admittance matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{GridError, Network};

/// Builds the bus admittance matrix at frequency `f_hz`. Series reactances and
/// shunt susceptances are scaled by `f / f_base`.
pub fn assemble_admittance(net: &Network, f_hz: f64) -> Result<DMatrix<Complex64>, GridError> {
    assemble_with(net, f_hz, &[], &[])
}

/// As [`assemble_admittance`], skipping branches / transformers whose flag is `false`.
pub fn assemble_with(
    net: &Network,
    f_hz: f64,
    branch_on: &[bool],
    trafo_on: &[bool],
) -> Result<DMatrix<Complex64>, GridError> {
    if !(f_hz > 0.0) {
        return Err(GridError::InvalidBase(format!("frequency must be > 0, got {f_hz}")));
    }
    let k = f_hz / net.base.f_base_hz;
    let n = net.bus_count();
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    let mut touched = vec![false; n];
    for (i, b) in net.buses.iter().enumerate() {
        if b.shunt_b != 0.0 {
            y[(i, i)] += Complex64::new(0.0, b.shunt_b * k);
            touched[i] = true;
        }
    }
    for (idx, br) in net.branches.iter().enumerate() {
        if !branch_on.get(idx).copied().unwrap_or(true) {
            continue;
        }
        let ys = Complex64::new(br.r, br.x * k).inv();
        let sh = Complex64::new(0.0, br.b_half * k);
        let (f, t) = (br.from_bus, br.to_bus);
        y[(f, f)] += ys + sh;
        y[(t, t)] += ys + sh;
        y[(f, t)] -= ys;
        y[(t, f)] -= ys;
        touched[f] = true;
        touched[t] = true;
    }
    for (idx, tr) in net.transformers.iter().enumerate() {
        if !trafo_on.get(idx).copied().unwrap_or(true) {
            continue;
        }
        let ys = Complex64::new(tr.r, tr.x * k).inv();
        let (f, t) = (tr.from_bus, tr.to_bus);
        y[(f, f)] += ys / (tr.ratio * tr.ratio);
        y[(t, t)] += ys;
        y[(f, t)] -= ys / tr.ratio;
        y[(t, f)] -= ys / tr.ratio;
        touched[f] = true;
        touched[t] = true;
    }
    if let Some(bus) = touched.iter().position(|t| !t) {
        return Err(GridError::SingularAdmittance(bus));
    }
    Ok(y)
}

/// Total shunt admittance connected at each bus (row sums of `Y`).
pub fn shunt_per_bus(net: &Network, f_hz: f64) -> Vec<Complex64> {
    let k = f_hz / net.base.f_base_hz;
    let mut out: Vec<Complex64> =
        net.buses.iter().map(|b| Complex64::new(0.0, b.shunt_b * k)).collect();
    for br in &net.branches {
        out[br.from_bus] += Complex64::new(0.0, br.b_half * k);
        out[br.to_bus] += Complex64::new(0.0, br.b_half * k);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BusKind, CableSpec, HubLayout, PerUnitBase, PiSection, ZONE};

    fn two_bus() -> Network {
        let mut net = Network::new(PerUnitBase::default());
        net.add_bus("a", ZONE, BusKind::Slack);
        net.add_bus("b", ZONE, BusKind::Pq);
        net.branches.push(PiSection { from_bus: 0, to_bus: 1, r: 0.01, x: 0.1, b_half: 0.02 });
        net
    }

    #[test]
    fn two_bus_off_diagonal() {
        let y = assemble_admittance(&two_bus(), 50.0).unwrap();
        let expect = -Complex64::new(0.01, 0.1).inv();
        assert!((y[(0, 1)] - expect).norm() < 1e-14);
        assert_eq!(y.nrows(), 2);
    }

    #[test]
    fn shunts_scale_with_frequency() {
        let net = Network::hub_and_spoke(PerUnitBase::default(), &HubLayout::default()).unwrap();
        let s50 = shunt_per_bus(&net, 50.0);
        let s3 = shunt_per_bus(&net, 50.0 / 3.0);
        for (a, b) in s50.iter().zip(&s3) {
            assert!((a.im / 3.0 - b.im).abs() < 1e-15);
        }
        // row sums reproduce the shunts
        let y = assemble_admittance(&net, 50.0 / 3.0).unwrap();
        for i in 0..net.bus_count() {
            let row: Complex64 = (0..net.bus_count()).map(|j| y[(i, j)]).sum();
            assert!((row - s3[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn hub_matrix_is_symmetric_and_permutation_invariant() {
        let mut net = Network::hub_and_spoke(PerUnitBase::default(), &HubLayout::default()).unwrap();
        let y = assemble_admittance(&net, 50.0).unwrap();
        assert_eq!(y.nrows(), net.bus_count());
        for i in 0..y.nrows() {
            for j in 0..y.ncols() {
                assert!((y[(i, j)] - y[(j, i)]).norm() < 1e-14);
            }
        }
        // reversed branch order gives the same matrix
        net.branches.reverse();
        let y2 = assemble_admittance(&net, 50.0).unwrap();
        assert!((y - y2).iter().all(|d| d.norm() < 1e-12));
    }

    #[test]
    fn floating_bus_is_flagged() {
        let mut net = two_bus();
        net.add_bus("c", ZONE, BusKind::Pq);
        assert!(matches!(assemble_admittance(&net, 50.0), Err(GridError::SingularAdmittance(2))));
    }

    #[test]
    fn transformer_stamp_is_symmetric() {
        let mut net = two_bus();
        net.add_bus("c", ZONE, BusKind::Pq);
        net.transformers.push(crate::grid::Transformer { from_bus: 1, to_bus: 2, ratio: 1.05, r: 0.0, x: 0.12 });
        let y = assemble_admittance(&net, 50.0).unwrap();
        assert!((y[(1, 2)] - y[(2, 1)]).norm() < 1e-15);
        let _ = CableSpec::hv_220kv();
    }
}
