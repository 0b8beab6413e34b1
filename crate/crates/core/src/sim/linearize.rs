//! Numerical small-signal analysis: central-difference Jacobian, elimination
//! of algebraic states, deflation of the phase-rotation mode, eigenvalues.

use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use super::{Dynamics, SimError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenmode {
    pub lambda: Complex64,
    pub freq_hz: f64,
    pub damping: f64,
}

impl Eigenmode {
    pub fn new(lambda: Complex64) -> Self {
        let m = lambda.norm();
        let damping = if m > 0.0 { -lambda.re / m } else { 1.0 };
        Self { lambda, freq_hz: lambda.im.abs() / (2.0 * std::f64::consts::PI), damping }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallSignal {
    /// reduced state matrix
    pub a: DMatrix<f64>,
    pub modes: Vec<Eigenmode>,
    /// whether the rotation mode was removed
    pub deflated: bool,
    pub eps: f64,
    /// largest relative eigenvalue change when `eps` is halved
    pub eps_sensitivity: f64,
    pub warning: Option<String>,
}

impl SmallSignal {
    pub fn max_real(&self) -> f64 {
        self.modes.iter().map(|m| m.lambda.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_damping(&self) -> f64 {
        self.modes.iter().map(|m| m.damping).fold(f64::INFINITY, f64::min)
    }

    /// Modes with `|λ|` at most `cutoff` rad/s.
    pub fn slow(&self, cutoff: f64) -> Vec<Eigenmode> {
        self.modes.iter().copied().filter(|m| m.lambda.norm() <= cutoff).collect()
    }
}

fn central_jacobian<D: Dynamics + ?Sized>(sys: &D, x: &[f64], eps: f64, keep: &[usize]) -> Result<DMatrix<f64>, SimError> {
    let n = sys.dim();
    let mut a = DMatrix::zeros(keep.len(), keep.len());
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for (jj, &j) in keep.iter().enumerate() {
        let h = eps * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        sys.rhs(&xp, &mut fp)?;
        xp[j] = x[j] - h;
        sys.rhs(&xp, &mut fm)?;
        xp[j] = x[j];
        for (ii, &i) in keep.iter().enumerate() {
            a[(ii, jj)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(a)
}

fn reduced<D: Dynamics + ?Sized>(sys: &D, x: &[f64], eps: f64) -> Result<(DMatrix<f64>, bool), SimError> {
    let excl = sys.excluded();
    let keep: Vec<usize> = (0..sys.dim()).filter(|&i| !excl[i]).collect();
    let full = central_jacobian(sys, x, eps, &keep)?;
    let alg = sys.algebraic();
    let d: Vec<usize> = (0..keep.len()).filter(|&k| !alg[keep[k]]).collect();
    let g: Vec<usize> = (0..keep.len()).filter(|&k| alg[keep[k]]).collect();
    let pick = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| full[(rows[i], cols[j])]);
    let mut a = pick(&d, &d);
    if !g.is_empty() {
        let agg = pick(&g, &g);
        let lu = agg.lu();
        let x_ad = lu.solve(&pick(&g, &d)).ok_or(SimError::Singular { t: f64::NAN })?;
        a -= pick(&d, &g) * x_ad;
    }
    // rotation deflation on the differential subspace
    let Some(r_full) = sys.rotation(x) else { return Ok((a, false)) };
    let r: Vec<f64> = d.iter().map(|&k| r_full[keep[k]]).collect();
    let Some((j, &rj)) = r.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())) else {
        return Ok((a, false));
    };
    if rj.abs() < 1e-12 {
        return Ok((a, false));
    }
    let n = a.nrows();
    // P = I - r e_j^T / r_j removes the r direction; drop row/column j
    let aj = a.row(j).clone_owned();
    let mut pa = a.clone();
    for i in 0..n {
        let s = r[i] / rj;
        for c in 0..n {
            pa[(i, c)] -= s * aj[c];
        }
    }
    let idx: Vec<usize> = (0..n).filter(|&i| i != j).collect();
    Ok((DMatrix::from_fn(n - 1, n - 1, |i, c| pa[(idx[i], idx[c])]), true))
}

fn eigen(a: &DMatrix<f64>) -> Result<Vec<Eigenmode>, SimError> {
    if a.nrows() == 0 {
        return Ok(vec![]);
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(SimError::Device(crate::devices::DeviceError::NonFinite("state matrix")));
    }
    let mut b = a.clone();
    balance_parlett_reinsch(&mut b);
    let schur = Schur::try_new(b, 1e-12, 100_000 + 100 * a.nrows())
        .ok_or_else(|| SimError::Config("eigenvalue iteration did not converge".into()))?;
    let mut m: Vec<Eigenmode> = schur.complex_eigenvalues().iter().map(|l| Eigenmode::new(*l)).collect();
    m.sort_by(|p, q| q.lambda.re.total_cmp(&p.lambda.re).then(p.lambda.im.total_cmp(&q.lambda.im)));
    Ok(m)
}

/// Largest relative distance from each mode in `a` to its nearest mode in `b`.
pub fn match_modes(a: &[Eigenmode], b: &[Eigenmode]) -> f64 {
    a.iter()
        .map(|m| {
            b.iter()
                .map(|n| (m.lambda - n.lambda).norm() / m.lambda.norm().max(1.0))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

pub fn linearize<D: Dynamics + ?Sized>(sys: &D, x: &[f64]) -> Result<SmallSignal, SimError> {
    linearize_with(sys, x, 1e-6)
}

pub fn linearize_with<D: Dynamics + ?Sized>(sys: &D, x: &[f64], eps: f64) -> Result<SmallSignal, SimError> {
    let mut f = vec![0.0; sys.dim()];
    sys.rhs(x, &mut f)?;
    let excl = sys.excluded();
    let norm = f.iter().zip(&excl).filter(|(_, e)| !**e).fold(0.0f64, |a, (v, _)| a.max(v.abs()));
    if !(norm < 1e-8) {
        return Err(SimError::NotEquilibrium(norm));
    }
    let (a, deflated) = reduced(sys, x, eps)?;
    let modes = eigen(&a)?;
    let (a2, _) = reduced(sys, x, eps / 2.0)?;
    let modes2 = eigen(&a2)?;
    let eps_sensitivity = match_modes(&modes, &modes2);
    let warning = (eps_sensitivity > 1e-3)
        .then(|| format!("eigenvalues move by {:.2e} (relative) when the perturbation is halved", eps_sensitivity));
    Ok(SmallSignal { a, modes, deflated, eps, eps_sensitivity, warning })
}
