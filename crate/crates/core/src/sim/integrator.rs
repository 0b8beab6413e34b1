//! Implicit trapezoidal rule with chord Newton iterations.

use nalgebra::{DMatrix, DVector, LU};

use super::{Dynamics, SimError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// iterations after which the Jacobian is refreshed for the next step
    pub refresh_after: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 20, refresh_after: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub iterations: usize,
    pub jacobians: usize,
    pub substeps: usize,
}

/// Forward-difference Jacobian of `f` at `x`.
pub fn fd_jacobian<D: Dynamics + ?Sized>(sys: &D, x: &[f64], f0: &[f64]) -> Result<DMatrix<f64>, SimError> {
    let n = sys.dim();
    let mut a = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; n];
    for j in 0..n {
        let h = 1.5e-8 * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        sys.rhs(&xp, &mut fp)?;
        for i in 0..n {
            a[(i, j)] = (fp[i] - f0[i]) / h;
        }
        xp[j] = x[j];
    }
    Ok(a)
}

/// Fixed-step trapezoidal integrator. The iteration matrix `M - h/2·A` is
/// factorized once and reused until convergence degrades or it is invalidated.
pub struct Trapezoidal {
    pub opts: SolverOptions,
    jac: Option<DMatrix<f64>>,
    lu: Option<(f64, LU<f64, nalgebra::Dyn, nalgebra::Dyn>)>,
    stale: bool,
    pub total: StepStats,
}

impl Trapezoidal {
    pub fn new(opts: SolverOptions) -> Self {
        Self { opts, jac: None, lu: None, stale: true, total: StepStats::default() }
    }

    /// Forces a fresh Jacobian on the next step (after events).
    pub fn invalidate(&mut self) {
        self.stale = true;
    }

    fn refresh<D: Dynamics + ?Sized>(&mut self, sys: &D, x: &[f64], fx: &[f64], stats: &mut StepStats) -> Result<(), SimError> {
        self.jac = Some(fd_jacobian(sys, x, fx)?);
        self.lu = None;
        self.stale = false;
        stats.jacobians += 1;
        Ok(())
    }

    fn factor<D: Dynamics + ?Sized>(&mut self, sys: &D, h: f64, t: f64) -> Result<(), SimError> {
        if matches!(&self.lu, Some((hh, _)) if *hh == h) {
            return Ok(());
        }
        let a = self.jac.as_ref().expect("jacobian present");
        let alg = sys.algebraic();
        let mut g = a * (-0.5 * h);
        for (i, is_alg) in alg.iter().enumerate() {
            if !is_alg {
                g[(i, i)] += 1.0;
            }
        }
        let lu = g.lu();
        if !lu.is_invertible() {
            return Err(SimError::Singular { t });
        }
        self.lu = Some((h, lu));
        Ok(())
    }

    /// Chord iterations for one step of size `h` from `x` (with `fx = f(x)`).
    fn attempt<D: Dynamics + ?Sized>(
        &mut self,
        sys: &D,
        x: &[f64],
        fx: &[f64],
        h: f64,
        t: f64,
        stats: &mut StepStats,
    ) -> Result<Option<Vec<f64>>, SimError> {
        self.factor(sys, h, t)?;
        let n = sys.dim();
        let alg = sys.algebraic();
        let mut y: Vec<f64> = (0..n).map(|i| if alg[i] { x[i] } else { x[i] + h * fx[i] }).collect();
        let mut fy = vec![0.0; n];
        let mut r = DVector::zeros(n);
        for it in 1..=self.opts.max_iter {
            stats.iterations += 1;
            sys.rhs(&y, &mut fy)?;
            for i in 0..n {
                r[i] = if alg[i] { 0.5 * h * fy[i] } else { -(y[i] - x[i] - 0.5 * h * (fy[i] + fx[i])) };
            }
            let (_, lu) = self.lu.as_ref().expect("factorized");
            if !lu.solve_mut(&mut r) {
                return Err(SimError::Singular { t });
            }
            let mut dmax: f64 = 0.0;
            for i in 0..n {
                y[i] += r[i];
                dmax = dmax.max(r[i].abs());
            }
            if !dmax.is_finite() {
                return Ok(None);
            }
            if dmax <= self.opts.tol {
                if it >= self.opts.refresh_after {
                    self.stale = true;
                }
                return Ok(Some(y));
            }
        }
        Ok(None)
    }

    /// Advances `x` by `h`. On failure the Jacobian is refreshed, then the
    /// step is retried as eight substeps; failing that, the error is fatal.
    pub fn step<D: Dynamics + ?Sized>(&mut self, sys: &D, x: &mut [f64], h: f64, t: f64) -> Result<StepStats, SimError> {
        if !(h > 0.0) {
            return Err(SimError::Config(format!("time step must be > 0, got {h}")));
        }
        let n = sys.dim();
        let mut stats = StepStats::default();
        let mut fx = vec![0.0; n];
        sys.rhs(x, &mut fx)?;
        if self.stale || self.jac.is_none() {
            self.refresh(sys, x, &fx, &mut stats)?;
        }
        let mut res = self.attempt(sys, x, &fx, h, t, &mut stats)?;
        if res.is_none() {
            self.refresh(sys, x, &fx, &mut stats)?;
            res = self.attempt(sys, x, &fx, h, t, &mut stats)?;
        }
        match res {
            Some(y) => x.copy_from_slice(&y),
            None => {
                let hs = h / 8.0;
                let mut xs = x.to_vec();
                for k in 0..8 {
                    stats.substeps += 1;
                    let mut fs = vec![0.0; n];
                    sys.rhs(&xs, &mut fs)?;
                    self.refresh(sys, &xs, &fs, &mut stats)?;
                    match self.attempt(sys, &xs, &fs, hs, t + k as f64 * hs, &mut stats)? {
                        Some(y) => xs = y,
                        None => {
                            let mut fy = vec![0.0; n];
                            sys.rhs(&xs, &mut fy)?;
                            let residual = fy.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                            return Err(SimError::NewtonFailed { t, residual });
                        }
                    }
                }
                x.copy_from_slice(&xs);
                self.stale = true;
            }
        }
        self.total.iterations += stats.iterations;
        self.total.jacobians += stats.jacobians;
        self.total.substeps += stats.substeps;
        Ok(stats)
    }
}

/// Newton solve of the algebraic rows with differential states held fixed.
pub fn solve_algebraic<D: Dynamics + ?Sized>(sys: &D, x: &mut [f64], tol: f64, max_iter: usize) -> Result<(), SimError> {
    let alg: Vec<usize> = (0..sys.dim()).filter(|&i| sys.algebraic()[i]).collect();
    if alg.is_empty() {
        return Ok(());
    }
    let n = sys.dim();
    let mut f = vec![0.0; n];
    for _ in 0..max_iter {
        sys.rhs(x, &mut f)?;
        let res = alg.iter().fold(0.0f64, |a, &i| a.max(f[i].abs()));
        if res < tol {
            return Ok(());
        }
        let a = fd_jacobian(sys, x, &f)?;
        let m = alg.len();
        let sub = DMatrix::from_fn(m, m, |i, j| a[(alg[i], alg[j])]);
        let rhs = DVector::from_iterator(m, alg.iter().map(|&i| -f[i]));
        let dx = sub.lu().solve(&rhs).ok_or(SimError::Singular { t: f64::NAN })?;
        for (k, &i) in alg.iter().enumerate() {
            x[i] += dx[k];
        }
    }
    sys.rhs(x, &mut f)?;
    let residual = alg.iter().fold(0.0f64, |a, &i| a.max(f[i].abs()));
    if residual < tol * 1e3 {
        Ok(())
    } else {
        Err(SimError::NewtonFailed { t: f64::NAN, residual })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub struct Linear {
        pub a: DMatrix<f64>,
        pub alg: Vec<bool>,
    }

    impl Dynamics for Linear {
        fn dim(&self) -> usize {
            self.a.nrows()
        }
        fn algebraic(&self) -> &[bool] {
            &self.alg
        }
        fn rhs(&self, x: &[f64], f: &mut [f64]) -> Result<(), SimError> {
            let v = &self.a * DVector::from_column_slice(x);
            f.copy_from_slice(v.as_slice());
            Ok(())
        }
    }

    fn scalar(l: f64) -> Linear {
        Linear { a: DMatrix::from_element(1, 1, l), alg: vec![false] }
    }

    #[test]
    fn scalar_closed_form() {
        let (l, h) = (-3.0, 0.1);
        let sys = scalar(l);
        let mut x = [1.0];
        Trapezoidal::new(SolverOptions::default()).step(&sys, &mut x, h, 0.0).unwrap();
        let expect = (1.0 + l * h / 2.0) / (1.0 - l * h / 2.0);
        assert!((x[0] - expect).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn a_stable(l in -1e6f64..-1e-3, h in 1e-5f64..10.0) {
            let sys = scalar(l);
            let mut x = [1.0];
            Trapezoidal::new(SolverOptions::default()).step(&sys, &mut x, h, 0.0).unwrap();
            prop_assert!(x[0].abs() < 1.0);
        }
    }

    fn lc_error(h: f64) -> f64 {
        // x'' = -w² x, 1 s
        let w = 2.0 * std::f64::consts::PI * 5.0;
        let sys = Linear { a: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -w * w, 0.0]), alg: vec![false, false] };
        let mut x = [1.0, 0.0];
        let mut tr = Trapezoidal::new(SolverOptions::default());
        let n = (1.0 / h).round() as usize;
        for k in 0..n {
            tr.step(&sys, &mut x, h, k as f64 * h).unwrap();
        }
        ((x[0] - w.cos()).powi(2) + (x[1] / w + w.sin()).powi(2)).sqrt()
    }

    #[test]
    fn second_order_convergence() {
        let e1 = lc_error(1e-3);
        let e2 = lc_error(5e-4);
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn algebraic_rows_are_enforced() {
        // x' = -x + y, 0 = x - 2y
        let sys = Linear { a: DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -2.0]), alg: vec![false, true] };
        let mut x = [1.0, 0.3];
        solve_algebraic(&sys, &mut x, 1e-12, 10).unwrap();
        assert!((x[1] - 0.5).abs() < 1e-10);
        let mut tr = Trapezoidal::new(SolverOptions::default());
        for k in 0..100 {
            tr.step(&sys, &mut x, 0.01, k as f64 * 0.01).unwrap();
        }
        assert!((x[0] - 2.0 * x[1]).abs() < 1e-9);
        assert!((x[0] - (-0.5f64).exp()).abs() < 1e-4);
    }
}
