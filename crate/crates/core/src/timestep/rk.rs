//! Explicit Runge-Kutta integration of the semi-discrete system.

use crate::error::{Error, Result};

/// Explicit Butcher tableau.
#[derive(Clone, Debug, PartialEq)]
pub struct ButcherTableau {
    /// Strictly lower-triangular stage matrix, row-major `s x s`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl ButcherTableau {
    /// Classical fourth-order method.
    pub fn rk4() -> Self {
        #[rustfmt::skip]
        let a = vec![
            0.0, 0.0, 0.0, 0.0,
            0.5, 0.0, 0.0, 0.0,
            0.0, 0.5, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
        ];
        Self {
            a,
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 0.5, 1.0],
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.stages() + j]
    }
}

/// Stage storage for repeated steps of one system size.
#[derive(Clone, Debug)]
pub struct RungeKutta {
    tableau: ButcherTableau,
    slopes: Vec<Vec<f64>>,
    stage: Vec<f64>,
}

impl RungeKutta {
    pub fn new(tableau: ButcherTableau, len: usize) -> Self {
        let s = tableau.stages();
        Self {
            tableau,
            slopes: vec![vec![0.0; len]; s],
            stage: vec![0.0; len],
        }
    }

    pub fn rk4(len: usize) -> Self {
        Self::new(ButcherTableau::rk4(), len)
    }

    /// Advances `u` by `dt`. `residual` returns an auxiliary scalar rate
    /// (e.g. net boundary outflow) whose weighted integral over the step
    /// is returned; `limit` runs after every stage and after the update.
    pub fn step<R, L>(&mut self, u: &mut [f64], dt: f64, mut residual: R, mut limit: L) -> Result<f64>
    where
        R: FnMut(&[f64], &mut [f64]) -> Result<f64>,
        L: FnMut(&mut [f64]) -> Result<()>,
    {
        assert_eq!(u.len(), self.stage.len(), "state length changed");
        let s = self.tableau.stages();
        let mut aux = 0.0;
        for i in 0..s {
            self.stage.copy_from_slice(u);
            let mut touched = false;
            for j in 0..i {
                let aij = self.tableau.a(i, j);
                if aij != 0.0 {
                    touched = true;
                    let f = dt * aij;
                    for (x, k) in self.stage.iter_mut().zip(&self.slopes[j]) {
                        *x += f * k;
                    }
                }
            }
            if touched {
                limit(&mut self.stage)?;
            }
            let rate = residual(&self.stage, &mut self.slopes[i])?;
            aux += dt * self.tableau.b[i] * rate;
        }
        for (i, k) in self.slopes.iter().enumerate() {
            let f = dt * self.tableau.b[i];
            for (x, ki) in u.iter_mut().zip(k) {
                *x += f * ki;
            }
        }
        if let Some(pos) = u.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { cell: pos, variable: 0 });
        }
        limit(u)?;
        Ok(aux)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn tableau_consistency() {
        let t = ButcherTableau::rk4();
        let sum: f64 = t.b.iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
        for i in 0..t.stages() {
            let row: f64 = (0..t.stages()).map(|j| t.a(i, j)).sum();
            assert!((row - t.c[i]).abs() < 1e-15);
            for j in i..t.stages() {
                assert_eq!(t.a(i, j), 0.0);
            }
        }
    }

    fn decay_step(u0: f64, dt: f64) -> f64 {
        let mut rk = RungeKutta::rk4(1);
        let mut u = [u0];
        rk.step(
            &mut u,
            dt,
            |s, out| {
                out[0] = -s[0];
                Ok(0.0)
            },
            |_| Ok(()),
        )
        .unwrap();
        u[0]
    }

    #[test]
    fn scalar_decay_matches_taylor() {
        let h: f64 = 0.1;
        let taylor = 1.0 - h + h * h / 2.0 - h.powi(3) / 6.0 + h.powi(4) / 24.0;
        let u1 = decay_step(1.0, h);
        assert!((u1 - taylor).abs() < 1e-16);
        assert!((u1 - 0.90483750).abs() < 1e-8);
    }

    #[test]
    fn zero_residual_keeps_state() {
        let mut rk = RungeKutta::rk4(3);
        let mut u = [1.0, -2.0, 3.5];
        rk.step(&mut u, 0.3, |_, out| {
            out.fill(0.0);
            Ok(0.0)
        }, |_| Ok(()))
        .unwrap();
        assert_eq!(u, [1.0, -2.0, 3.5]);
    }

    #[test]
    fn linear_system_matches_matrix_polynomial() {
        let mut rng = rand_chacha_like();
        let n = 4;
        let l: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dt = 0.2;
        let matvec = |v: &[f64]| -> Vec<f64> {
            (0..n).map(|i| (0..n).map(|j| l[i * n + j] * v[j]).sum()).collect()
        };
        // oracle: (I + dtL + (dtL)^2/2 + (dtL)^3/6 + (dtL)^4/24) u0
        let mut term = u0.clone();
        let mut expected = u0.clone();
        for p in 1..=4 {
            term = matvec(&term).iter().map(|x| x * dt / p as f64).collect();
            for (e, t) in expected.iter_mut().zip(&term) {
                *e += t;
            }
        }
        let mut rk = RungeKutta::rk4(n);
        let mut u = u0.clone();
        rk.step(&mut u, dt, |s, out| {
            out.copy_from_slice(&matvec(s));
            Ok(0.0)
        }, |_| Ok(()))
        .unwrap();
        for (a, b) in u.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    fn rand_chacha_like() -> rand::rngs::StdRng {
        rand::rngs::StdRng::seed_from_u64(17)
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |steps: usize| {
            let dt = 1.0 / steps as f64;
            let mut u = 1.0;
            for _ in 0..steps {
                u = decay_step(u, dt);
            }
            (u - (-1.0f64).exp()).abs()
        };
        for steps in [10, 20, 40] {
            let ratio = err(steps) / err(2 * steps);
            assert!((ratio - 16.0).abs() <= 1.6, "ratio {ratio} at {steps} steps");
        }
    }

    #[test]
    fn limiter_runs_after_each_stage() {
        let mut rk = RungeKutta::rk4(1);
        let mut calls = 0;
        let mut u = [1.0];
        rk.step(&mut u, 0.1, |s, out| {
            out[0] = -s[0];
            Ok(0.0)
        }, |_| {
            calls += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(calls, 4);
    }
}
