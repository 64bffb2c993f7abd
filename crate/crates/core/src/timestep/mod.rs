//! Time integration: Runge-Kutta stepping, CFL control and the run driver.

pub mod positivity;
mod rk;

pub use rk::{ButcherTableau, RungeKutta};

use crate::error::{Error, Result};

/// A spatially discretised system `dU/dt = L(U)`.
pub trait SemiDiscrete {
    /// Writes `L(state)` into `out` and returns the net rate at which water
    /// leaves the domain through its boundary (zero for closed domains).
    fn residual(&self, state: &[f64], out: &mut [f64]) -> Result<f64>;

    /// Post-stage limiting; the identity when no limiter is enabled.
    fn limit(&self, state: &mut [f64]) -> Result<()>;

    /// Largest stable step for the given CFL number.
    fn stable_dt(&self, state: &[f64], cfl: f64) -> Result<f64>;

    /// Total water volume.
    fn mass(&self, state: &[f64]) -> f64;
}

/// CFL number used when none is given.
pub fn default_cfl(degree: usize) -> f64 {
    match degree {
        0 | 1 => 0.18,
        2 => 0.1,
        _ => 0.06,
    }
}

/// `cfl * dx_min / max(|u| + c)`.
pub fn dt_1d(cfl: f64, dx_min: f64, speed: f64) -> Result<f64> {
    if !(speed > 0.0) {
        return Err(Error::AllDry);
    }
    Ok(cfl * dx_min / speed)
}

/// `cfl / (max(|u| + c) / dx + max(|v| + c) / dy)`.
pub fn dt_2d(cfl: f64, dx: f64, dy: f64, speed_x: f64, speed_y: f64) -> Result<f64> {
    let rate = speed_x / dx + speed_y / dy;
    if !(rate > 0.0) {
        return Err(Error::AllDry);
    }
    Ok(cfl / rate)
}

/// Shortens `dt` so that a step from `t` does not pass `stop`.
pub fn clip_dt(t: f64, dt: f64, stop: f64) -> f64 {
    let remaining = stop - t;
    // avoid leaving a sliver step behind
    if dt >= remaining || remaining - dt <= 1e-12 * stop.abs().max(1.0) {
        remaining
    } else {
        dt
    }
}

/// Owns a system, its state and the clock.
pub struct Simulation<S: SemiDiscrete> {
    system: S,
    state: Vec<f64>,
    time: f64,
    steps: usize,
    outflow: f64,
    cfl: f64,
    rk: RungeKutta,
}

impl<S: SemiDiscrete> Simulation<S> {
    pub fn new(system: S, state: Vec<f64>, cfl: f64) -> Result<Self> {
        if !(cfl > 0.0) {
            return Err(Error::InvalidConfig(format!("cfl must be positive, got {cfl}")));
        }
        let rk = RungeKutta::rk4(state.len());
        Ok(Self { system, state, time: 0.0, steps: 0, outflow: 0.0, cfl, rk })
    }

    pub fn system(&self) -> &S {
        &self.system
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn into_state(self) -> Vec<f64> {
        self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Water that has left through the boundary since the start.
    pub fn boundary_outflow(&self) -> f64 {
        self.outflow
    }

    /// Current mass plus everything that has flowed out.
    pub fn mass_budget(&self) -> f64 {
        self.system.mass(&self.state) + self.outflow
    }

    /// Takes one step without passing `stop`; returns the step size.
    pub fn step_towards(&mut self, stop: f64) -> Result<f64> {
        let t = self.time;
        let dt = self.try_step(t, stop).map_err(|e| e.at_time(t))?;
        self.time = if dt == stop - t { stop } else { t + dt };
        self.steps += 1;
        Ok(dt)
    }

    fn try_step(&mut self, t: f64, stop: f64) -> Result<f64> {
        let dt = clip_dt(t, self.system.stable_dt(&self.state, self.cfl)?, stop);
        let system = &self.system;
        self.outflow += self.rk.step(
            &mut self.state,
            dt,
            |u, r| system.residual(u, r),
            |u| system.limit(u),
        )?;
        Ok(dt)
    }

    /// Steps until `stop`, calling `observe` after every step.
    pub fn advance_with<F: FnMut(&Self)>(&mut self, stop: f64, mut observe: F) -> Result<()> {
        while self.time < stop {
            self.step_towards(stop)?;
            observe(self);
        }
        Ok(())
    }

    pub fn advance_to(&mut self, stop: f64) -> Result<()> {
        self.advance_with(stop, |_| {})
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cfl_defaults() {
        assert_eq!(default_cfl(1), 0.18);
        assert_eq!(default_cfl(2), 0.1);
        assert_eq!(default_cfl(3), 0.06);
    }

    #[test]
    fn dt_example() {
        let c = (9.812f64 * 2.0).sqrt();
        let dt = dt_1d(0.1, 0.02, 0.5 + c).unwrap();
        assert!((dt - 0.1 * 0.02 / 4.92984).abs() < 1e-8);
        assert!(dt_1d(0.1, 0.02, 0.0).is_err());
        let dt2 = dt_2d(0.1, 0.01, 0.02, 3.0, 3.0).unwrap();
        assert!((dt2 - 0.1 / 450.0).abs() < 1e-15);
    }

    #[test]
    fn clipping_lands_on_stop() {
        assert_eq!(clip_dt(0.0, 0.3, 1.0), 0.3);
        assert_eq!(clip_dt(0.9, 0.3, 1.0), 1.0 - 0.9);
        assert_eq!(clip_dt(0.9, 0.1 - 1e-14, 1.0), 1.0 - 0.9);
    }

    struct Decay;

    impl SemiDiscrete for Decay {
        fn residual(&self, state: &[f64], out: &mut [f64]) -> Result<f64> {
            out[0] = -state[0];
            Ok(state[0])
        }
        fn limit(&self, _: &mut [f64]) -> Result<()> {
            Ok(())
        }
        fn stable_dt(&self, _: &[f64], cfl: f64) -> Result<f64> {
            Ok(cfl)
        }
        fn mass(&self, state: &[f64]) -> f64 {
            state[0]
        }
    }

    #[test]
    fn driver_hits_stop_time_and_tracks_outflow() {
        let mut sim = Simulation::new(Decay, vec![1.0], 0.03).unwrap();
        sim.advance_to(1.0).unwrap();
        assert_eq!(sim.time(), 1.0);
        assert_eq!(sim.steps(), 34);
        assert!((sim.state()[0] - (-1.0f64).exp()).abs() < 1e-8);
        // outflow equals the loss, so the budget is conserved
        assert!((sim.mass_budget() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn driver_rejects_bad_cfl() {
        assert!(Simulation::new(Decay, vec![1.0], 0.0).is_err());
    }
}
