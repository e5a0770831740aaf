//! Explicit Runge–Kutta stepping on flat complex buffers.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    FixedRk4,
    /// Fourth-order Runge–Kutta with step-doubling error control.
    AdaptiveRk4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    /// Step size (fixed method) or initial step size (adaptive), in units of `1/E`.
    pub step_size: f64,
    pub method: Method,
    /// Max-abs local error per step accepted by the adaptive method.
    pub error_tolerance: f64,
    /// Record a sample every this many steps (fixed) or every
    /// `sample_every · step_size` time units (adaptive).
    pub sample_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { step_size: 0.01, method: Method::FixedRk4, error_tolerance: 1e-10, sample_every: 1 }
    }
}

impl IntegratorConfig {
    /// Fixed step `0.01 / max(E, Γ, 1)`.
    pub fn for_scales(energy: f64, gamma: f64) -> Self {
        Self { step_size: 0.01 / energy.max(gamma).max(1.0), ..Self::default() }
    }

    pub fn with_step(mut self, step_size: f64) -> Self {
        self.step_size = step_size;
        self
    }

    pub fn with_sample_every(mut self, sample_every: usize) -> Self {
        self.sample_every = sample_every;
        self
    }

    pub fn adaptive(mut self, error_tolerance: f64) -> Self {
        self.method = Method::AdaptiveRk4;
        self.error_tolerance = error_tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::param("step_size must be positive"));
        }
        if !(self.error_tolerance > 0.0) {
            return Err(Error::param("error_tolerance must be positive"));
        }
        if self.sample_every == 0 {
            return Err(Error::param("sample_every must be at least 1"));
        }
        Ok(())
    }
}

/// Scratch space for one classical RK4 step.
pub(crate) struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    pub(crate) fn new(len: usize) -> Self {
        let z = C64::new(0.0, 0.0);
        Self { k1: vec![z; len], k2: vec![z; len], k3: vec![z; len], k4: vec![z; len], tmp: vec![z; len] }
    }

    /// Advances `y` from `t` to `t + dt` in place.
    pub(crate) fn step<F>(&mut self, t: f64, dt: f64, y: &mut [C64], f: &mut F)
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let h2 = dt / 2.0;
        f(t, y, &mut self.k1);
        for ((o, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *o = y + k * h2;
        }
        f(t + h2, &self.tmp, &mut self.k2);
        for ((o, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *o = y + k * h2;
        }
        f(t + h2, &self.tmp, &mut self.k3);
        for ((o, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *o = y + k * dt;
        }
        f(t + dt, &self.tmp, &mut self.k4);
        let h6 = dt / 6.0;
        for i in 0..y.len() {
            y[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * h6;
        }
    }
}

/// Integrates `y' = f(t, y)` from 0 to `t_final`, calling `on_sample` at
/// `t = 0`, at every sampling point and at `t_final`.
///
/// `after_step` runs after every accepted step (e.g. renormalization).
/// `on_sample` may stop the run early by returning `ControlFlow::Break`.
pub(crate) fn integrate<F, P, S>(
    y: &mut [C64],
    t_final: f64,
    cfg: &IntegratorConfig,
    mut f: F,
    mut after_step: P,
    mut on_sample: S,
) -> Result<()>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    P: FnMut(&mut [C64]),
    S: FnMut(f64, &[C64]) -> Result<ControlFlow<()>>,
{
    cfg.validate()?;
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::param("t_final must be finite and non-negative"));
    }
    if on_sample(0.0, y)?.is_break() || t_final == 0.0 {
        return Ok(());
    }
    let mut rk = Rk4::new(y.len());
    match cfg.method {
        Method::FixedRk4 => {
            let n_steps = libm::ceil(t_final / cfg.step_size - 1e-9).max(1.0) as usize;
            let dt = t_final / n_steps as f64;
            for k in 1..=n_steps {
                let t = (k - 1) as f64 * dt;
                rk.step(t, dt, y, &mut f);
                after_step(y);
                if k % cfg.sample_every == 0 || k == n_steps {
                    let t_now = if k == n_steps { t_final } else { k as f64 * dt };
                    if on_sample(t_now, y)?.is_break() {
                        return Ok(());
                    }
                }
            }
        }
        Method::AdaptiveRk4 => {
            let interval = cfg.step_size * cfg.sample_every as f64;
            let n_samples = libm::ceil(t_final / interval - 1e-9).max(1.0) as usize;
            let mut stepper = StepDoubling::new(y.len(), cfg.step_size, cfg.error_tolerance);
            let mut t = 0.0;
            for k in 1..=n_samples {
                let target = if k == n_samples { t_final } else { k as f64 * interval };
                stepper.advance_to(&mut t, target, y, &mut f, &mut after_step)?;
                if on_sample(target, y)?.is_break() {
                    return Ok(());
                }
            }
        }
    }
    Ok(())
}

/// Step-doubling RK4 with local Richardson extrapolation.
struct StepDoubling {
    rk: Rk4,
    full: Vec<C64>,
    dt: f64,
    tol: f64,
}

impl StepDoubling {
    fn new(len: usize, dt: f64, tol: f64) -> Self {
        Self { rk: Rk4::new(len), full: vec![C64::new(0.0, 0.0); len], dt, tol }
    }

    fn advance_to<F, P>(&mut self, t: &mut f64, target: f64, y: &mut [C64], f: &mut F, after_step: &mut P) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
        P: FnMut(&mut [C64]),
    {
        let mut half = y.to_vec();
        while *t < target {
            let dt = self.dt.min(target - *t);
            if dt < 1e-14 * (1.0 + t.abs()) {
                *t = target;
                break;
            }
            self.full.copy_from_slice(y);
            self.rk.step(*t, dt, &mut self.full, f);
            half.copy_from_slice(y);
            self.rk.step(*t, dt / 2.0, &mut half, f);
            self.rk.step(*t + dt / 2.0, dt / 2.0, &mut half, f);
            let err = half.iter().zip(&self.full).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / 15.0;
            if !err.is_finite() {
                return Err(Error::StepSizeUnderflow { time: *t });
            }
            if err <= self.tol {
                for ((yi, h), fl) in y.iter_mut().zip(&half).zip(&self.full) {
                    *yi = h + (h - fl) / 15.0;
                }
                after_step(y);
                *t += dt;
            }
            let factor = if err == 0.0 { 2.0 } else { (0.9 * libm::pow(self.tol / err, 0.2)).clamp(0.2, 2.0) };
            // Only grow the step from a full-length step, not from a clipped one.
            if err > self.tol || dt >= self.dt {
                self.dt = dt * factor;
            }
            if self.dt < 1e-12 {
                return Err(Error::StepSizeUnderflow { time: *t });
            }
        }
        *t = target;
        Ok(())
    }
}
