//! Fluctuating-oracle unraveling.
//!
//! Each realization evolves `i dψ/dt = [(E + ξ(t))|w⟩⟨w| + H_D(t)] ψ` with
//! `ξ` piecewise constant over integrator steps and Gaussian. The noise
//! intensity is `D = calibration · s² / window`: the phase accumulated over one
//! window has variance `calibration · s²`. Averaging `|ψ⟩⟨ψ|` over
//! realizations reproduces dephasing with `L = sqrt(D) |w⟩⟨w|`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{renormalize, schrodinger_rhs_into, IntegratorConfig, Rk4, States, Trajectory};
use crate::error::{Error, Result};
use crate::matrix::{check_dims, CMatrix};
use crate::quantum::{check_density, DensityMatrix, PureState};
use crate::search::{build_oracle_generator, SearchModel};
use crate::C64;

/// Trajectories per deterministic reduction block. Partial sums are formed
/// in index order inside a block and blocks are merged in order, so the
/// average does not depend on how blocks are scheduled.
pub const TRAJECTORY_CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseTrajectoryConfig {
    /// Spread `s` of the phase accumulated over one window.
    pub noise_std_s: f64,
    /// Accumulation window (default π).
    pub window: f64,
    /// Fraction of `s²` carried as phase variance per window. The default
    /// ½ gives `Γ = s²/(2π)` for `window = π`.
    pub calibration: f64,
    pub n_trajectories: usize,
    pub rng_seed: u64,
}

impl NoiseTrajectoryConfig {
    pub const DEFAULT_CALIBRATION: f64 = 0.5;

    pub fn new(noise_std_s: f64, n_trajectories: usize, rng_seed: u64) -> Self {
        Self {
            noise_std_s,
            window: core::f64::consts::PI,
            calibration: Self::DEFAULT_CALIBRATION,
            n_trajectories,
            rng_seed,
        }
    }

    /// Noise strength whose averaged dynamics dephase at rate `gamma`.
    pub fn for_gamma(gamma: f64, n_trajectories: usize, rng_seed: u64) -> Self {
        let mut cfg = Self::new(0.0, n_trajectories, rng_seed);
        cfg.noise_std_s = libm::sqrt(gamma * cfg.window / cfg.calibration);
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trajectories == 0 {
            return Err(Error::param("n_trajectories must be at least 1"));
        }
        if !(self.window > 0.0) {
            return Err(Error::param("noise window must be positive"));
        }
        if !(self.noise_std_s >= 0.0) || !self.noise_std_s.is_finite() {
            return Err(Error::param("noise_std_s must be finite and non-negative"));
        }
        if !(self.calibration > 0.0) {
            return Err(Error::param("noise calibration must be positive"));
        }
        Ok(())
    }

    /// White-noise intensity `D` with `⟨ξ(t)ξ(t')⟩ = D δ(t − t')`.
    pub fn noise_intensity(&self) -> f64 {
        self.calibration * self.noise_std_s * self.noise_std_s / self.window
    }

    /// Dephasing rate of the master equation the average converges to.
    pub fn equivalent_gamma(&self) -> f64 {
        self.noise_intensity()
    }
}

/// Running sum of `|ψ⟩⟨ψ|` over realizations, per sample time.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticSum {
    pub times: Vec<f64>,
    pub sums: Vec<CMatrix>,
    pub count: usize,
}

impl StochasticSum {
    fn empty(times: Vec<f64>, dim: usize) -> Self {
        let sums = times.iter().map(|_| CMatrix::zeros(dim)).collect();
        Self { times, sums, count: 0 }
    }

    fn add_realization(&mut self, samples: &[Vec<C64>]) {
        for (sum, psi) in self.sums.iter_mut().zip(samples) {
            let n = psi.len();
            let buf = sum.as_mut_slice();
            for i in 0..n {
                for j in 0..n {
                    buf[i * n + j] += psi[i] * psi[j].conj();
                }
            }
        }
        self.count += 1;
    }

    /// Appends `other`; callers merge blocks in index order.
    pub fn merge(&mut self, other: &StochasticSum) -> Result<()> {
        if self.times != other.times {
            return Err(Error::param("cannot merge stochastic sums on different time grids"));
        }
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            for (x, y) in a.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *x += y;
            }
        }
        self.count += other.count;
        Ok(())
    }

    /// Averaged trajectory; every averaged state is checked as a density matrix.
    pub fn into_trajectory(self) -> Result<Trajectory> {
        if self.count == 0 {
            return Err(Error::param("no realizations accumulated"));
        }
        let inv = C64::new(1.0 / self.count as f64, 0.0);
        let mut states = Vec::with_capacity(self.sums.len());
        let mut trace = Vec::with_capacity(self.sums.len());
        let mut purity = Vec::with_capacity(self.sums.len());
        for (t, sum) in self.times.iter().zip(self.sums) {
            let m = sum.scaled(inv);
            check_density(&m, *t)?;
            let d = DensityMatrix::from_matrix_unchecked(m);
            trace.push(d.trace());
            purity.push(d.purity());
            states.push(d);
        }
        let mut observables = BTreeMap::new();
        observables.insert("trace".into(), trace);
        observables.insert("purity".into(), purity);
        Ok(Trajectory { times: self.times, states: States::Mixed(states), observables })
    }
}

/// Step count and sample schedule shared by every realization.
fn schedule(t_final: f64, cfg: &IntegratorConfig) -> Result<(usize, f64, Vec<f64>)> {
    cfg.validate()?;
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::param("t_final must be finite and non-negative"));
    }
    if t_final == 0.0 {
        return Ok((0, 0.0, vec![0.0]));
    }
    let n_steps = libm::ceil(t_final / cfg.step_size - 1e-9).max(1.0) as usize;
    let dt = t_final / n_steps as f64;
    let mut times = vec![0.0];
    for k in 1..=n_steps {
        if k % cfg.sample_every == 0 || k == n_steps {
            times.push(if k == n_steps { t_final } else { k as f64 * dt });
        }
    }
    Ok((n_steps, dt, times))
}

/// One noise realization; returns the state at every sample time.
///
/// Realization `index` draws from ChaCha8 stream `index` of `rng_seed`, so
/// any subset of realizations can be regenerated independently. The step is
/// always fixed (the adaptive method is ignored): the noise is defined per step.
pub fn stochastic_realization(
    model: &SearchModel,
    noise: &NoiseTrajectoryConfig,
    psi0: &PureState,
    t_final: f64,
    cfg: &IntegratorConfig,
    index: u64,
) -> Result<Vec<PureState>> {
    let gen = build_oracle_generator(model)?;
    let (n_steps, dt, _) = schedule(t_final, cfg)?;
    check_dims(model.n(), psi0.dim())?;
    Ok(run_realization(&gen, model.winner(), noise, psi0, n_steps, dt, cfg.sample_every, index)
        .into_iter()
        .map(PureState::from_vec_unchecked)
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn run_realization(
    gen: &super::LindbladGenerator,
    w: usize,
    noise: &NoiseTrajectoryConfig,
    psi0: &PureState,
    n_steps: usize,
    dt: f64,
    sample_every: usize,
    index: u64,
) -> Vec<Vec<C64>> {
    let h = gen.hamiltonian();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.rng_seed);
    rng.set_stream(index);
    let sigma = if dt > 0.0 { libm::sqrt(noise.noise_intensity() / dt) } else { 0.0 };

    let mut psi = psi0.amplitudes().to_vec();
    let mut samples = vec![psi.clone()];
    let mut rk = Rk4::new(psi.len());
    for k in 1..=n_steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        let xi = sigma * z;
        let t = (k - 1) as f64 * dt;
        rk.step(t, dt, &mut psi, &mut |t, y: &[C64], out: &mut [C64]| {
            schrodinger_rhs_into(h, t, y, out);
            out[w] += C64::new(0.0, -xi) * y[w];
        });
        renormalize(&mut psi);
        if k % sample_every == 0 || k == n_steps {
            samples.push(psi.clone());
        }
    }
    samples
}

/// Sum over realizations `range` (in index order).
pub fn stochastic_chunk(
    model: &SearchModel,
    noise: &NoiseTrajectoryConfig,
    psi0: &PureState,
    t_final: f64,
    cfg: &IntegratorConfig,
    range: Range<usize>,
) -> Result<StochasticSum> {
    noise.validate()?;
    check_dims(model.n(), psi0.dim())?;
    let gen = build_oracle_generator(model)?;
    let (n_steps, dt, times) = schedule(t_final, cfg)?;
    let mut acc = StochasticSum::empty(times, model.n());
    for index in range {
        let samples = run_realization(&gen, model.winner(), noise, psi0, n_steps, dt, cfg.sample_every, index as u64);
        acc.add_realization(&samples);
    }
    Ok(acc)
}

/// Block ranges `[0, 64), [64, 128), …` covering `n` realizations.
pub fn chunk_ranges(n: usize) -> Vec<Range<usize>> {
    (0..n).step_by(TRAJECTORY_CHUNK).map(|s| s..(s + TRAJECTORY_CHUNK).min(n)).collect()
}

/// Averaged density matrix `E[|ψ_t⟩⟨ψ_t|]` over `noise.n_trajectories`
/// realizations of the fluctuating oracle; the model's own `gamma` is not used.
pub fn stochastic_oracle_run(
    model: &SearchModel,
    noise: &NoiseTrajectoryConfig,
    psi0: &PureState,
    t_final: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    noise.validate()?;
    let mut total: Option<StochasticSum> = None;
    for range in chunk_ranges(noise.n_trajectories) {
        let part = stochastic_chunk(model, noise, psi0, t_final, cfg, range)?;
        match total.as_mut() {
            None => total = Some(part),
            Some(t) => t.merge(&part)?,
        }
    }
    total
        .ok_or_else(|| Error::param(format!("n_trajectories = {}", noise.n_trajectories)))?
        .into_trajectory()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_schrodinger;
    use crate::search::Driver;

    #[test]
    fn calibration_reproduces_rate_formula() {
        let s = libm::sqrt(core::f64::consts::PI);
        let cfg = NoiseTrajectoryConfig::new(s, 1, 0);
        assert!((cfg.equivalent_gamma() - s * s / (2.0 * core::f64::consts::PI)).abs() < 1e-15);
        let back = NoiseTrajectoryConfig::for_gamma(0.5, 1, 0);
        assert!((back.noise_std_s - s).abs() < 1e-14);
    }

    #[test]
    fn zero_noise_matches_deterministic_evolution() {
        let model = SearchModel::new(4, 1.0, 0.0).unwrap();
        let psi0 = crate::quantum::uniform_state(4).unwrap();
        let cfg = IntegratorConfig::default().with_sample_every(10);
        let noise = NoiseTrajectoryConfig::new(0.0, 3, 7);
        let avg = stochastic_oracle_run(&model, &noise, &psi0, 1.0, &cfg).unwrap();
        let h = build_oracle_generator(&model).unwrap().hamiltonian().clone();
        let det = evolve_schrodinger(&h, &psi0, 1.0, &cfg).unwrap();
        assert_eq!(avg.times, det.times);
        for k in 0..avg.times.len() {
            let a = avg.states.density(k);
            let b = det.states.density(k);
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-14);
        }
    }

    #[test]
    fn fixed_seed_is_reproducible_and_chunking_is_invisible() {
        let model = SearchModel::new(2, 1.0, 0.0).unwrap().with_driver(Driver::zero(2)).unwrap();
        let psi0 = crate::quantum::uniform_state(2).unwrap();
        let cfg = IntegratorConfig::default().with_sample_every(25);
        let noise = NoiseTrajectoryConfig::for_gamma(0.5, 150, 42);
        let a = stochastic_oracle_run(&model, &noise, &psi0, 1.0, &cfg).unwrap();
        let b = stochastic_oracle_run(&model, &noise, &psi0, 1.0, &cfg).unwrap();
        assert_eq!(a, b);
        let r = stochastic_realization(&model, &noise, &psi0, 1.0, &cfg, 70).unwrap();
        let chunk = stochastic_chunk(&model, &noise, &psi0, 1.0, &cfg, 70..71).unwrap();
        let last = chunk.sums.last().unwrap();
        assert!(last.max_abs_diff(r.last().unwrap().projector().matrix()) == 0.0);
    }

    #[test]
    fn rejects_zero_trajectories() {
        let model = SearchModel::new(2, 1.0, 0.0).unwrap();
        let psi0 = crate::quantum::uniform_state(2).unwrap();
        let noise = NoiseTrajectoryConfig::new(1.0, 0, 1);
        assert!(stochastic_oracle_run(&model, &noise, &psi0, 1.0, &IntegratorConfig::default()).is_err());
    }
}
