//! Averaged fluctuating-oracle runs against the master equation.

use faulty_oracle_core::dynamics::stochastic::{chunk_ranges, stochastic_chunk, StochasticSum};
use faulty_oracle_core::dynamics::{evolve_lindblad, IntegratorConfig, NoiseTrajectoryConfig};
use faulty_oracle_core::fit::exponential_decay_rate;
use faulty_oracle_core::search::build_oracle_generator;
use faulty_oracle_core::{Driver, SearchModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DriverTag {
    /// `E|s⟩⟨s|`.
    Uniform,
    /// No driver: the oracle alone, so the coherence decays as a pure exponential.
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnravelSpec {
    pub n: usize,
    pub energy: f64,
    pub driver: DriverTag,
    pub noise: NoiseTrajectoryConfig,
    pub t_final: f64,
    pub integrator: IntegratorConfig,
    pub jobs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherencePoint {
    pub t: f64,
    pub stochastic: f64,
    pub lindblad: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnravelReport {
    pub n: usize,
    pub energy: f64,
    pub driver: DriverTag,
    /// Master-equation rate matched to the noise, `calibration · s² / window`.
    pub gamma: f64,
    pub noise_std_s: f64,
    pub window: f64,
    pub calibration: f64,
    pub n_trajectories: usize,
    pub rng_seed: u64,
    /// `max_t ‖ρ̄_t − ρ_t‖_F`.
    pub max_frobenius_distance: f64,
    /// Fitted decay rates of `|ρ_{w,j}|`, `j = (w+1) mod N`.
    pub decay_rate_stochastic: Option<f64>,
    pub decay_rate_lindblad: Option<f64>,
    pub rate_ratio: Option<f64>,
    pub coherence: Vec<CoherencePoint>,
}

pub fn unravel_check(spec: &UnravelSpec) -> Result<UnravelReport> {
    spec.noise.validate()?;
    if spec.jobs == 0 {
        return Err(CliError::usage("jobs must be at least 1"));
    }
    let gamma = spec.noise.equivalent_gamma();
    let mut model = SearchModel::new(spec.n, spec.energy, gamma)?;
    if spec.driver == DriverTag::None {
        model = model.with_driver(Driver::zero(spec.n))?;
    }
    let psi0 = model.initial_state();
    let lindblad = evolve_lindblad(&build_oracle_generator(&model)?, &psi0.projector(), spec.t_final, &spec.integrator)?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(spec.jobs).build().map_err(|e| CliError::usage(format!("cannot start worker pool: {e}")))?;
    let parts: Vec<faulty_oracle_core::Result<StochasticSum>> = pool.install(|| {
        chunk_ranges(spec.noise.n_trajectories)
            .into_par_iter()
            .map(|r| stochastic_chunk(&model, &spec.noise, &psi0, spec.t_final, &spec.integrator, r))
            .collect()
    });
    // Merge in chunk order so the sum does not depend on scheduling.
    let mut total: Option<StochasticSum> = None;
    for part in parts {
        let part = part?;
        match total.as_mut() {
            None => total = Some(part),
            Some(t) => t.merge(&part)?,
        }
    }
    let averaged = total.ok_or_else(|| CliError::usage("n_trajectories must be at least 1"))?.into_trajectory()?;

    let w = model.winner();
    let j = (w + 1) % spec.n;
    let mut max_distance = 0.0f64;
    let mut coherence = Vec::with_capacity(lindblad.times.len());
    for (k, &t) in lindblad.times.iter().enumerate() {
        let a = averaged.states.density(k);
        let b = lindblad.states.density(k);
        max_distance = max_distance.max(a.matrix().sub(b.matrix())?.frobenius_norm_sq().sqrt());
        coherence.push(CoherencePoint { t, stochastic: a.get(w, j).norm(), lindblad: b.get(w, j).norm() });
    }
    let c0 = coherence.first().map_or(0.0, |c| c.lindblad);
    let usable: Vec<&CoherencePoint> = coherence.iter().filter(|c| c.lindblad > 1e-3 * c0 && c.stochastic > 0.0).collect();
    let fit = |sel: fn(&CoherencePoint) -> f64| {
        let ts: Vec<f64> = usable.iter().map(|c| c.t).collect();
        let ys: Vec<f64> = usable.iter().map(|c| sel(c)).collect();
        exponential_decay_rate(&ts, &ys).ok()
    };
    let decay_rate_stochastic = fit(|c| c.stochastic);
    let decay_rate_lindblad = fit(|c| c.lindblad);
    let rate_ratio = match (decay_rate_stochastic, decay_rate_lindblad) {
        (Some(a), Some(b)) if b.abs() > 1e-12 => Some(a / b),
        _ => None,
    };
    Ok(UnravelReport {
        n: spec.n,
        energy: spec.energy,
        driver: spec.driver,
        gamma,
        noise_std_s: spec.noise.noise_std_s,
        window: spec.noise.window,
        calibration: spec.noise.calibration,
        n_trajectories: spec.noise.n_trajectories,
        rng_seed: spec.noise.rng_seed,
        max_frobenius_distance: max_distance,
        decay_rate_stochastic,
        decay_rate_lindblad,
        rate_ratio,
        coherence,
    })
}
