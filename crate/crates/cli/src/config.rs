//! Settings: built-in defaults, overridden by a TOML file, overridden by flags.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::Args;
use faulty_oracle_core::dynamics::{IntegratorConfig, NoiseTrajectoryConfig};
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::output::Format;
use crate::simulate::SimulateSpec;
use crate::sweep::{CriterionTag, EngineTag, GammaRule, Horizon, SweepSpec, DEFAULT_CROSS_CHECK_MAX_N};
use crate::unravel::{DriverTag, UnravelSpec};

/// Powers of two from 64 to 4096.
pub const DEFAULT_N_VALUES: [usize; 7] = [64, 128, 256, 512, 1024, 2048, 4096];

/// Keys accepted in the config file; each mirrors the flag of the same name.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n_values: Option<Vec<usize>>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub energy: Option<f64>,
    pub threshold_p: Option<f64>,
    pub criterion: Option<CriterionTag>,
    pub engine: Option<EngineTag>,
    pub t_max: Option<f64>,
    pub horizon_factor: Option<f64>,
    pub dt: Option<f64>,
    pub sample_every: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub cross_check_max_n: Option<usize>,
    pub record_wall_time: Option<bool>,
    pub noise_s: Option<f64>,
    pub trajectories: Option<usize>,
    pub window: Option<f64>,
    pub calibration: Option<f64>,
    pub driver: Option<DriverTag>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::parse(path, e))
    }
}

/// Flags shared by every experiment subcommand.
#[derive(Clone, Debug, Default, Args)]
pub struct CommonArgs {
    /// TOML file with defaults for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated list of N.
    #[arg(long, value_delimiter = ',')]
    pub n_values: Option<Vec<usize>>,
    /// Constant dephasing rate Γ.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Prefactor α of Γ = α N^(-2δ).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Exponent δ of Γ = α N^(-2δ).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Oracle and driver energy E.
    #[arg(long)]
    pub energy: Option<f64>,
    /// Success threshold p.
    #[arg(long)]
    pub threshold_p: Option<f64>,
    #[arg(long, value_enum)]
    pub criterion: Option<CriterionTag>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineTag>,
    /// Time horizon; default is past both the bound and the noiseless peak.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Extend the default horizon to k · max(√N/E, NΓ/E²).
    #[arg(long)]
    pub horizon_factor: Option<f64>,
    /// Integrator step; default 0.01 / max(E, Γ, 1).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Record every k-th step (simulate and unravel).
    #[arg(long)]
    pub sample_every: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; default is the number of available cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Full-space cross-check rows for N up to this value.
    #[arg(long)]
    pub cross_check_max_n: Option<usize>,
    /// Fill the wall_time_s column (makes output machine-dependent).
    #[arg(long)]
    pub record_wall_time: bool,
}

/// Flags of the noise unraveling.
#[derive(Clone, Debug, Default, Args)]
pub struct NoiseArgs {
    /// Standard deviation s of the integrated noise over one window.
    #[arg(long)]
    pub noise_s: Option<f64>,
    #[arg(long)]
    pub trajectories: Option<usize>,
    /// Integration window of the noise statistics (default π).
    #[arg(long)]
    pub window: Option<f64>,
    /// Noise intensity D = calibration · s² / window.
    #[arg(long)]
    pub calibration: Option<f64>,
    #[arg(long, value_enum)]
    pub driver: Option<DriverTag>,
}

/// Fully resolved settings.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub n_values: Option<Vec<usize>>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub energy: f64,
    pub p: f64,
    pub criterion: CriterionTag,
    pub engine: EngineTag,
    pub t_max: Option<f64>,
    pub horizon_factor: Option<f64>,
    pub dt: Option<f64>,
    pub sample_every: Option<usize>,
    pub seed: u64,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub cross_check_max_n: usize,
    pub record_wall_time: bool,
    pub noise_s: Option<f64>,
    pub trajectories: usize,
    pub window: f64,
    pub calibration: f64,
    pub driver: DriverTag,
}

impl Settings {
    pub fn resolve(args: &CommonArgs, noise: &NoiseArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        Ok(Self {
            n_values: args.n_values.clone().or(file.n_values),
            gamma: args.gamma.or(file.gamma),
            alpha: args.alpha.or(file.alpha),
            delta: args.delta.or(file.delta),
            energy: args.energy.or(file.energy).unwrap_or(1.0),
            p: args.threshold_p.or(file.threshold_p).unwrap_or(0.8),
            criterion: args.criterion.or(file.criterion).unwrap_or(CriterionTag::TraceDistance),
            engine: args.engine.or(file.engine).unwrap_or(EngineTag::Reduced),
            t_max: args.t_max.or(file.t_max),
            horizon_factor: args.horizon_factor.or(file.horizon_factor),
            dt: args.dt.or(file.dt),
            sample_every: args.sample_every.or(file.sample_every),
            seed: args.seed.or(file.seed).unwrap_or(0),
            jobs: args.jobs.or(file.jobs).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            out: args.out.clone().or(file.out),
            format: args.format.or(file.format).unwrap_or(Format::Csv),
            cross_check_max_n: args.cross_check_max_n.or(file.cross_check_max_n).unwrap_or(DEFAULT_CROSS_CHECK_MAX_N),
            record_wall_time: args.record_wall_time || file.record_wall_time.unwrap_or(false),
            noise_s: noise.noise_s.or(file.noise_s),
            trajectories: noise.trajectories.or(file.trajectories).unwrap_or(1000),
            window: noise.window.or(file.window).unwrap_or(PI),
            calibration: noise.calibration.or(file.calibration).unwrap_or(NoiseTrajectoryConfig::DEFAULT_CALIBRATION),
            driver: noise.driver.or(file.driver).unwrap_or(DriverTag::Uniform),
        })
    }

    pub fn gamma_rule(&self) -> Result<GammaRule> {
        match (self.gamma, self.alpha, self.delta) {
            (Some(gamma), None, None) => Ok(GammaRule::Constant { gamma }),
            (Some(_), _, _) => Err(CliError::usage("--gamma conflicts with --alpha/--delta")),
            (None, None, None) => Ok(GammaRule::Constant { gamma: 1.0 }),
            (None, alpha, delta) => Ok(GammaRule::PowerLaw { alpha: alpha.unwrap_or(1.0), delta: delta.unwrap_or(0.0) }),
        }
    }

    fn horizon(&self) -> Result<Horizon> {
        match (self.t_max, self.horizon_factor) {
            (Some(_), Some(_)) => Err(CliError::usage("--t-max conflicts with --horizon-factor")),
            (Some(t_max), None) => Ok(Horizon::Fixed { t_max }),
            (None, Some(factor)) => Ok(Horizon::Relaxation { factor }),
            (None, None) => Ok(Horizon::Auto),
        }
    }

    fn integrator(&self, gamma: f64, default_stride: usize) -> Result<IntegratorConfig> {
        let mut cfg = IntegratorConfig::for_scales(self.energy, gamma).with_sample_every(self.sample_every.unwrap_or(default_stride));
        if let Some(dt) = self.dt {
            cfg = cfg.with_step(dt);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn single_n(&self, default: usize) -> Result<usize> {
        match self.n_values.as_deref() {
            None => Ok(default),
            Some([n]) => Ok(*n),
            Some(_) => Err(CliError::usage("this subcommand takes exactly one N")),
        }
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let mut spec = SweepSpec::new(
            self.n_values.clone().unwrap_or_else(|| DEFAULT_N_VALUES.to_vec()),
            self.gamma_rule()?,
            self.energy,
            self.p,
            self.criterion,
        );
        spec.engine = self.engine;
        spec.step_size = self.dt;
        spec.horizon = self.horizon()?;
        spec.jobs = self.jobs;
        spec.rng_seed = self.seed;
        spec.cross_check_max_n = self.cross_check_max_n;
        spec.record_wall_time = self.record_wall_time;
        spec.validate()?;
        Ok(spec)
    }

    pub fn simulate_spec(&self) -> Result<SimulateSpec> {
        let n = self.single_n(16)?;
        let gamma = self.gamma_rule()?.gamma(n);
        Ok(SimulateSpec {
            n,
            gamma,
            energy: self.energy,
            engine: self.engine,
            t_final: self.horizon()?.t_max(n, gamma, self.energy, self.p),
            integrator: self.integrator(gamma, 10)?,
        })
    }

    /// The model rate is tied to the noise: Γ = calibration · s² / window.
    pub fn unravel_spec(&self) -> Result<UnravelSpec> {
        let n = self.single_n(2)?;
        if self.alpha.is_some() || self.delta.is_some() {
            return Err(CliError::usage("unravel takes a constant --gamma or --noise-s"));
        }
        let s = match (self.noise_s, self.gamma) {
            (Some(s), None) => s,
            (None, g) => (g.unwrap_or(0.5) * self.window / self.calibration).sqrt(),
            (Some(s), Some(g)) => {
                let implied = self.calibration * s * s / self.window;
                if (implied - g).abs() > 1e-12 * g.max(1.0) {
                    return Err(CliError::usage(format!("--noise-s {s} implies gamma = {implied}, not {g}")));
                }
                s
            }
        };
        let noise = NoiseTrajectoryConfig { noise_std_s: s, window: self.window, calibration: self.calibration, n_trajectories: self.trajectories, rng_seed: self.seed };
        noise.validate()?;
        let gamma = noise.equivalent_gamma();
        let t_final = match self.t_max {
            Some(t) => t,
            // Two e-folds of the coherence, which decays at Γ/2.
            None if gamma > 0.0 => 4.0 / gamma,
            None => 10.0,
        };
        Ok(UnravelSpec { n, energy: self.energy, driver: self.driver, noise, t_final, integrator: self.integrator(gamma, 10)?, jobs: self.jobs })
    }
}
