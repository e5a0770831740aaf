//! Progress measure `F_t^w = ‖ρ_t^w − ρ_t^0‖_F²`, its growth rate, the
//! coherence that maximizes that rate, and the runtime bound that follows.
//!
//! The oracle run `ρ_t^w` and the oracle-free run `|φ_t⟩` are co-evolved by
//! [`PairedEvolution`] with a shared fixed step, so every quantity below can
//! be sampled on the same time grid.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use crate::dynamics::{lindblad_rhs, renormalize, schrodinger_rhs_into, Hamiltonian, IntegratorConfig, LindbladGenerator, Operator, Rk4, Workspace};
use crate::error::{Error, Result};
use crate::matrix::{check_dims, hermiticity_error, CMatrix};
use crate::quantum::{check_density, fidelity_upper_bound, frobenius_norm_sq_diff, trace_distance, two_dim_decompose, DensityMatrix, PureState};
use crate::search::{build_no_oracle_generator, build_oracle_generator, build_reduced_model, ReducedModel, SearchModel};
use crate::C64;

/// Slack in `T_measured ≥ T_bound`.
pub const BOUND_SLACK: f64 = 1e-9;

/// `F^w = ‖ρ^w − ρ^0‖_F²`.
pub fn progress_measure(rho_w: &DensityMatrix, rho_0: &DensityMatrix) -> Result<f64> {
    frobenius_norm_sq_diff(rho_w, rho_0)
}

/// `N (2p² − 1)`, the progress any algorithm with success `p` must reach.
pub fn progress_lower_bound_at_t(p: f64, n: usize) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param("success threshold p must lie in (0, 1]"));
    }
    Ok(n as f64 * (2.0 * p * p - 1.0))
}

/// `Γ (P ρ P − ½{P, ρ})` with `P = |w⟩⟨w|`, via the generic dissipator.
fn oracle_dissipator(rho: &CMatrix, w: usize, gamma: f64) -> Result<CMatrix> {
    let n = rho.dim();
    let gen = LindbladGenerator::new(Hamiltonian::zero(n), vec![Operator::basis_projector(n, w, libm::sqrt(gamma))?])?;
    lindblad_rhs(&gen, rho, 0.0)
}

/// `[E|w⟩⟨w|, ρ]`.
fn oracle_commutator(rho: &CMatrix, w: usize, energy: f64) -> Result<CMatrix> {
    let n = rho.dim();
    let gen = LindbladGenerator::unitary(Hamiltonian::constant(Operator::basis_projector(n, w, energy)?));
    // lindblad_rhs returns −i[H, ρ].
    Ok(lindblad_rhs(&gen, rho, 0.0)?.scaled(C64::new(0.0, 1.0)))
}

/// `dF^w/dt = 2(tr[L_w(ρ^w)ρ^w] − tr[L_w(ρ^w)ρ^0] + i tr[[H_w, ρ^w]ρ^0])`.
///
/// The driver has dropped out; only the oracle terms remain.
pub fn growth_rate_direct(rho_w: &DensityMatrix, rho_0: &DensityMatrix, w: usize, energy: f64, gamma: f64) -> Result<f64> {
    check_dims(rho_w.dim(), rho_0.dim())?;
    if w >= rho_w.dim() {
        return Err(Error::param("winner index out of range"));
    }
    let (a, b) = (rho_w.matrix(), rho_0.matrix());
    let diss = oracle_dissipator(a, w, gamma)?;
    let comm = oracle_commutator(a, w, energy)?;
    let value = (diss.trace_of_product(a)? - diss.trace_of_product(b)? + C64::new(0.0, 1.0) * comm.trace_of_product(b)?) * 2.0;
    Ok(value.re)
}

/// `2(−Γ|x|² + (Γ/2 + iE) x f* + (Γ/2 − iE) x* f)` with
/// `x = [ρ^w]_{w,w⊥}` and `f = ⟨w|φ⟩ sqrt(1 − |⟨w|φ⟩|²)`.
pub fn growth_rate_closed_form(x: C64, f: C64, energy: f64, gamma: f64) -> f64 {
    let a = C64::new(gamma / 2.0, energy);
    let value = (C64::new(-gamma * x.norm_sqr(), 0.0) + a * x * f.conj() + a.conj() * x.conj() * f) * 2.0;
    debug_assert!(value.im.abs() <= 1e-12 * (1.0 + value.re.abs()));
    value.re
}

/// `x_opt = (½ − iE/Γ) f`, the coherence maximizing the closed-form rate.
pub fn optimal_coherence(f: C64, energy: f64, gamma: f64) -> Result<C64> {
    if !(gamma > 0.0) {
        return Err(Error::param("optimal coherence needs gamma > 0 (it diverges as gamma -> 0)"));
    }
    Ok(C64::new(0.5, -energy / gamma) * f)
}

/// `(Γ² + 4E²)/(2Γ)`: cap on `dF_t/dt` summed over all winners.
pub fn growth_rate_cap(energy: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::param("growth-rate cap needs gamma > 0"));
    }
    Ok((gamma * gamma + 4.0 * energy * energy) / (2.0 * gamma))
}

/// Per-winner cap `(Γ² + 4E²)/(2Γ) · |⟨w|φ_t⟩|²`.
pub fn growth_rate_cap_per_winner(energy: f64, gamma: f64, overlap: C64) -> Result<f64> {
    Ok(growth_rate_cap(energy, gamma)? * overlap.norm_sqr())
}

/// `T ≥ N · 2Γ(2p² − 1)/(Γ² + 4E²)`.
pub fn runtime_lower_bound(n: usize, gamma: f64, energy: f64, p: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::param("N must be at least 2"));
    }
    if !(energy > 0.0) {
        return Err(Error::param("E must be positive"));
    }
    if !(gamma > 0.0) {
        return Err(Error::param("runtime bound needs gamma > 0"));
    }
    if !(p <= 1.0 && p >= FRAC_1_SQRT_2 - 1e-15) {
        return Err(Error::param("runtime bound needs 2^(-1/2) <= p <= 1"));
    }
    let excess = (2.0 * p * p - 1.0).max(0.0);
    Ok(n as f64 * 2.0 * gamma * excess / (gamma * gamma + 4.0 * energy * energy))
}

/// Threshold test applied to the pair `(ρ_T^w, |φ_T⟩)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// `½‖ρ^w − |φ⟩⟨φ|‖_tr ≥ p`.
    TraceDistance,
    /// `⟨w|ρ^w|w⟩ ≥ p²`.
    SuccessProbability,
}

impl Criterion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::TraceDistance => "trace-distance",
            Criterion::SuccessProbability => "success-prob",
        }
    }

    /// Value compared against the threshold, and the threshold itself.
    fn value_and_threshold(&self, s: &ProgressSample, p: f64) -> (f64, f64) {
        match self {
            Criterion::TraceDistance => (s.trace_distance, p),
            Criterion::SuccessProbability => (s.success_prob, p * p),
        }
    }
}

impl core::str::FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace-distance" => Ok(Criterion::TraceDistance),
            "success-prob" | "success-probability" => Ok(Criterion::SuccessProbability),
            other => Err(Error::param(alloc::format!("unknown criterion '{other}'"))),
        }
    }
}

/// Which state space the pair is evolved in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Engine {
    /// Dense `N × N` density matrix.
    Full,
    /// Exact 2×2 restriction (uniform driver only).
    Reduced,
}

impl Engine {
    pub fn as_str(&self) -> &'static str {
        match self {
            Engine::Full => "full",
            Engine::Reduced => "reduced",
        }
    }
}

/// Everything observed about the pair at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgressSample {
    pub t: f64,
    /// `F_t^w`.
    pub f_w: f64,
    /// `F_t = N F_t^w` under winner symmetry; NaN for drivers without it.
    pub f_total: f64,
    /// `⟨w|φ_t⟩`.
    pub overlap: C64,
    pub f: C64,
    /// `[ρ_t^w]_{w,w⊥}`.
    pub x: C64,
    pub rate_direct: f64,
    pub rate_closed_form: f64,
    pub success_prob: f64,
    pub purity_w: f64,
    pub trace_w: f64,
    /// `½‖ρ_t^w − |φ_t⟩⟨φ_t|‖_tr`.
    pub trace_distance: f64,
    /// `sqrt(1 − ⟨φ_t|ρ_t^w|φ_t⟩)`.
    pub fidelity_bound: f64,
    /// `⟨φ_t|ρ_t^w|φ_t⟩`.
    pub reference_fidelity: f64,
}

/// Oracle run `ρ^w` (master equation) co-evolved with the oracle-free run
/// `|φ⟩` (driver only).
pub struct PairedEvolution {
    oracle: LindbladGenerator,
    reference: Hamiltonian,
    winner: usize,
    energy: f64,
    gamma: f64,
    n_items: usize,
    winner_symmetric: bool,
    rho: Vec<C64>,
    phi: Vec<C64>,
    t: f64,
    ws: Workspace,
    rk_rho: Rk4,
    rk_phi: Rk4,
}

impl PairedEvolution {
    /// Both runs start in the model's initial state `|s⟩`.
    pub fn new(model: &SearchModel, engine: Engine) -> Result<Self> {
        match engine {
            Engine::Full => Self::full_from(model, &model.initial_state()),
            Engine::Reduced => {
                let r = build_reduced_model(model)?;
                Self::reduced(model, &r)
            }
        }
    }

    /// Full-space pair started from an arbitrary pure state.
    pub fn full_from(model: &SearchModel, psi0: &PureState) -> Result<Self> {
        check_dims(model.n(), psi0.dim())?;
        let oracle = build_oracle_generator(model)?;
        let reference = build_no_oracle_generator(model)?.hamiltonian().clone();
        Ok(Self::assemble(
            oracle,
            reference,
            model.winner(),
            model,
            model.driver().is_uniform() && psi0 == &model.initial_state(),
            psi0,
        ))
    }

    fn reduced(model: &SearchModel, r: &ReducedModel) -> Result<Self> {
        let oracle = r.oracle_generator()?;
        let reference = r.no_oracle_generator()?.hamiltonian().clone();
        Ok(Self::assemble(oracle, reference, ReducedModel::WINNER, model, true, &r.initial_state()))
    }

    fn assemble(
        oracle: LindbladGenerator,
        reference: Hamiltonian,
        winner: usize,
        model: &SearchModel,
        winner_symmetric: bool,
        psi0: &PureState,
    ) -> Self {
        let dim = oracle.dim();
        Self {
            oracle,
            reference,
            winner,
            energy: model.energy(),
            gamma: model.gamma(),
            n_items: model.n(),
            winner_symmetric,
            rho: psi0.projector().into_matrix().into_vec(),
            phi: psi0.amplitudes().to_vec(),
            t: 0.0,
            ws: Workspace::new(dim),
            rk_rho: Rk4::new(dim * dim),
            rk_phi: Rk4::new(dim),
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    /// Winner index in this engine's coordinates.
    pub fn winner(&self) -> usize {
        self.winner
    }

    /// Advances both runs by `dt` (negative `dt` integrates backwards).
    pub fn step(&mut self, dt: f64) {
        let Self { oracle, reference, rho, phi, t, ws, rk_rho, rk_phi, .. } = self;
        rk_rho.step(*t, dt, rho, &mut |t, y, out| oracle.rhs_into(t, y, out, ws));
        rk_phi.step(*t, dt, phi, &mut |t, y, out| schrodinger_rhs_into(reference, t, y, out));
        renormalize(phi);
        *t += dt;
    }

    pub fn rho(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(CMatrix::from_row_major(self.dim(), self.rho.clone()).expect("square"))
    }

    pub fn phi(&self) -> PureState {
        PureState::from_vec_unchecked(self.phi.clone())
    }

    /// Density-matrix invariants of `ρ^w` at the current time.
    pub fn check_invariants(&self) -> Result<()> {
        let m = CMatrix::from_row_major(self.dim(), self.rho.clone())?;
        check_density(&m, self.t)
    }

    /// Max Hermiticity deviation of `ρ^w` (diagnostic).
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.rho, self.dim())
    }

    fn progress_only(&self) -> Result<f64> {
        progress_measure(&self.rho(), &self.phi().projector())
    }

    /// Samples every observable at the current time.
    pub fn sample(&self) -> Result<ProgressSample> {
        let rho = self.rho();
        let phi = self.phi();
        let rho0 = phi.projector();
        let w = self.winner;
        let f_w = progress_measure(&rho, &rho0)?;
        let (overlap, f, x) = match two_dim_decompose(&phi, w) {
            Ok(d) => {
                let x = rho.matrix().sandwich(&unit(self.dim(), w), d.w_perp.amplitudes());
                (d.overlap, d.f, x)
            }
            // φ ∥ |w⟩: f = 0, and any fixed orthogonal direction will do for x.
            Err(Error::DegenerateDecomposition { .. }) => {
                let other = (w + 1) % self.dim();
                (phi.amplitude(w), C64::new(0.0, 0.0), rho.get(w, other))
            }
            Err(e) => return Err(e),
        };
        let reference_fidelity = rho.expectation(&phi)?;
        Ok(ProgressSample {
            t: self.t,
            f_w,
            f_total: if self.winner_symmetric { self.n_items as f64 * f_w } else { f64::NAN },
            overlap,
            f,
            x,
            rate_direct: growth_rate_direct(&rho, &rho0, w, self.energy, self.gamma)?,
            rate_closed_form: growth_rate_closed_form(x, f, self.energy, self.gamma),
            success_prob: rho.get(w, w).re,
            purity_w: rho.purity(),
            trace_w: rho.trace(),
            trace_distance: trace_distance(&rho, &rho0)?,
            fidelity_bound: fidelity_upper_bound(&rho, &phi)?,
            reference_fidelity,
        })
    }

    /// Central difference `(F(t+h) − F(t−h)) / 2h` along the coupled evolution,
    /// each side reached by a single RK4 step.
    pub fn finite_difference_rate(&self, h: f64) -> Result<f64> {
        let mut fwd = self.fork();
        fwd.step(h);
        let mut bwd = self.fork();
        bwd.step(-h);
        Ok((fwd.progress_only()? - bwd.progress_only()?) / (2.0 * h))
    }

    fn fork(&self) -> Self {
        let dim = self.dim();
        Self {
            oracle: self.oracle.clone(),
            reference: self.reference.clone(),
            winner: self.winner,
            energy: self.energy,
            gamma: self.gamma,
            n_items: self.n_items,
            winner_symmetric: self.winner_symmetric,
            rho: self.rho.clone(),
            phi: self.phi.clone(),
            t: self.t,
            ws: Workspace::new(dim),
            rk_rho: Rk4::new(dim * dim),
            rk_phi: Rk4::new(dim),
        }
    }
}

fn unit(n: usize, k: usize) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); n];
    e[k] = C64::new(1.0, 0.0);
    e
}

/// Fixed-step schedule: `(steps, dt)` covering `[0, t_final]`.
fn fixed_schedule(t_final: f64, cfg: &IntegratorConfig) -> Result<(usize, f64)> {
    cfg.validate()?;
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::param("time horizon must be finite and non-negative"));
    }
    if t_final == 0.0 {
        return Ok((0, 0.0));
    }
    let n = libm::ceil(t_final / cfg.step_size - 1e-9).max(1.0) as usize;
    Ok((n, t_final / n as f64))
}

/// Co-evolves the pair to `t_final` and samples every `cfg.sample_every`
/// steps (plus `t = 0` and `t_final`), checking the invariants of `ρ^w` at
/// each sample. The step is always fixed at `cfg.step_size`.
pub fn simulate_pair(model: &SearchModel, engine: Engine, t_final: f64, cfg: &IntegratorConfig) -> Result<Vec<ProgressSample>> {
    let mut pair = PairedEvolution::new(model, engine)?;
    run_pair(&mut pair, t_final, cfg, |_, _| Ok(true))
}

/// Drives `pair`; `visit` sees each sample and returns `false` to stop.
pub fn run_pair(
    pair: &mut PairedEvolution,
    t_final: f64,
    cfg: &IntegratorConfig,
    mut visit: impl FnMut(&PairedEvolution, &ProgressSample) -> Result<bool>,
) -> Result<Vec<ProgressSample>> {
    let (n_steps, dt) = fixed_schedule(t_final, cfg)?;
    let mut out = Vec::new();
    pair.check_invariants()?;
    let s = pair.sample()?;
    let go = visit(pair, &s)?;
    out.push(s);
    if !go {
        return Ok(out);
    }
    let t0 = pair.time();
    for k in 1..=n_steps {
        pair.step(dt);
        if k % cfg.sample_every == 0 || k == n_steps {
            pair.t = if k == n_steps { t0 + t_final } else { t0 + k as f64 * dt };
            pair.check_invariants()?;
            let s = pair.sample()?;
            let go = visit(pair, &s)?;
            out.push(s);
            if !go {
                break;
            }
        }
    }
    Ok(out)
}

/// `F_t = Σ_w F_t^w` by running one full-space pair per winner.
pub fn progress_all_winners(model: &SearchModel, t_final: f64, cfg: &IntegratorConfig) -> Result<Vec<(f64, f64)>> {
    let mut totals: Vec<(f64, f64)> = Vec::new();
    for w in 0..model.n() {
        let m = model.clone().with_winner(w)?;
        let samples = simulate_pair(&m, Engine::Full, t_final, cfg)?;
        if totals.is_empty() {
            totals = samples.iter().map(|s| (s.t, 0.0)).collect();
        }
        for (acc, s) in totals.iter_mut().zip(&samples) {
            acc.1 += s.f_w;
        }
    }
    Ok(totals)
}

/// Outcome of comparing a measured runtime with the lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundStatus {
    /// Threshold reached at or after the bound.
    Satisfied,
    /// Threshold reached strictly before the bound.
    Violated,
    /// Not reached by `t_max ≥ T_bound`: any later crossing satisfies the bound.
    SatisfiedUnreached,
    /// Not reached, but `t_max < T_bound`, so nothing can be concluded.
    Inconclusive,
    /// No bound applies (`Γ = 0` or `p ≤ 2^{-1/2}`).
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub gamma: f64,
    pub energy: f64,
    pub p: f64,
    pub criterion: Criterion,
    pub engine: Engine,
    /// First time the criterion holds (linear interpolation between samples).
    pub t_measured: Option<f64>,
    pub t_max: f64,
    pub t_lower_bound: Option<f64>,
    pub status: BoundStatus,
    /// Largest criterion value seen during the run.
    pub max_value: f64,
    /// First sample at which the criterion held.
    pub crossing_sample: Option<ProgressSample>,
}

impl BoundReport {
    /// No violation was observed.
    pub fn satisfied(&self) -> bool {
        matches!(self.status, BoundStatus::Satisfied | BoundStatus::SatisfiedUnreached | BoundStatus::NotApplicable)
    }
}

/// Compares a measured crossing time with the bound.
pub fn classify(t_measured: Option<f64>, t_max: f64, bound: Option<f64>) -> BoundStatus {
    match (t_measured, bound) {
        (_, None) => BoundStatus::NotApplicable,
        (Some(t), Some(b)) if t >= b - BOUND_SLACK => BoundStatus::Satisfied,
        (Some(_), Some(_)) => BoundStatus::Violated,
        (None, Some(b)) if t_max >= b - BOUND_SLACK => BoundStatus::SatisfiedUnreached,
        (None, Some(_)) => BoundStatus::Inconclusive,
    }
}

/// The bound applies when `Γ > 0` and `p > 2^{-1/2}`.
pub fn applicable_bound(n: usize, gamma: f64, energy: f64, p: f64) -> Option<f64> {
    if gamma > 0.0 && p > FRAC_1_SQRT_2 {
        runtime_lower_bound(n, gamma, energy, p).ok()
    } else {
        None
    }
}

/// Sampling stride that keeps sample spacing near `0.02 / max(E, Γ, 1)`
/// for the full engine; the reduced engine samples every step.
pub fn default_runtime_config(model: &SearchModel, engine: Engine) -> IntegratorConfig {
    let cfg = IntegratorConfig::for_scales(model.energy(), model.gamma());
    match engine {
        Engine::Reduced => cfg,
        Engine::Full => cfg.with_sample_every(2),
    }
}

/// Co-evolves the pair until the criterion `value ≥ threshold` first holds
/// or `t_max` is exhausted, and compares the crossing time with the bound.
pub fn measure_runtime(
    model: &SearchModel,
    p: f64,
    criterion: Criterion,
    t_max: f64,
    cfg: &IntegratorConfig,
    engine: Engine,
) -> Result<BoundReport> {
    measure_runtime_with(model, p, criterion, t_max, cfg, engine, |_| Ok(()))
}

/// [`measure_runtime`] that also hands every sample to `observer`.
pub fn measure_runtime_with(
    model: &SearchModel,
    p: f64,
    criterion: Criterion,
    t_max: f64,
    cfg: &IntegratorConfig,
    engine: Engine,
    mut observer: impl FnMut(&ProgressSample) -> Result<()>,
) -> Result<BoundReport> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("threshold p must lie in (0, 1)"));
    }
    if !(t_max > 0.0) {
        return Err(Error::param("t_max must be positive"));
    }
    let mut pair = PairedEvolution::new(model, engine)?;
    let mut prev: Option<(f64, f64)> = None;
    let mut crossing: Option<(f64, ProgressSample)> = None;
    let mut max_value = f64::NEG_INFINITY;
    run_pair(&mut pair, t_max, cfg, |_, s| {
        observer(s)?;
        let (value, threshold) = criterion.value_and_threshold(s, p);
        max_value = max_value.max(value);
        if value >= threshold {
            let t = match prev {
                Some((t0, v0)) if value > v0 => t0 + (s.t - t0) * (threshold - v0) / (value - v0),
                _ => s.t,
            };
            crossing = Some((t, s.clone()));
            return Ok(false);
        }
        prev = Some((s.t, value));
        Ok(true)
    })?;
    let bound = applicable_bound(model.n(), model.gamma(), model.energy(), p);
    let t_measured = crossing.as_ref().map(|c| c.0);
    Ok(BoundReport {
        n: model.n(),
        gamma: model.gamma(),
        energy: model.energy(),
        p,
        criterion,
        engine,
        t_measured,
        t_max,
        t_lower_bound: bound,
        status: classify(t_measured, t_max, bound),
        max_value,
        crossing_sample: crossing.map(|c| c.1),
    })
}

/// First local maximum of the success probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuccessPeak {
    /// Vertex of the parabola through the three samples around the maximum.
    pub time: f64,
    /// Largest sampled success probability.
    pub value: f64,
}

/// Evolves the pair and locates the first peak of `⟨w|ρ_t^w|w⟩`.
/// Returns `None` if the probability is still rising at `t_max`.
pub fn measure_success_peak(model: &SearchModel, engine: Engine, t_max: f64, cfg: &IntegratorConfig) -> Result<Option<SuccessPeak>> {
    let mut pair = PairedEvolution::new(model, engine)?;
    let mut window: Vec<(f64, f64)> = Vec::with_capacity(3);
    let mut peak = None;
    run_pair(&mut pair, t_max, cfg, |_, s| {
        window.push((s.t, s.success_prob));
        if window.len() > 3 {
            window.remove(0);
        }
        if window.len() == 3 && window[1].1 > window[0].1 && window[1].1 >= window[2].1 {
            peak = Some(parabola_vertex(&window));
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(peak)
}

fn parabola_vertex(p: &[(f64, f64)]) -> SuccessPeak {
    let (t0, y0) = p[0];
    let (t1, y1) = p[1];
    let (t2, y2) = p[2];
    let denom = (t0 - t1) * (t0 - t2) * (t1 - t2);
    let a = (t2 * (y1 - y0) + t1 * (y0 - y2) + t0 * (y2 - y1)) / denom;
    let b = (t2 * t2 * (y0 - y1) + t1 * t1 * (y2 - y0) + t0 * t0 * (y1 - y2)) / denom;
    let time = if a < 0.0 { -b / (2.0 * a) } else { t1 };
    SuccessPeak { time, value: y1 }
}

/// Ratio `N · dF^w/dt / cap` (≤ 1 by the growth bound).
pub fn cap_ratio(sample: &ProgressSample, n: usize, energy: f64, gamma: f64) -> Result<f64> {
    Ok(n as f64 * sample.rate_direct / growth_rate_cap(energy, gamma)?)
}
