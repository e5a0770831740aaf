//! Time evolution: Lindblad master equation, Schrödinger equation and the
//! stochastic (fluctuating-oracle) unraveling.

mod integrator;
mod operator;
pub mod stochastic;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

pub use integrator::{IntegratorConfig, Method};
pub(crate) use integrator::{integrate, Rk4};
pub use operator::{ConstantOperator, FnOperator, Hamiltonian, Operator, RankOne, TimeDependentOperator};
pub use stochastic::{stochastic_oracle_run, NoiseTrajectoryConfig};

use crate::error::{Error, Invariant, Result};
use crate::matrix::{check_dims, vec_norm, CMatrix};
use crate::quantum::{check_density, DensityMatrix, PureState};
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const MINUS_I: C64 = C64::new(0.0, -1.0);

/// Max deviation of `‖ψ‖` from 1 tolerated at a sample of a pure-state run.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// `dρ/dt = −i[H(t), ρ] + Σ_i (L_i ρ L_i† − ½{L_i† L_i, ρ})`.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    hamiltonian: Hamiltonian,
    jumps: Vec<Operator>,
    jump_adjoints: Vec<Operator>,
    jump_products: Vec<Operator>,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: Hamiltonian, jumps: Vec<Operator>) -> Result<Self> {
        let n = hamiltonian.dim();
        let mut jump_adjoints = Vec::with_capacity(jumps.len());
        let mut jump_products = Vec::with_capacity(jumps.len());
        for l in &jumps {
            check_dims(n, l.dim())?;
            let ld = l.adjoint();
            jump_products.push(ld.compose(l)?);
            jump_adjoints.push(ld);
        }
        Ok(Self { hamiltonian, jumps, jump_adjoints, jump_products })
    }

    /// Closed-system generator `−i[H, ρ]`.
    pub fn unitary(hamiltonian: Hamiltonian) -> Self {
        Self { hamiltonian, jumps: Vec::new(), jump_adjoints: Vec::new(), jump_products: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Operator] {
        &self.jumps
    }

    /// Writes the right-hand side at `(t, rho)` into `out`.
    pub(crate) fn rhs_into(&self, t: f64, rho: &[C64], out: &mut [C64], ws: &mut Workspace) {
        out.fill(ZERO);
        self.hamiltonian.left_mul_acc(t, rho, out, MINUS_I, &mut ws.vec);
        self.hamiltonian.right_mul_acc(t, rho, out, -MINUS_I, &mut ws.vec);
        for ((l, ld), ldl) in self.jumps.iter().zip(&self.jump_adjoints).zip(&self.jump_products) {
            ws.mat.fill(ZERO);
            l.left_mul_acc(rho, &mut ws.mat, C64::new(1.0, 0.0), &mut ws.vec);
            ld.right_mul_acc(&ws.mat, out, C64::new(1.0, 0.0), &mut ws.vec);
            ldl.left_mul_acc(rho, out, C64::new(-0.5, 0.0), &mut ws.vec);
            ldl.right_mul_acc(rho, out, C64::new(-0.5, 0.0), &mut ws.vec);
        }
    }
}

/// Scratch buffers for right-hand-side evaluation.
pub(crate) struct Workspace {
    mat: Vec<C64>,
    vec: Vec<C64>,
}

impl Workspace {
    pub(crate) fn new(dim: usize) -> Self {
        Self { mat: vec![ZERO; dim * dim], vec: vec![ZERO; dim] }
    }
}

/// Right-hand side of the master equation, exactly as written.
pub fn lindblad_rhs(gen: &LindbladGenerator, rho: &CMatrix, t: f64) -> Result<CMatrix> {
    check_dims(gen.dim(), rho.dim())?;
    let n = gen.dim();
    let mut out = CMatrix::zeros(n);
    gen.rhs_into(t, rho.as_slice(), out.as_mut_slice(), &mut Workspace::new(n));
    Ok(out)
}

/// `−i H(t) ψ` into `out`.
pub(crate) fn schrodinger_rhs_into(h: &Hamiltonian, t: f64, psi: &[C64], out: &mut [C64]) {
    out.fill(ZERO);
    h.apply_vec_acc(t, psi, out, MINUS_I);
}

pub(crate) fn renormalize(psi: &mut [C64]) {
    let norm = vec_norm(psi);
    if norm > 0.0 {
        for a in psi.iter_mut() {
            *a /= norm;
        }
    }
}

/// Sampled states, either mixed or pure.
#[derive(Clone, Debug, PartialEq)]
pub enum States {
    Mixed(Vec<DensityMatrix>),
    Pure(Vec<PureState>),
}

impl States {
    pub fn len(&self) -> usize {
        match self {
            States::Mixed(v) => v.len(),
            States::Pure(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Density matrix at sample `k` (projector for pure samples).
    pub fn density(&self, k: usize) -> DensityMatrix {
        match self {
            States::Mixed(v) => v[k].clone(),
            States::Pure(v) => v[k].projector(),
        }
    }
}

/// Time grid plus per-sample states and named observables.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: States,
    pub observables: BTreeMap<String, Vec<f64>>,
}

impl Trajectory {
    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables.get(name).map(|v| v.as_slice())
    }

    pub fn final_density(&self) -> DensityMatrix {
        self.states.density(self.states.len() - 1)
    }
}

/// Integrates the master equation and checks the density-matrix invariants
/// at every sample; the first broken invariant aborts the run.
///
/// Records the observables `trace` and `purity`.
pub fn evolve_lindblad(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    t_final: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    check_dims(gen.dim(), rho0.dim())?;
    let n = gen.dim();
    let mut ws = Workspace::new(n);
    let mut y = rho0.matrix().as_slice().to_vec();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut trace = Vec::new();
    let mut purity = Vec::new();
    integrate(
        &mut y,
        t_final,
        cfg,
        |t, rho, out| gen.rhs_into(t, rho, out, &mut ws),
        |_| {},
        |t, rho| {
            let m = CMatrix::from_row_major(n, rho.to_vec())?;
            check_density(&m, t)?;
            let d = DensityMatrix::from_matrix_unchecked(m);
            times.push(t);
            trace.push(d.trace());
            purity.push(d.purity());
            states.push(d);
            Ok(ControlFlow::Continue(()))
        },
    )?;
    let mut observables = BTreeMap::new();
    observables.insert("trace".into(), trace);
    observables.insert("purity".into(), purity);
    Ok(Trajectory { times, states: States::Mixed(states), observables })
}

/// Integrates `i dψ/dt = H(t) ψ`.
///
/// The state is projected back onto the unit sphere after every step, which
/// keeps the method fourth order while removing the slow norm decay of RK4.
/// Records the observable `norm`.
pub fn evolve_schrodinger(
    h: &Hamiltonian,
    psi0: &PureState,
    t_final: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    check_dims(h.dim(), psi0.dim())?;
    let mut y = psi0.amplitudes().to_vec();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut norms = Vec::new();
    integrate(
        &mut y,
        t_final,
        cfg,
        |t, psi, out| schrodinger_rhs_into(h, t, psi, out),
        renormalize,
        |t, psi| {
            let norm = vec_norm(psi);
            let dev = (norm - 1.0).abs();
            if !(dev <= NORM_TOLERANCE) {
                return Err(Error::InvariantBroken { time: t, invariant: Invariant::Norm, deviation: dev });
            }
            times.push(t);
            norms.push(norm);
            states.push(PureState::from_vec_unchecked(psi.to_vec()));
            Ok(ControlFlow::Continue(()))
        },
    )?;
    let mut observables = BTreeMap::new();
    observables.insert("norm".into(), norms);
    Ok(Trajectory { times, states: States::Pure(states), observables })
}
