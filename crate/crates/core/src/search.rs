//! The search problem: oracle `E|w⟩⟨w|`, driver `H_D(t)`, the dephasing
//! oracle master equation, the oracle-free reference evolution and the exact
//! two-level reduction for the uniform driver.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;

use crate::dynamics::{ConstantOperator, Hamiltonian, LindbladGenerator, Operator, TimeDependentOperator};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::quantum::{uniform_state, DensityMatrix, HermitianOperator, PureState};
use crate::C64;

/// The controllable part of the Hamiltonian.
#[derive(Clone)]
pub enum Driver {
    /// `E |s⟩⟨s|` with `|s⟩` the uniform superposition.
    UniformProjector,
    Custom(Arc<dyn TimeDependentOperator>),
}

impl Driver {
    /// A constant custom driver.
    pub fn constant(h: HermitianOperator) -> Self {
        Driver::Custom(Arc::new(ConstantOperator(h.into())))
    }

    /// `H_D = 0`.
    pub fn zero(dim: usize) -> Self {
        Driver::Custom(Arc::new(ConstantOperator(Operator::zero(dim))))
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Driver::UniformProjector)
    }
}

impl core::fmt::Debug for Driver {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Driver::UniformProjector => f.write_str("UniformProjector"),
            Driver::Custom(op) => write!(f, "Custom(dim = {})", op.dim()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchModel {
    n: usize,
    winner: usize,
    energy: f64,
    gamma: f64,
    driver: Driver,
}

impl SearchModel {
    /// Uniform driver, winner `0`.
    pub fn new(n: usize, energy: f64, gamma: f64) -> Result<Self> {
        let m = Self { n, winner: 0, energy, gamma, driver: Driver::UniformProjector };
        m.validate()?;
        Ok(m)
    }

    pub fn with_winner(mut self, winner: usize) -> Result<Self> {
        self.winner = winner;
        self.validate()?;
        Ok(self)
    }

    pub fn with_driver(mut self, driver: Driver) -> Result<Self> {
        self.driver = driver;
        self.validate()?;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::param(format!("N must be at least 2, got {}", self.n)));
        }
        if self.winner >= self.n {
            return Err(Error::param(format!("winner {} out of range for N = {}", self.winner, self.n)));
        }
        if !(self.energy > 0.0) || !self.energy.is_finite() {
            return Err(Error::param(format!("E must be positive, got {}", self.energy)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::param(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        if let Driver::Custom(op) = &self.driver {
            if op.dim() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: op.dim() });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn winner(&self) -> usize {
        self.winner
    }
    pub fn energy(&self) -> f64 {
        self.energy
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn driver(&self) -> &Driver {
        &self.driver
    }

    /// `E |w⟩⟨w|`.
    pub fn oracle_operator(&self) -> Operator {
        Operator::basis_projector(self.n, self.winner, self.energy).expect("validated model")
    }

    /// `H_D(t)`.
    pub fn driver_hamiltonian(&self) -> Hamiltonian {
        match &self.driver {
            Driver::UniformProjector => Hamiltonian::constant(self.uniform_projector()),
            Driver::Custom(op) => Hamiltonian::zero(self.n).with_driven(op.clone()).expect("validated model"),
        }
    }

    /// Initial state of both the oracle and the oracle-free runs.
    pub fn initial_state(&self) -> PureState {
        uniform_state(self.n).expect("validated model")
    }

    fn uniform_projector(&self) -> Operator {
        let s = uniform_state(self.n).expect("validated model");
        Operator::rank_one(C64::new(self.energy, 0.0), s.amplitudes().to_vec(), s.amplitudes().to_vec())
            .expect("same length")
    }
}

/// Noisy oracle: `H = E|w⟩⟨w| + H_D(t)` with jump list `[sqrt(Γ)|w⟩⟨w|]`
/// (empty when `Γ = 0`).
pub fn build_oracle_generator(m: &SearchModel) -> Result<LindbladGenerator> {
    let h = match &m.driver {
        Driver::UniformProjector => Hamiltonian::constant(m.oracle_operator().plus(&m.uniform_projector())?),
        Driver::Custom(op) => Hamiltonian::constant(m.oracle_operator()).with_driven(op.clone())?,
    };
    let jumps = if m.gamma > 0.0 {
        vec![Operator::basis_projector(m.n, m.winner, libm::sqrt(m.gamma))?]
    } else {
        vec![]
    };
    LindbladGenerator::new(h, jumps)
}

/// Oracle-free reference: `H = H_D(t)`, no dissipation.
pub fn build_no_oracle_generator(m: &SearchModel) -> Result<LindbladGenerator> {
    Ok(LindbladGenerator::unitary(m.driver_hamiltonian()))
}

/// Uniform-driver dynamics restricted to span{|w⟩, |w⊥⟩}, with
/// `|s⟩ = a|w⟩ + b|w⊥⟩`. In reduced coordinates the winner is index 0.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedModel {
    pub a: f64,
    pub b: f64,
    pub energy: f64,
    pub gamma: f64,
    /// `E [[1 + a², ab], [ab, b²]]`.
    pub h2: HermitianOperator,
}

impl ReducedModel {
    /// Reduced-coordinate index of the winner.
    pub const WINNER: usize = 0;

    pub fn oracle_generator(&self) -> Result<LindbladGenerator> {
        let jumps = if self.gamma > 0.0 {
            vec![Operator::basis_projector(2, Self::WINNER, libm::sqrt(self.gamma))?]
        } else {
            vec![]
        };
        LindbladGenerator::new(Hamiltonian::constant(Operator::Dense(self.h2.matrix().clone())), jumps)
    }

    /// `E |s⟩⟨s|` in reduced coordinates.
    pub fn no_oracle_generator(&self) -> Result<LindbladGenerator> {
        let s = self.initial_state();
        let op = Operator::rank_one(C64::new(self.energy, 0.0), s.amplitudes().to_vec(), s.amplitudes().to_vec())?;
        Ok(LindbladGenerator::unitary(Hamiltonian::constant(op)))
    }

    /// `|s⟩ = (a, b)`.
    pub fn initial_state(&self) -> PureState {
        PureState::from_vec_unchecked(vec![C64::new(self.a, 0.0), C64::new(self.b, 0.0)])
    }

    /// Coordinates `V† ρ V` of a full-space matrix, `V = [|w⟩, |w⊥⟩]` with
    /// `|w⊥⟩ ∝ |s⟩ − a|w⟩`.
    pub fn project(&self, m: &SearchModel, rho: &CMatrix) -> Result<CMatrix> {
        if rho.dim() != m.n() {
            return Err(Error::DimensionMismatch { expected: m.n(), found: rho.dim() });
        }
        let n = m.n();
        let w = m.winner();
        let perp_amp = (1.0 / libm::sqrt(n as f64)) / self.b;
        let mut perp = vec![C64::new(perp_amp, 0.0); n];
        perp[w] = C64::new(0.0, 0.0);
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[w] = C64::new(1.0, 0.0);
        let basis = [e, perp];
        Ok(CMatrix::from_fn(2, |i, j| rho.sandwich(&basis[i], &basis[j])))
    }
}

/// Exact 2×2 restriction of the uniform-driver model.
pub fn build_reduced_model(m: &SearchModel) -> Result<ReducedModel> {
    if !m.driver.is_uniform() {
        return Err(Error::param("the two-level reduction only holds for the uniform driver"));
    }
    let a = 1.0 / libm::sqrt(m.n as f64);
    let b = libm::sqrt(1.0 - 1.0 / m.n as f64);
    let e = m.energy;
    let h2 = CMatrix::from_row_major(
        2,
        vec![
            C64::new(e * (1.0 + a * a), 0.0),
            C64::new(e * a * b, 0.0),
            C64::new(e * a * b, 0.0),
            C64::new(e * b * b, 0.0),
        ],
    )?;
    Ok(ReducedModel { a, b, energy: e, gamma: m.gamma, h2: HermitianOperator::from_matrix_unchecked(h2) })
}

/// `⟨w|ρ|w⟩`.
pub fn success_probability(rho: &DensityMatrix, w: usize) -> f64 {
    rho.get(w, w).re
}

/// `|⟨w|ψ⟩|²`.
pub fn success_probability_pure(psi: &PureState, w: usize) -> f64 {
    psi.amplitude(w).norm_sqr()
}
