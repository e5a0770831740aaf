//! States, operators, norms and distances.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::eigen::{hermitian_eigenvalues, min_eigenvalue};
use crate::error::{Error, Invariant, Result};
use crate::matrix::{check_dims, hermiticity_error, inner, vec_norm, CMatrix};
use crate::C64;

/// Tolerances attached to the state invariants.
pub mod tol {
    /// `‖ψ‖ = 1` for pure states.
    pub const NORM: f64 = 1e-12;
    /// Max elementwise Hermiticity deviation.
    pub const HERMITIAN: f64 = 1e-10;
    /// `|tr ρ − 1|`.
    pub const TRACE: f64 = 1e-10;
    /// Smallest admissible eigenvalue of a density matrix.
    pub const POSITIVITY: f64 = -1e-9;
    /// Negative radicands above this are treated as rounding noise.
    pub const RADICAND: f64 = -1e-12;
    /// `|⟨w|φ⟩| ≥ 1 − DEGENERATE` means φ is parallel to the winner.
    pub const DEGENERATE: f64 = 1e-12;
    /// Default absolute comparison tolerance.
    pub const DEFAULT: f64 = 1e-10;
}

/// Unit vector in `C^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Wraps amplitudes that are already normalized (within `tol::NORM`).
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        let norm = vec_norm(&amplitudes);
        if (norm - 1.0).abs() > tol::NORM {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = vec_norm(&amplitudes);
        if amplitudes.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero or non-finite vector".into()));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self { amplitudes })
    }

    pub(crate) fn from_vec_unchecked(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    /// Computational basis state `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::param(format!("basis index {k} out of range for dimension {dim}")));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[k] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, k: usize) -> C64 {
        self.amplitudes[k]
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        check_dims(self.dim(), other.dim())?;
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix { m: CMatrix::outer(&self.amplitudes, &self.amplitudes) }
    }
}

/// Uniform superposition `|s⟩ = N^{-1/2} Σ_k |k⟩`.
pub fn uniform_state(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::param(format!("search space needs N >= 2, got {n}")));
    }
    let a = 1.0 / libm::sqrt(n as f64);
    Ok(PureState { amplitudes: vec![C64::new(a, 0.0); n] })
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates all density-matrix invariants.
    pub fn new(m: CMatrix) -> Result<Self> {
        check_density(&m, f64::NAN).map_err(|e| Error::InvalidState(format!("{e}")))?;
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { m: CMatrix::from_real_diagonal(&vec![1.0 / dim as f64; dim]) }
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        // tr ρ² = Σ |ρ_ij|² for Hermitian ρ.
        self.m.frobenius_norm_sq()
    }

    /// `⟨φ|ρ|φ⟩` (real part).
    pub fn expectation(&self, phi: &PureState) -> Result<f64> {
        check_dims(self.dim(), phi.dim())?;
        Ok(self.m.sandwich(phi.amplitudes(), phi.amplitudes()).re)
    }
}

/// Checks trace, Hermiticity and positivity, tagging failures with `time`.
pub fn check_density(m: &CMatrix, time: f64) -> Result<()> {
    let n = m.dim();
    let trace_dev = (m.trace() - C64::new(1.0, 0.0)).norm();
    if trace_dev > tol::TRACE || !trace_dev.is_finite() {
        return Err(Error::InvariantBroken { time, invariant: Invariant::Trace, deviation: trace_dev });
    }
    let herm = hermiticity_error(m.as_slice(), n);
    if herm > tol::HERMITIAN {
        return Err(Error::InvariantBroken { time, invariant: Invariant::Hermiticity, deviation: herm });
    }
    let lmin = min_eigenvalue(m)?;
    if lmin < tol::POSITIVITY {
        return Err(Error::InvariantBroken { time, invariant: Invariant::Positivity, deviation: lmin });
    }
    Ok(())
}

/// Hermitian matrix in energy units (ħ = 1).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        let herm = m.hermiticity_error();
        if herm > tol::HERMITIAN {
            return Err(Error::InvalidState(format!("operator not Hermitian (deviation {herm:e})")));
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }
}

/// `‖a − b‖_F² = tr[(a − b)†(a − b)]`.
pub fn frobenius_norm_sq_diff(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    Ok(a.m.as_slice().iter().zip(b.m.as_slice()).map(|(x, y)| (x - y).norm_sqr()).sum())
}

/// `½ Σ_i |λ_i(a − b)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    let diff = a.m.sub(&b.m)?;
    let half_sum: f64 = 0.5 * hermitian_eigenvalues(&diff)?.iter().map(|l| l.abs()).sum::<f64>();
    Ok(half_sum.clamp(0.0, 1.0))
}

/// `sqrt(1 − ⟨φ|ρ|φ⟩)`, the fidelity upper bound on the trace distance
/// between `ρ` and `|φ⟩⟨φ|`.
pub fn fidelity_upper_bound(rho: &DensityMatrix, phi: &PureState) -> Result<f64> {
    let radicand = 1.0 - rho.expectation(phi)?;
    if radicand < tol::RADICAND {
        return Err(Error::InvalidState(format!("negative radicand {radicand:e}")));
    }
    Ok(libm::sqrt(radicand.max(0.0)).min(1.0))
}

/// Split of a state along a basis vector `|w⟩` and its orthogonal partner.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoDimDecomposition {
    /// `⟨w|φ⟩`.
    pub overlap: C64,
    /// `⟨w|φ⟩ sqrt(1 − |⟨w|φ⟩|²)`.
    pub f: C64,
    /// Normalized component of φ orthogonal to `|w⟩`.
    pub w_perp: PureState,
}

/// Writes `φ = ⟨w|φ⟩|w⟩ + sqrt(1 − |⟨w|φ⟩|²)|w⊥⟩`.
///
/// Fails with [`Error::DegenerateDecomposition`] when φ is parallel to `|w⟩`.
pub fn two_dim_decompose(phi: &PureState, w: usize) -> Result<TwoDimDecomposition> {
    if w >= phi.dim() {
        return Err(Error::param(format!("winner index {w} out of range for dimension {}", phi.dim())));
    }
    let overlap = phi.amplitude(w);
    if overlap.norm() >= 1.0 - tol::DEGENERATE {
        return Err(Error::DegenerateDecomposition { overlap_abs: overlap.norm() });
    }
    let mut rest = phi.amplitudes().to_vec();
    rest[w] = C64::new(0.0, 0.0);
    let perp_norm = vec_norm(&rest);
    if perp_norm == 0.0 {
        return Err(Error::DegenerateDecomposition { overlap_abs: overlap.norm() });
    }
    for a in &mut rest {
        *a /= perp_norm;
    }
    let f = overlap * libm::sqrt((1.0 - overlap.norm_sqr()).max(0.0));
    Ok(TwoDimDecomposition { overlap, f, w_perp: PureState::from_vec_unchecked(rest) })
}
