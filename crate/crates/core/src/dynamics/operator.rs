//! Operators with structure-aware application.
//!
//! The search Hamiltonians and jump operators are sums of one or two rank-one
//! terms, so applying them to an `N × N` state costs O(N²) instead of the
//! O(N³) of a dense product. Dense operators are still supported for custom
//! drivers.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{check_dims, inner, CMatrix};
use crate::quantum::HermitianOperator;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// `coeff |ket⟩⟨bra|`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOne {
    pub coeff: C64,
    pub ket: Vec<C64>,
    pub bra: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Operator {
    Dense(CMatrix),
    /// Sum of rank-one terms; an empty sum is the zero operator.
    LowRank { dim: usize, terms: Vec<RankOne> },
}

impl Operator {
    pub fn zero(dim: usize) -> Self {
        Operator::LowRank { dim, terms: Vec::new() }
    }

    /// `coeff |ket⟩⟨bra|`.
    pub fn rank_one(coeff: C64, ket: Vec<C64>, bra: Vec<C64>) -> Result<Self> {
        check_dims(ket.len(), bra.len())?;
        Ok(Operator::LowRank { dim: ket.len(), terms: alloc::vec![RankOne { coeff, ket, bra }] })
    }

    /// `scale |k⟩⟨k|`.
    pub fn basis_projector(dim: usize, k: usize, scale: f64) -> Result<Self> {
        if k >= dim {
            return Err(Error::param("projector index out of range"));
        }
        let mut e = alloc::vec![ZERO; dim];
        e[k] = C64::new(1.0, 0.0);
        Self::rank_one(C64::new(scale, 0.0), e.clone(), e)
    }

    pub fn dim(&self) -> usize {
        match self {
            Operator::Dense(m) => m.dim(),
            Operator::LowRank { dim, .. } => *dim,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Operator::Dense(m) => m.as_slice().iter().all(|z| *z == ZERO),
            Operator::LowRank { terms, .. } => terms.iter().all(|t| t.coeff == ZERO),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            Operator::Dense(m) => m.clone(),
            Operator::LowRank { dim, terms } => {
                let mut m = CMatrix::zeros(*dim);
                let n = *dim;
                let buf = m.as_mut_slice();
                for t in terms {
                    for i in 0..n {
                        let a = t.coeff * t.ket[i];
                        if a == ZERO {
                            continue;
                        }
                        for j in 0..n {
                            buf[i * n + j] += a * t.bra[j].conj();
                        }
                    }
                }
                m
            }
        }
    }

    pub fn adjoint(&self) -> Self {
        match self {
            Operator::Dense(m) => Operator::Dense(m.adjoint()),
            Operator::LowRank { dim, terms } => Operator::LowRank {
                dim: *dim,
                terms: terms
                    .iter()
                    .map(|t| RankOne { coeff: t.coeff.conj(), ket: t.bra.clone(), bra: t.ket.clone() })
                    .collect(),
            },
        }
    }

    /// `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        match (self, other) {
            (Operator::LowRank { dim, terms: a }, Operator::LowRank { terms: b, .. }) => {
                let mut terms = Vec::with_capacity(a.len() * b.len());
                for ta in a {
                    for tb in b {
                        let c = ta.coeff * tb.coeff * inner(&ta.bra, &tb.ket);
                        if c != ZERO {
                            terms.push(RankOne { coeff: c, ket: ta.ket.clone(), bra: tb.bra.clone() });
                        }
                    }
                }
                Ok(Operator::LowRank { dim: *dim, terms })
            }
            _ => Ok(Operator::Dense(self.to_dense().matmul(&other.to_dense())?)),
        }
    }

    /// `self + other`, staying low-rank when both are.
    pub fn plus(&self, other: &Operator) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        match (self, other) {
            (Operator::LowRank { dim, terms: a }, Operator::LowRank { terms: b, .. }) => {
                let mut terms = a.clone();
                terms.extend(b.iter().cloned());
                Ok(Operator::LowRank { dim: *dim, terms })
            }
            _ => Ok(Operator::Dense(self.to_dense().add(&other.to_dense())?)),
        }
    }

    /// `out += scale · self · m`.
    pub(crate) fn left_mul_acc(&self, m: &[C64], out: &mut [C64], scale: C64, scratch: &mut [C64]) {
        let n = self.dim();
        match self {
            Operator::Dense(a) => {
                let a = a.as_slice();
                for i in 0..n {
                    for k in 0..n {
                        let aik = scale * a[i * n + k];
                        if aik == ZERO {
                            continue;
                        }
                        let src = &m[k * n..(k + 1) * n];
                        for (o, x) in out[i * n..(i + 1) * n].iter_mut().zip(src) {
                            *o += aik * x;
                        }
                    }
                }
            }
            Operator::LowRank { terms, .. } => {
                let y = &mut scratch[..n];
                for t in terms {
                    // y = ⟨bra| m
                    y.fill(ZERO);
                    for (l, b) in t.bra.iter().enumerate() {
                        let bl = b.conj();
                        if bl == ZERO {
                            continue;
                        }
                        for (yj, x) in y.iter_mut().zip(&m[l * n..(l + 1) * n]) {
                            *yj += bl * x;
                        }
                    }
                    let c = scale * t.coeff;
                    for (i, k) in t.ket.iter().enumerate() {
                        let a = c * k;
                        if a == ZERO {
                            continue;
                        }
                        for (o, yj) in out[i * n..(i + 1) * n].iter_mut().zip(y.iter()) {
                            *o += a * yj;
                        }
                    }
                }
            }
        }
    }

    /// `out += scale · m · self`.
    pub(crate) fn right_mul_acc(&self, m: &[C64], out: &mut [C64], scale: C64, scratch: &mut [C64]) {
        let n = self.dim();
        match self {
            Operator::Dense(a) => {
                let a = a.as_slice();
                for i in 0..n {
                    for k in 0..n {
                        let mik = scale * m[i * n + k];
                        if mik == ZERO {
                            continue;
                        }
                        for (o, x) in out[i * n..(i + 1) * n].iter_mut().zip(&a[k * n..(k + 1) * n]) {
                            *o += mik * x;
                        }
                    }
                }
            }
            Operator::LowRank { terms, .. } => {
                let z = &mut scratch[..n];
                for t in terms {
                    // z = m |ket⟩
                    z.fill(ZERO);
                    for (k, kv) in t.ket.iter().enumerate() {
                        if *kv == ZERO {
                            continue;
                        }
                        for (i, zi) in z.iter_mut().enumerate() {
                            *zi += m[i * n + k] * kv;
                        }
                    }
                    let c = scale * t.coeff;
                    for (i, zi) in z.iter().enumerate() {
                        let a = c * zi;
                        if a == ZERO {
                            continue;
                        }
                        for (o, b) in out[i * n..(i + 1) * n].iter_mut().zip(&t.bra) {
                            if *b != ZERO {
                                *o += a * b.conj();
                            }
                        }
                    }
                }
            }
        }
    }

    /// `out += scale · self · v`.
    pub(crate) fn apply_vec_acc(&self, v: &[C64], out: &mut [C64], scale: C64) {
        let n = self.dim();
        match self {
            Operator::Dense(a) => {
                let a = a.as_slice();
                for (i, o) in out.iter_mut().enumerate() {
                    let s: C64 = a[i * n..(i + 1) * n].iter().zip(v).map(|(x, y)| x * y).sum();
                    *o += scale * s;
                }
            }
            Operator::LowRank { terms, .. } => {
                for t in terms {
                    let c = scale * t.coeff * inner(&t.bra, v);
                    if c == ZERO {
                        continue;
                    }
                    for (o, k) in out.iter_mut().zip(&t.ket) {
                        *o += c * k;
                    }
                }
            }
        }
    }
}

impl From<HermitianOperator> for Operator {
    fn from(h: HermitianOperator) -> Self {
        Operator::Dense(h.matrix().clone())
    }
}

/// Time-dependent Hermitian term, e.g. a custom driver `H_D(t)`.
pub trait TimeDependentOperator: Send + Sync {
    fn dim(&self) -> usize;
    fn at(&self, t: f64) -> Operator;
}

/// A constant Hermitian matrix viewed as a time-dependent term.
#[derive(Clone, Debug)]
pub struct ConstantOperator(pub Operator);

impl TimeDependentOperator for ConstantOperator {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn at(&self, _t: f64) -> Operator {
        self.0.clone()
    }
}

/// A closure `t ↦ H(t)` of fixed dimension.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64) -> Operator + Send + Sync> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(f64) -> Operator + Send + Sync> TimeDependentOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn at(&self, t: f64) -> Operator {
        (self.f)(t)
    }
}

/// `H(t) = static + Σ driven_k(t)`.
#[derive(Clone)]
pub struct Hamiltonian {
    static_part: Operator,
    driven: Vec<Arc<dyn TimeDependentOperator>>,
}

impl core::fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Hamiltonian")
            .field("static_part", &self.static_part)
            .field("driven_terms", &self.driven.len())
            .finish()
    }
}

impl Hamiltonian {
    pub fn constant(op: Operator) -> Self {
        Self { static_part: op, driven: Vec::new() }
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(Operator::zero(dim))
    }

    pub fn with_driven(mut self, term: Arc<dyn TimeDependentOperator>) -> Result<Self> {
        check_dims(self.dim(), term.dim())?;
        self.driven.push(term);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.static_part.dim()
    }

    pub fn static_part(&self) -> &Operator {
        &self.static_part
    }

    pub fn is_time_independent(&self) -> bool {
        self.driven.is_empty()
    }

    /// Dense matrix of `H(t)`.
    pub fn dense_at(&self, t: f64) -> HermitianOperator {
        let mut m = self.static_part.to_dense();
        for d in &self.driven {
            m = m.add(&d.at(t).to_dense()).expect("dimensions checked on insertion");
        }
        HermitianOperator::from_matrix_unchecked(m)
    }

    /// `out += scale · H(t) · m`.
    pub(crate) fn left_mul_acc(&self, t: f64, m: &[C64], out: &mut [C64], scale: C64, scratch: &mut [C64]) {
        self.static_part.left_mul_acc(m, out, scale, scratch);
        for d in &self.driven {
            d.at(t).left_mul_acc(m, out, scale, scratch);
        }
    }

    /// `out += scale · m · H(t)`.
    pub(crate) fn right_mul_acc(&self, t: f64, m: &[C64], out: &mut [C64], scale: C64, scratch: &mut [C64]) {
        self.static_part.right_mul_acc(m, out, scale, scratch);
        for d in &self.driven {
            d.at(t).right_mul_acc(m, out, scale, scratch);
        }
    }

    /// `out += scale · H(t) · v`.
    pub(crate) fn apply_vec_acc(&self, t: f64, v: &[C64], out: &mut [C64], scale: C64) {
        self.static_part.apply_vec_acc(v, out, scale);
        for d in &self.driven {
            d.at(t).apply_vec_acc(v, out, scale);
        }
    }
}
