//! Eigenvalues of Hermitian matrices.
//!
//! Householder reduction to a Hermitian tridiagonal form, then implicit QL
//! with Wilkinson shifts on the equivalent real symmetric tridiagonal matrix
//! (a diagonal unitary rotates each complex off-diagonal onto its modulus).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::C64;

const MAX_QL_ITERATIONS: usize = 64;

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// The input is assumed Hermitian; imaginary parts of the diagonal are ignored.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (mut d, mut e) = tridiagonalize(m);
    ql_implicit(&mut d, &mut e)?;
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.first().copied().unwrap_or(0.0))
}

/// Returns the real diagonal and the moduli of the sub-diagonal
/// (with a trailing zero) of a tridiagonal matrix unitarily similar to `m`.
fn tridiagonalize(m: &CMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut e = vec![0.0; n];
    let mut v = vec![C64::new(0.0, 0.0); n];
    let mut p = vec![C64::new(0.0, 0.0); n];

    let anorm = a.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    // Columns already at rounding level are left alone; reflecting them only
    // drives the trailing block into subnormal arithmetic.
    let negligible = f64::EPSILON * anorm;
    for k in 0..n.saturating_sub(1) {
        let len = n - k - 1;
        let x0 = a[(k + 1) * n + k];
        if len == 1 {
            e[k] = x0.norm();
            break;
        }
        let xnorm = libm::sqrt((k + 1..n).map(|i| a[i * n + k].norm_sqr()).sum());
        if xnorm <= negligible {
            e[k] = xnorm;
            continue;
        }
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        e[k] = xnorm;

        // v = (x − α e₁)/‖x − α e₁‖, so (I − 2vv†)x = α e₁.
        let v = &mut v[..len];
        for (t, vi) in v.iter_mut().enumerate() {
            *vi = a[(k + 1 + t) * n + k];
        }
        v[0] -= alpha;
        let vnorm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
        for vi in v.iter_mut() {
            *vi /= vnorm;
        }

        // Trailing block B ← H B H = B − 2 v w† − 2 w v†, w = Bv − (v†Bv) v.
        let p = &mut p[..len];
        for (r, pr) in p.iter_mut().enumerate() {
            let row = &a[(k + 1 + r) * n + k + 1..(k + 1 + r) * n + n];
            *pr = row.iter().zip(v.iter()).map(|(b, vi)| b * vi).sum();
        }
        let kappa: C64 = v.iter().zip(p.iter()).map(|(vi, pi)| vi.conj() * pi).sum();
        let kappa = kappa.re;
        for (pi, vi) in p.iter_mut().zip(v.iter()) {
            *pi -= vi * kappa;
        }
        for r in 0..len {
            let (vr, wr) = (v[r], p[r]);
            let row = &mut a[(k + 1 + r) * n + k + 1..(k + 1 + r) * n + n];
            for (c, b) in row.iter_mut().enumerate() {
                *b -= 2.0 * (vr * p[c].conj() + wr * v[c].conj());
            }
        }
    }
    let d = (0..n).map(|i| a[i * n + i].re).collect();
    (d, e)
}

/// Implicit QL on a real symmetric tridiagonal matrix: `d` diagonal,
/// `e[i]` couples rows `i` and `i + 1`. Eigenvalues overwrite `d`.
fn ql_implicit(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    // Absolute floor: Householder only resolves eigenvalues to ~ε‖A‖ anyway,
    // and a purely relative test stalls on clusters of near-zero eigenvalues.
    let scale = d.iter().chain(e.iter()).fold(0.0f64, |acc, x| acc.max(x.abs()));
    let floor = f64::EPSILON * scale;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
