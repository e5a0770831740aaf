//! Least-squares fits: power laws in log–log space and exponential decay
//! in log-linear space.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Standard error of the exponent (0 for an exact fit).
    pub exponent_stderr: f64,
    pub points: usize,
}

/// Fits `ln y = ln c + k ln x`. Needs at least three points with `x, y > 0`.
pub fn power_law_fit(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: ys.len() });
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::param("power-law fit needs at least 3 points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::param("power-law fit needs finite positive data"));
    }
    let nf = n as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sx += libm::log(*x);
        sy += libm::log(*y);
    }
    let (mx, my) = (sx / nf, sy / nf);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = libm::log(*x) - mx;
        sxx += dx * dx;
        sxy += dx * (libm::log(*y) - my);
    }
    if sxx == 0.0 {
        return Err(Error::param("power-law fit needs at least two distinct x values"));
    }
    let k = sxy / sxx;
    let intercept = my - k * mx;
    let mut sse = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = libm::log(*y) - intercept - k * libm::log(*x);
        sse += r * r;
    }
    Ok(PowerLawFit {
        exponent: k,
        prefactor: libm::exp(intercept),
        exponent_stderr: libm::sqrt(sse / (nf - 2.0) / sxx),
        points: n,
    })
}

/// Rate `k` of `y ≈ y0 · e^{−k t}`, fitted on `ln y`. Needs at least three
/// positive points.
pub fn exponential_decay_rate(ts: &[f64], ys: &[f64]) -> Result<f64> {
    if ts.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: ts.len(), found: ys.len() });
    }
    if ts.len() < 3 {
        return Err(Error::param("decay fit needs at least 3 points"));
    }
    if ys.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::param("decay fit needs finite positive data"));
    }
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let my = ys.iter().map(|y| libm::log(*y)).sum::<f64>() / n;
    let (mut stt, mut sty) = (0.0, 0.0);
    for (t, y) in ts.iter().zip(ys) {
        stt += (t - mt) * (t - mt);
        sty += (t - mt) * (libm::log(*y) - my);
    }
    if stt == 0.0 {
        return Err(Error::param("decay fit needs distinct times"));
    }
    Ok(-sty / stt)
}
