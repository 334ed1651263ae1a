//! Kernel series and the coefficient sequence `ψ(k) = 1/cosh(kh)`.
//!
//! Every reciprocal cosh is formed as `2q^k / (1 + q^{2k})` with `q = e^{-h}`,
//! so nothing overflows for large `kh`. Sums run left to right over
//! decreasing terms and stop at the first `K` with `2q^{K+1}/(1-q) < abs_tol`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Smallest absolute tolerance accepted by [`SeriesConfig`]. Kernel values are
/// of order one, so anything finer is below binary64 resolution.
pub const MIN_ABS_TOL: f64 = 1e-18;

pub const DEFAULT_ABS_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_TERMS: u64 = 10_000_000;

/// The pair `(h, β)` with the derived ratio `q = e^{-h}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    h: f64,
    beta: f64,
    q: f64,
}

impl KernelParams {
    pub fn new(h: f64, beta: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!("h must be positive and finite, got {h}")));
        }
        if !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be finite, got {beta}")));
        }
        Ok(Self { h, beta, q: (-h).exp() })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `q^k = e^{-kh}`; `k` may be fractional.
    pub fn q_pow(&self, k: f64) -> f64 {
        (-k * self.h).exp()
    }

    /// Same parameters with `β` replaced.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.h, beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    abs_tol: f64,
    max_terms: u64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self { abs_tol: DEFAULT_ABS_TOL, max_terms: DEFAULT_MAX_TERMS }
    }
}

impl SeriesConfig {
    pub fn new(abs_tol: f64, max_terms: u64) -> Result<Self> {
        if !(abs_tol > 0.0) || !abs_tol.is_finite() {
            return Err(Error::InvalidParameter(format!("abs_tol must be positive, got {abs_tol}")));
        }
        if abs_tol < MIN_ABS_TOL {
            return Err(Error::ToleranceUnreachable { tol: abs_tol, min: MIN_ABS_TOL });
        }
        if max_terms < 1 {
            return Err(Error::InvalidParameter("max_terms must be at least 1".into()));
        }
        Ok(Self { abs_tol, max_terms })
    }

    pub fn with_tol(abs_tol: f64) -> Result<Self> {
        Self::new(abs_tol, DEFAULT_MAX_TERMS)
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn max_terms(&self) -> u64 {
        self.max_terms
    }

    /// Smallest `K` with `2q^{K+1}/(1-q) < tol`, checked against `max_terms`.
    pub fn terms_for(&self, h: f64, tol: f64) -> Result<u64> {
        let needed = geometric_terms(h, tol);
        if needed > self.max_terms {
            return Err(Error::Truncation { needed, max_terms: self.max_terms });
        }
        Ok(needed)
    }

    /// [`Self::terms_for`] at the configured `abs_tol`.
    pub fn terms(&self, h: f64) -> Result<u64> {
        self.terms_for(h, self.abs_tol)
    }
}

/// Smallest `K ≥ 1` with `2e^{-(K+1)h} / (1 - e^{-h}) < tol`.
pub fn geometric_terms(h: f64, tol: f64) -> u64 {
    // ln 2 - (K+1)h - ln(1-q) < ln tol
    let one_minus_q = -(-h).exp_m1();
    let bound = (2f64.ln() - one_minus_q.ln() - tol.ln()) / h - 1.0;
    let mut k = bound.max(1.0).floor() as u64;
    while geometric_tail(h, k) >= tol {
        k += 1;
    }
    while k > 1 && geometric_tail(h, k - 1) < tol {
        k -= 1;
    }
    k.max(1)
}

/// `2q^{K+1}/(1-q)`, an upper bound on `Σ_{k>K} ψ(k)`.
pub fn geometric_tail(h: f64, k: u64) -> f64 {
    2.0 * (-((k + 1) as f64) * h).exp() / (-(-h).exp_m1())
}

/// `ψ(k) = 1/cosh(kh)` as `2q^k/(1+q^{2k})`.
pub fn psi(k: u64, params: &KernelParams) -> f64 {
    psi_real(k as f64, params.h)
}

/// `1/cosh(x h)` for real `x ≥ 0`, computed without overflow.
pub fn psi_real(x: f64, h: f64) -> f64 {
    let qk = (-x * h).exp();
    2.0 * qk / (1.0 + qk * qk)
}

/// `ln ψ(k) = ln 2 - kh - ln(1 + q^{2k})`, finite even when `ψ(k)` underflows.
pub fn ln_psi(k: f64, h: f64) -> f64 {
    std::f64::consts::LN_2 - k * h - (-2.0 * k * h).exp().ln_1p()
}

/// `H(t) = Σ_{k≥1} ψ(k) cos(kt - βπ/2)`.
pub fn eval_H(t: f64, params: &KernelParams, cfg: &SeriesConfig) -> Result<f64> {
    let big_k = cfg.terms(params.h)?;
    let phase = params.beta * PI / 2.0;
    let mut sum = 0.0;
    for k in 1..=big_k {
        sum += psi(k, params) * (k as f64 * t - phase).cos();
    }
    Ok(sum)
}

/// `Ψ_{β,1}(t) = Σ_{k≥1} (ψ(k)/k) cos(kt - (β+1)π/2)`.
pub fn eval_Psi_beta1(t: f64, params: &KernelParams, cfg: &SeriesConfig) -> Result<f64> {
    let big_k = cfg.terms(params.h)?;
    let phase = (params.beta + 1.0) * PI / 2.0;
    let mut sum = 0.0;
    for k in 1..=big_k {
        let kf = k as f64;
        sum += psi(k, params) / kf * (kf * t - phase).cos();
    }
    Ok(sum)
}

fn check_q(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (0,1), got {q}")));
    }
    Ok(-q.ln())
}

/// `P_q(t) = 1/2 + 2 Σ_{j≥1} cos(jt) / (q^j + q^{-j})`.
///
/// For `h = -ln q < π` the Poisson-summed form is used: its terms are all
/// positive, so values near the minimum at `t = π` keep full relative
/// accuracy even when they are far below one.
pub fn eval_P_q(t: f64, q: f64, cfg: &SeriesConfig) -> Result<f64> {
    let h = check_q(q)?;
    if h < PI {
        eval_P_q_dual(t, q, cfg)
    } else {
        eval_P_q_direct(t, q, cfg)
    }
}

/// Cosine series form of `P_q`.
pub fn eval_P_q_direct(t: f64, q: f64, cfg: &SeriesConfig) -> Result<f64> {
    let h = check_q(q)?;
    let big_k = cfg.terms(h)?;
    let mut sum = 0.0;
    for j in 1..=big_k {
        sum += psi_real(j as f64, h) * (j as f64 * t).cos();
    }
    Ok(0.5 + sum)
}

/// `P_q(t) = (π/(2h)) Σ_{m∈Z} sech(π(t - 2πm)/(2h))`.
pub fn eval_P_q_dual(t: f64, q: f64, cfg: &SeriesConfig) -> Result<f64> {
    let h = check_q(q)?;
    let tau = 2.0 * PI;
    let t0 = t - tau * (t / tau).round();
    let scale = PI / (2.0 * h);
    // |t0 - 2πm| ≥ (2|m|-1)π, so the pair at ±m is below 4 scale e^{-(2m-1)π²/(2h)}.
    let decay = PI * PI / h;
    let tail = |m: u64| 4.0 * scale * (-((2 * m + 1) as f64) * decay / 2.0).exp() / (-(-decay).exp_m1());
    let mut m_max = 0u64;
    while tail(m_max) >= cfg.abs_tol() {
        m_max += 1;
        if m_max > cfg.max_terms() {
            return Err(Error::Truncation { needed: m_max, max_terms: cfg.max_terms() });
        }
    }
    let sech = |x: f64| {
        let e = (-x.abs()).exp();
        2.0 * e / (1.0 + e * e)
    };
    let mut sum = sech(scale * t0);
    for m in 1..=m_max {
        let mf = m as f64;
        sum += sech(scale * (t0 - tau * mf)) + sech(scale * (t0 + tau * mf));
    }
    Ok(scale * sum)
}

/// `ε_n = sup_{k≥n} |ψ(k+1)/ψ(k) - q| = q^{2n+1}(1-q²)/(1+q^{2n+2})`.
pub fn epsilon_n(n: u64, params: &KernelParams) -> f64 {
    let q2n1 = params.q_pow((2 * n + 1) as f64);
    let q2n2 = params.q_pow((2 * n + 2) as f64);
    let one_minus_q2 = -(-2.0 * params.h).exp_m1();
    q2n1 * one_minus_q2 / (1.0 + q2n2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SeriesConfig {
        SeriesConfig::default()
    }

    #[test]
    fn psi_at_ln2_is_four_fifths() {
        let p = KernelParams::new(2f64.ln(), 0.0).unwrap();
        assert!((psi(1, &p) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn psi_matches_cosh_oracle() {
        let p = KernelParams::new(1.0, 0.0).unwrap();
        assert!((psi(1, &p) - 0.6480542736638854).abs() < 1e-15);
        let tiny = psi(2000, &p);
        assert!(tiny.is_finite() && tiny >= 0.0 && tiny < 1e-300);
    }

    #[test]
    fn frozen_series_values() {
        let p = KernelParams::new(1.0, 0.0).unwrap();
        assert!((eval_H(0.0, &p, &cfg()).unwrap() - 1.0711213299678232).abs() < 1e-13);
        let pm = KernelParams::new(1.0, -1.0).unwrap();
        assert!((eval_Psi_beta1(0.0, &pm, &cfg()).unwrap() - 0.8271262447690265).abs() < 1e-13);
        assert!((eval_P_q(0.0, 0.5, &cfg()).unwrap() - 2.266186007129487).abs() < 1e-13);
        assert!((eval_P_q_direct(0.0, 0.5, &cfg()).unwrap() - 2.266186007129487).abs() < 1e-13);
    }

    #[test]
    fn phase_kills_terms() {
        let p = KernelParams::new(0.7, 1.0).unwrap();
        assert!(eval_H(0.0, &p, &cfg()).unwrap().abs() < 1e-15);
        let p0 = KernelParams::new(0.7, 0.0).unwrap();
        assert!(eval_Psi_beta1(0.0, &p0, &cfg()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn epsilon_one_at_half() {
        let p = KernelParams::new(2f64.ln(), 0.0).unwrap();
        assert!((epsilon_n(1, &p) - 3.0 / 34.0).abs() < 1e-16);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(KernelParams::new(0.0, 0.0).is_err());
        assert!(KernelParams::new(-1.0, 0.0).is_err());
        assert!(matches!(SeriesConfig::with_tol(1e-20), Err(Error::ToleranceUnreachable { .. })));
        let tight = SeriesConfig::new(1e-14, 3).unwrap();
        let p = KernelParams::new(1.0, 0.0).unwrap();
        assert!(matches!(eval_H(0.0, &p, &tight), Err(Error::Truncation { .. })));
    }
}
