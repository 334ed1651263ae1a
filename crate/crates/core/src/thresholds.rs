//! Validity thresholds `n_h*`, `n_h` and the scalar conditions around them.
//!
//! Both threshold inequalities have one side constant in `n` and the other
//! strictly decreasing, so the first success persists. The search scans
//! linearly up to [`LINEAR_SCAN`] and then gallops and bisects, which makes
//! thresholds in the hundreds of millions cheap.

use crate::error::{Error, Result};
use crate::roots::bisect;
use crate::series_core::{epsilon_n, KernelParams};

pub const SCAN_CAP: u64 = 1_000_000_000;
pub const LINEAR_SCAN: u64 = 4096;
/// Number of successors checked after a threshold as evidence of persistence.
pub const PERSISTENCE_WINDOW: u64 = 50;

pub const RHO_INTEGER: f64 = 0.2;
pub const RHO_NONINTEGER: f64 = 0.193864;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `h ≥ ln(10/3)`, where `n_h* = 1` without a scan.
    Direct,
    Scanned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub h: f64,
    pub n_star: u64,
    pub n_h: u64,
    pub branch: Branch,
    /// `cosh h / cosh 2h ≤ 0.2`, the classical range for integer `β`.
    pub rho_condition_met: bool,
    /// Same with `0.193864`, for non-integer `β`.
    pub rho_condition_met_noninteger: bool,
    /// Both inequalities hold on the window after their thresholds.
    pub persistence_ok: bool,
}

fn q_of(h: f64) -> f64 {
    (-h).exp()
}

/// Right side of the `n_h*` inequality minus its left side; `≥ 0` is success.
pub fn n_star_slack(n: u64, h: f64) -> f64 {
    let q = q_of(h);
    let q2 = q * q;
    let one_minus_q = -(-h).exp_m1();
    let one_minus_q2 = -(-2.0 * h).exp_m1();
    // A = (1+q²)/2, ln A = ln(1 - (1-q²)/2)
    let ln_a = (-0.5 * one_minus_q2).ln_1p();
    let a2n = (2.0 * n as f64 * ln_a).exp();
    let q2n = (-2.0 * n as f64 * h).exp();
    let rhs = (5.0 + 3.0 * q2) / one_minus_q2 * a2n / (1.0 - a2n).sqrt() + (2.0 + q2n) * q2n;
    one_minus_q * one_minus_q - rhs
}

pub fn umova_n0_h_holds(n: u64, h: f64) -> bool {
    n_star_slack(n, h) >= 0.0
}

/// Smallest `n` beyond which `pred` holds, assuming `pred` is monotone.
fn first_success<P: Fn(u64) -> bool>(pred: P, start: u64, cap: u64) -> Result<u64> {
    let linear_end = (start + LINEAR_SCAN).min(cap);
    for n in start..=linear_end {
        if pred(n) {
            return Ok(n);
        }
    }
    let mut lo = linear_end;
    let mut hi = linear_end;
    loop {
        hi = hi.saturating_mul(2).min(cap);
        if pred(hi) {
            break;
        }
        if hi >= cap {
            return Err(Error::ThresholdUnreachable { cap });
        }
        lo = hi;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub fn n_star(h: f64) -> Result<u64> {
    check_h(h)?;
    if h >= (10.0f64 / 3.0).ln() {
        return Ok(1);
    }
    first_success(|n| umova_n0_h_holds(n, h), 1, SCAN_CAP)
}

/// Both sides of the width-threshold condition in terms of `q`:
/// `(37/(5(1-q))) q^{√n} + (q/(1-q)²) min{160/(27(n-√n)), 8/(3n-7√n)}` and
/// `(1/2 + 2q/((1+q²)(1-q))) ((1-q)/(1+q))^{4/(1-q²)}`.
pub fn condition_12_sides(n: u64, q: f64) -> (f64, f64) {
    (lemma3_bound(n, q), pq_lower_bound(q))
}

/// `(37/(5(1-q))) q^{√n} + (q/(1-q)²) min{160/(27(n-√n)), 8/(3n-7√n)}`.
pub fn lemma3_bound(n: u64, q: f64) -> f64 {
    let nf = n as f64;
    let sn = nf.sqrt();
    let one_minus_q = 1.0 - q;
    let first = 37.0 / (5.0 * one_minus_q) * (sn * q.ln()).exp();
    let m = (160.0 / (27.0 * (nf - sn))).min(8.0 / (3.0 * nf - 7.0 * sn));
    first + q / (one_minus_q * one_minus_q) * m
}

/// `(1/2 + 2q/((1+q²)(1-q))) ((1-q)/(1+q))^{4/(1-q²)}`, the lower bound for `P_q`.
pub fn pq_lower_bound(q: f64) -> f64 {
    let lead = 0.5 + 2.0 * q / ((1.0 + q * q) * (1.0 - q));
    lead * (4.0 / (1.0 - q * q) * ((1.0 - q) / (1.0 + q)).ln()).exp()
}

/// Width-threshold condition at `(n, h)`, written with `e^{-h}` and
/// `cosh h` as stated for the threshold.
pub fn condition_12_holds(n: u64, h: f64) -> bool {
    let q = q_of(h);
    let one_minus_q = -(-h).exp_m1();
    let nf = n as f64;
    let sn = nf.sqrt();
    let lhs = 37.0 / (5.0 * one_minus_q) * (-h * sn).exp()
        + q / (one_minus_q * one_minus_q) * (160.0 / (27.0 * (nf - sn))).min(8.0 / (3.0 * nf - 7.0 * sn));
    let cosh_h = (1.0 + q * q) / (2.0 * q);
    let rhs = (0.5 + 1.0 / (one_minus_q * cosh_h)) * (4.0 / (-(-2.0 * h).exp_m1()) * (one_minus_q / (1.0 + q)).ln()).exp();
    lhs <= rhs
}

pub fn n_h(h: f64) -> Result<u64> {
    check_h(h)?;
    first_success(|n| condition_12_holds(n, h), 9, SCAN_CAP)
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    Ok(())
}

/// `2ρ + (1+3ρ)ρ² / ((1-ρ)√(1-2ρ²)) - 1`.
pub fn rho_star_equation(rho: f64) -> f64 {
    2.0 * rho + (1.0 + 3.0 * rho) * rho * rho / ((1.0 - rho) * (1.0 - 2.0 * rho * rho).sqrt()) - 1.0
}

/// Root of [`rho_star_equation`] on `(0, 1/2)`.
pub fn rho_star() -> f64 {
    bisect(rho_star_equation, 0.0, 0.5).expect("sign change on (0, 1/2)")
}

/// `cosh h / cosh 2h = q(1+q²)/(1+q⁴)`.
pub fn cosh_ratio(h: f64) -> f64 {
    let q = q_of(h);
    let q2 = q * q;
    q * (1.0 + q2) / (1.0 + q2 * q2)
}

pub fn rho_of_beta(beta: f64) -> f64 {
    if beta == beta.round() {
        RHO_INTEGER
    } else {
        RHO_NONINTEGER
    }
}

pub fn check_classical_range(h: f64, beta: f64) -> bool {
    cosh_ratio(h) <= rho_of_beta(beta)
}

/// The `h` at which `cosh h / cosh 2h = ρ`.
pub fn classical_boundary(rho: f64) -> f64 {
    bisect(|h| cosh_ratio(h) - rho, 0.5, 5.0).expect("ratio decreases through ρ on [0.5, 5]")
}

/// `qⁿ/(1-q²ⁿ) ≤ 7 q^{√n} / (37 n²)`, compared in logarithms.
pub fn check_umova_z(n: u64, q: f64) -> bool {
    let nf = n as f64;
    let lq = q.ln();
    let lhs = nf * lq - (-(2.0 * nf * lq).exp_m1()).ln();
    let rhs = (7.0f64 / 37.0).ln() + nf.sqrt() * lq - 2.0 * nf.ln();
    lhs <= rhs
}

/// `(1-q)² ≥ (5+3q²)/(1-q²) · B/√(1-B) + ε_n(2+ε_n)`, `B = ((1+q²)/2)^{2n}`.
pub fn check_umova_n0(n: u64, params: &KernelParams) -> bool {
    let h = params.h();
    let q = params.q();
    let one_minus_q = -(-h).exp_m1();
    let one_minus_q2 = -(-2.0 * h).exp_m1();
    let ln_a = (-0.5 * one_minus_q2).ln_1p();
    let b = (2.0 * n as f64 * ln_a).exp();
    let e = epsilon_n(n, params);
    one_minus_q * one_minus_q >= (5.0 + 3.0 * q * q) / one_minus_q2 * b / (1.0 - b).sqrt() + e * (2.0 + e)
}

pub fn threshold_report(h: f64) -> Result<ThresholdReport> {
    let ns = n_star(h)?;
    let nh = n_h(h)?;
    let branch = if h >= (10.0f64 / 3.0).ln() { Branch::Direct } else { Branch::Scanned };
    let persistence_ok = (nh..=nh + PERSISTENCE_WINDOW).all(|n| condition_12_holds(n, h))
        && (branch == Branch::Direct || (ns..=ns + PERSISTENCE_WINDOW).all(|n| umova_n0_h_holds(n, h)));
    Ok(ThresholdReport {
        h,
        n_star: ns,
        n_h: nh,
        branch,
        rho_condition_met: cosh_ratio(h) <= RHO_INTEGER,
        rho_condition_met_noninteger: cosh_ratio(h) <= RHO_NONINTEGER,
        persistence_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_thresholds() {
        assert_eq!(n_star(1.0).unwrap(), 3);
        assert_eq!(n_h(1.0).unwrap(), 81);
        assert_eq!(n_star(1.3).unwrap(), 1);
        assert_eq!(n_h(2.0).unwrap(), 9);
        assert_eq!(n_h(1.3).unwrap(), 27);
        assert_eq!(n_star(0.5).unwrap(), 6);
        assert_eq!(n_h(0.5).unwrap(), 28272);
    }

    #[test]
    fn rho_star_value() {
        let r = rho_star();
        assert_eq!((r * 1e7).floor() as u64, 3253678);
        assert!(rho_star_equation(r).abs() < 1e-12);
        assert!((r - 0.32536787584140179).abs() < 1e-15);
    }

    #[test]
    fn classical_flags() {
        assert!(check_classical_range(1.644651, 0.0));
        assert!(!check_classical_range(1.0, 0.0));
        assert!((cosh_ratio(1.0) - 0.41015427200459839).abs() < 1e-15);
    }

    #[test]
    fn umova_z_examples() {
        let q = (-1.0f64).exp();
        assert!(check_umova_z(81, q));
        assert!(!check_umova_z(9, q));
    }

    #[test]
    fn umova_n0_examples() {
        // ((1+q²)/2)^{2} → 1/4 as q → 0, so n = 1 never suffices
        assert!(!check_umova_n0(1, &KernelParams::new(5.0, 0.0).unwrap()));
        assert!(check_umova_n0(2, &KernelParams::new(5.0, 0.0).unwrap()));
        assert!(!check_umova_n0(1, &KernelParams::new(0.1, 0.0).unwrap()));
    }
}
