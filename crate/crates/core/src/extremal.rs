//! The extremal function `Φ = H ∗ sign sin(n·)`, its maximizer `y₀ = θπ/n`,
//! and the common value of the best approximation and the widths.
//!
//! The root equation is solved for the offset of `θ` from the root of its
//! leading term. With `ε = q^{2n}` and `δ = εd`, dividing by `ψ(n)ε` gives an
//! equation in `d` whose coefficients stay of order one for every `n`, so
//! neither the offset nor the asymptotic remainder is lost to cancellation
//! when `ψ(n)` underflows. Phases are kept in half-turns around an exact
//! half-integer, which makes `θ` exact when `β` is an integer.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::roots::newton_bisect;
use crate::series_core::{ln_psi, psi_real, KernelParams, SeriesConfig};
use crate::thresholds;
use crate::trig::{sincospi, sinpi};

pub const SCAN_POINTS: usize = 10_000;
pub const GAMMA_BOUND: f64 = 28.0 / (3.0 * PI);

/// The phase `a = nt - βπ/2` at a grid anchor, stored as `π·base + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    /// Half-turns; an exact half-integer at the maximizer.
    pub base: f64,
    /// Radians.
    pub offset: f64,
}

impl Anchor {
    /// `(sin a, cos a)`.
    pub fn sin_cos(&self) -> (f64, f64) {
        let (sb, cb) = sincospi(self.base);
        let (so, co) = self.offset.sin_cos();
        (sb * co + cb * so, cb * co - sb * so)
    }

    /// `sign sin a`; zero when `sin a` vanishes.
    pub fn sign(&self) -> f64 {
        let s = self.sin_cos().0;
        if s > 0.0 {
            1.0
        } else if s < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    /// `|sin a| - 1 = -cos²a / (1 + |sin a|)`.
    pub fn abs_sin_minus_one(&self) -> f64 {
        let (s, c) = self.sin_cos();
        -c * c / (1.0 + s.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSolution {
    pub theta: f64,
    /// Root equation at `theta`, relative to its leading coefficient `ψ(n)`.
    pub residual: f64,
    /// Bracket in `θ` that held the sign change.
    pub bracket: (f64, f64),
    /// Exactly one sign change in the fine scan of `[0, 1)`.
    pub unique: bool,
    pub sign_changes: usize,
    /// `nθπ/n - βπ/2` as anchor.
    pub anchor: Anchor,
    /// Offset `δ` of `θπ` from the leading-term root, radians.
    pub delta: f64,
    /// `δ/ε`.
    pub d: f64,
    /// `ε = q^{2n}` (may underflow) and its logarithm.
    pub eps: f64,
    pub ln_eps: f64,
    n: u64,
}

impl ThetaSolution {
    pub fn n(&self) -> u64 {
        self.n
    }

    /// `y₀ = θπ/n`.
    pub fn y0(&self) -> f64 {
        self.theta * PI / self.n as f64
    }
}

/// Scaled series data for the root equation at fixed `(n, h, β)`.
struct Scaled {
    beta: f64,
    eps: f64,
    ln_eps: f64,
    x0: f64,
    s0: f64,
    /// `(â_ν, sin πX_ν, cos πX_ν)` for `ν ≥ 1`.
    terms: Vec<(f64, f64, f64)>,
}

impl Scaled {
    fn new(n: u64, params: &KernelParams) -> Self {
        let h = params.h();
        let beta = params.beta();
        let ln_eps = -2.0 * n as f64 * h;
        let eps = ln_eps.exp();
        let theta0 = theta0(beta);
        let x0 = ((theta0 - 0.5 * beta) - 0.5).round() + 0.5;
        let s0 = sinpi(x0);
        let mut terms = Vec::new();
        let mut nu = 1u64;
        loop {
            // â_ν = ε^{ν-1} (1+ε) / (1+ε^{2ν+1})
            let lead = ((nu - 1) as f64 * ln_eps).exp();
            let a = lead * (1.0 + eps) / (1.0 + ((2 * nu + 1) as f64 * ln_eps).exp());
            if nu > 1 && a < 1e-22 {
                break;
            }
            let x = (2 * nu + 1) as f64 * x0 + nu as f64 * beta;
            let (sx, cx) = sincospi(x);
            terms.push((a, sx, cx));
            nu += 1;
            if nu > 1_000_000 {
                break;
            }
        }
        Scaled { beta, eps, ln_eps, x0, s0, terms }
    }

    fn g_and_dg(&self, d: f64) -> (f64, f64) {
        let e = self.eps;
        let ed = e * d;
        let mut g = -self.s0 * d * sinc(ed);
        let mut dg = -self.s0 * ed.cos();
        for (i, &(a, sx, cx)) in self.terms.iter().enumerate() {
            let m = (2 * i + 3) as f64;
            let (sp, cp) = (m * ed).sin_cos();
            let c = cx * cp - sx * sp;
            let s = sx * cp + cx * sp;
            g += a * c;
            dg -= a * m * e * s;
        }
        (g, dg)
    }

    /// `(|S|/ψ(n) - 1)/ε` at `δ = εd`, where `S` is the width series.
    fn value_excess(&self, d: f64) -> f64 {
        let e = self.eps;
        let ed = e * d;
        let half = sinc(0.5 * ed);
        let mut sum = 0.0;
        for (i, &(a, sx, cx)) in self.terms.iter().enumerate() {
            let m = (2 * i + 3) as f64;
            let (sp, cp) = (m * ed).sin_cos();
            sum += a / m * (sx * cp + cx * sp);
        }
        -0.5 * e * d * d * half * half + self.s0 * sum
    }

    /// `F(θ)/ψ(n)` evaluated straight from the cosines, used for the scan and
    /// the plug-in residual.
    fn equation_at(&self, theta: f64) -> f64 {
        let mut f = sincospi(theta - 0.5 * self.beta).1;
        for (i, &(a, _, _)) in self.terms.iter().enumerate() {
            let m = (2 * i + 3) as f64;
            f += self.eps * a * sincospi(m * theta - 0.5 * self.beta).1;
        }
        f
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Root of the leading term: `frac((β+1)/2)`.
pub fn theta0(beta: f64) -> f64 {
    let x = 0.5 * (beta + 1.0);
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// `Φ(t) = (4/π) Σ_ν sin((2ν+1)nt - βπ/2) / ((2ν+1) cosh((2ν+1)nh))`.
pub fn eval_Phi(t: f64, n: u64, params: &KernelParams, cfg: &SeriesConfig) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let h = params.h();
    let nh = n as f64 * h;
    let phase = params.beta() * PI / 2.0;
    let one_minus = -(-2.0 * nh).exp_m1();
    let mut sum = 0.0;
    let mut nu = 0u64;
    loop {
        let m = (2 * nu + 1) as f64;
        sum += psi_real(m, nh) * (m * n as f64 * t - phase).sin() / m;
        nu += 1;
        // remaining terms are below 2 q^{(2ν+1)n} / (1 - q^{2n})
        let tail = 4.0 / PI * 2.0 * (-((2 * nu + 1) as f64) * nh).exp() / one_minus;
        if tail < cfg.abs_tol() {
            break;
        }
        if nu >= cfg.max_terms() {
            return Err(Error::Truncation { needed: nu + 1, max_terms: cfg.max_terms() });
        }
    }
    Ok(4.0 / PI * sum)
}

pub fn solve_theta(n: u64, params: &KernelParams) -> Result<ThetaSolution> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let sc = Scaled::new(n, params);
    let f = |d: f64| sc.g_and_dg(d);

    let d = if sc.eps <= 0.1 {
        newton_bisect(f, -2.0, 2.0, 1e-17)
    } else {
        let quarter = PI / (4.0 * sc.eps);
        newton_bisect(f, -quarter, quarter, 1e-17).or_else(|_| newton_bisect(f, -2.0 * quarter, 2.0 * quarter, 1e-17))
    };
    let scan = scan_signs(&sc);
    let d = match d {
        Ok(d) => d,
        Err(_) => {
            return Err(Error::RootNotBracketed { lo: 0.0, hi: 1.0, scan: scan.samples });
        }
    };
    let delta = sc.eps * d;
    let mut theta = theta0(params.beta()) + delta / PI;
    let mut base = sc.x0;
    if theta < 0.0 {
        theta += 1.0;
        base += 1.0;
    } else if theta >= 1.0 {
        theta -= 1.0;
        base -= 1.0;
    }
    let half_width = if sc.eps <= 0.1 { 2.0 * sc.eps / PI } else { 0.25 };
    let residual = sc.equation_at(theta);
    Ok(ThetaSolution {
        theta,
        residual,
        bracket: (theta - half_width, theta + half_width),
        unique: scan.changes == 1,
        sign_changes: scan.changes,
        anchor: Anchor { base, offset: delta },
        delta,
        d,
        eps: sc.eps,
        ln_eps: sc.ln_eps,
        n,
    })
}

struct Scan {
    changes: usize,
    samples: Vec<(f64, f64)>,
}

/// Sign changes of the root equation at `SCAN_POINTS` equispaced `θ` in
/// `[0, 1)`, closing the loop with `F(1) = -F(0)`. Exact zeros count once.
fn scan_signs(sc: &Scaled) -> Scan {
    let vals: Vec<f64> = (0..SCAN_POINTS).map(|i| sc.equation_at(i as f64 / SCAN_POINTS as f64)).collect();
    let mut changes = 0;
    for i in 0..SCAN_POINTS {
        let a = vals[i];
        let b = if i + 1 < SCAN_POINTS { vals[i + 1] } else { -vals[0] };
        if a == 0.0 || a * b < 0.0 {
            changes += 1;
        }
    }
    let samples = vals.iter().enumerate().step_by(100).map(|(i, v)| (i as f64 / SCAN_POINTS as f64, *v)).collect();
    Scan { changes, samples }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthReport {
    pub n: u64,
    pub h: f64,
    pub beta: f64,
    /// Common value of `E_n` and the widths; underflows to zero for large `nh`.
    pub value: f64,
    pub ln_value: f64,
    pub theta: ThetaSolution,
    pub n_star: u64,
    pub n_h: u64,
    pub valid_E: bool,
    pub valid_width: bool,
    pub gamma_n: f64,
}

pub fn best_approx_value(n: u64, params: &KernelParams) -> Result<WidthReport> {
    let theta = solve_theta(n, params)?;
    let sc = Scaled::new(n, params);
    let g = sc.value_excess(theta.d);
    let eps = sc.eps;
    let nf = n as f64;
    let h = params.h();
    let ln_value = (4.0 / PI).ln() + ln_psi(nf, h) + (eps * g).ln_1p();
    let value = 4.0 / PI * psi_real(nf, h) * (1.0 + eps * g);
    let n_star = thresholds::n_star(h)?;
    let n_h = thresholds::n_h(h)?;
    Ok(WidthReport {
        n,
        h,
        beta: params.beta(),
        value,
        ln_value,
        theta,
        n_star,
        n_h,
        valid_E: n >= n_star,
        valid_width: n >= n_h,
        gamma_n: 4.0 / PI * g * (1.0 - eps),
    })
}

/// `γ_n` with `value = (4/π)(1/cosh nh)(1 + γ_n (π/4) e^{-2nh}/(1-e^{-2nh}))`.
pub fn asymptotic_decompose(n: u64, params: &KernelParams) -> Result<f64> {
    let theta = solve_theta(n, params)?;
    let sc = Scaled::new(n, params);
    Ok(4.0 / PI * sc.value_excess(theta.d) * (1.0 - sc.eps))
}

/// Width series evaluated term by term at `θ`:
/// `(4/π) |Σ_ν sin((2ν+1)θπ - βπ/2) / ((2ν+1) cosh((2ν+1)nh))|`.
pub fn value_direct(n: u64, params: &KernelParams, theta: f64) -> f64 {
    4.0 / PI * psi_real(n as f64, params.h()) * scaled_middle(n, params, theta)
}

/// The width series at `θ` divided by `ψ(n)`, without the `4/π` factor.
fn scaled_middle(n: u64, params: &KernelParams, theta: f64) -> f64 {
    let sc = Scaled::new(n, params);
    let mut s = sinpi(theta - 0.5 * params.beta());
    for (i, &(a, _, _)) in sc.terms.iter().enumerate() {
        let m = (2 * i + 3) as f64;
        s += sc.eps * a / m * sinpi(m * theta - 0.5 * params.beta());
    }
    s.abs()
}

/// Lower bound, middle, upper bound of the two-sided estimate, all divided
/// by `ψ(n) = 2qⁿ/(1+q²ⁿ)`.
pub fn two_sided_bounds(n: u64, params: &KernelParams) -> Result<(f64, f64, f64)> {
    let theta = solve_theta(n, params)?;
    let q2n = theta.eps;
    let spread = 7.0 / 3.0 * q2n / -(theta.ln_eps).exp_m1();
    let middle = scaled_middle(n, params, theta.theta);
    Ok((1.0 - spread, middle, 1.0 + spread))
}

pub fn two_sided_check(n: u64, params: &KernelParams) -> Result<bool> {
    let (lo, mid, hi) = two_sided_bounds(n, params)?;
    Ok(lo <= mid && mid <= hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(h: f64, b: f64) -> KernelParams {
        KernelParams::new(h, b).unwrap()
    }

    #[test]
    fn symmetric_roots_exact() {
        for &b in &[0.0, 2.0, -2.0] {
            assert_eq!(solve_theta(5, &p(1.0, b)).unwrap().theta, 0.5);
        }
        for &b in &[1.0, -1.0, 3.0] {
            assert_eq!(solve_theta(5, &p(1.0, b)).unwrap().theta, 0.0);
        }
    }

    #[test]
    fn frozen_theta_and_values() {
        let t = solve_theta(3, &p(1.0, 0.5)).unwrap();
        assert!((t.theta - 0.7507909654104720).abs() < 1e-13);
        assert!(t.unique);
        let w = best_approx_value(3, &p(1.0, 0.0)).unwrap();
        assert!((w.value - 0.12636364711288381).abs() < 1e-15);
        let w = best_approx_value(3, &p(1.0, 0.5)).unwrap();
        assert!((w.value - 0.12646847974532160).abs() < 1e-15);
    }

    #[test]
    fn huge_n_stays_finite() {
        let w = best_approx_value(151_116_186, &p(0.3, 0.25)).unwrap();
        assert!(w.ln_value.is_finite());
        assert!(w.gamma_n.abs() <= GAMMA_BOUND);
        assert_eq!(w.value, 0.0);
    }
}
