//! Fundamental SK-splines on the uniform partition `x_k = kπ/n`.
//!
//! The spline `α₀ + Σ α_k Ψ_{β,1}(· - x_k)` interpolating `δ_{0,k}` at the
//! shifted nodes `y_k = x_k + y` is found by diagonalizing the circulant
//! node matrix; its eigenvalues are `n λ_l(y)`. Its `(ψ,β)`-derivative is
//! constant between nodes and is available in four ways:
//!
//! * from the `α` coefficients and the Bernoulli kernel ([`SplineSystem::derivative`]),
//! * the eigenvalue sum over `ρ_j = Re λ_j`, `σ_j = Im λ_j` ([`eval_derivative_repr`]),
//! * the form with `1/|λ_{n-j}|` and the corrections `γ₁, γ₂`,
//! * the form `P_q(t_k - y) sign sin(ny - βπ/2) + γ₁ + … + γ₅`.
//!
//! Everything past the first is computed relative to
//! `L_j = ψ(n-j)/(n-j) + ψ(n+j)/(n+j)`, so nothing underflows for large `n`.
//! The common scale of the last three is the bracket
//! `B_k = (-1)^{k+1} (4nψ(n)/π) · derivative(t_k)`, which is of order one.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dd::{self, DD};
use crate::error::{Error, Result};
use crate::extremal::{solve_theta, Anchor, ThetaSolution};
use crate::series_core::{eval_P_q, eval_Psi_beta1, ln_psi, psi_real, KernelParams, SeriesConfig};
use crate::thresholds::{check_umova_z, lemma3_bound};
use crate::trig::{eval_midpoints, sincospi, TrigPoly};

/// Eigenvalues with `|λ_l| ≤ NEAR_ZERO · L` (relative to their leading
/// aliased magnitude) are treated as singular.
pub const NEAR_ZERO: f64 = 1e-13;

/// Records are kept for every `j` up to this `n`; beyond it only the terms
/// that survive truncation are formed.
pub const FULL_RECORDS_MAX: u64 = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGrid {
    n: u64,
    y: f64,
    anchor: Anchor,
}

impl NodeGrid {
    /// Grid with shift `y ∈ [0, π/n)`.
    pub fn new(n: u64, y: f64, params: &KernelParams) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(y >= 0.0 && y < PI / n as f64) {
            return Err(Error::InvalidParameter(format!("y = {y} outside [0, π/n)")));
        }
        // ny/π - β/2 in double-double, reduced mod 2
        let base = (DD::from_f64(y).div(dd::PI).mul_f64(n as f64) - DD::from_f64(params.beta()).mul_f64(0.5))
            .rem2()
            .to_f64();
        Ok(Self { n, y, anchor: Anchor { base, offset: 0.0 } })
    }

    /// Grid at the maximizer `y₀ = θπ/n`, with the exact phase anchor of the root.
    pub fn at_maximizer(theta: &ThetaSolution) -> Self {
        let n = theta.n();
        let y = theta.y0().min(PI / n as f64 * (1.0 - f64::EPSILON));
        Self { n, y: y.max(0.0), anchor: theta.anchor }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn anchor(&self) -> Anchor {
        self.anchor
    }

    /// `x_k = kπ/n`.
    pub fn node(&self, k: u64) -> f64 {
        k as f64 * PI / self.n as f64
    }

    /// `y_k = x_k + y`.
    pub fn shifted(&self, k: u64) -> f64 {
        self.node(k) + self.y
    }

    /// `t_k = kπ/n - π/(2n)`, `k = 1..2n`.
    pub fn midpoint(&self, k: u64) -> f64 {
        (2 * k - 1) as f64 * PI / (2 * self.n) as f64
    }

    /// Interval index `k` with `t ∈ ((k-1)π/n, kπ/n)`, after reducing `t` into `[0, 2π)`.
    pub fn interval_of(&self, t: f64) -> Result<u64> {
        let tau = 2.0 * PI;
        let t = t - tau * (t / tau).floor();
        let pos = t * self.n as f64 / PI;
        let k = pos.floor();
        if pos == k {
            return Err(Error::Domain(format!("t = {t} is a node")));
        }
        Ok(k as u64 + 1)
    }
}

fn check_l(l: u64, n: u64) -> Result<()> {
    if l < 1 || l > 2 * n {
        return Err(Error::InvalidParameter(format!("eigenvalue index {l} outside 1..{}", 2 * n)));
    }
    Ok(())
}

/// `λ_l(y) = (1/n) Σ_{ν=1}^{2n} e^{ilνπ/n} Ψ_{β,1}(y - νπ/n)`, summed in
/// double-double. The terms cancel down to `ψ(n)/n`, well below the size of
/// the kernel values, so binary64 would lose up to eight digits here.
pub fn lambda_direct(l: u64, grid: &NodeGrid, params: &KernelParams, cfg: &SeriesConfig) -> Result<Complex64> {
    let psi_vals = kernel_at_nodes_dd(grid, params, cfg)?;
    Ok(weighted_sum(l, grid.n, &psi_vals))
}

/// [`lambda_direct`] for every `l = 1..2n`.
pub fn lambda_direct_all(grid: &NodeGrid, params: &KernelParams, cfg: &SeriesConfig) -> Result<Vec<Complex64>> {
    let psi_vals = kernel_at_nodes_dd(grid, params, cfg)?;
    Ok((1..=2 * grid.n).map(|l| weighted_sum(l, grid.n, &psi_vals)).collect())
}

fn weighted_sum(l: u64, n: u64, psi_vals: &[DD]) -> Complex64 {
    let two_n = 2 * n;
    let mut re = DD::ZERO;
    let mut im = DD::ZERO;
    for (i, v) in psi_vals.iter().enumerate() {
        let nu = i as u64 + 1;
        let r = ((l % two_n) * nu) % two_n;
        let (s, c) = dd::sincospi(DD::from_i64(r as i64).div_f64(n as f64));
        re = re + c * *v;
        im = im + s * *v;
    }
    Complex64::new(re.to_f64() / n as f64, im.to_f64() / n as f64)
}

/// `Ψ_{β,1}(y - νπ/n)` for `ν = 1..2n` in double-double.
fn kernel_at_nodes_dd(grid: &NodeGrid, params: &KernelParams, cfg: &SeriesConfig) -> Result<Vec<DD>> {
    let n = grid.n;
    let h = params.h();
    let tol = cfg.abs_tol() * psi_real(n as f64, h) / (2 * n) as f64;
    let big_k = cfg.terms_for(h, tol.max(1e-300))?;
    let y_pi = DD::from_f64(grid.y).div(dd::PI);
    let shift = (DD::from_f64(params.beta()) + DD::ONE).mul_f64(0.5);
    let two_n = 2 * n;
    let mut out = Vec::with_capacity(two_n as usize);
    for nu in 1..=two_n {
        let mut sum = DD::ZERO;
        for k in 1..=big_k {
            let r = (k % two_n) * nu % two_n;
            let x = y_pi.mul_f64(k as f64) - DD::from_i64(r as i64).div_f64(n as f64) - shift;
            let c = dd::sincospi(x.rem2()).1;
            sum = sum + c.mul_f64(psi_real(k as f64, h) / k as f64);
        }
        out.push(sum);
    }
    Ok(out)
}

/// `λ_l(y) = Σ_{m∈Z} c_{2mn+l} e^{i(2mn+l)y}` with `c_k = (ψ(|k|)/|k|) e^{∓i(β+1)π/2}`,
/// for `l = 1..2n`. Terms are dropped once the aliased coefficient falls below
/// `abs_tol · L · (1 - q^{2n})`, where `L` is the leading aliased magnitude.
pub fn lambda_closed(l: u64, grid: &NodeGrid, params: &KernelParams, cfg: &SeriesConfig) -> Result<Complex64> {
    let n = grid.n;
    check_l(l, n)?;
    let h = params.h();
    let y_pi = grid.y / PI;
    let shift = 0.5 * (params.beta() + 1.0);
    let lp = l.min(2 * n - l).max(1);
    let lead = psi_real(lp as f64, h) / lp as f64;
    let guard = cfg.abs_tol() * lead * -(-2.0 * n as f64 * h).exp_m1();
    let coef = |k: u64| psi_real(k as f64, h) / k as f64;
    let phase = |k: u64| {
        let (s, c) = sincospi(k as f64 * y_pi - shift);
        Complex64::new(c, s)
    };
    let mut sum = Complex64::new(0.0, 0.0);
    let mut m = 0u64;
    loop {
        let k = 2 * m * n + l;
        let c = coef(k);
        sum += phase(k) * c;
        if c < guard {
            break;
        }
        m += 1;
    }
    let mut m = 1u64;
    loop {
        let k = 2 * m * n - l;
        if k == 0 {
            m += 1;
            continue;
        }
        let c = coef(k);
        sum += phase(k).conj() * c;
        if c < guard {
            break;
        }
        m += 1;
    }
    Ok(sum)
}

/// `ψ(k)/ψ(n) = q^{k-n}(1+q^{2n})/(1+q^{2k})`.
fn psi_ratio(k: f64, n: f64, h: f64) -> f64 {
    (-(k - n) * h).exp() * (1.0 + (-2.0 * n * h).exp()) / (1.0 + (-2.0 * k * h).exp())
}

/// Relative weights of `L_j`: with `Q = q^{2j}`,
/// `κ_j = (ψ(n)/n)/L_j = q^j/(A_j + B_j Q)`, `A_j = 1 + a_j`, `B_j = 1 + b_j`.
#[derive(Debug, Clone, Copy)]
struct Weights {
    kappa: f64,
    a: f64,
    b: f64,
    qq: f64,
}

fn weights(j: u64, n: u64, h: f64) -> Weights {
    let (nf, jf) = (n as f64, j as f64);
    let q2 = |x: f64| (-2.0 * x * h).exp();
    let qn = q2(nf);
    let a = (jf + nf * qn - (nf - jf) * q2(nf - jf)) / ((nf - jf) * (1.0 + q2(nf - jf)));
    let b = (-jf + nf * qn - (nf + jf) * q2(nf + jf)) / ((nf + jf) * (1.0 + q2(nf + jf)));
    let qq = q2(jf);
    let kappa = (-jf * h).exp() / ((1.0 + a) + (1.0 + b) * qq);
    Weights { kappa, a, b, qq }
}

/// Aliased term `m` of `e^{ijy} λ_{n-j}(y) / L_j`: the coefficient
/// `c_{(2m+1)n-j}/L_j` times `e^{i(2m+1)ny}`, with the phase taken from the
/// anchor `a = ny - βπ/2` as `(2m+1)a + mβπ - (β+1)π/2 + βπ/2`.
fn aliased_term(m: i64, j: u64, grid: &NodeGrid, params: &KernelParams, kappa: f64) -> Complex64 {
    let n = grid.n;
    let h = params.h();
    let beta = params.beta();
    let an = grid.anchor;
    let (odd, k, conj) = if m >= 0 {
        let odd = 2 * m as u64 + 1;
        (odd, odd * n - j, false)
    } else {
        let mp = (-m) as u64;
        let odd = 2 * mp - 1;
        (odd, odd * n + j, true)
    };
    let mult = if m >= 0 { m } else { -m - 1 } as f64;
    // (odd)a + mult·βπ - π/2 for the positive-frequency form
    let half_turns = odd as f64 * an.base + mult * beta - 0.5;
    let (sb, cb) = sincospi(half_turns);
    let (so, co) = (odd as f64 * an.offset).sin_cos();
    let mut ph = Complex64::new(cb * co - sb * so, sb * co + cb * so);
    if conj {
        ph = ph.conj();
    }
    let c = kappa * (n as f64 / k as f64) * psi_ratio(k as f64, n as f64, h);
    ph * c
}

/// `e^{ijy} λ_{n-j}(y) / L_j` as the full aliased sum.
pub fn lambda_closed_scaled(j: u64, grid: &NodeGrid, params: &KernelParams) -> Result<Complex64> {
    let n = grid.n;
    if j >= n {
        return Err(Error::InvalidParameter(format!("j = {j} must be below n = {n}")));
    }
    let w = weights(j, n, params.h());
    let lead = aliased_term(0, j, grid, params, w.kappa) + aliased_term(-1, j, grid, params, w.kappa);
    Ok(lead + r1_scaled(j, grid, params, w.kappa))
}

/// `r_j^{(1)}/L_j`: all aliased terms except the two leading ones.
fn r1_scaled(j: u64, grid: &NodeGrid, params: &KernelParams, kappa: f64) -> Complex64 {
    let mut r = Complex64::new(0.0, 0.0);
    let mut m = 1i64;
    loop {
        let pos = aliased_term(m, j, grid, params, kappa);
        let neg = aliased_term(-m - 1, j, grid, params, kappa);
        r += pos + neg;
        // the terms are relative to L_j, so this is a relative cutoff
        if pos.norm() + neg.norm() < 1e-20 || m > 100_000 {
            break;
        }
        m += 1;
    }
    r
}

/// Decomposition of `λ_{n-j}` at one `j`, all relative to `L_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaRecord {
    pub j: u64,
    /// `(ψ(n)/n)/L_j`.
    pub kappa: f64,
    /// `ln L_j`.
    pub ln_l: f64,
    pub r1: Complex64,
    pub r2: Complex64,
    pub r3: Complex64,
    /// `r_j / L_j`.
    pub rho: Complex64,
    /// `|λ_{n-j}| / L_j`.
    pub mu: f64,
    /// `μ_j - 1 = R_j / L_j`.
    pub nu: f64,
    /// `δ_j` for `1 ≤ j ≤ [√n]`.
    pub delta: Option<f64>,
    /// `cos(jπ/(2n))`.
    pub c: f64,
}

/// All per-`j` records at one grid, plus the sign `s = sign sin(ny - βπ/2)`.
#[derive(Debug, Clone)]
pub struct LambdaRecords {
    pub n: u64,
    pub s: f64,
    pub sqrt_n: u64,
    /// Records `j = 0..=j_max`.
    pub records: Vec<LambdaRecord>,
    /// Last `j` used in the correction polynomials.
    pub j_trunc: u64,
    /// Bound on the dropped part of the derivative sums (assuming `μ_j ≥ 1/2`).
    pub tail_bound: f64,
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

impl LambdaRecords {
    pub fn build(grid: &NodeGrid, params: &KernelParams, cfg: &SeriesConfig) -> Result<Self> {
        let n = grid.n;
        let h = params.h();
        let q = params.q();
        let s = grid.anchor.sign();
        if s == 0.0 {
            return Err(Error::Domain("sign sin(ny - βπ/2) vanishes".into()));
        }
        let (_, cos_a) = grid.anchor.sin_cos();
        let r3 = Complex64::new(grid.anchor.abs_sin_minus_one() * s, 0.0);
        let sqrt_n = isqrt(n);
        let j_trunc = (cfg.terms_for(h, cfg.abs_tol() / (4.0 * 2f64.sqrt()))?).min(n - 1);
        let j_max = if n <= FULL_RECORDS_MAX { n - 1 } else { j_trunc };
        let ln_scale = ln_psi(n as f64, h) - (n as f64).ln();
        let mut records = Vec::with_capacity(j_max as usize + 1);
        for j in 0..=j_max {
            let w = weights(j, n, h);
            let r1 = r1_scaled(j, grid, params, w.kappa);
            // i (q^j B - q^{-j} A)/(q^j B + q^{-j} A) cos a
            let bq = (1.0 + w.b) * w.qq;
            let r2 = Complex64::new(0.0, (bq - (1.0 + w.a)) / (bq + (1.0 + w.a)) * cos_a);
            let rho = r1 + r2 + r3;
            let wv = rho * s;
            let one_w = (Complex64::new(1.0, 0.0) + wv).norm();
            let nu = (2.0 * wv.re + wv.norm_sqr()) / (one_w + 1.0);
            let mu = 1.0 + nu;
            let c = if j == 0 { 1.0 } else { (j as f64 * PI / (2 * n) as f64).cos() };
            let delta = if j >= 1 && j <= sqrt_n {
                let e = 2.0 * (j as f64 * PI / (4 * n) as f64).sin().powi(2);
                let m = nu - e - nu * e;
                Some(m + (1.0 + m) * (w.a + w.b * w.qq) / (1.0 + w.qq))
            } else {
                None
            };
            if mu <= NEAR_ZERO {
                return Err(Error::Conditioning { l: (n - j) as usize, magnitude: mu });
            }
            records.push(LambdaRecord {
                j,
                kappa: w.kappa,
                ln_l: ln_scale - w.kappa.ln(),
                r1,
                r2,
                r3,
                rho,
                mu,
                nu,
                delta,
                c,
            });
        }
        let nf = n as f64;
        let tail_bound = if j_trunc + 1 >= n {
            0.0
        } else {
            8.0 * 2f64.sqrt() * q.powf((j_trunc + 1) as f64) / (1.0 - q) + 16.0 * nf * nf * q.powf(nf / 2.0) / PI
        };
        Ok(Self { n, s, sqrt_n, records, j_trunc, tail_bound })
    }

    fn rec(&self, j: u64) -> &LambdaRecord {
        &self.records[j as usize]
    }

    /// Correction polynomials in `u = t_k - y`.
    pub fn gamma_polys(&self, params: &KernelParams, cfg: &SeriesConfig) -> Result<GammaPolys> {
        let s = self.s;
        let jt = self.j_trunc as usize;
        let mut g1 = TrigPoly::zeros(jt + 1);
        let mut g3 = TrigPoly::zeros(jt + 1);
        let mut g4 = TrigPoly::zeros(jt + 1);
        for j in 0..=jt {
            let r = self.rec(j as u64);
            let w = if j == 0 { 1.0 } else { 2.0 };
            let f = w * r.kappa / (r.mu * r.mu * r.c);
            g1.cos[j] = f * (r.rho.re - r.nu * s);
            g1.sin[j] = -f * r.rho.im;
            if j >= 1 {
                let t = 2.0 * s * r.kappa / (r.mu * r.c);
                if (j as u64) > self.sqrt_n {
                    g3.cos[j] = t;
                } else {
                    g4.cos[j] = -t * r.delta.unwrap_or(0.0);
                }
            }
        }
        let r0 = self.rec(0);
        let g2 = -r0.nu / (2.0 * (1.0 + r0.nu)) * s;
        let kp = cfg.terms(params.h())? as usize;
        let mut pq = TrigPoly::zeros(kp + 1);
        pq.cos[0] = 0.5;
        let mut g5 = TrigPoly::zeros(kp + 1);
        for j in 1..=kp {
            let p = psi_real(j as f64, params.h());
            pq.cos[j] = p;
            if j as u64 > self.sqrt_n {
                g5.cos[j] = -s * p;
            }
        }
        Ok(GammaPolys { s, pq, g1, g2, g3, g4, g5 })
    }

    /// Bracket of the `1/|λ_{n-j}|` form:
    /// `(1/2 + 2Σ κ_j cos(ju)/(μ_j c_j)) s + γ₁ + γ₂`.
    pub fn psi_form_poly(&self, gp: &GammaPolys) -> TrigPoly {
        let mut p = gp.g1.clone();
        p.cos[0] += 0.5 * self.s + gp.g2;
        for j in 1..p.len() {
            let r = self.rec(j as u64);
            p.cos[j] += 2.0 * self.s * r.kappa / (r.mu * r.c);
        }
        p
    }

    /// Bounds on the internal quantities at this grid.
    pub fn internal_bounds(&self, params: &KernelParams) -> InternalBounds {
        let n = self.n;
        let q = params.q();
        let lq = q.ln();
        let nf = n as f64;
        let ln_one_minus = (-(2.0 * nf * lq).exp_m1()).ln();
        let mut ib = InternalBounds {
            j_checked: self.records.len() as u64,
            r_holds: true,
            z_holds: true,
            delta_holds: true,
            lambda_holds: true,
            r_abs_holds: true,
            r0_abs_holds: true,
            worst_delta_ratio: 0.0,
            worst_lambda_margin: f64::INFINITY,
        };
        for r in &self.records {
            let rho = r.rho.norm();
            if r.nu.abs() > rho * (1.0 + 1e-12) + 1e-300 {
                ib.r_holds = false;
            }
            // sup over u of |ẑ_j(u)| = |(Re ρ - νs, Im ρ)|
            let zmax = (r.rho.re - r.nu * self.s).hypot(r.rho.im);
            if zmax > 2.0 * rho * (1.0 + 1e-12) + 1e-300 {
                ib.z_holds = false;
            }
            if let Some(d) = r.delta {
                let bound = 4.0 * r.j as f64 / (3.0 * (nf - r.j as f64));
                ib.worst_delta_ratio = ib.worst_delta_ratio.max(d.abs() / bound);
                if d.abs() > bound {
                    ib.delta_holds = false;
                }
            }
            let nj = (n - r.j) as f64;
            let margin = r.ln_l + r.mu.ln() - ((0.9f64).ln() + nj * lq - nj.ln());
            ib.worst_lambda_margin = ib.worst_lambda_margin.min(margin);
            if margin <= 0.0 {
                ib.lambda_holds = false;
            }
            if rho > 0.0 {
                let ln_r = rho.ln() + r.ln_l;
                if r.j == 0 {
                    if ln_r > (16.0 / (3.0 * nf)).ln() + 3.0 * nf * lq - ln_one_minus {
                        ib.r0_abs_holds = false;
                    }
                } else if ln_r > (38.0f64 / 9.0).ln() + 2.0 * nf * lq - ln_one_minus {
                    ib.r_abs_holds = false;
                }
            }
        }
        ib
    }
}

/// Checks of the internal bounds over `j = 0..j_checked-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalBounds {
    pub j_checked: u64,
    /// `|R_j| ≤ |r_j|`.
    pub r_holds: bool,
    /// `|z_j| ≤ 2|r_j|` at every `t`.
    pub z_holds: bool,
    /// `|δ_j| ≤ 4j/(3(n-j))` for `j ≤ [√n]`.
    pub delta_holds: bool,
    /// `|λ_{n-j}| > (9/10) q^{n-j}/(n-j)`.
    pub lambda_holds: bool,
    /// `|r_j| ≤ (38/9) q^{2n}/(1-q^{2n})` for `j ≥ 1`.
    pub r_abs_holds: bool,
    /// `|r_0| ≤ (16/(3n)) q^{3n}/(1-q^{2n})`.
    pub r0_abs_holds: bool,
    pub worst_delta_ratio: f64,
    /// Smallest `ln|λ_{n-j}| - ln((9/10) q^{n-j}/(n-j))`.
    pub worst_lambda_margin: f64,
}

impl InternalBounds {
    pub fn all(&self) -> bool {
        self.r_holds && self.z_holds && self.delta_holds && self.lambda_holds
    }
}

/// `P_q` and the five corrections as polynomials in `u = t_k - y`; `γ₂` is constant.
#[derive(Debug, Clone)]
pub struct GammaPolys {
    pub s: f64,
    pub pq: TrigPoly,
    pub g1: TrigPoly,
    pub g2: f64,
    pub g3: TrigPoly,
    pub g4: TrigPoly,
    pub g5: TrigPoly,
}

impl GammaPolys {
    fn list(&self) -> [&TrigPoly; 5] {
        [&self.pq, &self.g1, &self.g3, &self.g4, &self.g5]
    }

    /// `(P_q, [γ₁..γ₅])` from evaluated values in the order of [`Self::list`].
    fn unpack(&self, v: &[f64]) -> (f64, [f64; 5]) {
        (v[0], [v[1], self.g2, v[2], v[3], v[4]])
    }

    /// `(P_q(u), [γ₁..γ₅](u))` evaluated term by term.
    pub fn at(&self, u: f64) -> (f64, [f64; 5]) {
        let v: Vec<f64> = self.list().iter().map(|p| p.eval(u)).collect();
        self.unpack(&v)
    }
}

/// Corrections at the maximizer: the worst midpoint for `Σ|γ_l|` and the bound.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaBreakdown {
    /// `γ₁..γ₅` at `worst_k`.
    pub gamma: [f64; 5],
    pub worst_k: u64,
    /// `max_k Σ_l |γ_l(t_k)|`.
    pub sum_abs: f64,
    pub lemma3_bound: f64,
    pub umova_z_ok: bool,
    pub n_ok: bool,
    /// `min_k P_q(t_k - y₀) + s Σ γ_l(t_k)`.
    pub sufficient_min: f64,
    pub internal: InternalBounds,
    pub tail_bound: f64,
}

impl GammaBreakdown {
    pub fn bound_holds(&self) -> bool {
        self.sum_abs <= self.lemma3_bound
    }
}

/// Running state of a midpoint pass over the correction polynomials.
pub(crate) struct GammaTracker {
    pub worst: (u64, f64, [f64; 5]),
    pub sufficient_min: f64,
}

impl GammaTracker {
    pub fn new() -> Self {
        Self { worst: (0, -1.0, [0.0; 5]), sufficient_min: f64::INFINITY }
    }

    pub fn push(&mut self, k: u64, s: f64, pq: f64, g: [f64; 5]) {
        let sum_abs: f64 = g.iter().map(|x| x.abs()).sum();
        if sum_abs > self.worst.1 {
            self.worst = (k, sum_abs, g);
        }
        let suff = pq + s * g.iter().sum::<f64>();
        self.sufficient_min = self.sufficient_min.min(suff);
    }

    pub fn finish(self, recs: &LambdaRecords, params: &KernelParams) -> GammaBreakdown {
        let n = recs.n;
        GammaBreakdown {
            gamma: self.worst.2,
            worst_k: self.worst.0,
            sum_abs: self.worst.1,
            lemma3_bound: lemma3_bound(n, params.q()),
            umova_z_ok: check_umova_z(n, params.q()),
            n_ok: n >= 9,
            sufficient_min: self.sufficient_min,
            internal: recs.internal_bounds(params),
            tail_bound: recs.tail_bound,
        }
    }
}

/// Evaluates `extra` polynomials together with `P_q` and the corrections at
/// every midpoint, feeding the corrections to the tracker and `(k, extra values)` to `sink`.
pub(crate) fn midpoint_pass<F: FnMut(u64, &[f64])>(
    grid: &NodeGrid,
    gp: &GammaPolys,
    extra: &[TrigPoly],
    tracker: &mut GammaTracker,
    mut sink: F,
) {
    let mut polys: Vec<TrigPoly> = extra.to_vec();
    polys.extend(gp.list().iter().map(|p| (*p).clone()));
    let ne = extra.len();
    eval_midpoints(&polys, grid.n, grid.y, |k, v| {
        let (pq, g) = gp.unpack(&v[ne..]);
        tracker.push(k, gp.s, pq, g);
        sink(k, &v[..ne]);
    });
}

/// `γ₁..γ₅` at `y₀`, the worst midpoint, the bound and the internal checks.
pub fn gamma_breakdown(grid: &NodeGrid, params: &KernelParams, cfg: &SeriesConfig) -> Result<GammaBreakdown> {
    let recs = LambdaRecords::build(grid, params, cfg)?;
    let gp = recs.gamma_polys(params, cfg)?;
    let mut tracker = GammaTracker::new();
    midpoint_pass(grid, &gp, &[], &mut tracker, |_, _| {});
    Ok(tracker.finish(&recs, params))
}

/// Bracket polynomial built straight from the aliased eigenvalue sums:
/// `Re Σ_j w_j κ_j e^{iju} / (conj(Λ_j) c_j)`, `Λ_j = e^{ijy}λ_{n-j}/L_j`.
pub fn direct_poly(grid: &NodeGrid, params: &KernelParams, recs: &LambdaRecords) -> Result<TrigPoly> {
    let jt = recs.j_trunc as usize;
    let mut p = TrigPoly::zeros(jt + 1);
    for j in 0..=jt {
        let big = lambda_closed_scaled(j as u64, grid, params)?;
        let r = recs.rec(j as u64);
        let w = if j == 0 { 1.0 } else { 2.0 };
        let cj = Complex64::new(w * r.kappa / r.c, 0.0) / big.conj();
        p.cos[j] = cj.re;
        p.sin[j] = -cj.im;
    }
    Ok(p)
}

/// Bracket values `B_k`, `k = 1..2n`, by the three representations:
/// the eigenvalue sum (from [`lambda_closed`]), the `1/|λ_{n-j}|` form, and
/// the `P_q` form. Meant for moderate `n`; each point is evaluated directly.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeForms {
    pub eigen_sum: Vec<f64>,
    pub psi_form: Vec<f64>,
    pub pq_form: Vec<f64>,
}

impl DerivativeForms {
    pub fn max_pairwise_gap(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.eigen_sum.len() {
            let (a, b, c) = (self.eigen_sum[k], self.psi_form[k], self.pq_form[k]);
            worst = worst.max((a - b).abs()).max((a - c).abs()).max((b - c).abs());
        }
        worst
    }
}

pub fn derivative_forms(grid: &NodeGrid, params: &KernelParams, cfg: &SeriesConfig) -> Result<DerivativeForms> {
    let n = grid.n;
    let recs = LambdaRecords::build(grid, params, cfg)?;
    let gp = recs.gamma_polys(params, cfg)?;
    let psi_poly = recs.psi_form_poly(&gp);
    let lambdas: Vec<Complex64> = (1..=n).map(|l| lambda_closed(l, grid, params, cfg)).collect::<Result<_>>()?;
    let mut out = DerivativeForms { eigen_sum: vec![], psi_form: vec![], pq_form: vec![] };
    for k in 1..=2 * n {
        let t = grid.midpoint(k);
        let u = t - grid.y;
        out.eigen_sum.push(eigen_sum_bracket(k, t, n, params, &lambdas));
        out.psi_form.push(psi_poly.eval(u));
        let (_, g) = gp.at(u);
        let pq = eval_P_q(u, params.q(), cfg)?;
        out.pq_form.push(pq * recs.s + g.iter().sum::<f64>());
    }
    Ok(out)
}

/// Normalized eigenvalue-sum form at midpoint `k`.
fn eigen_sum_bracket(k: u64, t: f64, n: u64, params: &KernelParams, lambdas: &[Complex64]) -> f64 {
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    let mut sum = 0.0;
    for j in 1..n {
        let lam = lambdas[(j - 1) as usize];
        let (sj, cj) = (j as f64 * t).sin_cos();
        sum += (sj * lam.re - cj * lam.im) / (lam.norm_sqr() * (j as f64 * PI / (2 * n) as f64).sin());
    }
    let ln = lambdas[(n - 1) as usize];
    let scale = psi_real(n as f64, params.h()) / n as f64;
    scale * (sign * 2.0 * sum + ln.re / ln.norm_sqr())
}

/// Value of the piecewise-constant `(ψ,β)`-derivative of the fundamental
/// spline at `t`, by the eigenvalue sum over `ρ_j`, `σ_j`.
pub fn eval_derivative_repr(t: f64, grid: &NodeGrid, params: &KernelParams, cfg: &SeriesConfig) -> Result<f64> {
    let n = grid.n;
    let k = grid.interval_of(t)?;
    let lambdas: Vec<Complex64> = (1..=n).map(|l| lambda_closed(l, grid, params, cfg)).collect::<Result<_>>()?;
    for (i, l) in lambdas.iter().enumerate() {
        check_conditioning(i as u64 + 1, n, *l, params)?;
    }
    let bracket = eigen_sum_bracket(k, grid.midpoint(k), n, params, &lambdas);
    Ok(bracket_to_derivative(k, n, params, bracket))
}

/// `derivative(t_k) = (-1)^{k+1} π/(4nψ(n)) · B_k`.
pub fn bracket_to_derivative(k: u64, n: u64, params: &KernelParams, bracket: f64) -> f64 {
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    sign * PI / (4.0 * n as f64 * psi_real(n as f64, params.h())) * bracket
}

fn check_conditioning(l: u64, n: u64, lam: Complex64, params: &KernelParams) -> Result<()> {
    let lp = l.min(2 * n - l).max(1);
    let scale = if lp == n {
        2.0 * psi_real(n as f64, params.h()) / n as f64
    } else {
        psi_real(lp as f64, params.h()) / lp as f64
    };
    let rel = lam.norm() / scale;
    if !(rel > NEAR_ZERO) {
        return Err(Error::Conditioning { l: l as usize, magnitude: rel });
    }
    Ok(())
}

/// Eigenvalues and coefficients of the fundamental spline.
#[derive(Debug, Clone)]
pub struct SplineSystem {
    pub grid: NodeGrid,
    /// `λ_l(y)`, `l = 1..2n`.
    pub lambda: Vec<Complex64>,
    /// `α_0..α_{2n}`.
    pub alpha: Vec<f64>,
}

pub fn build_fundamental_spline(grid: &NodeGrid, params: &KernelParams, cfg: &SeriesConfig) -> Result<SplineSystem> {
    let n = grid.n;
    let two_n = (2 * n) as usize;
    let mut lambda = vec![Complex64::new(0.0, 0.0); two_n];
    for l in 1..=n {
        let lam = lambda_closed(l, grid, params, cfg)?;
        check_conditioning(l, n, lam, params)?;
        lambda[(l - 1) as usize] = lam;
        if l < n {
            lambda[(2 * n - l - 1) as usize] = lam.conj();
        }
    }
    lambda[two_n - 1] = lambda_closed(2 * n, grid, params, cfg)?;

    // α_k = (1/(2n²)) Σ_{l=1}^{2n-1} e^{ilkπ/n} / λ_l
    let mut buf: Vec<Complex64> = (0..two_n)
        .map(|l| if l == 0 { Complex64::new(0.0, 0.0) } else { Complex64::new(1.0, 0.0) / lambda[l - 1] })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(two_n).process(&mut buf);
    let nf = n as f64;
    let mut alpha = vec![0.0; two_n + 1];
    alpha[0] = 1.0 / (2.0 * nf);
    for k in 1..=two_n {
        alpha[k] = buf[k % two_n].re / (2.0 * nf * nf);
    }
    // the zero frequency carries no weight
    let mean = alpha[1..].iter().sum::<f64>() / two_n as f64;
    for a in &mut alpha[1..] {
        *a -= mean;
    }
    Ok(SplineSystem { grid: *grid, lambda, alpha })
}

impl SplineSystem {
    /// `α₀ + Σ α_k Ψ_{β,1}(t - x_k)`.
    pub fn eval(&self, t: f64, params: &KernelParams, cfg: &SeriesConfig) -> Result<f64> {
        let mut sum = self.alpha[0];
        for k in 1..self.alpha.len() {
            sum += self.alpha[k] * eval_Psi_beta1(t - self.grid.node(k as u64), params, cfg)?;
        }
        Ok(sum)
    }

    pub fn alpha_sum(&self) -> f64 {
        self.alpha[1..].iter().sum()
    }

    /// `Σ |α_k|`, the scale for [`Self::alpha_sum`].
    pub fn alpha_l1(&self) -> f64 {
        self.alpha[1..].iter().map(|a| a.abs()).sum()
    }

    /// `Σ α_k B₁(t - x_k)` on the interval `((k-1)π/n, kπ/n)`:
    /// `(1/2) Σ α_j x_j - π Σ_{j≥k} α_j`.
    pub fn derivative_on(&self, k: u64) -> f64 {
        let first: f64 = (1..self.alpha.len()).map(|j| self.alpha[j] * self.grid.node(j as u64)).sum();
        let tail: f64 = self.alpha[k as usize..].iter().sum();
        0.5 * first - PI * tail
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        Ok(self.derivative_on(self.grid.interval_of(t)?))
    }

    /// Values of the derivative on each of the `2n` intervals.
    pub fn derivative_pieces(&self) -> Vec<f64> {
        let two_n = self.alpha.len() - 1;
        let first: f64 = (1..=two_n).map(|j| self.alpha[j] * self.grid.node(j as u64)).sum();
        let mut out = vec![0.0; two_n];
        let mut tail = 0.0;
        for k in (1..=two_n).rev() {
            tail += self.alpha[k];
            out[k - 1] = 0.5 * first - PI * tail;
        }
        out
    }
}

/// Grid at the maximizer of `|Φ|` for `(n, h, β)`.
pub fn maximizer_grid(n: u64, params: &KernelParams) -> Result<NodeGrid> {
    Ok(NodeGrid::at_maximizer(&solve_theta(n, params)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_matches_direct_small() {
        let p = KernelParams::new(1.0, 0.3).unwrap();
        let cfg = SeriesConfig::default();
        let g = NodeGrid::new(4, 0.1, &p).unwrap();
        for l in 1..=4 {
            let a = lambda_direct(l, &g, &p, &cfg).unwrap();
            let b = lambda_closed(l, &g, &p, &cfg).unwrap();
            assert!((a - b).norm() <= 1e-10 * b.norm(), "l={l} {a} {b}");
        }
    }

    #[test]
    fn scaled_matches_unscaled() {
        let p = KernelParams::new(0.8, 0.4).unwrap();
        let cfg = SeriesConfig::default();
        let g = maximizer_grid(6, &p).unwrap();
        for j in 0..6u64 {
            let big = lambda_closed_scaled(j, &g, &p).unwrap();
            let lam = lambda_closed(6 - j, &g, &p, &cfg).unwrap();
            let l_j = psi_real((6 - j) as f64, 0.8) / (6 - j) as f64 + psi_real((6 + j) as f64, 0.8) / (6 + j) as f64;
            let back = big * Complex64::from_polar(l_j, -(j as f64) * g.y());
            assert!((back - lam).norm() < 1e-12 * lam.norm(), "j={j}");
        }
    }

    #[test]
    fn forms_agree_with_alpha_route() {
        let p = KernelParams::new(1.0, 0.5).unwrap();
        let cfg = SeriesConfig::default();
        for n in [3u64, 9, 20] {
            let g = maximizer_grid(n, &p).unwrap();
            let f = derivative_forms(&g, &p, &cfg).unwrap();
            let sys = build_fundamental_spline(&g, &p, &cfg).unwrap();
            let pieces = sys.derivative_pieces();
            let mut worst_alpha = 0.0f64;
            for k in 1..=2 * n {
                let b = bracket_to_derivative(k, n, &p, f.eigen_sum[(k - 1) as usize]);
                let scale = PI / (4.0 * n as f64 * psi_real(n as f64, 1.0));
                worst_alpha = worst_alpha.max((b - pieces[(k - 1) as usize]).abs() / scale);
            }
            assert!(f.max_pairwise_gap() < 1e-10, "n={n}");
            assert!(worst_alpha < 1e-10, "n={n}");
        }
    }
}
