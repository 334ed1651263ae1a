//! Brute-force reference computations: grid maximization, the Remez
//! exchange for trigonometric polynomials, and adaptive quadrature of
//! convolutions with piecewise-constant functions.
//!
//! Nothing here shares code with the series machinery it is used to check,
//! apart from the kernel evaluations passed in as closures.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::roots::golden_max;

pub const SCAN_POINTS: usize = 4096;
pub const REMEZ_MAX_EXCHANGES: usize = 100;
pub const REMEZ_LEVEL_TOL: f64 = 1e-10;
pub const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSearchResult {
    pub argmax: f64,
    pub max_value: f64,
    pub refinement_width: f64,
}

/// Maximum of `|f|` over one period: a 4096-point scan, then golden-section
/// search on the bracket around the best sample.
pub fn sup_norm<F: FnMut(f64) -> f64>(mut f: F, period: f64) -> GridSearchResult {
    let step = period / SCAN_POINTS as f64;
    let (mut best_i, mut best) = (0usize, f64::NEG_INFINITY);
    for i in 0..SCAN_POINTS {
        let v = f(i as f64 * step).abs();
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let centre = best_i as f64 * step;
    let (x, fx, w) = golden_max(|t| f(t).abs(), centre - step, centre + step, 1e-14);
    if fx >= best {
        GridSearchResult { argmax: x, max_value: fx, refinement_width: w }
    } else {
        GridSearchResult { argmax: centre, max_value: best, refinement_width: w }
    }
}

/// Error of best uniform approximation of a `2π`-periodic `f` by
/// trigonometric polynomials of order `order`, by the exchange method on
/// `2·order + 2` alternation points.
pub fn remez_trig<F: FnMut(f64) -> f64>(mut f: F, order: usize) -> Result<f64> {
    let m = 2 * order + 2;
    let grid_n = SCAN_POINTS.max(64 * m);
    let step = 2.0 * PI / grid_n as f64;
    let samples: Vec<f64> = (0..grid_n).map(|i| f(i as f64 * step)).collect();
    let fmax = samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if fmax == 0.0 {
        return Ok(0.0);
    }

    // start from the residual of the discrete Fourier truncation
    let mut fit = vec![0.0; 2 * order + 1];
    fit[0] = samples.iter().sum::<f64>() / grid_n as f64;
    for i in 1..=order {
        let (mut a, mut b) = (0.0, 0.0);
        for (k, v) in samples.iter().enumerate() {
            let (sn, cs) = (i as f64 * k as f64 * step).sin_cos();
            a += v * cs;
            b += v * sn;
        }
        fit[2 * i - 1] = 2.0 * a / grid_n as f64;
        fit[2 * i] = 2.0 * b / grid_n as f64;
    }
    let start: Vec<f64> = (0..grid_n).map(|i| samples[i] - trig_eval(&fit, i as f64 * step)).collect();
    let mut points = extrema(&mut f, &start, &fit, step, m)
        .ok_or_else(|| Error::Oracle("fewer alternation points than the order requires".into()))?;
    for _ in 0..REMEZ_MAX_EXCHANGES {
        let (coef, level) = solve_levels(&mut f, &points, order)?;
        let resid: Vec<f64> = (0..grid_n)
            .map(|i| {
                let t = i as f64 * step;
                samples[i] - trig_eval(&coef, t)
            })
            .collect();
        let next = extrema(&mut f, &resid, &coef, step, m)
            .ok_or_else(|| Error::Oracle("residual lost its alternation".into()))?;
        let rmax = next.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        let rmin = next.iter().map(|p| p.1.abs()).fold(f64::INFINITY, f64::min);
        if rmax - rmin <= REMEZ_LEVEL_TOL * rmax.max(level.abs()) {
            return Ok(rmax);
        }
        points = next;
    }
    Err(Error::Oracle(format!("exchange did not settle after {REMEZ_MAX_EXCHANGES} rounds")))
}

/// `c₀ + Σ c_{2i-1} cos(it) + c_{2i} sin(it)`.
fn trig_eval(c: &[f64], t: f64) -> f64 {
    let mut s = c[0];
    for i in 1..=c.len() / 2 {
        let (sn, cs) = (i as f64 * t).sin_cos();
        s += c[2 * i - 1] * cs + c[2 * i] * sn;
    }
    s
}

fn solve_levels<F: FnMut(f64) -> f64>(f: &mut F, points: &[(f64, f64)], order: usize) -> Result<(Vec<f64>, f64)> {
    let m = points.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DVector::<f64>::zeros(m);
    for (r, &(t, _)) in points.iter().enumerate() {
        a[(r, 0)] = 1.0;
        for i in 1..=order {
            let (sn, cs) = (i as f64 * t).sin_cos();
            a[(r, 2 * i - 1)] = cs;
            a[(r, 2 * i)] = sn;
        }
        a[(r, m - 1)] = if r % 2 == 0 { 1.0 } else { -1.0 };
        b[r] = f(t);
    }
    let x = a.lu().solve(&b).ok_or_else(|| Error::Oracle("singular exchange system".into()))?;
    let coef = x.as_slice()[..m - 1].to_vec();
    Ok((coef, x[m - 1]))
}

/// `m` cyclically alternating extrema of `f - p`, refined by golden section.
/// Runs of equal sign keep their largest member; surplus points are removed
/// smallest first, merging the neighbours they separated.
fn extrema<F: FnMut(f64) -> f64>(
    f: &mut F,
    resid: &[f64],
    coef: &[f64],
    step: f64,
    m: usize,
) -> Option<Vec<(f64, f64)>> {
    let n = resid.len();
    let mut cand: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let prev = resid[(i + n - 1) % n];
        let next = resid[(i + 1) % n];
        let v = resid[i];
        if v != 0.0 && v.abs() >= prev.abs() && v.abs() > next.abs() {
            let s = v.signum();
            let centre = i as f64 * step;
            let (x, fx, _) = golden_max(|t| s * (f(t) - trig_eval(coef, t)), centre - step, centre + step, 1e-12);
            cand.push(if fx >= v.abs() { (x, s * fx) } else { (centre, v) });
        }
    }
    let mut pts = merge_runs(cand);
    while pts.len() > m {
        let (i, _) = pts.iter().enumerate().min_by(|a, b| a.1 .1.abs().total_cmp(&b.1 .1.abs()))?;
        pts.remove(i);
        pts = merge_runs(pts);
        // a lone surplus pair of opposite signs
        if pts.len() == m + 1 {
            let (i, _) = pts.iter().enumerate().min_by(|a, b| a.1 .1.abs().total_cmp(&b.1 .1.abs()))?;
            pts.remove(i);
            pts = merge_runs(pts);
        }
    }
    if pts.len() != m {
        return None;
    }
    Some(pts)
}

fn merge_runs(pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        match out.last_mut() {
            Some(last) if last.1.signum() == p.1.signum() => {
                if p.1.abs() > last.1.abs() {
                    *last = p;
                }
            }
            _ => out.push(p),
        }
    }
    // close the cycle
    while out.len() > 1 && out[0].1.signum() == out[out.len() - 1].1.signum() {
        let last = out.pop().unwrap();
        if last.1.abs() > out[0].1.abs() {
            out[0] = last;
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// A step function on `[start, start + 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    /// `breaks[i]..breaks[i+1]` carries `values[i]`.
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidParameter("need one more break than values".into()));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("breaks must increase".into()));
        }
        Ok(Self { breaks, values })
    }

    /// `sign sin(nt)` on `[-π, π)`.
    pub fn sign_sin(n: u64) -> Self {
        let m = 2 * n as usize;
        let breaks: Vec<f64> = (0..=m).map(|i| -PI + i as f64 * PI / n as f64).collect();
        let values = (0..m).map(|i| (n as f64 * 0.5 * (breaks[i] + breaks[i + 1])).sin().signum()).collect();
        Self { breaks, values }
    }

    pub fn zero() -> Self {
        Self { breaks: vec![-PI, PI], values: vec![0.0] }
    }
}

/// `(1/π) ∫ kernel(x - t) φ(t) dt` over one period, piece by piece, each
/// piece split at `x` (mod 2π) and integrated by adaptive Gauss-Legendre.
pub fn quadrature_convolution<K>(kernel: K, phi: &PiecewiseConstant, x: f64) -> Result<f64>
where
    K: Fn(f64) -> Result<f64>,
{
    let rule = GaussLegendre::new(16);
    let span = phi.breaks[phi.breaks.len() - 1] - phi.breaks[0];
    let mut total = 0.0;
    for (i, &v) in phi.values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let (a, b) = (phi.breaks[i], phi.breaks[i + 1]);
        let tol = QUAD_TOL * (b - a) / span;
        let mut cuts = vec![a];
        // x + 2πm inside (a, b)
        let shift = ((a - x) / (2.0 * PI)).ceil();
        let mut c = x + shift * 2.0 * PI;
        while c < b {
            if c > a {
                cuts.push(c);
            }
            c += 2.0 * PI;
        }
        cuts.push(b);
        for w in cuts.windows(2) {
            let g = |t: f64| kernel(x - t);
            total += v * rule.adaptive(&g, w[0], w[1], tol / (cuts.len() - 1) as f64, 0)?;
        }
    }
    Ok(total / PI)
}

struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton on `P_m` from the Chebyshev-like first guesses.
    fn new(m: usize) -> Self {
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    fn apply<G: Fn(f64) -> Result<f64>>(&self, g: &G, a: f64, b: f64) -> Result<f64> {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * g(c + r * x)?;
        }
        Ok(r * s)
    }

    fn adaptive<G: Fn(f64) -> Result<f64>>(&self, g: &G, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
        let whole = self.apply(g, a, b)?;
        let mid = 0.5 * (a + b);
        let left = self.apply(g, a, mid)?;
        let right = self.apply(g, mid, b)?;
        if (left + right - whole).abs() <= tol.max(1e-17) {
            return Ok(left + right);
        }
        if depth >= 40 {
            return Err(Error::Oracle(format!("quadrature tolerance {tol:e} unreachable on [{a}, {b}]")));
        }
        Ok(self.adaptive(g, a, mid, 0.5 * tol, depth + 1)? + self.adaptive(g, mid, b, 0.5 * tol, depth + 1)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sup_of_abs_sin() {
        let r = sup_norm(|t| t.sin().abs(), PI);
        assert!((r.max_value - 1.0).abs() < 1e-15);
        assert!((r.argmax - PI / 2.0).abs() < 1e-7);
        let c = sup_norm(|_| 2.5, 1.0);
        assert_eq!(c.max_value, 2.5);
    }

    #[test]
    fn remez_classical() {
        for n in 1..6usize {
            let e = remez_trig(|t| (n as f64 * t).cos(), n - 1).unwrap();
            assert!((e - 1.0).abs() < 1e-12, "n={n} e={e}");
        }
        assert_eq!(remez_trig(|_| 0.0, 3).unwrap(), 0.0);
        // |sin t| by a constant: error 1/2
        let e = remez_trig(|t| t.sin().abs(), 0).unwrap();
        assert!((e - 0.5).abs() < 1e-10);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let r = GaussLegendre::new(16);
        let v = r.apply(&|x: f64| Ok(x.powi(30) + 1.0), -1.0, 1.0).unwrap();
        assert!((v - (2.0 / 31.0 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn quadrature_of_cosine() {
        // (1/π) ∫ cos(x - t) sign sin t dt = (4/π) sin x
        let phi = PiecewiseConstant::sign_sin(1);
        let v = quadrature_convolution(|s| Ok(s.cos()), &phi, 0.7).unwrap();
        assert!((v - 4.0 / PI * 0.7f64.sin()).abs() < 1e-10);
        assert_eq!(quadrature_convolution(|s| Ok(s.cos()), &PiecewiseConstant::zero(), 0.7).unwrap(), 0.0);
    }
}
