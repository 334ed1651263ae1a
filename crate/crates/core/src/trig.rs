//! Half-turn trigonometry and evaluation of short trigonometric polynomials
//! on the midpoint grid `u_k = (2k-1)π/(2n) - y`, `k = 1..2n`.

use std::f64::consts::PI;

/// `(sin πx, cos πx)` with exact zeros at integers and half-integers.
pub fn sincospi(x: f64) -> (f64, f64) {
    let r = x - 2.0 * (x * 0.5).round();
    let k = (2.0 * r).round();
    let f = r - 0.5 * k;
    let (s, c) = (PI * f).sin_cos();
    match (k as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

pub fn sinpi(x: f64) -> f64 {
    sincospi(x).0
}

pub fn cospi(x: f64) -> f64 {
    sincospi(x).1
}

/// `Σ_{j=0}^{J} (a_j cos ju + b_j sin ju)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrigPoly {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPoly {
    pub fn zeros(len: usize) -> Self {
        Self { cos: vec![0.0; len], sin: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.cos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cos.is_empty()
    }

    pub fn eval(&self, u: f64) -> f64 {
        let mut sum = 0.0;
        for (j, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            if *a == 0.0 && *b == 0.0 {
                continue;
            }
            let (s, c) = (j as f64 * u).sin_cos();
            sum += a * c + b * s;
        }
        sum
    }

    /// `Σ |a_j| + |b_j|`.
    pub fn l1(&self) -> f64 {
        self.cos.iter().zip(&self.sin).map(|(a, b)| a.abs() + b.abs()).sum()
    }

    fn degree(&self) -> usize {
        (0..self.len()).rev().find(|&j| self.cos[j] != 0.0 || self.sin[j] != 0.0).unwrap_or(0)
    }
}

/// Taylor degree and block phase radius used by [`eval_midpoints`]. The
/// remainder is below `‖p‖₁ · 0.05^9 / 9! ≈ 5.4e-18 ‖p‖₁`.
const TAYLOR_DEG: usize = 8;
const BLOCK_PHASE: f64 = 0.05;
const CHUNK: usize = 64;

/// Evaluates every polynomial at `u_k = (2k-1)π/(2n) - y` for `k = 1..=2n`
/// and hands `(k, values)` to `sink` in increasing `k`.
///
/// Points are grouped in blocks whose Taylor expansion about a central
/// midpoint is cut at degree 8; the phase `j(2k-1)π/(2n)` of each block
/// centre is reduced exactly in integers. When the grid is coarse each block
/// holds a single point and the evaluation is direct.
pub fn eval_midpoints<F: FnMut(u64, &[f64])>(polys: &[TrigPoly], n: u64, y: f64, mut sink: F) {
    let m = polys.len();
    if m == 0 || n == 0 {
        return;
    }
    let total = 2 * n;
    let four_n = 4 * n as u128;
    let step = PI / n as f64;
    let jmax = polys.iter().map(|p| p.degree()).max().unwrap_or(0).max(1);
    let half = (BLOCK_PHASE / (jmax as f64 * step)).floor() as u64;
    let block = 2 * half + 1;
    let len = polys.iter().map(|p| p.len()).max().unwrap_or(0);

    // j y once per j
    let jy: Vec<f64> = (0..len).map(|j| j as f64 * y).collect();
    let mut coef = vec![[0.0f64; TAYLOR_DEG + 1]; m];
    let mut vals = vec![0.0f64; m];
    let mut acc = vec![[0.0f64; CHUNK]; m];
    let mut sbuf = [0.0f64; CHUNK];

    let mut start = 1u64;
    while start <= total {
        let end = (start + block - 1).min(total);
        let kc = start + (end - start) / 2;
        for c in coef.iter_mut() {
            *c = [0.0; TAYLOR_DEG + 1];
        }
        let odd = (2 * kc - 1) as u128;
        for j in 0..len {
            let r = (j as u128 * odd) % four_n;
            let phase = PI * (r as f64) / (2 * n) as f64 - jy[j];
            let (sn, cs) = phase.sin_cos();
            let jf = j as f64;
            for (pi_, p) in polys.iter().enumerate() {
                if j >= p.len() {
                    continue;
                }
                let (a, b) = (p.cos[j], p.sin[j]);
                if a == 0.0 && b == 0.0 {
                    continue;
                }
                let x = a * cs + b * sn;
                let yv = b * cs - a * sn;
                let c = &mut coef[pi_];
                let mut w = 1.0;
                for d in 0..=TAYLOR_DEG {
                    let base = if d % 2 == 0 { x } else { yv };
                    let sign = if d % 4 < 2 { 1.0 } else { -1.0 };
                    c[d] += sign * w * base;
                    w *= jf / (d + 1) as f64;
                }
            }
        }
        let mut k = start;
        while k <= end {
            let cnt = ((end - k + 1) as usize).min(CHUNK);
            for i in 0..cnt {
                sbuf[i] = ((k + i as u64) as i64 - kc as i64) as f64 * step;
            }
            for (pi_, c) in coef.iter().enumerate() {
                let a = &mut acc[pi_];
                for slot in a.iter_mut().take(cnt) {
                    *slot = c[TAYLOR_DEG];
                }
                for d in (0..TAYLOR_DEG).rev() {
                    let cd = c[d];
                    for i in 0..cnt {
                        a[i] = a[i] * sbuf[i] + cd;
                    }
                }
            }
            for i in 0..cnt {
                for pi_ in 0..m {
                    vals[pi_] = acc[pi_][i];
                }
                sink(k + i as u64, &vals);
            }
            k += cnt as u64;
        }
        start = end + 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sincospi_exact_points() {
        assert_eq!(sincospi(0.5), (1.0, 0.0));
        assert_eq!(sincospi(1.0), (0.0, -1.0));
        assert_eq!(sincospi(-0.5), (-1.0, 0.0));
        assert_eq!(cospi(7.5), 0.0);
        assert!((sinpi(0.25) - 0.5f64.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn blocked_matches_direct() {
        let len = 40;
        let mut p = TrigPoly::zeros(len);
        for j in 0..len {
            p.cos[j] = 0.7f64.powi(j as i32) * (j as f64 + 0.3).sin();
            p.sin[j] = 0.6f64.powi(j as i32) * (j as f64 * 1.7).cos();
        }
        for &n in &[3u64, 50, 5000, 200_000] {
            let y = 0.37 * PI / n as f64;
            let mut worst = 0.0f64;
            let mut count = 0;
            eval_midpoints(std::slice::from_ref(&p), n, y, |k, v| {
                count += 1;
                if k % 97 == 1 || n < 100 {
                    let u = (2 * k - 1) as f64 * PI / (2 * n) as f64 - y;
                    worst = worst.max((v[0] - p.eval(u)).abs());
                }
            });
            assert_eq!(count, 2 * n);
            assert!(worst < 1e-13, "n={n} worst={worst}");
        }
    }
}
