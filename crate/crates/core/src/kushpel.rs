//! Certification of the sign condition `C_{y₀,2n}` and the implication
//! chain between the width threshold and the best-approximation threshold.
//!
//! The condition asks that the `(ψ,β)`-derivative of the fundamental spline
//! on the grid through `y₀` takes the signs `(-1)^k ε` at the midpoints `t_k`.
//! With the bracket `B_k = (-1)^{k+1}(4nψ(n)/π)·derivative(t_k)` it reads:
//! every `B_k` has the same sign. `B_k` is evaluated from the aliased
//! eigenvalue sums directly; the correction route `P_q + s Σγ` is reported
//! next to it but does not decide the verdict.

use crate::error::Result;
use crate::extremal::{best_approx_value, solve_theta};
use crate::series_core::KernelParams;
use crate::series_core::SeriesConfig;
use crate::sk_spline::{direct_poly, midpoint_pass, GammaBreakdown, GammaTracker, LambdaRecords, NodeGrid};
use crate::thresholds::condition_12_sides;

/// Brackets with `|B_k|` at or below this count as zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Signs in `{-1, 0, +1}` packed two bits apiece.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedSigns {
    len: u64,
    words: Vec<u64>,
}

impl PackedSigns {
    pub fn new(len: u64) -> Self {
        Self { len, words: vec![0; len.div_ceil(32) as usize] }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sets the sign at `i` (0-based).
    pub fn set(&mut self, i: u64, sign: i8) {
        let code = match sign {
            0 => 0u64,
            s if s > 0 => 1,
            _ => 2,
        };
        let (w, b) = ((i / 32) as usize, (i % 32) * 2);
        self.words[w] = (self.words[w] & !(3 << b)) | (code << b);
    }

    pub fn get(&self, i: u64) -> i8 {
        let (w, b) = ((i / 32) as usize, (i % 32) * 2);
        match (self.words[w] >> b) & 3 {
            1 => 1,
            2 => -1,
            _ => 0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = i8> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignPatternReport {
    pub n: u64,
    pub params: KernelParams,
    pub y0: f64,
    /// Sign of the derivative at `t_k`, index `k - 1`.
    pub signs: PackedSigns,
    /// `ε` of the pattern `(-1)^k ε`, when one exists.
    pub epsilon: Option<i8>,
    pub satisfied: bool,
    /// `min_k ε(-1)^k sign-normalized derivative`, i.e. `min_k -ε B_k`.
    pub margin: f64,
    /// `min_k P_q(t_k - y₀) + s Σ γ_l(t_k)`.
    pub sufficient_margin: f64,
    pub zero_count: u64,
    pub gamma: GammaBreakdown,
    /// `‖H∗φ_n‖_C`, recorded when the condition holds.
    pub lower_bound: Option<f64>,
    pub ln_lower_bound: Option<f64>,
    /// Bound on the terms dropped from the truncated sums.
    pub tail_bound: f64,
}

impl SignPatternReport {
    /// `e_k ≠ 0`.
    pub fn e_flag(&self, k: u64) -> bool {
        self.signs.get(k - 1) != 0
    }

    pub fn sufficient_holds(&self) -> bool {
        self.sufficient_margin >= 0.0
    }
}

pub fn verify_C(n: u64, params: &KernelParams, cfg: &SeriesConfig) -> Result<SignPatternReport> {
    let theta = solve_theta(n, params)?;
    let grid = NodeGrid::at_maximizer(&theta);
    let recs = LambdaRecords::build(&grid, params, cfg)?;
    let gp = recs.gamma_polys(params, cfg)?;
    let direct = direct_poly(&grid, params, &recs)?;

    let mut signs = PackedSigns::new(2 * n);
    let mut tracker = GammaTracker::new();
    let (mut pos, mut neg, mut zero) = (0u64, 0u64, 0u64);
    let (mut min_pos, mut min_neg) = (f64::INFINITY, f64::INFINITY);
    midpoint_pass(&grid, &gp, std::slice::from_ref(&direct), &mut tracker, |k, v| {
        let b = v[0];
        let alt: i8 = if k % 2 == 1 { 1 } else { -1 };
        if b.abs() <= ZERO_THRESHOLD || !b.is_finite() {
            zero += 1;
        } else if b > 0.0 {
            pos += 1;
            min_pos = min_pos.min(b);
            signs.set(k - 1, alt);
        } else {
            neg += 1;
            min_neg = min_neg.min(-b);
            signs.set(k - 1, -alt);
        }
    });
    let gamma = tracker.finish(&recs, params);

    // derivative sign (-1)^{k+1} sign B_k = (-1)^k ε, so ε = -sign B
    let (epsilon, margin) = if zero == 0 && neg == 0 {
        (Some(-1), min_pos)
    } else if zero == 0 && pos == 0 {
        (Some(1), min_neg)
    } else {
        let worst = if pos >= neg { -min_neg } else { -min_pos };
        (None, if zero > 0 { 0.0f64.min(worst) } else { worst })
    };
    let satisfied = epsilon.is_some();
    let (lower_bound, ln_lower_bound) = if satisfied {
        let w = best_approx_value(n, params)?;
        (Some(w.value), Some(w.ln_value))
    } else {
        (None, None)
    };
    Ok(SignPatternReport {
        n,
        params: *params,
        y0: grid.y(),
        signs,
        epsilon,
        satisfied,
        margin,
        sufficient_margin: gamma.sufficient_min,
        zero_count: zero,
        tail_bound: recs.tail_bound,
        gamma,
        lower_bound,
        ln_lower_bound,
    })
}

/// The four links of the chain at one `(q, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainPoint {
    pub antecedent: bool,
    pub ner2: bool,
    pub ner1: bool,
    pub n0: bool,
}

impl ChainPoint {
    pub fn holds(&self) -> bool {
        !self.antecedent || (self.ner2 && self.ner1 && self.n0)
    }
}

pub fn chain_point(q: f64, n: u64) -> ChainPoint {
    let nf = n as f64;
    let (lhs, rhs) = condition_12_sides(n, q);
    let q2 = q * q;
    let ner2 = nf > 8.0 * q * (1.0 + q) / (3.0 * (1.0 - q).powi(5));
    let ner1 = nf > 5.0 / (1.0 - q2) * (2.0 / (1.0 - q)).ln();
    let b = ((1.0 + q2) / 2.0).powf(2.0 * nf);
    let q2n = q.powf(2.0 * nf);
    let n0 = (1.0 - q).powi(2) >= (5.0 + 3.0 * q2) / (1.0 - q2) * b / (1.0 - b).sqrt() + (2.0 + q2n) * q2n;
    ChainPoint { antecedent: lhs <= rhs, ner2, ner1, n0 }
}

/// Whether the chain holds at every grid point where its antecedent does.
pub fn implication_chain(q_grid: &[f64], n_grid: &[u64]) -> bool {
    q_grid.iter().all(|&q| n_grid.iter().all(|&n| chain_point(q, n).holds()))
}

/// `{0.31, 0.32, …, 0.99}`.
pub fn default_q_grid() -> Vec<f64> {
    (31..=99).map(|i| i as f64 / 100.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_roundtrip() {
        let mut p = PackedSigns::new(70);
        for i in 0..70 {
            p.set(i, [1, -1, 0][(i % 3) as usize]);
        }
        for i in 0..70 {
            assert_eq!(p.get(i), [1, -1, 0][(i % 3) as usize]);
        }
        p.set(5, 1);
        assert_eq!(p.get(5), 1);
    }

    #[test]
    fn certified_examples() {
        let cfg = SeriesConfig::default();
        let r = verify_C(81, &KernelParams::new(1.0, 0.5).unwrap(), &cfg).unwrap();
        assert!(r.satisfied && r.margin > 0.0);
        let r = verify_C(3, &KernelParams::new(2.0, 0.0).unwrap(), &cfg).unwrap();
        assert!(r.satisfied && r.margin > 0.0);
    }

    #[test]
    fn chain_on_default_grid() {
        let ns: Vec<u64> = (9..=200).collect();
        assert!(implication_chain(&default_q_grid(), &ns));
        let p = chain_point(0.35, 100);
        assert!(p.antecedent && p.ner2 && p.ner1 && p.n0);
    }
}
