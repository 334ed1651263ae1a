//! End-to-end consistency checks between the main computations and the
//! brute-force references, each with its tolerance and time budget.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::extremal::{best_approx_value, eval_Phi, solve_theta, two_sided_check, GAMMA_BOUND};
use crate::kushpel::{default_q_grid, implication_chain, verify_C};
use crate::oracle::{remez_trig, sup_norm};
use crate::series_core::{eval_P_q, KernelParams, SeriesConfig};
use crate::sk_spline::{derivative_forms, gamma_breakdown, lambda_closed, lambda_direct, maximizer_grid, NodeGrid};
use crate::thresholds::{check_classical_range, n_h, n_star, pq_lower_bound};

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const SUP_NORM_TOL: f64 = 1e-10;
pub const REMEZ_TOL: f64 = 1e-8;
pub const FLIP_STEP: f64 = 1e-5;
pub const FLIP_INTEGER: f64 = 1.644651;
pub const FLIP_NONINTEGER: f64 = 1.67423;
pub const LAMBDA_TOL: f64 = 1e-10;
pub const LAMBDA_SAMPLES: usize = 200;
pub const FORMS_TOL: f64 = 1e-9;
pub const CERT_H: [f64; 4] = [0.3, 0.5, 1.0, 2.0];
pub const CERT_BETA: [f64; 5] = [0.0, 0.25, 0.5, 1.0, 1.3];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget: f64,
}

impl Check {
    pub fn line(&self) -> String {
        format!(
            "{} {} ({:.2}s of {:.0}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.budget,
            self.detail
        )
    }
}

fn timed<F: FnOnce() -> Result<(bool, String)>>(name: &'static str, budget: f64, f: F) -> Check {
    let start = Instant::now();
    let out = f();
    let seconds = start.elapsed().as_secs_f64();
    let (ok, detail) = match out {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let detail = if ok && seconds >= budget { format!("{detail}; over time budget") } else { detail };
    Check { name, passed: ok && seconds < budget, detail, seconds, budget }
}

fn p(h: f64, beta: f64) -> Result<KernelParams> {
    KernelParams::new(h, beta)
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

pub fn symmetry_roots() -> Check {
    timed("symmetry roots", 1.0, || {
        let mut worst = 0.0f64;
        for &h in &[0.5, 1.0, 2.0] {
            for &n in &[3u64, 5, 10] {
                for (&beta, &want) in [0.0, 2.0, -2.0, 1.0, -1.0, 3.0].iter().zip(&[0.5, 0.5, 0.5, 0.0, 0.0, 0.0]) {
                    let t = solve_theta(n, &p(h, beta)?)?.theta;
                    worst = worst.max(circular_gap(t, want));
                }
            }
        }
        Ok((worst <= SYMMETRY_TOL, format!("max deviation {worst:e}")))
    })
}

pub fn sup_norm_identity(cfg: &SeriesConfig) -> Check {
    timed("sup-norm identity", 30.0, || {
        let mut worst = 0.0f64;
        for &h in &[0.5, 1.0, 2.0] {
            let lo = n_star(h)?.max(3);
            for &beta in &[0.0, 0.5, 1.0, 1.3] {
                let params = p(h, beta)?;
                for n in lo..=12 {
                    let v = best_approx_value(n, &params)?.value;
                    let g = sup_norm(|t| eval_Phi(t, n, &params, cfg).unwrap_or(f64::NAN), PI / n as f64);
                    worst = worst.max((v - g.max_value).abs() / g.max_value);
                }
            }
        }
        Ok((worst <= SUP_NORM_TOL, format!("max relative error {worst:e}")))
    })
}

pub fn remez_equivalence(cfg: &SeriesConfig) -> Check {
    timed("best trigonometric approximation", 60.0, || {
        let mut worst = 0.0f64;
        for &beta in &[0.0, 0.5, 1.0] {
            let params = p(1.0, beta)?;
            for &n in &[3u64, 4, 6] {
                let phi = |t: f64| eval_Phi(t, n, &params, cfg).unwrap_or(f64::NAN);
                let e = remez_trig(phi, (n - 1) as usize)?;
                let norm = sup_norm(phi, PI / n as f64).max_value;
                worst = worst.max((e - norm).abs() / norm);
            }
        }
        Ok((worst <= REMEZ_TOL, format!("max relative gap {worst:e}")))
    })
}

/// Plain scan for the first `n ≥ 1` with
/// `(1-q)² ≥ (5+3q²)/(1-q²) A^{2n}/√(1-A^{2n}) + (2+q^{2n})q^{2n}`, `A = (1+q²)/2`.
fn scan_n_star(h: f64) -> u64 {
    let q = (-h).exp();
    (1u64..)
        .find(|&n| {
            let a = ((1.0 + q * q) / 2.0).powf(2.0 * n as f64);
            let e = q.powf(2.0 * n as f64);
            (1.0 - q).powi(2) >= (5.0 + 3.0 * q * q) / (1.0 - q * q) * a / (1.0 - a).sqrt() + (2.0 + e) * e
        })
        .unwrap()
}

/// Plain scan for the first `n ≥ 9` with the width-threshold inequality in `q`.
fn scan_n_h(h: f64) -> u64 {
    let q = (-h).exp();
    (9u64..)
        .find(|&n| {
            let (nf, sn) = (n as f64, (n as f64).sqrt());
            let lhs = 37.0 / (5.0 * (1.0 - q)) * q.powf(sn)
                + q / (1.0 - q).powi(2) * (160.0 / (27.0 * (nf - sn))).min(8.0 / (3.0 * nf - 7.0 * sn));
            let rhs = (0.5 + 2.0 * q / ((1.0 + q * q) * (1.0 - q))) * ((1.0 - q) / (1.0 + q)).powf(4.0 / (1.0 - q * q));
            lhs <= rhs
        })
        .unwrap()
}

/// First `h` on the grid `lo + i·FLIP_STEP` where the classical-range flag is set.
pub fn classical_flip(beta: f64, lo: f64, hi: f64) -> Option<f64> {
    let steps = ((hi - lo) / FLIP_STEP).round() as u64;
    (0..=steps).map(|i| lo + i as f64 * FLIP_STEP).find(|&h| check_classical_range(h, beta))
}

pub fn threshold_values() -> Check {
    timed("threshold values", 5.0, || {
        let (ns, nh) = (n_star(1.0)?, n_h(1.0)?);
        let (os, oh) = (scan_n_star(1.0), scan_n_h(1.0));
        let ints = ns == 3 && nh == 81 && ns == os && nh == oh;
        let direct = [(10.0f64 / 3.0).ln(), 1.3, 2.0, 5.0].iter().all(|&h| n_star(h).map(|v| v == 1).unwrap_or(false));
        let f_int = classical_flip(0.0, 1.6, 1.7);
        let f_non = classical_flip(0.5, 1.6, 1.7);
        let near = |f: Option<f64>, want: f64| f.map(|f| (f - want).abs() <= FLIP_STEP).unwrap_or(false);
        let (ok_int, ok_non) = (near(f_int, FLIP_INTEGER), near(f_non, FLIP_NONINTEGER));
        Ok((
            ints && direct && ok_int && ok_non,
            format!(
                "n_star(1)={ns} (scan {os}), n_h(1)={nh} (scan {oh}), n_star=1 above ln(10/3): {direct}, \
                 integer flip {:.5} ({}), non-integer flip {:.5} vs {FLIP_NONINTEGER} ({})",
                f_int.unwrap_or(f64::NAN),
                if ok_int { "ok" } else { "off" },
                f_non.unwrap_or(f64::NAN),
                if ok_non { "ok" } else { "off" },
            ),
        ))
    })
}

pub fn eigenvalue_equivalence(cfg: &SeriesConfig) -> Check {
    timed("eigenvalue equivalence", 30.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut worst = 0.0f64;
        for _ in 0..LAMBDA_SAMPLES {
            let n = rng.random_range(1..=8u64);
            let params = p(rng.random_range(0.5..=2.0), rng.random_range(0.0..2.0))?;
            let y = rng.random_range(0.0..PI / n as f64);
            let l = rng.random_range(1..=n);
            let grid = NodeGrid::new(n, y, &params)?;
            let a = lambda_direct(l, &grid, &params, cfg)?;
            let b = lambda_closed(l, &grid, &params, cfg)?;
            worst = worst.max((a - b).norm() / b.norm());
        }
        Ok((worst <= LAMBDA_TOL, format!("max relative gap {worst:e} over {LAMBDA_SAMPLES} samples")))
    })
}

pub fn representation_equivalence(cfg: &SeriesConfig) -> Check {
    timed("derivative representations", 60.0, || {
        let mut worst = 0.0f64;
        for &beta in &[0.0, 0.5, 1.0] {
            let params = p(1.0, beta)?;
            for &n in &[6u64, 81] {
                let grid = maximizer_grid(n, &params)?;
                worst = worst.max(derivative_forms(&grid, &params, cfg)?.max_pairwise_gap());
            }
        }
        Ok((worst <= FORMS_TOL, format!("max pairwise gap {worst:e} (bracket scale)")))
    })
}

/// Sample of `n ≥ max(9, n_h)` used for the correction bound.
pub fn correction_sample(h: f64) -> Result<Vec<u64>> {
    let base = n_h(h)?.max(9);
    Ok(vec![base, base + 1, base + 7, 2 * base, 5 * base])
}

pub fn correction_bound(cfg: &SeriesConfig) -> Check {
    timed("correction bound", 120.0, || {
        let mut failures = Vec::new();
        let mut worst_ratio = 0.0f64;
        for &h in &[0.5, 1.0, 2.0] {
            for n in correction_sample(h)? {
                for &beta in &[0.0, 0.5, 1.0] {
                    let params = p(h, beta)?;
                    let g = gamma_breakdown(&maximizer_grid(n, &params)?, &params, cfg)?;
                    worst_ratio = worst_ratio.max(g.sum_abs / g.lemma3_bound);
                    if !g.bound_holds() || !g.internal.all() {
                        failures.push(format!("(h={h}, beta={beta}, n={n})"));
                    }
                }
            }
        }
        Ok((
            failures.is_empty(),
            format!("max sum/bound {worst_ratio:.4}; failing {}", if failures.is_empty() { "none".into() } else { failures.join(" ") }),
        ))
    })
}

/// `(h, β, n)` points of the certification check.
pub fn certification_points() -> Result<Vec<(f64, f64, u64)>> {
    let mut pts = Vec::new();
    for &h in &CERT_H {
        let n = n_h(h)?;
        for &beta in &CERT_BETA {
            pts.push((h, beta, n));
        }
    }
    pts.push((2.0, 0.0, 3));
    Ok(pts)
}

/// The certification check and the points it certified.
pub fn certification(cfg: &SeriesConfig) -> (Check, Vec<(f64, f64, u64)>) {
    let mut certified = Vec::new();
    let check = timed("sign condition certification", 120.0, || {
        let mut failures = Vec::new();
        let mut min_margin = f64::INFINITY;
        for (h, beta, n) in certification_points()? {
            let r = verify_C(n, &p(h, beta)?, cfg)?;
            min_margin = min_margin.min(r.margin);
            if r.satisfied && r.margin > 0.0 {
                certified.push((h, beta, n));
            } else {
                failures.push(format!("(h={h}, beta={beta}, n={n})"));
            }
        }
        Ok((
            failures.is_empty(),
            format!("min margin {min_margin:e}; failing {}", if failures.is_empty() { "none".into() } else { failures.join(" ") }),
        ))
    });
    (check, certified)
}

pub fn asymptotic_constant(points: &[(f64, f64, u64)]) -> Check {
    timed("asymptotic constant and two-sided bounds", 10.0, || {
        let mut worst = 0.0f64;
        let mut sided = true;
        for &(h, beta, n) in points {
            let params = p(h, beta)?;
            worst = worst.max(best_approx_value(n, &params)?.gamma_n.abs());
            sided &= two_sided_check(n, &params)?;
        }
        Ok((
            !points.is_empty() && worst <= GAMMA_BOUND && sided,
            format!("max |gamma_n| {worst:.6} vs {GAMMA_BOUND:.6}, two-sided bounds {sided}, {} points", points.len()),
        ))
    })
}

pub fn chain() -> Check {
    timed("implication chain", 10.0, || {
        let ns: Vec<u64> = (9..=200).collect();
        let ok = implication_chain(&default_q_grid(), &ns);
        Ok((ok, "q in 0.31..0.99, n in 9..200".into()))
    })
}

pub fn pq_lower(cfg: &SeriesConfig) -> Check {
    timed("P_q lower bound", 5.0, || {
        let mut worst = f64::INFINITY;
        for i in 1..=19 {
            let q = i as f64 * 0.05;
            let bound = pq_lower_bound(q);
            for k in 0..256 {
                let x = 2.0 * PI * k as f64 / 256.0;
                worst = worst.min(eval_P_q(x, q, cfg)? / bound);
            }
        }
        Ok((worst > 1.0, format!("min P_q/bound {worst:.6}")))
    })
}

/// Every check in order.
pub fn run_all(cfg: &SeriesConfig) -> Vec<Check> {
    let mut out = vec![
        symmetry_roots(),
        sup_norm_identity(cfg),
        remez_equivalence(cfg),
        threshold_values(),
        eigenvalue_equivalence(cfg),
        representation_equivalence(cfg),
        correction_bound(cfg),
    ];
    let (c8, certified) = certification(cfg);
    out.push(c8);
    out.push(asymptotic_constant(&certified));
    out.push(chain());
    out.push(pq_lower(cfg));
    out
}
