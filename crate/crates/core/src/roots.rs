//! Scalar root finding and one-dimensional maximization.

use crate::error::{Error, Result};

/// Safeguarded Newton iteration inside a sign-change bracket.
///
/// `f` returns `(value, derivative)`. A Newton step is taken when it lands
/// strictly inside the current bracket and shrinks `|f|`, otherwise the
/// bracket is bisected. Stops when the bracket is narrower than
/// `x_tol (1 + |x|)` or `f` vanishes.
pub fn newton_bisect<F>(mut f: F, lo: f64, hi: f64, x_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (mut fa, _) = f(a);
    let (fb, _) = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootNotBracketed { lo: a, hi: b, scan: vec![(a, fa), (b, fb)] });
    }
    let mut x = 0.5 * (a + b);
    let (mut fx, mut dfx) = f(x);
    for _ in 0..200 {
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        if (b - a).abs() <= x_tol * (1.0 + x.abs()) {
            return Ok(x);
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        let (fn_, dfn) = f(next);
        if next == x {
            return Ok(x);
        }
        // Newton steps that fail to reduce |f| fall back to bisection next round.
        if fn_.abs() > fx.abs() && next == newton {
            let mid = 0.5 * (a + b);
            x = mid;
            let r = f(mid);
            fx = r.0;
            dfx = r.1;
        } else {
            x = next;
            fx = fn_;
            dfx = dfn;
        }
    }
    Err(Error::NoConvergence { iterations: 200 })
}

/// Plain bisection on a sign change, to full binary64 resolution.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let fa0 = f(a);
    let fb0 = f(b);
    if fa0 == 0.0 {
        return Ok(a);
    }
    if fb0 == 0.0 {
        return Ok(b);
    }
    if fa0.signum() == fb0.signum() {
        return Err(Error::RootNotBracketed { lo, hi, scan: vec![(lo, fa0), (hi, fb0)] });
    }
    let sa = fa0.signum();
    for _ in 0..2000 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`,
/// shrinking the bracket below `width`. Returns `(argmax, max, final width)`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, width: f64) -> (f64, f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a) > width && iter < 300 {
        iter += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        // bracket stops shrinking once it reaches a few ulps
        if c >= d {
            break;
        }
    }
    let (x, fx) = if fc >= fd { (c, fc) } else { (d, fd) };
    (x, fx, b - a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_bisect_finds_cos_root() {
        let r = newton_bisect(|x| (x.cos(), -x.sin()), 1.0, 2.0, 1e-15).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn newton_bisect_reports_missing_bracket() {
        let e = newton_bisect(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 1e-12);
        assert!(matches!(e, Err(Error::RootNotBracketed { .. })));
    }

    #[test]
    fn golden_finds_peak() {
        let (x, fx, w) = golden_max(|t| t.sin(), 0.0, 3.0, 1e-14);
        assert!((x - std::f64::consts::FRAC_PI_2).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
        assert!(w < 1e-13);
    }
}
