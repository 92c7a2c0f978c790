//! Bracketing and Brent's method.

use crate::error::{Error, Result};

/// Expand a bracket around `x0` until `f` changes sign.
pub fn bracket<F: Fn(f64) -> f64>(f: &F, x0: f64, step0: f64, max_expand: usize) -> Result<(f64, f64)> {
    let f0 = f(x0);
    if f0 == 0.0 {
        return Ok((x0, x0));
    }
    let mut step = step0.abs().max(1e-8);
    for _ in 0..max_expand {
        let lo = x0 - step;
        let hi = x0 + step;
        if f(lo) * f0 < 0.0 {
            return Ok((lo, x0));
        }
        if f(hi) * f0 < 0.0 {
            return Ok((x0, hi));
        }
        step *= 2.0;
    }
    Err(Error::ConvergenceFailure(format!(
        "no sign change found around {x0}"
    )))
}

/// Brent's method on a sign-changing bracket [a, b].
pub fn brent<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::ConvergenceFailure(format!(
            "bracket [{a}, {b}] does not change sign"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() < tol || fa.abs() <= fb.abs() {
            d = m;
            e = m;
        } else {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q0 * (q0 - r) - (b - a) * (r - 1.0)),
                    (q0 - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * m * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Err(Error::ConvergenceFailure("brent: max iterations".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let f = |x: f64| x * x * x - 2.0;
        let r = brent(f, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn bracket_then_solve() {
        let f = |x: f64| x.exp() - 5.0;
        let (a, b) = bracket(&f, 0.0, 1.0, 60).unwrap();
        let r = brent(f, a, b, 1e-14, 200).unwrap();
        assert!((r - 5f64.ln()).abs() < 1e-12);
    }
}
