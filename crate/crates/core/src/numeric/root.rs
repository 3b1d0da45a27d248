//! Bracketed root finding for continuous monotone functions.

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 500;

/// Final sub-bracket produced by [`bracket_root`].
///
/// `g` changes sign (or vanishes) across `[lo, hi]`, and `root` lies inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub root: f64,
    pub evaluations: usize,
}

/// Illinois false position, falling back to bisection whenever a step fails
/// to halve the bracket. Stops once the bracket is no wider than `tolerance`.
pub fn bracket_root<G>(
    g: G,
    bracket_lo: f64,
    bracket_hi: f64,
    tolerance: f64,
) -> Result<RootBracket>
where
    G: Fn(f64) -> f64,
{
    if !(tolerance > 0.0) {
        return Err(Error::invalid("tolerance", "must be positive"));
    }
    if !(bracket_lo.is_finite() && bracket_hi.is_finite()) || bracket_lo > bracket_hi {
        return Err(Error::invalid(
            "bracket",
            format!("[{bracket_lo}, {bracket_hi}] is not a finite interval"),
        ));
    }
    let (mut a, mut b) = (bracket_lo, bracket_hi);
    let (mut fa, mut fb) = (g(a), g(b));
    let mut evaluations = 2;
    let exact = |x: f64, evaluations| RootBracket {
        lo: x,
        hi: x,
        root: x,
        evaluations,
    };
    if fa == 0.0 {
        return Ok(exact(a, evaluations));
    }
    if fb == 0.0 {
        return Ok(exact(b, evaluations));
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::Bracketing {
            lo: a,
            hi: b,
            g_lo: fa,
            g_hi: fb,
        });
    }

    // Last side replaced: -1 for `a`, +1 for `b`.
    let mut side = 0i8;
    for _ in 0..MAX_ITERATIONS {
        let width = b - a;
        if width <= tolerance {
            break;
        }

        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = g(x);
        evaluations += 1;
        if fx == 0.0 {
            return Ok(exact(x, evaluations));
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }

        if b - a > 0.5 * width {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = g(m);
            evaluations += 1;
            if fm == 0.0 {
                return Ok(exact(m, evaluations));
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
            side = 0;
        }
    }

    if b - a > tolerance && 0.5 * (a + b) > a && 0.5 * (a + b) < b {
        return Err(Error::invalid(
            "tolerance",
            format!("bracket width {} did not reach {tolerance}", b - a),
        ));
    }
    Ok(RootBracket {
        lo: a,
        hi: b,
        root: 0.5 * (a + b),
        evaluations,
    })
}

/// Root of `g` inside `[bracket_lo, bracket_hi]`; see [`bracket_root`].
pub fn find_root<G>(g: G, bracket_lo: f64, bracket_hi: f64, tolerance: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    bracket_root(g, bracket_lo, bracket_hi, tolerance).map(|b| b.root)
}
