//! Bracketed root finding on the score with a golden-section fallback on
//! the criterion itself.

use serde::{Deserialize, Serialize};

use super::likelihood::Criterion;

const MAX_ITER: usize = 500;
/// Scores this small at every probe point mean the data carry no information.
const FLAT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryHit {
    None,
    Lower,
    Upper,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Solution {
    pub delta_hat: f64,
    pub converged: bool,
    pub boundary: BoundaryHit,
    pub iterations: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Brent's method on `[a, b]` with `f(a)` and `f(b)` of opposite sign.
///
/// Stops once the bracket half-width is below `xtol` and `|f| <= ftol`. If
/// the bracket collapses to machine precision first, the best point is
/// returned and the caller checks `|f|`.
pub(crate) fn brent<F: Fn(f64) -> f64>(
    f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
    ftol: f64,
) -> Root {
    let mut c = b;
    let mut fc = fb;
    let mut d = b - a;
    let mut e = d;
    let mut xtol = xtol;
    for iter in 1..=MAX_ITER {
        if (fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let machine = 2.0 * f64::EPSILON * b.abs();
        let mut tol1 = machine + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if fb == 0.0 {
            return Root { x: b, fx: fb, iterations: iter };
        }
        if xm.abs() <= tol1 {
            if fb.abs() <= ftol || xm.abs() <= machine {
                return Root { x: b, fx: fb, iterations: iter };
            }
            // Bracket is narrow but the score is not yet small enough.
            xtol *= 1e-3;
            tol1 = machine + 0.5 * xtol;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
    }
    Root { x: b, fx: fb, iterations: MAX_ITER }
}

/// Golden-section search for the maximiser of `f` on `[lo, hi]`.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, xtol: f64) -> (f64, usize) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while (b - a) > xtol && iterations < MAX_ITER {
        iterations += 1;
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    // Compare the interior candidate against both endpoints.
    let mid = 0.5 * (a + b);
    let candidates = [(lo, f(lo)), (mid, f(mid)), (hi, f(hi))];
    let best = candidates
        .iter()
        .copied()
        .fold((mid, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
    (best.0, iterations)
}

/// Maximises `criterion` over `[lo, hi]`.
pub(crate) fn solve<C: Criterion>(criterion: &C, lo: f64, hi: f64, tol: f64) -> Solution {
    let score = |d: f64| criterion.score(d);
    let f_lo = score(lo);
    let f_hi = score(hi);

    let probes = [0.25, 0.5, 0.75].map(|w| score(lo + w * (hi - lo)));
    if f_lo.abs() <= FLAT_TOL && f_hi.abs() <= FLAT_TOL && probes.iter().all(|s| s.abs() <= FLAT_TOL) {
        let mid = 0.5 * (lo + hi);
        return Solution {
            delta_hat: mid,
            converged: false,
            boundary: BoundaryHit::Flat,
            iterations: 0,
            score: score(mid),
        };
    }

    if f_lo >= 0.0 && f_hi <= 0.0 {
        let root = brent(score, lo, hi, f_lo, f_hi, tol, tol);
        return Solution {
            delta_hat: root.x,
            converged: root.fx.abs() <= tol,
            boundary: BoundaryHit::None,
            iterations: root.iterations,
            score: root.fx,
        };
    }

    let (x, iterations) = golden_max(|d| criterion.value(d), lo, hi, tol);
    let edge = 10.0 * tol;
    let (delta_hat, boundary) = if x - lo <= edge {
        (lo, BoundaryHit::Lower)
    } else if hi - x <= edge {
        (hi, BoundaryHit::Upper)
    } else {
        (x, BoundaryHit::None)
    };
    let s = score(delta_hat);
    Solution {
        delta_hat,
        converged: boundary == BoundaryHit::None && s.abs() <= tol,
        boundary,
        iterations,
        score: s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let f = |x: f64| x * x * x - 2.0;
        let r = brent(f, 0.0, 3.0, f(0.0), f(3.0), 1e-12, 1e-12);
        assert!((r.x - 2f64.cbrt()).abs() < 1e-12);
        assert!(r.fx.abs() <= 1e-12);
    }

    #[test]
    fn brent_meets_score_tolerance_on_steep_function() {
        let f = |x: f64| 1e6 * (0.3 - x);
        let r = brent(f, 0.0, 1.0, f(0.0), f(1.0), 1e-8, 1e-8);
        assert!(r.fx.abs() <= 1e-8, "{}", r.fx);
    }

    #[test]
    fn golden_finds_interior_and_boundary_maxima() {
        let (x, _) = golden_max(|x| -(x - 0.4) * (x - 0.4), -1.0, 2.0, 1e-9);
        assert!((x - 0.4).abs() < 1e-6);
        let (x, _) = golden_max(|x| -x, -0.5, 2.0, 1e-9);
        assert_eq!(x, -0.5);
    }
}
