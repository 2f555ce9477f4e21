//! Scalar root-finding helpers used throughout the crate.

/// Refine a bracketed root of `f` to absolute tolerance `xtol`.
///
/// Bisection safeguarded by a secant step: the secant candidate is accepted
/// only while it stays inside the current bracket, otherwise the step falls
/// back to the midpoint. Derivative-free, which keeps it robust near
/// tangencies where Newton would stall.
///
/// `f(lo)` and `f(hi)` must have opposite signs (zero counts as either).
pub fn bisect_refine<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!(
        fa * fb < 0.0,
        "bisect_refine requires a sign change: f({a}) = {fa}, f({b}) = {fb}"
    );
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        // Secant candidate, clipped away from the bracket endpoints.
        let mut m = if fb != fa {
            b - fb * (b - a) / (fb - fa)
        } else {
            0.5 * (a + b)
        };
        let margin = 0.01 * (b - a).abs();
        if !(m > a.min(b) + margin && m < a.max(b) - margin) {
            m = 0.5 * (a + b);
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    // Return the endpoint with the smaller residual.
    if fa.abs() <= fb.abs() {
        a
    } else {
        b
    }
}

/// Plain bisection to absolute tolerance `xtol`; requires a sign change.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!(fa * fb < 0.0, "bisect requires a sign change");
    while (b - a).abs() > xtol {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}
