//! Cubic polynomial roots and 3x3 eigenvalues.
//!
//! Closed-form (Cardano / trigonometric) solutions polished by a few Newton
//! steps give roots accurate to well under 1e-10 for the well-scaled
//! polynomials this crate produces; no iterative matrix reduction is needed
//! for fixed 3x3 problems.

use nalgebra::Matrix3;
use num_complex::Complex64;

/// Roots of the monic cubic `x^3 + a x^2 + b x + c`, sorted by (re, im).
///
/// Either all three roots are real, or one is real and the other two form a
/// conjugate pair (exactly conjugate by construction).
pub fn monic_cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    // Depressed form t^3 + p t + q with x = t - a/3.
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = 0.25 * q * q + p * p * p / 27.0;

    let mut roots = if disc > 0.0 {
        // One real root, complex pair.
        let s = disc.sqrt();
        let u = (-0.5 * q + s).cbrt();
        let v = (-0.5 * q - s).cbrt();
        let t_real = u + v;
        let real = polish_real(t_real - shift, a, b, c);
        let (r1, r2) = deflate_quadratic(real, a, b);
        [Complex64::new(real, 0.0), r1, r2]
    } else {
        // Three real roots (trigonometric form).
        let m = 2.0 * (-p / 3.0).max(0.0).sqrt();
        let arg = if m == 0.0 {
            0.0
        } else {
            (3.0 * q / (p * m)).clamp(-1.0, 1.0)
        };
        let phi = arg.acos() / 3.0;
        let mut rs = [0.0f64; 3];
        for (k, r) in rs.iter_mut().enumerate() {
            let t = m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
            *r = polish_real(t - shift, a, b, c);
        }
        [
            Complex64::new(rs[0], 0.0),
            Complex64::new(rs[1], 0.0),
            Complex64::new(rs[2], 0.0),
        ]
    };

    roots.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
    });
    roots
}

/// Newton-polish a real root of `x^3 + a x^2 + b x + c`.
fn polish_real(mut x: f64, a: f64, b: f64, c: f64) -> f64 {
    for _ in 0..4 {
        let f = ((x + a) * x + b) * x + c;
        let df = (3.0 * x + 2.0 * a) * x + b;
        if df == 0.0 {
            break;
        }
        let step = f / df;
        x -= step;
        if step.abs() < 1e-16 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Given a real root `r` of the monic cubic, return the remaining pair from
/// the deflated quadratic `x^2 + (a + r) x + (b + r(a + r))`.
fn deflate_quadratic(r: f64, a: f64, b: f64) -> (Complex64, Complex64) {
    let p = a + r;
    let q = b + r * p;
    let disc = p * p - 4.0 * q;
    if disc >= 0.0 {
        let s = disc.sqrt();
        // Stable form: avoid cancellation in the smaller root.
        let big = -0.5 * (p + p.signum() * s);
        let (x1, x2) = if big != 0.0 { (big, q / big) } else { (0.0, -p) };
        (Complex64::new(x1, 0.0), Complex64::new(x2, 0.0))
    } else {
        let im = (-disc).sqrt() * 0.5;
        let re = -0.5 * p;
        (Complex64::new(re, -im), Complex64::new(re, im))
    }
}

/// Real roots of `c0 + c1 x + c2 x^2 + c3 x^3` inside `[lo, hi]`.
///
/// Degenerate leading coefficients fall back to the quadratic/linear case, so
/// this is safe for dense-output derivative polynomials whose cubic term can
/// vanish.
pub fn real_roots_in(c0: f64, c1: f64, c2: f64, c3: f64, lo: f64, hi: f64) -> Vec<f64> {
    let scale = c0.abs().max(c1.abs()).max(c2.abs()).max(c3.abs());
    let mut out = Vec::new();
    if scale == 0.0 {
        return out;
    }
    let eps = 1e-13 * scale;
    if c3.abs() > eps {
        for r in monic_cubic_roots(c2 / c3, c1 / c3, c0 / c3) {
            if r.im == 0.0 {
                out.push(r.re);
            }
        }
    } else if c2.abs() > eps {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc >= 0.0 {
            let s = disc.sqrt();
            let big = -0.5 * (c1 + c1.signum() * s);
            if big != 0.0 {
                out.push(big / c2);
                out.push(c0 / big);
            } else {
                out.push(0.0);
            }
        }
    } else if c1.abs() > eps {
        out.push(-c0 / c1);
    }
    out.retain(|x| *x >= lo && *x <= hi);
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Characteristic polynomial of `m` as the monic coefficients `(a, b, c)` of
/// `lambda^3 + a lambda^2 + b lambda + c`.
pub fn char_poly_coeffs(m: &Matrix3<f64>) -> (f64, f64, f64) {
    let tr = m.trace();
    // Sum of principal 2x2 minors.
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    let det = m.determinant();
    (-tr, minors, -det)
}

/// Eigenvalues of a real 3x3 matrix, sorted by (re, im).
pub fn eigenvalues3(m: &Matrix3<f64>) -> [Complex64; 3] {
    let (a, b, c) = char_poly_coeffs(m);
    monic_cubic_roots(a, b, c)
}
