//! Equilibrium points of the food chain and their stability.
//!
//! Interior equilibria are the intersections of the line `y = 1 - x` with the
//! curve `y = y* tilde_f1(x)`, where `y*` solves `f2(y) = d2`. Because
//! `g(x) = 1 - x - y* tilde_f1(x)` is concave (tilde_f1 is convex), there are
//! at most two intersections, bracketed on either side of the unique maximum
//! of `g`.

use crate::cubic::eigenvalues3;
use crate::error::{Error, Result};
use crate::model::{ModelParams, State};
use crate::solve::bisect_refine;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Tolerance below which an eigenvalue real part counts as zero.
pub const HYPERBOLICITY_TOL: f64 = 1e-8;

/// Root tolerance for equilibrium coordinates.
const ROOT_TOL: f64 = 1e-12;

/// Margin that keeps near-transcritical points from producing spurious
/// interior equilibria with z* ~ 0.
const Z_FEASIBILITY_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    /// `E0 = (0, 0, 0)`.
    Trivial,
    /// `E1 = (1, 0, 0)`.
    Axial,
    /// `Eb = (xb, yb, 0)`, top predator absent.
    Boundary,
    /// Coexistence point on the lower-x branch (`y* tilde_f1'(x) < -1`).
    InteriorLower,
    /// Coexistence point on the upper-x branch.
    InteriorUpper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Saddle,
    Unstable,
    NonHyperbolic,
}

/// A located equilibrium with its linearization data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub coords: State,
    pub kind: EquilibriumKind,
    #[serde(with = "crate::serde_util::serde_eigs")]
    pub eigenvalues: [Complex64; 3],
    pub stability: Stability,
    pub stable_dim: usize,
    pub unstable_dim: usize,
    /// Routh-Hurwitz verdict (interior points only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub routh_hurwitz_stable: Option<bool>,
}

/// Classify a verified equilibrium: eigenvalues, stability class, and manifold
/// dimensions; interior points also get the Routh-Hurwitz verdict.
pub fn classify(params: &ModelParams, coords: &State, kind: EquilibriumKind) -> Result<EquilibriumPoint> {
    let res = params.residual(coords);
    if res >= 1e-9 {
        return Err(Error::Precondition(format!(
            "classify requires an equilibrium (residual {res} >= 1e-9 at {coords:?})"
        )));
    }
    let j = params.jacobian(coords)?;
    let eigenvalues = eigenvalues3(&j);
    let stable_dim = eigenvalues.iter().filter(|l| l.re < -HYPERBOLICITY_TOL).count();
    let unstable_dim = eigenvalues.iter().filter(|l| l.re > HYPERBOLICITY_TOL).count();
    let stability = if stable_dim + unstable_dim < 3 {
        Stability::NonHyperbolic
    } else if stable_dim == 3 {
        Stability::Stable
    } else if unstable_dim == 3 {
        Stability::Unstable
    } else {
        Stability::Saddle
    };

    let interior = matches!(kind, EquilibriumKind::InteriorLower | EquilibriumKind::InteriorUpper);
    let routh_hurwitz_stable = if interior {
        let verdict = params.char_coeffs(coords)?.routh_hurwitz_stable();
        // The two verdicts come from different algebraic routes; at a
        // hyperbolic point they must agree.
        if stability != Stability::NonHyperbolic {
            assert_eq!(
                verdict,
                stability == Stability::Stable,
                "Routh-Hurwitz and eigenvalue verdicts disagree at {coords:?}"
            );
        }
        Some(verdict)
    } else {
        None
    };

    Ok(EquilibriumPoint {
        coords: *coords,
        kind,
        eigenvalues,
        stability,
        stable_dim,
        unstable_dim,
        routh_hurwitz_stable,
    })
}

/// The trivial and axial equilibria, always present.
pub fn trivial_axial(params: &ModelParams) -> Vec<EquilibriumPoint> {
    let e0 = classify(params, &State::new(0.0, 0.0, 0.0), EquilibriumKind::Trivial)
        .expect("E0 is always an exact equilibrium");
    let e1 = classify(params, &State::new(1.0, 0.0, 0.0), EquilibriumKind::Axial)
        .expect("E1 is always an exact equilibrium");
    vec![e0, e1]
}

/// The boundary equilibrium `(xb, yb, 0)`, present iff `d1 < min(f1(1), f1_inf)`.
pub fn boundary_equilibrium(params: &ModelParams) -> Option<EquilibriumPoint> {
    let (xb, yb) = boundary_coords(params)?;
    classify(params, &State::new(xb, yb, 0.0), EquilibriumKind::Boundary).ok()
}

/// Coordinates `(xb, yb)` of the boundary equilibrium, if it exists.
pub fn boundary_coords(params: &ModelParams) -> Option<(f64, f64)> {
    let xb = params.f1.inverse(params.d1).ok()?;
    if xb >= 1.0 {
        return None;
    }
    Some((xb, xb * (1.0 - xb) / params.d1))
}

/// Solve `f2(y) = d2` for the interior predator density `y*`.
pub fn y_star(params: &ModelParams) -> Result<f64> {
    params.f2.inverse(params.d2)
}

/// All feasible interior equilibria (0, 1 or 2), sorted by x.
///
/// A tangency of the line and curve (the saddle-node witness) is reported as
/// a single point; it classifies as `NonHyperbolic` through its zero
/// eigenvalue.
pub fn interior_equilibria(params: &ModelParams) -> Vec<EquilibriumPoint> {
    let Ok(ys) = y_star(params) else {
        return Vec::new();
    };
    let f1 = &params.f1;
    let g = |x: f64| 1.0 - x - ys * f1.tilde_unchecked(x);
    let slope = |x: f64| ys * f1.tilde_deriv_unchecked(x) + 1.0;

    const EPS: f64 = 1e-9;
    let mut roots: Vec<f64> = Vec::new();

    if slope(EPS) >= 0.0 {
        // No interior hump: g is monotone decreasing, at most one root.
        if g(EPS) > 0.0 {
            roots.push(bisect_refine(g, EPS, 1.0, ROOT_TOL));
        }
    } else if slope(1.0 - EPS) <= 0.0 {
        // g increases on all of (0,1) and g(1) < 0: no root.
    } else {
        let xc = bisect_refine(slope, EPS, 1.0 - EPS, ROOT_TOL);
        let gc = g(xc);
        if gc.abs() <= 1e-10 {
            // Tangency: the two branches have merged.
            roots.push(xc);
        } else if gc > 0.0 {
            if g(EPS) < 0.0 {
                roots.push(bisect_refine(g, EPS, xc, ROOT_TOL));
            }
            roots.push(bisect_refine(g, xc, 1.0, ROOT_TOL));
        }
    }

    // Guard scan for responses that violate the concavity assumptions: pick up
    // any sign change the bracketing above missed.
    let n = 200;
    let mut prev_x = EPS;
    let mut prev_g = g(prev_x);
    for i in 1..=n {
        let x = i as f64 / n as f64;
        let gx = g(x);
        if prev_g * gx < 0.0 && !roots.iter().any(|r| (*r > prev_x && *r < x) || (r - x).abs() < 1e-9) {
            roots.push(bisect_refine(g, prev_x, x, ROOT_TOL));
        }
        prev_x = x;
        prev_g = gx;
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let mut out = Vec::new();
    for x in roots {
        let surplus = f1.eval_unchecked(x) - params.d1;
        if surplus <= Z_FEASIBILITY_MARGIN {
            continue;
        }
        let z = surplus / params.f2.tilde_unchecked(ys);
        let kind = if ys * f1.tilde_deriv_unchecked(x) < -1.0 {
            EquilibriumKind::InteriorLower
        } else {
            EquilibriumKind::InteriorUpper
        };
        match classify(params, &State::new(x, ys, z), kind) {
            Ok(pt) => out.push(pt),
            Err(_) => continue,
        }
    }
    out
}

/// Every equilibrium of the model at its current parameters.
pub fn all_equilibria(params: &ModelParams) -> Vec<EquilibriumPoint> {
    let mut pts = trivial_axial(params);
    if let Some(b) = boundary_equilibrium(params) {
        pts.push(b);
    }
    pts.extend(interior_equilibria(params));
    pts
}
