//! Saturating functional-response families.
//!
//! Both built-in families are zero at zero, strictly increasing, bounded, and
//! concave down, and their per-prey intensity `f(u)/u` is positive, strictly
//! decreasing, convex, and vanishes at infinity. Those properties are what the
//! equilibrium and bifurcation machinery relies on; they are checked on a grid
//! by `validate_axioms`.

use crate::error::{Error, Result};
use crate::solve::bisect;
use serde::{Deserialize, Serialize};

/// Which saturating family a [`ResponseSpec`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseKind {
    /// `p1 u / (1 + p2 u)`
    Holling2,
    /// `p1 (1 - exp(-p2 u))`
    Ivlev,
}

/// A concrete functional response: family plus its two positive parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawResponseSpec")]
pub struct ResponseSpec {
    pub kind: ResponseKind,
    pub p1: f64,
    pub p2: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResponseSpec {
    kind: ResponseKind,
    p1: f64,
    p2: f64,
}

impl TryFrom<RawResponseSpec> for ResponseSpec {
    type Error = Error;
    fn try_from(raw: RawResponseSpec) -> Result<Self> {
        ResponseSpec::new(raw.kind, raw.p1, raw.p2)
    }
}

impl ResponseSpec {
    pub fn new(kind: ResponseKind, p1: f64, p2: f64) -> Result<Self> {
        if !(p1 > 0.0 && p1.is_finite()) || !(p2 > 0.0 && p2.is_finite()) {
            return Err(Error::Domain(format!(
                "response parameters must be positive and finite, got p1 = {p1}, p2 = {p2}"
            )));
        }
        Ok(Self { kind, p1, p2 })
    }

    pub fn holling2(p1: f64, p2: f64) -> Result<Self> {
        Self::new(ResponseKind::Holling2, p1, p2)
    }

    pub fn ivlev(p1: f64, p2: f64) -> Result<Self> {
        Self::new(ResponseKind::Ivlev, p1, p2)
    }

    fn check_nonneg(u: f64) -> Result<()> {
        if u < 0.0 || u.is_nan() {
            Err(Error::Domain(format!("response argument must be >= 0, got {u}")))
        } else {
            Ok(())
        }
    }

    /// `f(u)`.
    pub fn eval(&self, u: f64) -> Result<f64> {
        Self::check_nonneg(u)?;
        Ok(self.eval_unchecked(u))
    }

    pub(crate) fn eval_unchecked(&self, u: f64) -> f64 {
        match self.kind {
            ResponseKind::Holling2 => self.p1 * u / (1.0 + self.p2 * u),
            // -expm1(-w) = 1 - e^{-w} without cancellation for small w.
            ResponseKind::Ivlev => self.p1 * -(-self.p2 * u).exp_m1(),
        }
    }

    /// `f'(u)`.
    pub fn deriv(&self, u: f64) -> Result<f64> {
        Self::check_nonneg(u)?;
        Ok(self.deriv_unchecked(u))
    }

    pub(crate) fn deriv_unchecked(&self, u: f64) -> f64 {
        match self.kind {
            ResponseKind::Holling2 => {
                let d = 1.0 + self.p2 * u;
                self.p1 / (d * d)
            }
            ResponseKind::Ivlev => self.p1 * self.p2 * (-self.p2 * u).exp(),
        }
    }

    /// `f''(u)`.
    pub fn deriv2(&self, u: f64) -> Result<f64> {
        Self::check_nonneg(u)?;
        Ok(match self.kind {
            ResponseKind::Holling2 => {
                let d = 1.0 + self.p2 * u;
                -2.0 * self.p1 * self.p2 / (d * d * d)
            }
            ResponseKind::Ivlev => -self.p1 * self.p2 * self.p2 * (-self.p2 * u).exp(),
        })
    }

    /// Horizontal asymptote `lim_{u->inf} f(u)`.
    pub fn asymptote(&self) -> f64 {
        match self.kind {
            ResponseKind::Holling2 => self.p1 / self.p2,
            ResponseKind::Ivlev => self.p1,
        }
    }

    /// `lim_{u->0} f(u)/u`, the slope at the origin.
    pub fn initial_slope(&self) -> f64 {
        match self.kind {
            ResponseKind::Holling2 => self.p1,
            ResponseKind::Ivlev => self.p1 * self.p2,
        }
    }

    /// `f(u)/u`, continuously extended to [`initial_slope`](Self::initial_slope) at `u = 0`.
    pub fn tilde(&self, u: f64) -> Result<f64> {
        Self::check_nonneg(u)?;
        Ok(self.tilde_unchecked(u))
    }

    pub(crate) fn tilde_unchecked(&self, u: f64) -> f64 {
        if u == 0.0 {
            return self.initial_slope();
        }
        match self.kind {
            ResponseKind::Holling2 => self.p1 / (1.0 + self.p2 * u),
            ResponseKind::Ivlev => self.p1 * -(-self.p2 * u).exp_m1() / u,
        }
    }

    /// `d/du [f(u)/u]`, with its one-sided limit at `u = 0`.
    pub fn tilde_deriv(&self, u: f64) -> Result<f64> {
        Self::check_nonneg(u)?;
        Ok(self.tilde_deriv_unchecked(u))
    }

    pub(crate) fn tilde_deriv_unchecked(&self, u: f64) -> f64 {
        match self.kind {
            ResponseKind::Holling2 => {
                let d = 1.0 + self.p2 * u;
                -self.p1 * self.p2 / (d * d)
            }
            ResponseKind::Ivlev => {
                let w = self.p2 * u;
                if w < 0.05 {
                    // Series of (w e^{-w} - (1 - e^{-w})) / u^2: the direct
                    // form loses ~eps/w^2 to cancellation for small w.
                    let s = -0.5
                        + w * (1.0 / 3.0
                            + w * (-1.0 / 8.0
                                + w * (1.0 / 30.0
                                    + w * (-1.0 / 144.0 + w * (1.0 / 840.0 - w / 5760.0)))));
                    self.p1 * self.p2 * self.p2 * s
                } else {
                    let e = (-w).exp();
                    self.p1 * (w * e - (1.0 - e)) / (u * u)
                }
            }
        }
    }

    /// The unique `u > 0` with `f(u) = v`; requires `0 < v < asymptote`.
    pub fn inverse(&self, v: f64) -> Result<f64> {
        if !(v > 0.0) || v >= self.asymptote() {
            return Err(Error::NoSolution(format!(
                "inverse target {v} outside (0, {})",
                self.asymptote()
            )));
        }
        Ok(match self.kind {
            ResponseKind::Holling2 => v / (self.p1 - self.p2 * v),
            ResponseKind::Ivlev => (1.0 / (1.0 - v / self.p1)).ln() / self.p2,
        })
    }

    /// Bracketed-bisection inverse, the family-agnostic fallback.
    ///
    /// Used to cross-check the closed forms; any future monotone family can
    /// rely on it directly.
    pub fn inverse_bracketed(&self, v: f64) -> Result<f64> {
        if !(v > 0.0) || v >= self.asymptote() {
            return Err(Error::NoSolution(format!(
                "inverse target {v} outside (0, {})",
                self.asymptote()
            )));
        }
        let mut hi = 1.0;
        while self.eval_unchecked(hi) < v {
            hi *= 2.0;
            if hi > 1e18 {
                return Err(Error::NoSolution(format!("inverse target {v} unreachable")));
            }
        }
        Ok(bisect(|u| self.eval_unchecked(u) - v, 0.0, hi, 1e-12))
    }

    /// Check conditions I-IV and the tilde assumptions on a grid of arguments.
    ///
    /// Returns the list of violations (empty means the spec is admissible).
    pub fn validate_axioms(&self, grid: &[f64]) -> Vec<String> {
        let mut bad = Vec::new();
        if self.eval_unchecked(0.0) != 0.0 {
            bad.push("f(0) != 0".into());
        }
        if !self.asymptote().is_finite() {
            bad.push("asymptote not finite".into());
        }
        for &u in grid {
            if !(self.deriv_unchecked(u) > 0.0) {
                bad.push(format!("f'({u}) <= 0"));
            }
            if !(self.deriv2(u).unwrap_or(f64::NAN) < 0.0) {
                bad.push(format!("f''({u}) >= 0"));
            }
            if !(self.tilde_unchecked(u) > 0.0) {
                bad.push(format!("tilde({u}) <= 0"));
            }
            if !(self.tilde_deriv_unchecked(u) < 0.0) {
                bad.push(format!("tilde'({u}) >= 0"));
            }
        }
        // Convexity of tilde via second divided differences on grid triples.
        for w in grid.windows(3) {
            let (u0, u1, u2) = (w[0], w[1], w[2]);
            let t0 = self.tilde_unchecked(u0);
            let t1 = self.tilde_unchecked(u1);
            let t2 = self.tilde_unchecked(u2);
            let dd = ((t2 - t1) / (u2 - u1) - (t1 - t0) / (u1 - u0)) / (u2 - u0);
            if !(dd > 0.0) {
                bad.push(format!("tilde not convex on ({u0}, {u1}, {u2})"));
            }
        }
        // Decay to zero: at the grid's far end the intensity must be a small
        // fraction of its origin value.
        if let Some(&far) = grid.last() {
            if far > 0.0 && !(self.tilde_unchecked(far) < 0.05 * self.initial_slope()) {
                bad.push(format!("tilde({far}) not << initial slope"));
            }
        }
        bad
    }
}

/// The standard validation grid used by `validate_axioms` callers.
pub const AXIOM_GRID: [f64; 8] = [0.0, 1e-4, 1e-2, 0.1, 0.5, 1.0, 5.0, 50.0];
