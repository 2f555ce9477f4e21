//! The three-species food chain vector field and its derivatives.
//!
//! ```text
//! x' = x - x^2 - f1(x) y
//! y' = f1(x) y - d1 y - f2(y) z
//! z' = f2(y) z - d2 z
//! ```
//!
//! with saturating responses `f1`, `f2` and linear predator mortalities
//! `d1`, `d2`.

use crate::cubic;
use crate::error::{Error, Result};
use crate::response::ResponseSpec;
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// One point in population space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    /// Prey density.
    pub x: f64,
    /// Intermediate predator density.
    pub y: f64,
    /// Top predator density.
    pub z: f64,
}

impl State {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    /// Max-norm distance to another state.
    pub fn inf_distance(&self, other: &State) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }

    fn check_nonneg(&self) -> Result<()> {
        if self.x < 0.0 || self.y < 0.0 || self.z < 0.0 {
            return Err(Error::Domain(format!("state has negative components: {self:?}")));
        }
        Ok(())
    }
}

impl From<[f64; 3]> for State {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// Full parameterization of the food chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawModelParams")]
pub struct ModelParams {
    pub f1: ResponseSpec,
    pub f2: ResponseSpec,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModelParams {
    f1: ResponseSpec,
    f2: ResponseSpec,
    d1: f64,
    d2: f64,
}

impl TryFrom<RawModelParams> for ModelParams {
    type Error = Error;
    fn try_from(raw: RawModelParams) -> Result<Self> {
        ModelParams::new(raw.f1, raw.f2, raw.d1, raw.d2)
    }
}

impl ModelParams {
    pub fn new(f1: ResponseSpec, f2: ResponseSpec, d1: f64, d2: f64) -> Result<Self> {
        if !(d1 > 0.0 && d1.is_finite()) || !(d2 > 0.0 && d2.is_finite()) {
            return Err(Error::Domain(format!(
                "mortalities must be positive and finite, got d1 = {d1}, d2 = {d2}"
            )));
        }
        Ok(Self { f1, f2, d1, d2 })
    }

    /// Same model with the top-predator mortality replaced (the bifurcation
    /// parameter of every sweep in this crate).
    pub fn with_d2(&self, d2: f64) -> Result<Self> {
        Self::new(self.f1, self.f2, self.d1, d2)
    }

    /// `(x', y', z')` at `s`; `s` must be componentwise nonnegative.
    pub fn rhs(&self, s: &State) -> Result<Vector3<f64>> {
        s.check_nonneg()?;
        Ok(self.rhs_unchecked(&s.to_vector()))
    }

    #[inline]
    pub(crate) fn rhs_unchecked(&self, v: &Vector3<f64>) -> Vector3<f64> {
        let (x, y, z) = (v[0], v[1], v[2]);
        let f1x = self.f1.eval_unchecked(x);
        let f2y = self.f2.eval_unchecked(y);
        Vector3::new(
            x - x * x - f1x * y,
            f1x * y - self.d1 * y - f2y * z,
            f2y * z - self.d2 * z,
        )
    }

    /// Analytic Jacobian of [`rhs`](Self::rhs) at `s`.
    pub fn jacobian(&self, s: &State) -> Result<Matrix3<f64>> {
        s.check_nonneg()?;
        Ok(self.jacobian_unchecked(&s.to_vector()))
    }

    #[inline]
    pub(crate) fn jacobian_unchecked(&self, v: &Vector3<f64>) -> Matrix3<f64> {
        let (x, y, z) = (v[0], v[1], v[2]);
        let f1x = self.f1.eval_unchecked(x);
        let f1dx = self.f1.deriv_unchecked(x);
        let f2y = self.f2.eval_unchecked(y);
        let f2dy = self.f2.deriv_unchecked(y);
        Matrix3::new(
            1.0 - 2.0 * x - f1dx * y,
            -f1x,
            0.0,
            f1dx * y,
            f1x - self.d1 - f2dy * z,
            -f2y,
            0.0,
            f2dy * z,
            f2y - self.d2,
        )
    }

    /// Residual norm of the equilibrium condition at `s`.
    pub fn residual(&self, s: &State) -> f64 {
        self.rhs_unchecked(&s.to_vector()).amax()
    }

    /// Characteristic-polynomial coefficients at an interior equilibrium.
    ///
    /// `e` must satisfy the equilibrium condition to within 1e-9; the
    /// coefficients are those of `lambda^3 + P2 lambda^2 + P1 lambda + P0`.
    pub fn char_coeffs(&self, e: &State) -> Result<CharCoeffs> {
        e.check_nonneg()?;
        if self.residual(e) >= 1e-9 {
            return Err(Error::Precondition(format!(
                "char_coeffs requires an equilibrium (residual {} >= 1e-9)",
                self.residual(e)
            )));
        }
        let a = 1.0 - 2.0 * e.x - e.y * self.f1.deriv_unchecked(e.x);
        let b = self.f1.eval_unchecked(e.x) - self.d1 - e.z * self.f2.deriv_unchecked(e.y);
        let coupling = e.y * self.f1.eval_unchecked(e.x) * self.f1.deriv_unchecked(e.x);
        let transverse = self.d2 * e.z * self.f2.deriv_unchecked(e.y);
        Ok(CharCoeffs {
            p2: -(a + b),
            p1: a * b + coupling + transverse,
            p0: -transverse * a,
        })
    }
}

/// Coefficients of the interior-equilibrium characteristic cubic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharCoeffs {
    pub p2: f64,
    pub p1: f64,
    pub p0: f64,
}

impl CharCoeffs {
    /// `P1 P2 - P0`, the Hopf test function.
    pub fn hurwitz_delta(&self) -> f64 {
        self.p1 * self.p2 - self.p0
    }

    /// Routh-Hurwitz stability verdict for the cubic.
    pub fn routh_hurwitz_stable(&self) -> bool {
        self.p2 > 0.0 && self.p0 > 0.0 && self.hurwitz_delta() > 0.0
    }

    /// Roots of the cubic, i.e. the equilibrium's eigenvalues.
    pub fn eigenvalues(&self) -> [num_complex::Complex64; 3] {
        cubic::monic_cubic_roots(self.p2, self.p1, self.p0)
    }

    /// Max residual of `lambda^3 + P2 lambda^2 + P1 lambda + P0` over the
    /// given eigenvalues, relative to the coefficient scale.
    pub fn residual_at(&self, eigs: &[num_complex::Complex64; 3]) -> f64 {
        let scale = 1.0_f64.max(self.p2.abs()).max(self.p1.abs()).max(self.p0.abs());
        eigs.iter()
            .map(|l| (((l + self.p2) * l + self.p1) * l + self.p0).norm() / scale)
            .fold(0.0, f64::max)
    }
}

/// Table-1 parameters: both responses Holling type II.
pub fn holling_table1(d2: f64) -> ModelParams {
    ModelParams::new(
        ResponseSpec::holling2(4.98, 6.2).expect("static params"),
        ResponseSpec::holling2(0.46, 2.0).expect("static params"),
        0.4,
        d2,
    )
    .expect("static params")
}

/// Table-2 parameters: both responses Ivlev, fitted to Table 1.
pub fn ivlev_table2(d2: f64) -> ModelParams {
    ModelParams::new(
        ResponseSpec::ivlev(0.67, 5.349).expect("static params"),
        ResponseSpec::ivlev(0.1647, 2.457).expect("static params"),
        0.4,
        d2,
    )
    .expect("static params")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn rhs_vanishes_at_trivial_and_axial_points() {
        for params in [holling_table1(0.1), ivlev_table2(0.08)] {
            let r0 = params.rhs(&State::new(0.0, 0.0, 0.0)).unwrap();
            let r1 = params.rhs(&State::new(1.0, 0.0, 0.0)).unwrap();
            assert!(r0.amax() < 1e-12);
            assert!(r1.amax() < 1e-12);
        }
    }

    #[test]
    fn rhs_vanishes_at_boundary_equilibrium() {
        // x_b = f1^{-1}(d1) = 0.16, y_b = x_b (1 - x_b) / d1 = 0.336.
        let params = holling_table1(0.1);
        let r = params.rhs(&State::new(0.16, 0.336, 0.0)).unwrap();
        assert!(r.amax() < 1e-12, "residual {r:?}");
    }

    #[test]
    fn jacobian_at_trivial_point_is_diagonal() {
        let params = holling_table1(0.1);
        let j = params.jacobian(&State::new(0.0, 0.0, 0.0)).unwrap();
        let expected = Matrix3::from_diagonal(&Vector3::new(1.0, -0.4, -0.1));
        assert!((j - expected).amax() < 1e-14);
    }

    #[test]
    fn jacobian_at_axial_point_is_upper_triangular() {
        let params = holling_table1(0.1);
        let j = params.jacobian(&State::new(1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(j[(0, 0)], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j[(1, 1)], 4.98 / 7.2 - 0.4, epsilon = 1e-14);
        assert_abs_diff_eq!(j[(2, 2)], -0.1, epsilon = 1e-14);
        assert_eq!(j[(1, 0)], 0.0);
        assert_eq!(j[(2, 0)], 0.0);
        assert_eq!(j[(2, 1)], 0.0);
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for params in [holling_table1(0.1), ivlev_table2(0.09)] {
            for _ in 0..20 {
                let s = Vector3::new(
                    rng.random_range(0.0..1.5),
                    rng.random_range(0.0..1.5),
                    rng.random_range(0.0..1.5),
                );
                let j = params.jacobian_unchecked(&s);
                let h = 1e-6;
                let mut worst = 0.0f64;
                for col in 0..3 {
                    let mut sp = s;
                    let mut sm = s;
                    sp[col] += h;
                    sm[col] -= h;
                    let fd = (params.rhs_unchecked(&sp) - params.rhs_unchecked(&sm)) / (2.0 * h);
                    for row in 0..3 {
                        let rel = (fd[row] - j[(row, col)]).abs() / (1.0 + j[(row, col)].abs());
                        worst = worst.max(rel);
                    }
                }
                assert!(worst < 1e-5, "finite differences disagree: {worst}");
            }
        }
    }

    #[test]
    fn char_coeffs_match_jacobian_characteristic_polynomial() {
        // An interior equilibrium of the Table-1 model at d2 = 0.10, from the
        // closed-form construction (y* = 5/13, upper x root).
        let params = holling_table1(0.10);
        let e = crate::equilibria::interior_equilibria(&params);
        for pt in &e {
            let cc = params.char_coeffs(&pt.coords).unwrap();
            let j = params.jacobian(&pt.coords).unwrap();
            let (a, b, c) = crate::cubic::char_poly_coeffs(&j);
            assert_abs_diff_eq!(cc.p2, a, epsilon = 1e-12);
            assert_abs_diff_eq!(cc.p1, b, epsilon = 1e-12);
            assert_abs_diff_eq!(cc.p0, c, epsilon = 1e-12);
            // Cubic/eigenvalue consistency.
            assert!(cc.residual_at(&cc.eigenvalues()) < 1e-8);
        }
    }

    #[test]
    fn char_coeffs_rejects_non_equilibrium() {
        let params = holling_table1(0.10);
        assert!(params.char_coeffs(&State::new(0.5, 0.5, 0.5)).is_err());
    }

    #[test]
    fn p1_increasing_p2_decreasing_along_upper_branch() {
        // Finite differences of the characteristic coefficients along the
        // coexistence branch with the larger x component.
        let params = holling_table1(0.10);
        let h = 1e-6;
        for d2 in [0.095, 0.0975, 0.10, 0.1025] {
            let cc = |dd: f64| {
                let p = params.with_d2(dd).unwrap();
                let pts = crate::equilibria::interior_equilibria(&p);
                let upper = pts
                    .iter()
                    .find(|q| q.kind == crate::equilibria::EquilibriumKind::InteriorUpper)
                    .expect("upper branch point");
                p.char_coeffs(&upper.coords).unwrap()
            };
            let plus = cc(d2 + h);
            let minus = cc(d2 - h);
            assert!((plus.p1 - minus.p1) / (2.0 * h) > 0.0, "P1 not increasing at {d2}");
            assert!((plus.p2 - minus.p2) / (2.0 * h) < 0.0, "P2 not decreasing at {d2}");
        }
    }

    #[test]
    fn serde_model_schema() {
        let json = r#"{"f1":{"kind":"holling2","p1":4.98,"p2":6.2},
                       "f2":{"kind":"holling2","p1":0.46,"p2":2.0},
                       "d1":0.4,"d2":0.1}"#;
        let p: ModelParams = serde_json::from_str(json).unwrap();
        assert_eq!(p, holling_table1(0.1));
        let round: ModelParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(round, p);
        assert!(serde_json::from_str::<ModelParams>(
            r#"{"f1":{"kind":"holling2","p1":1.0,"p2":1.0},
                "f2":{"kind":"holling2","p1":1.0,"p2":1.0},
                "d1":0.4,"d2":0.1,"d3":0.5}"#
        )
        .is_err());
        assert!(serde_json::from_str::<ModelParams>(
            r#"{"f1":{"kind":"holling2","p1":1.0,"p2":1.0},
                "f2":{"kind":"holling2","p1":1.0,"p2":1.0},
                "d1":-0.4,"d2":0.1}"#
        )
        .is_err());
    }
}
