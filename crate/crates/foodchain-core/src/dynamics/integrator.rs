//! Dormand-Prince 5(4) embedded pair with PI step control and 4th-order
//! dense output, for autonomous systems of fixed small dimension.

use crate::error::{Error, Result};
use nalgebra::SVector;

/// Integration tolerances and the default transient/window lengths used by
/// the attractor machinery.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Time discarded before any attractor measurement.
    pub t_transient: f64,
    /// Length of the measurement window.
    pub t_window: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            max_step: 0.5,
            t_transient: 5000.0,
            t_window: 3000.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0 && self.t_transient > 0.0 && self.t_window > 0.0) {
            return Err(Error::Domain(
                "max_step, t_transient and t_window must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Components snap to zero below this; keeps the invariant planes exact.
pub const CLAMP_THRESHOLD: f64 = 1e-14;

/// Step size floor; below it the integrator reports stiffness failure.
const H_MIN: f64 = 1e-12;

// Butcher tableau (Dormand-Prince 5(4)); the stage abscissae are not needed
// for an autonomous field.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
/// Fifth-order weights (also row 7 of A; the pair is FSAL).
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
/// Error weights (difference of the embedded orders).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

// PI controller constants (Hairer's DOPRI5 defaults).
const SAFE: f64 = 0.9;
const FAC_SHRINK_MAX: f64 = 5.0; // at most shrink by 5x
const FAC_GROW_MAX: f64 = 10.0; // at most grow by 10x
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;

/// One accepted step with its interpolating polynomial.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    cont: [SVector<f64, N>; 5],
}

impl<const N: usize> DenseStep<N> {
    /// State at `t0 + theta h`, `theta` in [0, 1].
    pub fn eval(&self, theta: f64) -> SVector<f64, N> {
        let t1 = 1.0 - theta;
        self.cont[0]
            + (self.cont[1] + (self.cont[2] + (self.cont[3] + self.cont[4] * t1) * theta) * t1) * theta
    }

    /// State at absolute time `t` inside the step.
    pub fn eval_at(&self, t: f64) -> SVector<f64, N> {
        self.eval((t - self.t0) / self.h)
    }

    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Power-basis coefficients of component `i` as a polynomial in theta:
    /// `a0 + a1 th + a2 th^2 + a3 th^3 + a4 th^4`.
    pub fn poly_coeffs(&self, i: usize) -> [f64; 5] {
        let c1 = self.cont[0][i];
        let c2 = self.cont[1][i];
        let c3 = self.cont[2][i];
        let c4 = self.cont[3][i];
        let c5 = self.cont[4][i];
        [c1, c2 + c3, c4 + c5 - c3, -c4 - 2.0 * c5, c5]
    }
}

/// Stepper state for one integration run.
pub struct Dopri5<'a, const N: usize> {
    rhs: &'a dyn Fn(&SVector<f64, N>) -> SVector<f64, N>,
    cfg: IntegratorConfig,
    /// Components `[0, clamp_dims)` snap to zero below [`CLAMP_THRESHOLD`];
    /// tangent/variational components beyond must stay signed.
    clamp_dims: usize,
    pub t: f64,
    pub y: SVector<f64, N>,
    k1: SVector<f64, N>,
    h: f64,
    err_old: f64,
    rejected: bool,
}

impl<'a, const N: usize> Dopri5<'a, N> {
    pub fn new(
        rhs: &'a dyn Fn(&SVector<f64, N>) -> SVector<f64, N>,
        t0: f64,
        y0: SVector<f64, N>,
        cfg: &IntegratorConfig,
        clamp_dims: usize,
    ) -> Self {
        let mut y = y0;
        clamp(&mut y, clamp_dims);
        let k1 = rhs(&y);
        let h = initial_step(rhs, &y, &k1, cfg);
        Self {
            rhs,
            cfg: *cfg,
            clamp_dims,
            t: t0,
            y,
            k1,
            h,
            err_old: 1e-4,
            rejected: false,
        }
    }

    /// Rescale trailing components (from index `from`) of the current state;
    /// the cached FSAL derivative scales with them because the variational
    /// part of the field is linear in the tangent.
    pub fn scale_tail(&mut self, from: usize, factor: f64) {
        for i in from..N {
            self.y[i] *= factor;
            self.k1[i] *= factor;
        }
    }

    /// Advance one accepted step, never stepping past `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<DenseStep<N>> {
        loop {
            let mut h = self.h.min(self.cfg.max_step).min(t_limit - self.t);
            if h <= 0.0 {
                return Err(Error::Domain(format!(
                    "step called at or past t_limit ({} >= {t_limit})",
                    self.t
                )));
            }
            if h < H_MIN {
                // A clipped step this small is legitimate only when we are
                // essentially at the limit already.
                if t_limit - self.t < H_MIN {
                    return Err(Error::StepUnderflow { t: self.t, h });
                }
            }
            let clipped = h >= t_limit - self.t;
            if clipped {
                h = t_limit - self.t;
            }

            let y = &self.y;
            let k1 = self.k1;
            let k2 = (self.rhs)(&(y + h * A2[0] * k1));
            let k3 = (self.rhs)(&(y + h * (A3[0] * k1 + A3[1] * k2)));
            let k4 = (self.rhs)(&(y + h * (A4[0] * k1 + A4[1] * k2 + A4[2] * k3)));
            let k5 = (self.rhs)(&(y + h * (A5[0] * k1 + A5[1] * k2 + A5[2] * k3 + A5[3] * k4)));
            let k6 = (self.rhs)(
                &(y + h * (A6[0] * k1 + A6[1] * k2 + A6[2] * k3 + A6[3] * k4 + A6[4] * k5)),
            );
            let dy = h * (B[0] * k1 + B[2] * k3 + B[3] * k4 + B[4] * k5 + B[5] * k6);
            let y1 = y + dy;
            let k7 = (self.rhs)(&y1);

            let err_vec =
                h * (E[0] * k1 + E[2] * k3 + E[3] * k4 + E[4] * k5 + E[5] * k6 + E[6] * k7);
            let mut err = 0.0;
            for i in 0..N {
                let sk = self.cfg.atol + self.cfg.rtol * self.y[i].abs().max(y1[i].abs());
                let r = err_vec[i] / sk;
                err += r * r;
            }
            err = (err / N as f64).sqrt();

            if !err.is_finite() {
                self.h = 0.1 * h;
                self.rejected = true;
                if self.h < H_MIN {
                    return Err(Error::StepUnderflow { t: self.t, h: self.h });
                }
                continue;
            }

            let fac11 = err.powf(EXPO1);
            if err <= 1.0 {
                // Accepted.
                self.err_old = err.max(1e-4);
                let fac = (fac11 / self.err_old.powf(BETA) / SAFE)
                    .clamp(1.0 / FAC_GROW_MAX, FAC_SHRINK_MAX);
                let mut h_new = h / fac;
                if self.rejected {
                    h_new = h_new.min(h);
                }
                self.rejected = false;

                let dense = DenseStep {
                    t0: self.t,
                    h,
                    cont: [
                        self.y,
                        dy,
                        h * k1 - dy,
                        dy - h * k7 - (h * k1 - dy),
                        h * (D[0] * k1
                            + D[2] * k3
                            + D[3] * k4
                            + D[4] * k5
                            + D[5] * k6
                            + D[6] * k7),
                    ],
                };

                self.t = if clipped { t_limit } else { self.t + h };
                self.y = y1;
                let changed = clamp(&mut self.y, self.clamp_dims);
                self.k1 = if changed { (self.rhs)(&self.y) } else { k7 };
                self.h = h_new;
                return Ok(dense);
            }

            // Rejected: shrink and retry.
            self.h = h / (fac11 / SAFE).min(FAC_SHRINK_MAX);
            self.rejected = true;
            if self.h < H_MIN {
                return Err(Error::StepUnderflow { t: self.t, h: self.h });
            }
        }
    }

    /// Integrate to `t_end`, discarding dense output.
    pub fn run_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end {
            self.step(t_end)?;
        }
        Ok(())
    }
}

fn clamp<const N: usize>(y: &mut SVector<f64, N>, dims: usize) -> bool {
    let mut changed = false;
    for i in 0..dims {
        if y[i] < CLAMP_THRESHOLD && y[i] != 0.0 {
            y[i] = 0.0;
            changed = true;
        }
    }
    changed
}

/// Starting step size, following the usual two-trial heuristic.
fn initial_step<const N: usize>(
    rhs: &dyn Fn(&SVector<f64, N>) -> SVector<f64, N>,
    y: &SVector<f64, N>,
    f0: &SVector<f64, N>,
    cfg: &IntegratorConfig,
) -> f64 {
    let sk = |v: &SVector<f64, N>, w: &SVector<f64, N>| -> f64 {
        let mut s = 0.0;
        for i in 0..N {
            let d = cfg.atol + cfg.rtol * v[i].abs();
            let r = w[i] / d;
            s += r * r;
        }
        (s / N as f64).sqrt()
    };
    let d0 = sk(y, y);
    let d1 = sk(y, f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = y + h0 * f0;
    let f1 = rhs(&y1);
    let d2 = sk(y, &(f1 - f0)) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.max_step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector1;

    #[test]
    fn exponential_growth_is_accurate() {
        let rhs = |y: &Vector1<f64>| *y;
        let cfg = IntegratorConfig::default();
        let mut s = Dopri5::new(&rhs, 0.0, Vector1::new(1.0), &cfg, 0);
        s.run_to(2.0).unwrap();
        assert!((s.y[0] - 2.0f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn local_error_scales_at_fifth_order() {
        // One step of size h on y' = y from y = 1: local error ~ C h^6 for
        // the 5th-order solution, so halving h divides the error by ~64.
        let rhs = |y: &Vector1<f64>| *y;
        let one_step = |h: f64| -> f64 {
            let cfg = IntegratorConfig {
                rtol: 1.0,
                atol: 1e3, // never reject
                max_step: h,
                ..IntegratorConfig::default()
            };
            let mut s = Dopri5::new(&rhs, 0.0, Vector1::new(1.0), &cfg, 0);
            s.h = h;
            s.step(h).unwrap();
            (s.y[0] - h.exp()).abs()
        };
        let e1 = one_step(0.4);
        let e2 = one_step(0.2);
        let ratio = e1 / e2;
        assert!(
            (30.0..130.0).contains(&ratio),
            "expected ~2^6 local error ratio, got {ratio} ({e1} / {e2})"
        );
    }

    #[test]
    fn dense_output_matches_integration() {
        // Harmonic oscillator; compare interpolation with the exact solution.
        let rhs = |y: &SVector<f64, 2>| SVector::<f64, 2>::new(y[1], -y[0]);
        let cfg = IntegratorConfig {
            rtol: 1e-10,
            atol: 1e-12,
            ..IntegratorConfig::default()
        };
        let mut s = Dopri5::new(&rhs, 0.0, SVector::<f64, 2>::new(1.0, 0.0), &cfg, 0);
        while s.t < 10.0 {
            let seg = s.step(10.0).unwrap();
            for k in 1..5 {
                let th = k as f64 / 5.0;
                let t = seg.t0 + th * seg.h;
                let v = seg.eval(th);
                assert!((v[0] - t.cos()).abs() < 1e-8, "dense x at t = {t}");
                assert!((v[1] + t.sin()).abs() < 1e-8, "dense v at t = {t}");
            }
        }
    }

    #[test]
    fn poly_coeffs_reproduce_eval() {
        let rhs = |y: &SVector<f64, 2>| SVector::<f64, 2>::new(y[1], -y[0]);
        let cfg = IntegratorConfig::default();
        let mut s = Dopri5::new(&rhs, 0.0, SVector::<f64, 2>::new(0.3, 0.7), &cfg, 0);
        let seg = s.step(1.0).unwrap();
        for i in 0..2 {
            let a = seg.poly_coeffs(i);
            for k in 0..=10 {
                let th = k as f64 / 10.0;
                let direct = seg.eval(th)[i];
                let horner = a[0] + th * (a[1] + th * (a[2] + th * (a[3] + th * a[4])));
                assert!((direct - horner).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn clamped_components_stay_zero() {
        // z' = -z decays; once clamped at zero it must stay there exactly.
        let rhs = |y: &Vector1<f64>| -*y;
        let cfg = IntegratorConfig::default();
        let mut s = Dopri5::new(&rhs, 0.0, Vector1::new(1e-12), &cfg, 1);
        s.run_to(20.0).unwrap();
        assert_eq!(s.y[0], 0.0);
    }
}
