//! Largest Lyapunov exponent by tangent-vector renormalization.

use crate::dynamics::integrator::{Dopri5, IntegratorConfig};
use crate::error::{Error, Result};
use crate::model::{ModelParams, State};
use nalgebra::{SVector, Vector3};

/// Renormalization interval in time units.
const TAU: f64 = 1.0;

/// Largest Lyapunov exponent from `ic`: discard `cfg.t_transient`, then
/// co-integrate the variational equation and average the log stretch of the
/// tangent vector over `max(2000, cfg.t_window)` unit-time renormalizations.
pub fn lyapunov_max(params: &ModelParams, ic: &State, cfg: &IntegratorConfig) -> Result<f64> {
    cfg.validate()?;
    if ic.x < 0.0 || ic.y < 0.0 || ic.z < 0.0 {
        return Err(Error::Domain(format!("initial condition has negative components: {ic:?}")));
    }
    let settled = crate::dynamics::integrate_final(params, ic, cfg.t_transient, cfg)?;
    let renorms = (cfg.t_window.ceil() as usize).max(2000);
    lyapunov_from(params, &settled, 50.0, renorms, cfg)
}

/// Benettin loop from a state assumed to be on (or very near) the attractor.
/// `settle` extra units let the tangent align with the leading direction
/// before averaging starts.
pub(crate) fn lyapunov_from(
    params: &ModelParams,
    start: &State,
    settle: f64,
    renorms: usize,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let rhs = |v: &SVector<f64, 6>| {
        let s = Vector3::new(v[0], v[1], v[2]);
        let f = params.rhs_unchecked(&s);
        let j = params.jacobian_unchecked(&s);
        let tangent = j * Vector3::new(v[3], v[4], v[5]);
        SVector::<f64, 6>::new(f[0], f[1], f[2], tangent[0], tangent[1], tangent[2])
    };
    let y0 = SVector::<f64, 6>::new(start.x, start.y, start.z, 1.0, 0.0, 0.0);
    // Clamp only the state part; the tangent must keep its signs.
    let mut stepper = Dopri5::new(&rhs, 0.0, y0, cfg, 3);

    let renormalize = |stepper: &mut Dopri5<6>| -> f64 {
        let norm =
            (stepper.y[3] * stepper.y[3] + stepper.y[4] * stepper.y[4] + stepper.y[5] * stepper.y[5])
                .sqrt();
        stepper.scale_tail(3, 1.0 / norm);
        norm
    };

    // Alignment phase.
    let mut t_edge = 0.0;
    while t_edge < settle {
        t_edge += TAU;
        stepper.run_to(t_edge)?;
        renormalize(&mut stepper);
    }
    // Averaging phase.
    let mut acc = 0.0;
    for _ in 0..renorms {
        t_edge += TAU;
        stepper.run_to(t_edge)?;
        acc += renormalize(&mut stepper).ln();
    }
    Ok(acc / (renorms as f64 * TAU))
}
