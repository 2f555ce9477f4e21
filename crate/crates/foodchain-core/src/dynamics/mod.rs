//! Time integration and everything built on it: Poincare maps, limit cycles
//! and their continuation, Lyapunov exponents, attractor classification, and
//! parameter sweeps.

pub mod cycle;
pub mod integrator;
pub mod lyapunov;
pub mod poincare;
pub mod sweep;

pub use cycle::{
    boundary_cycle, classify_hopf, continue_cycle, find_cycle, find_cycle_near_equilibrium,
    BoundaryCycle, ContinuationBranch, CycleStability, LimitCycle,
};
pub use integrator::{DenseStep, Dopri5, IntegratorConfig, CLAMP_THRESHOLD};
pub use lyapunov::lyapunov_max;
pub use poincare::{poincare_return, Section};
pub use sweep::{
    attractor_summary, crisis_check, extinction_verdict, sweep, AttractorKind, AttractorSummary,
    ExtinctionVerdict, IcPolicy, SweepPoint, CHAOS_LYAPUNOV_THRESHOLD, COLLISION_DISTANCE,
    EXTINCTION_Z_THRESHOLD,
};

use crate::error::{Error, Result};
use crate::model::{ModelParams, State};
use nalgebra::Vector3;

/// A stored trajectory with dense interpolation on every step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<State>,
    segments: Vec<DenseStep<3>>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn segments(&self) -> &[DenseStep<3>] {
        &self.segments
    }

    pub fn final_state(&self) -> State {
        *self.states.last().expect("trajectory has at least the initial state")
    }

    /// Interpolated state at `t` (clamped to the covered span).
    pub fn state_at(&self, t: f64) -> State {
        if self.segments.is_empty() {
            return self.final_state();
        }
        let t = t.clamp(self.times[0], *self.times.last().unwrap());
        // Binary search for the segment containing t.
        let idx = self
            .segments
            .partition_point(|s| s.t1() < t)
            .min(self.segments.len() - 1);
        let seg = &self.segments[idx];
        State::from_vector(&seg.eval(((t - seg.t0) / seg.h).clamp(0.0, 1.0)))
    }
}

/// Integrate the model from `ic` for `t_end` time units, storing the dense
/// trajectory. States are clamped at zero from below so the coordinate planes
/// stay exactly invariant.
pub fn integrate(params: &ModelParams, ic: &State, t_end: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if ic.x < 0.0 || ic.y < 0.0 || ic.z < 0.0 {
        return Err(Error::Domain(format!("initial condition has negative components: {ic:?}")));
    }
    if !(t_end > 0.0) {
        return Err(Error::Domain(format!("t_end must be positive, got {t_end}")));
    }
    let rhs = |v: &Vector3<f64>| params.rhs_unchecked(v);
    let mut stepper = Dopri5::new(&rhs, 0.0, ic.to_vector(), cfg, 3);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![State::from_vector(&stepper.y)],
        segments: Vec::new(),
    };
    while stepper.t < t_end {
        let seg = stepper.step(t_end)?;
        traj.segments.push(seg);
        traj.times.push(stepper.t);
        traj.states.push(State::from_vector(&stepper.y));
    }
    Ok(traj)
}

/// Integrate without storing anything; returns the final state.
pub fn integrate_final(
    params: &ModelParams,
    ic: &State,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<State> {
    cfg.validate()?;
    if ic.x < 0.0 || ic.y < 0.0 || ic.z < 0.0 {
        return Err(Error::Domain(format!("initial condition has negative components: {ic:?}")));
    }
    if t_end <= 0.0 {
        return Ok(*ic);
    }
    let rhs = |v: &Vector3<f64>| params.rhs_unchecked(v);
    let mut stepper = Dopri5::new(&rhs, 0.0, ic.to_vector(), cfg, 3);
    stepper.run_to(t_end)?;
    Ok(State::from_vector(&stepper.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::holling_table1;

    #[test]
    fn equilibrium_stays_put() {
        let params = holling_table1(0.1);
        let cfg = IntegratorConfig::default();
        let traj = integrate(&params, &State::new(0.0, 0.0, 0.0), 50.0, &cfg).unwrap();
        for s in traj.states() {
            assert_eq!((s.x, s.y, s.z), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn prey_axis_is_logistic() {
        // On the x-axis the dynamics reduce to logistic growth toward 1.
        let params = holling_table1(0.1);
        let cfg = IntegratorConfig::default();
        let traj = integrate(&params, &State::new(0.9, 0.0, 0.0), 40.0, &cfg).unwrap();
        let mut prev = 0.9;
        for s in traj.states() {
            assert!(s.x >= prev - 1e-12, "x not monotone: {} -> {}", prev, s.x);
            assert_eq!(s.y, 0.0);
            assert_eq!(s.z, 0.0);
            prev = s.x;
        }
        assert!((traj.final_state().x - 1.0).abs() < 1e-6);
        // Against the closed-form logistic solution at an interior time.
        let t: f64 = 7.3;
        let exact = 0.9 * (t.exp()) / (1.0 + 0.9 * (t.exp() - 1.0));
        assert!((traj.state_at(t).x - exact).abs() < 1e-7);
    }

    #[test]
    fn invariant_plane_z_zero() {
        let params = holling_table1(0.08);
        let cfg = IntegratorConfig::default();
        let traj = integrate(&params, &State::new(0.5, 0.4, 0.0), 200.0, &cfg).unwrap();
        for s in traj.states() {
            assert_eq!(s.z, 0.0);
        }
    }

    #[test]
    fn nonnegativity_everywhere() {
        let params = holling_table1(0.08);
        let cfg = IntegratorConfig::default();
        let traj = integrate(&params, &State::new(0.5, 0.4, 0.8), 500.0, &cfg).unwrap();
        for (seg, _) in traj.segments().iter().zip(traj.times()) {
            for k in 0..=8 {
                let v = seg.eval(k as f64 / 8.0);
                assert!(v[0] >= 0.0 && v[1] >= 0.0 && v[2] >= -1e-12);
            }
        }
    }

    #[test]
    fn tightening_tolerances_tightens_the_answer() {
        // Stable-focus approach at d2 = 0.10: compare against an rtol 1e-12
        // reference; the error must drop sharply as tolerances shrink. The
        // step cap is lifted so the tolerances actually bind.
        let params = holling_table1(0.10);
        let run = |rtol: f64| {
            let cfg = IntegratorConfig {
                rtol,
                atol: rtol * 1e-2,
                max_step: 50.0,
                ..IntegratorConfig::default()
            };
            integrate_final(&params, &State::new(0.55, 0.40, 0.76), 80.0, &cfg).unwrap()
        };
        let reference = run(1e-12);
        let coarse = run(1e-6).inf_distance(&reference);
        let fine = run(1e-8).inf_distance(&reference);
        assert!(
            fine < coarse / 10.0,
            "expected >=10x error reduction: coarse {coarse}, fine {fine}"
        );
    }
}
