//! Attractor characterization over a d2 grid: extrema collection, regime
//! classification (equilibrium / periodic / chaotic / extinction), extinction
//! verdicts with confirmation, and the attractor-to-cycle distance used for
//! crisis detection.

use crate::cubic::real_roots_in;
use crate::dynamics::integrator::{DenseStep, Dopri5, IntegratorConfig};
use crate::dynamics::lyapunov::lyapunov_from;
use crate::dynamics::LimitCycle;
use crate::error::{Error, Result};
use crate::model::{ModelParams, State};
use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest-Lyapunov threshold separating chaos from regular motion.
pub const CHAOS_LYAPUNOV_THRESHOLD: f64 = 0.005;
/// Top-predator density below which the run counts as extinction.
pub const EXTINCTION_Z_THRESHOLD: f64 = 1e-6;
/// Attractor-to-cycle distance below which a collision is flagged.
pub const COLLISION_DISTANCE: f64 = 1e-2;
/// Absolute merge tolerance for extrema clustering.
const CLUSTER_TOL: f64 = 1e-4;
/// Window amplitude below which the attractor is an equilibrium.
const EQUILIBRIUM_AMPLITUDE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttractorKind {
    Equilibrium,
    Periodic { k: usize },
    Chaotic,
    BoundaryExtinction,
}

/// Per-d2 record of a sweep: classification, clustered extrema, exponent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttractorSummary {
    pub d2: f64,
    pub kind: AttractorKind,
    pub x_maxima: Vec<f64>,
    pub y_maxima: Vec<f64>,
    pub z_maxima: Vec<f64>,
    pub lyap_max: f64,
    pub min_z: f64,
    /// End state of the measurement run; seeds the next point of a
    /// continuation sweep.
    pub final_state: State,
}

/// Initial-condition policy for sweeps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcPolicy {
    /// Seed each point with the previous point's final state (follows the
    /// attractor branch through hysteresis); `first` seeds the first point.
    Continuation { first: State },
    /// Same initial condition everywhere; points run independently (and in
    /// parallel).
    Fixed { ic: State },
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub d2: f64,
    /// Per-point failures are recorded, not fatal.
    pub summary: std::result::Result<AttractorSummary, String>,
}

/// Streaming extrema/amplitude statistics over one measurement window.
struct WindowStats {
    t0: f64,
    t_len: f64,
    maxima: [Vec<f64>; 3],
    min_z: f64,
    /// Per-quarter (min, max) of each component, for decay detection.
    quarters: [[(f64, f64); 3]; 4],
}

impl WindowStats {
    fn new(t0: f64, t_len: f64) -> Self {
        Self {
            t0,
            t_len,
            maxima: [Vec::new(), Vec::new(), Vec::new()],
            min_z: f64::INFINITY,
            quarters: [[(f64::INFINITY, f64::NEG_INFINITY); 3]; 4],
        }
    }

    fn quarter_of(&self, t: f64) -> usize {
        (((t - self.t0) / self.t_len * 4.0) as usize).min(3)
    }

    fn scan(&mut self, seg: &DenseStep<3>) {
        let q = self.quarter_of(seg.t0 + 0.5 * seg.h);
        for comp in 0..3 {
            let a = seg.poly_coeffs(comp);
            // Node values participate in amplitude and min tracking.
            for theta in [0.0, 1.0] {
                let v = seg.eval(theta)[comp];
                let (lo, hi) = &mut self.quarters[q][comp];
                *lo = lo.min(v);
                *hi = hi.max(v);
                if comp == 2 {
                    self.min_z = self.min_z.min(v);
                }
            }
            // Interior extrema: roots of the interpolant derivative in [0, 1).
            let roots = real_roots_in(a[1], 2.0 * a[2], 3.0 * a[3], 4.0 * a[4], 0.0, 1.0 - 1e-12);
            for theta in roots {
                let second = 2.0 * a[2] + 6.0 * a[3] * theta + 12.0 * a[4] * theta * theta;
                let v = a[0] + theta * (a[1] + theta * (a[2] + theta * (a[3] + theta * a[4])));
                if second < 0.0 {
                    self.maxima[comp].push(v);
                } else if comp == 2 {
                    self.min_z = self.min_z.min(v);
                }
                let (lo, hi) = &mut self.quarters[q][comp];
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
    }

    fn amplitude(&self) -> f64 {
        let mut amp = 0.0f64;
        for comp in 0..3 {
            let lo = self.quarters.iter().map(|q| q[comp].0).fold(f64::INFINITY, f64::min);
            let hi = self.quarters.iter().map(|q| q[comp].1).fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                amp = amp.max(hi - lo);
            }
        }
        amp
    }

    /// Largest over components of (last-quarter amplitude / first-quarter
    /// amplitude); well below 1 means the oscillation is a decaying transient.
    fn decay_ratio(&self) -> f64 {
        let mut ratio = 0.0f64;
        for comp in 0..3 {
            let (lo1, hi1) = self.quarters[0][comp];
            let (lo4, hi4) = self.quarters[3][comp];
            let a1 = (hi1 - lo1).max(0.0);
            let a4 = (hi4 - lo4).max(0.0);
            if a1 > 1e-12 {
                ratio = ratio.max(a4 / a1);
            }
        }
        ratio
    }
}

/// Sort and merge values closer than the clustering tolerance; returns the
/// cluster means, ascending.
fn cluster(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::new();
    let mut current: Vec<f64> = Vec::new();
    for v in values {
        if let Some(&last) = current.last() {
            if v - last > CLUSTER_TOL {
                out.push(current.iter().sum::<f64>() / current.len() as f64);
                current.clear();
            }
        }
        current.push(v);
    }
    if !current.is_empty() {
        out.push(current.iter().sum::<f64>() / current.len() as f64);
    }
    out
}

/// Integrate through the transient, measure one window, and classify the
/// attractor.
pub fn attractor_summary(params: &ModelParams, ic: &State, cfg: &IntegratorConfig) -> Result<AttractorSummary> {
    cfg.validate()?;
    let settled = crate::dynamics::integrate_final(params, ic, cfg.t_transient, cfg)?;

    let rhs = |v: &Vector3<f64>| params.rhs_unchecked(v);
    let mut stepper = Dopri5::new(&rhs, 0.0, settled.to_vector(), cfg, 3);
    let mut stats = WindowStats::new(0.0, cfg.t_window);
    while stepper.t < cfg.t_window {
        let seg = stepper.step(cfg.t_window)?;
        stats.scan(&seg);
    }
    let window_end = State::from_vector(&stepper.y);

    // Extinction requires a confirmation window where z never recovers.
    let mut extinct = false;
    let mut final_state = window_end;
    if stats.min_z < EXTINCTION_Z_THRESHOLD {
        let mut max_z = 0.0f64;
        let mut confirm = Dopri5::new(&rhs, 0.0, window_end.to_vector(), cfg, 3);
        while confirm.t < cfg.t_window {
            let seg = confirm.step(cfg.t_window)?;
            max_z = max_z.max(seg.eval(1.0)[2]);
            if max_z >= EXTINCTION_Z_THRESHOLD {
                break;
            }
        }
        extinct = max_z < EXTINCTION_Z_THRESHOLD;
        if extinct {
            final_state = State::from_vector(&confirm.y);
        }
    }

    let lyap_max = lyapunov_from(
        params,
        &window_end,
        50.0,
        (cfg.t_window.ceil() as usize).max(2000),
        cfg,
    )?;

    let x_maxima = cluster(std::mem::take(&mut stats.maxima[0]));
    let y_maxima = cluster(std::mem::take(&mut stats.maxima[1]));
    let z_maxima = cluster(std::mem::take(&mut stats.maxima[2]));

    let kind = if extinct {
        AttractorKind::BoundaryExtinction
    } else if stats.amplitude() < EQUILIBRIUM_AMPLITUDE
        || (x_maxima.is_empty() && y_maxima.is_empty() && z_maxima.is_empty())
        || stats.decay_ratio() < 0.5
    {
        AttractorKind::Equilibrium
    } else if lyap_max > CHAOS_LYAPUNOV_THRESHOLD {
        AttractorKind::Chaotic
    } else {
        AttractorKind::Periodic {
            k: z_maxima.len().max(1),
        }
    };

    Ok(AttractorSummary {
        d2: params.d2,
        kind,
        x_maxima,
        y_maxima,
        z_maxima,
        lyap_max,
        min_z: stats.min_z,
        final_state,
    })
}

/// Outcome of an extinction experiment.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtinctionVerdict {
    /// z fell below the threshold at `t_extinct` and stayed there for a full
    /// confirmation window.
    Extinct { t_extinct: f64 },
    /// No confirmed extinction before the horizon; reports the smallest z
    /// seen over the final window.
    Coexistent { min_z_final_window: f64 },
}

/// Integrate from `ic` for up to `horizon` time units and decide whether the
/// top predator dies out (confirmed over an extra `cfg.t_window`) or persists.
pub fn extinction_verdict(
    params: &ModelParams,
    ic: &State,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<ExtinctionVerdict> {
    cfg.validate()?;
    if !(horizon > cfg.t_window) {
        return Err(Error::Domain(format!(
            "extinction horizon {horizon} must exceed the window {}",
            cfg.t_window
        )));
    }
    let rhs = |v: &Vector3<f64>| params.rhs_unchecked(v);
    let mut stepper = Dopri5::new(&rhs, 0.0, ic.to_vector(), cfg, 3);

    let mut candidate: Option<f64> = None; // time z first dipped below threshold
    let mut min_z_final = f64::INFINITY;
    let final_window_start = horizon - cfg.t_window;

    while stepper.t < horizon {
        let seg = stepper.step(horizon)?;
        let z_end = seg.eval(1.0)[2];
        let mut z_lo = seg.eval(0.0)[2].min(z_end);
        // Interior z minima refine both the dip detector and the final-window
        // minimum.
        let a = seg.poly_coeffs(2);
        for theta in real_roots_in(a[1], 2.0 * a[2], 3.0 * a[3], 4.0 * a[4], 0.0, 1.0) {
            let second = 2.0 * a[2] + 6.0 * a[3] * theta + 12.0 * a[4] * theta * theta;
            if second > 0.0 {
                let v = a[0] + theta * (a[1] + theta * (a[2] + theta * (a[3] + theta * a[4])));
                z_lo = z_lo.min(v);
            }
        }
        if seg.t1() >= final_window_start {
            min_z_final = min_z_final.min(z_lo);
        }
        match candidate {
            None => {
                if z_lo < EXTINCTION_Z_THRESHOLD {
                    candidate = Some(seg.t0);
                }
            }
            Some(t_dip) => {
                if z_end >= EXTINCTION_Z_THRESHOLD {
                    candidate = None; // recovered; keep watching
                } else if stepper.t - t_dip >= cfg.t_window {
                    return Ok(ExtinctionVerdict::Extinct { t_extinct: t_dip });
                }
            }
        }
    }
    // A dip right at the horizon without a full confirmation window counts as
    // coexistent-for-now; the caller sees min z anyway.
    Ok(ExtinctionVerdict::Coexistent {
        min_z_final_window: min_z_final,
    })
}

/// Classify the attractor at every grid point.
///
/// Continuation policy runs sequentially in grid order, seeding each point
/// with its predecessor's final state; fixed policy runs the points in
/// parallel. Per-point errors are recorded and the sweep continues.
pub fn sweep(base: &ModelParams, grid: &[f64], policy: &IcPolicy, cfg: &IntegratorConfig) -> Vec<SweepPoint> {
    match *policy {
        IcPolicy::Continuation { first } => {
            let mut out = Vec::with_capacity(grid.len());
            let mut seed = first;
            for &d2 in grid {
                let point = base
                    .with_d2(d2)
                    .and_then(|p| attractor_summary(&p, &seed, cfg));
                match point {
                    Ok(summary) => {
                        seed = summary.final_state;
                        out.push(SweepPoint {
                            d2,
                            summary: Ok(summary),
                        });
                    }
                    Err(e) => out.push(SweepPoint {
                        d2,
                        summary: Err(e.to_string()),
                    }),
                }
            }
            out
        }
        IcPolicy::Fixed { ic } => grid
            .par_iter()
            .map(|&d2| SweepPoint {
                d2,
                summary: base
                    .with_d2(d2)
                    .and_then(|p| attractor_summary(&p, &ic, cfg))
                    .map_err(|e| e.to_string()),
            })
            .collect(),
    }
}

/// Minimum distance between the post-transient attractor (re-integrated from
/// the summary's final state) and a limit cycle's samples. Distances below
/// [`COLLISION_DISTANCE`] flag an imminent or actual collision.
pub fn crisis_check(
    params: &ModelParams,
    cycle: &LimitCycle,
    summary: &AttractorSummary,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    if matches!(summary.kind, AttractorKind::BoundaryExtinction | AttractorKind::Equilibrium) {
        return Err(Error::Precondition(format!(
            "crisis_check needs an oscillatory attractor, got {:?}",
            summary.kind
        )));
    }
    let cycle_pts: Vec<Vector3<f64>> = cycle.samples.iter().map(|s| s.to_vector()).collect();
    let rhs = |v: &Vector3<f64>| params.rhs_unchecked(v);
    let mut stepper = Dopri5::new(&rhs, 0.0, summary.final_state.to_vector(), cfg, 3);
    let mut best = f64::INFINITY;
    let dt = 0.05;
    let mut next_sample = 0.0;
    while stepper.t < cfg.t_window {
        let seg = stepper.step(cfg.t_window)?;
        while next_sample <= seg.t1() {
            if next_sample >= seg.t0 {
                let p = seg.eval_at(next_sample);
                for c in &cycle_pts {
                    let d = (p - c).norm();
                    if d < best {
                        best = d;
                    }
                }
            }
            next_sample += dt;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::holling_table1;

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    #[test]
    fn cluster_merges_within_tolerance() {
        let c = cluster(vec![1.0, 1.00004, 0.5, 0.50009, 0.2]);
        assert_eq!(c.len(), 3);
        assert!((c[0] - 0.2).abs() < 1e-12);
        assert!((c[1] - 0.500045).abs() < 1e-6);
        assert!((c[2] - 1.00002).abs() < 1e-6);
    }

    #[test]
    fn stable_equilibrium_classifies_as_equilibrium() {
        // The ic must start inside the unstable-cycle separatrix around
        // E_bullet; points outside it honestly belong to the planar cycle's
        // basin.
        let params = holling_table1(0.10);
        let s = attractor_summary(&params, &State::new(0.587, 0.385, 0.76), &cfg()).unwrap();
        assert_eq!(s.kind, AttractorKind::Equilibrium);
        assert!(s.lyap_max < CHAOS_LYAPUNOV_THRESHOLD);
    }

    #[test]
    fn single_cycle_classifies_as_periodic_one() {
        let params = holling_table1(0.092);
        let s = attractor_summary(&params, &State::new(0.45, 0.5, 0.8), &cfg()).unwrap();
        assert_eq!(s.kind, AttractorKind::Periodic { k: 1 });
        assert_eq!(s.z_maxima.len(), 1);
        assert!(s.lyap_max.abs() < CHAOS_LYAPUNOV_THRESHOLD);
    }

    #[test]
    fn chaotic_point_classifies_as_chaotic() {
        let params = holling_table1(0.081);
        let s = attractor_summary(&params, &State::new(0.45, 0.5, 0.8), &cfg()).unwrap();
        assert_eq!(s.kind, AttractorKind::Chaotic);
        assert!(s.z_maxima.len() > 4, "chaotic attractor has many distinct maxima");
    }

    #[test]
    fn extinction_point_classifies_as_boundary_extinction() {
        let params = holling_table1(0.07);
        let s = attractor_summary(&params, &State::new(0.45, 0.5, 0.8), &cfg()).unwrap();
        assert_eq!(s.kind, AttractorKind::BoundaryExtinction);
        assert!(s.min_z < EXTINCTION_Z_THRESHOLD);
    }

    #[test]
    fn extinction_verdict_holling_008() {
        let params = holling_table1(0.08);
        let v = extinction_verdict(&params, &State::new(0.5, 0.4, 0.8), 50_000.0, &cfg()).unwrap();
        match v {
            ExtinctionVerdict::Extinct { t_extinct } => {
                assert!(t_extinct > 500.0, "transient only {t_extinct}");
            }
            other => panic!("expected extinction, got {other:?}"),
        }
    }

    #[test]
    fn fixed_policy_sweep_is_parallel_and_ordered() {
        let base = holling_table1(0.1);
        let grid = [0.10, 0.099, 0.098];
        let pts = sweep(
            &base,
            &grid,
            &IcPolicy::Fixed {
                ic: State::new(0.45, 0.5, 0.8),
            },
            &cfg(),
        );
        assert_eq!(pts.len(), 3);
        for (p, d2) in pts.iter().zip(grid) {
            assert_eq!(p.d2, d2);
            assert!(p.summary.is_ok());
        }
    }
}
