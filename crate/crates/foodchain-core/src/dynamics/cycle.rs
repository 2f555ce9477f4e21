//! Limit cycles: Newton shooting on the Poincare return map, Floquet
//! stability, criticality of Hopf points, natural-parameter continuation of
//! the cycle branch, and the planar boundary cycle.

use crate::bifurcation::Criticality;
use crate::cubic::eigenvalues3;
use crate::dynamics::integrator::{Dopri5, IntegratorConfig};
use crate::dynamics::poincare::{next_crossing, Section};
use crate::equilibria::{self, EquilibriumKind};
use crate::error::{Error, Result};
use crate::model::{ModelParams, State};
use nalgebra::{Matrix2, Matrix3, SVector, Vector2, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Convergence tolerance for the return-map displacement.
const NEWTON_TOL: f64 = 1e-8;
/// Finite-difference step for the return-map Jacobian.
const FD_STEP: f64 = 1e-7;
const MAX_NEWTON_ITERS: usize = 50;
/// A converged "cycle" whose anchor sits this close to the reference
/// equilibrium is the equilibrium itself.
const EQUILIBRIUM_RADIUS: f64 = 1e-5;
/// Continuation treats cycles whose z dips below this as having collided with
/// the boundary plane. The displacement tolerance cannot distinguish the
/// planar cycle raised by a microscopic z from an interior orbit, so the
/// floor sits at the extinction scale rather than at numerical zero.
const INTERIOR_Z_FLOOR: f64 = 1e-6;
/// Parameter offset used when probing the criticality of a Hopf point.
pub const HOPF_CLASSIFY_OFFSET: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleStability {
    Stable,
    Unstable,
}

/// A converged periodic orbit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitCycle {
    /// Point on the section where the orbit was anchored.
    pub anchor: State,
    pub period: f64,
    #[serde(with = "crate::serde_util::serde_eigs")]
    pub floquet: [Complex64; 3],
    pub stability: CycleStability,
    /// How far the flow-direction multiplier deviates from exactly 1.
    pub trivial_defect: f64,
    /// States over one period, uniformly spaced in time.
    pub samples: Vec<State>,
}

impl LimitCycle {
    /// Largest distance of the orbit from a reference point.
    pub fn amplitude_about(&self, center: &State) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.to_vector() - center.to_vector()).norm())
            .fold(0.0, f64::max)
    }

    /// Smallest top-predator density along the orbit.
    pub fn min_z(&self) -> f64 {
        self.samples.iter().map(|s| s.z).fold(f64::INFINITY, f64::min)
    }
}

/// First-return map in section coordinates; returns the image and the flight time.
fn return_map(
    params: &ModelParams,
    section: &Section,
    x: Vector2<f64>,
    cfg: &IntegratorConfig,
) -> Result<(Vector2<f64>, f64)> {
    let mut start = section.lift(x[0], x[1]);
    // Population coordinates cannot be negative; tiny negative lifts come from
    // Newton overshoot next to an axis.
    for i in 0..3 {
        start[i] = start[i].max(0.0);
    }
    let horizon = 10.0 * cfg.t_window;
    let (hit, t) = next_crossing(params, &start, section, horizon, cfg)?;
    let (u, v) = section.project(&hit);
    Ok((Vector2::new(u, v), t))
}

/// Newton iteration on the 2-D return-map displacement from `guess`.
///
/// The guess must lie near a periodic orbit crossing the section
/// transversally; on convergence the full cycle (period, Floquet multipliers,
/// samples) is assembled.
pub fn find_cycle(
    params: &ModelParams,
    guess: &State,
    section: &Section,
    cfg: &IntegratorConfig,
) -> Result<LimitCycle> {
    let (gu, gv) = section.project(&guess.to_vector());
    let mut x = Vector2::new(gu, gv);
    let mut residual = f64::INFINITY;
    for iter in 0..MAX_NEWTON_ITERS {
        let (px, period) = match return_map(params, section, x, cfg) {
            Ok(r) => r,
            Err(_) => {
                return Err(Error::NoCycle {
                    iterations: iter,
                    residual,
                })
            }
        };
        let r = px - x;
        residual = r.norm();
        if residual < NEWTON_TOL {
            return assemble_cycle(params, section, x, period, cfg);
        }
        // Forward-difference Jacobian of the displacement map.
        let mut jac = Matrix2::zeros();
        for col in 0..2 {
            let mut xp = x;
            xp[col] += FD_STEP;
            let (pxp, _) = match return_map(params, section, xp, cfg) {
                Ok(r) => r,
                Err(_) => {
                    return Err(Error::NoCycle {
                        iterations: iter,
                        residual,
                    })
                }
            };
            let dr = (pxp - xp - r) / FD_STEP;
            jac.set_column(col, &dr);
        }
        let Some(inv) = jac.try_inverse() else {
            return Err(Error::NoCycle {
                iterations: iter,
                residual,
            });
        };
        let delta = -inv * r;
        if !delta.iter().all(|d| d.is_finite()) || delta.norm() > 0.5 {
            return Err(Error::NoCycle {
                iterations: iter,
                residual,
            });
        }
        x += delta;
    }
    Err(Error::NoCycle {
        iterations: MAX_NEWTON_ITERS,
        residual,
    })
}

fn assemble_cycle(
    params: &ModelParams,
    section: &Section,
    x: Vector2<f64>,
    period: f64,
    cfg: &IntegratorConfig,
) -> Result<LimitCycle> {
    let mut anchor_vec = section.lift(x[0], x[1]);
    for i in 0..3 {
        anchor_vec[i] = anchor_vec[i].max(0.0);
    }
    let anchor = State::from_vector(&anchor_vec);

    let m = monodromy(params, &anchor_vec, period, cfg)?;
    let floquet = eigenvalues3(&m);
    // The multiplier nearest 1 is the flow-direction one.
    let trivial_idx = (0..3)
        .min_by(|&a, &b| {
            (floquet[a] - 1.0)
                .norm()
                .partial_cmp(&(floquet[b] - 1.0).norm())
                .unwrap()
        })
        .unwrap();
    let trivial_defect = (floquet[trivial_idx] - 1.0).norm();
    let unstable = floquet
        .iter()
        .enumerate()
        .any(|(i, mu)| i != trivial_idx && mu.norm() > 1.0 + 1e-6);

    // Uniform samples over one period.
    let traj = crate::dynamics::integrate(params, &anchor, period, cfg)?;
    let n_samples = 256;
    let samples: Vec<State> = (0..n_samples)
        .map(|k| traj.state_at(period * k as f64 / n_samples as f64))
        .collect();

    Ok(LimitCycle {
        anchor,
        period,
        floquet,
        stability: if unstable { CycleStability::Unstable } else { CycleStability::Stable },
        trivial_defect,
        samples,
    })
}

/// Fundamental matrix over one period: integrate the variational equation
/// alongside the flow.
fn monodromy(
    params: &ModelParams,
    anchor: &Vector3<f64>,
    period: f64,
    cfg: &IntegratorConfig,
) -> Result<Matrix3<f64>> {
    let rhs = |v: &SVector<f64, 12>| {
        let s = Vector3::new(v[0], v[1], v[2]);
        let f = params.rhs_unchecked(&s);
        let j = params.jacobian_unchecked(&s);
        let mut out = SVector::<f64, 12>::zeros();
        out[0] = f[0];
        out[1] = f[1];
        out[2] = f[2];
        for col in 0..3 {
            let c = Vector3::new(v[3 + 3 * col], v[4 + 3 * col], v[5 + 3 * col]);
            let jc = j * c;
            out[3 + 3 * col] = jc[0];
            out[4 + 3 * col] = jc[1];
            out[5 + 3 * col] = jc[2];
        }
        out
    };
    let mut y0 = SVector::<f64, 12>::zeros();
    for i in 0..3 {
        y0[i] = anchor[i];
        y0[3 + 4 * i] = 1.0; // identity columns
    }
    let mut stepper = Dopri5::new(&rhs, 0.0, y0, cfg, 3);
    stepper.run_to(period)?;
    let y = stepper.y;
    Ok(Matrix3::new(
        y[3], y[6], y[9], y[4], y[7], y[10], y[5], y[8], y[11],
    ))
}

/// Search outward from an equilibrium on the section for the innermost
/// surrounding cycle: bracket the sign change of the radial displacement of
/// the return map, then polish with [`find_cycle`].
pub fn find_cycle_near_equilibrium(
    params: &ModelParams,
    eq: &State,
    cfg: &IntegratorConfig,
) -> Result<LimitCycle> {
    let section = Section::y_plane(eq.y);
    let (eu, ev) = section.project(&eq.to_vector());
    let center = Vector2::new(eu, ev);

    for dir in [Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)] {
        // Radial expansion of one return, as a function of start radius.
        let psi = |r: f64| -> Option<f64> {
            let (px, _) = return_map(params, &section, center + r * dir, cfg).ok()?;
            Some((px - center).norm() - r)
        };
        let mut r_prev = 1e-4;
        let Some(mut psi_prev) = psi(r_prev) else { continue };
        let mut bracket = None;
        let mut r = r_prev * 1.6;
        while r < 0.35 {
            let Some(p) = psi(r) else { break };
            if psi_prev * p < 0.0 {
                bracket = Some((r_prev, r));
                break;
            }
            r_prev = r;
            psi_prev = p;
            r *= 1.6;
        }
        let Some((mut lo, mut hi)) = bracket else { continue };
        // A short bisection gives Newton a good starting radius.
        for _ in 0..20 {
            let mid = 0.5 * (lo + hi);
            let Some(pm) = psi(mid) else { break };
            let Some(pl) = psi(lo) else { break };
            if pl * pm <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let r0 = 0.5 * (lo + hi);
        let guess = section.lift(center[0] + r0 * dir[0], center[1] + r0 * dir[1]);
        match find_cycle(params, &State::from_vector(&guess), &section, cfg) {
            Ok(cycle) => {
                if (cycle.anchor.to_vector() - eq.to_vector()).norm() > EQUILIBRIUM_RADIUS {
                    return Ok(cycle);
                }
            }
            Err(_) => continue,
        }
    }
    Err(Error::NoCycle {
        iterations: 0,
        residual: f64::NAN,
    })
}

/// Decide whether the Hopf point at `d2_hopf` is sub- or supercritical by
/// Floquet-classifying the small cycle just past the threshold; the bifurcating
/// cycle lives on the side where it exists (below for both kinds here).
pub fn classify_hopf(base: &ModelParams, d2_hopf: f64, cfg: &IntegratorConfig) -> Result<Criticality> {
    for offset in [-HOPF_CLASSIFY_OFFSET, HOPF_CLASSIFY_OFFSET] {
        let Ok(params) = base.with_d2(d2_hopf + offset) else { continue };
        let Some(upper) = equilibria::interior_equilibria(&params)
            .into_iter()
            .find(|p| p.kind == EquilibriumKind::InteriorUpper)
        else {
            continue;
        };
        if let Ok(cycle) = find_cycle_near_equilibrium(&params, &upper.coords, cfg) {
            return Ok(match cycle.stability {
                CycleStability::Unstable => Criticality::Sub,
                CycleStability::Stable => Criticality::Super,
            });
        }
    }
    Ok(Criticality::Undetermined)
}

/// A continued cycle branch.
#[derive(Debug, Clone)]
pub struct ContinuationBranch {
    /// `(d2, cycle)` in continuation order, starting from the seed.
    pub points: Vec<(f64, LimitCycle)>,
    /// True when the step size underflowed before `d2_end` was reached
    /// (branch termination, e.g. a collision with the boundary cycle).
    pub terminated_early: bool,
}

impl ContinuationBranch {
    pub fn last_d2(&self) -> f64 {
        self.points.last().map(|(d2, _)| *d2).expect("branch has its seed")
    }
}

/// Natural-parameter continuation of a cycle in d2: step, warm-start Newton
/// from the previous anchor, halve the step on failure, stop at `d2_end` or
/// when the step underflows 1e-6.
pub fn continue_cycle(
    base: &ModelParams,
    start: &LimitCycle,
    d2_start: f64,
    d2_end: f64,
    step: f64,
    cfg: &IntegratorConfig,
) -> Result<ContinuationBranch> {
    if !(step > 0.0) {
        return Err(Error::Precondition(format!("continuation step must be positive, got {step}")));
    }
    let sign = (d2_end - d2_start).signum();
    let mut points = vec![(d2_start, start.clone())];
    let mut d2 = d2_start;
    let mut h = step;
    let mut terminated_early = false;

    while (d2_end - d2) * sign > 1e-12 {
        let d2_next = if (d2_end - d2).abs() <= h { d2_end } else { d2 + sign * h };
        match continue_one_point(base, points.last().map(|(_, c)| c).unwrap(), d2_next, cfg) {
            Some(cycle) => {
                points.push((d2_next, cycle));
                d2 = d2_next;
                h = (h * 2.0).min(step);
            }
            None => {
                h *= 0.5;
                if h < 1e-6 {
                    terminated_early = true;
                    break;
                }
            }
        }
    }
    if points.len() == 1 && terminated_early {
        return Err(Error::NoCycle {
            iterations: 0,
            residual: f64::NAN,
        });
    }
    Ok(ContinuationBranch {
        points,
        terminated_early,
    })
}

fn continue_one_point(
    base: &ModelParams,
    prev: &LimitCycle,
    d2: f64,
    cfg: &IntegratorConfig,
) -> Option<LimitCycle> {
    let params = base.with_d2(d2).ok()?;
    let ys = equilibria::y_star(&params).ok()?;
    let section = Section::y_plane(ys);
    // Warm start: previous anchor carried onto the new section.
    let guess = State::new(prev.anchor.x, ys, prev.anchor.z);
    let cycle = find_cycle(&params, &guess, &section, cfg).ok()?;
    // Guard against sliding onto the planar boundary cycle (z = 0), which is
    // a perfectly valid fixed point of the same return map.
    if cycle.min_z() < INTERIOR_Z_FLOOR || cycle.trivial_defect > 1e-4 {
        return None;
    }
    Some(cycle)
}

/// The boundary cycle and its transverse behaviour.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryCycle {
    pub cycle: LimitCycle,
    /// Average of `f2(y(t)) - d2` over one period: positive means the top
    /// predator can invade (the planar cycle repels transversally).
    pub transverse_exponent: f64,
}

/// Compute the attracting limit cycle of the planar (z = 0) subsystem and its
/// transverse stability.
///
/// Requires the boundary equilibrium to be repelling within the plane;
/// otherwise the subsystem settles onto it and there is no cycle.
pub fn boundary_cycle(params: &ModelParams, cfg: &IntegratorConfig) -> Result<BoundaryCycle> {
    let (xb, yb) = equilibria::boundary_coords(params).ok_or_else(|| {
        Error::NotFound("boundary equilibrium absent: d1 >= min(f1(1), f1_inf)".into())
    })?;
    let planar_trace = 1.0 - 2.0 * xb - yb * params.f1.deriv_unchecked(xb);
    if planar_trace <= 0.0 {
        return Err(Error::NoCycle {
            iterations: 0,
            residual: planar_trace,
        });
    }

    let rhs2 = |v: &Vector2<f64>| {
        let (x, y) = (v[0], v[1]);
        let f1x = params.f1.eval_unchecked(x);
        Vector2::new(x - x * x - f1x * y, f1x * y - params.d1 * y)
    };

    // Settle onto the planar attractor.
    let mut stepper = Dopri5::new(&rhs2, 0.0, Vector2::new(xb + 0.05, yb), cfg, 2);
    stepper.run_to(1500.0).map_err(|e| e_cycle(e))?;
    if (stepper.y - Vector2::new(xb, yb)).norm() < 1e-6 {
        return Err(Error::NoCycle {
            iterations: 0,
            residual: 0.0,
        });
    }

    // March to an upward crossing of y = yb, then Newton on the crossing x.
    let settled = stepper.y;
    let crossing_from = |x0: f64| -> Result<(f64, f64)> {
        planar_crossing(&rhs2, Vector2::new(x0, yb), yb, 10.0 * cfg.t_window, cfg)
    };
    let (mut u, _) = planar_crossing(&rhs2, settled, yb, 10.0 * cfg.t_window, cfg).map_err(e_cycle)?;
    let mut period = 0.0;
    let mut converged = false;
    for _ in 0..MAX_NEWTON_ITERS {
        let (pu, t) = crossing_from(u).map_err(e_cycle)?;
        let r = pu - u;
        period = t;
        if r.abs() < NEWTON_TOL {
            converged = true;
            break;
        }
        let (pu2, _) = crossing_from(u + FD_STEP).map_err(e_cycle)?;
        let slope = (pu2 - FD_STEP - pu) / FD_STEP;
        if slope.abs() < 1e-12 {
            break;
        }
        u -= r / slope;
    }
    if !converged {
        return Err(Error::NoCycle {
            iterations: MAX_NEWTON_ITERS,
            residual: f64::NAN,
        });
    }

    let anchor = Vector3::new(u, yb, 0.0);
    let m = monodromy(params, &anchor, period, cfg)?;
    let floquet = eigenvalues3(&m);
    let trivial_idx = (0..3)
        .min_by(|&a, &b| {
            (floquet[a] - 1.0)
                .norm()
                .partial_cmp(&(floquet[b] - 1.0).norm())
                .unwrap()
        })
        .unwrap();
    let trivial_defect = (floquet[trivial_idx] - 1.0).norm();
    let unstable = floquet
        .iter()
        .enumerate()
        .any(|(i, mu)| i != trivial_idx && mu.norm() > 1.0 + 1e-6);

    // Quadrature of f2(y(t)) - d2 along one period (the transverse rate).
    let rhs_aug = |v: &Vector3<f64>| {
        let planar = rhs2(&Vector2::new(v[0], v[1]));
        Vector3::new(planar[0], planar[1], params.f2.eval_unchecked(v[1]) - params.d2)
    };
    let mut quad = Dopri5::new(&rhs_aug, 0.0, Vector3::new(u, yb, 0.0), cfg, 2);
    quad.run_to(period)?;
    let transverse_exponent = quad.y[2] / period;

    let anchor_state = State::from_vector(&anchor);
    let traj = crate::dynamics::integrate(params, &anchor_state, period, cfg)?;
    let samples: Vec<State> = (0..256)
        .map(|k| traj.state_at(period * k as f64 / 256.0))
        .collect();

    Ok(BoundaryCycle {
        cycle: LimitCycle {
            anchor: anchor_state,
            period,
            floquet,
            stability: if unstable { CycleStability::Unstable } else { CycleStability::Stable },
            trivial_defect,
            samples,
        },
        transverse_exponent,
    })
}

fn e_cycle(e: Error) -> Error {
    match e {
        Error::NoCycle { .. } => e,
        _ => Error::NoCycle {
            iterations: 0,
            residual: f64::NAN,
        },
    }
}

/// Next upward crossing of `y = level` for the planar subsystem; returns the
/// crossing x and the flight time.
fn planar_crossing(
    rhs2: &dyn Fn(&Vector2<f64>) -> Vector2<f64>,
    start: Vector2<f64>,
    level: f64,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<(f64, f64)> {
    let mut stepper = Dopri5::new(rhs2, 0.0, start, cfg, 2);
    while stepper.t < horizon {
        let seg = stepper.step(horizon)?;
        const SUBDIV: usize = 8;
        let g = |theta: f64| seg.eval(theta)[1] - level;
        let mut th0 = 0.0;
        let mut g0 = g(0.0);
        for k in 1..=SUBDIV {
            let th1 = k as f64 / SUBDIV as f64;
            let g1 = g(th1);
            if g0 < 0.0 && g1 >= 0.0 {
                let thc = crate::solve::bisect_refine(g, th0, th1, (1e-10 / seg.h).min(1e-10));
                let t = seg.t0 + thc * seg.h;
                if t > 1e-3 {
                    return Ok((seg.eval(thc)[0], t));
                }
            }
            th0 = th1;
            g0 = g1;
        }
    }
    Err(Error::Recurrence { horizon })
}
