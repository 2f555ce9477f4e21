//! Saddle-node, transcritical, and Hopf thresholds in the top-predator
//! mortality d2, plus the transversality diagnostics that certify each
//! bifurcation is non-degenerate.

use crate::dynamics::{self, IntegratorConfig};
use crate::equilibria::{self, EquilibriumKind};
use crate::error::{Error, Result};
use crate::model::{ModelParams, State};
use crate::solve::{bisect, bisect_refine};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Threshold bisection tolerance in d2.
const D2_TOL: f64 = 1e-10;

/// Hopf cycle direction: subcritical births an unstable cycle, supercritical
/// a stable one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criticality {
    Sub,
    Super,
    Undetermined,
}

/// One Hopf threshold.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HopfPoint {
    pub d2: f64,
    pub criticality: Criticality,
}

/// All located thresholds plus their transversality diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdReport {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d2_sn: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sn_point: Option<State>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d2_tc: Option<f64>,
    pub d2_hopf: Vec<HopfPoint>,
    pub transversality: BTreeMap<String, f64>,
}

/// Locate the saddle-node threshold: the d2 at which the line `1 - x` is
/// tangent to `y*(d2) tilde_f1(x)`.
///
/// For each d2 the candidate tangency abscissa solves
/// `y* tilde_f1'(x_c) = -1`; the returned threshold is the root of the
/// tangency residual `r(d2) = 1 - x_c - y* tilde_f1(x_c)`.
pub fn find_saddle_node(base: &ModelParams, search: (f64, f64)) -> Result<(f64, State)> {
    let f2_sup = base.f2.asymptote();
    if !(search.0 > 0.0 && search.1 > search.0 && search.1 < f2_sup) {
        return Err(Error::Precondition(format!(
            "saddle-node search interval {search:?} must lie inside (0, {f2_sup})"
        )));
    }
    // Maximum of g(x) = 1 - x - y* tilde_f1(x) over (0, 1): attained at the
    // interior tangency abscissa when it exists, else at the endpoint toward
    // which g increases. Its sign change in d2 is the fold.
    let residual = |d2: f64| -> Option<f64> {
        const EPS: f64 = 1e-9;
        let p = base.with_d2(d2).ok()?;
        let ys = equilibria::y_star(&p).ok()?;
        let g = |x: f64| 1.0 - x - ys * p.f1.tilde_unchecked(x);
        Some(match tangency_abscissa(&p, ys) {
            Some(xc) => g(xc),
            None => {
                if ys * p.f1.tilde_deriv_unchecked(EPS) + 1.0 >= 0.0 {
                    g(EPS) // g decreasing on all of (0, 1)
                } else {
                    g(1.0) // g increasing on all of (0, 1)
                }
            }
        })
    };
    let (lo, hi) = search;
    let (rlo, rhi) = match (residual(lo), residual(hi)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::NotFound(
                "tangency abscissa undefined somewhere in the saddle-node search interval".into(),
            ))
        }
    };
    if rlo * rhi > 0.0 {
        return Err(Error::NotFound(format!(
            "no saddle-node sign change in [{lo}, {hi}] (r = {rlo}, {rhi})"
        )));
    }
    let d2_sn = bisect(|d2| residual(d2).unwrap_or(f64::NAN), lo, hi, D2_TOL);
    let p = base.with_d2(d2_sn)?;
    let ys = equilibria::y_star(&p)?;
    let xc = tangency_abscissa(&p, ys)
        .ok_or_else(|| Error::NotFound("tangency abscissa lost at the located threshold".into()))?;
    let z = (p.f1.eval_unchecked(xc) - p.d1) / p.f2.tilde_unchecked(ys);
    Ok((d2_sn, State::new(xc, ys, z)))
}

/// Solve `ys * tilde_f1'(x) = -1` on (0, 1); `tilde_f1'` is increasing, so the
/// root is unique when it exists.
fn tangency_abscissa(params: &ModelParams, ys: f64) -> Option<f64> {
    const EPS: f64 = 1e-9;
    let h = |x: f64| ys * params.f1.tilde_deriv_unchecked(x) + 1.0;
    if h(EPS) >= 0.0 || h(1.0 - EPS) <= 0.0 {
        return None;
    }
    Some(bisect_refine(h, EPS, 1.0 - EPS, 1e-13))
}

/// Sotomayor diagnostics at the saddle-node point:
/// `(w^T F_d2, w^T D2F(v, v)) = (-f1(x)/f2'(y), -2 - f1''(x) y)`.
/// Both must be nonzero for a non-degenerate fold.
pub fn sn_transversality(params: &ModelParams, e: &State) -> (f64, f64) {
    let q1 = -params.f1.eval_unchecked(e.x) / params.f2.deriv_unchecked(e.y);
    let q2 = -2.0 - params.f1.deriv2(e.x).expect("x >= 0") * e.y;
    (q1, q2)
}

/// Transcritical threshold `d2_T = f2(y_b)`, computed in closed form from the
/// boundary equilibrium.
pub fn find_transcritical(base: &ModelParams) -> Result<f64> {
    let (_, yb) = equilibria::boundary_coords(base).ok_or_else(|| {
        Error::NotFound("boundary equilibrium absent: d1 >= min(f1(1), f1_inf)".into())
    })?;
    base.f2.eval(yb)
}

/// Sotomayor diagnostics at the transcritical point, in the order
/// `(w^T F_d2, w^T DF_d2 v, w^T D2F(v, v))`. The first vanishes identically;
/// the other two must be nonzero.
pub fn tc_transversality(base: &ModelParams) -> Result<(f64, f64, f64)> {
    let (xb, yb) = equilibria::boundary_coords(base).ok_or_else(|| {
        Error::NotFound("boundary equilibrium absent: d1 >= min(f1(1), f1_inf)".into())
    })?;
    let f1d = base.f1.deriv_unchecked(xb);
    let f2yb = base.f2.eval_unchecked(yb);
    let q1 = 0.0; // third component of F_d2 is -z, and z = 0 on the boundary
    let q2 = -yb * f1d / f2yb;
    let v2 = (1.0 - 2.0 * xb - yb * f1d) / f1d;
    let v3 = yb * f1d / f2yb;
    let q3 = 2.0 * base.f2.deriv_unchecked(yb) * v2 * v3;
    Ok((q1, q2, q3))
}

/// Hopf thresholds on the upper coexistence branch, located as sign changes
/// of `Delta(d2) = P1 P2 - P0` and kept only where Liu's side conditions
/// `P0 > 0`, `P2 > 0` and `dDelta/dd2 != 0` hold.
pub fn find_hopf(base: &ModelParams, search: (f64, f64)) -> Result<Vec<f64>> {
    find_hopf_impl(base, search, 200)
}

fn upper_delta(base: &ModelParams, d2: f64) -> Option<(f64, crate::model::CharCoeffs)> {
    let p = base.with_d2(d2).ok()?;
    let pt = equilibria::interior_equilibria(&p)
        .into_iter()
        .find(|q| q.kind == EquilibriumKind::InteriorUpper)?;
    let cc = p.char_coeffs(&pt.coords).ok()?;
    Some((cc.hurwitz_delta(), cc))
}

fn find_hopf_impl(base: &ModelParams, search: (f64, f64), n: usize) -> Result<Vec<f64>> {
    if !(search.0 > 0.0 && search.1 > search.0) {
        return Err(Error::Precondition(format!("bad Hopf search interval {search:?}")));
    }
    // Sample Delta along the branch; skip grid points where the branch is
    // absent (effectively shrinking the interval to where it exists).
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let d2 = search.0 + (search.1 - search.0) * i as f64 / n as f64;
        if let Some((delta, _)) = upper_delta(base, d2) {
            samples.push((d2, delta));
        }
    }
    if samples.len() < 2 {
        return Err(Error::NotFound(
            "upper coexistence branch absent on the Hopf search interval".into(),
        ));
    }
    let mut roots = Vec::new();
    for w in samples.windows(2) {
        let ((a, fa), (b, fb)) = (w[0], w[1]);
        if fa == 0.0 || fa * fb >= 0.0 {
            continue;
        }
        let root = bisect(
            |d2| upper_delta(base, d2).map(|(d, _)| d).unwrap_or(f64::NAN),
            a,
            b,
            D2_TOL,
        );
        // Liu's criterion side conditions.
        let Some((_, cc)) = upper_delta(base, root) else { continue };
        if !(cc.p0 > 0.0 && cc.p2 > 0.0) {
            continue;
        }
        let fd = 1e-6;
        let (dm, dp) = match (upper_delta(base, root - fd), upper_delta(base, root + fd)) {
            (Some((m, _)), Some((p, _))) => (m, p),
            _ => continue,
        };
        if ((dp - dm) / (2.0 * fd)).abs() < 1e-9 {
            continue;
        }
        roots.push(root);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(roots)
}

/// [`find_hopf`] plus criticality classification by Floquet analysis of the
/// small cycle just past each threshold.
pub fn find_hopf_classified(
    base: &ModelParams,
    search: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Vec<HopfPoint>> {
    let roots = find_hopf(base, search)?;
    Ok(roots
        .into_iter()
        .map(|d2| HopfPoint {
            d2,
            criticality: dynamics::classify_hopf(base, d2, cfg).unwrap_or(Criticality::Undetermined),
        })
        .collect())
}

/// Assemble the full report: transcritical (closed form), saddle-node,
/// Hopf points, and the transversality diagnostics.
///
/// `classify` enables the simulation-based Hopf criticality check, which
/// costs a few cycle searches.
pub fn threshold_report(
    base: &ModelParams,
    classify: bool,
    cfg: &IntegratorConfig,
) -> Result<ThresholdReport> {
    let mut transversality = BTreeMap::new();

    let d2_tc = match find_transcritical(base) {
        Ok(v) => {
            let (q1, q2, q3) = tc_transversality(base)?;
            transversality.insert("transcritical.w_f_d2".into(), q1);
            transversality.insert("transcritical.w_df_v".into(), q2);
            transversality.insert("transcritical.w_d2f_vv".into(), q3);
            Some(v)
        }
        Err(_) => None,
    };

    let sn_lo = d2_tc.unwrap_or(1e-6 * base.f2.asymptote());
    let sn_hi = 0.999 * base.f2.asymptote();
    let (d2_sn, sn_point) = match find_saddle_node(base, (sn_lo, sn_hi)) {
        Ok((d2, e)) => {
            let p = base.with_d2(d2)?;
            let (q1, q2) = sn_transversality(&p, &e);
            transversality.insert("saddle_node.w_f_d2".into(), q1);
            transversality.insert("saddle_node.w_d2f_vv".into(), q2);
            (Some(d2), Some(e))
        }
        Err(_) => (None, None),
    };

    let hopf_lo = d2_tc.map(|t| t + 1e-6).unwrap_or(1e-6);
    let hopf_hi = d2_sn.map(|s| s - 1e-8).unwrap_or(0.999 * base.f2.asymptote());
    let d2_hopf = if hopf_hi > hopf_lo {
        let roots = find_hopf(base, (hopf_lo, hopf_hi)).unwrap_or_default();
        for (i, d2) in roots.iter().enumerate() {
            let fd = 1e-6;
            if let (Some((dm, _)), Some((dp, _))) =
                (upper_delta(base, d2 - fd), upper_delta(base, d2 + fd))
            {
                transversality.insert(format!("hopf{i}.ddelta_dd2"), (dp - dm) / (2.0 * fd));
            }
        }
        roots
            .into_iter()
            .map(|d2| HopfPoint {
                d2,
                criticality: if classify {
                    dynamics::classify_hopf(base, d2, cfg).unwrap_or(Criticality::Undetermined)
                } else {
                    Criticality::Undetermined
                },
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(ThresholdReport {
        d2_sn,
        sn_point,
        d2_tc,
        d2_hopf,
        transversality,
    })
}
