//! Nonlinear least-squares transfer of one response family onto another:
//! damped Gauss-Newton in log-parameter space with an analytic residual
//! Jacobian.

use crate::error::{Error, Result};
use crate::response::{ResponseKind, ResponseSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const MAX_ITERATIONS: usize = 500;
const STEP_TOL: f64 = 1e-10;
const SSE_REL_TOL: f64 = 1e-12;

/// Curve-to-curve fitting task: approximate `target` by a member of `family`
/// on a uniform sample of `domain`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitProblem {
    pub target: ResponseSpec,
    pub family: ResponseKind,
    /// Half-open interval `(u_lo, u_hi]`: samples are `u_lo + (u_hi - u_lo) i / n`.
    pub domain: (f64, f64),
    pub n_samples: usize,
    /// Starting parameters; defaults to asymptote + initial-slope matching.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub init: Option<(f64, f64)>,
}

impl FitProblem {
    pub fn new(
        target: ResponseSpec,
        family: ResponseKind,
        domain: (f64, f64),
        n_samples: usize,
        init: Option<(f64, f64)>,
    ) -> Result<Self> {
        if !(domain.0 < domain.1) || domain.0 < 0.0 {
            return Err(Error::Domain(format!("fit domain {domain:?} must satisfy 0 <= lo < hi")));
        }
        if n_samples < 10 {
            return Err(Error::Domain(format!("need at least 10 samples, got {n_samples}")));
        }
        Ok(Self {
            target,
            family,
            domain,
            n_samples,
            init,
        })
    }

    /// The default fitting window: 101 samples on (0, 1], the prey range
    /// bounded by the carrying capacity.
    pub fn with_defaults(target: ResponseSpec, family: ResponseKind) -> Self {
        Self {
            target,
            family,
            domain: (0.0, 1.0),
            n_samples: 101,
            init: None,
        }
    }

    pub fn sample_points(&self) -> Vec<f64> {
        let (lo, hi) = self.domain;
        (1..=self.n_samples)
            .map(|i| lo + (hi - lo) * i as f64 / self.n_samples as f64)
            .collect()
    }

    fn default_init(&self) -> (f64, f64) {
        let asym = self.target.asymptote();
        let slope = self.target.initial_slope();
        match self.family {
            // Ivlev: asymptote is p1, initial slope is p1 p2.
            ResponseKind::Ivlev => (asym, slope / asym),
            // Holling: initial slope is p1, asymptote is p1/p2.
            ResponseKind::Holling2 => (slope, slope / asym),
        }
    }
}

/// A converged (or best-so-far) fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub fitted: ResponseSpec,
    /// Sum of squared residuals on the sample grid.
    pub sse: f64,
    /// Largest absolute deviation on the sample grid.
    pub sup_err: f64,
    pub iterations: usize,
    /// SSE after each accepted step (non-increasing by construction).
    pub sse_trace: Vec<f64>,
}

/// Model value and its parameter gradient at `u`.
fn eval_with_grad(kind: ResponseKind, p1: f64, p2: f64, u: f64) -> (f64, f64, f64) {
    match kind {
        ResponseKind::Holling2 => {
            let den = 1.0 + p2 * u;
            (p1 * u / den, u / den, -p1 * u * u / (den * den))
        }
        ResponseKind::Ivlev => {
            let e = (-p2 * u).exp();
            (p1 * (1.0 - e), 1.0 - e, p1 * u * e)
        }
    }
}

/// Damped Gauss-Newton minimization of the sum of squared deviations.
///
/// Parameters are iterated in log space, which enforces positivity without
/// constraints; the damping multiplier grows tenfold on a failed step and
/// shrinks tenfold on success.
pub fn fit(problem: &FitProblem) -> Result<FitResult> {
    let u = problem.sample_points();
    let t: Vec<f64> = u
        .iter()
        .map(|&ui| problem.target.eval(ui))
        .collect::<Result<_>>()?;

    let (p1_0, p2_0) = problem.init.unwrap_or_else(|| problem.default_init());
    if !(p1_0 > 0.0 && p2_0 > 0.0) {
        return Err(Error::Domain(format!("initial parameters must be positive: ({p1_0}, {p2_0})")));
    }
    let mut q = [p1_0.ln(), p2_0.ln()];

    let sse_at = |q: &[f64; 2]| -> f64 {
        let (p1, p2) = (q[0].exp(), q[1].exp());
        u.iter()
            .zip(&t)
            .map(|(&ui, &ti)| {
                let (f, _, _) = eval_with_grad(problem.family, p1, p2, ui);
                (f - ti) * (f - ti)
            })
            .sum()
    };

    let mut sse = sse_at(&q);
    let mut damping = 1e-3;
    let mut trace = vec![sse];

    for iter in 1..=MAX_ITERATIONS {
        let (p1, p2) = (q[0].exp(), q[1].exp());
        // Normal equations in log space: d f/d q_j = d f/d p_j * p_j.
        let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
        let (mut g1, mut g2) = (0.0, 0.0);
        for (&ui, &ti) in u.iter().zip(&t) {
            let (f, dp1, dp2) = eval_with_grad(problem.family, p1, p2, ui);
            let j1 = dp1 * p1;
            let j2 = dp2 * p2;
            let r = f - ti;
            a11 += j1 * j1;
            a12 += j1 * j2;
            a22 += j2 * j2;
            g1 += j1 * r;
            g2 += j2 * r;
        }
        if sse == 0.0 || (g1 == 0.0 && g2 == 0.0) {
            return Ok(finish(problem, &u, &t, q, sse, iter - 1, trace));
        }
        // Levenberg step: (A + damping I) delta = -g.
        let (b11, b22) = (a11 + damping, a22 + damping);
        let det = b11 * b22 - a12 * a12;
        if det.abs() < 1e-300 {
            break;
        }
        let d1 = (-g1 * b22 + g2 * a12) / det;
        let d2 = (-g2 * b11 + g1 * a12) / det;
        let q_trial = [q[0] + d1, q[1] + d2];
        let sse_trial = sse_at(&q_trial);

        if sse_trial <= sse {
            let improvement = (sse - sse_trial) / sse.max(1e-300);
            let step = (d1 * d1 + d2 * d2).sqrt();
            q = q_trial;
            sse = sse_trial;
            trace.push(sse);
            damping = (damping / 10.0).max(1e-14);
            if step < STEP_TOL || improvement < SSE_REL_TOL {
                return Ok(finish(problem, &u, &t, q, sse, iter, trace));
            }
        } else {
            damping = (damping * 10.0).min(1e14);
        }
    }
    Err(Error::FitNotConverged {
        iterations: MAX_ITERATIONS,
        sse,
        best_p1: q[0].exp(),
        best_p2: q[1].exp(),
    })
}

fn finish(
    problem: &FitProblem,
    u: &[f64],
    t: &[f64],
    q: [f64; 2],
    sse: f64,
    iterations: usize,
    trace: Vec<f64>,
) -> FitResult {
    let (p1, p2) = (q[0].exp(), q[1].exp());
    let sup_err = u
        .iter()
        .zip(t)
        .map(|(&ui, &ti)| {
            let (f, _, _) = eval_with_grad(problem.family, p1, p2, ui);
            (f - ti).abs()
        })
        .fold(0.0, f64::max);
    FitResult {
        fitted: ResponseSpec::new(problem.family, p1, p2).expect("log-space parameters are positive"),
        sse,
        sup_err,
        iterations,
        sse_trace: trace,
    }
}

/// Multi-start variant: 16 starts on a 4x4 log-spaced lattice around the
/// default init (1.5 decades in each direction), run concurrently; the
/// lowest final sse wins, ties broken lexicographically by parameters.
pub fn fit_multistart(problem: &FitProblem) -> Result<FitResult> {
    let (c1, c2) = problem.init.unwrap_or_else(|| problem.default_init());
    let offsets = [-1.5f64, -0.5, 0.5, 1.5];
    let starts: Vec<(f64, f64)> = offsets
        .iter()
        .flat_map(|a| offsets.iter().map(move |b| (c1 * 10f64.powf(*a), c2 * 10f64.powf(*b))))
        .collect();
    let results: Vec<FitResult> = starts
        .par_iter()
        .filter_map(|&init| {
            let mut p = problem.clone();
            p.init = Some(init);
            fit(&p).ok()
        })
        .collect();
    results
        .into_iter()
        .min_by(|a, b| {
            a.sse
                .partial_cmp(&b.sse)
                .unwrap()
                .then(a.fitted.p1.partial_cmp(&b.fitted.p1).unwrap())
                .then(a.fitted.p2.partial_cmp(&b.fitted.p2).unwrap())
        })
        .ok_or(Error::FitNotConverged {
            iterations: MAX_ITERATIONS,
            sse: f64::INFINITY,
            best_p1: c1,
            best_p2: c2,
        })
}
