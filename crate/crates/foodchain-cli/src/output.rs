//! Output rendering: CSV at full precision, and the static SVG sweep diagram.

use foodchain_core::dynamics::{AttractorKind, ContinuationBranch, SweepPoint, Trajectory};
use foodchain_core::equilibria::{self, EquilibriumKind, Stability};
use foodchain_core::model::ModelParams;

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn simulate_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,x,y,z\n");
    for (t, s) in traj.times().iter().zip(traj.states()) {
        out.push_str(&format!("{},{},{},{}\n", fmt(*t), fmt(s.x), fmt(s.y), fmt(s.z)));
    }
    out
}

fn kind_label(kind: &AttractorKind) -> (&'static str, usize) {
    match kind {
        AttractorKind::Equilibrium => ("equilibrium", 0),
        AttractorKind::Periodic { k } => ("periodic", *k),
        AttractorKind::Chaotic => ("chaotic", 0),
        AttractorKind::BoundaryExtinction => ("boundary_extinction", 0),
    }
}

/// Summary rows first, then one row per recorded extremum.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("d2,kind,k,lyap_max\n");
    for p in points {
        match &p.summary {
            Ok(s) => {
                let (label, k) = kind_label(&s.kind);
                out.push_str(&format!("{},{label},{k},{}\n", fmt(p.d2), fmt(s.lyap_max)));
            }
            Err(_) => out.push_str(&format!("{},error,0,nan\n", fmt(p.d2))),
        }
    }
    out.push_str("d2,variable,extremum_value\n");
    for p in points {
        if let Ok(s) = &p.summary {
            for (var, values) in [("x", &s.x_maxima), ("y", &s.y_maxima), ("z", &s.z_maxima)] {
                for v in values {
                    out.push_str(&format!("{},{var},{}\n", fmt(p.d2), fmt(*v)));
                }
            }
        }
    }
    out
}

/// Static z-vs-d2 bifurcation diagram: blue for stable objects (attractor
/// extrema, stable equilibria, the planar cycle), red for unstable equilibria,
/// magenta for the continued unstable cycle.
pub fn sweep_svg(
    base: &ModelParams,
    points: &[SweepPoint],
    ulc: Option<&ContinuationBranch>,
) -> String {
    const W: f64 = 900.0;
    const H: f64 = 600.0;
    const M: f64 = 50.0;

    let d2s: Vec<f64> = points.iter().map(|p| p.d2).collect();
    let (d2_min, d2_max) = d2s
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mut z_max = 0.0f64;
    for p in points {
        if let Ok(s) = &p.summary {
            for v in &s.z_maxima {
                z_max = z_max.max(*v);
            }
        }
    }
    if let Some(branch) = ulc {
        for (_, c) in &branch.points {
            for s in &c.samples {
                z_max = z_max.max(s.z);
            }
        }
    }
    // Equilibrium branches can sit above the attractor data.
    for &d2 in &d2s {
        if let Ok(p) = base.with_d2(d2) {
            for e in equilibria::interior_equilibria(&p) {
                z_max = z_max.max(e.coords.z);
            }
        }
    }
    z_max = (z_max * 1.05).max(1e-6);
    let sx = |d2: f64| M + (d2 - d2_min) / (d2_max - d2_min).max(1e-300) * (W - 2.0 * M);
    let sy = |z: f64| H - M - z / z_max * (H - 2.0 * M);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" fill=\"white\" stroke=\"black\"/>\n",
        W - 2.0 * M,
        H - 2.0 * M
    ));
    svg.push_str(&format!(
        "<text x=\"{M}\" y=\"{}\" font-size=\"12\">d2 = {d2_min:.4}</text>\n",
        H - M + 20.0
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">d2 = {d2_max:.4}</text>\n",
        W - M,
        H - M + 20.0
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">z up to {z_max:.3}</text>\n",
        M,
        M - 10.0
    ));

    // Planar cycle lives at z = 0 (stable object: blue).
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"blue\" stroke-width=\"1\"/>\n",
        sx(d2_min),
        sy(0.0),
        sx(d2_max),
        sy(0.0)
    ));

    // Equilibrium branches.
    for &d2 in &d2s {
        let Ok(p) = base.with_d2(d2) else { continue };
        for e in equilibria::interior_equilibria(&p) {
            let color = match (e.kind, e.stability) {
                (EquilibriumKind::InteriorUpper, Stability::Stable) => "blue",
                _ => "red",
            };
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.4\" fill=\"{color}\"/>\n",
                sx(d2),
                sy(e.coords.z)
            ));
        }
    }

    // Attractor extrema (stable by construction: blue).
    for p in points {
        if let Ok(s) = &p.summary {
            if s.z_maxima.is_empty() {
                svg.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.0\" fill=\"blue\"/>\n",
                    sx(p.d2),
                    sy(s.min_z.max(0.0))
                ));
            }
            for v in &s.z_maxima {
                svg.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.0\" fill=\"blue\"/>\n",
                    sx(p.d2),
                    sy(*v)
                ));
            }
        }
    }

    // Unstable cycle branch (magenta): plot the z-range of each cycle.
    if let Some(branch) = ulc {
        for (d2, c) in &branch.points {
            if *d2 < d2_min || *d2 > d2_max {
                continue;
            }
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for s in &c.samples {
                lo = lo.min(s.z);
                hi = hi.max(s.z);
            }
            for v in [lo, hi] {
                svg.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.0\" fill=\"magenta\"/>\n",
                    sx(*d2),
                    sy(v)
                ));
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}
