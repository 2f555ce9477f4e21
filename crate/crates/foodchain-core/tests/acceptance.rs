//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use foodchain_core::bifurcation::{self, Criticality};
use foodchain_core::dynamics::{
    self, attractor_summary, continue_cycle, crisis_check, extinction_verdict,
    find_cycle_near_equilibrium, lyapunov_max, sweep, AttractorKind, CycleStability,
    ExtinctionVerdict, IcPolicy, IntegratorConfig, COLLISION_DISTANCE,
};
use foodchain_core::equilibria::{self, EquilibriumKind};
use foodchain_core::fitting::{fit, FitProblem};
use foodchain_core::model::{holling_table1, ivlev_table2, ModelParams, State};
use foodchain_core::response::{ResponseKind, ResponseSpec, AXIOM_GRID};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

fn criterion<F: FnOnce() -> String>(id: u32, name: &str, body: F) {
    let result = catch_unwind(AssertUnwindSafe(body));
    match result {
        Ok(details) => println!("criterion {id:02} ({name}): PASS — {details}"),
        Err(e) => {
            println!("criterion {id:02} ({name}): FAIL");
            std::panic::resume_unwind(e);
        }
    }
}

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

/// Upper-branch interior point (E_bullet).
fn upper_point(params: &ModelParams) -> State {
    equilibria::interior_equilibria(params)
        .into_iter()
        .find(|p| p.kind == EquilibriumKind::InteriorUpper)
        .expect("upper interior point")
        .coords
}

fn threshold_values(base: &ModelParams) -> (f64, f64, f64, f64) {
    let d2_tc = bifurcation::find_transcritical(base).unwrap();
    let (d2_sn, _) = bifurcation::find_saddle_node(base, (d2_tc, 0.999 * base.f2.asymptote())).unwrap();
    let hopf = bifurcation::find_hopf(base, (d2_tc + 1e-6, d2_sn - 1e-8)).unwrap();
    assert_eq!(hopf.len(), 2, "expected exactly two Hopf thresholds");
    (d2_sn, hopf[1], hopf[0], d2_tc)
}

#[test]
fn criterion_01_thresholds_holling() {
    criterion(1, "thresholds, Holling table 1", || {
        let start = Instant::now();
        let (sn, h1, h2, tc) = threshold_values(&holling_table1(0.1));
        let elapsed = start.elapsed().as_secs_f64();
        assert!((sn - 0.1049651383).abs() < 1e-6, "d2_S = {sn}");
        assert!((h1 - 0.10406993).abs() < 1e-6, "d2_H1 = {h1}");
        assert!((h2 - 0.09453397).abs() < 1e-6, "d2_H2 = {h2}");
        assert!((tc - 0.09244019).abs() < 1e-6, "d2_T = {tc}");
        assert!(elapsed < 5.0, "took {elapsed:.2} s");
        format!("S {sn:.10}, H1 {h1:.8}, H2 {h2:.8}, T {tc:.8} in {elapsed:.2} s")
    });
}

#[test]
fn criterion_02_thresholds_ivlev() {
    criterion(2, "thresholds, Ivlev table 2", || {
        let start = Instant::now();
        let (sn, h1, h2, tc) = threshold_values(&ivlev_table2(0.1));
        let elapsed = start.elapsed().as_secs_f64();
        assert!((sn - 0.10405163).abs() < 1e-6, "d2_S = {sn}");
        assert!((h1 - 0.10275556).abs() < 1e-6, "d2_H1 = {h1}");
        assert!((h2 - 0.09840295).abs() < 1e-6, "d2_H2 = {h2}");
        assert!((tc - 0.09544625).abs() < 1e-6, "d2_T = {tc}");
        assert!(elapsed < 5.0, "took {elapsed:.2} s");
        format!("S {sn:.8}, H1 {h1:.8}, H2 {h2:.8}, T {tc:.8} in {elapsed:.2} s")
    });
}

#[test]
fn criterion_03_transcritical_closed_form() {
    criterion(3, "transcritical closed-form cross-check", || {
        // Independent route: boundary point from the explicit inverses, then
        // d2_T = f2(y_b), all in plain arithmetic.
        let holling = bifurcation::find_transcritical(&holling_table1(0.1)).unwrap();
        let xb = 0.4 / (4.98 - 6.2 * 0.4);
        let yb = xb * (1.0 - xb) / 0.4;
        let reference = 0.46 * yb / (1.0 + 2.0 * yb);
        assert!((holling - reference).abs() < 1e-10, "holling {holling} vs {reference}");

        let ivlev = bifurcation::find_transcritical(&ivlev_table2(0.1)).unwrap();
        let xb = (1.0f64 / (1.0 - 0.4 / 0.67)).ln() / 5.349;
        let yb = xb * (1.0 - xb) / 0.4;
        let reference_i = 0.1647 * (1.0 - (-2.457f64 * yb).exp());
        assert!((ivlev - reference_i).abs() < 1e-10, "ivlev {ivlev} vs {reference_i}");
        format!("holling |Δ| = {:.1e}, ivlev |Δ| = {:.1e}", (holling - reference).abs(), (ivlev - reference_i).abs())
    });
}

#[test]
fn criterion_04_hopf_criticality() {
    criterion(4, "Hopf criticality, Floquet-verified", || {
        let start = Instant::now();
        let mut details = Vec::new();
        for (label, base) in [("holling", holling_table1(0.1)), ("ivlev", ivlev_table2(0.1))] {
            let (_, h1, h2, _) = threshold_values(&base);
            // H1: a converged UNSTABLE cycle must exist just below.
            let p = base.with_d2(h1 - 0.0005).unwrap();
            let ulc = find_cycle_near_equilibrium(&p, &upper_point(&p), &cfg()).unwrap();
            assert_eq!(ulc.stability, CycleStability::Unstable, "{label} H1 cycle");
            assert!(ulc.trivial_defect < 1e-4);
            assert_eq!(
                dynamics::classify_hopf(&base, h1, &cfg()).unwrap(),
                Criticality::Sub,
                "{label} H1"
            );
            // H2: a converged STABLE cycle just below.
            let p = base.with_d2(h2 - 0.0005).unwrap();
            let slc = find_cycle_near_equilibrium(&p, &upper_point(&p), &cfg()).unwrap();
            assert_eq!(slc.stability, CycleStability::Stable, "{label} H2 cycle");
            assert!(slc.trivial_defect < 1e-4);
            assert_eq!(
                dynamics::classify_hopf(&base, h2, &cfg()).unwrap(),
                Criticality::Super,
                "{label} H2"
            );
            details.push(format!("{label}: H1 Sub, H2 Super"));
        }
        let elapsed = start.elapsed().as_secs_f64();
        assert!(elapsed < 120.0, "took {elapsed:.1} s");
        format!("{} in {elapsed:.1} s", details.join("; "))
    });
}

#[test]
fn criterion_05_extinction_vs_coexistence() {
    criterion(5, "extinction vs coexistence at d2 = 0.08", || {
        let start = Instant::now();
        let v = extinction_verdict(&holling_table1(0.08), &State::new(0.5, 0.4, 0.8), 50_000.0, &cfg())
            .unwrap();
        let t_holling = match v {
            ExtinctionVerdict::Extinct { t_extinct } => {
                assert!(t_extinct > 500.0, "transient only {t_extinct}");
                t_extinct
            }
            other => panic!("holling should go extinct, got {other:?}"),
        };
        let t1 = start.elapsed().as_secs_f64();
        assert!(t1 < 60.0, "holling run took {t1:.1} s");

        let start2 = Instant::now();
        let v = extinction_verdict(&ivlev_table2(0.08), &State::new(0.45, 0.5, 0.8), 8000.0, &cfg())
            .unwrap();
        let min_z = match v {
            ExtinctionVerdict::Coexistent { min_z_final_window } => {
                assert!(min_z_final_window > 1e-3, "min z = {min_z_final_window}");
                min_z_final_window
            }
            other => panic!("ivlev should coexist, got {other:?}"),
        };
        let t2 = start2.elapsed().as_secs_f64();
        assert!(t2 < 60.0, "ivlev run took {t2:.1} s");
        format!("holling extinct at t = {t_holling:.0} ({t1:.1} s); ivlev min z = {min_z:.3} ({t2:.1} s)")
    });
}

#[test]
fn criterion_06_chaos_windows() {
    criterion(6, "Lyapunov chaos windows", || {
        let start = Instant::now();
        let interior = State::new(0.45, 0.5, 0.8);
        let le_060 = lyapunov_max(&holling_table1(0.060), &interior, &cfg()).unwrap();
        assert!(le_060 > 0.005, "holling 0.060: {le_060}");
        let le_081 = lyapunov_max(&holling_table1(0.081), &interior, &cfg()).unwrap();
        assert!(le_081 > 0.005, "holling 0.081: {le_081}");
        let le_iv = lyapunov_max(&ivlev_table2(0.071), &interior, &cfg()).unwrap();
        assert!(le_iv > 0.005, "ivlev 0.071: {le_iv}");
        // Stable focus: start inside the separatrix around E_bullet.
        let p = holling_table1(0.10);
        let mut near_focus = upper_point(&p);
        near_focus.x += 1e-3;
        let le_focus = lyapunov_max(&p, &near_focus, &cfg()).unwrap();
        assert!(le_focus < 0.005, "holling 0.10: {le_focus}");
        let elapsed = start.elapsed().as_secs_f64();
        assert!(elapsed < 180.0, "took {elapsed:.1} s");
        format!(
            "holling 0.060: {le_060:.4}, 0.081: {le_081:.4}, ivlev 0.071: {le_iv:.4}, holling 0.10: {le_focus:.4} in {elapsed:.1} s"
        )
    });
}

#[test]
fn criterion_07_period_doubling_onset() {
    criterion(7, "period-doubling onset, Holling", || {
        let start = Instant::now();
        // Descending continuation sweep across the onset.
        let mut grid = Vec::new();
        let mut d2 = 0.092;
        while d2 > 0.085 - 1e-12 {
            grid.push(d2);
            d2 -= 5e-4;
        }
        let pts = sweep(
            &holling_table1(0.1),
            &grid,
            &IcPolicy::Continuation {
                first: State::new(0.45, 0.5, 0.8),
            },
            &cfg(),
        );
        let mut onset = None;
        let mut prev_k = None;
        for p in &pts {
            let s = p.summary.as_ref().expect("sweep point failed");
            let k = s.z_maxima.len();
            if let Some(1) = prev_k {
                if k >= 2 {
                    onset = Some(p.d2);
                    break;
                }
            }
            prev_k = Some(k);
        }
        let onset = onset.expect("no 1 -> 2 transition found in [0.085, 0.092]");
        let elapsed = start.elapsed().as_secs_f64();
        assert!(
            (0.087..=0.091).contains(&onset),
            "onset {onset} outside [0.087, 0.091]"
        );
        assert!(elapsed < 300.0, "took {elapsed:.1} s");
        format!("first 2-cluster point at d2 = {onset:.4} in {elapsed:.1} s")
    });
}

#[test]
fn criterion_08_extinction_window() {
    criterion(8, "extinction window, Holling", || {
        let start = Instant::now();
        let mut grid = Vec::new();
        let mut d2 = 0.078;
        while d2 > 0.065 - 1e-12 {
            grid.push(d2);
            d2 -= 1e-3;
        }
        let pts = sweep(
            &holling_table1(0.1),
            &grid,
            &IcPolicy::Continuation {
                first: State::new(0.45, 0.5, 0.8),
            },
            &cfg(),
        );
        for p in &pts {
            let s = p.summary.as_ref().expect("sweep point failed");
            assert_eq!(
                s.kind,
                AttractorKind::BoundaryExtinction,
                "d2 = {} classified {:?}",
                p.d2,
                s.kind
            );
        }
        let elapsed = start.elapsed().as_secs_f64();
        format!("{} grid points all BoundaryExtinction in {elapsed:.1} s", pts.len())
    });
}

#[test]
fn criterion_09_ulc_branch_behaviour() {
    criterion(9, "unstable-cycle branch continuation", || {
        let start = Instant::now();
        // Holling: the branch born at H1 persists down to 0.075.
        let base = holling_table1(0.1);
        let (_, h1, _, _) = threshold_values(&base);
        let d2_seed = h1 - 0.0005;
        let p = base.with_d2(d2_seed).unwrap();
        let seed = find_cycle_near_equilibrium(&p, &upper_point(&p), &cfg()).unwrap();
        assert_eq!(seed.stability, CycleStability::Unstable);
        let branch = continue_cycle(&base, &seed, d2_seed, 0.075, 2e-4, &cfg()).unwrap();
        assert!(
            !branch.terminated_early && (branch.last_d2() - 0.075).abs() < 1e-9,
            "holling branch stopped at {}",
            branch.last_d2()
        );

        // Ivlev: the branch dies in a global bifurcation near 0.073.
        let base_i = ivlev_table2(0.1);
        let (_, h1_i, _, _) = threshold_values(&base_i);
        let d2_seed_i = h1_i - 0.0005;
        let p = base_i.with_d2(d2_seed_i).unwrap();
        let seed_i = find_cycle_near_equilibrium(&p, &upper_point(&p), &cfg()).unwrap();
        assert_eq!(seed_i.stability, CycleStability::Unstable);
        let branch_i = continue_cycle(&base_i, &seed_i, d2_seed_i, 0.06, 2e-4, &cfg()).unwrap();
        assert!(branch_i.terminated_early, "ivlev branch reached {}", branch_i.last_d2());
        let stop = branch_i.last_d2();
        assert!(
            (stop - 0.073).abs() <= 0.003,
            "ivlev branch terminated at {stop}, expected 0.073 +/- 0.003"
        );
        let elapsed = start.elapsed().as_secs_f64();
        format!(
            "holling branch reaches 0.075 ({} points); ivlev terminates at {stop:.4} in {elapsed:.1} s",
            branch.points.len()
        )
    });
}

#[test]
fn criterion_10_crisis_proximity() {
    criterion(10, "crisis proximity", || {
        let start = Instant::now();
        // Holling: continue the ULC to 0.085 and 0.0805 and compare the
        // attractor-to-cycle distances.
        let base = holling_table1(0.1);
        let (_, h1, _, _) = threshold_values(&base);
        let d2_seed = h1 - 0.0005;
        let p = base.with_d2(d2_seed).unwrap();
        let seed = find_cycle_near_equilibrium(&p, &upper_point(&p), &cfg()).unwrap();
        // Two-stage continuation lands exactly on each probe value.
        let to_085 = continue_cycle(&base, &seed, d2_seed, 0.085, 2e-4, &cfg()).unwrap();
        assert!(!to_085.terminated_early);
        let ulc_085 = to_085.points.last().unwrap().1.clone();
        let to_0805 = continue_cycle(&base, &ulc_085, 0.085, 0.0805, 2e-4, &cfg()).unwrap();
        assert!(!to_0805.terminated_early);
        let ulc_0805 = to_0805.points.last().unwrap().1.clone();

        let ic = State::new(0.45, 0.5, 0.8);
        let s_085 = attractor_summary(&base.with_d2(0.085).unwrap(), &ic, &cfg()).unwrap();
        let d_085 = crisis_check(&base.with_d2(0.085).unwrap(), &ulc_085, &s_085, &cfg()).unwrap();
        let s_0805 = attractor_summary(&base.with_d2(0.0805).unwrap(), &ic, &cfg()).unwrap();
        let d_0805 =
            crisis_check(&base.with_d2(0.0805).unwrap(), &ulc_0805, &s_0805, &cfg()).unwrap();
        assert!(
            d_0805 < 5.0 * d_085,
            "no approach to collision: d(0.0805) = {d_0805}, d(0.085) = {d_085}"
        );

        // Ivlev: at 0.071 the chaotic attractor stays far from the last
        // existing unstable cycle (the branch itself ends near 0.073).
        let base_i = ivlev_table2(0.1);
        let (_, h1_i, _, _) = threshold_values(&base_i);
        let d2_seed_i = h1_i - 0.0005;
        let p = base_i.with_d2(d2_seed_i).unwrap();
        let seed_i = find_cycle_near_equilibrium(&p, &upper_point(&p), &cfg()).unwrap();
        let branch_i = continue_cycle(&base_i, &seed_i, d2_seed_i, 0.06, 2e-4, &cfg()).unwrap();
        let (_, last_ulc) = branch_i.points.last().unwrap();
        let p_071 = base_i.with_d2(0.071).unwrap();
        let s_071 = attractor_summary(&p_071, &ic, &cfg()).unwrap();
        let d_ivlev = crisis_check(&p_071, last_ulc, &s_071, &cfg()).unwrap();
        assert!(
            d_ivlev > COLLISION_DISTANCE,
            "ivlev attractor touches the cycle: {d_ivlev}"
        );
        let elapsed = start.elapsed().as_secs_f64();
        format!("holling d(0.0805) = {d_0805:.4} < 5 x d(0.085) = 5 x {d_085:.4}; ivlev d(0.071) = {d_ivlev:.4} in {elapsed:.1} s")
    });
}

/// Exhaustive log-lattice search with progressive zoom; independent of the
/// Gauss-Newton path.
fn grid_search_oracle(problem: &FitProblem) -> (f64, f64, f64) {
    let u = problem.sample_points();
    let t: Vec<f64> = u.iter().map(|&ui| problem.target.eval(ui).unwrap()).collect();
    let sse_of = |p1: f64, p2: f64| -> f64 {
        let spec = ResponseSpec::new(problem.family, p1, p2).unwrap();
        u.iter()
            .zip(&t)
            .map(|(&ui, &ti)| {
                let d = spec.eval(ui).unwrap() - ti;
                d * d
            })
            .sum()
    };
    let asym = problem.target.asymptote();
    let slope = problem.target.initial_slope();
    let (c1, c2) = match problem.family {
        ResponseKind::Ivlev => (asym, slope / asym),
        ResponseKind::Holling2 => (slope, slope / asym),
    };
    let (mut l1, mut l2) = (c1.ln(), c2.ln());
    let mut half = std::f64::consts::LN_10; // +/- one decade
    let n = 200;
    let mut best = (f64::INFINITY, l1, l2);
    for _round in 0..6 {
        best = (f64::INFINITY, l1, l2);
        for i in 0..=n {
            for j in 0..=n {
                let q1 = l1 - half + 2.0 * half * i as f64 / n as f64;
                let q2 = l2 - half + 2.0 * half * j as f64 / n as f64;
                let s = sse_of(q1.exp(), q2.exp());
                if s < best.0 {
                    best = (s, q1, q2);
                }
            }
        }
        l1 = best.1;
        l2 = best.2;
        half *= 4.0 / n as f64; // keep a couple of cells around the winner
    }
    (best.0, best.1.exp(), best.2.exp())
}

#[test]
fn criterion_11_fitting() {
    criterion(11, "response fitting vs grid-search oracle", || {
        let start = Instant::now();
        let table2 = [(0.67, 5.349), (0.1647, 2.457)];
        let mut details = Vec::new();
        for (idx, target) in [
            ResponseSpec::holling2(4.98, 6.2).unwrap(),
            ResponseSpec::holling2(0.46, 2.0).unwrap(),
        ]
        .into_iter()
        .enumerate()
        {
            let problem = FitProblem::with_defaults(target, ResponseKind::Ivlev);
            let gn = fit(&problem).unwrap();
            let (oracle_sse, o1, o2) = grid_search_oracle(&problem);
            let rel = (gn.sse - oracle_sse).abs() / oracle_sse.max(1e-300);
            assert!(rel < 1e-6, "sse mismatch: GN {} vs oracle {oracle_sse} (rel {rel})", gn.sse);
            assert!((gn.fitted.p1 - o1).abs() < 1e-3 * o1, "p1 {} vs oracle {o1}", gn.fitted.p1);
            let (t1, t2) = table2[idx];
            let dev1 = (gn.fitted.p1 - t1).abs() / t1;
            let dev2 = (gn.fitted.p2 - t2).abs() / t2;
            assert!(dev1 < 0.20 && dev2 < 0.20, "deviation from table 2: {dev1:.3}, {dev2:.3}");
            details.push(format!(
                "f{}: ({:.4}, {:.4}) dev ({:.2}%, {:.2}%) on (0,1]x101, oracle p2 {:.4}",
                idx + 1,
                gn.fitted.p1,
                gn.fitted.p2,
                100.0 * dev1,
                100.0 * dev2,
                o2
            ));
        }
        // Idempotence at tight tolerance.
        let target = ResponseSpec::ivlev(0.67, 5.349).unwrap();
        let r = fit(&FitProblem::with_defaults(target, ResponseKind::Ivlev)).unwrap();
        assert!((r.fitted.p1 - 0.67).abs() < 1e-8 && (r.fitted.p2 - 5.349).abs() < 1e-8);
        assert!(r.sse < 1e-16);
        let elapsed = start.elapsed().as_secs_f64();
        format!("{}; idempotence exact in {elapsed:.1} s", details.join("; "))
    });
}

#[test]
fn criterion_12_property_suites() {
    criterion(12, "property suites", || {
        let start = Instant::now();
        // Response axioms and tilde assumptions on the standard grid.
        for spec in [
            ResponseSpec::holling2(4.98, 6.2).unwrap(),
            ResponseSpec::holling2(0.46, 2.0).unwrap(),
            ResponseSpec::ivlev(0.67, 5.349).unwrap(),
            ResponseSpec::ivlev(0.1647, 2.457).unwrap(),
        ] {
            let bad = spec.validate_axioms(&AXIOM_GRID);
            assert!(bad.is_empty(), "{spec:?}: {bad:?}");
        }

        // Jacobian vs central differences at fixed probe states.
        for params in [holling_table1(0.1), ivlev_table2(0.09)] {
            let mut probe = 0.13_f64;
            for _ in 0..20 {
                let s = State::new(
                    (probe * 7.3) % 1.5,
                    (probe * 11.9) % 1.5,
                    (probe * 17.7) % 1.5,
                );
                let j = params.jacobian(&s).unwrap();
                let h = 1e-6;
                for col in 0..3 {
                    let mut sp = s.to_vector();
                    let mut sm = s.to_vector();
                    sp[col] += h;
                    sm[col] -= h;
                    let fd = (params.rhs(&State::from_vector(&sp)).unwrap()
                        - params.rhs(&State::from_vector(&sm)).unwrap())
                        / (2.0 * h);
                    for row in 0..3 {
                        let rel = (fd[row] - j[(row, col)]).abs() / (1.0 + j[(row, col)].abs());
                        assert!(rel < 1e-5, "jacobian FD mismatch {rel}");
                    }
                }
                probe = (probe * 3.7 + 0.21) % 1.0;
            }
        }

        // Equilibrium residuals and Routh-Hurwitz vs eigenvalue agreement on
        // a 50-point d2 grid.
        for base in [holling_table1(0.1), ivlev_table2(0.1)] {
            let d2_tc = bifurcation::find_transcritical(&base).unwrap();
            let (d2_sn, _) =
                bifurcation::find_saddle_node(&base, (d2_tc, 0.999 * base.f2.asymptote())).unwrap();
            for i in 0..50 {
                let d2 = d2_tc + 1e-5 + (d2_sn - d2_tc - 2e-5) * i as f64 / 49.0;
                let p = base.with_d2(d2).unwrap();
                for pt in equilibria::all_equilibria(&p) {
                    assert!(p.residual(&pt.coords) < 1e-9, "residual at {:?}", pt.coords);
                    if let Some(rh) = pt.routh_hurwitz_stable {
                        let eig_stable = pt.eigenvalues.iter().all(|l| l.re < -1e-8);
                        let hyperbolic = pt.eigenvalues.iter().all(|l| l.re.abs() > 1e-8);
                        if hyperbolic {
                            assert_eq!(rh, eig_stable, "RH vs eigenvalues at d2 = {d2}");
                        }
                    }
                }
            }
        }

        // Hopf amplitude scaling: log-log slope 0.5 +/- 0.1 over one decade,
        // at both the subcritical and the supercritical threshold.
        let base = holling_table1(0.1);
        let (_, h1, h2, _) = threshold_values(&base);
        let mut slopes = Vec::new();
        for d2_h in [h1, h2] {
            let mut pts = Vec::new();
            for k in 0..8 {
                let delta = 1e-4 * 10f64.powf(k as f64 / 7.0);
                let p = base.with_d2(d2_h - delta).unwrap();
                let eq = upper_point(&p);
                let cycle = find_cycle_near_equilibrium(&p, &eq, &cfg()).unwrap();
                pts.push((delta.ln(), cycle.amplitude_about(&eq).ln()));
            }
            let n = pts.len() as f64;
            let sx: f64 = pts.iter().map(|p| p.0).sum();
            let sy: f64 = pts.iter().map(|p| p.1).sum();
            let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
            let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            assert!(
                (slope - 0.5).abs() <= 0.1,
                "amplitude scaling slope {slope} at d2_H = {d2_h}"
            );
            slopes.push(slope);
        }
        let elapsed = start.elapsed().as_secs_f64();
        format!(
            "axioms, jacobian FD, residuals, RH agreement OK; Hopf amplitude slopes {:.3} (H1), {:.3} (H2) in {elapsed:.1} s",
            slopes[0], slopes[1]
        )
    });
}
