//! Acceptance run: every criterion at its stated tolerance and time budget,
//! one PASS/FAIL line each. Run with `--nocapture` to see the table.

use std::time::{Duration, Instant};

use galileo_core::group::{check_group_axioms, state, Family, GroupRep};
use galileo_core::solver::*;
use galileo_core::systems::{by_name, cemracs_sound_speed, fixture, registry, GalileanSystem, FIXTURES};
use galileo_core::verifier::{self, run_suite, sample_rng, sample_state, Check, CheckReport, SampleSpec};
use rand::Rng;

const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Runs one criterion, prints its line and reports whether it (and its budget) passed.
fn criterion(id: usize, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_budget = budget.is_none_or(|b| elapsed < b);
    let pass = out.pass && in_budget;
    let timing = match budget {
        Some(b) => format!("{:.2} s / budget {:.0} s", elapsed.as_secs_f64(), b.as_secs_f64()),
        None => format!("{:.2} s", elapsed.as_secs_f64()),
    };
    println!("{} {id:>2}. {name}: {} [{timing}]", if pass { "PASS" } else { "FAIL" }, out.detail);
    pass
}

/// Largest residual over reports; a report that errored counts as infinite.
fn worst(reports: &[CheckReport]) -> f64 {
    reports.iter().fold(0.0_f64, |a, r| if r.error.is_some() { f64::INFINITY } else { a.max(r.max_residual) })
}

fn below(reports: &[CheckReport], tol: f64) -> bool {
    reports.iter().all(|r| r.error.is_none() && r.max_residual < tol)
}

fn group_axioms() -> Outcome {
    let mut rng = sample_rng(SEED, "all", "group-axioms", 0);
    let mut max = 0.0_f64;
    for _ in 0..1000 {
        let f = Family::ALL[rng.gen_range(0..Family::ALL.len())];
        let (v, w) = (rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0));
        max = max.max(check_group_axioms(&GroupRep::standard(f), v, w).unwrap().max());
    }
    outcome(max < 1e-12, format!("max residual {max:.2e} over 1000 draws (< 1e-12)"))
}

fn transformation_laws() -> Outcome {
    let v_grid = SampleSpec::default().v_grid;
    let reports: Vec<CheckReport> =
        registry().iter().flat_map(|sys| verifier::verify_transformations(sys, SEED, 500, &v_grid)).collect();
    let excluded: usize = reports.iter().map(|r| r.excluded).sum();
    let max = worst(&reports);
    outcome(
        below(&reports, 1e-9),
        format!(
            "max residual {max:.2e} over {} reports, {excluded} elliptic samples off-branch (< 1e-9)",
            reports.len()
        ),
    )
}

fn compatibility() -> Outcome {
    let reports: Vec<CheckReport> = registry()
        .iter()
        .flat_map(|sys| [verifier::verify_compatibility(sys, SEED, 500), verifier::verify_entropy_pair(sys, SEED, 500)])
        .collect();
    let max = worst(&reports);
    outcome(below(&reports, 1e-6), format!("max relative FD residual {max:.2e} (< 1e-6)"))
}

fn rest_frame() -> Outcome {
    let parity: Vec<CheckReport> = registry().iter().map(|s| verifier::verify_rest_parity(s, SEED, 500)).collect();
    let proj: Vec<CheckReport> = registry().iter().map(|s| verifier::verify_rest_projection(s, SEED, 500)).collect();
    let (a, b) = (worst(&parity), worst(&proj));
    outcome(
        below(&parity, 1e-14) && below(&proj, 1e-12),
        format!("rest parity {a:.2e} (< 1e-14), projection {b:.2e} (< 1e-12)"),
    )
}

fn hessians() -> Outcome {
    let reports: Vec<CheckReport> =
        registry().iter().flat_map(|s| verifier::verify_hessians(s, SEED, 10_000)).collect();
    let spd_ok = reports.iter().filter(|r| r.check == Check::HessianSpd).all(|r| r.pass);
    let det: Vec<CheckReport> = reports.iter().filter(|r| r.check == Check::HessianDet).cloned().collect();
    let det_max = worst(&det);
    let bad = fixture("sign-violating-fixture").unwrap();
    let expected_fail = verifier::verify_hessians(&bad, SEED, 10_000)
        .into_iter()
        .find(|r| r.check == Check::HessianSpd)
        .is_some_and(|r| !r.pass);
    outcome(
        spd_ok && below(&det, 1e-5) && expected_fail,
        format!(
            "SPD at 10^4 states x 7 families: {spd_ok}; det rel. error {det_max:.2e} (< 1e-5); sign-violating closure rejected: {expected_fail}"
        ),
    )
}

fn cemracs_hyperbolicity() -> Outcome {
    let sys = by_name("cemracs").unwrap();
    let gamma = sys.gamma().unwrap();
    let mut rng = sample_rng(SEED, "cemracs", "eigen", 0);
    let mut max = 0.0_f64;
    for _ in 0..100 {
        let w = sample_state(&sys, &mut rng);
        let u = sys.velocity(&w).unwrap();
        let c = cemracs_sound_speed(sys.quasilinear_state(&w).unwrap().y(), gamma);
        let numeric = sys.numeric_char_speeds(&w).unwrap();
        for (n, a) in numeric.iter().zip([u - c, u, u + c]) {
            max = max.max((n - a).abs());
        }
    }
    let at = sys.numeric_char_speeds(&state(&[1.0, 0.0, 2.5])).unwrap();
    let ref_err = (at[0] + 0.451754).abs().max(at[1].abs()).max((at[2] - 0.451754).abs());
    outcome(
        max < 1e-5 && ref_err < 1e-5,
        format!(
            "max |λ_FD − λ| {max:.2e} at 100 states; at (1,0,2.5) speeds {:.6}, {:.1e}, {:.6} (±0.451754)",
            at[0], at[1], at[2]
        ),
    )
}

fn euler_equivalence() -> Outcome {
    let nil = GalileanSystem::configured(Family::Nil3, Some((1.0, 1.0)), Some("gas"), 1.4).unwrap();
    let gamma = 1.4;
    let mut rng = sample_rng(SEED, "nil3", "euler-equivalence", 0);
    let (mut ej, mut ec, mut ep) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let w = sample_state(&nil, &mut rng);
        let (rho, u) = (w[0], w[1] / w[0]);
        let p = (gamma - 1.0) * (w[2] - 0.5 * rho * u * u);
        let j = nil.thermo_flux(&w).unwrap();
        let expect = state(&[0.0, p, p * u]);
        ej = ej.max((&j - &expect).amax() / expect.amax().max(1.0));
        let c = (gamma * p / rho).sqrt();
        let speeds = nil.numeric_char_speeds(&w).unwrap();
        for (s, e) in speeds.iter().zip([u - c, u, u + c]) {
            ec = ec.max((s - e).abs() / e.abs().max(1.0));
        }
        ep = ep.max((nil.pressure(&w).unwrap() - p).abs() / p);
    }
    outcome(
        ej < 1e-8 && ec < 1e-5 && ep < 1e-10,
        format!("j vs (0,p,pu) {ej:.2e} (< 1e-8), speeds {ec:.2e} (< 1e-5), Π vs (γ−1)ρe {ep:.2e} (< 1e-10)"),
    )
}

fn frame_shift() -> Outcome {
    let sys = by_name("eulergas").unwrap();
    let ic = InitialCondition::Riemann(RiemannIC::sod(&sys).unwrap());
    let grids: Vec<Grid1D> =
        [200, 400, 800].iter().map(|&n| Grid1D::unit(n, Boundary::Transmissive).unwrap()).collect();
    let t = frame_shift_experiment(&sys, &ic, &grids, 0.5, 0.2, DEFAULT_CFL).unwrap();
    let l1: Vec<String> = t.rows.iter().map(|r| format!("{:.3e}", r.l1)).collect();
    let pairs: Vec<String> = t.orders().iter().map(|o| format!("{o:.3}")).collect();
    let order = t.fitted_order();
    outcome(
        t.strictly_decreasing() && order >= 0.6,
        format!("L1 [{}], fitted order {order:.3} (≥ 0.6; pairwise [{}])", l1.join(", "), pairs.join(", ")),
    )
}

fn discrete_entropy() -> Outcome {
    let sys = by_name("eulergas").unwrap();
    let sod = InitialCondition::Riemann(RiemannIC::sod(&sys).unwrap());
    let h = evolve(&sys, &sod, &Grid1D::unit(800, Boundary::Transmissive).unwrap(), 0.2, 0.45, None).unwrap();
    let production = h.entropy.iter().map(|s| s.max_production).fold(f64::NEG_INFINITY, f64::max);

    let smooth = InitialCondition::Sine(SineIC::density_wave(1.4));
    let drift: Vec<f64> = [100, 200, 400]
        .iter()
        .map(|&n| {
            let g = Grid1D::unit(n, Boundary::Periodic).unwrap();
            let h = evolve(&sys, &smooth, &g, 0.5, 0.45, None).unwrap();
            (h.last().entropy_total - h.entropy[0].total).abs()
        })
        .collect();
    let ratios: Vec<f64> = drift.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = production <= 1e-10 && ratios.iter().all(|r| (1.5..=3.0).contains(r));
    outcome(
        ok,
        format!(
            "Sod max per-cell production {production:.2e} over {} steps (≤ 1e-10); smooth drift ratios {:.3}, {:.3} (in [1.5, 3])",
            h.steps(),
            ratios[0],
            ratios[1]
        ),
    )
}

fn solver_fingerprint() -> String {
    let sys = by_name("eulergas").unwrap();
    let ic = InitialCondition::Riemann(RiemannIC::sod(&sys).unwrap());
    let h = evolve(&sys, &ic, &Grid1D::unit(200, Boundary::Transmissive).unwrap(), 0.2, DEFAULT_CFL, Some(25)).unwrap();
    let mut out = String::new();
    for f in &h.snapshots {
        out.push_str(&format!("{:016x}", f.time.to_bits()));
        for w in &f.states {
            for x in w.iter() {
                out.push_str(&format!("{:016x}", x.to_bits()));
            }
        }
    }
    out
}

fn suite_fingerprint() -> String {
    let mut systems = registry();
    systems.extend(FIXTURES.iter().map(|n| fixture(n).unwrap()));
    let r = run_suite(&systems, SEED, &SampleSpec::default());
    r.to_csv() + &r.to_text()
}

fn determinism() -> Outcome {
    let in_pool = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| (suite_fingerprint(), solver_fingerprint()))
    };
    let one = in_pool(1);
    let four = in_pool(4);
    let again = in_pool(4);
    let ok = one == four && four == again;
    outcome(ok, format!("suite + solver outputs identical for 1, 4, 4 threads: {ok}"))
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let results = [
        criterion(1, "group axioms", Some(s(1)), group_axioms),
        criterion(2, "transformation laws", Some(s(5)), transformation_laws),
        criterion(3, "compatibility and entropy pair", Some(s(10)), compatibility),
        criterion(4, "rest-frame constraint and projection", None, rest_frame),
        criterion(5, "entropy Hessians", None, hessians),
        criterion(6, "cemracs hyperbolicity", None, cemracs_hyperbolicity),
        criterion(7, "euler equivalence of the nilpotent gas", None, euler_equivalence),
        criterion(8, "frame-shift experiment", Some(s(60)), frame_shift),
        criterion(9, "discrete entropy", None, discrete_entropy),
        criterion(10, "determinism", None, determinism),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, p)| !**p).map(|(i, _)| i + 1).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
