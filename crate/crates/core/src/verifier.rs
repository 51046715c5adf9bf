//! Randomized certification of the structural identities of a system.
//!
//! Every check is a pure residual function of `(system, witness)`, where a
//! witness is a state plus auxiliary data (a direction or a boost velocity).
//! Samples are drawn from a counter-based RNG keyed by `(seed, system,
//! check, index)`, so reports do not depend on thread scheduling and the
//! worst witness replays to the same residual bit for bit.

use std::f64::consts::FRAC_PI_4;
use std::fmt::{self, Write as _};

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fd;
use crate::group::{Family, Kind, State};
use crate::systems::{Branch, GalileanSystem};
use crate::thermo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Check {
    /// `φ·dj·r + η*·du·r = 0`
    Compatibility,
    /// `φ·G·j(W₀) = η*` at rest
    RestCompatibility,
    /// `d(ηu)·r = φ·df·r`
    EntropyPair,
    /// `u(Y(v)W) = u(W) − v`
    VelocityBoost,
    /// `u(RW) = −u(W)`
    VelocityReflection,
    /// `j(Y(v)W) = Y(v)j(W)`
    FluxBoost,
    /// `j(RW) = −Rj(W)`
    FluxReflection,
    /// `η(Y(v)W) = η(RW) = η(W)`
    EntropyInvariance,
    /// closed-form `φ` against central differences of `η`
    EntropyVariables,
    /// smallest eigenvalue of the FD Hessian (Jacobian of `φ`), as `−λ_min/λ_max`
    HessianSpd,
    /// FD `det d²η` against the closed form
    HessianDet,
    /// `RW₀ = W₀` and `j(W₀)` vanishes in the even components
    RestParity,
    /// `u(Π(W)) = 0`, `Π∘Π = Π`, rest-radius identities
    RestProjection,
}

impl Check {
    pub const ALL: [Check; 13] = [
        Check::Compatibility,
        Check::RestCompatibility,
        Check::EntropyPair,
        Check::VelocityBoost,
        Check::VelocityReflection,
        Check::FluxBoost,
        Check::FluxReflection,
        Check::EntropyInvariance,
        Check::EntropyVariables,
        Check::HessianSpd,
        Check::HessianDet,
        Check::RestParity,
        Check::RestProjection,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Check::Compatibility => "compatibility",
            Check::RestCompatibility => "rest_compatibility",
            Check::EntropyPair => "entropy_pair",
            Check::VelocityBoost => "velocity_boost",
            Check::VelocityReflection => "velocity_reflection",
            Check::FluxBoost => "flux_boost",
            Check::FluxReflection => "flux_reflection",
            Check::EntropyInvariance => "entropy_invariance",
            Check::EntropyVariables => "entropy_variables",
            Check::HessianSpd => "hessian_spd",
            Check::HessianDet => "hessian_det",
            Check::RestParity => "rest_parity",
            Check::RestProjection => "rest_projection",
        }
    }

    /// Closed-form identities get 1e−10…1e−14, FD-mediated ones 1e−5…1e−6 (relative).
    pub fn tolerance(self) -> f64 {
        match self {
            Check::Compatibility | Check::EntropyPair | Check::EntropyVariables => 1e-6,
            Check::RestCompatibility => 1e-8,
            Check::VelocityBoost | Check::EntropyInvariance => 1e-10,
            Check::VelocityReflection | Check::RestParity => 1e-14,
            Check::FluxBoost => 1e-9,
            Check::FluxReflection | Check::RestProjection => 1e-12,
            Check::HessianSpd => 0.0,
            Check::HessianDet => 1e-5,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// A state plus the auxiliary input of a check (direction `r` or boost `v`).
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub state: State,
    pub aux: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check: Check,
    pub system: String,
    /// Evaluated samples.
    pub samples: usize,
    /// Samples skipped by the elliptic branch policy or redrawn after an FD failure.
    pub excluded: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst: Option<Witness>,
    /// First evaluation error, if any sample could not be evaluated at all.
    pub error: Option<String>,
}

impl CheckReport {
    pub fn text_line(&self) -> String {
        format!(
            "{} {} {} samples={} excluded={} max_residual={:e} tolerance={:e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.system,
            self.check,
            self.samples,
            self.excluded,
            self.max_residual,
            self.tolerance
        )
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.check, self.system, self.samples, self.max_residual, self.tolerance, self.pass
        )
    }
}

/// Sample counts and the boost grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub samples: usize,
    pub hessian_samples: usize,
    pub rest_samples: usize,
    pub v_grid: Vec<f64>,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            samples: 500,
            hessian_samples: 10_000,
            rest_samples: 100,
            v_grid: vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0],
        }
    }
}

// ---------------------------------------------------------------- sampling

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325_u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for sample `index` of `check` on `system`.
pub fn sample_rng(seed: u64, system: &str, check: &str, index: u64) -> ChaCha8Rng {
    let key = splitmix(seed ^ fnv1a(system.as_bytes()).rotate_left(17) ^ fnv1a(check.as_bytes()));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Smallest distance of `γ − log[(γ−1)ψ/θ^γ]` from zero accepted when
/// sampling the Cemracs cone (keeps `Π` bounded).
const CEMRACS_MARGIN: f64 = 0.2;

/// Uniform rest state: `θ₀ ∈ [0.5, 5]`, internal variable in the closure box.
pub fn sample_rest_state<R: Rng>(sys: &GalileanSystem, rng: &mut R) -> State {
    loop {
        let mut rest = vec![rng.gen_range(0.5..=5.0)];
        if let Some((lo, hi)) = sys.closure().internal_box() {
            rest.push(rng.gen_range(lo..=hi));
        }
        let w = sys.rest_state(&rest);
        if !sys.cone_contains(&w) {
            continue;
        }
        if sys.family() == Family::Cemracs {
            let gamma = sys.gamma().unwrap_or(f64::NAN);
            let denom = gamma - ((gamma - 1.0) * rest[1] / rest[0].powf(gamma)).ln();
            if denom < CEMRACS_MARGIN {
                continue;
            }
        }
        return w;
    }
}

/// Range of the boost applied to rest samples.
fn sample_velocity_bound(sys: &GalileanSystem) -> f64 {
    match sys.family().kind() {
        Kind::Hyperbolic => 1.0 / sys.rep().rate(),
        Kind::Elliptic => FRAC_PI_4 / sys.rep().rate(),
        Kind::Nilpotent => 2.0,
    }
}

/// A cone state built as `Y(v)·W₀` from a uniform rest state.
pub fn sample_state<R: Rng>(sys: &GalileanSystem, rng: &mut R) -> State {
    let w0 = sample_rest_state(sys, rng);
    let vmax = sample_velocity_bound(sys);
    loop {
        let v = rng.gen_range(-vmax..=vmax);
        if let Ok(w) = sys.boost_state(&w0, v) {
            if sys.cone_contains(&w) {
                return w;
            }
        }
    }
}

fn sample_direction<R: Rng>(m: usize, rng: &mut R) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

// ---------------------------------------------------------------- residuals

fn rel(res: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        res.abs() / scale
    } else {
        res.abs()
    }
}

fn dot_abs(a: &State, b: &State) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x * y).abs()).sum()
}

/// `d²η` as the central-difference Jacobian of `φ` (which the
/// `entropy_variables` check ties to `η` itself). Second differences of `η`
/// lose too many digits on boosted gas states, whose Hessians have
/// condition numbers around 1e4.
pub fn entropy_hessian(sys: &GalileanSystem, w: &State) -> Result<nalgebra::DMatrix<f64>> {
    fd::hessian_from_gradient(w, |x| sys.cone_contains(x), |x| thermo::entropy_variables(sys, x))
}

/// Residual of one check at one witness. Pure and deterministic.
pub fn residual(check: Check, sys: &GalileanSystem, wit: &Witness) -> Result<f64> {
    let w = &wit.state;
    let inside = |x: &State| sys.cone_contains(x);
    let one = |x: f64| State::from_element(1, x);
    match check {
        Check::Compatibility => {
            let r = State::from_column_slice(&wit.aux);
            let phi = thermo::entropy_variables(sys, w)?;
            let dual = thermo::entropy_dual(sys, w)?;
            let dj = fd::directional(w, &r, inside, |x| sys.thermo_flux(x))?;
            let du = fd::directional(w, &r, inside, |x| Ok(one(sys.velocity(x)?)))?[0];
            Ok(rel(phi.dot(&dj) + dual * du, dot_abs(&phi, &dj) + (dual * du).abs()))
        }
        Check::EntropyPair => {
            let r = State::from_column_slice(&wit.aux);
            let phi = thermo::entropy_variables(sys, w)?;
            let dq = fd::directional(w, &r, inside, |x| Ok(one(thermo::entropy(sys, x)? * sys.velocity(x)?)))?[0];
            let df = fd::directional(w, &r, inside, |x| sys.flux(x))?;
            Ok(rel(dq - phi.dot(&df), dq.abs() + dot_abs(&phi, &df)))
        }
        Check::RestCompatibility => {
            let phi = thermo::entropy_variables(sys, w)?;
            let dual = thermo::entropy_dual(sys, w)?;
            let gj = sys.rep().generator() * sys.thermo_flux(w)?;
            Ok(rel(phi.dot(&gj) - dual, dual.abs().max(1.0)))
        }
        Check::VelocityBoost => {
            let v = wit.aux[0];
            let wb = sys.boost_state(w, v)?;
            Ok((sys.velocity(&wb)? - (sys.velocity(w)? - v)).abs())
        }
        Check::VelocityReflection => {
            let rw = sys.rep().reflection() * w;
            Ok((sys.velocity(&rw)? + sys.velocity(w)?).abs())
        }
        Check::FluxBoost => {
            let y = sys.rep().boost(wit.aux[0])?;
            let lhs = sys.thermo_flux(&(&y * w))?;
            let rhs = &y * sys.thermo_flux(w)?;
            Ok((&lhs - &rhs).amax() / rhs.amax().max(1.0))
        }
        Check::FluxReflection => {
            let r = sys.rep().reflection();
            let lhs = sys.thermo_flux(&(r * w))?;
            Ok((lhs + r * sys.thermo_flux(w)?).amax())
        }
        Check::EntropyInvariance => {
            let eta = thermo::entropy(sys, w)?;
            let boosted = thermo::entropy(sys, &sys.boost_state(w, wit.aux[0])?)?;
            let reflected = thermo::entropy(sys, &(sys.rep().reflection() * w))?;
            Ok((boosted - eta).abs().max((reflected - eta).abs()) / eta.abs().max(1.0))
        }
        Check::EntropyVariables => {
            let phi = thermo::entropy_variables(sys, w)?;
            let g = fd::gradient(w, inside, |x| thermo::entropy(sys, x))?;
            Ok((&g - &phi).amax() / phi.amax().max(f64::MIN_POSITIVE))
        }
        Check::HessianSpd => {
            let h = entropy_hessian(sys, w)?;
            let eig = SymmetricEigen::new(h).eigenvalues;
            let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &l| (lo.min(l), hi.max(l.abs())));
            Ok(if hi > 0.0 { -lo / hi } else { f64::INFINITY })
        }
        Check::HessianDet => {
            let h = entropy_hessian(sys, w)?;
            let exact = thermo::hessian_det_closed_form(sys, w)?;
            Ok(rel(h.determinant() - exact, exact.abs()))
        }
        Check::RestParity => {
            let m = sys.dim();
            let fixed = (sys.rep().reflection() * w - w).amax();
            let j = sys.thermo_flux(w)?;
            let even = (0..m).filter(|&i| i != 1).fold(0.0_f64, |a, i| a.max(j[i].abs()));
            Ok(fixed.max(even))
        }
        Check::RestProjection => {
            let p = sys.rest_projection(w)?;
            let pp = sys.rest_projection(&p)?;
            let scale = p.amax().max(1.0);
            let radius = (&p - sys.rest_state(&sys.rest_args(w))).amax() / scale;
            Ok(sys.velocity(&p)?.abs().max((&pp - &p).amax() / scale).max(p[1].abs() / scale).max(radius))
        }
    }
}

/// Re-evaluates the worst witness of a report.
pub fn replay(sys: &GalileanSystem, report: &CheckReport) -> Result<f64> {
    let wit = report.worst.as_ref().ok_or_else(|| Error::Domain(format!("report {} has no witness", report.check)))?;
    residual(report.check, sys, wit)
}

// ---------------------------------------------------------------- drivers

enum Outcome {
    Value { residual: f64, witness: Witness, redraws: usize },
    Excluded,
    Failed(Error),
}

const MAX_REDRAWS: usize = 50;

/// Draws witnesses for sample `index` until the residual is computable.
fn evaluate<D>(check: Check, sys: &GalileanSystem, seed: u64, index: usize, draw: &D) -> Outcome
where
    D: Fn(&mut ChaCha8Rng) -> Option<Witness> + Sync,
{
    let mut rng = sample_rng(seed, sys.name(), check.id(), index as u64);
    let mut redraws = 0;
    loop {
        let Some(witness) = draw(&mut rng) else {
            return Outcome::Excluded;
        };
        match residual(check, sys, &witness) {
            Ok(residual) => return Outcome::Value { residual, witness, redraws },
            Err(Error::Stencil(_)) if redraws < MAX_REDRAWS => redraws += 1,
            Err(e) => return Outcome::Failed(e),
        }
    }
}

fn run<D>(check: Check, sys: &GalileanSystem, seed: u64, n: usize, draw: D) -> CheckReport
where
    D: Fn(&mut ChaCha8Rng) -> Option<Witness> + Sync,
{
    let outcomes: Vec<Outcome> = (0..n).into_par_iter().map(|i| evaluate(check, sys, seed, i, &draw)).collect();
    let mut report = CheckReport {
        check,
        system: sys.name().to_string(),
        samples: 0,
        excluded: 0,
        max_residual: 0.0,
        tolerance: check.tolerance(),
        pass: true,
        worst: None,
        error: None,
    };
    for o in outcomes {
        match o {
            Outcome::Value { residual, witness, redraws } => {
                report.samples += 1;
                report.excluded += redraws;
                // A NaN residual sticks, so it surfaces as a failure.
                let nan_first = residual.is_nan() && !report.max_residual.is_nan();
                if report.worst.is_none() || residual > report.max_residual || nan_first {
                    report.max_residual = residual;
                    report.worst = Some(witness);
                }
            }
            Outcome::Excluded => report.excluded += 1,
            Outcome::Failed(e) => {
                report.max_residual = f64::INFINITY;
                report.error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    report.pass = report.samples > 0 && report.max_residual <= report.tolerance;
    report
}

/// Compatibility of the thermodynamic flux with the entropy, on random states and directions.
pub fn verify_compatibility(sys: &GalileanSystem, seed: u64, samples: usize) -> CheckReport {
    run(Check::Compatibility, sys, seed, samples, |rng| {
        let state = sample_state(sys, rng);
        let aux = sample_direction(sys.dim(), rng);
        Some(Witness { state, aux })
    })
}

/// The closed-form compatibility relation at rest states.
pub fn verify_rest_compatibility(sys: &GalileanSystem, seed: u64, samples: usize) -> CheckReport {
    run(Check::RestCompatibility, sys, seed, samples, |rng| {
        Some(Witness { state: sample_rest_state(sys, rng), aux: vec![] })
    })
}

/// `d(ηu) = φ·df` on random states and directions.
pub fn verify_entropy_pair(sys: &GalileanSystem, seed: u64, samples: usize) -> CheckReport {
    run(Check::EntropyPair, sys, seed, samples, |rng| {
        let state = sample_state(sys, rng);
        let aux = sample_direction(sys.dim(), rng);
        Some(Witness { state, aux })
    })
}

/// The five invariance properties; boost checks run over `samples × v_grid`.
pub fn verify_transformations(sys: &GalileanSystem, seed: u64, samples: usize, v_grid: &[f64]) -> Vec<CheckReport> {
    let boosted = |check: Check| {
        run(check, sys, seed, samples * v_grid.len(), |rng| {
            let state = sample_state(sys, rng);
            let v = v_grid[rng.gen_range(0..v_grid.len())];
            match sys.boost_state_checked(&state, v) {
                Ok((wb, Branch::Principal)) if sys.cone_contains(&wb) => Some(Witness { state, aux: vec![v] }),
                _ => None,
            }
        })
    };
    let reflected = |check: Check| {
        run(check, sys, seed, samples, |rng| Some(Witness { state: sample_state(sys, rng), aux: vec![] }))
    };
    vec![
        boosted(Check::VelocityBoost),
        reflected(Check::VelocityReflection),
        boosted(Check::FluxBoost),
        reflected(Check::FluxReflection),
        boosted(Check::EntropyInvariance),
    ]
}

/// `φ = dη`, SPD-ness of the FD Hessian and its determinant against the closed form.
pub fn verify_hessians(sys: &GalileanSystem, seed: u64, samples: usize) -> Vec<CheckReport> {
    let draw = |rng: &mut ChaCha8Rng| Some(Witness { state: sample_state(sys, rng), aux: vec![] });
    vec![
        run(Check::EntropyVariables, sys, seed, samples, draw),
        run(Check::HessianSpd, sys, seed, samples, draw),
        run(Check::HessianDet, sys, seed, samples, draw),
    ]
}

/// Reflection fixes rest states and `j(W₀)` lives in the odd component.
pub fn verify_rest_parity(sys: &GalileanSystem, seed: u64, samples: usize) -> CheckReport {
    run(Check::RestParity, sys, seed, samples, |rng| Some(Witness { state: sample_rest_state(sys, rng), aux: vec![] }))
}

/// Rest projection lands at zero velocity, is idempotent and matches the rest radius.
pub fn verify_rest_projection(sys: &GalileanSystem, seed: u64, samples: usize) -> CheckReport {
    run(Check::RestProjection, sys, seed, samples, |rng| Some(Witness { state: sample_state(sys, rng), aux: vec![] }))
}

/// All reports for a list of systems.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub seed: u64,
    pub reports: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&CheckReport> {
        self.reports.iter().filter(|r| !r.pass).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.reports {
            let _ = writeln!(s, "{}", r.text_line());
            if let Some(e) = &r.error {
                let _ = writeln!(s, "  error: {e}");
            }
        }
        let failed = self.failures().len();
        let _ = writeln!(
            s,
            "seed={} checks={} failed={} => {}",
            self.seed,
            self.reports.len(),
            failed,
            if failed == 0 { "PASS" } else { "FAIL" }
        );
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("check,name,samples,max_residual,tolerance,pass\n");
        for r in &self.reports {
            let _ = writeln!(s, "{}", r.csv_row());
        }
        s
    }
}

/// Every check on every system, deterministic in `seed`.
pub fn run_suite(systems: &[GalileanSystem], seed: u64, spec: &SampleSpec) -> SuiteReport {
    let mut reports = Vec::new();
    for sys in systems {
        reports.push(verify_compatibility(sys, seed, spec.samples));
        reports.push(verify_rest_compatibility(sys, seed, spec.rest_samples));
        reports.push(verify_entropy_pair(sys, seed, spec.samples));
        reports.extend(verify_transformations(sys, seed, spec.samples, &spec.v_grid));
        reports.extend(verify_hessians(sys, seed, spec.hessian_samples));
        reports.push(verify_rest_parity(sys, seed, spec.rest_samples));
        reports.push(verify_rest_projection(sys, seed, spec.samples));
    }
    SuiteReport { seed, reports }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::state;
    use crate::systems::{by_name, registry};

    #[test]
    fn samples_are_in_the_cone() {
        for sys in registry() {
            let mut rng = sample_rng(1, sys.name(), "t", 0);
            for _ in 0..200 {
                let w = sample_state(&sys, &mut rng);
                assert!(sys.cone_contains(&w), "{} {:?}", sys.name(), w);
            }
        }
    }

    #[test]
    fn hyperbolic_pair_at_fixed_point() {
        let sys = by_name("hyp2").unwrap();
        let wit = Witness { state: state(&[1.2, 0.3]), aux: vec![0.6, -0.8] };
        assert!(residual(Check::EntropyPair, &sys, &wit).unwrap() < 1e-8);
    }

    #[test]
    fn hyperbolic_3x3_determinant_example() {
        let sys = by_name("hyp3").unwrap();
        let wit = Witness { state: state(&[5.0, 3.0, 2.0]), aux: vec![] };
        assert!(residual(Check::HessianDet, &sys, &wit).unwrap() < 1e-5);
    }

    #[test]
    fn worst_witness_replays_exactly() {
        let sys = by_name("eulergas").unwrap();
        let r = verify_compatibility(&sys, 3, 50);
        assert_eq!(replay(&sys, &r).unwrap(), r.max_residual);
    }

    #[test]
    fn elliptic_exclusions_are_counted() {
        let sys = by_name("ell3").unwrap();
        let reports = verify_transformations(&sys, 9, 100, &[-2.0, 0.5, 2.0]);
        assert!(reports[0].excluded > 0);
        assert!(reports.iter().all(|r| r.pass), "{reports:#?}");
    }
}
