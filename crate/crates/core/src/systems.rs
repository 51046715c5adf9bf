//! The Galilean-invariant systems `∂W/∂t + ∂f(W)/∂x = 0` with
//! `f(W) = u(W)·W + j(W)`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::fd;
use crate::group::{Family, GroupRep, Kind, State};
use crate::thermo::{self, Closure, EntropyClosure, Sign};

/// Margin kept from `π/2` on the principal branch of elliptic velocities.
pub const BRANCH_MARGIN: f64 = 1e-3;

/// Imaginary parts below `REAL_TOL·max(1, |λ|)` are treated as rounding noise.
pub const REAL_TOL: f64 = 1e-8;

/// Safety factor on numerically estimated wave speeds.
pub const SPEED_SAFETY: f64 = 1.1;

/// Deliberate corruptions used to prove that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mutation {
    None,
    PressureScale(f64),
    VelocityScale(f64),
}

/// Outcome of applying a boost under the elliptic branch policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Principal,
    /// `√(ab)(|u|+|v|)` reached `π/2 − margin`; group laws are not guaranteed.
    Outside,
}

#[derive(Clone)]
pub struct GalileanSystem {
    name: String,
    rep: GroupRep,
    closure: Arc<dyn EntropyClosure>,
    mutation: Mutation,
}

impl fmt::Debug for GalileanSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GalileanSystem")
            .field("name", &self.name)
            .field("family", &self.rep.family())
            .field("params", &self.rep.params())
            .field("closure", &self.closure.label())
            .field("mutation", &self.mutation)
            .finish()
    }
}

/// Sign a family imposes on the closure, as (argument index, sign).
fn required_sign(family: Family) -> Option<(usize, Sign)> {
    match family {
        Family::Hyp2 | Family::Hyp3 => Some((0, Sign::Negative)),
        Family::Ell2 | Family::Ell3 => Some((0, Sign::Positive)),
        Family::Nil3 | Family::EulerGas => Some((1, Sign::Negative)),
        // ∂σ/∂α > 0 is equivalent to Π > 0, which is part of the cone.
        Family::Cemracs => None,
    }
}

impl GalileanSystem {
    /// Builds a system and verifies the closure against the family's
    /// convexity and sign requirements on a grid of its sampling box.
    pub fn new(family: Family, params: (f64, f64), closure: Arc<dyn EntropyClosure>) -> Result<Self> {
        let sys = Self::new_unchecked(family.name(), family, params, closure, Mutation::None)?;
        if let Some((idx, sign)) = required_sign(family) {
            let declared = sys.closure.sign_profile();
            let d = if idx == 0 { declared.first } else { declared.second };
            if d != Some(sign) {
                return Err(Error::InvalidParameter(format!(
                    "{family} needs ∂σ/∂{} {} but {} declares {:?}",
                    if idx == 0 { "α" } else { "β" },
                    if sign == Sign::Positive { "> 0" } else { "< 0" },
                    sys.closure.label(),
                    d
                )));
            }
        }
        sys.spot_check_closure()?;
        Ok(sys)
    }

    /// Builds a system without the closure checks (used for test fixtures).
    pub fn new_unchecked(
        name: &str,
        family: Family,
        params: (f64, f64),
        closure: Arc<dyn EntropyClosure>,
        mutation: Mutation,
    ) -> Result<Self> {
        let rep = GroupRep::new(family, params.0, params.1)?;
        if closure.arity() != family.dim() - 1 {
            return Err(Error::InvalidParameter(format!(
                "{family} needs a closure of arity {}, {} has arity {}",
                family.dim() - 1,
                closure.label(),
                closure.arity()
            )));
        }
        if matches!(family, Family::EulerGas | Family::Cemracs) && closure.polytropic_gamma().is_none() {
            return Err(Error::InvalidParameter(format!("{family} requires the gas closure")));
        }
        Ok(GalileanSystem { name: name.to_string(), rep, closure, mutation })
    }

    /// The family with its default parameters and built-in closure.
    pub fn standard(family: Family) -> Self {
        Self::configured(family, None, None, 1.4).expect("built-in systems are valid")
    }

    /// Family + optional parameters + optional closure name; `gamma` is used by the gas closure.
    pub fn configured(family: Family, params: Option<(f64, f64)>, closure: Option<&str>, gamma: f64) -> Result<Self> {
        let closure = match closure {
            Some(name) => Closure::from_name(name, gamma)?,
            None => default_closure(family, gamma)?,
        };
        Self::new(family, params.unwrap_or((1.0, 1.0)), Arc::new(closure))
    }

    fn spot_check_closure(&self) -> Result<()> {
        let c = &self.closure;
        let internal: Vec<Option<f64>> = match c.internal_box() {
            Some((lo, hi)) => (0..5).map(|k| Some(lo + (hi - lo) * k as f64 / 4.0)).collect(),
            None => vec![None],
        };
        for k in 0..5 {
            let x0 = 0.5 + 4.5 * k as f64 / 4.0;
            for b in &internal {
                let mut x = vec![x0];
                x.extend(b.iter());
                if !c.in_domain(&x) {
                    continue;
                }
                if self.family() == Family::Cemracs && !self.cone_contains(&self.rest_state(&x)) {
                    continue;
                }
                let bad = |what: &str| Error::InvalidParameter(format!("closure {} {what} at {x:?}", c.label()));
                if c.hess(&x).cholesky().is_none() {
                    return Err(bad("is not strictly convex"));
                }
                if !c.sign_profile().holds(&c.grad(&x)) {
                    return Err(bad("violates its declared sign profile"));
                }
            }
        }
        Ok(())
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> Family {
        self.rep.family()
    }

    pub fn rep(&self) -> &GroupRep {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn closure(&self) -> &dyn EntropyClosure {
        self.closure.as_ref()
    }

    pub fn mutation(&self) -> Mutation {
        self.mutation
    }

    pub fn gamma(&self) -> Option<f64> {
        self.closure.polytropic_gamma()
    }

    pub(crate) fn gamma_or_nan(&self) -> f64 {
        self.gamma().unwrap_or(f64::NAN)
    }

    /// The state at rest with the given closure arguments.
    pub fn rest_state(&self, rest: &[f64]) -> State {
        let mut w = State::zeros(self.dim());
        w[0] = rest[0];
        if self.dim() == 3 {
            w[2] = rest[1];
        }
        w
    }

    /// Boost-invariant closure arguments of `w` (rest radius and internal variable).
    /// No cone check: the result may be NaN outside the cone.
    pub fn rest_args(&self, w: &State) -> Vec<f64> {
        let (p, q) = self.rep.params();
        let (theta, zeta) = (w[0], w[1]);
        match self.family().kind() {
            Kind::Hyperbolic | Kind::Elliptic => {
                let s = if self.family().kind() == Kind::Hyperbolic { -1.0 } else { 1.0 };
                let xi = (theta * theta + s * (q / p) * zeta * zeta).sqrt();
                if self.dim() == 2 {
                    vec![xi]
                } else {
                    vec![xi, w[2]]
                }
            }
            Kind::Nilpotent => vec![theta, w[2] - q / (2.0 * p) * zeta * zeta / theta],
        }
    }

    /// `None` if `w` is in the cone, otherwise the violated inequality.
    pub fn cone_violation(&self, w: &State) -> Option<String> {
        if w.len() != self.dim() {
            return Some(format!("dimension {} (expected {})", w.len(), self.dim()));
        }
        if !w.iter().all(|x| x.is_finite()) {
            return Some("finite components".into());
        }
        let (p, q) = self.rep.params();
        let (theta, zeta) = (w[0], w[1]);
        match self.family() {
            Family::EulerGas => {
                if !(w[0] > 0.0) {
                    return Some(format!("ρ > 0 (ρ = {})", w[0]));
                }
                let kinetic = w[1] * w[1] / (2.0 * w[0]);
                if !(w[2] > kinetic) {
                    return Some(format!("ε > q²/(2ρ) (ε = {}, q²/(2ρ) = {kinetic})", w[2]));
                }
                return None;
            }
            Family::Cemracs => {
                if !(theta > 0.0) {
                    return Some(format!("θ > 0 (θ = {theta})"));
                }
                if !(w[2] > 0.0) {
                    return Some(format!("ψ > 0 (ψ = {})", w[2]));
                }
                let rest = self.rest_args(w);
                return match thermo::mech_pressure(Family::Cemracs, (p, q), self.closure(), &rest) {
                    Ok(pi) if pi > 0.0 && pi.is_finite() => None,
                    Ok(pi) => Some(format!("Π > 0 (Π = {pi})")),
                    Err(_) => Some("Π > 0 (Π undefined)".into()),
                };
            }
            _ => {}
        }
        if !(theta > 0.0) {
            return Some(format!("θ > 0 (θ = {theta})"));
        }
        if self.family().kind() == Kind::Hyperbolic {
            let bound = (p / q).sqrt() * theta;
            if !(zeta.abs() < bound) {
                return Some(format!("|ζ| < √(α/β)·θ (|ζ| = {}, bound = {bound})", zeta.abs()));
            }
        }
        let rest = self.rest_args(w);
        if !self.closure.in_domain(&rest) {
            return Some(format!("rest arguments {rest:?} in the domain of {}", self.closure.label()));
        }
        None
    }

    pub fn cone_contains(&self, w: &State) -> bool {
        self.cone_violation(w).is_none()
    }

    pub fn require_cone(&self, w: &State) -> Result<()> {
        match self.cone_violation(w) {
            None => Ok(()),
            Some(violated) => {
                Err(Error::ConeViolation { system: self.name.clone(), violated, state: w.as_slice().to_vec() })
            }
        }
    }

    fn velocity_unscaled(&self, w: &State) -> f64 {
        let (p, q) = self.rep.params();
        let (theta, zeta) = (w[0], w[1]);
        match self.family().kind() {
            Kind::Hyperbolic => {
                let x = (q / p).sqrt() * zeta / theta;
                // atanh evaluated on |x| keeps u(RW) = −u(W) exact.
                x.signum() * x.abs().atanh() / self.rep.rate()
            }
            Kind::Elliptic => ((q / p).sqrt() * zeta / theta).atan() / self.rep.rate(),
            Kind::Nilpotent => zeta / (p * theta),
        }
    }

    /// The velocity field `u(W)`.
    pub fn velocity(&self, w: &State) -> Result<f64> {
        self.require_cone(w)?;
        let u = self.velocity_unscaled(w);
        Ok(match self.mutation {
            Mutation::VelocityScale(k) => k * u,
            _ => u,
        })
    }

    /// Closed-form differential `du(W)`.
    pub fn velocity_differential(&self, w: &State) -> Result<State> {
        self.require_cone(w)?;
        let (p, q) = self.rep.params();
        let (theta, zeta) = (w[0], w[1]);
        let mut du = State::zeros(self.dim());
        match self.family().kind() {
            Kind::Hyperbolic | Kind::Elliptic => {
                let s = if self.family().kind() == Kind::Hyperbolic { -1.0 } else { 1.0 };
                let den = p * (theta * theta + s * q * zeta * zeta / p);
                du[0] = -zeta / den;
                du[1] = theta / den;
            }
            Kind::Nilpotent => {
                du[0] = -zeta / (p * theta * theta);
                du[1] = 1.0 / (p * theta);
            }
        }
        if let Mutation::VelocityScale(k) = self.mutation {
            du *= k;
        }
        Ok(du)
    }

    /// Mechanical pressure `Π` evaluated at the rest arguments of `w`.
    pub fn pressure(&self, w: &State) -> Result<f64> {
        self.require_cone(w)?;
        let pi = thermo::mech_pressure(self.family(), self.rep.params(), self.closure(), &self.rest_args(w))?;
        Ok(match self.mutation {
            Mutation::PressureScale(k) => k * pi,
            _ => pi,
        })
    }

    /// Thermodynamic flux `j(W) = f(W) − u(W)·W`.
    pub fn thermo_flux(&self, w: &State) -> Result<State> {
        let pi = self.pressure(w)?;
        let (p, q) = self.rep.params();
        let (theta, zeta) = (w[0], w[1]);
        let mut j = State::zeros(self.dim());
        match self.family() {
            Family::EulerGas => {
                j[1] = pi;
                j[2] = pi * self.velocity(w)?;
            }
            Family::Nil3 => {
                j[1] = pi;
                j[2] = pi * (q / p) * zeta / theta;
            }
            f => {
                let xi = self.rest_args(w)[0];
                let s = if f.kind() == Kind::Hyperbolic { 1.0 } else { -1.0 };
                j[0] = pi / xi * s * q * zeta / p;
                j[1] = pi / xi * theta;
            }
        }
        Ok(j)
    }

    /// Full flux `f(W) = u(W)·W + j(W)`.
    pub fn flux(&self, w: &State) -> Result<State> {
        Ok(w * self.velocity(w)? + self.thermo_flux(w)?)
    }

    /// `Y(v)·W` without branch bookkeeping.
    pub fn boost_state(&self, w: &State, v: f64) -> Result<State> {
        crate::group::apply(&self.rep.boost(v)?, w)
    }

    /// Whether boosting `w` by `v` stays on the principal branch.
    pub fn branch(&self, w: &State, v: f64) -> Result<Branch> {
        if self.family().kind() != Kind::Elliptic {
            return Ok(Branch::Principal);
        }
        self.require_cone(w)?;
        let reach = self.rep.rate() * (self.velocity_unscaled(w).abs() + v.abs());
        Ok(if reach < FRAC_PI_2 - BRANCH_MARGIN { Branch::Principal } else { Branch::Outside })
    }

    /// `Y(v)·W` together with its branch flag.
    pub fn boost_state_checked(&self, w: &State, v: f64) -> Result<(State, Branch)> {
        let branch = self.branch(w, v)?;
        Ok((self.boost_state(w, v)?, branch))
    }

    /// `Π(W) = Y(u(W))·W`, the rest-frame representative of `w`.
    pub fn rest_projection(&self, w: &State) -> Result<State> {
        let u = self.velocity(w)?;
        self.boost_state(w, u)
    }

    /// `df(W)` by central differences.
    pub fn jacobian(&self, w: &State) -> Result<DMatrix<f64>> {
        self.require_cone(w)?;
        fd::jacobian(w, |x| self.cone_contains(x), |x| self.flux(x))
    }

    /// Closed-form characteristic speeds where they are known.
    pub fn analytic_char_speeds(&self, w: &State) -> Result<Option<Vec<f64>>> {
        if self.mutation != Mutation::None {
            return Ok(None);
        }
        let Some(gamma) = self.gamma() else {
            return Ok(None);
        };
        let u = self.velocity(w)?;
        let c = match self.family() {
            Family::EulerGas => (gamma * self.pressure(w)? / w[0]).sqrt(),
            Family::Nil3 => {
                let (a, b) = self.rep.params();
                let rest = self.rest_args(w);
                (gamma * (gamma - 1.0) * rest[1] / (a * b * rest[0])).sqrt()
            }
            Family::Cemracs => {
                let y = self.quasilinear_state(w)?.y();
                (y - 2.0 * y * y + gamma / (gamma - 1.0) * y * y * y).sqrt()
            }
            _ => return Ok(None),
        };
        Ok(Some(vec![u - c, u, u + c]))
    }

    /// Sorted real eigenvalues of the finite-difference Jacobian.
    pub fn numeric_char_speeds(&self, w: &State) -> Result<Vec<f64>> {
        let jac = self.jacobian(w)?;
        let eig = jac.complex_eigenvalues();
        real_sorted(eig.iter(), w)
    }

    /// Characteristic speeds: analytic for the gas-type systems, numeric otherwise.
    pub fn char_speeds(&self, w: &State) -> Result<Vec<f64>> {
        match self.analytic_char_speeds(w)? {
            Some(s) => Ok(s),
            None => self.numeric_char_speeds(w),
        }
    }

    /// Upper bound of `|λ|` used by the solver (10 % margin on numeric estimates).
    pub fn max_wave_speed(&self, w: &State) -> Result<f64> {
        let (speeds, factor) = match self.analytic_char_speeds(w)? {
            Some(s) => (s, 1.0),
            None => (self.numeric_char_speeds(w)?, SPEED_SAFETY),
        };
        Ok(factor * speeds.iter().fold(0.0_f64, |a, s| a.max(s.abs())))
    }

    /// `V(W) = (θ, ζ/θ, Π/√(1+ζ²/θ²))` for the Cemracs system.
    pub fn quasilinear_state(&self, w: &State) -> Result<QuasilinearState> {
        if self.family() != Family::Cemracs {
            return Err(Error::InvalidParameter(format!(
                "quasilinear variables are defined for cemracs, not {}",
                self.family()
            )));
        }
        let pi = self.pressure(w)?;
        let xi_hat = w[1] / w[0];
        Ok(QuasilinearState { theta: w[0], xi_hat, phi_hat: pi / (1.0 + xi_hat * xi_hat).sqrt() })
    }
}

fn real_sorted<'a>(eig: impl Iterator<Item = &'a Complex<f64>>, w: &State) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for z in eig {
        if z.im.abs() > REAL_TOL * z.re.abs().max(1.0) || !z.re.is_finite() {
            return Err(Error::Hyperbolicity { state: w.as_slice().to_vec(), re: z.re, im: z.im });
        }
        out.push(z.re);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Quasilinear variables of the Cemracs system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasilinearState {
    pub theta: f64,
    pub xi_hat: f64,
    pub phi_hat: f64,
}

impl QuasilinearState {
    pub fn y(&self) -> f64 {
        self.phi_hat / self.theta
    }
}

/// The matrix `B(V)` of the Cemracs system written as `∂V/∂t + (u + B(V))·∂V/∂x = 0`.
pub fn cemracs_quasilinear(v: &QuasilinearState, gamma: f64) -> Result<DMatrix<f64>> {
    let y = v.y();
    if !(v.theta > 0.0 && y > 0.0) {
        return Err(Error::Admissibility(format!("need θ > 0 and y > 0, got θ = {}, y = {y}", v.theta)));
    }
    let (th, x, ph) = (v.theta, v.xi_hat, v.phi_hat);
    let s = 1.0 + x * x;
    let b31 = th / s * (y - (2.0 + x * x) * y * y + gamma / (gamma - 1.0) * y * y * y);
    Ok(DMatrix::from_row_slice(3, 3, &[0.0, th / s - ph, -x, 0.0, x * y, s / th, 0.0, b31, -x * y]))
}

/// Nonzero characteristic speed of `B(V)`: `√(y − 2y² + γ/(γ−1)·y³)`.
pub fn cemracs_sound_speed(y: f64, gamma: f64) -> f64 {
    (y - 2.0 * y * y + gamma / (gamma - 1.0) * y * y * y).sqrt()
}

fn default_closure(family: Family, gamma: f64) -> Result<Closure> {
    Ok(match family {
        Family::Hyp2 => Closure::Reciprocal,
        Family::Ell2 => Closure::Square,
        Family::Hyp3 => Closure::ReciprocalPlusSquare,
        Family::Ell3 => Closure::SumOfSquares,
        Family::Nil3 | Family::EulerGas | Family::Cemracs => Closure::gas(gamma)?,
    })
}

/// Names of the deliberately broken systems.
pub const FIXTURES: [&str; 3] = ["corrupted-fixture", "velocity-fixture", "sign-violating-fixture"];

/// The seven registered systems with default parameters.
pub fn registry() -> Vec<GalileanSystem> {
    Family::ALL.into_iter().map(GalileanSystem::standard).collect()
}

/// Mutation fixtures: gas-type nilpotent system with `Π` or `u` scaled by
/// 1.01, and an elliptic 3×3 system whose closure has `∂σ/∂α < 0`.
pub fn fixture(name: &str) -> Option<GalileanSystem> {
    let gas: Arc<dyn EntropyClosure> = Arc::new(Closure::PolytropicGas { gamma: 1.4 });
    let sys = match name {
        "corrupted-fixture" => {
            GalileanSystem::new_unchecked(name, Family::Nil3, (1.0, 1.0), gas, Mutation::PressureScale(1.01))
        }
        "velocity-fixture" => {
            GalileanSystem::new_unchecked(name, Family::Nil3, (1.0, 1.0), gas, Mutation::VelocityScale(1.01))
        }
        "sign-violating-fixture" => GalileanSystem::new_unchecked(
            name,
            Family::Ell3,
            (1.0, 1.0),
            Arc::new(Closure::ReciprocalPlusSquare),
            Mutation::None,
        ),
        _ => return None,
    };
    sys.ok()
}

/// Every name accepted by [`by_name`].
pub fn available_names() -> Vec<&'static str> {
    Family::ALL.iter().map(|f| f.name()).chain(FIXTURES).collect()
}

/// Looks up a registered system or fixture.
pub fn by_name(name: &str) -> Result<GalileanSystem> {
    if let Some(sys) = fixture(name) {
        return Ok(sys);
    }
    match name.parse::<Family>() {
        Ok(f) => Ok(GalileanSystem::standard(f)),
        Err(_) => Err(Error::InvalidParameter(format!(
            "unknown system '{name}' (available: {})",
            available_names().join(", ")
        ))),
    }
}

/// The family of a given state dimension and generator class.
///
/// A single conservation law (`m = 1`) admits no Galilean-invariant form
/// with a strictly convex entropy, so it is rejected.
pub fn family_for(dim: usize, kind: Kind) -> Result<Family> {
    match (dim, kind) {
        (1, _) => Err(Error::InvalidParameter(
            "m = 1: no Galilean-invariant scalar conservation law with a strictly convex entropy exists".into(),
        )),
        (2, Kind::Hyperbolic) => Ok(Family::Hyp2),
        (2, Kind::Elliptic) => Ok(Family::Ell2),
        (2, Kind::Nilpotent) => Err(Error::InvalidParameter("m = 2 has no nilpotent family".into())),
        (3, Kind::Hyperbolic) => Ok(Family::Hyp3),
        (3, Kind::Elliptic) => Ok(Family::Ell3),
        (3, Kind::Nilpotent) => Ok(Family::Nil3),
        (m, _) => Err(Error::InvalidParameter(format!("m = {m} is not classified (only m = 2, 3)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::state;

    #[test]
    fn cone_examples() {
        let hyp = GalileanSystem::standard(Family::Hyp2);
        assert!(hyp.cone_contains(&state(&[1.0, 0.5])));
        assert!(!hyp.cone_contains(&state(&[1.0, 1.5])));
        let gas = GalileanSystem::standard(Family::EulerGas);
        let v = gas.cone_violation(&state(&[1.0, 1.0, 0.4])).unwrap();
        assert!(v.starts_with("ε > q²/(2ρ)"), "{v}");
        let cem = GalileanSystem::standard(Family::Cemracs);
        assert!(cem.cone_contains(&state(&[1.0, 0.0, 2.5])));
        // (γ−1)ψ/θ^γ = e^γ puts the denominator of Π at zero; beyond it Π < 0.
        let psi = 1.4_f64.exp() / 0.4 * 1.5;
        assert!(cem.cone_violation(&state(&[1.0, 0.0, psi])).unwrap().starts_with("Π > 0"));
    }

    #[test]
    fn velocity_examples() {
        let hyp = GalileanSystem::standard(Family::Hyp2);
        let u = hyp.velocity(&state(&[1f64.cosh(), -1f64.sinh()])).unwrap();
        assert!((u + 1.0).abs() < 1e-14);
        let gas = GalileanSystem::standard(Family::EulerGas);
        assert_eq!(gas.velocity(&state(&[2.0, 4.0, 10.0])).unwrap(), 2.0);
        for sys in registry() {
            let w = sys.rest_state(&[1.0, 2.5][..sys.dim() - 1]);
            assert_eq!(sys.velocity(&w).unwrap(), 0.0, "{}", sys.name());
        }
    }

    #[test]
    fn flux_examples() {
        let gas = GalileanSystem::standard(Family::EulerGas);
        let j = gas.thermo_flux(&state(&[1.0, 0.0, 2.5])).unwrap();
        // γ − 1 is not exactly 0.4 in binary, so p = 1 holds to one ulp.
        assert!((&j - state(&[0.0, 1.0, 0.0])).amax() < 1e-15);
        let f = gas.flux(&state(&[2.0, 4.0, 10.0])).unwrap();
        let expect = state(&[4.0, 10.4, 24.8]);
        assert!((f - expect).amax() < 1e-13);
        let nil = GalileanSystem::standard(Family::Nil3);
        assert!((nil.thermo_flux(&state(&[1.0, 0.0, 2.5])).unwrap() - j).amax() < 1e-15);
    }

    #[test]
    fn projection_examples() {
        let gas = GalileanSystem::standard(Family::EulerGas);
        let p = gas.rest_projection(&state(&[2.0, 4.0, 10.0])).unwrap();
        assert!((p - state(&[2.0, 0.0, 6.0])).amax() < 1e-14);
        let ell = GalileanSystem::standard(Family::Ell2);
        let p = ell.rest_projection(&state(&[3.0, 4.0])).unwrap();
        assert!((p - state(&[5.0, 0.0])).amax() < 1e-14);
        let w = state(&[1.3, 0.0, 2.0]);
        assert_eq!(GalileanSystem::standard(Family::Hyp3).rest_projection(&w).unwrap(), w);
    }

    #[test]
    fn rest_speeds() {
        let gas = GalileanSystem::standard(Family::EulerGas);
        let w = state(&[1.0, 0.0, 2.5]);
        let c = 1.4_f64.sqrt();
        for s in [gas.char_speeds(&w).unwrap(), gas.numeric_char_speeds(&w).unwrap()] {
            assert!((s[0] + c).abs() < 1e-5 && s[1].abs() < 1e-5 && (s[2] - c).abs() < 1e-5, "{s:?}");
        }
        let cem = GalileanSystem::standard(Family::Cemracs);
        for s in [cem.char_speeds(&w).unwrap(), cem.numeric_char_speeds(&w).unwrap()] {
            assert!((s[2] - 0.451754).abs() < 1e-5 && (s[0] + 0.451754).abs() < 1e-5, "{s:?}");
        }
    }

    #[test]
    fn quasilinear_rest() {
        let v = QuasilinearState { theta: 1.0, xi_hat: 0.0, phi_hat: 2.0 / 7.0 };
        let b = cemracs_quasilinear(&v, 1.4).unwrap();
        assert_eq!(b[(1, 1)], 0.0);
        assert_eq!(b[(2, 2)], 0.0);
        let mut eig: Vec<f64> = b.complex_eigenvalues().iter().map(|z| z.re).collect();
        eig.sort_by(f64::total_cmp);
        assert!((eig[2] - 0.451754).abs() < 1e-6 && (eig[0] + 0.451754).abs() < 1e-6);
        let bad = QuasilinearState { phi_hat: -1.0, ..v };
        assert!(matches!(cemracs_quasilinear(&bad, 1.4), Err(Error::Admissibility(_))));
    }

    #[test]
    fn registry_and_names() {
        assert_eq!(registry().len(), 7);
        for n in available_names() {
            assert_eq!(by_name(n).unwrap().name(), n);
        }
        let err = by_name("plasma").unwrap_err().to_string();
        assert!(err.contains("cemracs") && err.contains("hyp2"), "{err}");
        assert!(family_for(1, Kind::Elliptic).is_err());
        assert_eq!(family_for(3, Kind::Nilpotent).unwrap(), Family::Nil3);
    }

    #[test]
    fn closure_checks_at_construction() {
        // 1/α + β² has ∂σ/∂α < 0, which the elliptic family forbids.
        let bad = GalileanSystem::new(Family::Ell3, (1.0, 1.0), Arc::new(Closure::ReciprocalPlusSquare));
        assert!(bad.is_err());
        let wrong_arity = GalileanSystem::new(Family::Hyp2, (1.0, 1.0), Arc::new(Closure::SumOfSquares));
        assert!(wrong_arity.is_err());
        assert!(GalileanSystem::new(Family::Ell2, (1.0, 1.0), Arc::new(Closure::HalfSquare)).is_ok());
    }
}
