//! Rest-frame entropy closures, their convex conjugates, mechanical
//! pressures and the full-state entropy `η`, its gradient `φ` and dual `η*`.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::group::{Family, State};
use crate::systems::GalileanSystem;

/// Sign of a partial derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn holds(self, x: f64) -> bool {
        match self {
            Sign::Positive => x > 0.0,
            Sign::Negative => x < 0.0,
        }
    }
}

/// Declared signs of `∂σ/∂α` and `∂σ/∂β` on the whole domain (`None` = no sign).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SignProfile {
    pub first: Option<Sign>,
    pub second: Option<Sign>,
}

impl SignProfile {
    pub fn holds(&self, grad: &DVector<f64>) -> bool {
        let ok = |s: Option<Sign>, i: usize| s.is_none_or(|s| grad.get(i).is_some_and(|&g| s.holds(g)));
        ok(self.first, 0) && ok(self.second, 1)
    }
}

/// A strictly convex rest-frame entropy `σ(α)` or `σ(α, β)`.
///
/// The first argument is always the rest "radius" (θ at rest) and ranges
/// over `]0, ∞[`; the second, when present, is the internal variable.
pub trait EntropyClosure: fmt::Debug + Send + Sync {
    fn label(&self) -> String;
    fn arity(&self) -> usize;
    fn in_domain(&self, x: &[f64]) -> bool;
    fn eval(&self, x: &[f64]) -> f64;
    fn grad(&self, x: &[f64]) -> DVector<f64>;
    fn hess(&self, x: &[f64]) -> DMatrix<f64>;
    fn sign_profile(&self) -> SignProfile;
    /// Sampling interval for the internal argument, strictly inside the domain.
    fn internal_box(&self) -> Option<(f64, f64)>;
    /// Starting point for the gradient inversion.
    fn initial_guess(&self) -> DVector<f64> {
        DVector::from_element(self.arity(), 1.0)
    }
    /// `Some(γ)` for the polytropic gas entropy.
    fn polytropic_gamma(&self) -> Option<f64> {
        None
    }
}

/// Built-in closures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Closure {
    /// `ξ²/2`
    HalfSquare,
    /// `1/ξ`
    Reciprocal,
    /// `ξ²`
    Square,
    /// `1/α + β²`
    ReciprocalPlusSquare,
    /// `α² + β²`
    SumOfSquares,
    /// `−α log[(γ−1)β/α^γ]`: minus the physical entropy of a polytropic gas
    /// with density α and internal energy density β.
    PolytropicGas { gamma: f64 },
}

impl Closure {
    pub const NAMES: [&'static str; 6] =
        ["half-square", "reciprocal", "square", "reciprocal-plus-square", "sum-of-squares", "gas"];

    pub fn from_name(name: &str, gamma: f64) -> Result<Closure> {
        let c = match name.trim().to_ascii_lowercase().as_str() {
            "half-square" => Closure::HalfSquare,
            "reciprocal" => Closure::Reciprocal,
            "square" => Closure::Square,
            "reciprocal-plus-square" => Closure::ReciprocalPlusSquare,
            "sum-of-squares" => Closure::SumOfSquares,
            "gas" => Closure::gas(gamma)?,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown closure '{other}' (available: {})",
                    Closure::NAMES.join(", ")
                )))
            }
        };
        Ok(c)
    }

    pub fn gas(gamma: f64) -> Result<Closure> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::InvalidParameter(format!("γ must exceed 1, got {gamma}")));
        }
        Ok(Closure::PolytropicGas { gamma })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Closure::HalfSquare => "half-square",
            Closure::Reciprocal => "reciprocal",
            Closure::Square => "square",
            Closure::ReciprocalPlusSquare => "reciprocal-plus-square",
            Closure::SumOfSquares => "sum-of-squares",
            Closure::PolytropicGas { .. } => "gas",
        }
    }
}

impl EntropyClosure for Closure {
    fn label(&self) -> String {
        match self {
            Closure::PolytropicGas { gamma } => format!("gas(gamma={gamma})"),
            c => c.name().to_string(),
        }
    }

    fn arity(&self) -> usize {
        match self {
            Closure::HalfSquare | Closure::Reciprocal | Closure::Square => 1,
            _ => 2,
        }
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        if x.len() != self.arity() || !x.iter().all(|v| v.is_finite()) || x[0] <= 0.0 {
            return false;
        }
        match self {
            Closure::PolytropicGas { .. } => x[1] > 0.0,
            _ => true,
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Closure::HalfSquare => 0.5 * x[0] * x[0],
            Closure::Reciprocal => 1.0 / x[0],
            Closure::Square => x[0] * x[0],
            Closure::ReciprocalPlusSquare => 1.0 / x[0] + x[1] * x[1],
            Closure::SumOfSquares => x[0] * x[0] + x[1] * x[1],
            Closure::PolytropicGas { gamma } => {
                let (a, b) = (x[0], x[1]);
                -a * ((gamma - 1.0) * b).ln() + gamma * a * a.ln()
            }
        }
    }

    fn grad(&self, x: &[f64]) -> DVector<f64> {
        let v = match *self {
            Closure::HalfSquare => vec![x[0]],
            Closure::Reciprocal => vec![-1.0 / (x[0] * x[0])],
            Closure::Square => vec![2.0 * x[0]],
            Closure::ReciprocalPlusSquare => vec![-1.0 / (x[0] * x[0]), 2.0 * x[1]],
            Closure::SumOfSquares => vec![2.0 * x[0], 2.0 * x[1]],
            Closure::PolytropicGas { gamma } => {
                let (a, b) = (x[0], x[1]);
                vec![-((gamma - 1.0) * b).ln() + gamma * a.ln() + gamma, -a / b]
            }
        };
        DVector::from_vec(v)
    }

    fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        match *self {
            Closure::HalfSquare => DMatrix::from_element(1, 1, 1.0),
            Closure::Reciprocal => DMatrix::from_element(1, 1, 2.0 / x[0].powi(3)),
            Closure::Square => DMatrix::from_element(1, 1, 2.0),
            Closure::ReciprocalPlusSquare => DMatrix::from_row_slice(2, 2, &[2.0 / x[0].powi(3), 0.0, 0.0, 2.0]),
            Closure::SumOfSquares => DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]),
            Closure::PolytropicGas { gamma } => {
                let (a, b) = (x[0], x[1]);
                DMatrix::from_row_slice(2, 2, &[gamma / a, -1.0 / b, -1.0 / b, a / (b * b)])
            }
        }
    }

    fn sign_profile(&self) -> SignProfile {
        match self {
            Closure::HalfSquare | Closure::Square | Closure::SumOfSquares => {
                SignProfile { first: Some(Sign::Positive), second: None }
            }
            Closure::Reciprocal | Closure::ReciprocalPlusSquare => {
                SignProfile { first: Some(Sign::Negative), second: None }
            }
            Closure::PolytropicGas { .. } => SignProfile { first: None, second: Some(Sign::Negative) },
        }
    }

    fn internal_box(&self) -> Option<(f64, f64)> {
        match self {
            Closure::HalfSquare | Closure::Reciprocal | Closure::Square => None,
            Closure::ReciprocalPlusSquare | Closure::SumOfSquares => Some((-2.0, 2.0)),
            Closure::PolytropicGas { .. } => Some((0.5, 5.0)),
        }
    }

    fn polytropic_gamma(&self) -> Option<f64> {
        match *self {
            Closure::PolytropicGas { gamma } => Some(gamma),
            _ => None,
        }
    }
}

/// A point of the dual space: slopes `(A[, B])` and the conjugate value `σ*`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint {
    pub slopes: DVector<f64>,
    pub value: f64,
}

fn check_domain(closure: &dyn EntropyClosure, x: &[f64]) -> Result<()> {
    if closure.in_domain(x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{x:?} is outside the domain of {}", closure.label())))
    }
}

/// Legendre transform at a gradient point: `σ*(dσ(x)) = x·dσ(x) − σ(x)`.
pub fn conjugate_at_gradient(closure: &dyn EntropyClosure, x: &[f64]) -> Result<DualPoint> {
    check_domain(closure, x)?;
    let slopes = closure.grad(x);
    let value = slopes.iter().zip(x).map(|(s, x)| s * x).sum::<f64>() - closure.eval(x);
    Ok(DualPoint { slopes, value })
}

const NEWTON_MAX_ITER: usize = 100;

/// Solves `dσ(x) = slopes` by damped Newton iteration (bisection fallback in 1-D).
pub fn solve_gradient(closure: &dyn EntropyClosure, slopes: &[f64]) -> Result<DVector<f64>> {
    if slopes.len() != closure.arity() {
        return Err(Error::Dimension { expected: closure.arity(), got: slopes.len() });
    }
    let target = DVector::from_column_slice(slopes);
    let tol = 1e-12 * target.amax().max(1.0);
    let residual = |x: &DVector<f64>| closure.grad(x.as_slice()) - &target;

    let mut x = closure.initial_guess();
    let mut r = residual(&x);
    for _ in 0..NEWTON_MAX_ITER {
        if r.amax() <= tol {
            return Ok(x);
        }
        let h = closure.hess(x.as_slice());
        let step = h
            .cholesky()
            .ok_or_else(|| Error::Domain(format!("Hessian of {} is not SPD at {:?}", closure.label(), x.as_slice())))?
            .solve(&r);
        let norm = r.norm();
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-14 {
            let trial = &x - &step * t;
            if closure.in_domain(trial.as_slice()) {
                let rt = residual(&trial);
                if rt.norm() < norm {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((xn, rn)) => {
                x = xn;
                r = rn;
            }
            None => break,
        }
    }
    if r.amax() <= tol {
        return Ok(x);
    }
    if closure.arity() == 1 {
        return bisect_gradient(closure, slopes[0], tol);
    }
    Err(Error::NoSolution(format!("slopes {slopes:?} not reached by d{} (residual {:e})", closure.label(), r.amax())))
}

fn bisect_gradient(closure: &dyn EntropyClosure, target: f64, tol: f64) -> Result<DVector<f64>> {
    let g = |x: f64| closure.grad(&[x])[0] - target;
    let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
    let mut tries = 0;
    while g(lo) > 0.0 {
        lo *= 0.5;
        tries += 1;
        if tries > 1100 || !closure.in_domain(&[lo]) {
            return Err(Error::NoSolution(format!("slope {target} below the range of d{}", closure.label())));
        }
    }
    while g(hi) < 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 1100 || !hi.is_finite() {
            return Err(Error::NoSolution(format!("slope {target} above the range of d{}", closure.label())));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm.abs() <= tol || mid == lo || mid == hi {
            return Ok(DVector::from_element(1, mid));
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DVector::from_element(1, 0.5 * (lo + hi)))
}

/// `σ*(slopes)` for slopes in the range of `dσ`.
pub fn conjugate_general(closure: &dyn EntropyClosure, slopes: &[f64]) -> Result<DualPoint> {
    let x = solve_gradient(closure, slopes)?;
    conjugate_at_gradient(closure, x.as_slice())
}

/// The mechanical pressure `Π` from the rest arguments.
pub fn mech_pressure(family: Family, params: (f64, f64), closure: &dyn EntropyClosure, rest: &[f64]) -> Result<f64> {
    check_domain(closure, rest)?;
    let (_, q) = params;
    let degenerate =
        |what: &str| Error::DegenerateClosure(format!("{what} vanishes at {rest:?} for {}", closure.label()));
    match family {
        Family::Cemracs => {
            let gamma = closure
                .polytropic_gamma()
                .ok_or_else(|| Error::InvalidParameter("cemracs requires the gas closure".into()))?;
            let (theta, psi) = (rest[0], rest[1]);
            let denom = gamma - ((gamma - 1.0) * psi / theta.powf(gamma)).ln();
            if denom == 0.0 {
                return Err(degenerate("γ − log[(γ−1)ψ/θ^γ]"));
            }
            Ok((gamma - 1.0) * theta / denom)
        }
        Family::EulerGas => {
            let gamma = closure
                .polytropic_gamma()
                .ok_or_else(|| Error::InvalidParameter("eulergas requires the gas closure".into()))?;
            Ok((gamma - 1.0) * rest[1])
        }
        _ => {
            let d = conjugate_at_gradient(closure, rest)?;
            let (slope, sign) = match family {
                Family::Hyp2 | Family::Hyp3 => (d.slopes[0], -1.0),
                Family::Ell2 | Family::Ell3 => (d.slopes[0], 1.0),
                _ => (d.slopes[1], -1.0),
            };
            if slope == 0.0 {
                return Err(degenerate("the pressure slope"));
            }
            Ok(sign * d.value / (q * slope))
        }
    }
}

/// `η(W)`.
pub fn entropy(sys: &GalileanSystem, w: &State) -> Result<f64> {
    sys.require_cone(w)?;
    if sys.family() == Family::EulerGas {
        let (gamma, rho, p) = (sys.gamma_or_nan(), w[0], sys.pressure(w)?);
        return Ok(-rho * (p / rho.powf(gamma)).ln());
    }
    Ok(sys.closure().eval(&sys.rest_args(w)))
}

/// `φ(W) = dη(W)` from closed forms.
pub fn entropy_variables(sys: &GalileanSystem, w: &State) -> Result<State> {
    sys.require_cone(w)?;
    let (p, q) = sys.rep().params();
    let rest = sys.rest_args(w);
    let g = sys.closure().grad(&rest);
    let phi = match sys.family() {
        Family::Hyp2 | Family::Ell2 => {
            let sign = if sys.family() == Family::Hyp2 { -1.0 } else { 1.0 };
            let k = g[0] / rest[0];
            vec![k * w[0], sign * k * (q / p) * w[1]]
        }
        Family::Hyp3 | Family::Ell3 | Family::Cemracs => {
            let sign = if sys.family() == Family::Hyp3 { -1.0 } else { 1.0 };
            let xi = rest[0];
            vec![w[0] / xi * g[0], sign * q * w[1] / (p * xi) * g[0], g[1]]
        }
        Family::Nil3 => {
            let r = w[1] / w[0];
            vec![g[0] + q / (2.0 * p) * r * r * g[1], -(q / p) * r * g[1], g[1]]
        }
        Family::EulerGas => {
            let gamma = sys.gamma_or_nan();
            let rho = w[0];
            let u = w[1] / rho;
            let pressure = sys.pressure(w)?;
            let temperature = pressure / ((gamma - 1.0) * rho);
            let s = (pressure / rho.powf(gamma)).ln();
            let mu = temperature * (gamma - s);
            vec![(mu - 0.5 * u * u) / temperature, u / temperature, -1.0 / temperature]
        }
    };
    Ok(State::from_vec(phi))
}

/// `η*(φ(W)) = φ(W)·W − η(W)`.
pub fn entropy_dual(sys: &GalileanSystem, w: &State) -> Result<f64> {
    Ok(entropy_variables(sys, w)?.dot(w) - entropy(sys, w)?)
}

/// Closed-form `det d²η(W)`.
///
/// For the nilpotent families the determinant is evaluated as
/// `−(b/(aθ))·∂σ/∂β·det d²σ` at the rest arguments, which keeps the mixed
/// derivative of σ.
pub fn hessian_det_closed_form(sys: &GalileanSystem, w: &State) -> Result<f64> {
    sys.require_cone(w)?;
    let (p, q) = sys.rep().params();
    let rest = sys.rest_args(w);
    let c = sys.closure();
    let g = c.grad(&rest);
    let h = c.hess(&rest);
    let det = match sys.family() {
        Family::Hyp2 => -(q / p) * g[0] * h[(0, 0)] / rest[0],
        Family::Ell2 => (q / p) * g[0] * h[(0, 0)] / rest[0],
        Family::Hyp3 => -(q / (p * rest[0])) * g[0] * h.determinant(),
        Family::Ell3 | Family::Cemracs => (q / (p * rest[0])) * g[0] * h.determinant(),
        Family::Nil3 | Family::EulerGas => -(q / (p * rest[0])) * g[1] * h.determinant(),
    };
    Ok(det)
}

/// Temperature, pressure and chemical potential of a gas state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasIntensive {
    pub temperature: f64,
    pub pressure: f64,
    pub chemical_potential: f64,
}

/// Maps `(T, p, μ)` to the dual point `(dσ, σ*) = ((μ/T, −1/T), p/T)`.
pub fn gas_thermo_map(temperature: f64, pressure: f64, chemical_potential: f64) -> Result<DualPoint> {
    if !(temperature > 0.0
        && pressure > 0.0
        && chemical_potential.is_finite()
        && temperature.is_finite()
        && pressure.is_finite())
    {
        return Err(Error::Domain(format!(
            "non-physical (T, p, μ) = ({temperature}, {pressure}, {chemical_potential})"
        )));
    }
    Ok(DualPoint {
        slopes: DVector::from_vec(vec![chemical_potential / temperature, -1.0 / temperature]),
        value: pressure / temperature,
    })
}

/// Inverse of [`gas_thermo_map`].
pub fn gas_thermo_inverse(d: &DualPoint) -> Result<GasIntensive> {
    if d.slopes.len() != 2 || !(d.slopes[1] < 0.0) || !(d.value > 0.0) {
        return Err(Error::Domain(format!(
            "dual point {:?} / {} does not describe a gas state",
            d.slopes.as_slice(),
            d.value
        )));
    }
    let temperature = -1.0 / d.slopes[1];
    Ok(GasIntensive { temperature, pressure: d.value * temperature, chemical_potential: d.slopes[0] * temperature })
}

/// `σ = (μ/T)ρ − ψ/T − p/T` recovered from the dual point.
pub fn gas_entropy_from_dual(d: &DualPoint, rho: f64, psi: f64) -> f64 {
    d.slopes[0] * rho + d.slopes[1] * psi - d.value
}

/// `(T, p, μ)` of the closure at density `rho` and internal energy density `psi`.
pub fn gas_intensive_at(closure: &dyn EntropyClosure, rho: f64, psi: f64) -> Result<GasIntensive> {
    gas_thermo_inverse(&conjugate_at_gradient(closure, &[rho, psi])?)
}
