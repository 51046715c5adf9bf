//! Matrix representations of the one-dimensional Galileo group.
//!
//! Every family acts on its state space through a one-parameter group of
//! boosts `Y(v) = exp(v·G)` plus a space reflection `R`. We work in the
//! adapted basis where `R` is diagonal: component 1 (and 3) are even under
//! reflection, component 2 is odd.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A vector of conserved quantities.
pub type State = DVector<f64>;

/// Builds a state from a slice.
pub fn state(components: &[f64]) -> State {
    DVector::from_column_slice(components)
}

/// Conjugacy class of the boost generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    /// `G² = +ab·Id`
    Hyperbolic,
    /// `G² = −ab·Id`
    Elliptic,
    /// `G³ = 0`
    Nilpotent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Hyp2,
    Ell2,
    Hyp3,
    Ell3,
    Nil3,
    EulerGas,
    Cemracs,
}

impl Family {
    pub const ALL: [Family; 7] =
        [Family::Hyp2, Family::Ell2, Family::Hyp3, Family::Ell3, Family::Nil3, Family::EulerGas, Family::Cemracs];

    pub fn dim(self) -> usize {
        match self {
            Family::Hyp2 | Family::Ell2 => 2,
            _ => 3,
        }
    }

    pub fn kind(self) -> Kind {
        match self {
            Family::Hyp2 | Family::Hyp3 => Kind::Hyperbolic,
            Family::Ell2 | Family::Ell3 | Family::Cemracs => Kind::Elliptic,
            Family::Nil3 | Family::EulerGas => Kind::Nilpotent,
        }
    }

    /// Families whose group parameters are pinned to 1.
    pub fn has_fixed_params(self) -> bool {
        matches!(self, Family::EulerGas | Family::Cemracs)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Hyp2 => "hyp2",
            Family::Ell2 => "ell2",
            Family::Hyp3 => "hyp3",
            Family::Ell3 => "ell3",
            Family::Nil3 => "nil3",
            Family::EulerGas => "eulergas",
            Family::Cemracs => "cemracs",
        }
    }

    /// Names of the state components, used for CSV headers.
    pub fn component_names(self) -> &'static [&'static str] {
        match self {
            Family::Hyp2 | Family::Ell2 => &["theta", "zeta"],
            Family::EulerGas => &["rho", "q", "eps"],
            _ => &["theta", "zeta", "psi"],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Family::ALL.into_iter().find(|f| f.name() == key).ok_or_else(|| {
            let names: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
            Error::InvalidParameter(format!("unknown family '{s}' (available: {})", names.join(", ")))
        })
    }
}

/// Generator, boosts and reflection of one family.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRep {
    family: Family,
    p: f64,
    q: f64,
    generator: DMatrix<f64>,
    reflection: DMatrix<f64>,
}

impl GroupRep {
    /// `p, q` are (α, β) for the 2×2 families and (a, b) for the 3×3 ones.
    pub fn new(family: Family, p: f64, q: f64) -> Result<Self> {
        for (label, x) in [("first", p), ("second", q)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{label} group parameter of {family} must be finite and positive, got {x}"
                )));
            }
        }
        if family.has_fixed_params() && (p != 1.0 || q != 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{family} has its group parameters fixed to 1, got ({p}, {q})"
            )));
        }
        let m = family.dim();
        let mut g = DMatrix::zeros(m, m);
        match (family.kind(), m) {
            (Kind::Hyperbolic, _) => {
                g[(0, 1)] = -q;
                g[(1, 0)] = -p;
            }
            (Kind::Elliptic, _) => {
                g[(0, 1)] = q;
                g[(1, 0)] = -p;
            }
            (Kind::Nilpotent, _) => {
                g[(1, 0)] = -p;
                g[(2, 1)] = -q;
            }
        }
        let mut r = DMatrix::identity(m, m);
        r[(1, 1)] = -1.0;
        Ok(GroupRep { family, p, q, generator: g, reflection: r })
    }

    /// The representation with unit parameters.
    pub fn standard(family: Family) -> Self {
        GroupRep::new(family, 1.0, 1.0).expect("unit parameters are valid")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> (f64, f64) {
        (self.p, self.q)
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn reflection(&self) -> &DMatrix<f64> {
        &self.reflection
    }

    /// `√(pq)`: the rate of the hyperbolic/elliptic functions in `Y(v)`.
    pub fn rate(&self) -> f64 {
        (self.p * self.q).sqrt()
    }

    /// Closed-form `Y(v)`.
    pub fn boost(&self, v: f64) -> Result<DMatrix<f64>> {
        if !v.is_finite() {
            return Err(Error::Domain(format!("boost velocity must be finite, got {v}")));
        }
        let m = self.dim();
        let (p, q) = (self.p, self.q);
        let mut y = DMatrix::identity(m, m);
        match self.family.kind() {
            Kind::Hyperbolic => {
                let kv = self.rate() * v;
                let (ch, sh) = (kv.cosh(), kv.sinh());
                y[(0, 0)] = ch;
                y[(0, 1)] = -(q / p).sqrt() * sh;
                y[(1, 0)] = -(p / q).sqrt() * sh;
                y[(1, 1)] = ch;
            }
            Kind::Elliptic => {
                let kv = self.rate() * v;
                let (c, s) = (kv.cos(), kv.sin());
                y[(0, 0)] = c;
                y[(0, 1)] = (q / p).sqrt() * s;
                y[(1, 0)] = -(p / q).sqrt() * s;
                y[(1, 1)] = c;
            }
            Kind::Nilpotent => {
                y[(1, 0)] = -p * v;
                y[(2, 0)] = p * q * v * v / 2.0;
                y[(2, 1)] = -q * v;
            }
        }
        Ok(y)
    }
}

/// Matrix–vector product with a dimension check.
pub fn apply(matrix: &DMatrix<f64>, w: &State) -> Result<State> {
    if matrix.ncols() != w.len() {
        return Err(Error::Dimension { expected: matrix.ncols(), got: w.len() });
    }
    Ok(matrix * w)
}

/// Max-abs residuals of the three group axioms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomResiduals {
    /// `Y(v)Y(w) − Y(v+w)`
    pub composition: f64,
    /// `R² − Id`
    pub involution: f64,
    /// `Y(v)·R·Y(v) − R`
    pub reflection: f64,
}

impl AxiomResiduals {
    pub fn max(&self) -> f64 {
        self.composition.max(self.involution).max(self.reflection)
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn check_group_axioms(rep: &GroupRep, v: f64, w: f64) -> Result<AxiomResiduals> {
    let yv = rep.boost(v)?;
    let yw = rep.boost(w)?;
    let yvw = rep.boost(v + w)?;
    let r = rep.reflection();
    let id = DMatrix::identity(rep.dim(), rep.dim());
    Ok(AxiomResiduals {
        composition: max_abs(&(&yv * &yw - yvw)),
        involution: max_abs(&(r * r - id)),
        reflection: max_abs(&(&yv * r * &yv - r)),
    })
}

/// Truncated power series of `exp(v·G)` compared against the closed-form boost.
pub fn generator_exp_check(rep: &GroupRep, v: f64, n_terms: usize) -> Result<f64> {
    let m = rep.dim();
    let vg = rep.generator() * v;
    let mut term = DMatrix::identity(m, m);
    let mut sum = term.clone();
    for k in 1..n_terms {
        term = &term * &vg / k as f64;
        sum += &term;
    }
    Ok(max_abs(&(sum - rep.boost(v)?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_boost_of_unit_state() {
        let y = GroupRep::standard(Family::EulerGas).boost(1.0).unwrap();
        let w = apply(&y, &state(&[1.0, 0.0, 1.0])).unwrap();
        assert_eq!(w, state(&[1.0, -1.0, 1.5]));
    }

    #[test]
    fn nilpotent_unit_params_equal_euler() {
        let nil = GroupRep::standard(Family::Nil3);
        let gas = GroupRep::standard(Family::EulerGas);
        for v in [-3.0, -0.2, 0.0, 0.7, 4.1] {
            assert_eq!(nil.boost(v).unwrap(), gas.boost(v).unwrap());
        }
    }

    #[test]
    fn boost_at_zero_is_identity() {
        for f in Family::ALL {
            let rep = GroupRep::standard(f);
            assert_eq!(rep.boost(0.0).unwrap(), DMatrix::identity(f.dim(), f.dim()));
            let r = check_group_axioms(&rep, 0.0, 0.0).unwrap();
            assert_eq!(r, AxiomResiduals { composition: 0.0, involution: 0.0, reflection: 0.0 });
        }
    }

    #[test]
    fn reflections_flip_second_component() {
        let w = apply(GroupRep::standard(Family::Hyp2).reflection(), &state(&[3.0, 4.0])).unwrap();
        assert_eq!(w, state(&[3.0, -4.0]));
        let w = apply(GroupRep::standard(Family::EulerGas).reflection(), &state(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(w, state(&[1.0, -2.0, 3.0]));
    }

    #[test]
    fn apply_checks_dimensions() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert_eq!(apply(&id, &state(&[3.0, 4.0])).unwrap(), state(&[3.0, 4.0]));
        assert!(matches!(apply(&id, &state(&[1.0, 2.0, 3.0])), Err(Error::Dimension { .. })));
    }

    #[test]
    fn axiom_examples() {
        let hyp = GroupRep::standard(Family::Hyp2);
        assert!(check_group_axioms(&hyp, 0.3, -0.7).unwrap().max() < 1e-12);
        let ell = GroupRep::new(Family::Ell3, 2.0, 0.5).unwrap();
        assert!(check_group_axioms(&ell, 1.1, 0.4).unwrap().max() < 1e-12);
    }

    #[test]
    fn series_checks() {
        let nil = GroupRep::standard(Family::Nil3);
        assert!(generator_exp_check(&nil, 5.0, 20).unwrap() < 1e-12);
        let hyp = GroupRep::standard(Family::Hyp2);
        assert!(generator_exp_check(&hyp, 1.0, 30).unwrap() < 1e-12);
        let ell = GroupRep::standard(Family::Ell2);
        assert_eq!(generator_exp_check(&ell, 0.0, 25).unwrap(), 0.0);
    }

    #[test]
    fn generator_powers() {
        let (p, q) = (1.7, 0.3);
        for (family, sign) in [(Family::Hyp2, 1.0), (Family::Hyp3, 1.0), (Family::Ell2, -1.0), (Family::Ell3, -1.0)] {
            let rep = GroupRep::new(family, p, q).unwrap();
            let g = rep.generator();
            let m = rep.dim();
            let mut expect = DMatrix::identity(m, m) * (sign * p * q);
            if m == 3 {
                expect[(2, 2)] = 0.0;
            }
            assert_eq!(g * g, expect, "{family}");
        }
        let nil = GroupRep::new(Family::Nil3, p, q).unwrap();
        let g = nil.generator();
        let g2 = g * g;
        let mut expect = DMatrix::zeros(3, 3);
        expect[(2, 0)] = p * q;
        assert_eq!(g2, expect);
        assert_eq!(&g2 * g, DMatrix::zeros(3, 3));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GroupRep::new(Family::Hyp2, 0.0, 1.0).is_err());
        assert!(GroupRep::new(Family::Ell3, 1.0, f64::NAN).is_err());
        assert!(GroupRep::new(Family::EulerGas, 2.0, 1.0).is_err());
        assert!(GroupRep::standard(Family::Hyp2).boost(f64::INFINITY).is_err());
        assert!("nope".parse::<Family>().is_err());
        assert_eq!("Cemracs".parse::<Family>().unwrap(), Family::Cemracs);
    }
}
