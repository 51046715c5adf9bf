//! Central finite differences that respect a domain predicate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::group::State;

/// `cbrt(machine epsilon)`: the usual optimal step for first-order central differences.
pub fn first_order_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// How many times the step is halved when the stencil leaves the domain.
const SHRINKS: usize = 2;

/// Central difference of `f` at `w` along `r`.
pub fn directional<I, F>(w: &State, r: &State, inside: I, f: F) -> Result<DVector<f64>>
where
    I: Fn(&State) -> bool,
    F: Fn(&State) -> Result<DVector<f64>>,
{
    let rn = r.amax();
    if rn == 0.0 {
        return Ok(DVector::zeros(f(w)?.len()));
    }
    let mut h = first_order_step(w.amax()) / rn;
    for _ in 0..=SHRINKS {
        let wp = w + r * h;
        let wm = w - r * h;
        if inside(&wp) && inside(&wm) {
            return Ok((f(&wp)? - f(&wm)?) / (2.0 * h));
        }
        h *= 0.5;
    }
    Err(Error::Stencil(w.as_slice().to_vec()))
}

/// Central difference of `f` along axis `j` with step `h`, or `None` when the
/// stencil leaves the domain.
fn axis_difference<I, F>(w: &State, j: usize, h: f64, inside: &I, f: &F) -> Result<Option<DVector<f64>>>
where
    I: Fn(&State) -> bool,
    F: Fn(&State) -> Result<DVector<f64>>,
{
    let mut wp = w.clone();
    let mut wm = w.clone();
    wp[j] += h;
    wm[j] -= h;
    if !(inside(&wp) && inside(&wm)) {
        return Ok(None);
    }
    Ok(Some((f(&wp)? - f(&wm)?) / (wp[j] - wm[j])))
}

/// Builds a Jacobian column by column; `column(j, h)` returns `None` when
/// the stencil of step `h` leaves the domain, and the step is then halved.
fn columns<C>(w: &State, mut column: C) -> Result<DMatrix<f64>>
where
    C: FnMut(usize, f64) -> Result<Option<DVector<f64>>>,
{
    let m = w.len();
    let mut jac = DMatrix::zeros(0, 0);
    for j in 0..m {
        let mut h = first_order_step(w[j]);
        let mut col = None;
        for _ in 0..=SHRINKS {
            col = column(j, h)?;
            if col.is_some() {
                break;
            }
            h *= 0.5;
        }
        let col = col.ok_or_else(|| Error::Stencil(w.as_slice().to_vec()))?;
        if j == 0 {
            jac = DMatrix::zeros(col.len(), m);
        }
        jac.set_column(j, &col);
    }
    Ok(jac)
}

/// Jacobian of `f` at `w` by central differences, one column per component.
pub fn jacobian<I, F>(w: &State, inside: I, f: F) -> Result<DMatrix<f64>>
where
    I: Fn(&State) -> bool,
    F: Fn(&State) -> Result<DVector<f64>>,
{
    columns(w, |j, h| axis_difference(w, j, h, &inside, &f))
}

/// Jacobian with one Richardson step, `(4·D(h/2) − D(h))/3`: fourth-order
/// truncation error on the same stencil width as [`jacobian`].
pub fn jacobian_extrapolated<I, F>(w: &State, inside: I, f: F) -> Result<DMatrix<f64>>
where
    I: Fn(&State) -> bool,
    F: Fn(&State) -> Result<DVector<f64>>,
{
    columns(w, |j, h| {
        let Some(coarse) = axis_difference(w, j, h, &inside, &f)? else {
            return Ok(None);
        };
        let Some(fine) = axis_difference(w, j, 0.5 * h, &inside, &f)? else {
            return Ok(None);
        };
        Ok(Some((fine * 4.0 - coarse) / 3.0))
    })
}

/// Hessian of a scalar function as the symmetrized, extrapolated
/// central-difference Jacobian of its gradient.
pub fn hessian_from_gradient<I, G>(w: &State, inside: I, grad: G) -> Result<DMatrix<f64>>
where
    I: Fn(&State) -> bool,
    G: Fn(&State) -> Result<DVector<f64>>,
{
    let j = jacobian_extrapolated(w, inside, grad)?;
    Ok((&j + j.transpose()) * 0.5)
}

/// Gradient of a scalar function by central differences.
pub fn gradient<I, F>(w: &State, inside: I, f: F) -> Result<DVector<f64>>
where
    I: Fn(&State) -> bool,
    F: Fn(&State) -> Result<f64>,
{
    let j = jacobian(w, inside, |x| Ok(DVector::from_element(1, f(x)?)))?;
    Ok(j.row(0).transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_exact_enough() {
        let w = State::from_vec(vec![1.0, 2.0]);
        let f = |x: &State| Ok(x[0] * x[0] * 3.0 + x[0] * x[1] - x[1] * x[1]);
        let g = gradient(&w, |_| true, f).unwrap();
        assert!((g - State::from_vec(vec![8.0, -3.0])).amax() < 1e-9);
        let grad = |x: &State| Ok(State::from_vec(vec![6.0 * x[0] + x[1], x[0] - 2.0 * x[1]]));
        let h = hessian_from_gradient(&w, |_| true, grad).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[6.0, 1.0, 1.0, -2.0]);
        assert!((h - expect).amax() < 1e-8);
    }

    #[test]
    fn extrapolation_beats_plain_central_differences() {
        let w = State::from_vec(vec![0.3]);
        let f = |x: &State| Ok(DVector::from_element(1, (20.0 * x[0]).exp()));
        let exact = 20.0 * 6.0_f64.exp();
        let plain = (jacobian(&w, |_| true, f).unwrap()[(0, 0)] - exact).abs() / exact;
        let rich = (jacobian_extrapolated(&w, |_| true, f).unwrap()[(0, 0)] - exact).abs() / exact;
        assert!(rich < 0.1 * plain, "{rich:e} vs {plain:e}");
    }

    #[test]
    fn stencil_failure_is_reported() {
        let w = State::from_vec(vec![1e-9]);
        let r = directional(&w, &State::from_vec(vec![1.0]), |x| x[0] > 0.0, |x| Ok(x.clone()));
        assert!(matches!(r, Err(Error::Stencil(_))));
    }
}
