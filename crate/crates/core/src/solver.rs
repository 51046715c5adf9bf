//! First-order Rusanov finite volumes for any [`GalileanSystem`].
//!
//! The scheme is deliberately the simplest conservative one: it exists to
//! measure discrete entropy production and to test frame covariance, not to
//! resolve shocks sharply. Per step, all cell data and interface fluxes are
//! computed in parallel into fresh buffers, so results do not depend on the
//! thread schedule.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::State;
use crate::systems::{Branch, GalileanSystem};
use crate::thermo;

/// Default Courant number.
pub const DEFAULT_CFL: f64 = 0.45;

/// Time steps below this (relative to the domain length) abort the run.
const DT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Zero-gradient ghost cells.
    #[default]
    Transmissive,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transmissive" => Ok(Boundary::Transmissive),
            "periodic" => Ok(Boundary::Periodic),
            other => {
                Err(Error::InvalidParameter(format!("unknown boundary `{other}` (expected transmissive or periodic)")))
            }
        }
    }
}

/// Uniform 1-D grid of cell averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n_cells: usize,
    x_min: f64,
    x_max: f64,
    boundary: Boundary,
}

impl Grid1D {
    pub fn new(n_cells: usize, x_min: f64, x_max: f64, boundary: Boundary) -> Result<Self> {
        if n_cells < 4 {
            return Err(Error::InvalidParameter(format!("need at least 4 cells, got {n_cells}")));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidParameter(format!("bad interval [{x_min}, {x_max}]")));
        }
        Ok(Grid1D { n_cells, x_min, x_max, boundary })
    }

    /// `n` cells on `[0, 1]`.
    pub fn unit(n_cells: usize, boundary: Boundary) -> Result<Self> {
        Self::new(n_cells, 0.0, 1.0, boundary)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n_cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }

    /// Index of the cell containing `x`; clamped (transmissive) or wrapped (periodic).
    pub fn locate(&self, x: f64) -> usize {
        let n = self.n_cells as i64;
        let k = ((x - self.x_min) / self.dx()).floor() as i64;
        let k = match self.boundary {
            Boundary::Transmissive => k.clamp(0, n - 1),
            Boundary::Periodic => k.rem_euclid(n),
        };
        k as usize
    }

    /// Left and right cell of interface `k` (between cells `k−1` and `k`), `k = 0..=n`.
    fn neighbours(&self, k: usize) -> (usize, usize) {
        let n = self.n_cells;
        match self.boundary {
            Boundary::Transmissive => (k.saturating_sub(1), k.min(n - 1)),
            Boundary::Periodic => ((k + n - 1) % n, k % n),
        }
    }
}

/// Cell averages at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub time: f64,
    /// Number of steps taken to reach this field.
    pub step: usize,
    pub states: Vec<State>,
    /// `Σ η(Wᵢ)·dx`.
    pub entropy_total: f64,
    /// Per-cell `η(Wⁿ⁺¹) − η(Wⁿ) + dt/dx·(G_{i+½} − G_{i−½})`; zero for an initial field.
    pub entropy_production: Vec<f64>,
}

impl SolutionField {
    /// Field at `time` from states; checks the cone and fills the entropy total.
    pub fn new(sys: &GalileanSystem, grid: &Grid1D, time: f64, states: Vec<State>) -> Result<Self> {
        if states.len() != grid.n_cells() {
            return Err(Error::Dimension { expected: grid.n_cells(), got: states.len() });
        }
        let mut eta = Vec::with_capacity(states.len());
        for (i, w) in states.iter().enumerate() {
            eta.push(thermo::entropy(sys, w).map_err(|e| abort(i, 0, e))?);
        }
        Ok(SolutionField {
            time,
            step: 0,
            entropy_total: eta.iter().sum::<f64>() * grid.dx(),
            entropy_production: vec![0.0; states.len()],
            states,
        })
    }

    /// Componentwise `Σ Wᵢ·dx`.
    pub fn totals(&self, dx: f64) -> State {
        let m = self.states.first().map_or(0, |w| w.len());
        self.states.iter().fold(State::zeros(m), |acc, w| acc + w) * dx
    }

    pub fn max_production(&self) -> f64 {
        self.entropy_production.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Two constant states separated at `interface`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannIC {
    pub left: State,
    pub right: State,
    pub interface: f64,
}

impl RiemannIC {
    pub fn new(sys: &GalileanSystem, left: State, right: State, interface: f64) -> Result<Self> {
        sys.require_cone(&left)?;
        sys.require_cone(&right)?;
        Ok(RiemannIC { left, right, interface })
    }

    /// The classic shock tube: `(1, 0, 2.5) | (0.125, 0, 0.25)` at `x = 0.5`.
    pub fn sod(sys: &GalileanSystem) -> Result<Self> {
        Self::new(sys, crate::group::state(&[1.0, 0.0, 2.5]), crate::group::state(&[0.125, 0.0, 0.25]), 0.5)
    }
}

/// A periodic density wave: rest invariants `rest` with the first one
/// modulated by `1 + amplitude·sin(2π(x − x_min)/L)`, advected at `velocity`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineIC {
    pub rest: Vec<f64>,
    pub amplitude: f64,
    pub velocity: f64,
}

impl SineIC {
    /// `ρ = 1 + 0.2 sin 2πx`, `u = 1`, `p = 1` for the polytropic gas with ratio `gamma`.
    pub fn density_wave(gamma: f64) -> Self {
        SineIC { rest: vec![1.0, 1.0 / (gamma - 1.0)], amplitude: 0.2, velocity: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Riemann(RiemannIC),
    Sine(SineIC),
    /// Explicit cell averages; must match the grid size.
    Table(Vec<State>),
}

impl InitialCondition {
    /// Cell averages on `grid`, sampled at cell centres.
    pub fn cells(&self, sys: &GalileanSystem, grid: &Grid1D) -> Result<Vec<State>> {
        let states = match self {
            InitialCondition::Riemann(r) => grid
                .centers()
                .into_iter()
                .map(|x| if x < r.interface { r.left.clone() } else { r.right.clone() })
                .collect(),
            InitialCondition::Sine(s) => {
                // Y(−u) gives a state moving at +u.
                let boost = sys.rep().boost(-s.velocity)?;
                let mut out = Vec::with_capacity(grid.n_cells());
                for x in grid.centers() {
                    let mut rest = s.rest.clone();
                    rest[0] *= 1.0 + s.amplitude * (2.0 * PI * (x - grid.x_min()) / grid.length()).sin();
                    out.push(&boost * sys.rest_state(&rest));
                }
                out
            }
            InitialCondition::Table(t) => {
                if t.len() != grid.n_cells() {
                    return Err(Error::Dimension { expected: grid.n_cells(), got: t.len() });
                }
                t.clone()
            }
        };
        for w in &states {
            if w.len() != sys.dim() {
                return Err(Error::Dimension { expected: sys.dim(), got: w.len() });
            }
        }
        Ok(states)
    }

    pub fn field(&self, sys: &GalileanSystem, grid: &Grid1D) -> Result<SolutionField> {
        SolutionField::new(sys, grid, 0.0, self.cells(sys, grid)?)
    }
}

fn abort(cell: usize, step: usize, err: Error) -> Error {
    match err {
        Error::CellAbort { .. } => err,
        other => Error::CellAbort { cell, step, detail: other.to_string() },
    }
}

fn rusanov(fl: &State, fr: &State, wl: &State, wr: &State, s: f64) -> State {
    (fl + fr) * 0.5 - (wr - wl) * (0.5 * s)
}

/// Rusanov flux `½(f(WL)+f(WR)) − ½s(WR−WL)` with `s` the larger spectral radius.
pub fn numerical_flux(sys: &GalileanSystem, wl: &State, wr: &State) -> Result<State> {
    sys.require_cone(wl)?;
    sys.require_cone(wr)?;
    let s = sys.max_wave_speed(wl)?.max(sys.max_wave_speed(wr)?);
    Ok(rusanov(&sys.flux(wl)?, &sys.flux(wr)?, wl, wr, s))
}

/// Entropy flux consistent with the Rusanov flux: `½(qL+qR) − ½s(ηR−ηL)`, `q = η·u`.
pub fn numerical_entropy_flux(eta_l: f64, q_l: f64, eta_r: f64, q_r: f64, s: f64) -> f64 {
    0.5 * (q_l + q_r) - 0.5 * s * (eta_r - eta_l)
}

/// What the step needs from each cell.
struct CellData {
    flux: State,
    eta: f64,
    entropy_flux: f64,
    speed: f64,
}

fn cell_data(sys: &GalileanSystem, w: &State) -> Result<CellData> {
    if let Some(violated) = sys.cone_violation(w) {
        return Err(Error::ConeViolation { system: sys.name().to_string(), violated, state: w.as_slice().to_vec() });
    }
    let eta = thermo::entropy(sys, w)?;
    Ok(CellData { flux: sys.flux(w)?, entropy_flux: eta * sys.velocity(w)?, eta, speed: sys.max_wave_speed(w)? })
}

/// Runs `f` over `0..n` in parallel and returns the results in order, or the
/// error of the lowest failing index.
fn par_indexed<T: Send>(
    n: usize,
    f: impl Fn(usize) -> Result<T> + Sync,
) -> std::result::Result<Vec<T>, (usize, Error)> {
    let results: Vec<Result<T>> = (0..n).into_par_iter().map(&f).collect();
    let mut out = Vec::with_capacity(n);
    for (i, r) in results.into_iter().enumerate() {
        out.push(r.map_err(|e| (i, e))?);
    }
    Ok(out)
}

/// Largest stable step for `field` at Courant number `cfl`.
pub fn stable_dt(sys: &GalileanSystem, grid: &Grid1D, field: &SolutionField, cfl: f64) -> Result<f64> {
    let speeds = par_indexed(field.states.len(), |i| sys.max_wave_speed(&field.states[i]))
        .map_err(|(i, e)| abort(i, field.step, e))?;
    let smax = speeds.into_iter().fold(0.0_f64, f64::max);
    Ok(cfl * grid.dx() / smax)
}

fn check_cfl(cfl: f64) -> Result<()> {
    if cfl > 0.0 && cfl <= 0.9 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("cfl must lie in (0, 0.9], got {cfl}")))
    }
}

/// Advances by `dt_max` or the CFL step, whichever is smaller.
fn advance(sys: &GalileanSystem, grid: &Grid1D, field: &SolutionField, cfl: f64, dt_max: f64) -> Result<SolutionField> {
    let n = grid.n_cells();
    let step = field.step + 1;
    let cells = par_indexed(n, |i| cell_data(sys, &field.states[i])).map_err(|(i, e)| abort(i, field.step, e))?;

    let smax = cells.iter().fold(0.0_f64, |a, c| a.max(c.speed));
    let dt = (cfl * grid.dx() / smax).min(dt_max);
    if !(dt > DT_FLOOR * grid.length()) {
        return Err(Error::DtUnderflow(dt));
    }
    let ratio = dt / grid.dx();

    let faces: Vec<(State, f64)> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let (l, r) = grid.neighbours(k);
            let (cl, cr) = (&cells[l], &cells[r]);
            let s = cl.speed.max(cr.speed);
            let (wl, wr) = (&field.states[l], &field.states[r]);
            (
                rusanov(&cl.flux, &cr.flux, wl, wr, s),
                numerical_entropy_flux(cl.eta, cl.entropy_flux, cr.eta, cr.entropy_flux, s),
            )
        })
        .collect();

    let states: Vec<State> =
        (0..n).into_par_iter().map(|i| &field.states[i] - (&faces[i + 1].0 - &faces[i].0) * ratio).collect();

    for (i, w) in states.iter().enumerate() {
        if let Some(violated) = sys.cone_violation(w) {
            return Err(Error::CellAbort {
                cell: i,
                step,
                detail: format!("{violated} fails at W = {:?}", w.as_slice()),
            });
        }
    }

    let eta_new = par_indexed(n, |i| thermo::entropy(sys, &states[i])).map_err(|(i, e)| abort(i, step, e))?;
    let entropy_production =
        (0..n).map(|i| eta_new[i] - cells[i].eta + ratio * (faces[i + 1].1 - faces[i].1)).collect();

    Ok(SolutionField {
        time: field.time + dt,
        step,
        entropy_total: eta_new.iter().sum::<f64>() * grid.dx(),
        entropy_production,
        states,
    })
}

/// One explicit step with `dt = cfl·dx/max|λ|`.
pub fn step(sys: &GalileanSystem, grid: &Grid1D, field: &SolutionField, cfl: f64) -> Result<SolutionField> {
    check_cfl(cfl)?;
    advance(sys, grid, field, cfl, f64::INFINITY)
}

/// One point of the entropy time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropySample {
    pub step: usize,
    pub time: f64,
    pub total: f64,
    /// Largest per-cell production in the step that produced this sample.
    pub max_production: f64,
}

/// Result of [`evolve`]: stored snapshots plus the per-step entropy record.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub snapshots: Vec<SolutionField>,
    pub entropy: Vec<EntropySample>,
}

impl History {
    pub fn last(&self) -> &SolutionField {
        self.snapshots.last().expect("history always holds the initial field")
    }

    pub fn steps(&self) -> usize {
        self.last().step
    }
}

/// Steps from `ic` to `t_end` (last step shortened to land on it exactly).
/// Keeps the initial field, the final one, and every `snapshot_every`-th step if given.
pub fn evolve(
    sys: &GalileanSystem,
    ic: &InitialCondition,
    grid: &Grid1D,
    t_end: f64,
    cfl: f64,
    snapshot_every: Option<usize>,
) -> Result<History> {
    check_cfl(cfl)?;
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must be finite and ≥ 0, got {t_end}")));
    }
    let mut field = ic.field(sys, grid)?;
    let sample = |f: &SolutionField, max_production| EntropySample {
        step: f.step,
        time: f.time,
        total: f.entropy_total,
        max_production,
    };
    let mut history = History { entropy: vec![sample(&field, 0.0)], snapshots: vec![field.clone()] };
    while field.time < t_end {
        let mut next = advance(sys, grid, &field, cfl, t_end - field.time)?;
        // Absorb rounding so the run ends exactly at t_end.
        if t_end - next.time <= 1e-14 * t_end.max(1.0) {
            next.time = t_end;
        }
        history.entropy.push(sample(&next, next.max_production()));
        let done = next.time >= t_end;
        if !done && snapshot_every.is_some_and(|k| k > 0 && next.step % k == 0) {
            history.snapshots.push(next.clone());
        }
        field = next;
        if done {
            history.snapshots.push(field.clone());
        }
    }
    Ok(history)
}

/// Total entropy `Σ η dx` after every step, starting with the initial field.
pub fn entropy_budget(history: &History) -> Vec<(f64, f64)> {
    history.entropy.iter().map(|s| (s.time, s.total)).collect()
}

/// `Σᵢ ‖aᵢ − bᵢ‖₁·dx`.
pub fn l1_distance(a: &[State], b: &[State], dx: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs().sum()).sum::<f64>() * dx
}

/// One grid of the frame-shift study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameShiftRow {
    pub n_cells: usize,
    pub dx: f64,
    pub l1: f64,
    pub steps_plain: usize,
    pub steps_boosted: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameShiftTable {
    pub v: f64,
    pub t_end: f64,
    pub rows: Vec<FrameShiftRow>,
}

impl FrameShiftTable {
    /// `log(L1ₖ/L1ₖ₊₁)/log(dxₖ/dxₖ₊₁)` between consecutive rows.
    pub fn orders(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| (w[0].l1 / w[1].l1).ln() / (w[0].dx / w[1].dx).ln()).collect()
    }

    /// Least-squares slope of `log L1` against `log dx` over all rows.
    pub fn fitted_order(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self.rows.iter().map(|r| (r.dx.ln(), r.l1.ln())).collect();
        let n = pts.len() as f64;
        let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        sxy / sxx
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].l1 < w[0].l1)
    }
}

/// Runs `ic` and its boosted image `Y(v)·ic` on every grid and measures the
/// L1 distance at `t_end` between the boosted run and the boost of the plain run,
/// `Y(v)·W(t, x + v t)` (piecewise-constant lookup).
pub fn frame_shift_experiment(
    sys: &GalileanSystem,
    ic: &InitialCondition,
    grids: &[Grid1D],
    v: f64,
    t_end: f64,
    cfl: f64,
) -> Result<FrameShiftTable> {
    let boost = sys.rep().boost(v)?;
    let mut rows = Vec::with_capacity(grids.len());
    for grid in grids {
        let plain_ic = ic.cells(sys, grid)?;
        for w in &plain_ic {
            if sys.branch(w, v)? == Branch::Outside {
                return Err(Error::Branch(format!(
                    "boost by {v} leaves the principal branch at W = {:?}",
                    w.as_slice()
                )));
            }
        }
        let boosted_ic = InitialCondition::Table(plain_ic.iter().map(|w| &boost * w).collect());
        let plain = evolve(sys, &InitialCondition::Table(plain_ic), grid, t_end, cfl, None)?;
        let boosted = evolve(sys, &boosted_ic, grid, t_end, cfl, None)?;

        let w1 = &plain.last().states;
        let reconstructed: Vec<State> =
            grid.centers().into_iter().map(|x| &boost * &w1[grid.locate(x + v * t_end)]).collect();
        rows.push(FrameShiftRow {
            n_cells: grid.n_cells(),
            dx: grid.dx(),
            l1: l1_distance(&reconstructed, &boosted.last().states, grid.dx()),
            steps_plain: plain.steps(),
            steps_boosted: boosted.steps(),
        });
    }
    Ok(FrameShiftTable { v, t_end, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{state, Family};
    use crate::systems::by_name;

    fn euler() -> GalileanSystem {
        by_name("eulergas").unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid1D::unit(3, Boundary::Periodic).is_err());
        assert!(Grid1D::new(10, 1.0, 1.0, Boundary::Periodic).is_err());
        let g = Grid1D::unit(10, Boundary::Periodic).unwrap();
        assert_eq!(g.locate(-0.05), 9);
        assert_eq!(g.locate(1.05), 0);
        let t = Grid1D::unit(10, Boundary::Transmissive).unwrap();
        assert_eq!(t.locate(1.05), 9);
        assert_eq!(t.neighbours(0), (0, 0));
        assert_eq!(t.neighbours(10), (9, 9));
        assert_eq!(g.neighbours(0), (9, 0));
    }

    #[test]
    fn flux_is_consistent_bitwise() {
        let sys = euler();
        let w = state(&[1.0, 0.3, 2.5]);
        assert_eq!(numerical_flux(&sys, &w, &w).unwrap(), sys.flux(&w).unwrap());
    }

    #[test]
    fn sod_pair_flux_dissipation_covers_both_sides() {
        let sys = euler();
        let (wl, wr) = (state(&[1.0, 0.0, 2.5]), state(&[0.125, 0.0, 0.25]));
        let f = numerical_flux(&sys, &wl, &wr).unwrap();
        assert!(f.iter().all(|x| x.is_finite()));
        // Recover s from the mass component: F₀ = ½(0+0) − ½s(ρR−ρL).
        let s = -2.0 * f[0] / (wr[0] - wl[0]);
        let lam = |w: &State| sys.char_speeds(w).unwrap().iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        assert!(s >= lam(&wl).max(lam(&wr)) - 1e-15);
    }

    #[test]
    fn flux_reflection_parity() {
        for sys in crate::systems::registry() {
            let wl = sys.rest_state(sys.closure().initial_guess().as_slice());
            let wr = sys.boost_state(&wl, -0.2).unwrap();
            let r = sys.rep().reflection().clone();
            let lhs = numerical_flux(&sys, &(&r * &wr), &(&r * &wl)).unwrap();
            let rhs = -(&r * numerical_flux(&sys, &wl, &wr).unwrap());
            let scale = rhs.amax().max(1.0);
            assert!((lhs - rhs).amax() / scale < 1e-6, "{}", sys.name());
        }
    }

    #[test]
    fn constant_field_is_stationary() {
        let sys = euler();
        let grid = Grid1D::unit(16, Boundary::Transmissive).unwrap();
        let w = state(&[1.0, 0.5, 2.5]);
        let ic = InitialCondition::Table(vec![w.clone(); 16]);
        let f0 = ic.field(&sys, &grid).unwrap();
        let f1 = step(&sys, &grid, &f0, DEFAULT_CFL).unwrap();
        assert!(f1.states.iter().all(|x| x == &w));
        assert_eq!(f1.entropy_total, f0.entropy_total);
    }

    #[test]
    fn t_end_zero_returns_initial_field() {
        let sys = euler();
        let grid = Grid1D::unit(20, Boundary::Transmissive).unwrap();
        let ic = InitialCondition::Riemann(RiemannIC::sod(&sys).unwrap());
        let h = evolve(&sys, &ic, &grid, 0.0, DEFAULT_CFL, None).unwrap();
        assert_eq!(h.snapshots.len(), 1);
        assert_eq!(h.last(), &ic.field(&sys, &grid).unwrap());
    }

    #[test]
    fn evolve_lands_on_t_end() {
        let sys = euler();
        let grid = Grid1D::unit(50, Boundary::Transmissive).unwrap();
        let ic = InitialCondition::Riemann(RiemannIC::sod(&sys).unwrap());
        let h = evolve(&sys, &ic, &grid, 0.1, DEFAULT_CFL, Some(5)).unwrap();
        assert_eq!(h.last().time, 0.1);
        assert_eq!(h.entropy.len(), h.steps() + 1);
        assert!(h.snapshots.len() > 2);
    }

    #[test]
    fn periodic_mass_is_conserved() {
        let sys = euler();
        let grid = Grid1D::unit(64, Boundary::Periodic).unwrap();
        let ic = InitialCondition::Sine(SineIC::density_wave(1.4));
        let mut f = ic.field(&sys, &grid).unwrap();
        let m0 = f.totals(grid.dx());
        for _ in 0..20 {
            let next = step(&sys, &grid, &f, DEFAULT_CFL).unwrap();
            assert!((next.totals(grid.dx()) - f.totals(grid.dx())).amax() < 1e-13);
            f = next;
        }
        assert!((f.totals(grid.dx()) - m0).amax() < 1e-13);
    }

    #[test]
    fn bad_cfl_and_ic_rejected() {
        let sys = euler();
        let grid = Grid1D::unit(8, Boundary::Periodic).unwrap();
        let f = InitialCondition::Table(vec![state(&[1.0, 0.0, 2.5]); 8]).field(&sys, &grid).unwrap();
        assert!(step(&sys, &grid, &f, 0.95).is_err());
        assert!(step(&sys, &grid, &f, 0.0).is_err());
        assert!(RiemannIC::new(&sys, state(&[1.0, 0.0, 2.5]), state(&[-1.0, 0.0, 1.0]), 0.5).is_err());
        assert!(matches!(
            InitialCondition::Table(vec![state(&[1.0, 0.0, 2.5]); 3]).field(&sys, &grid),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn cone_exit_reports_cell_and_step() {
        let sys = euler();
        let grid = Grid1D::unit(8, Boundary::Transmissive).unwrap();
        let mut states = vec![state(&[1.0, 0.0, 2.5]); 8];
        states[4] = state(&[1e-3, 0.0, 1e-4]);
        let f = SolutionField::new(&sys, &grid, 0.0, states).unwrap();
        // A step far beyond the stability limit must be reported, not clipped.
        match advance(&sys, &grid, &f, 20.0, f64::INFINITY) {
            Err(Error::CellAbort { cell, step, detail }) => {
                assert_eq!(step, 1);
                assert!((3..=5).contains(&cell), "cell {cell}");
                assert!(detail.contains("W = "), "{detail}");
            }
            other => panic!("expected a cell abort, got {other:?}"),
        }
    }

    #[test]
    fn zero_boost_frame_shift_is_exact() {
        let sys = euler();
        let ic = InitialCondition::Riemann(RiemannIC::sod(&sys).unwrap());
        let grids = [Grid1D::unit(40, Boundary::Transmissive).unwrap()];
        let t = frame_shift_experiment(&sys, &ic, &grids, 0.0, 0.1, DEFAULT_CFL).unwrap();
        assert_eq!(t.rows[0].l1, 0.0);
    }

    #[test]
    fn elliptic_branch_is_enforced() {
        let sys = GalileanSystem::standard(Family::Ell2);
        let ic = InitialCondition::Table(vec![state(&[1.0, 0.0]); 8]);
        let grids = [Grid1D::unit(8, Boundary::Periodic).unwrap()];
        assert!(matches!(frame_shift_experiment(&sys, &ic, &grids, 2.0, 0.1, DEFAULT_CFL), Err(Error::Branch(_))));
    }
}
