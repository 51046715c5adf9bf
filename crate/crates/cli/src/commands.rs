//! The subcommands. Each returns the process exit status on success.

use std::fs;
use std::path::PathBuf;

use galileo_core::solver::{self, Boundary, Grid1D, InitialCondition, RiemannIC, SineIC, DEFAULT_CFL};
use galileo_core::systems::{self, GalileanSystem};
use galileo_core::thermo::{self, Closure, EntropyClosure};
use galileo_core::verifier::{run_suite, SampleSpec};
use galileo_core::{Family, State};

use crate::config::{IcKind, Settings};
use crate::output;
use crate::CliError;

/// Appends a line to the command's stdout buffer; writing to a `String` cannot fail.
macro_rules! say {
    ($out:expr, $($arg:tt)*) => {{
        use std::fmt::Write as _;
        let _ = writeln!($out, $($arg)*);
    }};
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;

fn usage(e: galileo_core::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(context: impl Into<String>) -> impl FnOnce(galileo_core::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Runtime { context, source }
}

/// The configured system: registry entry or fixture, optionally re-parameterized.
pub fn system(s: &Settings) -> Result<GalileanSystem, CliError> {
    let name = s.system.as_deref().unwrap_or("eulergas");
    let custom = s.params.is_some() || s.closure.is_some() || s.gamma.is_some();
    if !custom || systems::FIXTURES.contains(&name) {
        return systems::by_name(name).map_err(usage);
    }
    let family: Family = name.parse().map_err(usage)?;
    let params = s.params.map(|p| (p.0, p.1));
    GalileanSystem::configured(family, params, s.closure.as_deref(), s.gamma_or_default()).map_err(usage)
}

fn state_of(sys: &GalileanSystem, what: &str, v: &[f64]) -> Result<State, CliError> {
    if v.len() != sys.dim() {
        return Err(CliError::Usage(format!(
            "{what} has {} components but {} needs {} ({})",
            v.len(),
            sys.name(),
            sys.dim(),
            sys.family().component_names().join(", ")
        )));
    }
    let w = galileo_core::group::state(v);
    sys.require_cone(&w).map_err(usage)?;
    Ok(w)
}

fn out_dir(s: &Settings) -> Result<PathBuf, CliError> {
    let dir = s.out_dir();
    fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    Ok(dir)
}

pub fn check(s: &Settings, all: bool, out: &mut String) -> Result<i32, CliError> {
    let seed = s
        .seed
        .ok_or_else(|| CliError::Usage("check needs a seed: pass --seed or set `seed = …` in the config".into()))?;
    let systems = match (&s.system, all) {
        (Some(_), false) => {
            let names: Vec<&str> = s.system.as_deref().unwrap_or("").split(',').map(str::trim).collect();
            names
                .iter()
                .map(|n| system(&Settings { system: Some(n.to_string()), ..s.clone() }))
                .collect::<Result<Vec<_>, _>>()?
        }
        _ => systems::registry(),
    };
    let defaults = SampleSpec::default();
    let spec = SampleSpec {
        samples: s.samples.unwrap_or(defaults.samples),
        hessian_samples: s.hessian_samples.unwrap_or(defaults.hessian_samples),
        ..defaults
    };
    let report = run_suite(&systems, seed, &spec);
    let dir = out_dir(s)?;
    let (csv, txt) = output::write_report(&dir, &report)?;
    out.push_str(&report.to_text());
    say!(out, "wrote {} and {}", csv.display(), txt.display());
    Ok(if report.all_pass() { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

pub fn eigen(s: &Settings, out: &mut String) -> Result<i32, CliError> {
    let sys = system(s)?;
    let v = s.state.as_ref().ok_or_else(|| CliError::Usage("eigen needs --state".into()))?;
    let w = state_of(&sys, "--state", &v.0)?;
    let numeric = sys.numeric_char_speeds(&w).map_err(runtime("numeric characteristic speeds"))?;
    let analytic = sys.analytic_char_speeds(&w).map_err(runtime("analytic characteristic speeds"))?;
    say!(out, "system {}  state {:?}", sys.name(), w.as_slice());
    say!(out, "u = {}", sys.velocity(&w).map_err(runtime("velocity"))?);
    match &analytic {
        Some(a) => {
            say!(out, "{:>4}  {:>22}  {:>22}  {:>10}", "k", "numeric", "analytic", "|diff|");
            let mut worst = 0.0_f64;
            for (k, (n, e)) in numeric.iter().zip(a).enumerate() {
                worst = worst.max((n - e).abs());
                say!(out, "{k:>4}  {n:>22.12}  {e:>22.12}  {:>10.3e}", (n - e).abs());
            }
            say!(out, "residual {worst:.3e}");
        }
        None => {
            say!(out, "{:>4}  {:>22}", "k", "numeric");
            for (k, n) in numeric.iter().enumerate() {
                say!(out, "{k:>4}  {n:>22.12}");
            }
            say!(out, "no closed form for this system");
        }
    }
    Ok(EXIT_PASS)
}

fn grid(s: &Settings, default_boundary: Boundary, default_cells: usize) -> Result<Grid1D, CliError> {
    Grid1D::new(
        s.cells.unwrap_or(default_cells),
        s.x_min.unwrap_or(0.0),
        s.x_max.unwrap_or(1.0),
        s.boundary.unwrap_or(default_boundary),
    )
    .map_err(usage)
}

fn sine(s: &Settings, sys: &GalileanSystem) -> SineIC {
    let mut ic = match sys.gamma() {
        Some(g) => SineIC::density_wave(g),
        None => SineIC { rest: sys.closure().initial_guess().as_slice().to_vec(), amplitude: 0.2, velocity: 0.5 },
    };
    if let Some(r) = &s.rest {
        ic.rest = r.0.clone();
    }
    ic.amplitude = s.amplitude.unwrap_or(ic.amplitude);
    ic.velocity = s.velocity.unwrap_or(ic.velocity);
    ic
}

/// Initial condition and grid. A table fixes the cell count when `cells` is unset.
fn setup(s: &Settings, sys: &GalileanSystem, default_cells: usize) -> Result<(InitialCondition, Grid1D), CliError> {
    let kind = s.ic.unwrap_or(if s.left.is_some() { IcKind::Riemann } else { IcKind::Sod });
    match kind {
        IcKind::Sod => {
            let mut ic = RiemannIC::sod(sys).map_err(|e| CliError::Usage(format!("sod initial data: {e}")))?;
            let g = grid(s, Boundary::Transmissive, default_cells)?;
            ic.interface = s.interface.unwrap_or(0.5 * (g.x_min() + g.x_max()));
            Ok((InitialCondition::Riemann(ic), g))
        }
        IcKind::Riemann => {
            let missing = || CliError::Usage("riemann initial data needs --left and --right".into());
            let left = state_of(sys, "--left", &s.left.as_ref().ok_or_else(missing)?.0)?;
            let right = state_of(sys, "--right", &s.right.as_ref().ok_or_else(missing)?.0)?;
            let g = grid(s, Boundary::Transmissive, default_cells)?;
            let at = s.interface.unwrap_or(0.5 * (g.x_min() + g.x_max()));
            Ok((InitialCondition::Riemann(RiemannIC::new(sys, left, right, at).map_err(usage)?), g))
        }
        IcKind::SmoothSine => {
            let ic = sine(s, sys);
            if ic.rest.len() != sys.closure().arity() {
                return Err(CliError::Usage(format!(
                    "--rest needs {} values for {}",
                    sys.closure().arity(),
                    sys.name()
                )));
            }
            Ok((InitialCondition::Sine(ic), grid(s, Boundary::Periodic, default_cells)?))
        }
        IcKind::Table => {
            let path = s.table.as_ref().ok_or_else(|| CliError::Usage("table initial data needs --table".into()))?;
            let snap = output::read_states(path, sys.family().component_names())?;
            for (i, w) in snap.states.iter().enumerate() {
                sys.require_cone(w).map_err(|e| CliError::Usage(format!("{} row {}: {e}", path.display(), i + 2)))?;
            }
            let n = snap.states.len();
            let g = grid(&Settings { cells: Some(s.cells.unwrap_or(n)), ..s.clone() }, Boundary::Transmissive, n)?;
            Ok((InitialCondition::Table(snap.states), g))
        }
    }
}

fn cfl(s: &Settings) -> f64 {
    s.cfl.unwrap_or(DEFAULT_CFL)
}

pub fn evolve(s: &Settings, out: &mut String) -> Result<i32, CliError> {
    let sys = system(s)?;
    let (ic, grid) = setup(s, &sys, 400)?;
    let t_end = s.tend.unwrap_or(0.2);
    let history = solver::evolve(&sys, &ic, &grid, t_end, cfl(s), s.snapshot_every).map_err(|e| match e {
        galileo_core::Error::InvalidParameter(_) => usage(e),
        other => CliError::Runtime { context: format!("evolve of {} aborted", sys.name()), source: other },
    })?;
    let dir = out_dir(s)?;
    let mut files = Vec::new();
    for (k, f) in history.snapshots.iter().enumerate() {
        let name = format!("snapshot_{k:04}.csv");
        output::write_snapshot(&dir.join(&name), &sys, &grid, f)?;
        files.push(name);
    }
    output::write_entropy(&dir.join("entropy.csv"), &history)?;
    output::write_text(&dir.join("profiles.gp"), &output::profiles_script(&sys, &files))?;
    let last = history.last();
    say!(
        out,
        "{}: {} cells, {} steps to t = {}; entropy {} -> {}",
        sys.name(),
        grid.n_cells(),
        last.step,
        last.time,
        history.entropy[0].total,
        last.entropy_total
    );
    say!(out, "wrote {} snapshots, entropy.csv and profiles.gp to {}", files.len(), dir.display());
    Ok(EXIT_PASS)
}

pub fn frameshift(s: &Settings, out: &mut String) -> Result<i32, CliError> {
    let sys = system(s)?;
    let grids_n = s.grids.as_ref().map(|g| g.0.clone()).unwrap_or_else(|| vec![200, 400, 800]);
    if grids_n.is_empty() {
        return Err(CliError::Usage("--grids is empty".into()));
    }
    let (ic, _) = setup(&Settings { cells: Some(grids_n[0]), ..s.clone() }, &sys, grids_n[0])?;
    if matches!(ic, InitialCondition::Table(_)) {
        return Err(CliError::Usage(
            "frameshift needs an initial condition defined on every grid (not a table)".into(),
        ));
    }
    let grids = grids_n
        .iter()
        .map(|&n| setup(&Settings { cells: Some(n), ..s.clone() }, &sys, n).map(|(_, g)| g))
        .collect::<Result<Vec<_>, _>>()?;
    let v = s.v.unwrap_or(0.5);
    let t_end = s.tend.unwrap_or(0.2);
    let table = solver::frame_shift_experiment(&sys, &ic, &grids, v, t_end, cfl(s)).map_err(|e| match e {
        galileo_core::Error::Branch(_) | galileo_core::Error::InvalidParameter(_) => usage(e),
        other => CliError::Runtime { context: format!("frame shift of {} aborted", sys.name()), source: other },
    })?;
    let dir = out_dir(s)?;
    output::write_convergence(&dir.join("convergence.csv"), &table)?;
    output::write_text(&dir.join("convergence.gp"), &output::convergence_script("convergence.csv"))?;
    say!(out, "{}: boost v = {v}, t = {t_end}", sys.name());
    say!(out, "{:>7}  {:>12}  {:>14}  {:>7}", "cells", "dx", "L1", "order");
    let orders = table.orders();
    for (i, r) in table.rows.iter().enumerate() {
        let order = if i == 0 { String::new() } else { format!("{:.3}", orders[i - 1]) };
        say!(out, "{:>7}  {:>12.6e}  {:>14.6e}  {:>7}", r.n_cells, r.dx, r.l1, order);
    }
    if table.rows.len() > 1 {
        say!(
            out,
            "fitted order {:.3}; strictly decreasing: {}",
            table.fitted_order(),
            if table.strictly_decreasing() { "yes" } else { "no" }
        );
    }
    say!(out, "wrote convergence.csv and convergence.gp to {}", dir.display());
    Ok(EXIT_PASS)
}

pub fn conjugate(s: &Settings, out: &mut String) -> Result<i32, CliError> {
    let closure: Box<dyn EntropyClosure> = match &s.closure {
        Some(name) => Box::new(Closure::from_name(name, s.gamma_or_default()).map_err(usage)?),
        None => {
            let sys = system(s)?;
            return conjugate_with(s, sys.closure(), out);
        }
    };
    conjugate_with(s, closure.as_ref(), out)
}

fn conjugate_with(s: &Settings, c: &dyn EntropyClosure, out: &mut String) -> Result<i32, CliError> {
    say!(out, "closure {}", c.label());
    let mut print_point = |x: &[f64]| -> Result<(), CliError> {
        let d = thermo::conjugate_at_gradient(c, x).map_err(usage)?;
        say!(out, "x       = {x:?}");
        say!(out, "sigma   = {:?}", c.eval(x));
        say!(out, "dsigma  = {:?}", d.slopes.as_slice());
        say!(out, "sigma*  = {:?}", d.value);
        Ok(())
    };
    match (&s.at, &s.slopes) {
        (Some(x), _) => print_point(&x.0)?,
        (None, Some(slopes)) => {
            let x = thermo::solve_gradient(c, &slopes.0).map_err(usage)?;
            print_point(x.as_slice())?;
        }
        (None, None) => return Err(CliError::Usage("conjugate needs --at or --slopes".into())),
    }
    Ok(EXIT_PASS)
}
