//! CSV tables and gnuplot scripts.
//!
//! Reals are written with Rust's shortest round-trip formatting, so reading
//! a file back reproduces the in-memory values exactly.

use std::fs;
use std::path::{Path, PathBuf};

use galileo_core::solver::{FrameShiftTable, Grid1D, History, SolutionField};
use galileo_core::verifier::SuiteReport;
use galileo_core::{GalileanSystem, State};

use crate::CliError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| CliError::Csv { path: path.to_path_buf(), message: e.to_string() }
}

/// Full-precision decimal: shortest representation that parses back bit-for-bit.
pub fn real(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(io_err(path))
}

fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Columns of a snapshot file.
pub fn snapshot_header(sys: &GalileanSystem) -> Vec<String> {
    let mut h = vec!["t".to_string(), "x".to_string()];
    h.extend(sys.family().component_names().iter().map(|s| s.to_string()));
    h.extend(["u", "eta", "Pi"].map(String::from));
    h
}

/// One row per cell: `t, x, W…, u(W), η(W), Π(W)`.
pub fn write_snapshot(path: &Path, sys: &GalileanSystem, grid: &Grid1D, field: &SolutionField) -> Result<(), CliError> {
    let mut rows = Vec::with_capacity(field.states.len());
    for (i, w) in field.states.iter().enumerate() {
        let derived = || -> galileo_core::Result<[f64; 3]> {
            Ok([sys.velocity(w)?, galileo_core::thermo::entropy(sys, w)?, sys.pressure(w)?])
        };
        let [u, eta, pi] =
            derived().map_err(|source| CliError::Runtime { context: format!("snapshot cell {i}"), source })?;
        let mut row = vec![real(field.time), real(grid.center(i))];
        row.extend(w.iter().map(|x| real(*x)));
        row.extend([real(u), real(eta), real(pi)]);
        rows.push(row);
    }
    write_rows(path, &snapshot_header(sys), &rows)
}

/// A snapshot read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub x: Vec<f64>,
    pub states: Vec<State>,
}

fn parse_cell(path: &Path, row: usize, s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Csv { path: path.to_path_buf(), message: format!("row {row}: `{s}` is not a number") })
}

/// Reads the state columns named `components` (and `t`, `x` when present).
///
/// Works for snapshot files and for plain tables of cell averages.
pub fn read_states(path: &Path, components: &[&str]) -> Result<Snapshot, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.clone();
    let col = |name: &str| header.iter().position(|h| h.trim() == name);
    let idx: Vec<usize> = components
        .iter()
        .map(|c| {
            col(c).ok_or_else(|| CliError::Csv {
                path: path.to_path_buf(),
                message: format!("missing column `{c}` (expected {})", components.join(", ")),
            })
        })
        .collect::<Result<_, _>>()?;
    let (tcol, xcol) = (col("t"), col("x"));
    let mut snap = Snapshot { time: 0.0, x: vec![], states: vec![] };
    for (n, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let row = n + 2;
        let get = |i: usize| parse_cell(path, row, rec.get(i).unwrap_or(""));
        if let Some(t) = tcol {
            snap.time = get(t)?;
        }
        if let Some(x) = xcol {
            snap.x.push(get(x)?);
        }
        snap.states.push(State::from_vec(idx.iter().map(|&i| get(i)).collect::<Result<_, _>>()?));
    }
    Ok(snap)
}

/// `step,t,total,max_production`.
pub fn write_entropy(path: &Path, history: &History) -> Result<(), CliError> {
    let header = ["step", "t", "total", "max_production"].map(String::from);
    let rows: Vec<Vec<String>> = history
        .entropy
        .iter()
        .map(|s| vec![s.step.to_string(), real(s.time), real(s.total), real(s.max_production)])
        .collect();
    write_rows(path, &header, &rows)
}

/// `cells,dx,l1,order,steps_plain,steps_boosted`; `order` is empty on the first row.
pub fn write_convergence(path: &Path, table: &FrameShiftTable) -> Result<(), CliError> {
    let header = ["cells", "dx", "l1", "order", "steps_plain", "steps_boosted"].map(String::from);
    let orders = table.orders();
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                r.n_cells.to_string(),
                real(r.dx),
                real(r.l1),
                if i == 0 { String::new() } else { real(orders[i - 1]) },
                r.steps_plain.to_string(),
                r.steps_boosted.to_string(),
            ]
        })
        .collect();
    write_rows(path, &header, &rows)
}

pub fn write_report(dir: &Path, report: &SuiteReport) -> Result<(PathBuf, PathBuf), CliError> {
    let csv = dir.join("report.csv");
    let txt = dir.join("report.txt");
    write_text(&csv, &report.to_csv())?;
    write_text(&txt, &report.to_text())?;
    Ok((csv, txt))
}

/// Profiles of the first conserved variable, `u` and `η` for every snapshot.
pub fn profiles_script(sys: &GalileanSystem, files: &[String]) -> String {
    let m = sys.dim();
    let first = sys.family().component_names()[0];
    // Columns: 1 t, 2 x, 3..=2+m state, then u, eta, Pi.
    let panels = [(first, 3), ("u", 3 + m), ("eta", 4 + m)];
    let mut s = format!(
        "# Profiles of {first}, u and eta for {}.\n# Run from this directory: gnuplot profiles.gp\n\
         set datafile separator \",\"\nset terminal pngcairo size 1500,450\nset output \"profiles.png\"\n\
         files = \"{}\"\nset multiplot layout 1,3\nset xlabel \"x\"\nset key top left font \",8\"\n",
        sys.name(),
        files.join(" ")
    );
    for (name, col) in panels {
        s.push_str(&format!(
            "set title \"{name}\"\nplot for [f in files] f every ::1 using 2:{col} with lines title f\n"
        ));
    }
    s.push_str("unset multiplot\n");
    s
}

/// Log–log plot of the frame-shift distance against `dx`.
pub fn convergence_script(data: &str) -> String {
    format!(
        "# L1 distance between the boosted run and the boosted solution.\n# Run from this directory: gnuplot convergence.gp\n\
         set datafile separator \",\"\nset terminal pngcairo size 700,500\nset output \"convergence.png\"\n\
         set logscale xy\nset xlabel \"dx\"\nset ylabel \"L1 distance\"\nset key top left\n\
         plot \"{data}\" every ::1 using 2:3 with linespoints title \"frame shift\"\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(real(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
