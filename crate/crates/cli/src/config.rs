//! Run configuration: a `key = value` file overlaid by command-line flags.
//!
//! Precedence, highest first: flags, `GALILEO_OUT_DIR` (output directory
//! only), the config file, built-in defaults. Keys use the flag spelling
//! (`x-min`, `snapshot-every`); underscores are accepted too.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use galileo_core::solver::Boundary;

/// Environment variable overriding the output directory of the config file.
pub const OUT_DIR_ENV: &str = "GALILEO_OUT_DIR";

pub const DEFAULT_OUT_DIR: &str = "galileo-out";

/// A config-file problem, located by line and field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{file}:{line}: field `{field}`: {message}")]
pub struct ConfigError {
    pub file: String,
    pub line: usize,
    pub field: String,
    pub message: String,
}

/// Comma-separated reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Floats(pub Vec<f64>);

impl FromStr for Floats {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v = s.split(',').map(|x| parse_finite(x.trim())).collect::<Result<Vec<f64>, String>>()?;
        Ok(Floats(v))
    }
}

/// Comma-separated cell counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Counts(pub Vec<usize>);

impl FromStr for Counts {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|_| format!("expected a positive integer, got `{}`", x.trim())))
            .collect::<Result<Vec<_>, _>>()
            .map(Counts)
    }
}

/// Group parameters `p,q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params(pub f64, pub f64);

impl FromStr for Params {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match Floats::from_str(s)?.0.as_slice() {
            [p, q] => Ok(Params(*p, *q)),
            other => Err(format!("expected two numbers `p,q`, got {}", other.len())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcKind {
    /// The shock tube `(1,0,2.5) | (0.125,0,0.25)`.
    Sod,
    /// `left` / `right` / `interface`.
    Riemann,
    SmoothSine,
    /// Cell averages read from a CSV file (`table`).
    Table,
}

impl FromStr for IcKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sod" => Ok(IcKind::Sod),
            "riemann" => Ok(IcKind::Riemann),
            "smooth-sine" => Ok(IcKind::SmoothSine),
            "table" => Ok(IcKind::Table),
            other => Err(format!("unknown initial condition `{other}` (expected sod, riemann, smooth-sine or table)")),
        }
    }
}

impl fmt::Display for IcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IcKind::Sod => "sod",
            IcKind::Riemann => "riemann",
            IcKind::SmoothSine => "smooth-sine",
            IcKind::Table => "table",
        })
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(x) => Err(format!("expected a finite number, got {x}")),
        Err(_) => Err(format!("expected a number, got `{s}`")),
    }
}

fn finite(s: &str) -> Result<f64, String> {
    parse_finite(s.trim())
}

fn boundary(s: &str) -> Result<Boundary, String> {
    s.parse().map_err(|e: galileo_core::Error| e.to_string())
}

/// Every setting, all optional. Shared by the config file and the flags.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Settings {
    /// System name or mutation fixture
    #[arg(long)]
    pub system: Option<String>,
    /// Group parameters `p,q` (families with free parameters only)
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<Params>,
    /// Rest-frame entropy closure
    #[arg(long)]
    pub closure: Option<String>,
    /// Ratio of specific heats of the gas closure [default: 1.4]
    #[arg(long, allow_hyphen_values = true, value_parser = finite)]
    pub gamma: Option<f64>,

    /// Number of cells [default: 400]
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long = "x-min", allow_hyphen_values = true, value_parser = finite)]
    pub x_min: Option<f64>,
    #[arg(long = "x-max", allow_hyphen_values = true, value_parser = finite)]
    pub x_max: Option<f64>,
    /// transmissive | periodic
    #[arg(long, value_parser = boundary)]
    pub boundary: Option<Boundary>,

    /// sod | riemann | smooth-sine | table
    #[arg(long)]
    pub ic: Option<IcKind>,
    /// Left Riemann state, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    pub left: Option<Floats>,
    /// Right Riemann state, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    pub right: Option<Floats>,
    #[arg(long, allow_hyphen_values = true, value_parser = finite)]
    pub interface: Option<f64>,
    /// Rest invariants of the smooth-sine state
    #[arg(long, allow_hyphen_values = true)]
    pub rest: Option<Floats>,
    #[arg(long, allow_hyphen_values = true, value_parser = finite)]
    pub amplitude: Option<f64>,
    /// Advection velocity of the smooth-sine state
    #[arg(long, allow_hyphen_values = true, value_parser = finite)]
    pub velocity: Option<f64>,
    /// CSV of cell averages for `--ic table`
    #[arg(long)]
    pub table: Option<PathBuf>,

    /// Final time
    #[arg(long, allow_hyphen_values = true, value_parser = finite)]
    pub tend: Option<f64>,
    /// Courant number [default: 0.45]
    #[arg(long, allow_hyphen_values = true, value_parser = finite)]
    pub cfl: Option<f64>,
    /// Keep every n-th step as a snapshot
    #[arg(long = "snapshot-every")]
    pub snapshot_every: Option<usize>,

    /// Boost velocity of the frame-shift experiment [default: 0.5]
    #[arg(long, allow_hyphen_values = true, value_parser = finite)]
    pub v: Option<f64>,
    /// Cell counts of the frame-shift experiment [default: 200,400,800]
    #[arg(long)]
    pub grids: Option<Counts>,

    /// Seed of the verification suite (required by `check`)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Samples per check [default: 500]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Samples per Hessian check [default: 10000]
    #[arg(long = "hessian-samples")]
    pub hessian_samples: Option<usize>,

    /// State for `eigen`, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<Floats>,
    /// Closure argument for `conjugate`
    #[arg(long, allow_hyphen_values = true)]
    pub at: Option<Floats>,
    /// Slopes for `conjugate`
    #[arg(long, allow_hyphen_values = true)]
    pub slopes: Option<Floats>,

    /// Output directory [default: galileo-out]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Keys accepted in a config file.
pub const KEYS: [&str; 28] = [
    "system",
    "params",
    "closure",
    "gamma",
    "cells",
    "x-min",
    "x-max",
    "boundary",
    "ic",
    "left",
    "right",
    "interface",
    "rest",
    "amplitude",
    "velocity",
    "table",
    "tend",
    "cfl",
    "snapshot-every",
    "v",
    "grids",
    "seed",
    "samples",
    "hessian-samples",
    "state",
    "at",
    "slopes",
    "out",
];

fn typed<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| e.to_string())
}

fn integer<T: FromStr>(value: &str) -> Result<T, String> {
    value.parse::<T>().map_err(|_| format!("expected a non-negative integer, got `{value}`"))
}

macro_rules! overlay {
    ($base:ident, $over:ident; $($field:ident),* $(,)?) => {
        Settings { $($field: $over.$field.or($base.$field)),* }
    };
}

impl Settings {
    /// Sets one field from its textual value.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        let key = key.trim().replace('_', "-");
        let v = value.trim();
        match key.as_str() {
            "system" => self.system = Some(v.to_string()),
            "params" => self.params = Some(typed(v)?),
            "closure" => self.closure = Some(v.to_string()),
            "gamma" => self.gamma = Some(finite(v)?),
            "cells" => self.cells = Some(integer(v)?),
            "x-min" => self.x_min = Some(finite(v)?),
            "x-max" => self.x_max = Some(finite(v)?),
            "boundary" => self.boundary = Some(boundary(v)?),
            "ic" => self.ic = Some(typed(v)?),
            "left" => self.left = Some(typed(v)?),
            "right" => self.right = Some(typed(v)?),
            "interface" => self.interface = Some(finite(v)?),
            "rest" => self.rest = Some(typed(v)?),
            "amplitude" => self.amplitude = Some(finite(v)?),
            "velocity" => self.velocity = Some(finite(v)?),
            "table" => self.table = Some(PathBuf::from(v)),
            "tend" => self.tend = Some(finite(v)?),
            "cfl" => self.cfl = Some(finite(v)?),
            "snapshot-every" => self.snapshot_every = Some(integer(v)?),
            "v" => self.v = Some(finite(v)?),
            "grids" => self.grids = Some(typed(v)?),
            "seed" => self.seed = Some(integer(v)?),
            "samples" => self.samples = Some(integer(v)?),
            "hessian-samples" => self.hessian_samples = Some(integer(v)?),
            "state" => self.state = Some(typed(v)?),
            "at" => self.at = Some(typed(v)?),
            "slopes" => self.slopes = Some(typed(v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            _ => return Err(format!("unknown key (accepted: {})", KEYS.join(", "))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, file: &str) -> Result<Settings, ConfigError> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |field: &str, message: String| ConfigError {
                file: file.to_string(),
                line: i + 1,
                field: field.to_string(),
                message,
            };
            let (key, value) = line.split_once('=').ok_or_else(|| err(line, "expected `key = value`".to_string()))?;
            s.apply(key, value).map_err(|m| err(key.trim(), m))?;
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Settings, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            file: path.display().to_string(),
            line: 0,
            field: "-".to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// `over` wins wherever it has a value.
    pub fn overlay(self, over: Settings) -> Settings {
        let base = self;
        overlay!(base, over;
            system, params, closure, gamma, cells, x_min, x_max, boundary, ic, left, right, interface, rest,
            amplitude, velocity, table, tend, cfl, snapshot_every, v, grids, seed, samples, hessian_samples,
            state, at, slopes, out)
    }

    /// File settings, then the output-directory variable, then flags.
    pub fn resolve(file: Option<Settings>, env_out: Option<String>, flags: Settings) -> Settings {
        let mut s = file.unwrap_or_default();
        if let Some(dir) = env_out.filter(|d| !d.is_empty()) {
            s.out = Some(PathBuf::from(dir));
        }
        s.overlay(flags)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    pub fn gamma_or_default(&self) -> f64 {
        self.gamma.unwrap_or(1.4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_underscores() {
        let s = Settings::parse("system = cemracs # the log closure\n\nx_min=-1\ngrids = 10, 20\nseed=7\n", "t.cfg")
            .unwrap();
        assert_eq!(s.system.as_deref(), Some("cemracs"));
        assert_eq!(s.x_min, Some(-1.0));
        assert_eq!(s.grids, Some(Counts(vec![10, 20])));
        assert_eq!(s.seed, Some(7));
    }

    #[test]
    fn errors_name_line_and_field() {
        let e = Settings::parse("system = hyp2\ncells = many\n", "run.cfg").unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (2, "cells"));
        assert!(e.to_string().starts_with("run.cfg:2: field `cells`"));
        let e = Settings::parse("colour = blue", "run.cfg").unwrap_err();
        assert!(e.message.contains("accepted: system"));
        let e = Settings::parse("gamma = inf", "run.cfg").unwrap_err();
        assert_eq!(e.field, "gamma");
        assert!(Settings::parse("just words", "run.cfg").is_err());
    }

    #[test]
    fn precedence_is_flags_then_env_then_file() {
        let file = Settings { out: Some("from-file".into()), cells: Some(10), ..Default::default() };
        let none = Settings::default();
        let s = Settings::resolve(Some(file.clone()), Some("from-env".into()), none.clone());
        assert_eq!(s.out_dir(), PathBuf::from("from-env"));
        assert_eq!(s.cells, Some(10));
        let flags = Settings { out: Some("from-flag".into()), ..Default::default() };
        let s = Settings::resolve(Some(file), Some("from-env".into()), flags);
        assert_eq!(s.out_dir(), PathBuf::from("from-flag"));
        assert_eq!(Settings::resolve(None, None, none).out_dir(), PathBuf::from(DEFAULT_OUT_DIR));
    }

    #[test]
    fn every_key_is_accepted() {
        let sample = |k: &str| match k {
            "system" | "closure" | "table" | "out" => "x",
            "params" => "1,2",
            "boundary" => "periodic",
            "ic" => "sod",
            "left" | "right" | "rest" | "state" | "at" | "slopes" => "1,0,2.5",
            "grids" => "8,16",
            _ => "3",
        };
        for k in KEYS {
            let mut s = Settings::default();
            s.apply(k, sample(k)).unwrap_or_else(|e| panic!("{k}: {e}"));
            assert_ne!(s, Settings::default(), "{k}");
        }
    }
}
