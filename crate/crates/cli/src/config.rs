//! Sweep configuration.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment
//! key = value
//! key = v1, v2, v3
//! ```
//!
//! Blank lines and `#` comments are ignored; keys and values are trimmed.
//! Unknown keys are an error. Exactly one of `n_grid` and `snr_grid` may be
//! given; the other axis is fixed by `n` or `es_n0_db`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use jdd::bounds::Requirements;
use jdd::par::Execution;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scheme {
    Genie,
    Dad,
    Hyped,
    Preamble,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Genie => "genie",
            Scheme::Dad => "dad",
            Scheme::Hyped => "hyped",
            Scheme::Preamble => "preamble",
        }
    }
}

impl FromStr for Scheme {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "genie" => Ok(Scheme::Genie),
            "dad" => Ok(Scheme::Dad),
            "hyped" => Ok(Scheme::Hyped),
            "preamble" => Ok(Scheme::Preamble),
            other => Err(CliError::Config(format!("unknown scheme {other:?}"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The swept axis and the value held fixed on the other one.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    Blocklength { n_grid: Vec<usize>, es_n0_db: f64 },
    Snr { snr_grid: Vec<f64>, n: usize },
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub schemes: Vec<Scheme>,
    pub sweep: Sweep,
    /// Information bits per codeword.
    pub k: usize,
    /// Preamble length for the pie sweep; optimized per SNR when absent.
    pub n_p: Option<usize>,
    pub req: Requirements,
    /// Idle slots for threshold calibration; sized from `eps_fa` when absent.
    pub calib_trials: Option<u64>,
    pub active_trials: u64,
    pub density_trials: u64,
    pub seed: u64,
    pub split_step: usize,
    pub codes: Vec<PathBuf>,
    pub refs: Vec<PathBuf>,
    pub out: PathBuf,
    pub exec: Execution,
    /// The parsed entries, in file order, for the run manifest.
    pub entries: Vec<(String, String)>,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if entries.iter().any(|(seen, _)| *seen == k) {
                return Err(CliError::Config(format!("line {}: duplicate key {k:?}", i + 1)));
            }
            entries.push((k, v));
        }

        let get = |key: &str| entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        for (k, _) in &entries {
            if !KEYS.contains(&k.as_str()) {
                return Err(CliError::Config(format!("unknown key {k:?}")));
            }
        }

        let schemes = match get("schemes") {
            Some(v) => list(v, "schemes")?,
            None => vec![Scheme::Genie, Scheme::Dad, Scheme::Hyped, Scheme::Preamble],
        };
        let sweep = match (get("n_grid"), get("snr_grid")) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "n_grid and snr_grid are both set; sweep exactly one".into(),
                ))
            }
            (Some(g), None) => {
                if get("n").is_some() {
                    return Err(CliError::Config("n is fixed by n_grid".into()));
                }
                Sweep::Blocklength {
                    n_grid: list(g, "n_grid")?,
                    es_n0_db: scalar(get("es_n0_db"), "es_n0_db")?.unwrap_or(-3.0),
                }
            }
            (None, Some(g)) => {
                if get("es_n0_db").is_some() {
                    return Err(CliError::Config("es_n0_db is fixed by snr_grid".into()));
                }
                Sweep::Snr {
                    snr_grid: list(g, "snr_grid")?,
                    n: scalar(get("n"), "n")?.unwrap_or(84),
                }
            }
            (None, None) => return Err(CliError::Config("one of n_grid or snr_grid is required".into())),
        };
        match &sweep {
            Sweep::Blocklength { n_grid, .. } if n_grid.is_empty() || n_grid.contains(&0) => {
                return Err(CliError::Config("n_grid needs positive entries".into()))
            }
            Sweep::Snr { snr_grid, .. } if snr_grid.is_empty() => {
                return Err(CliError::Config("snr_grid is empty".into()))
            }
            _ => {}
        }

        let req = Requirements::new(
            scalar(get("eps_fa"), "eps_fa")?.unwrap_or(1e-4),
            scalar(get("eps_md"), "eps_md")?.unwrap_or(1e-4),
            scalar(get("eps_ie"), "eps_ie")?.unwrap_or(1e-3),
        )
        .map_err(|e| CliError::Config(e.to_string()))?;

        let exec = match get("execution") {
            None | Some("parallel") => Execution::Parallel,
            Some("sequential") => Execution::Sequential,
            Some(other) => return Err(CliError::Config(format!("unknown execution mode {other:?}"))),
        };
        let split_step = scalar(get("split_step"), "split_step")?.unwrap_or(4);
        if split_step == 0 {
            return Err(CliError::Config("split_step must be positive".into()));
        }

        Ok(SweepConfig {
            schemes,
            sweep,
            k: scalar(get("k"), "k")?.unwrap_or(12),
            n_p: scalar(get("n_p"), "n_p")?,
            req,
            calib_trials: scalar(get("calib_trials"), "calib_trials")?,
            active_trials: scalar(get("active_trials"), "active_trials")?.unwrap_or(100_000),
            density_trials: scalar(get("density_trials"), "density_trials")?.unwrap_or(100_000),
            seed: scalar(get("seed"), "seed")?.unwrap_or(1),
            split_step,
            codes: paths(get("codes")),
            refs: paths(get("refs")),
            out: get("out").map_or_else(|| PathBuf::from("out"), PathBuf::from),
            exec,
            entries: entries.clone(),
        })
    }
}

const KEYS: &[&str] = &[
    "schemes",
    "n_grid",
    "snr_grid",
    "es_n0_db",
    "n",
    "k",
    "n_p",
    "eps_fa",
    "eps_md",
    "eps_ie",
    "calib_trials",
    "active_trials",
    "density_trials",
    "seed",
    "split_step",
    "codes",
    "refs",
    "out",
    "execution",
];

fn list<T: FromStr>(v: &str, key: &str) -> Result<Vec<T>, CliError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Config(format!("{key}: cannot parse {s:?}")))
        })
        .collect()
}

fn scalar<T: FromStr>(v: Option<&str>, key: &str) -> Result<Option<T>, CliError> {
    v.map(|s| {
        s.parse()
            .map_err(|_| CliError::Config(format!("{key}: cannot parse {s:?}")))
    })
    .transpose()
}

fn paths(v: Option<&str>) -> Vec<PathBuf> {
    v.map(|s| {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(PathBuf::from)
            .collect()
    })
    .unwrap_or_default()
}
