//! Result rows, reference-curve ingestion and CSV emission.

use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use jdd::montecarlo::RunManifest;

use crate::error::CliError;

pub const HEADER: [&str; 7] = ["scheme", "kind", "n", "es_n0_db", "value", "stderr", "flag"];
pub const REF_PREFIX: &str = "ref:";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    Ok,
    Infeasible,
    /// The Monte Carlo uncertainty is large against the quantity reported.
    Insufficient,
}

impl Flag {
    pub fn label(self) -> &'static str {
        match self {
            Flag::Ok => "ok",
            Flag::Infeasible => "infeasible",
            Flag::Insufficient => "insufficient",
        }
    }
}

/// Which column orders rows within a `(scheme, kind)` group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Blocklength,
    Snr,
}

/// One CSV row, held as text so ingested rows pass through unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub fields: [String; 7],
}

impl Row {
    pub fn new(
        scheme: &str,
        kind: &str,
        n: usize,
        es_n0_db: f64,
        value: f64,
        stderr: f64,
        flag: Flag,
    ) -> Self {
        Row {
            fields: [
                scheme.to_string(),
                kind.to_string(),
                n.to_string(),
                number(es_n0_db),
                number(value),
                number(stderr),
                flag.label().to_string(),
            ],
        }
    }

    pub fn scheme(&self) -> &str {
        &self.fields[0]
    }

    pub fn kind(&self) -> &str {
        &self.fields[1]
    }

    pub fn flag(&self) -> &str {
        &self.fields[6]
    }

    pub fn n(&self) -> f64 {
        self.fields[2].parse().unwrap_or(f64::NAN)
    }

    pub fn es_n0_db(&self) -> f64 {
        self.fields[3].parse().unwrap_or(f64::NAN)
    }

    pub fn value(&self) -> f64 {
        self.fields[4].parse().unwrap_or(f64::NAN)
    }

    fn axis_value(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Blocklength => self.n(),
            Axis::Snr => self.es_n0_db(),
        }
    }
}

/// Shortest round-trip text, switching to scientific notation for very small
/// or very large magnitudes.
pub fn number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e9).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Sorts by `(scheme, kind, sweep variable)`; the sort is stable.
pub fn sort_rows(rows: &mut [Row], axis: Axis) {
    rows.sort_by(|a, b| {
        a.scheme()
            .cmp(b.scheme())
            .then_with(|| a.kind().cmp(b.kind()))
            .then_with(|| {
                a.axis_value(axis)
                    .partial_cmp(&b.axis_value(axis))
                    .unwrap_or(Ordering::Equal)
            })
    });
}

/// Reads a reference-curve CSV in the result schema. Every scheme label must
/// carry the `ref:` prefix.
pub fn read_reference(path: &Path) -> Result<Vec<Row>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Csv(format!("{}: {e}", path.display())))?;
    let header = reader.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(CliError::Csv(format!(
            "{}: header must be {}",
            path.display(),
            HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let fields: [String; 7] = std::array::from_fn(|j| record[j].to_string());
        if !fields[0].starts_with(REF_PREFIX) {
            return Err(CliError::Csv(format!(
                "{}: row {}: scheme {:?} lacks the {REF_PREFIX:?} prefix",
                path.display(),
                i + 2,
                fields[0]
            )));
        }
        rows.push(Row { fields });
    }
    Ok(rows)
}

pub fn to_csv(rows: &[Row]) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(HEADER)?;
    for row in rows {
        writer.write_record(&row.fields)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Csv(e.to_string()))
}

/// Writes `results.csv` and `manifest.txt` into `dir`.
pub fn write_outputs(dir: &Path, rows: &[Row], manifest: &RunManifest) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), to_csv(rows)?)?;
    fs::write(dir.join("manifest.txt"), manifest.to_text())?;
    Ok(())
}
