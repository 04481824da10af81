//! Sample tables: CSV ingest, validation, min–max normalization and the
//! synthetic dataset generator.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Attribute names used by the synthetic generator when `n <= 8`.
pub const POLLUTANT_NAMES: [&str; 8] = ["As", "Cd", "Cr", "Cu", "Hg", "Ni", "Pb", "Zn"];

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("missing or malformed header (expected `x,y,<attr1>,...`)")]
    MissingHeader,
    #[error("non-numeric cell `{value}` at row {row}, column {col}")]
    NonNumericCell { row: usize, col: usize, value: String },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("row {row} has the wrong number of fields")]
    InconsistentArity { row: usize },
    #[error("at least 3 attributes are required, got {0}")]
    TooFewAttributes(usize),
    #[error("table has no data rows")]
    NoRows,
    #[error("attribute name at column {0} is empty")]
    EmptyAttributeName(usize),
    #[error("duplicate attribute name `{0}`")]
    DuplicateAttribute(String),
    #[error("cluster specification mismatch: {0}")]
    SpecMismatch(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Multivariate samples at 2D locations. Immutable once validated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataTable {
    attribute_names: Vec<String>,
    locations: Vec<[f64; 2]>,
    /// Row-major `m × n`.
    values: Vec<f64>,
}

impl DataTable {
    /// Builds a table from rows, enforcing every table invariant.
    pub fn new(
        attribute_names: Vec<String>,
        locations: Vec<[f64; 2]>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, DataError> {
        let n = attribute_names.len();
        if n < 3 {
            return Err(DataError::TooFewAttributes(n));
        }
        let mut seen = HashSet::with_capacity(n);
        for (i, name) in attribute_names.iter().enumerate() {
            if name.is_empty() {
                return Err(DataError::EmptyAttributeName(i + 3));
            }
            if !seen.insert(name.as_str()) {
                return Err(DataError::DuplicateAttribute(name.clone()));
            }
        }
        if rows.is_empty() {
            return Err(DataError::NoRows);
        }
        if rows.len() != locations.len() {
            return Err(DataError::InconsistentArity { row: rows.len().min(locations.len()) + 2 });
        }
        let mut values = Vec::with_capacity(rows.len() * n);
        for (j, (row, loc)) in rows.iter().zip(&locations).enumerate() {
            if row.len() != n {
                return Err(DataError::InconsistentArity { row: j + 2 });
            }
            for (c, v) in loc.iter().chain(row).enumerate() {
                if !v.is_finite() {
                    return Err(DataError::NonFinite { row: j + 2, col: c + 1 });
                }
            }
            values.extend_from_slice(row);
        }
        Ok(Self { attribute_names, locations, values })
    }

    pub fn n_attributes(&self) -> usize {
        self.attribute_names.len()
    }

    pub fn n_samples(&self) -> usize {
        self.locations.len()
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attribute_names.iter().position(|a| a == name)
    }

    pub fn locations(&self) -> &[[f64; 2]] {
        &self.locations
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.n_attributes();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_attributes())
    }

    pub fn column(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[i])
    }

    /// Parses CSV text with header `x,y,<names...>`.
    ///
    /// Row numbers in errors are 1-based file lines (the header is line 1)
    /// and column numbers are 1-based fields.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            Some(rec) => rec?,
            None => return Err(DataError::MissingHeader),
        };
        if header.len() < 2
            || !header[0].eq_ignore_ascii_case("x")
            || !header[1].eq_ignore_ascii_case("y")
        {
            return Err(DataError::MissingHeader);
        }
        let names: Vec<String> = header.iter().skip(2).map(str::to_owned).collect();
        if names.len() < 3 {
            return Err(DataError::TooFewAttributes(names.len()));
        }
        let width = header.len();

        let mut locations = Vec::new();
        let mut rows = Vec::new();
        for (k, rec) in records.enumerate() {
            let rec = rec?;
            let line = k + 2;
            if rec.iter().all(str::is_empty) {
                continue;
            }
            if rec.len() != width {
                return Err(DataError::InconsistentArity { row: line });
            }
            let mut fields = Vec::with_capacity(width);
            for (c, cell) in rec.iter().enumerate() {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| DataError::NonNumericCell { row: line, col: c + 1, value: cell.to_string() })?;
                if !v.is_finite() {
                    return Err(DataError::NonFinite { row: line, col: c + 1 });
                }
                fields.push(v);
            }
            locations.push([fields[0], fields[1]]);
            rows.push(fields.split_off(2));
        }
        Self::new(names, locations, rows)
    }

    pub fn from_csv_str(text: &str) -> Result<Self, DataError> {
        Self::from_csv_reader(text.as_bytes())
    }

    /// Writes the table as CSV using shortest round-trip float formatting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), DataError> {
        write!(out, "x,y")?;
        for name in &self.attribute_names {
            write!(out, ",{name}")?;
        }
        writeln!(out)?;
        for (loc, row) in self.locations.iter().zip(self.rows()) {
            write!(out, "{},{}", loc[0], loc[1])?;
            for v in row {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

pub fn load_table(path: impl AsRef<Path>) -> Result<DataTable, DataError> {
    let file = std::fs::File::open(path)?;
    DataTable::from_csv_reader(std::io::BufReader::new(file))
}

pub fn save_table(table: &DataTable, path: impl AsRef<Path>) -> Result<(), DataError> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Sum of raw values; meaningful when all attributes share units.
    #[default]
    RawSum,
    /// Sum of min–max normalized values, for mixed-unit data.
    NormalizedSum,
}

/// Per-attribute min–max scaled values plus per-sample weights.
#[derive(Debug, Clone)]
pub struct NormalizedTable {
    source: Arc<DataTable>,
    norm_values: Vec<f64>,
    sample_weights: Vec<f64>,
    weight_mode: WeightMode,
}

impl NormalizedTable {
    pub fn source(&self) -> &Arc<DataTable> {
        &self.source
    }

    pub fn n_attributes(&self) -> usize {
        self.source.n_attributes()
    }

    pub fn n_samples(&self) -> usize {
        self.source.n_samples()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.n_attributes();
        &self.norm_values[j * n..(j + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.norm_values.chunks_exact(self.n_attributes())
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows().map(|r| r[i]).collect()
    }

    pub fn sample_weights(&self) -> &[f64] {
        &self.sample_weights
    }

    pub fn weight_mode(&self) -> WeightMode {
        self.weight_mode
    }
}

/// Min–max scales every column to `[0, 1]`; constant columns become 0.5.
pub fn normalize(table: Arc<DataTable>, weight_mode: WeightMode) -> NormalizedTable {
    let n = table.n_attributes();
    let m = table.n_samples();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for row in table.rows() {
        for (i, &v) in row.iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }

    let mut norm_values = Vec::with_capacity(m * n);
    for row in table.rows() {
        for (i, &v) in row.iter().enumerate() {
            let span = hi[i] - lo[i];
            let x = if span > 0.0 {
                if v == hi[i] {
                    1.0
                } else {
                    ((v - lo[i]) / span).clamp(0.0, 1.0)
                }
            } else {
                0.5
            };
            norm_values.push(x);
        }
    }

    let sample_weights = match weight_mode {
        WeightMode::RawSum => table.rows().map(|r| r.iter().sum()).collect(),
        WeightMode::NormalizedSum => norm_values.chunks_exact(n).map(|r| r.iter().sum()).collect(),
    };

    NormalizedTable { source: table, norm_values, sample_weights, weight_mode }
}

/// One Gaussian-ish cluster of the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    /// Mean attribute proportions, length `n`, nonnegative.
    pub proportions: Vec<f64>,
    /// Standard deviation of the per-attribute noise added to the proportions.
    pub spread: f64,
    pub count: usize,
}

/// Attribute names for a generated table: the pollutant symbols when they
/// suffice, `A1..An` otherwise.
pub fn synthetic_attribute_names(n: usize) -> Vec<String> {
    if n <= POLLUTANT_NAMES.len() {
        POLLUTANT_NAMES[..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("A{i}")).collect()
    }
}

/// Three clusters, each dominated by a different pair of attributes, with
/// counts splitting `m` as evenly as possible.
pub fn default_clusters(m: usize, n: usize, seed: u64) -> Vec<ClusterSpec> {
    let k = 3.min(m.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..k)
        .map(|c| {
            let mut proportions: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.25)).collect();
            let lead = (c * n) / k;
            proportions[lead] += 1.0;
            proportions[(lead + 1) % n] += 0.5;
            let count = m / k + usize::from(c < m % k);
            ClusterSpec { proportions, spread: 0.12, count }
        })
        .collect()
}

/// Deterministic synthetic stand-in for an irregular sensor dataset.
///
/// Each cluster gets a uniformly drawn spatial anchor in the unit square;
/// its samples sit at the anchor plus uniform jitter, clamped to the square.
/// Values are `load · max(0, proportion + spread·N(0,1))` with a per-sample
/// load in `[0.5, 1.5)`, so they are never negative.
pub fn generate_synthetic(
    m: usize,
    n: usize,
    clusters: &[ClusterSpec],
    seed: u64,
) -> Result<DataTable, DataError> {
    if n < 3 {
        return Err(DataError::TooFewAttributes(n));
    }
    let total: usize = clusters.iter().map(|c| c.count).sum();
    if total != m {
        return Err(DataError::SpecMismatch(format!("cluster counts sum to {total}, expected m = {m}")));
    }
    if let Some(c) = clusters.iter().find(|c| c.proportions.len() != n) {
        return Err(DataError::SpecMismatch(format!(
            "cluster has {} proportions, expected n = {n}",
            c.proportions.len()
        )));
    }
    if clusters.iter().any(|c| !(c.spread >= 0.0) || c.proportions.iter().any(|&p| !(p >= 0.0))) {
        return Err(DataError::SpecMismatch("negative spread or proportion".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locations = Vec::with_capacity(m);
    let mut rows = Vec::with_capacity(m);
    for cluster in clusters {
        let anchor: [f64; 2] = [rng.random_range(0.15..0.85), rng.random_range(0.15..0.85)];
        for _ in 0..cluster.count {
            let x = (anchor[0] + rng.random_range(-0.3..0.3)).clamp(0.0, 1.0);
            let y = (anchor[1] + rng.random_range(-0.3..0.3)).clamp(0.0, 1.0);
            locations.push([x, y]);
            let load: f64 = rng.random_range(0.5..1.5);
            let row = cluster
                .proportions
                .iter()
                .map(|&p| {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    load * (p + cluster.spread * noise).max(0.0)
                })
                .collect();
            rows.push(row);
        }
    }
    DataTable::new(synthetic_attribute_names(n), locations, rows)
}
