//! Loading, validating, standardizing and synthesizing point clouds.
//!
//! A [`PointCloud`] owns the row-index contract: row `i` of the storage is the
//! point every cover, table and export calls `i`. Reordering never happens in
//! place; [`permute`] returns a new cloud together with the [`Permutation`]
//! that produced it.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;
use crate::stats;

/// An N×K matrix of finite reals with named columns and stable row ids.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    values: Vec<f64>,
    columns: Vec<String>,
    index: Vec<usize>,
}

impl PointCloud {
    /// Builds a cloud from row vectors. Row ids are assigned `0..N`.
    pub fn new(rows: Vec<Vec<f64>>, columns: Vec<String>) -> Result<Self> {
        let k = columns.len();
        let mut values = Vec::with_capacity(rows.len() * k);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != k {
                return Err(Error::LengthMismatch {
                    what: format!("row {i}"),
                    expected: k,
                    got: row.len(),
                });
            }
            values.extend(row);
        }
        Self::from_flat(values, columns)
    }

    /// Builds a cloud from named columns of equal length.
    pub fn from_columns(columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let n = columns.first().map(|(_, v)| v.len()).unwrap_or(0);
        for (name, col) in &columns {
            if col.len() != n {
                return Err(Error::LengthMismatch {
                    what: format!("column `{name}`"),
                    expected: n,
                    got: col.len(),
                });
            }
        }
        let k = columns.len();
        let mut values = vec![0.0; n * k];
        for (j, (_, col)) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                values[i * k + j] = *v;
            }
        }
        Self::from_flat(values, columns.into_iter().map(|(n, _)| n).collect())
    }

    fn from_flat(values: Vec<f64>, columns: Vec<String>) -> Result<Self> {
        let k = columns.len();
        if k == 0 || values.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let mut seen = HashSet::new();
        for c in &columns {
            if c.is_empty() {
                return Err(Error::InvalidConfig("column names must be non-empty".into()));
            }
            if !seen.insert(c.as_str()) {
                return Err(Error::DuplicateColumn(c.clone()));
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::ParseCell {
                row: pos / k,
                column: columns[pos % k].clone(),
                value: values[pos].to_string(),
            });
        }
        let n = values.len() / k;
        Ok(PointCloud {
            values,
            columns,
            index: (0..n).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.index.len()
    }

    pub fn k(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    /// Original row id of each storage row. `0..N` unless the cloud came
    /// out of [`PointCloud::reorder`].
    pub fn index(&self) -> &[usize] {
        &self.index
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.k();
        &self.values[i * k..(i + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.k())
    }

    pub fn column_position(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .column_position(name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        Ok(self.column(j))
    }

    /// The column as a coloring variable aligned to this cloud.
    pub fn column_variable(&self, name: &str) -> Result<ColoringVariable> {
        ColoringVariable::new(name, self.column_by_name(name)?)
    }

    /// Euclidean distance between rows `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.row(i), self.row(j))
    }

    /// New cloud whose row `r` is this cloud's row `perm[r]`.
    pub fn reorder(&self, perm: &Permutation) -> PointCloud {
        assert_eq!(perm.len(), self.n(), "permutation length");
        let k = self.k();
        let mut values = Vec::with_capacity(self.values.len());
        let mut index = Vec::with_capacity(self.n());
        for &src in perm.as_slice() {
            values.extend_from_slice(self.row(src));
            index.push(self.index[src]);
        }
        debug_assert_eq!(values.len(), self.n() * k);
        PointCloud {
            values,
            columns: self.columns.clone(),
            index,
        }
    }
}

/// Square root of the sum of squared coordinate differences, accumulated in
/// column order. Every membership decision in the crate goes through this.
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

/// An outcome variable with one value per cloud row.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoringVariable {
    pub name: String,
    pub values: Vec<f64>,
}

impl ColoringVariable {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if let Some(row) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::ParseCell {
                row,
                value: values[row].to_string(),
                column: name,
            });
        }
        Ok(ColoringVariable { name, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn reorder(&self, perm: &Permutation) -> ColoringVariable {
        ColoringVariable {
            name: self.name.clone(),
            values: perm.as_slice().iter().map(|&i| self.values[i]).collect(),
        }
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.values.len() != n {
            return Err(Error::LengthMismatch {
                what: format!("coloring `{}`", self.name),
                expected: n,
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Maps new row position to the old row position it was taken from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn from_vec(v: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; v.len()];
        for &i in &v {
            if i >= v.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidConfig(format!("not a permutation of 0..{}", v.len())));
            }
        }
        Ok(Permutation(v))
    }

    /// Uniform shuffle of `0..n` (Fisher-Yates) from the seeded generator.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(&mut rng::seeded(seed));
        Permutation(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (new, &old) in self.0.iter().enumerate() {
            inv[old] = new;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v)
    }
}

/// Shuffles rows of the cloud and the coloring identically.
pub fn permute(
    cloud: &PointCloud,
    coloring: &ColoringVariable,
    seed: u64,
) -> Result<(PointCloud, ColoringVariable, Permutation)> {
    coloring.check_len(cloud.n())?;
    let perm = Permutation::random(cloud.n(), seed);
    Ok((cloud.reorder(&perm), coloring.reorder(&perm), perm))
}

/// Reads a CSV with a header row, keeping `axes` (in the given order) as the
/// cloud and each name in `colorings` as a separate variable.
///
/// Row numbers in errors are 0-based data rows, the same ids the cloud uses.
pub fn read_csv<R: Read>(reader: R, axes: &[&str], colorings: &[&str]) -> Result<(PointCloud, Vec<ColoringVariable>)> {
    if axes.is_empty() {
        return Err(Error::InvalidConfig("at least one axis column is required".into()));
    }
    let mut seen = HashSet::new();
    for a in axes {
        if !seen.insert(*a) {
            return Err(Error::DuplicateColumn(a.to_string()));
        }
    }

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();

    let locate = |name: &str| -> Result<usize> {
        let mut hits = headers.iter().enumerate().filter(|(_, h)| *h == name);
        let first = hits.next().ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        if hits.next().is_some() {
            return Err(Error::DuplicateColumn(name.to_string()));
        }
        Ok(first.0)
    };
    let axis_pos: Vec<usize> = axes.iter().map(|a| locate(a)).collect::<Result<_>>()?;
    let color_pos: Vec<usize> = colorings.iter().map(|c| locate(c)).collect::<Result<_>>()?;

    let mut values = Vec::new();
    let mut color_values: Vec<Vec<f64>> = vec![Vec::new(); colorings.len()];
    let parse = |row: usize, name: &str, raw: Option<&str>| -> Result<f64> {
        let raw = raw.unwrap_or("");
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::ParseCell {
                row,
                column: name.to_string(),
                value: raw.to_string(),
            }),
        }
    };
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        for (name, &p) in axes.iter().zip(&axis_pos) {
            values.push(parse(row, name, record.get(p))?);
        }
        for ((name, &p), out) in colorings.iter().zip(&color_pos).zip(&mut color_values) {
            out.push(parse(row, name, record.get(p))?);
        }
    }

    let cloud = PointCloud::from_flat(values, axes.iter().map(|s| s.to_string()).collect())?;
    let colorings = colorings
        .iter()
        .zip(color_values)
        .map(|(name, v)| ColoringVariable::new(*name, v))
        .collect::<Result<Vec<_>>>()?;
    Ok((cloud, colorings))
}

/// Loads `axes` and an optional coloring column from a CSV file.
pub fn load_csv(
    path: impl AsRef<Path>,
    axes: &[&str],
    coloring: Option<&str>,
) -> Result<(PointCloud, Option<ColoringVariable>)> {
    let colorings: Vec<&str> = coloring.into_iter().collect();
    let (cloud, mut vars) = load_csv_columns(path, axes, &colorings)?;
    Ok((cloud, vars.pop()))
}

pub fn load_csv_columns(
    path: impl AsRef<Path>,
    axes: &[&str],
    colorings: &[&str],
) -> Result<(PointCloud, Vec<ColoringVariable>)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(file), axes, colorings)
}

/// Column names of a CSV file's header row.
pub fn csv_header(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(headers.iter().map(str::to_string).collect())
}

/// Writes the cloud's columns followed by the given variables.
pub fn write_csv<W: Write>(writer: W, cloud: &PointCloud, extra: &[ColoringVariable]) -> Result<()> {
    for v in extra {
        v.check_len(cloud.n())?;
    }
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<&str> = cloud
        .columns()
        .iter()
        .map(String::as_str)
        .chain(extra.iter().map(|v| v.name.as_str()))
        .collect();
    w.write_record(&header).map_err(|e| Error::Csv(e.to_string()))?;
    for (i, row) in cloud.rows().enumerate() {
        let rec: Vec<String> = row
            .iter()
            .chain(extra.iter().map(|v| &v.values[i]))
            .map(|x| x.to_string())
            .collect();
        w.write_record(&rec).map_err(|e| Error::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

/// Centers every column to mean 0 and scales to population (1/N) standard
/// deviation 1.
pub fn standardize(cloud: &PointCloud) -> Result<PointCloud> {
    let k = cloud.k();
    let mut out = cloud.clone();
    for j in 0..k {
        let col = cloud.column(j);
        let m = stats::mean(&col);
        let sd = stats::std_dev(&col, 0);
        if !(sd > 0.0) {
            return Err(Error::ZeroVariance(cloud.columns[j].clone()));
        }
        for (i, v) in col.iter().enumerate() {
            out.values[i * k + j] = (v - m) / sd;
        }
    }
    Ok(out)
}

/// Parameters for [`synthesize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetSpec {
    pub n: usize,
    pub seed: u64,
    pub target_correlation: f64,
    pub standardize: bool,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.target_correlation.abs() < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "target correlation must lie strictly inside (-1, 1), got {}",
                self.target_correlation
            )));
        }
        Ok(())
    }
}

/// Bivariate uniform dataset with an optional correlation-targeting mix.
///
/// Draws `X1` then `X2` from `U[0,1)`, standardizes both when asked, replaces
/// `X2` with `rho * X1 + sqrt(1 - rho^2) * X2` when `rho != 0` (the mixed
/// column is not re-standardized) and returns `Y = X1 - X2`.
pub fn synthesize(spec: &DatasetSpec) -> Result<(PointCloud, ColoringVariable)> {
    spec.validate()?;
    let mut rng = rng::seeded(spec.seed);
    let mut x1: Vec<f64> = (0..spec.n).map(|_| rng.random::<f64>()).collect();
    let mut x2: Vec<f64> = (0..spec.n).map(|_| rng.random::<f64>()).collect();
    if spec.standardize {
        for (col, name) in [(&mut x1, "X1"), (&mut x2, "X2")] {
            let m = stats::mean(col);
            let sd = stats::std_dev(col, 0);
            if !(sd > 0.0) {
                return Err(Error::ZeroVariance(name.into()));
            }
            col.iter_mut().for_each(|v| *v = (*v - m) / sd);
        }
    }
    let rho = spec.target_correlation;
    if rho != 0.0 {
        x2 = mix_correlation(&x1, &x2, rho);
    }
    let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a - b).collect();
    let cloud = PointCloud::from_columns(vec![("X1".into(), x1), ("X2".into(), x2)])?;
    Ok((cloud, ColoringVariable::new("Y", y)?))
}

/// `rho * a + sqrt(1 - rho^2) * b`, elementwise.
pub fn mix_correlation(a: &[f64], b: &[f64], rho: f64) -> Vec<f64> {
    let s = (1.0 - rho * rho).sqrt();
    a.iter().zip(b).map(|(x, y)| rho * x + s * y).collect()
}

/// Descriptive statistics of one variable (population standard deviation).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ColumnSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl ColumnSummary {
    pub fn of(name: impl Into<String>, values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        ColumnSummary {
            name: name.into(),
            mean: stats::mean(values),
            sd: stats::std_dev(values, 0),
            min: sorted[0],
            q25: stats::quantile(&sorted, 0.25),
            median: stats::quantile(&sorted, 0.5),
            q75: stats::quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
        }
    }
}

/// One column per variable, one row per statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub columns: Vec<ColumnSummary>,
}

impl SummaryTable {
    pub const STATISTICS: [&'static str; 7] = ["mean", "sd", "min", "25%", "50%", "75%", "max"];

    pub fn get(&self, name: &str) -> Option<&ColumnSummary> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["statistic".to_string()];
        header.extend(self.columns.iter().map(|c| c.name.clone()));
        w.write_record(&header).map_err(|e| Error::Csv(e.to_string()))?;
        for (s, stat) in Self::STATISTICS.iter().enumerate() {
            let mut rec = vec![stat.to_string()];
            for c in &self.columns {
                let v = [c.mean, c.sd, c.min, c.q25, c.median, c.q75, c.max][s];
                rec.push(v.to_string());
            }
            w.write_record(&rec).map_err(|e| Error::Csv(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

pub fn summary_stats(cloud: &PointCloud, extra: &[ColoringVariable]) -> Result<SummaryTable> {
    let mut columns: Vec<ColumnSummary> = (0..cloud.k())
        .map(|j| ColumnSummary::of(&cloud.columns[j], &cloud.column(j)))
        .collect();
    for v in extra {
        v.check_len(cloud.n())?;
        columns.push(ColumnSummary::of(&v.name, &v.values));
    }
    Ok(SummaryTable { columns })
}
