use super::FeatureMatrix;
use crate::error::{Error, Result};

/// Per-column centering and unit-SD scaling (sample SD, divisor n − 1).
///
/// Columns listed in `retained` are kept; a lenient fit drops columns with
/// zero spread instead of failing.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub retained: Vec<usize>,
}

fn column_stats(rows: &[Vec<f64>], j: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
    if rows.len() < 2 {
        return (m, 0.0);
    }
    let var = rows.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

impl Standardizer {
    /// Fails on a column with zero spread, naming it.
    pub fn fit(matrix: &FeatureMatrix) -> Result<Self> {
        if matrix.n_rows() < 2 {
            return Err(Error::invalid("standardization needs at least 2 rows"));
        }
        let s = Self::fit_rows(matrix.rows(), matrix.n_cols());
        if let Some(j) = (0..matrix.n_cols()).find(|j| !s.retained.contains(j)) {
            return Err(Error::ConstantFeature(matrix.names()[j].clone()));
        }
        Ok(s)
    }

    /// Fits on raw rows of width `cols`, dropping zero-spread columns.
    pub fn fit_rows(rows: &[Vec<f64>], cols: usize) -> Self {
        let mut mean = Vec::with_capacity(cols);
        let mut sd = Vec::with_capacity(cols);
        let mut retained = Vec::new();
        for j in 0..cols {
            let (m, s) = if rows.is_empty() { (0.0, 0.0) } else { column_stats(rows, j) };
            mean.push(m);
            sd.push(s);
            // spread below rounding noise of the mean counts as constant
            if s > 1e-12 * m.abs().max(f64::MIN_POSITIVE) {
                retained.push(j);
            }
        }
        Standardizer { mean, sd, retained }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        self.retained
            .iter()
            .map(|&j| (row[j] - self.mean[j]) / self.sd[j])
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.retained.len()
    }
}

/// Fits a standardizer on `matrix` and applies it to every row.
pub fn standardize_fit_apply(matrix: &FeatureMatrix) -> Result<(Standardizer, Vec<Vec<f64>>)> {
    let s = Standardizer::fit(matrix)?;
    let rows = matrix.rows().iter().map(|r| s.transform(r)).collect();
    Ok((s, rows))
}
