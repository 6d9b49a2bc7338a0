use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Principal axes of a (standardized) data set.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Orthonormal component vectors, strongest first.
    pub components: Vec<Vec<f64>>,
    /// Variance along each component, non-increasing.
    pub eigenvalues: Vec<f64>,
}

impl PcaModel {
    /// Eigen-decomposition of the sample covariance of `rows`. Rank
    /// deficiency only produces trailing zero eigenvalues.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::invalid("PCA needs at least 2 rows"));
        }
        let d = rows[0].len();
        let n = rows.len();
        let mean: Vec<f64> = (0..d)
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();
        if d == 0 {
            return Ok(PcaModel {
                mean,
                components: Vec::new(),
                eigenvalues: Vec::new(),
            });
        }
        let centered = DMatrix::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
        let cov = (centered.transpose() * &centered) / (n as f64 - 1.0);
        let eig = SymmetricEigen::new(cov);

        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let mut components = Vec::with_capacity(d);
        let mut eigenvalues = Vec::with_capacity(d);
        for k in order {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            // sign: largest-magnitude entry positive
            let lead = v
                .iter()
                .copied()
                .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            components.push(v);
            eigenvalues.push(eig.eigenvalues[k].max(0.0));
        }
        Ok(PcaModel {
            mean,
            components,
            eigenvalues,
        })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Fraction of total variance carried by each component.
    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        let total: f64 = self.eigenvalues.iter().sum();
        if total == 0.0 {
            return vec![0.0; self.eigenvalues.len()];
        }
        self.eigenvalues.iter().map(|l| l / total).collect()
    }

    pub fn cumulative_explained_variance(&self) -> Vec<f64> {
        self.explained_variance_ratio()
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r;
                Some(*acc)
            })
            .collect()
    }

    pub fn project_row(&self, row: &[f64], d: usize) -> Vec<f64> {
        self.components[..d]
            .iter()
            .map(|c| c.iter().zip(row).zip(&self.mean).map(|((ci, x), m)| ci * (x - m)).sum())
            .collect()
    }

    /// Coordinates of `rows` on the first `d` components.
    pub fn project(&self, rows: &[Vec<f64>], d: usize) -> Result<Vec<Vec<f64>>> {
        if d == 0 {
            return Err(Error::invalid("projection dimension must be at least 1"));
        }
        if d > self.dim() {
            return Err(Error::invalid(format!(
                "projection dimension {d} exceeds model dimension {}",
                self.dim()
            )));
        }
        Ok(rows.iter().map(|r| self.project_row(r, d)).collect())
    }

    /// Maps projected coordinates back to the input space.
    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, comp) in coords.iter().zip(&self.components) {
            for (o, v) in out.iter_mut().zip(comp) {
                *o += c * v;
            }
        }
        out
    }
}
