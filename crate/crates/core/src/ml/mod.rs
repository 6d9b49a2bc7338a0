//! Feature standardization, PCA, classifiers and their leave-one-out
//! evaluation.

pub mod classify;
pub mod eval;
pub mod pca;
pub mod search;
pub mod standardize;
pub mod trajectory;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Updrs;
use crate::error::{Error, Result};

pub use classify::{knn_classify, ncc_classify, svm_train, LinearSvm};
pub use eval::{auc, error_cdf, loocv, ClassifierConfig, ErrorCdf, EvalReport, Method, Prediction};
pub use pca::PcaModel;
pub use search::{exhaustive_search, SearchResult, SearchSpec};
pub use standardize::{standardize_fit_apply, Standardizer};
pub use trajectory::{centroid_trajectory, Trajectory, TrajectoryNode};

/// The eleven trial-level features used for classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    Theta,
    Omega,
    P,
    R,
    ThetaSd,
    OmegaSd,
    PSd,
    RSd,
    F,
    PXomega,
    PXtheta,
}

impl Feature {
    pub const ALL: [Feature; 11] = [
        Feature::Theta,
        Feature::Omega,
        Feature::P,
        Feature::R,
        Feature::ThetaSd,
        Feature::OmegaSd,
        Feature::PSd,
        Feature::RSd,
        Feature::F,
        Feature::PXomega,
        Feature::PXtheta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Theta => "Theta",
            Feature::Omega => "Omega",
            Feature::P => "P",
            Feature::R => "R",
            Feature::ThetaSd => "Theta_SD",
            Feature::OmegaSd => "Omega_SD",
            Feature::PSd => "P_SD",
            Feature::RSd => "R_SD",
            Feature::F => "F",
            Feature::PXomega => "P_Xomega",
            Feature::PXtheta => "P_Xtheta",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown feature `{s}`")))
    }
}

/// Labelled rows of named feature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    ids: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<Updrs>,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<Updrs>) -> Result<Self> {
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::with_ids(names, ids, rows, labels)
    }

    pub fn with_ids(names: Vec<String>, ids: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<Updrs>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::invalid(format!("duplicate feature column `{dup}`")));
        }
        if rows.len() != labels.len() || rows.len() != ids.len() {
            return Err(Error::invalid("row, label and id counts differ"));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != names.len() {
                return Err(Error::invalid(format!(
                    "row {i} has {} values for {} columns",
                    r.len(),
                    names.len()
                )));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row {i} has a missing or non-finite value")));
            }
        }
        Ok(FeatureMatrix { names, ids, rows, labels })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[Updrs] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::invalid(format!("feature `{name}` not in matrix")))
    }

    /// The matrix restricted to `names`, in that order.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<FeatureMatrix> {
        let idx = names
            .iter()
            .map(|n| self.column_index(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        FeatureMatrix::with_ids(
            names.iter().map(|n| n.as_ref().to_string()).collect(),
            self.ids.clone(),
            self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect(),
            self.labels.clone(),
        )
    }

    /// Multiplies every value by `c`.
    pub fn scaled(&self, c: f64) -> FeatureMatrix {
        FeatureMatrix {
            rows: self.rows.iter().map(|r| r.iter().map(|v| v * c).collect()).collect(),
            ..self.clone()
        }
    }

    /// Copy with one row's label replaced.
    pub fn with_label(&self, row: usize, label: Updrs) -> FeatureMatrix {
        let mut out = self.clone();
        out.labels[row] = label;
        out
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
