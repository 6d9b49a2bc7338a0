//! Leave-one-out evaluation and the absolute-error CDF.

use serde::{Deserialize, Serialize};

use super::classify::{knn_classify, ncc_classify, svm_train};
use super::pca::PcaModel;
use super::standardize::Standardizer;
use super::FeatureMatrix;
use crate::dataset::Updrs;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Ncc,
    Knn { k: usize },
    Svm { c: f64 },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Ncc => "ncc",
            Method::Knn { .. } => "knn",
            Method::Svm { .. } => "svm",
        }
    }

    pub(crate) fn rank(&self) -> (u8, usize) {
        match self {
            Method::Ncc => (0, 0),
            Method::Knn { k } => (1, *k),
            Method::Svm { .. } => (2, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    #[serde(flatten)]
    pub method: Method,
    /// Feature columns used, in matrix order.
    pub features: Vec<String>,
    /// Number of principal components, or `None` for the raw features.
    pub pca_dims: Option<usize>,
    #[serde(default = "yes")]
    pub standardize: bool,
}

fn yes() -> bool {
    true
}

impl ClassifierConfig {
    pub fn new(method: Method, features: Vec<String>) -> Self {
        ClassifierConfig {
            method,
            features,
            pca_dims: None,
            standardize: true,
        }
    }

    pub fn with_pca(mut self, dims: usize) -> Self {
        self.pca_dims = Some(dims);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::invalid("classifier needs at least one feature"));
        }
        match self.method {
            Method::Knn { k } if !(1..=10).contains(&k) => {
                return Err(Error::invalid(format!("k must lie in 1..=10, got {k}")))
            }
            Method::Svm { c } if !(c > 0.0 && c.is_finite()) => {
                return Err(Error::invalid(format!("SVM C must be positive, got {c}")))
            }
            _ => {}
        }
        if let Some(d) = self.pca_dims {
            if d == 0 || d > self.features.len() {
                return Err(Error::invalid(format!(
                    "PCA dimension {d} must lie in 1..={}",
                    self.features.len()
                )));
            }
            if !self.standardize {
                return Err(Error::invalid("PCA requires standardized features"));
            }
        }
        Ok(())
    }
}

/// Fits the configured transform and classifier on `train` and labels one
/// query row.
pub fn fit_and_classify(
    config: &ClassifierConfig,
    train: &[Vec<f64>],
    labels: &[Updrs],
    query: &[f64],
) -> Result<Updrs> {
    let cols = query.len();
    let (mut xs, mut q): (Vec<Vec<f64>>, Vec<f64>) = if config.standardize {
        let s = Standardizer::fit_rows(train, cols);
        (train.iter().map(|r| s.transform(r)).collect(), s.transform(query))
    } else {
        (train.to_vec(), query.to_vec())
    };
    if let Some(d) = config.pca_dims {
        if xs.len() >= 2 && !q.is_empty() {
            let model = PcaModel::fit(&xs)?;
            let d = d.min(model.dim());
            xs = model.project(&xs, d)?;
            q = model.project_row(&q, d);
        }
    }
    match config.method {
        Method::Ncc => ncc_classify(&xs, labels, &q),
        Method::Knn { k } => knn_classify(&xs, labels, &q, k),
        Method::Svm { c } => Ok(svm_train(&xs, labels, c)?.classify(&q)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub row: usize,
    pub trial_id: String,
    pub actual: Updrs,
    pub predicted: Updrs,
    pub error: Updrs,
}

/// CDF of the absolute UPDRS error on the grid 0, 0.5, ..., 4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCdf {
    pub grid: Vec<f64>,
    pub fraction: Vec<f64>,
}

/// Fraction of errors not exceeding each grid value.
pub fn error_cdf(errors: &[Updrs]) -> Result<ErrorCdf> {
    if errors.is_empty() {
        return Err(Error::invalid("error CDF of an empty error list"));
    }
    let n = errors.len() as f64;
    let (grid, fraction) = Updrs::grid()
        .map(|g| {
            let hits = errors.iter().filter(|e| **e <= g).count();
            (g.value(), hits as f64 / n)
        })
        .unzip();
    Ok(ErrorCdf { grid, fraction })
}

/// Mean of the CDF over the nine grid points.
pub fn auc(cdf: &ErrorCdf) -> f64 {
    cdf.fraction.iter().sum::<f64>() / cdf.fraction.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ClassifierConfig,
    pub predictions: Vec<Prediction>,
    pub cdf: ErrorCdf,
    pub auc: f64,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Leave-one-out cross-validation: each row is classified by a model whose
/// standardizer, PCA and classifier were fitted on all other rows only.
pub fn loocv(matrix: &FeatureMatrix, config: &ClassifierConfig) -> Result<EvalReport> {
    config.validate()?;
    let n = matrix.n_rows();
    if n < 2 {
        return Err(Error::invalid("leave-one-out needs at least 2 rows"));
    }
    let sub = matrix.select(&config.features)?;
    let rows = sub.rows();
    let labels = sub.labels();
    let mut predictions = Vec::with_capacity(n);
    let mut train = Vec::with_capacity(n - 1);
    let mut train_labels = Vec::with_capacity(n - 1);
    for i in 0..n {
        train.clear();
        train_labels.clear();
        for j in (0..n).filter(|&j| j != i) {
            train.push(rows[j].clone());
            train_labels.push(labels[j]);
        }
        let predicted = fit_and_classify(config, &train, &train_labels, &rows[i]).map_err(|e| Error::Fold {
            row: i,
            source: Box::new(e),
        })?;
        predictions.push(Prediction {
            row: i,
            trial_id: sub.ids()[i].clone(),
            actual: labels[i],
            predicted,
            error: predicted.abs_diff(labels[i]),
        });
    }
    let errors: Vec<Updrs> = predictions.iter().map(|p| p.error).collect();
    let cdf = error_cdf(&errors)?;
    Ok(EvalReport {
        config: config.clone(),
        auc: auc(&cdf),
        predictions,
        cdf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(v: f64) -> Updrs {
        Updrs::from_f64(v).unwrap()
    }

    #[test]
    fn cdf_examples() {
        let perfect = error_cdf(&[u(0.0); 5]).unwrap();
        assert!(perfect.fraction.iter().all(|&f| f == 1.0));
        assert_eq!(auc(&perfect), 1.0);

        let worst = error_cdf(&[u(4.0); 3]).unwrap();
        assert_eq!(worst.fraction[..8], [0.0; 8]);
        assert_eq!(worst.fraction[8], 1.0);
        assert_eq!(auc(&worst), 1.0 / 9.0);

        let mixed = error_cdf(&[u(0.0), u(0.5), u(1.0)]).unwrap();
        assert_eq!(mixed.fraction[0], 1.0 / 3.0);
        assert_eq!(mixed.fraction[1], 2.0 / 3.0);
        assert!(mixed.fraction[2..].iter().all(|&f| f == 1.0));
        assert!((auc(&mixed) - 8.0 / 9.0).abs() < 1e-15);

        assert!(error_cdf(&[]).is_err());
    }

    #[test]
    fn two_rows_force_cross_prediction() {
        let m = FeatureMatrix::new(vec!["x".into()], vec![vec![0.0], vec![1.0]], vec![u(0.5), u(2.0)]).unwrap();
        let r = loocv(&m, &ClassifierConfig::new(Method::Ncc, vec!["x".into()])).unwrap();
        assert_eq!(r.predictions[0].predicted, u(2.0));
        assert_eq!(r.predictions[1].predicted, u(0.5));
        assert!(r.predictions.iter().all(|p| p.error == u(1.5)));
    }

    #[test]
    fn config_validation() {
        let f = vec!["x".to_string()];
        assert!(ClassifierConfig::new(Method::Knn { k: 0 }, f.clone()).validate().is_err());
        assert!(ClassifierConfig::new(Method::Knn { k: 11 }, f.clone()).validate().is_err());
        assert!(ClassifierConfig::new(Method::Ncc, f.clone()).with_pca(2).validate().is_err());
        assert!(ClassifierConfig::new(Method::Ncc, vec![]).validate().is_err());
        assert!(ClassifierConfig::new(Method::Svm { c: 1.0 }, f).with_pca(1).validate().is_ok());
    }

    #[test]
    fn config_json_shape() {
        let c = ClassifierConfig::new(Method::Knn { k: 3 }, vec!["Theta".into()]);
        let j = serde_json::to_value(&c).unwrap();
        assert_eq!(j["method"], "knn");
        assert_eq!(j["k"], 3);
        let back: ClassifierConfig = serde_json::from_value(j).unwrap();
        assert_eq!(back, c);
    }
}
