//! Exhaustive AuC-driven search over feature subsets, classifiers and PCA
//! dimensions.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::eval::{loocv, ClassifierConfig, Method};
use super::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpec {
    /// Candidate feature columns; every non-empty subset is tried.
    pub features: Vec<String>,
    pub methods: Vec<Method>,
    /// Include configurations on the standardized features directly.
    pub pca_off: bool,
    /// Include PCA with every dimension from 1 to the subset size.
    pub pca_on: bool,
}

impl SearchSpec {
    /// NCC, kNN for k in 1..=10 and an SVM with C = 1, each with and
    /// without PCA.
    pub fn full(features: Vec<String>) -> Self {
        let mut methods = vec![Method::Ncc];
        methods.extend((1..=10).map(|k| Method::Knn { k }));
        methods.push(Method::Svm { c: 1.0 });
        SearchSpec {
            features,
            methods,
            pca_off: true,
            pca_on: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() || self.features.len() > 16 {
            return Err(Error::invalid("search needs between 1 and 16 candidate features"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("search needs at least one method"));
        }
        if !self.pca_off && !self.pca_on {
            return Err(Error::invalid("search needs PCA on, off, or both"));
        }
        Ok(())
    }

    fn pca_options(&self, size: usize) -> Vec<Option<usize>> {
        let mut out = Vec::new();
        if self.pca_off {
            out.push(None);
        }
        if self.pca_on {
            out.extend((1..=size).map(Some));
        }
        out
    }

    /// Every configuration the search evaluates, in enumeration order.
    pub fn configs(&self) -> Vec<ClassifierConfig> {
        let n = self.features.len();
        let mut out = Vec::new();
        for mask in 1u32..(1 << n) {
            let subset: Vec<String> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| self.features[i].clone())
                .collect();
            for pca in self.pca_options(subset.len()) {
                for &method in &self.methods {
                    out.push(ClassifierConfig {
                        method,
                        features: subset.clone(),
                        pca_dims: pca,
                        standardize: true,
                    });
                }
            }
        }
        out
    }

    pub fn config_count(&self) -> usize {
        let n = self.features.len();
        let pca: usize = (1u32..(1 << n))
            .map(|m| self.pca_options(m.count_ones() as usize).len())
            .sum();
        pca * self.methods.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub config: ClassifierConfig,
    pub auc: f64,
}

fn rank_order(a: &SearchResult, b: &SearchResult) -> Ordering {
    b.auc
        .total_cmp(&a.auc)
        .then(a.config.features.len().cmp(&b.config.features.len()))
        .then_with(|| a.config.features.cmp(&b.config.features))
        .then_with(|| a.config.method.rank().cmp(&b.config.method.rank()))
        .then_with(|| a.config.pca_dims.cmp(&b.config.pca_dims))
}

/// Runs LOOCV for every configuration in parallel and ranks the results by
/// AuC (descending), then by fewer features, then by feature names.
pub fn exhaustive_search(matrix: &FeatureMatrix, spec: &SearchSpec) -> Result<Vec<SearchResult>> {
    spec.validate()?;
    for f in &spec.features {
        matrix.column_index(f)?;
    }
    let mut results = spec
        .configs()
        .into_par_iter()
        .map(|config| {
            let report = loocv(matrix, &config)?;
            Ok(SearchResult { config, auc: report.auc })
        })
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(rank_order);
    Ok(results)
}

/// Writes the ranked table as CSV.
pub fn write_search_csv<W: Write>(results: &[SearchResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "auc", "method", "k", "c", "pca_dims", "n_features", "features"])?;
    for (i, r) in results.iter().enumerate() {
        let (k, c) = match r.config.method {
            Method::Ncc => (String::new(), String::new()),
            Method::Knn { k } => (k.to_string(), String::new()),
            Method::Svm { c } => (String::new(), c.to_string()),
        };
        w.write_record([
            (i + 1).to_string(),
            r.auc.to_string(),
            r.config.method.name().to_string(),
            k,
            c,
            r.config.pca_dims.map_or(String::new(), |d| d.to_string()),
            r.config.features.len().to_string(),
            r.config.features.join("+"),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<search output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Updrs;

    #[test]
    fn two_features_knn_one_no_pca() {
        let spec = SearchSpec {
            features: vec!["a".into(), "b".into()],
            methods: vec![Method::Knn { k: 1 }],
            pca_off: true,
            pca_on: false,
        };
        assert_eq!(spec.config_count(), 3);
        assert_eq!(spec.configs().len(), 3);
    }

    #[test]
    fn full_count_three_features() {
        let spec = SearchSpec::full(vec!["a".into(), "b".into(), "c".into()]);
        // subsets of size 1, 2, 3 carry 2, 3, 4 PCA options; 12 methods
        assert_eq!(spec.config_count(), (3 * 2 + 3 * 3 + 4) * 12);
        assert_eq!(spec.configs().len(), spec.config_count());
    }

    #[test]
    fn ranking_prefers_informative_feature() {
        let u = |v: f64| Updrs::from_f64(v).unwrap();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..24 {
            let s = (i % 4) as f64;
            let noise = ((i * 7919) % 13) as f64 / 13.0;
            rows.push(vec![s + 0.1 * noise, noise]);
            labels.push(u(s));
        }
        let m = FeatureMatrix::new(vec!["good".into(), "noise".into()], rows, labels).unwrap();
        let spec = SearchSpec {
            features: vec!["good".into(), "noise".into()],
            methods: vec![Method::Ncc, Method::Knn { k: 1 }],
            pca_off: true,
            pca_on: false,
        };
        let r = exhaustive_search(&m, &spec).unwrap();
        assert_eq!(r.len(), 6);
        assert_eq!(r[0].config.features, vec!["good".to_string()]);
        assert_eq!(r[0].auc, 1.0);
        assert!(r.windows(2).all(|w| w[0].auc >= w[1].auc));
    }
}
