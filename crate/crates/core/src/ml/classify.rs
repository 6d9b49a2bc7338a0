//! Nearest-centroid, k-nearest-neighbour and linear one-vs-one SVM
//! classifiers over UPDRS labels. Every tie resolves deterministically.

use std::collections::BTreeMap;

use super::sq_dist;
use crate::dataset::Updrs;
use crate::error::{Error, Result};

fn check_training(points: &[Vec<f64>], labels: &[Updrs]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if points.len() != labels.len() {
        return Err(Error::invalid("training points and labels differ in count"));
    }
    Ok(())
}

/// Per-class centroids in ascending label order.
pub fn class_centroids(points: &[Vec<f64>], labels: &[Updrs]) -> Vec<(Updrs, Vec<f64>)> {
    let mut sums: BTreeMap<Updrs, (Vec<f64>, usize)> = BTreeMap::new();
    for (p, &l) in points.iter().zip(labels) {
        let e = sums.entry(l).or_insert_with(|| (vec![0.0; p.len()], 0));
        for (s, v) in e.0.iter_mut().zip(p) {
            *s += v;
        }
        e.1 += 1;
    }
    sums.into_iter()
        .map(|(l, (s, n))| (l, s.into_iter().map(|v| v / n as f64).collect()))
        .collect()
}

/// Label of the Euclidean-nearest class centroid; equal distances go to the
/// lower UPDRS score.
pub fn ncc_classify(points: &[Vec<f64>], labels: &[Updrs], query: &[f64]) -> Result<Updrs> {
    check_training(points, labels)?;
    let mut best: Option<(f64, Updrs)> = None;
    for (label, c) in class_centroids(points, labels) {
        let d = sq_dist(&c, query);
        // ascending label order: only a strictly closer centroid replaces
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, label));
        }
    }
    Ok(best.expect("non-empty training set").1)
}

/// Majority label among the `k` nearest training points.
///
/// Neighbours at equal distance are taken in training order. A tied vote
/// goes to the label whose voters have the smaller summed distance, then to
/// the lower UPDRS score.
pub fn knn_classify(points: &[Vec<f64>], labels: &[Updrs], query: &[f64], k: usize) -> Result<Updrs> {
    check_training(points, labels)?;
    if k == 0 || k > points.len() {
        return Err(Error::invalid(format!(
            "k = {k} must lie in 1..={}",
            points.len()
        )));
    }
    let mut order: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (sq_dist(p, query), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut votes: BTreeMap<Updrs, (usize, f64)> = BTreeMap::new();
    for &(d2, i) in &order[..k] {
        let e = votes.entry(labels[i]).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += d2.sqrt();
    }
    let mut best: Option<(Updrs, usize, f64)> = None;
    for (label, (count, dist)) in votes {
        let better = match best {
            None => true,
            Some((_, bc, bd)) => count > bc || (count == bc && dist < bd),
        };
        if better {
            best = Some((label, count, dist));
        }
    }
    Ok(best.expect("k >= 1").0)
}

/// Soft-margin linear SVMs, one per pair of classes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    classes: Vec<Updrs>,
    /// `(i, j, w, b)`: positive decision favours `classes[i]`, with `i < j`.
    machines: Vec<(usize, usize, Vec<f64>, f64)>,
}

const SVM_TOL: f64 = 1e-8;
const SVM_MAX_EPOCHS: usize = 20_000;

/// Binary hinge-loss SVM by dual coordinate descent, visiting samples in a
/// fixed cyclic order. The bias is learned as the weight of a constant unit
/// feature. `y` is ±1.
fn train_binary(x: &[&[f64]], y: &[f64], c: f64) -> (Vec<f64>, f64) {
    let d = x.first().map_or(0, |v| v.len());
    let mut w = vec![0.0; d + 1];
    let mut alpha = vec![0.0; x.len()];
    let qii: Vec<f64> = x.iter().map(|v| v.iter().map(|a| a * a).sum::<f64>() + 1.0).collect();
    let dot = |w: &[f64], v: &[f64]| v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + w[d];

    for _ in 0..SVM_MAX_EPOCHS {
        let mut max_violation = 0.0f64;
        for i in 0..x.len() {
            let g = y[i] * dot(&w, x[i]) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == c {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(pg.abs());
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / qii[i]).clamp(0.0, c);
                let delta = (alpha[i] - old) * y[i];
                for (wj, xj) in w.iter_mut().zip(x[i].iter()) {
                    *wj += delta * xj;
                }
                w[d] += delta;
            }
        }
        if max_violation < SVM_TOL {
            break;
        }
    }
    let b = w.pop().unwrap_or(0.0);
    (w, b)
}

/// Trains one linear machine for every pair of classes present.
pub fn svm_train(points: &[Vec<f64>], labels: &[Updrs], c: f64) -> Result<LinearSvm> {
    check_training(points, labels)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("SVM regularization must be positive, got {c}")));
    }
    let mut classes: Vec<Updrs> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::invalid("SVM needs at least 2 classes"));
    }
    let mut machines = Vec::new();
    for i in 0..classes.len() {
        for j in i + 1..classes.len() {
            let (mut xs, mut ys) = (Vec::new(), Vec::new());
            for (p, &l) in points.iter().zip(labels) {
                if l == classes[i] {
                    xs.push(p.as_slice());
                    ys.push(1.0);
                } else if l == classes[j] {
                    xs.push(p.as_slice());
                    ys.push(-1.0);
                }
            }
            let (w, b) = train_binary(&xs, &ys, c);
            machines.push((i, j, w, b));
        }
    }
    Ok(LinearSvm { classes, machines })
}

impl LinearSvm {
    pub fn classes(&self) -> &[Updrs] {
        &self.classes
    }

    /// Pairwise vote; a zero decision value and tied vote counts both go to
    /// the lower UPDRS score.
    pub fn classify(&self, query: &[f64]) -> Updrs {
        let mut votes = vec![0usize; self.classes.len()];
        for (i, j, w, b) in &self.machines {
            let f: f64 = w.iter().zip(query).map(|(a, x)| a * x).sum::<f64>() + b;
            if f >= 0.0 {
                votes[*i] += 1;
            } else {
                votes[*j] += 1;
            }
        }
        let mut best = 0;
        for (k, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = k;
            }
        }
        self.classes[best]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(v: f64) -> Updrs {
        Updrs::from_f64(v).unwrap()
    }

    #[test]
    fn ncc_centroid_and_tie() {
        let pts = vec![vec![-2.0], vec![0.0], vec![2.0], vec![4.0]];
        let lab = vec![u(1.0), u(1.0), u(2.5), u(2.5)];
        assert_eq!(ncc_classify(&pts, &lab, &[-1.0]).unwrap(), u(1.0));
        assert_eq!(ncc_classify(&pts, &lab, &[3.0]).unwrap(), u(2.5));
        // bisector between centroids -1 and 3
        assert_eq!(ncc_classify(&pts, &lab, &[1.0]).unwrap(), u(1.0));
        assert!(ncc_classify(&[], &[], &[0.0]).is_err());
    }

    #[test]
    fn knn_majority_and_ties() {
        let pts = vec![vec![0.0], vec![1.0], vec![1.5], vec![10.0]];
        let lab = vec![u(1.0), u(1.0), u(2.0), u(3.0)];
        assert_eq!(knn_classify(&pts, &lab, &[0.0], 1).unwrap(), u(1.0));
        assert_eq!(knn_classify(&pts, &lab, &[1.2], 3).unwrap(), u(1.0));
        assert!(knn_classify(&pts, &lab, &[0.0], 5).is_err());
        assert!(knn_classify(&pts, &lab, &[0.0], 0).is_err());

        // one vote each: the closer voter wins even with the higher label
        let pts = vec![vec![0.0], vec![3.0]];
        let lab = vec![u(2.0), u(0.5)];
        assert_eq!(knn_classify(&pts, &lab, &[1.0], 2).unwrap(), u(2.0));
        // equal vote and equal summed distance: lower label
        assert_eq!(knn_classify(&pts, &lab, &[1.5], 2).unwrap(), u(0.5));
        // distance tie at the k-th neighbour: the earlier training row is taken,
        // even though the later one carries the lower label
        let pts = vec![vec![-1.0], vec![1.0]];
        let lab = vec![u(3.0), u(1.0)];
        assert_eq!(knn_classify(&pts, &lab, &[0.0], 1).unwrap(), u(3.0));
        let lab = vec![u(1.0), u(3.0)];
        assert_eq!(knn_classify(&pts, &lab, &[0.0], 1).unwrap(), u(1.0));
    }

    #[test]
    fn svm_two_points() {
        let pts = vec![vec![-1.0], vec![1.0]];
        let lab = vec![u(0.0), u(1.0)];
        let m = svm_train(&pts, &lab, 1.0).unwrap();
        assert_eq!(m.classify(&[-0.9]), u(0.0));
        assert_eq!(m.classify(&[0.9]), u(1.0));
        assert!(svm_train(&pts, &[u(1.0), u(1.0)], 1.0).is_err());
    }

    #[test]
    fn svm_separable_training_accuracy() {
        let mut pts = Vec::new();
        let mut lab = Vec::new();
        for i in 0..20 {
            let s = (i as f64 * 0.37).sin();
            pts.push(vec![-3.0 + s, 1.0 + 0.5 * s]);
            lab.push(u(0.0));
            pts.push(vec![3.0 + s, -1.0 + 0.3 * s]);
            lab.push(u(2.0));
        }
        let m = svm_train(&pts, &lab, 1.0).unwrap();
        for (p, l) in pts.iter().zip(&lab) {
            assert_eq!(m.classify(p), *l);
        }
    }
}
