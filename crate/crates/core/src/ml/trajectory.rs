use std::io::Write;

use serde::Serialize;

use super::classify::class_centroids;
use super::FeatureMatrix;
use crate::dataset::Updrs;
use crate::error::{Error, Result};

/// One UPDRS score along a trajectory. `centroid` is `None` for a score with
/// no members inside the covered range, which breaks the polyline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryNode {
    pub updrs: Updrs,
    pub centroid: Option<Vec<f64>>,
    /// Row ids of the cluster members.
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub features: Vec<String>,
    pub nodes: Vec<TrajectoryNode>,
}

impl Trajectory {
    /// Centroids actually present, in ascending UPDRS order.
    pub fn points(&self) -> Vec<&[f64]> {
        self.nodes.iter().filter_map(|n| n.centroid.as_deref()).collect()
    }

    /// Polyline as CSV: `updrs,<features>,members`; gap rows leave the
    /// coordinates empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["updrs".to_string()];
        header.extend(self.features.iter().cloned());
        header.push("members".into());
        w.write_record(&header)?;
        for n in &self.nodes {
            let mut rec = vec![n.updrs.to_string()];
            match &n.centroid {
                Some(c) => rec.extend(c.iter().map(|v| v.to_string())),
                None => rec.extend(self.features.iter().map(|_| String::new())),
            }
            rec.push(n.members.join(";"));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<trajectory output>", e))?;
        Ok(())
    }
}

/// Per-score centroids of `matrix` restricted to 2 or 3 features, from the
/// lowest to the highest score present.
pub fn centroid_trajectory<S: AsRef<str>>(matrix: &FeatureMatrix, features: &[S]) -> Result<Trajectory> {
    if !(2..=3).contains(&features.len()) {
        return Err(Error::invalid(format!(
            "trajectory needs 2 or 3 features, got {}",
            features.len()
        )));
    }
    if matrix.n_rows() == 0 {
        return Err(Error::invalid("trajectory of an empty matrix"));
    }
    let sub = matrix.select(features)?;
    let centroids = class_centroids(sub.rows(), sub.labels());
    let lo = centroids.first().map(|c| c.0).expect("non-empty");
    let hi = centroids.last().map(|c| c.0).expect("non-empty");
    let nodes = Updrs::grid()
        .filter(|s| *s >= lo && *s <= hi)
        .map(|s| TrajectoryNode {
            updrs: s,
            centroid: centroids.iter().find(|c| c.0 == s).map(|c| c.1.clone()),
            members: sub
                .ids()
                .iter()
                .zip(sub.labels())
                .filter(|(_, l)| **l == s)
                .map(|(id, _)| id.clone())
                .collect(),
        })
        .collect();
    Ok(Trajectory {
        features: sub.names().to_vec(),
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(v: f64) -> Updrs {
        Updrs::from_f64(v).unwrap()
    }

    #[test]
    fn single_score() {
        let m = FeatureMatrix::new(vec!["a".into(), "b".into()], vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![u(1.5); 2]).unwrap();
        let t = centroid_trajectory(&m, &["a", "b"]).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.points(), vec![&[2.0, 3.0][..]]);
    }

    #[test]
    fn gap_marker_and_means() {
        let m = FeatureMatrix::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 0.0], vec![2.0, 2.0], vec![5.0, 1.0]],
            vec![u(0.0), u(0.0), u(1.0)],
        )
        .unwrap();
        let t = centroid_trajectory(&m, &["a", "b"]).unwrap();
        assert_eq!(t.nodes.len(), 3);
        assert_eq!(t.nodes[0].centroid, Some(vec![1.0, 1.0]));
        assert_eq!(t.nodes[1].centroid, None);
        assert!(t.nodes[1].members.is_empty());
        assert_eq!(t.nodes[2].centroid, Some(vec![5.0, 1.0]));
        assert_eq!(t.nodes[0].members, vec!["0".to_string(), "1".to_string()]);
        assert!(centroid_trajectory(&m, &["a"]).is_err());
    }
}
