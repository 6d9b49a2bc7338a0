//! Per-repetition and trial-level time-domain features.

use serde::{Deserialize, Serialize};

use super::interpolate;
use crate::dataset::SegmentationLabels;
use crate::error::{Error, Result};

/// Features of one repetition. `pause` and `regularity` describe the gap to
/// the following repetition and are `None` for the last one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepetitionFeatures {
    /// Rise amplitude θ(t_P) − θ(t_S), deg.
    pub theta_a: f64,
    /// Descent amplitude θ(t_P) − θ(t_E), deg.
    pub theta_d: f64,
    /// Mean of rise and descent amplitudes, deg.
    pub theta: f64,
    /// (Θ_A + Θ_D) / T, deg/s.
    pub omega: f64,
    /// t_E − t_S, s.
    pub duration: f64,
    pub pause: Option<f64>,
    pub regularity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialTimeFeatures {
    pub reps: usize,
    pub theta: f64,
    pub omega: f64,
    pub pause: f64,
    pub regularity: f64,
    pub theta_sd: f64,
    pub omega_sd: f64,
    pub pause_sd: f64,
    pub regularity_sd: f64,
    /// Repetitions per second between the first start and the last end.
    pub frequency: f64,
}

/// Left-minus-right relative differences, percent of the right leg's value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrFeatures {
    pub d_theta: Vec<f64>,
    pub d_omega: Vec<f64>,
    pub mean_d_theta: f64,
    pub mean_d_omega: f64,
}

fn rep_at(labels: &SegmentationLabels, index: usize) -> Result<crate::dataset::RepEvents> {
    labels.reps().get(index).copied().ok_or_else(|| {
        Error::invalid(format!(
            "repetition {} requested but only {} labelled",
            index + 1,
            labels.len()
        ))
    })
}

/// Pause `t_S(r+1) − t_E(r)` and regularity `t_P(r+1) − t_P(r)` after the
/// repetition at 0-based `index`.
pub fn pause_and_regularity(labels: &SegmentationLabels, index: usize) -> Result<(f64, f64)> {
    if index + 1 >= labels.len() {
        return Err(Error::invalid(format!(
            "repetition {} has no successor (trial has {})",
            index + 1,
            labels.len()
        )));
    }
    let (cur, next) = (labels.reps()[index], labels.reps()[index + 1]);
    Ok((next.start - cur.end, next.peak - cur.peak))
}

/// Features of the repetition at 0-based `index`, reading θ at the label
/// instants by linear interpolation.
pub fn repetition_features(
    t: &[f64],
    theta: &[f64],
    labels: &SegmentationLabels,
    index: usize,
) -> Result<RepetitionFeatures> {
    let r = rep_at(labels, index)?;
    let at_start = interpolate(t, theta, r.start)?;
    let at_peak = interpolate(t, theta, r.peak)?;
    let at_end = interpolate(t, theta, r.end)?;
    let theta_a = at_peak - at_start;
    let theta_d = at_peak - at_end;
    let duration = r.end - r.start;
    let (pause, regularity) = match pause_and_regularity(labels, index) {
        Ok((p, q)) => (Some(p), Some(q)),
        Err(_) => (None, None),
    };
    Ok(RepetitionFeatures {
        theta_a,
        theta_d,
        theta: (theta_a + theta_d) / 2.0,
        omega: (theta_a + theta_d) / duration,
        duration,
        pause,
        regularity,
    })
}

pub fn repetitions(t: &[f64], theta: &[f64], labels: &SegmentationLabels) -> Result<Vec<RepetitionFeatures>> {
    (0..labels.len())
        .map(|i| repetition_features(t, theta, labels, i))
        .collect()
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (divisor n − 1).
pub(crate) fn sample_sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Averages, sample standard deviations and repetition frequency over all
/// labelled repetitions. Needs at least three repetitions so that the
/// inter-repetition features have a defined spread.
pub fn trial_time_features(t: &[f64], theta: &[f64], labels: &SegmentationLabels) -> Result<TrialTimeFeatures> {
    let n = labels.len();
    if n < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 repetitions for trial features, got {n}"
        )));
    }
    let reps = repetitions(t, theta, labels)?;
    let amp: Vec<f64> = reps.iter().map(|r| r.theta).collect();
    let speed: Vec<f64> = reps.iter().map(|r| r.omega).collect();
    let pause: Vec<f64> = reps.iter().filter_map(|r| r.pause).collect();
    let reg: Vec<f64> = reps.iter().filter_map(|r| r.regularity).collect();
    Ok(TrialTimeFeatures {
        reps: n,
        theta: mean(&amp),
        omega: mean(&speed),
        pause: mean(&pause),
        regularity: mean(&reg),
        theta_sd: sample_sd(&amp),
        omega_sd: sample_sd(&speed),
        pause_sd: sample_sd(&pause),
        regularity_sd: sample_sd(&reg),
        frequency: n as f64 / (labels.last_end() - labels.first_start()),
    })
}

/// Per-repetition relative differences `(left − right) / right · 100` for
/// amplitude and speed, and their means.
pub fn lr_differences(left: &[RepetitionFeatures], right: &[RepetitionFeatures]) -> Result<LrFeatures> {
    if left.len() != right.len() || left.is_empty() {
        return Err(Error::invalid(format!(
            "left/right repetition counts differ or are empty ({} vs {})",
            left.len(),
            right.len()
        )));
    }
    let mut d_theta = Vec::with_capacity(left.len());
    let mut d_omega = Vec::with_capacity(left.len());
    for (i, (l, r)) in left.iter().zip(right).enumerate() {
        if r.theta == 0.0 || r.omega == 0.0 {
            return Err(Error::Labels {
                rep: i + 1,
                message: "right-leg amplitude or speed is zero".into(),
            });
        }
        d_theta.push((l.theta - r.theta) / r.theta * 100.0);
        d_omega.push((l.omega - r.omega) / r.omega * 100.0);
    }
    Ok(LrFeatures {
        mean_d_theta: mean(&d_theta),
        mean_d_omega: mean(&d_omega),
        d_theta,
        d_omega,
    })
}
