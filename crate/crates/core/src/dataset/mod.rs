//! Trial, label and manifest data model.
//!
//! A trial is one leg's execution of the Leg Agility task recorded by a
//! thigh-mounted 9-axis inertial node. Recordings, segmentation labels and
//! manifests are plain CSV/JSON files; see [`io`] for the readers and writers.

pub mod io;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use io::{
    load_labels, load_manifest, load_trial, write_labels, write_manifest, write_trial,
    ManifestEntry,
};

/// Nominal sampling rate of the inertial nodes.
pub const DEFAULT_SAMPLE_RATE: f64 = 102.4;

/// Number of repetitions in a standard trial.
pub const STANDARD_REPS: usize = 10;

/// One 9-axis inertial sample.
///
/// Accelerometer in m/s², gyroscope in deg/s, magnetometer in normalized
/// arbitrary units. An all-zero magnetometer vector means "no magnetometer".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    pub acc: [f64; 3],
    pub gyr: [f64; 3],
    pub mag: [f64; 3],
}

impl ImuSample {
    fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self
                .acc
                .iter()
                .chain(&self.gyr)
                .chain(&self.mag)
                .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Leg {
    #[serde(rename = "RLA")]
    Right,
    #[serde(rename = "LLA")]
    Left,
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Leg::Right => "RLA",
            Leg::Left => "LLA",
        })
    }
}

impl FromStr for Leg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "RLA" | "rla" | "R" | "right" => Ok(Leg::Right),
            "LLA" | "lla" | "L" | "left" => Ok(Leg::Left),
            other => Err(Error::invalid(format!("unknown leg `{other}`"))),
        }
    }
}

/// A UPDRS score on the half-step grid {0, 0.5, ..., 4}, stored exactly as a
/// count of half steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Updrs(u8);

impl Updrs {
    pub const MAX_HALF_STEPS: u8 = 8;

    /// Every grid value in ascending order.
    pub fn grid() -> impl Iterator<Item = Updrs> {
        (0..=Self::MAX_HALF_STEPS).map(Updrs)
    }

    pub fn from_half_steps(half_steps: u8) -> Result<Self> {
        if half_steps > Self::MAX_HALF_STEPS {
            return Err(Error::UpdrsGrid(f64::from(half_steps) / 2.0));
        }
        Ok(Updrs(half_steps))
    }

    pub fn from_f64(value: f64) -> Result<Self> {
        let doubled = value * 2.0;
        if !value.is_finite() || doubled.fract() != 0.0 || !(0.0..=8.0).contains(&doubled) {
            return Err(Error::UpdrsGrid(value));
        }
        Ok(Updrs(doubled as u8))
    }

    pub fn half_steps(self) -> u8 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// |self - other|, exact on the grid.
    pub fn abs_diff(self, other: Updrs) -> Updrs {
        Updrs(self.0.abs_diff(other.0))
    }
}

impl fmt::Display for Updrs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", self.0 / 2)
        }
    }
}

impl FromStr for Updrs {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("`{s}` is not a UPDRS score")))?;
        Updrs::from_f64(v)
    }
}

impl Serialize for Updrs {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Updrs {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        Updrs::from_f64(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMeta {
    pub trial_id: String,
    pub patient_id: String,
    /// Session tag used to pair left and right trials of the same patient.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub session: String,
    pub leg: Leg,
    pub updrs: Updrs,
    #[serde(default = "default_sample_rate")]
    pub sample_rate: f64,
}

fn default_sample_rate() -> f64 {
    DEFAULT_SAMPLE_RATE
}

impl TrialMeta {
    pub fn new(trial_id: impl Into<String>, patient_id: impl Into<String>, leg: Leg, updrs: Updrs) -> Self {
        TrialMeta {
            trial_id: trial_id.into(),
            patient_id: patient_id.into(),
            session: String::new(),
            leg,
            updrs,
            sample_rate: DEFAULT_SAMPLE_RATE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::Validation(format!(
                "trial {}: sample rate must be positive, got {}",
                self.trial_id, self.sample_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecording {
    pub meta: TrialMeta,
    samples: Vec<ImuSample>,
}

impl TrialRecording {
    /// Checks the recording invariants: at least two samples, all values
    /// finite and timestamps strictly increasing.
    pub fn new(meta: TrialMeta, samples: Vec<ImuSample>) -> Result<Self> {
        meta.validate()?;
        if samples.len() < 2 {
            return Err(Error::Validation(format!(
                "trial {}: need at least 2 samples, got {}",
                meta.trial_id,
                samples.len()
            )));
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::Validation(format!(
                    "trial {}: sample {i} has a non-finite value",
                    meta.trial_id
                )));
            }
            if i > 0 && s.t <= samples[i - 1].t {
                return Err(Error::Validation(format!(
                    "trial {}: timestamp {} at sample {i} does not increase (previous {})",
                    meta.trial_id,
                    s.t,
                    samples[i - 1].t
                )));
            }
        }
        Ok(TrialRecording { meta, samples })
    }

    pub fn samples(&self) -> &[ImuSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn duration(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }
}

/// Event times of one repetition, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepEvents {
    pub start: f64,
    pub peak: f64,
    pub end: f64,
}

impl RepEvents {
    pub fn new(start: f64, peak: f64, end: f64) -> Self {
        RepEvents { start, peak, end }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// An ordering problem found in a label set. `rep` is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingViolation {
    pub rep: usize,
    pub message: String,
}

/// Per-repetition start/peak/end events.
///
/// A value of this type built through [`SegmentationLabels::new`] always
/// satisfies `t_S(1) < t_P(1) < t_E(1) <= t_S(2) < ...`. Unvalidated label
/// sets (for diagnostics) go through [`SegmentationLabels::unchecked`].
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationLabels {
    reps: Vec<RepEvents>,
}

impl SegmentationLabels {
    pub fn new(reps: Vec<RepEvents>) -> Result<Self> {
        let labels = SegmentationLabels { reps };
        if labels.reps.is_empty() {
            return Err(Error::Validation("label set is empty".into()));
        }
        if let Some(v) = labels.ordering_violations().into_iter().next() {
            return Err(Error::Labels {
                rep: v.rep,
                message: v.message,
            });
        }
        Ok(labels)
    }

    pub fn unchecked(reps: Vec<RepEvents>) -> Self {
        SegmentationLabels { reps }
    }

    pub fn reps(&self) -> &[RepEvents] {
        &self.reps
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// True when the trial has fewer than the standard ten repetitions.
    pub fn is_short(&self) -> bool {
        self.reps.len() < STANDARD_REPS
    }

    pub fn first_start(&self) -> f64 {
        self.reps[0].start
    }

    pub fn last_end(&self) -> f64 {
        self.reps[self.reps.len() - 1].end
    }

    pub fn ordering_violations(&self) -> Vec<OrderingViolation> {
        let mut out = Vec::new();
        for (i, r) in self.reps.iter().enumerate() {
            let rep = i + 1;
            if ![r.start, r.peak, r.end].iter().all(|v| v.is_finite()) {
                out.push(OrderingViolation {
                    rep,
                    message: "non-finite event time".into(),
                });
                continue;
            }
            if !(r.start < r.peak && r.peak < r.end) {
                out.push(OrderingViolation {
                    rep,
                    message: format!(
                        "t_P = {} is not inside (t_S, t_E) = ({}, {})",
                        r.peak, r.start, r.end
                    ),
                });
            }
            if let Some(next) = self.reps.get(i + 1) {
                if r.end > next.start {
                    out.push(OrderingViolation {
                        rep,
                        message: format!(
                            "t_E = {} is after the next repetition's t_S = {}",
                            r.end, next.start
                        ),
                    });
                }
            }
        }
        out
    }

    /// The full ordering chain as a predicate.
    pub fn is_ordered(&self) -> bool {
        !self.reps.is_empty() && self.ordering_violations().is_empty()
    }

    /// Shifts every event by `dt` seconds.
    pub fn shifted(&self, dt: f64) -> Self {
        SegmentationLabels {
            reps: self
                .reps
                .iter()
                .map(|r| RepEvents::new(r.start + dt, r.peak + dt, r.end + dt))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn updrs_grid_is_exact() {
        assert_eq!(Updrs::from_f64(3.5).unwrap().half_steps(), 7);
        assert_eq!(Updrs::from_f64(0.0).unwrap().to_string(), "0");
        assert_eq!(Updrs::from_f64(2.5).unwrap().to_string(), "2.5");
        assert!(matches!(Updrs::from_f64(1.3), Err(Error::UpdrsGrid(_))));
        assert!(Updrs::from_f64(4.5).is_err());
        assert!(Updrs::from_f64(-0.5).is_err());
        assert!(Updrs::from_f64(f64::NAN).is_err());
        assert_eq!(Updrs::grid().count(), 9);
        let a = Updrs::from_f64(1.0).unwrap();
        let b = Updrs::from_f64(3.5).unwrap();
        assert_eq!(a.abs_diff(b).value(), 2.5);
    }

    #[test]
    fn recording_rejects_duplicate_timestamps() {
        let meta = TrialMeta::new("t", "p", Leg::Right, Updrs::from_f64(0.0).unwrap());
        let s = |t| ImuSample {
            t,
            acc: [0.0, 0.0, 9.81],
            gyr: [0.0; 3],
            mag: [0.0; 3],
        };
        assert!(TrialRecording::new(meta.clone(), vec![s(0.0), s(0.1)]).is_ok());
        assert!(TrialRecording::new(meta.clone(), vec![s(0.0), s(0.0)]).is_err());
        assert!(TrialRecording::new(meta, vec![s(0.0)]).is_err());
    }

    #[test]
    fn label_ordering_chain() {
        let ok = SegmentationLabels::new(vec![
            RepEvents::new(0.0, 0.5, 1.0),
            RepEvents::new(1.0, 1.5, 2.0),
        ])
        .unwrap();
        assert!(ok.is_ordered());
        assert!(ok.is_short());

        let err = SegmentationLabels::new(vec![
            RepEvents::new(0.0, 1.0, 0.5),
            RepEvents::new(1.0, 1.5, 2.0),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::Labels { rep: 1, .. }));
    }
}
