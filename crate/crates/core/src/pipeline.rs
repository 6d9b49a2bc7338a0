//! Per-trial processing: kinematics, segmentation and the feature vector.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::io::{load_labels, load_trial, ManifestEntry};
use crate::dataset::{SegmentationLabels, TrialMeta, TrialRecording};
use crate::error::{Error, Result};
use crate::features::{
    amplitude_spectrum, spectral_segment, spectrum_power, time::repetitions, trial_time_features, AmplitudeSpectrum,
    RepetitionFeatures, TrialTimeFeatures,
};
use crate::ml::{Feature, FeatureMatrix};
use crate::orientation::{compute_kinematics, orient_signs, KinematicSeries, MountingConfig};
use crate::segmentation::{auto_segment, validate_labels, LabelDiagnostics, SegmentParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentationMode {
    /// Use the labels file referenced by the manifest.
    #[default]
    Labels,
    /// Detect repetitions from the inclination signal.
    Auto,
}

impl fmt::Display for SegmentationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SegmentationMode::Labels => "labels",
            SegmentationMode::Auto => "auto",
        })
    }
}

impl FromStr for SegmentationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "labels" => Ok(SegmentationMode::Labels),
            "auto" => Ok(SegmentationMode::Auto),
            other => Err(Error::invalid(format!("unknown segmentation mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineConfig {
    pub mounting: MountingConfig,
    pub segmentation: SegmentationMode,
    pub segment_params: SegmentParams,
}

/// Everything derived from one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialAnalysis {
    pub meta: TrialMeta,
    pub kinematics: KinematicSeries,
    pub labels: SegmentationLabels,
    pub sign_flipped: bool,
    pub diagnostics: Option<LabelDiagnostics>,
    pub repetitions: Vec<RepetitionFeatures>,
    pub time: TrialTimeFeatures,
    pub spectrum_theta: AmplitudeSpectrum,
    pub spectrum_omega: AmplitudeSpectrum,
    pub power_theta: f64,
    pub power_omega: f64,
}

impl TrialAnalysis {
    pub fn feature(&self, f: Feature) -> f64 {
        let t = &self.time;
        match f {
            Feature::Theta => t.theta,
            Feature::Omega => t.omega,
            Feature::P => t.pause,
            Feature::R => t.regularity,
            Feature::ThetaSd => t.theta_sd,
            Feature::OmegaSd => t.omega_sd,
            Feature::PSd => t.pause_sd,
            Feature::RSd => t.regularity_sd,
            Feature::F => t.frequency,
            Feature::PXomega => self.power_omega,
            Feature::PXtheta => self.power_theta,
        }
    }

    /// All eleven features in canonical order.
    pub fn feature_vector(&self) -> Vec<f64> {
        Feature::ALL.iter().map(|&f| self.feature(f)).collect()
    }
}

/// Runs the full chain on a loaded recording. `labels` is required in
/// labels mode and ignored in auto mode.
pub fn analyze_trial(
    recording: &TrialRecording,
    labels: Option<&SegmentationLabels>,
    cfg: &PipelineConfig,
) -> Result<TrialAnalysis> {
    let mut kin = compute_kinematics(recording, &cfg.mounting)?;
    let (labels, sign_flipped, diagnostics) = match cfg.segmentation {
        SegmentationMode::Labels => {
            let labels = labels.ok_or_else(|| {
                Error::Validation(format!("trial {}: no segmentation labels", recording.meta.trial_id))
            })?;
            let flipped = orient_signs(&mut kin, Some(labels));
            let diag = validate_labels(labels, &kin.t, &kin.theta);
            if !diag.is_clean() {
                log::warn!("trial {}: label diagnostics {:?}", recording.meta.trial_id, diag);
            }
            (labels.clone(), flipped, Some(diag))
        }
        SegmentationMode::Auto => {
            let flipped = orient_signs(&mut kin, None);
            let seg = auto_segment(&kin.t, &kin.theta, &cfg.segment_params)?;
            (seg.labels, flipped, None)
        }
    };
    if sign_flipped {
        log::info!("trial {}: inclination sign flipped", recording.meta.trial_id);
    }
    let reps = repetitions(&kin.t, &kin.theta, &labels)?;
    let time = trial_time_features(&kin.t, &kin.theta, &labels)?;
    let segment = spectral_segment(&kin, &labels, recording.meta.sample_rate)?;
    let spectrum_theta = amplitude_spectrum(&segment.theta, segment.sample_rate)?;
    let spectrum_omega = amplitude_spectrum(&segment.omega, segment.sample_rate)?;
    Ok(TrialAnalysis {
        meta: recording.meta.clone(),
        power_theta: spectrum_power(&spectrum_theta),
        power_omega: spectrum_power(&spectrum_omega),
        kinematics: kin,
        labels,
        sign_flipped,
        diagnostics,
        repetitions: reps,
        time,
        spectrum_theta,
        spectrum_omega,
    })
}

/// Loads a manifest entry's files and analyzes it.
pub fn analyze_entry(entry: &ManifestEntry, cfg: &PipelineConfig) -> Result<TrialAnalysis> {
    let recording = load_trial(&entry.recording, entry.meta.clone())?;
    let labels = match (cfg.segmentation, &entry.labels) {
        (SegmentationMode::Labels, Some(path)) => Some(load_labels(path)?),
        _ => None,
    };
    analyze_trial(&recording, labels.as_ref(), cfg)
}

/// Feature matrix over all eleven features, one row per analysis.
pub fn feature_matrix(analyses: &[TrialAnalysis]) -> Result<FeatureMatrix> {
    FeatureMatrix::with_ids(
        Feature::ALL.iter().map(|f| f.name().to_string()).collect(),
        analyses.iter().map(|a| a.meta.trial_id.clone()).collect(),
        analyses.iter().map(|a| a.feature_vector()).collect(),
        analyses.iter().map(|a| a.meta.updrs).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_trial, SynthParams};

    #[test]
    fn labels_mode_needs_labels() {
        let trial = generate_trial(&SynthParams::default()).unwrap();
        let err = analyze_trial(&trial.recording, None, &PipelineConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn inverted_mount_is_flipped_back() {
        let mut p = SynthParams::from_severity(1.0, 0);
        p.inverted_mount = true;
        let trial = generate_trial(&p).unwrap();
        let a = analyze_trial(&trial.recording, Some(&trial.labels), &PipelineConfig::default()).unwrap();
        assert!(a.sign_flipped);
        assert!((a.time.theta - trial.truth.theta).abs() < 0.02 * trial.truth.theta);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("auto".parse::<SegmentationMode>().unwrap(), SegmentationMode::Auto);
        assert!("manual".parse::<SegmentationMode>().is_err());
    }
}
