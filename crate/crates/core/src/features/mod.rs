//! Kinematic features of a Leg Agility trial.

pub mod frequency;
pub mod time;

use crate::error::{Error, Result};

pub use frequency::{
    amplitude_spectrum, spectral_segment, spectrum_power, AmplitudeSpectrum, SpectralSegment,
};
pub use time::{
    lr_differences, pause_and_regularity, repetition_features, trial_time_features, LrFeatures,
    RepetitionFeatures, TrialTimeFeatures,
};

/// Linear interpolation of `(t, x)` at `at`. `t` must be increasing; `at`
/// must lie inside `[t[0], t[last]]`.
pub fn interpolate(t: &[f64], x: &[f64], at: f64) -> Result<f64> {
    let (start, end) = match (t.first(), t.last()) {
        (Some(&s), Some(&e)) => (s, e),
        _ => return Err(Error::invalid("cannot interpolate an empty series")),
    };
    if !(at >= start && at <= end) {
        return Err(Error::OutOfRange { t: at, start, end });
    }
    let i = t.partition_point(|&v| v <= at);
    if i == 0 {
        return Ok(x[0]);
    }
    if i >= t.len() {
        return Ok(x[t.len() - 1]);
    }
    let (t0, t1) = (t[i - 1], t[i]);
    if at == t0 {
        return Ok(x[i - 1]);
    }
    let w = (at - t0) / (t1 - t0);
    Ok(x[i - 1] + w * (x[i] - x[i - 1]))
}
