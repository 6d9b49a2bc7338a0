//! Amplitude spectra and spectrum power of mean-centered signals.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::interpolate;
use crate::dataset::SegmentationLabels;
use crate::error::{Error, Result};
use crate::orientation::KinematicSeries;

/// `|DFT(x - mean(x))| / N` over all `N` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSpectrum {
    pub values: Vec<f64>,
    /// Bin spacing, Hz.
    pub resolution: f64,
}

impl AmplitudeSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Bins `0..=N/2` as `(frequency_hz, amplitude)` pairs, for display.
    pub fn one_sided(&self) -> Vec<(f64, f64)> {
        self.values[..=self.values.len() / 2]
            .iter()
            .enumerate()
            .map(|(h, &a)| (h as f64 * self.resolution, a))
            .collect()
    }
}

/// Amplitude spectrum of `x` sampled at `sample_rate`. No window and no
/// zero padding.
pub fn amplitude_spectrum(x: &[f64], sample_rate: f64) -> Result<AmplitudeSpectrum> {
    let n = x.len();
    if n < 2 {
        return Err(Error::invalid(format!("spectrum needs at least 2 samples, got {n}")));
    }
    if !(sample_rate > 0.0) {
        return Err(Error::invalid("sample rate must be positive"));
    }
    // shifted by x[0]: exact for constant input
    let mean = x[0] + x.iter().map(|v| v - x[0]).sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok(AmplitudeSpectrum {
        values: buf.iter().map(|c| c.norm() / n as f64).collect(),
        resolution: sample_rate / n as f64,
    })
}

/// `(1/N) Σ X_h²`.
pub fn spectrum_power(spectrum: &AmplitudeSpectrum) -> f64 {
    spectrum.values.iter().map(|v| v * v).sum::<f64>() / spectrum.values.len() as f64
}

/// The part of a trial between the first start and last end label, on a
/// uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSegment {
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    pub sample_rate: f64,
    pub resampled: bool,
}

/// Cuts `[t_S(1), t_E(last)]` out of the series. When the timestamps in that
/// window stray from a uniform `sample_rate` grid by more than a tenth of a
/// sample period, both signals are linearly resampled onto that grid.
pub fn spectral_segment(
    series: &KinematicSeries,
    labels: &SegmentationLabels,
    sample_rate: f64,
) -> Result<SpectralSegment> {
    let (t0, t1) = (labels.first_start(), labels.last_end());
    let a = series.t.partition_point(|&t| t < t0);
    let b = series.t.partition_point(|&t| t <= t1);
    if b <= a + 1 {
        return Err(Error::invalid("spectral segment holds fewer than 2 samples"));
    }
    let t = &series.t[a..b];
    let period = 1.0 / sample_rate;
    let uniform = t
        .iter()
        .enumerate()
        .all(|(k, &tk)| (tk - (t[0] + k as f64 * period)).abs() <= 0.1 * period);
    if uniform {
        return Ok(SpectralSegment {
            theta: series.theta[a..b].to_vec(),
            omega: series.omega[a..b].to_vec(),
            sample_rate,
            resampled: false,
        });
    }
    let count = ((t[t.len() - 1] - t[0]) * sample_rate).floor() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|k| t[0] + k as f64 * period).collect();
    let resample = |x: &[f64]| -> Result<Vec<f64>> {
        grid.iter().map(|&g| interpolate(&series.t, x, g)).collect()
    };
    Ok(SpectralSegment {
        theta: resample(&series.theta)?,
        omega: resample(&series.omega)?,
        sample_rate,
        resampled: true,
    })
}
