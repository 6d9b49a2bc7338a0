//! Automatic repetition segmentation of the inclination signal and
//! diagnostics for manually supplied labels.

use crate::dataset::{OrderingViolation, RepEvents, SegmentationLabels, STANDARD_REPS};
use crate::error::{Error, Result};
use crate::features::interpolate;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentParams {
    pub expected_reps: usize,
    /// Minimum peak prominence, deg.
    pub min_amplitude: f64,
    /// Minimum distance between peaks, s.
    pub min_gap: f64,
    /// Centered moving-average window applied before peak picking, s.
    pub smoothing: f64,
}

impl Default for SegmentParams {
    fn default() -> Self {
        SegmentParams {
            expected_reps: STANDARD_REPS,
            min_amplitude: 5.0,
            min_gap: 0.3,
            smoothing: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutoSegmentation {
    pub labels: SegmentationLabels,
    pub expected_reps: usize,
}

impl AutoSegmentation {
    /// Fewer repetitions were found than requested.
    pub fn is_partial(&self) -> bool {
        self.labels.len() < self.expected_reps
    }
}

pub(crate) fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Centered moving average with an odd window of `w` samples; the window
/// shrinks symmetrically at the edges.
pub fn moving_average(x: &[f64], w: usize) -> Vec<f64> {
    let half = w / 2;
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..x.len())
        .map(|i| {
            let h = half.min(i).min(x.len() - 1 - i);
            let (a, b) = (i - h, i + h + 1);
            (prefix[b] - prefix[a]) / (b - a) as f64
        })
        .collect()
}

/// Topographic prominence of the local maximum at `i`: its height above the
/// higher of the two lowest points reached before meeting higher ground on
/// either side.
fn prominence(x: &[f64], i: usize) -> f64 {
    let h = x[i];
    let mut left_min = h;
    for &v in x[..i].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &x[i + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Time at which `x` crosses `level` walking from `from` toward `to`
/// (exclusive of `from`), linearly interpolated between samples.
fn crossing(t: &[f64], x: &[f64], from: usize, to: usize, level: f64) -> Option<f64> {
    let step = |i: usize| if to < from { i - 1 } else { i + 1 };
    let mut prev = from;
    while prev != to {
        let i = step(prev);
        if x[i] <= level {
            let frac = (x[prev] - level) / (x[prev] - x[i]);
            return Some(t[prev] + frac * (t[i] - t[prev]));
        }
        prev = i;
    }
    None
}

/// Onset (or offset) time of the flank between `peak` and `bound`.
///
/// The flank first has to re-enter the baseline band. The instant the motion
/// leaves rest is then extrapolated from the crossings at 4%, 12% and 30% of
/// the local rise: near rest the crossing time of level `L` behaves as
/// `t0 + a·√L + b·L^1.5`, which is solved for `t0`. The estimate is clamped
/// between the search bound and the lowest crossing.
fn flank_time(t: &[f64], x: &[f64], peak: usize, bound: usize, band_level: f64) -> Option<f64> {
    let (lo, hi) = if bound < peak { (bound, peak) } else { (peak, bound) };
    let floor = x[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
    let band_cross = crossing(t, x, peak, bound, band_level.max(floor))?;
    let rise = x[peak] - floor;
    let refined = (|| {
        let levels = [0.04, 0.12, 0.3];
        let mut times = [0.0; 3];
        for (ti, l) in times.iter_mut().zip(levels) {
            *ti = crossing(t, x, peak, bound, floor + l * rise)?;
        }
        let m = nalgebra::Matrix3::from_fn(|i, j| levels[i].powf([0.0, 0.5, 1.5][j]));
        let est = m.lu().solve(&nalgebra::Vector3::from(times))?[0];
        let (a, b) = if bound < peak { (t[bound], times[0]) } else { (times[0], t[bound]) };
        est.is_finite().then(|| est.clamp(a, b))
    })();
    Some(refined.unwrap_or(band_cross))
}

/// `[1, 2, 1] / 4` smoothing, which cancels sample-to-sample alternation
/// while leaving slow motion essentially untouched. Edges are copied.
fn binomial3(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            if i == 0 || i + 1 == n {
                x[i]
            } else {
                0.25 * (x[i - 1] + 2.0 * x[i] + x[i + 1])
            }
        })
        .collect()
}

/// Detects up to `params.expected_reps` repetitions in `theta`.
///
/// Peaks are local maxima of the smoothed signal whose prominence exceeds
/// `min_amplitude`, at least `min_gap` apart; the most prominent are kept.
/// The peak instant is the maximum near the smoothed peak after a light
/// `[1, 2, 1]` filter, which also feeds the flank search. Start
/// and end lie on the flanks where the signal returns to the baseline band
/// (median ± 10% of the peak's height above the median), never crossing the
/// valley that separates neighbouring peaks.
pub fn auto_segment(t: &[f64], theta: &[f64], params: &SegmentParams) -> Result<AutoSegmentation> {
    if t.len() != theta.len() || t.len() < 3 {
        return Err(Error::invalid("auto segmentation needs matching t/theta of length >= 3"));
    }
    if params.expected_reps == 0 {
        return Err(Error::invalid("expected repetitions must be at least 1"));
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("inclination contains non-finite values"));
    }
    let n = theta.len();
    let dt = median(&t.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>());
    let mut w = ((params.smoothing / dt).round() as usize).max(1);
    if w % 2 == 0 {
        w += 1;
    }
    let smooth = moving_average(theta, w);
    let fine = binomial3(theta);
    let baseline = median(theta);

    let mut candidates: Vec<(usize, f64)> = (1..n - 1)
        .filter(|&i| smooth[i] > smooth[i - 1] && smooth[i] >= smooth[i + 1])
        .map(|i| (i, prominence(&smooth, i)))
        .filter(|&(i, p)| p > params.min_amplitude && smooth[i] - baseline > params.min_amplitude)
        .collect();
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut peaks: Vec<usize> = Vec::new();
    for (i, _) in candidates {
        if peaks.len() == params.expected_reps {
            break;
        }
        if peaks.iter().all(|&j| (t[i] - t[j]).abs() >= params.min_gap) {
            peaks.push(i);
        }
    }
    if peaks.is_empty() {
        return Err(Error::Segmentation(
            "no peak exceeds the minimum amplitude".into(),
        ));
    }
    peaks.sort_unstable();

    // snap to the maximum of the lightly filtered signal near each smoothed peak
    let half = w / 2;
    for p in peaks.iter_mut() {
        let (a, b) = (p.saturating_sub(half), (*p + half).min(n - 1));
        *p = (a..=b).fold(a, |best, i| if fine[i] > fine[best] { i } else { best });
    }

    let valley = |a: usize, b: usize| (a..=b).fold(a, |best, i| if fine[i] < fine[best] { i } else { best });
    let mut reps = Vec::with_capacity(peaks.len());
    for (k, &p) in peaks.iter().enumerate() {
        let lo = if k == 0 { 0 } else { valley(peaks[k - 1], p) };
        let hi = if k + 1 == peaks.len() { n - 1 } else { valley(p, peaks[k + 1]) };
        let band = baseline + 0.1 * (smooth[p] - baseline).max(0.0);
        let start = if lo < p { flank_time(t, &fine, p, lo, band) } else { None };
        let end = if hi > p { flank_time(t, &fine, p, hi, band) } else { None };
        let start = start.unwrap_or(t[lo]);
        let end = end.unwrap_or(t[hi]);
        if start < t[p] && t[p] < end {
            reps.push(RepEvents::new(start, t[p], end));
        }
    }
    if reps.is_empty() {
        return Err(Error::Segmentation("no repetition could be delimited".into()));
    }
    let labels = SegmentationLabels::new(reps)?;
    let seg = AutoSegmentation {
        labels,
        expected_reps: params.expected_reps,
    };
    if seg.is_partial() {
        log::warn!(
            "auto segmentation found {} of {} repetitions",
            seg.labels.len(),
            seg.expected_reps
        );
    }
    Ok(seg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakMismatch {
    /// 1-based repetition number.
    pub rep: usize,
    pub theta_at_peak: f64,
    pub interval_max: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelDiagnostics {
    pub ordering: Vec<OrderingViolation>,
    pub peak_mismatches: Vec<PeakMismatch>,
    /// 1-based repetitions with an event outside the series support.
    pub out_of_range: Vec<usize>,
}

impl LabelDiagnostics {
    pub fn is_clean(&self) -> bool {
        self.ordering.is_empty() && self.peak_mismatches.is_empty() && self.out_of_range.is_empty()
    }
}

/// Peak tolerance used by [`validate_labels`], deg.
pub const PEAK_TOLERANCE_DEG: f64 = 1.0;

/// Checks label ordering and that each labelled peak is the inclination
/// maximum of its repetition within [`PEAK_TOLERANCE_DEG`].
pub fn validate_labels(labels: &SegmentationLabels, t: &[f64], theta: &[f64]) -> LabelDiagnostics {
    let mut diag = LabelDiagnostics {
        ordering: labels.ordering_violations(),
        ..Default::default()
    };
    for (i, r) in labels.reps().iter().enumerate() {
        let rep = i + 1;
        if !(r.start < r.peak && r.peak < r.end) {
            continue;
        }
        let at = |time| interpolate(t, theta, time);
        let (Ok(ts), Ok(tp), Ok(te)) = (at(r.start), at(r.peak), at(r.end)) else {
            diag.out_of_range.push(rep);
            continue;
        };
        let inner = t
            .iter()
            .zip(theta)
            .filter(|(&ti, _)| ti >= r.start && ti <= r.end)
            .map(|(_, &v)| v)
            .fold(ts.max(te), f64::max);
        if inner - tp > PEAK_TOLERANCE_DEG {
            diag.peak_mismatches.push(PeakMismatch {
                rep,
                theta_at_peak: tp,
                interval_max: inner,
            });
        }
    }
    diag
}
