//! Deterministic synthetic Leg Agility trials with exact ground truth.
//!
//! The thigh inclination is a train of raised-cosine pulses. The IMU
//! readings are derived from it analytically: the gyroscope sees the exact
//! rotation rate, the accelerometer sees rotated gravity and the
//! magnetometer a rotated, downward-dipping north vector.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::io::{write_labels, write_manifest, write_trial, ManifestEntry};
use crate::dataset::{
    ImuSample, Leg, RepEvents, SegmentationLabels, TrialMeta, TrialRecording, Updrs, DEFAULT_SAMPLE_RATE,
    STANDARD_REPS,
};
use crate::error::{Error, Result};
use crate::orientation::{KinematicSeries, UnitQuaternion};

const GRAVITY: f64 = 9.81;
const MAG_DIP_DEG: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub reps: usize,
    /// Peak height of the first repetition above rest, deg.
    pub base_amplitude: f64,
    /// Fractional amplitude loss from one repetition to the next.
    pub decrement_per_rep: f64,
    /// Duration of one raise-and-lower movement, s.
    pub cycle_period: f64,
    /// Rest between repetitions, s.
    pub pause: f64,
    pub hesitation_count: usize,
    /// Notch depth as a fraction of the repetition amplitude.
    pub hesitation_depth: f64,
    /// Gaussian noise SD added to every sensor channel, in that channel's
    /// units.
    pub noise_sd: f64,
    pub severity: f64,
    pub seed: u64,
    pub sample_rate: f64,
    /// Inclination of the resting thigh, deg.
    pub rest_inclination: f64,
    pub lead_in: f64,
    pub lead_out: f64,
    /// Heading of the subject about the vertical, deg.
    pub heading: f64,
    /// Sensor strapped on rotated half a turn about its z axis, which flips
    /// the sign of both inclination and angular velocity.
    pub inverted_mount: bool,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self::from_severity(0.0, 0)
    }
}

impl SynthParams {
    /// Parameters for a severity in `[0, 4]`: amplitude falls, the movement
    /// slows, pauses lengthen and hesitations appear as severity grows.
    pub fn from_severity(severity: f64, seed: u64) -> Self {
        let s = severity.clamp(0.0, 4.0);
        SynthParams {
            reps: STANDARD_REPS,
            base_amplitude: 40.0 - 6.0 * s,
            decrement_per_rep: 0.01 * s,
            cycle_period: 1.0 + 0.2 * s,
            pause: 0.4 + 0.15 * s,
            hesitation_count: (s.floor() as usize).min(3),
            hesitation_depth: 0.08,
            noise_sd: 0.0,
            severity,
            seed,
            sample_rate: DEFAULT_SAMPLE_RATE,
            rest_inclination: 2.0,
            lead_in: 1.5,
            lead_out: 1.5,
            heading: 0.0,
            inverted_mount: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.reps == 0 {
            return bad("synthetic trial needs at least one repetition".into());
        }
        if !(self.base_amplitude > 0.0 && self.base_amplitude < 90.0) {
            return bad(format!("base amplitude must lie in (0, 90) deg, got {}", self.base_amplitude));
        }
        if !(0.0..1.0).contains(&self.decrement_per_rep) {
            return bad(format!("decrement must lie in [0, 1), got {}", self.decrement_per_rep));
        }
        if !(0.0..=4.0).contains(&self.severity) {
            return bad(format!("severity must lie in [0, 4], got {}", self.severity));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return bad(format!("sample rate must be positive, got {}", self.sample_rate));
        }
        if !(self.cycle_period * self.sample_rate >= 8.0) {
            return bad("cycle period must span at least 8 samples".into());
        }
        if !(self.pause >= 0.0 && self.lead_in >= 0.0 && self.lead_out >= 0.0) {
            return bad("pause and lead times must be non-negative".into());
        }
        if !(0.0..0.5).contains(&self.hesitation_depth) {
            return bad(format!("hesitation depth must lie in [0, 0.5), got {}", self.hesitation_depth));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad(format!("noise SD must be non-negative, got {}", self.noise_sd));
        }
        if (self.rest_inclination + self.base_amplitude).abs() >= 90.0 || self.rest_inclination.abs() >= 90.0 {
            return bad("inclination must stay within (-90, 90) deg".into());
        }
        Ok(())
    }

    /// Nearest half-step UPDRS score to the severity.
    pub fn updrs(&self) -> Updrs {
        Updrs::from_half_steps((self.severity * 2.0).round().clamp(0.0, 8.0) as u8).expect("clamped to grid")
    }
}

/// Trial-level features implied by the generator schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub theta: f64,
    pub omega: f64,
    pub pause: f64,
    pub regularity: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthTrial {
    pub recording: TrialRecording,
    pub labels: SegmentationLabels,
    /// Noise-free inclination and angular velocity, with positive meaning
    /// a raised knee regardless of mounting.
    pub kinematics: KinematicSeries,
    pub truth: SynthTruth,
    /// Amplitude of each repetition, deg.
    pub amplitudes: Vec<f64>,
}

struct Pulse {
    start: f64,
    period: f64,
    amplitude: f64,
    notches: Vec<(f64, f64)>,
    depth: f64,
}

impl Pulse {
    /// Inclination offset above rest and its time derivative, deg and deg/s.
    fn eval(&self, t: f64) -> (f64, f64) {
        let u = t - self.start;
        if u <= 0.0 || u >= self.period {
            return (0.0, 0.0);
        }
        let w = 2.0 * PI / self.period;
        let mut x = self.amplitude * (1.0 - (w * u).cos()) / 2.0;
        let mut dx = self.amplitude * w * (w * u).sin() / 2.0;
        for &(a, width) in &self.notches {
            let v = t - a;
            if v > 0.0 && v < width {
                let k = PI / width;
                let d = self.depth * self.amplitude;
                x -= d * (k * v).sin().powi(2);
                dx -= d * k * (2.0 * k * v).sin();
            }
        }
        (x, dx)
    }
}

fn schedule(p: &SynthParams) -> (Vec<Pulse>, Vec<RepEvents>, f64) {
    let dt = 1.0 / p.sample_rate;
    // even sample count so the peak falls on a sample
    let half = ((p.cycle_period * p.sample_rate) / 2.0).round().max(4.0) as usize;
    let period = (2 * half) as f64 * dt;
    let pause_n = (p.pause * p.sample_rate).round() as usize;
    let mut idx = (p.lead_in * p.sample_rate).round() as usize;
    let mut pulses = Vec::with_capacity(p.reps);
    let mut events = Vec::with_capacity(p.reps);
    for r in 0..p.reps {
        let start = idx as f64 * dt;
        let amplitude = p.base_amplitude * (1.0 - p.decrement_per_rep).powi(r as i32);
        // hesitations sit in the upper part of the raise, clear of the
        // onset and of the peak
        let (lo, hi) = (0.22 * period, 0.44 * period);
        let n = p.hesitation_count;
        let notches = (0..n)
            .map(|j| {
                let slot = (hi - lo) / n as f64;
                (start + lo + j as f64 * slot + 0.1 * slot, 0.8 * slot)
            })
            .collect();
        pulses.push(Pulse {
            start,
            period,
            amplitude,
            notches,
            depth: p.hesitation_depth,
        });
        events.push(RepEvents::new(start, (idx + half) as f64 * dt, (idx + 2 * half) as f64 * dt));
        idx += 2 * half + pause_n;
    }
    let end = (idx - pause_n) as f64 * dt + p.lead_out;
    (pulses, events, end)
}

/// Builds one trial. Identical parameters give identical output.
pub fn generate_trial(params: &SynthParams) -> Result<SynthTrial> {
    params.validate()?;
    let (pulses, events, end) = schedule(params);
    let dt = 1.0 / params.sample_rate;
    let n = (end * params.sample_rate).round() as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = Normal::new(0.0, params.noise_sd.max(f64::MIN_POSITIVE)).expect("finite SD");

    let heading = UnitQuaternion::from_axis_angle([0.0, 0.0, 1.0], params.heading.to_radians());
    let mount = if params.inverted_mount {
        UnitQuaternion::from_axis_angle([0.0, 0.0, 1.0], PI)
    } else {
        UnitQuaternion::IDENTITY
    };
    let dip = MAG_DIP_DEG.to_radians();
    let north = [dip.cos(), 0.0, -dip.sin()];

    let mut samples = Vec::with_capacity(n);
    let (mut ts, mut theta, mut omega) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let t = i as f64 * dt;
        let (x, dx) = pulses
            .iter()
            .map(|p| p.eval(t))
            .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        let th = params.rest_inclination + x;
        // device y is the femur, device x the frontal normal
        let body = heading * UnitQuaternion::from_axis_angle([1.0, 0.0, 0.0], th.to_radians());
        let q = body * mount;
        let inv = q.conjugate();
        let gyr_body = [dx, 0.0, 0.0];
        let mut s = ImuSample {
            t,
            acc: inv.rotate([0.0, 0.0, GRAVITY]),
            gyr: mount.conjugate().rotate(gyr_body),
            mag: inv.rotate(north),
        };
        if params.noise_sd > 0.0 {
            for v in s.acc.iter_mut().chain(s.gyr.iter_mut()).chain(s.mag.iter_mut()) {
                *v += noise.sample(&mut rng);
            }
        }
        samples.push(s);
        ts.push(t);
        theta.push(th);
        omega.push(dx);
    }

    let meta = TrialMeta::new("synth", "synth", Leg::Right, params.updrs());
    let mut meta = meta;
    meta.sample_rate = params.sample_rate;
    let recording = TrialRecording::new(meta, samples)?;
    let labels = SegmentationLabels::new(events)?;
    let amplitudes: Vec<f64> = pulses.iter().map(|p| p.amplitude).collect();
    let truth = truth_features(&labels, &amplitudes);
    Ok(SynthTrial {
        recording,
        labels,
        kinematics: KinematicSeries::new(ts, theta, omega)?,
        truth,
        amplitudes,
    })
}

fn truth_features(labels: &SegmentationLabels, amplitudes: &[f64]) -> SynthTruth {
    let reps = labels.reps();
    let n = reps.len() as f64;
    let theta = amplitudes.iter().sum::<f64>() / n;
    let omega = reps
        .iter()
        .zip(amplitudes)
        .map(|(r, a)| 2.0 * a / r.duration())
        .sum::<f64>()
        / n;
    let gaps = reps.len().saturating_sub(1).max(1) as f64;
    let pause = reps.windows(2).map(|w| w[1].start - w[0].end).sum::<f64>() / gaps;
    let regularity = reps.windows(2).map(|w| w[1].peak - w[0].peak).sum::<f64>() / gaps;
    SynthTruth {
        theta,
        omega,
        pause,
        regularity,
        frequency: n / (labels.last_end() - labels.first_start()),
    }
}

/// Settings for a synthetic cohort of patients, each with a right and a
/// left leg trial.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortSpec {
    pub patients: usize,
    pub seed: u64,
    pub noise_sd: f64,
    /// Relative SD of the per-trial jitter applied to amplitude, period and
    /// pause.
    pub jitter: f64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            patients: 36,
            seed: 1,
            noise_sd: 0.0,
            jitter: 0.04,
        }
    }
}

/// Parameters for every trial of a cohort, in manifest order. Patient `p`
/// gets severity `(p mod 9) / 2`; the two legs differ only by jitter.
pub fn cohort_params(spec: &CohortSpec) -> Vec<(TrialMeta, SynthParams)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out = Vec::with_capacity(2 * spec.patients);
    for p in 0..spec.patients {
        let severity = (p % 9) as f64 / 2.0;
        for leg in [Leg::Right, Leg::Left] {
            let mut params = SynthParams::from_severity(severity, rng.next_seed());
            let mut jitter = || (1.0 + spec.jitter * unit.sample(&mut rng)).clamp(0.8, 1.2);
            params.base_amplitude *= jitter();
            params.cycle_period *= jitter();
            params.pause *= jitter();
            params.noise_sd = spec.noise_sd;
            let patient = format!("P{:02}", p + 1);
            let mut meta = TrialMeta::new(format!("{patient}-{leg}"), &patient, leg, params.updrs());
            meta.session = "S1".into();
            out.push((meta, params));
        }
    }
    out
}

trait NextSeed {
    fn next_seed(&mut self) -> u64;
}

impl NextSeed for ChaCha8Rng {
    fn next_seed(&mut self) -> u64 {
        rand::RngCore::next_u64(self)
    }
}

/// Generates a cohort into `dir`: `trials/<id>.csv`, `labels/<id>.csv` and
/// `manifest.json`. Returns the manifest path.
pub fn write_cohort(dir: impl AsRef<Path>, spec: &CohortSpec) -> Result<PathBuf> {
    let dir = dir.as_ref();
    for sub in ["trials", "labels"] {
        std::fs::create_dir_all(dir.join(sub)).map_err(|e| Error::io(dir.join(sub), e))?;
    }
    let plan = cohort_params(spec);
    let entries = plan
        .par_iter()
        .map(|(meta, params)| {
            let mut trial = generate_trial(params)?;
            trial.recording.meta = meta.clone();
            let rec = PathBuf::from("trials").join(format!("{}.csv", meta.trial_id));
            let lab = PathBuf::from("labels").join(format!("{}.csv", meta.trial_id));
            write_trial(dir.join(&rec), &trial.recording)?;
            write_labels(dir.join(&lab), &trial.labels)?;
            Ok(ManifestEntry {
                meta: meta.clone(),
                recording: rec,
                labels: Some(lab),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = dir.join("manifest.json");
    write_manifest(&manifest, &entries)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_fall_on_samples() {
        let p = SynthParams::from_severity(2.5, 3);
        let trial = generate_trial(&p).unwrap();
        let t = trial.recording.times();
        for r in trial.labels.reps() {
            for x in [r.start, r.peak, r.end] {
                assert!(t.iter().any(|&s| s == x));
            }
        }
        assert_eq!(trial.labels.len(), 10);
    }

    #[test]
    fn analytic_rate_matches_finite_difference() {
        let mut p = SynthParams::from_severity(3.0, 0);
        p.reps = 2;
        let (pulses, _, end) = schedule(&p);
        let h = 1e-6;
        let mut t = 0.0;
        while t < end {
            for pulse in &pulses {
                let fd = (pulse.eval(t + h).0 - pulse.eval(t - h).0) / (2.0 * h);
                assert!((fd - pulse.eval(t).1).abs() < 1e-4, "t = {t}");
            }
            t += 0.0037;
        }
    }

    #[test]
    fn peak_is_rep_maximum() {
        let p = SynthParams::from_severity(4.0, 0);
        let trial = generate_trial(&p).unwrap();
        let k = &trial.kinematics;
        for (r, a) in trial.labels.reps().iter().zip(&trial.amplitudes) {
            let i = k.t.iter().position(|&t| t == r.peak).unwrap();
            assert!((k.theta[i] - p.rest_inclination - a).abs() < 1e-9);
            let max = k
                .t
                .iter()
                .zip(&k.theta)
                .filter(|(t, _)| **t >= r.start && **t <= r.end)
                .fold(f64::NEG_INFINITY, |m, (_, v)| m.max(*v));
            assert_eq!(max, k.theta[i]);
        }
    }

    #[test]
    fn validation() {
        let mut p = SynthParams::default();
        p.base_amplitude = 0.0;
        assert!(generate_trial(&p).is_err());
        let mut p = SynthParams::default();
        p.decrement_per_rep = 1.0;
        assert!(generate_trial(&p).is_err());
    }

    #[test]
    fn cohort_layout() {
        let plan = cohort_params(&CohortSpec::default());
        assert_eq!(plan.len(), 72);
        assert_eq!(plan.iter().filter(|(m, _)| m.leg == Leg::Left).count(), 36);
        assert_eq!(plan[0].0.trial_id, "P01-RLA");
        assert_eq!(plan[17].1.severity, 4.0);
    }
}
