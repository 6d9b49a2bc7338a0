use std::io::Write;
use std::path::Path;

use super::fusion::{fuse_orientation, initial_orientation, MountingConfig};
use super::quaternion::{dot, UnitQuaternion};
use crate::dataset::{SegmentationLabels, TrialRecording};
use crate::error::{Error, Result};

/// Thigh inclination (deg) and frontal-plane angular velocity (deg/s) on the
/// recording's time base.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicSeries {
    pub t: Vec<f64>,
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
}

impl KinematicSeries {
    pub fn new(t: Vec<f64>, theta: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if t.len() != theta.len() || t.len() != omega.len() {
            return Err(Error::invalid("kinematic series components differ in length"));
        }
        if t.len() < 2 {
            return Err(Error::invalid("kinematic series needs at least 2 samples"));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("kinematic series time base is not increasing"));
        }
        if theta.iter().chain(&omega).any(|v| !v.is_finite()) {
            return Err(Error::invalid("kinematic series has non-finite values"));
        }
        Ok(KinematicSeries { t, theta, omega })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Flips the sign of both signals.
    pub fn negate(&mut self) {
        self.theta.iter_mut().for_each(|v| *v = -*v);
        self.omega.iter_mut().for_each(|v| *v = -*v);
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io = |e| Error::io(path, e);
        let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(w, "t,theta,omega").map_err(io)?;
        for i in 0..self.t.len() {
            writeln!(w, "{},{},{}", self.t[i], self.theta[i], self.omega[i]).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// Elevation of the femur axis above the horizontal plane, in degrees:
/// 90 minus the angle between the femur axis and the upward vertical.
/// Zero with the thigh horizontal, positive when the knee is raised.
pub fn inclination_series(quats: &[UnitQuaternion], cfg: &MountingConfig) -> Vec<f64> {
    quats
        .iter()
        .map(|q| {
            let f = q.rotate(cfg.femur_axis);
            f[2].clamp(-1.0, 1.0).asin().to_degrees()
        })
        .collect()
}

/// Gyroscope rate projected on the frontal normal axis, in deg/s.
pub fn angular_velocity_series(recording: &TrialRecording, cfg: &MountingConfig) -> Vec<f64> {
    recording
        .samples()
        .iter()
        .map(|s| dot(s.gyr, cfg.frontal_normal_axis))
        .collect()
}

/// Full inertial path: initial attitude from the first sample, filter,
/// inclination and angular velocity.
pub fn compute_kinematics(recording: &TrialRecording, cfg: &MountingConfig) -> Result<KinematicSeries> {
    cfg.validate()?;
    let first = recording.samples()[0];
    let q0 = initial_orientation(first.acc, first.mag)?;
    let quats = fuse_orientation(recording, cfg, q0)?;
    KinematicSeries::new(
        recording.times(),
        inclination_series(&quats, cfg),
        angular_velocity_series(recording, cfg),
    )
}

/// Makes raising the thigh read as positive inclination.
///
/// With labels, both signals are flipped when the mean inclination at the
/// labelled peaks is negative. Without labels the dominant excursion from the
/// median decides. Returns whether a flip happened.
pub fn orient_signs(series: &mut KinematicSeries, labels: Option<&SegmentationLabels>) -> bool {
    let negative = match labels {
        Some(l) => {
            let peaks: Vec<f64> = l
                .reps()
                .iter()
                .filter_map(|r| crate::features::interpolate(&series.t, &series.theta, r.peak).ok())
                .collect();
            !peaks.is_empty() && peaks.iter().sum::<f64>() / (peaks.len() as f64) < 0.0
        }
        None => {
            let med = crate::segmentation::median(&series.theta);
            let hi = series.theta.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) - med;
            let lo = med - series.theta.iter().fold(f64::INFINITY, |m, &v| m.min(v));
            lo > hi
        }
    };
    if negative {
        series.negate();
    }
    negative
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ImuSample, Leg, TrialMeta, Updrs};

    #[test]
    fn inclination_reference_angles() {
        let cfg = MountingConfig::default();
        // femur (device y) horizontal
        let flat = UnitQuaternion::IDENTITY;
        assert!(inclination_series(&[flat], &cfg)[0].abs() < 1e-12);
        // femur 60 deg from the vertical: tilt device y up by 30 deg about x
        let q = UnitQuaternion::from_axis_angle([1.0, 0.0, 0.0], 30f64.to_radians());
        assert!((inclination_series(&[q], &cfg)[0] - 30.0).abs() < 1e-12);
    }

    #[test]
    fn omega_is_axis_projection() {
        let cfg = MountingConfig::default();
        let meta = TrialMeta::new("t", "p", Leg::Left, Updrs::from_f64(1.0).unwrap());
        let rec = TrialRecording::new(
            meta,
            vec![
                ImuSample { t: 0.0, acc: [0.0, 0.0, 9.81], gyr: [50.0, 0.0, 0.0], mag: [0.0; 3] },
                ImuSample { t: 0.01, acc: [0.0, 0.0, 9.81], gyr: [0.0, 50.0, -3.0], mag: [0.0; 3] },
            ],
        )
        .unwrap();
        assert_eq!(angular_velocity_series(&rec, &cfg), vec![50.0, 0.0]);
    }

    #[test]
    fn sign_flip_uses_peak_mean() {
        let mut s = KinematicSeries::new(
            vec![0.0, 1.0, 2.0],
            vec![0.0, -20.0, 0.0],
            vec![-5.0, 0.0, 5.0],
        )
        .unwrap();
        let labels = SegmentationLabels::new(vec![crate::dataset::RepEvents::new(0.0, 1.0, 2.0)]).unwrap();
        assert!(orient_signs(&mut s, Some(&labels)));
        assert_eq!(s.theta[1], 20.0);
        assert_eq!(s.omega[0], 5.0);
        assert!(!orient_signs(&mut s, None));
    }
}
