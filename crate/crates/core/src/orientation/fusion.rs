//! Gradient-descent MARG orientation filter.
//!
//! Each step integrates the gyroscope rate, takes a normalized
//! gradient-descent step (gain `beta`, rad/s) toward the orientation in which
//! the measured gravity direction matches the world vertical, and turns the
//! heading toward magnetic north. The world frame has `z` up and magnetic
//! north in the `x-z` plane.

use super::quaternion::{cross, dot, norm, scale, UnitQuaternion};
use crate::dataset::TrialRecording;
use crate::error::{Error, Result};

/// Device mounting on the thigh and filter gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MountingConfig {
    /// Device-frame axis aligned with the femur, pointing toward the knee.
    pub femur_axis: [f64; 3],
    /// Device-frame axis perpendicular to the femur in the frontal plane;
    /// the gyroscope component about it is the angular velocity signal.
    pub frontal_normal_axis: [f64; 3],
    pub beta: f64,
}

impl Default for MountingConfig {
    fn default() -> Self {
        MountingConfig {
            femur_axis: [0.0, 1.0, 0.0],
            frontal_normal_axis: [1.0, 0.0, 0.0],
            beta: 0.1,
        }
    }
}

impl MountingConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("femur", self.femur_axis), ("frontal normal", self.frontal_normal_axis)] {
            if (norm(axis) - 1.0).abs() > 1e-6 {
                return Err(Error::invalid(format!("{name} axis is not unit length")));
            }
        }
        if dot(self.femur_axis, self.frontal_normal_axis).abs() > 1e-6 {
            return Err(Error::invalid("femur and frontal normal axes are not orthogonal"));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::invalid(format!(
                "filter gain must lie in (0, 1], got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Initial orientation from one accelerometer (and optional magnetometer)
/// reading: gravity defines the vertical, the horizontal part of the field
/// defines north. Without a usable field the shortest-arc tilt is returned.
pub fn initial_orientation(acc: [f64; 3], mag: [f64; 3]) -> Result<UnitQuaternion> {
    let an = norm(acc);
    if an == 0.0 {
        return Err(Error::invalid("accelerometer sample has zero norm"));
    }
    let up = scale(acc, 1.0 / an);
    let horiz = {
        let m = mag;
        let along = dot(m, up);
        [m[0] - along * up[0], m[1] - along * up[1], m[2] - along * up[2]]
    };
    let hn = norm(horiz);
    if norm(mag) == 0.0 || hn < 1e-9 * norm(mag).max(1.0) {
        return Ok(UnitQuaternion::from_two_vectors(up, [0.0, 0.0, 1.0]));
    }
    // world axes expressed in the device frame
    let north = scale(horiz, 1.0 / hn);
    let west = cross(up, north);
    // device-to-world matrix has these as rows
    Ok(UnitQuaternion::from_matrix([north, west, up]))
}

fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = norm(v);
    (n > 0.0 && n.is_finite()).then(|| scale(v, 1.0 / n))
}

/// Gradient of `|R^T (0,0,1) - a|²` at `q`, or `None` without a usable
/// accelerometer reading.
fn gravity_gradient(q: UnitQuaternion, acc: [f64; 3]) -> Option<[f64; 4]> {
    let a = normalize(acc)?;
    let [q1, q2, q3, q4] = q.as_array();
    let f = [
        2.0 * (q2 * q4 - q1 * q3) - a[0],
        2.0 * (q1 * q2 + q3 * q4) - a[1],
        2.0 * (0.5 - q2 * q2 - q3 * q3) - a[2],
    ];
    Some([
        -2.0 * q3 * f[0] + 2.0 * q2 * f[1],
        2.0 * q4 * f[0] + 2.0 * q1 * f[1] - 4.0 * q2 * f[2],
        -2.0 * q1 * f[0] + 2.0 * q4 * f[1] - 4.0 * q3 * f[2],
        2.0 * q2 * f[0] + 2.0 * q3 * f[1],
    ])
}

/// Angle about the world vertical from the estimated magnetic north to the
/// world `x` axis, or `None` when the field has no horizontal part.
fn heading_error(q: UnitQuaternion, mag: [f64; 3]) -> Option<f64> {
    let h = q.rotate(normalize(mag)?);
    let horiz = (h[0] * h[0] + h[1] * h[1]).sqrt();
    (horiz > 1e-9).then(|| h[1].atan2(h[0]))
}

/// One filter step: `gyr` in rad/s over `dt` seconds.
///
/// The gyroscope rate is integrated first. A normalized gradient step of
/// length `beta·dt` then pulls the prediction toward the measured gravity
/// direction, and a rotation about the world vertical of at most
/// `2·beta·dt` rad turns the estimated magnetic north toward `x`. The
/// magnetometer therefore only ever corrects heading, never inclination.
pub(crate) fn step(
    q: UnitQuaternion,
    gyr: [f64; 3],
    acc: [f64; 3],
    mag: [f64; 3],
    beta: f64,
    dt: f64,
) -> UnitQuaternion {
    let omega = UnitQuaternion::raw(0.0, gyr[0], gyr[1], gyr[2]);
    let rate = q * omega;
    let pred = UnitQuaternion::raw(
        q.w + 0.5 * rate.w * dt,
        q.x + 0.5 * rate.x * dt,
        q.y + 0.5 * rate.y * dt,
        q.z + 0.5 * rate.z * dt,
    )
    .normalized()
    .unwrap_or(q);

    let Some(g) = gravity_gradient(pred, acc) else {
        log::debug!("zero-norm accelerometer sample, gyro-only propagation");
        return pred;
    };
    let gn = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]).sqrt();
    // a normalized step would turn rounding noise into a full correction
    let tilted = if gn < 1e-10 {
        pred
    } else {
        let k = beta * dt / gn;
        UnitQuaternion::raw(pred.w - k * g[0], pred.x - k * g[1], pred.y - k * g[2], pred.z - k * g[3])
            .normalized()
            .unwrap_or(pred)
    };

    match heading_error(tilted, mag) {
        Some(err) => {
            let limit = 2.0 * beta * dt;
            UnitQuaternion::from_axis_angle([0.0, 0.0, 1.0], -err.clamp(-limit, limit)) * tilted
        }
        None => tilted,
    }
}

/// Runs the filter over a recording, returning one orientation per sample.
///
/// The first output is `q0`. Each later step integrates the mean of the two
/// bracketing gyroscope readings over that step's own `dt`, so irregular
/// sampling needs no resampling.
pub fn fuse_orientation(
    recording: &TrialRecording,
    cfg: &MountingConfig,
    q0: UnitQuaternion,
) -> Result<Vec<UnitQuaternion>> {
    cfg.validate()?;
    let samples = recording.samples();
    let mut out = Vec::with_capacity(samples.len());
    let mut q = q0
        .normalized()
        .ok_or_else(|| Error::invalid("initial orientation has zero norm"))?;
    out.push(q);
    let deg = std::f64::consts::PI / 180.0;
    let mut zero_acc = 0usize;
    for pair in samples.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        let dt = cur.t - prev.t;
        let gyr = [
            0.5 * (prev.gyr[0] + cur.gyr[0]) * deg,
            0.5 * (prev.gyr[1] + cur.gyr[1]) * deg,
            0.5 * (prev.gyr[2] + cur.gyr[2]) * deg,
        ];
        if norm(cur.acc) == 0.0 {
            zero_acc += 1;
        }
        q = step(q, gyr, cur.acc, cur.mag, cfg.beta, dt);
        out.push(q);
    }
    if zero_acc > 0 {
        log::warn!(
            "trial {}: {zero_acc} zero-norm accelerometer samples propagated with gyro only",
            recording.meta.trial_id
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ImuSample, Leg, TrialMeta, Updrs};

    fn recording(samples: Vec<ImuSample>) -> TrialRecording {
        let meta = TrialMeta::new("t", "p", Leg::Right, Updrs::from_f64(0.0).unwrap());
        TrialRecording::new(meta, samples).unwrap()
    }

    const MAG_WORLD: [f64; 3] = [0.5, 0.0, -0.866_025_403_784_438_6];

    #[test]
    fn stationary_identity_stays_put() {
        let samples = (0..300)
            .map(|i| ImuSample {
                t: i as f64 / 102.4,
                acc: [0.0, 0.0, 9.81],
                gyr: [0.0; 3],
                mag: MAG_WORLD,
            })
            .collect();
        let qs = fuse_orientation(&recording(samples), &MountingConfig::default(), UnitQuaternion::IDENTITY).unwrap();
        let last = *qs.last().unwrap();
        for (a, b) in last.as_array().iter().zip([1.0, 0.0, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-3, "{last:?}");
        }
        for q in &qs {
            assert!((q.norm_squared() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn converges_from_tilted_start() {
        let samples = (0..205)
            .map(|i| ImuSample {
                t: i as f64 / 102.4,
                acc: [0.0, 0.0, 9.81],
                gyr: [0.0; 3],
                mag: MAG_WORLD,
            })
            .collect();
        let q0 = UnitQuaternion::from_axis_angle([1.0, 0.0, 0.0], 0.05);
        let qs = fuse_orientation(&recording(samples), &MountingConfig::default(), q0).unwrap();
        assert!(qs.last().unwrap().angle_to(UnitQuaternion::IDENTITY) < 2e-3);
    }

    #[test]
    fn zero_gain_rejected() {
        let cfg = MountingConfig {
            beta: 0.0,
            ..MountingConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = MountingConfig {
            femur_axis: [1.0, 0.0, 0.0],
            ..MountingConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn initial_orientation_from_field() {
        let truth = UnitQuaternion::from_axis_angle([0.3, -0.5, 0.8], 1.1);
        let inv = truth.conjugate();
        let acc = scale(inv.rotate([0.0, 0.0, 1.0]), 9.81);
        let mag = inv.rotate(MAG_WORLD);
        let q0 = initial_orientation(acc, mag).unwrap();
        assert!(q0.angle_to(truth) < 1e-12);
        assert!(initial_orientation([0.0; 3], mag).is_err());
    }

    #[test]
    fn zero_accel_falls_back_to_gyro() {
        let q = step(UnitQuaternion::IDENTITY, [0.0, 0.0, 1.0], [0.0; 3], [0.0; 3], 0.1, 0.01);
        assert!((q.angle() - 0.01).abs() < 1e-6);
    }
}
