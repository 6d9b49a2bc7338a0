//! Orientation estimation and the two kinematic signals derived from it,
//! plus rigid-alignment and time-synchronization helpers.

pub mod alignment;
pub mod fusion;
pub mod kinematics;
pub mod quaternion;

pub use alignment::{best_fit_rotation, estimate_shift_samples, estimate_time_shift};
pub use fusion::{fuse_orientation, initial_orientation, MountingConfig};
pub use kinematics::{
    angular_velocity_series, compute_kinematics, inclination_series, orient_signs, KinematicSeries,
};
pub use quaternion::UnitQuaternion;
