use std::ops::Mul;

/// Rotation quaternion `w + xi + yj + zk`.
///
/// Used as the sensor-to-world rotation: a device-frame vector `v` maps to
/// the world frame as `q v q*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Default for UnitQuaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub(crate) const fn raw(w: f64, x: f64, y: f64, z: f64) -> Self {
        UnitQuaternion { w, x, y, z }
    }

    /// Normalizes `(w, x, y, z)`; returns `None` for a zero vector.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Option<Self> {
        Self::raw(w, x, y, z).normalized()
    }

    /// Rotation by `angle` radians about `axis` (need not be unit length).
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let n = norm(axis);
        if n == 0.0 {
            return Self::IDENTITY;
        }
        let (s, c) = (angle / 2.0).sin_cos();
        Self::raw(c, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n)
    }

    /// Shortest-arc rotation taking direction `from` onto direction `to`.
    pub fn from_two_vectors(from: [f64; 3], to: [f64; 3]) -> Self {
        let a = scale(from, 1.0 / norm(from));
        let b = scale(to, 1.0 / norm(to));
        let d = dot(a, b);
        if d < -1.0 + 1e-12 {
            // antiparallel: any axis orthogonal to `a`
            let helper = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            return Self::from_axis_angle(cross(a, helper), std::f64::consts::PI);
        }
        let c = cross(a, b);
        Self::new(1.0 + d, c[0], c[1], c[2]).unwrap_or(Self::IDENTITY)
    }

    /// Quaternion of a proper rotation matrix (rows).
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Self {
        let tr = m[0][0] + m[1][1] + m[2][2];
        let q = if tr > 0.0 {
            let s = (tr + 1.0).sqrt() * 2.0;
            Self::raw(
                0.25 * s,
                (m[2][1] - m[1][2]) / s,
                (m[0][2] - m[2][0]) / s,
                (m[1][0] - m[0][1]) / s,
            )
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
            Self::raw(
                (m[2][1] - m[1][2]) / s,
                0.25 * s,
                (m[0][1] + m[1][0]) / s,
                (m[0][2] + m[2][0]) / s,
            )
        } else if m[1][1] > m[2][2] {
            let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
            Self::raw(
                (m[0][2] - m[2][0]) / s,
                (m[0][1] + m[1][0]) / s,
                0.25 * s,
                (m[1][2] + m[2][1]) / s,
            )
        } else {
            let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
            Self::raw(
                (m[1][0] - m[0][1]) / s,
                (m[0][2] + m[2][0]) / s,
                (m[1][2] + m[2][1]) / s,
                0.25 * s,
            )
        };
        q.normalized().unwrap_or(Self::IDENTITY)
    }

    pub fn to_matrix(self) -> [[f64; 3]; 3] {
        let UnitQuaternion { w, x, y, z } = self;
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }

    pub fn norm_squared(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub(crate) fn normalized(self) -> Option<Self> {
        let n = self.norm_squared().sqrt();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        Some(Self::raw(self.w / n, self.x / n, self.y / n, self.z / n))
    }

    pub fn conjugate(self) -> Self {
        Self::raw(self.w, -self.x, -self.y, -self.z)
    }

    /// Applies the rotation to a vector.
    pub fn rotate(self, v: [f64; 3]) -> [f64; 3] {
        let p = Self::raw(0.0, v[0], v[1], v[2]);
        let r = self * p * self.conjugate();
        [r.x, r.y, r.z]
    }

    /// Rotation angle in radians, in [0, pi].
    pub fn angle(self) -> f64 {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        2.0 * v.atan2(self.w.abs())
    }

    /// Angle of the relative rotation between two orientations.
    pub fn angle_to(self, other: Self) -> f64 {
        (self.conjugate() * other).angle()
    }

    pub(crate) fn as_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;

    fn mul(self, r: UnitQuaternion) -> UnitQuaternion {
        let l = self;
        UnitQuaternion::raw(
            l.w * r.w - l.x * r.x - l.y * r.y - l.z * r.z,
            l.w * r.x + l.x * r.w + l.y * r.z - l.z * r.y,
            l.w * r.y - l.x * r.z + l.y * r.w + l.z * r.x,
            l.w * r.z + l.x * r.y - l.y * r.x + l.z * r.w,
        )
    }
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}
