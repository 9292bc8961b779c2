//! Small fixed-size linear algebra: 3-vectors, 3x3 matrices, rigid transforms.
//!
//! Everything the kinematics and collision code needs fits in these three
//! types, so we avoid pulling in a general-purpose linear algebra crate.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A 3-vector of f64, used for positions, directions, and axes (meters / unitless).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        self * (1.0 / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Component-wise minimum.
    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    /// Component-wise maximum.
    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Rotation of `angle` radians about the unit vector `axis` (Rodrigues form).
    pub fn rotation(axis: Vec3, angle: f64) -> Mat3 {
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let (x, y, z) = (axis.x, axis.y, axis.z);
        Mat3 {
            m: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
        }
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        )
    }

    pub fn mul_mat(&self, o: &Mat3) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Mat3 { m: r }
    }

    pub fn transpose(&self) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[j][i];
            }
        }
        Mat3 { m: r }
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Max absolute deviation of R^T R from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.transpose().mul_mat(self);
        let mut err: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                err = err.max((g.m[i][j] - expect).abs());
            }
        }
        err
    }
}

/// Solve the 3x3 system `a * x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` if the matrix is numerically singular. Callers in the IK path
/// pass `J J^T + mu^2 I` with `mu > 0`, which is always positive definite.
#[allow(clippy::needless_range_loop)]
pub fn solve3(a: &Mat3, b: Vec3) -> Option<Vec3> {
    let mut m = [[0.0f64; 4]; 3];
    let rhs = b.to_array();
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a.m[i]);
        m[i][3] = rhs[i];
    }
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&r1, &r2| m[r1][col].abs().partial_cmp(&m[r2][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = [0.0f64; 3];
    for i in (0..3).rev() {
        let tail: f64 = ((i + 1)..3).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][3] - tail) / m[i][i];
    }
    Some(Vec3::new(x[0], x[1], x[2]))
}

/// A proper rigid transform: rotation followed by translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rot: Mat3,
    pub trans: Vec3,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rot: Mat3::IDENTITY,
        trans: Vec3::ZERO,
    };

    pub fn new(rot: Mat3, trans: Vec3) -> Self {
        RigidTransform { rot, trans }
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rot.mul_vec(p) + self.trans
    }

    pub fn transform_dir(&self, d: Vec3) -> Vec3 {
        self.rot.mul_vec(d)
    }

    /// `self` then `other` applied in the local frame: `self * other`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rot: self.rot.mul_mat(&other.rot),
            trans: self.transform_point(other.trans),
        }
    }
}

impl Default for RigidTransform {
    fn default() -> Self {
        RigidTransform::IDENTITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn rotation_about_z_quarter_turn() {
        let r = Mat3::rotation(Vec3::new(0.0, 0.0, 1.0), FRAC_PI_2);
        let v = r.mul_vec(Vec3::new(1.0, 0.0, 0.0));
        assert!((v - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rotation_is_orthonormal() {
        let axis = Vec3::new(1.0, 2.0, -0.5).normalized();
        let r = Mat3::rotation(axis, 1.234);
        assert!(r.orthonormality_error() < 1e-12);
        assert!((r.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_full_turn_is_identity() {
        let axis = Vec3::new(0.3, -0.4, 0.86).normalized();
        let r = Mat3::rotation(axis, 2.0 * PI);
        let v = Vec3::new(0.2, 0.7, -1.1);
        assert!((r.mul_vec(v) - v).norm() < 1e-12);
    }

    #[test]
    fn solve3_recovers_known_solution() {
        let a = Mat3 {
            m: [[4.0, 1.0, 0.5], [1.0, 3.0, -0.2], [0.5, -0.2, 5.0]],
        };
        let x_true = Vec3::new(0.3, -1.2, 2.5);
        let b = a.mul_vec(x_true);
        let x = solve3(&a, b).unwrap();
        assert!((x - x_true).norm() < 1e-10);
    }

    #[test]
    fn solve3_rejects_singular() {
        let a = Mat3 {
            m: [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]],
        };
        assert!(solve3(&a, Vec3::new(1.0, 2.0, 3.0)).is_none());
    }

    #[test]
    fn compose_matches_sequential_application() {
        let a = RigidTransform::new(
            Mat3::rotation(Vec3::new(0.0, 1.0, 0.0), 0.7),
            Vec3::new(0.1, 0.2, 0.3),
        );
        let b = RigidTransform::new(
            Mat3::rotation(Vec3::new(1.0, 0.0, 0.0), -0.4),
            Vec3::new(-0.5, 0.0, 1.0),
        );
        let p = Vec3::new(0.4, -0.6, 0.9);
        let via_compose = a.compose(&b).transform_point(p);
        let sequential = a.transform_point(b.transform_point(p));
        assert!((via_compose - sequential).norm() < 1e-12);
    }
}
