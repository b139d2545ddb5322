use nalgebra::{Matrix3, Point3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elementwise tolerance for `RᵀR = I` and `det R = 1`.
const ORTHONORMAL_TOL: f64 = 1e-9;
/// Tolerance on the homogeneous bottom row when loading 4×4 matrices.
const BOTTOM_ROW_TOL: f64 = 1e-12;

/// A proper rigid motion: rotation (orthonormal, det +1) plus translation.
///
/// Serialized as a 4×4 row-major homogeneous matrix; deserialization
/// re-validates the invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 4]; 4]", into = "[[f64; 4]; 4]")]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl RigidTransform {
    /// Builds a transform, validating orthonormality and determinant.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let gram = rotation.transpose() * rotation;
        let dev = (gram - Matrix3::identity()).abs().max();
        if dev > ORTHONORMAL_TOL {
            return Err(Error::InvalidParameter(format!(
                "rotation is not orthonormal (max |RᵀR − I| = {dev:.3e})"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::InvalidParameter(format!(
                "rotation determinant is {det}, expected +1"
            )));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// For internal construction from sources that are orthonormal by
    /// construction (SVD products, axis-angle).
    pub(crate) fn from_parts_unchecked(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Rotation by `angle` radians about `axis` (normalized internally),
    /// followed by `translation`.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64, translation: Vector3<f64>) -> Self {
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle);
        Self {
            rotation: rot.into_inner(),
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn transform_point(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn inverse(&self) -> Self {
        let rot_t = self.rotation.transpose();
        Self {
            rotation: rot_t,
            translation: -(rot_t * self.translation),
        }
    }

    /// Composition such that `a.compose(&b)` applies `b` first: `x ↦ a(b(x))`.
    pub fn compose(&self, rhs: &Self) -> Self {
        Self {
            rotation: self.rotation * rhs.rotation,
            translation: self.rotation * rhs.translation + self.translation,
        }
    }

    pub fn to_matrix4(&self) -> [[f64; 4]; 4] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            [r[(0, 0)], r[(0, 1)], r[(0, 2)], t[0]],
            [r[(1, 0)], r[(1, 1)], r[(1, 2)], t[1]],
            [r[(2, 0)], r[(2, 1)], r[(2, 2)], t[2]],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }

    pub fn from_matrix4(m: &[[f64; 4]; 4]) -> Result<Self> {
        let bottom = [m[3][0], m[3][1], m[3][2], m[3][3] - 1.0];
        if bottom.iter().any(|v| v.abs() > BOTTOM_ROW_TOL) {
            return Err(Error::InvalidParameter(format!(
                "homogeneous bottom row must be (0,0,0,1), got {:?}",
                m[3]
            )));
        }
        let rotation = Matrix3::new(
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        );
        let translation = Vector3::new(m[0][3], m[1][3], m[2][3]);
        Self::new(rotation, translation)
    }
}

impl TryFrom<[[f64; 4]; 4]> for RigidTransform {
    type Error = Error;

    fn try_from(m: [[f64; 4]; 4]) -> Result<Self> {
        Self::from_matrix4(&m)
    }
}

impl From<RigidTransform> for [[f64; 4]; 4] {
    fn from(t: RigidTransform) -> Self {
        t.to_matrix4()
    }
}
