//! Rigid transforms in SE(3).

use nalgebra::{Isometry3, Matrix3, Matrix4, Point3, Rotation3, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::canonical;
use crate::error::{Error, Result};

/// Tolerance on the quaternion norm accepted when reading poses from files.
const LOAD_NORM_TOLERANCE: f64 = 1e-6;

/// A rigid transform: rotation as a unit quaternion plus a translation in meters.
///
/// `a.compose(&b)` applies `b` first and then `a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose(Isometry3<f64>);

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Pose(Isometry3::identity())
    }

    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Pose(Isometry3::from_parts(Translation3::from(translation), rotation))
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self::new(UnitQuaternion::identity(), t)
    }

    pub fn from_rotation(r: UnitQuaternion<f64>) -> Self {
        Self::new(r, Vector3::zeros())
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        match Unit::try_new(*axis, 1e-12) {
            Some(axis) => Self::from_rotation(UnitQuaternion::from_axis_angle(&axis, angle)),
            None => Self::identity(),
        }
    }

    pub fn rot_x(angle: f64) -> Self {
        Self::from_axis_angle(&Vector3::x(), angle)
    }

    pub fn rot_y(angle: f64) -> Self {
        Self::from_axis_angle(&Vector3::y(), angle)
    }

    pub fn rot_z(angle: f64) -> Self {
        Self::from_axis_angle(&Vector3::z(), angle)
    }

    /// Builds a pose from an orthonormal frame given as its x, y and z axes.
    pub fn from_frame(x: Vector3<f64>, y: Vector3<f64>, z: Vector3<f64>, origin: Vector3<f64>) -> Self {
        let m = Matrix3::from_columns(&[x, y, z]);
        let rot = Rotation3::from_matrix_unchecked(m);
        Self::new(UnitQuaternion::from_rotation_matrix(&rot), origin)
    }

    /// Reads a pose from a `w, x, y, z` quaternion and a translation.
    ///
    /// The quaternion must be unit within 1e-6; it is kept as given (not
    /// renormalized) so that canonical documents round-trip exactly.
    pub fn from_wxyz(q: [f64; 4], t: [f64; 3]) -> Result<Self> {
        if q.iter().chain(t.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite pose component"));
        }
        let quat = nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]);
        let norm = quat.norm();
        if (norm - 1.0).abs() > LOAD_NORM_TOLERANCE {
            return Err(Error::invalid(format!("quaternion norm {norm} is not unit")));
        }
        Ok(Self::new(UnitQuaternion::new_unchecked(quat), Vector3::from(t)))
    }

    pub fn wxyz(&self) -> [f64; 4] {
        let q = self.0.rotation.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    pub fn translation_array(&self) -> [f64; 3] {
        let t = self.0.translation.vector;
        [t.x, t.y, t.z]
    }

    pub fn rotation(&self) -> UnitQuaternion<f64> {
        self.0.rotation
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.0.translation.vector
    }

    pub fn isometry(&self) -> &Isometry3<f64> {
        &self.0
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        *self.0.rotation.to_rotation_matrix().matrix()
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        self.0.to_homogeneous()
    }

    pub fn compose(&self, other: &Pose) -> Pose {
        Pose(self.0 * other.0)
    }

    pub fn inverse(&self) -> Pose {
        Pose(self.0.inverse())
    }

    pub fn transform_point(&self, p: &Point3<f64>) -> Point3<f64> {
        self.0.transform_point(p)
    }

    pub fn inverse_transform_point(&self, p: &Point3<f64>) -> Point3<f64> {
        self.0.inverse_transform_point(p)
    }

    pub fn transform_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0.transform_vector(v)
    }

    pub fn inverse_transform_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0.inverse_transform_vector(v)
    }

    /// Gripper approach direction (local +z) in the parent frame.
    pub fn approach(&self) -> Vector3<f64> {
        self.transform_vector(&Vector3::z())
    }

    /// Gripper closing direction (local +x) in the parent frame.
    pub fn closing_axis(&self) -> Vector3<f64> {
        self.transform_vector(&Vector3::x())
    }

    pub fn is_finite(&self) -> bool {
        self.wxyz().iter().chain(self.translation_array().iter()).all(|v| v.is_finite())
    }

    /// Rotation angle (radians) and translation distance between two poses.
    pub fn difference(&self, other: &Pose) -> (f64, f64) {
        let rel = self.inverse().compose(other);
        (rel.0.rotation.angle(), rel.0.translation.vector.norm())
    }
}

#[derive(Serialize, Deserialize)]
struct PoseRecord {
    #[serde(serialize_with = "canonical::array4")]
    quaternion_wxyz: [f64; 4],
    #[serde(serialize_with = "canonical::array3")]
    translation: [f64; 3],
}

impl Serialize for Pose {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PoseRecord {
            quaternion_wxyz: self.wxyz(),
            translation: self.translation_array(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pose {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PoseRecord::deserialize(d)?;
        Pose::from_wxyz(r.quaternion_wxyz, r.translation).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx_eq::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    mod approx_eq {
        use super::Pose;
        pub fn pose_close(a: &Pose, b: &Pose, tol: f64) -> bool {
            let (ang, dist) = a.difference(b);
            ang <= tol && dist <= tol
        }
    }

    fn arb_pose() -> impl Strategy<Value = Pose> {
        (
            prop::array::uniform3(-1.0f64..1.0),
            -3.2f64..3.2,
            prop::array::uniform3(-2.0f64..2.0),
        )
            .prop_map(|(axis, angle, t)| {
                let axis = Vector3::from(axis);
                let r = Pose::from_axis_angle(&axis, angle);
                Pose::new(r.rotation(), Vector3::from(t))
            })
    }

    #[test]
    fn identity_is_neutral() {
        let p = Pose::new(
            UnitQuaternion::from_euler_angles(0.1, 0.2, 0.3),
            Vector3::new(1.0, -2.0, 0.5),
        );
        assert_eq!(Pose::identity().compose(&p), p);
        assert!(pose_close(&p.compose(&Pose::identity()), &p, 1e-12));
    }

    #[test]
    fn quarter_turns_add() {
        let r = Pose::rot_z(FRAC_PI_2).compose(&Pose::rot_z(FRAC_PI_2));
        assert!(pose_close(&r, &Pose::rot_z(std::f64::consts::PI), 1e-12));
    }

    #[test]
    fn rejects_non_unit_quaternion() {
        assert!(Pose::from_wxyz([2.0, 0.0, 0.0, 0.0], [0.0; 3]).is_err());
        assert!(Pose::from_wxyz([1.0, 0.0, 0.0, 0.0], [f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let p = Pose::new(UnitQuaternion::from_euler_angles(0.3, -0.2, 1.0), Vector3::new(0.1, 0.2, 0.3));
        let s = serde_json::to_string(&p).unwrap();
        let q: Pose = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&q).unwrap(), s);
    }

    proptest! {
        #[test]
        fn inverse_cancels(p in arb_pose()) {
            let id = p.compose(&p.inverse());
            prop_assert!(pose_close(&id, &Pose::identity(), 1e-9));
            prop_assert!((p.rotation().quaternion().norm() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn compose_is_associative(a in arb_pose(), b in arb_pose(), c in arb_pose()) {
            let l = a.compose(&b).compose(&c);
            let r = a.compose(&b.compose(&c));
            prop_assert!(pose_close(&l, &r, 1e-9));
        }

        #[test]
        fn compose_applies_right_first(a in arb_pose(), b in arb_pose(), p in prop::array::uniform3(-1.0f64..1.0)) {
            let p = Point3::from(p);
            let direct = a.transform_point(&b.transform_point(&p));
            let composed = a.compose(&b).transform_point(&p);
            prop_assert!((direct - composed).norm() < 1e-9);
        }
    }
}
