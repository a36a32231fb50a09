//! Parallel-jaw gripper model and the control-point grasp metric.
//!
//! Gripper frame: origin at the wrist, +z is the approach direction and +x
//! the closing direction. The fingers sit at `x = +-jaw_width / 2` and the
//! closing region is the box between them.

use nalgebra::Point3;

use super::bvh::Bvh;
use super::mesh::TriMesh;
use super::pose::Pose;
use super::primitives::Aabb;

pub const FINGER_THICKNESS: f64 = 0.01;
pub const FINGER_LENGTH: f64 = 0.05;
pub const HAND_DEPTH: f64 = 0.02;
pub const PALM_HEIGHT: f64 = 0.02;
pub const STEM_LENGTH: f64 = 0.04;
pub const STEM_WIDTH: f64 = 0.02;

#[derive(Clone, Debug)]
pub struct GripperModel {
    control_points: Vec<Point3<f64>>,
    body_boxes: Vec<Aabb>,
    body_mesh: TriMesh,
    body_bvh: Bvh,
    jaw_width: f64,
    closing_region: Aabb,
}

impl Default for GripperModel {
    fn default() -> Self {
        GripperModel::parallel_jaw(0.08)
    }
}

impl GripperModel {
    /// Stem, palm and two fingers as boxes; each box is a closed component.
    pub fn parallel_jaw(jaw_width: f64) -> GripperModel {
        assert!(jaw_width > 0.0 && jaw_width.is_finite(), "jaw width must be positive");
        let h = jaw_width / 2.0;
        let y = HAND_DEPTH / 2.0;
        let palm_lo = STEM_LENGTH;
        let finger_lo = palm_lo + PALM_HEIGHT;
        let tip = finger_lo + FINGER_LENGTH;
        let w = STEM_WIDTH / 2.0;
        let body_boxes = vec![
            Aabb::new(Point3::new(-w, -w, 0.0), Point3::new(w, w, palm_lo)),
            Aabb::new(
                Point3::new(-h - FINGER_THICKNESS, -y, palm_lo),
                Point3::new(h + FINGER_THICKNESS, y, finger_lo),
            ),
            Aabb::new(Point3::new(-h - FINGER_THICKNESS, -y, finger_lo), Point3::new(-h, y, tip)),
            Aabb::new(Point3::new(h, -y, finger_lo), Point3::new(h + FINGER_THICKNESS, y, tip)),
        ];
        let body_mesh = body_boxes
            .iter()
            .map(TriMesh::cuboid)
            .reduce(|a, b| a.merge(&b))
            .expect("gripper has boxes");
        let body_bvh = Bvh::build(&body_mesh);
        let mid = (finger_lo + tip) / 2.0;
        let control_points = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(-h, 0.0, finger_lo),
            Point3::new(h, 0.0, finger_lo),
            Point3::new(-h, 0.0, mid),
            Point3::new(h, 0.0, mid),
            Point3::new(-h, 0.0, tip),
            Point3::new(h, 0.0, tip),
        ];
        GripperModel {
            control_points,
            body_boxes,
            body_mesh,
            body_bvh,
            jaw_width,
            closing_region: Aabb::new(Point3::new(-h, -y, finger_lo), Point3::new(h, y, tip)),
        }
    }

    pub fn jaw_width(&self) -> f64 {
        self.jaw_width
    }

    /// Canonical control points in the gripper frame.
    pub fn canonical_control_points(&self) -> &[Point3<f64>] {
        &self.control_points
    }

    pub fn body_mesh(&self) -> &TriMesh {
        &self.body_mesh
    }

    pub fn body_bvh(&self) -> &Bvh {
        &self.body_bvh
    }

    /// The boxes whose union is the body mesh, in the gripper frame.
    pub fn body_boxes(&self) -> &[Aabb] {
        &self.body_boxes
    }

    pub fn closing_region(&self) -> &Aabb {
        &self.closing_region
    }

    /// Volume centroid of the body in the gripper frame.
    pub fn body_centroid(&self) -> Point3<f64> {
        let mut acc = nalgebra::Vector3::zeros();
        let mut vol = 0.0;
        for b in &self.body_boxes {
            acc += b.center().coords * b.volume();
            vol += b.volume();
        }
        Point3::from(acc / vol)
    }

    /// Whether a point given in the gripper frame lies inside the body.
    pub fn body_contains_local(&self, p: &Point3<f64>) -> bool {
        self.body_boxes.iter().any(|b| b.contains(p))
    }

    /// Distance from a gripper-frame point to the body (zero inside).
    pub fn body_distance_local(&self, p: &Point3<f64>) -> f64 {
        self.body_boxes
            .iter()
            .map(|b| b.distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn body_mesh_at(&self, pose: &Pose) -> TriMesh {
        self.body_mesh.transformed(pose)
    }

    pub fn body_bvh_at(&self, pose: &Pose) -> Bvh {
        Bvh::build(&self.body_mesh_at(pose))
    }

    /// Control points moved by `pose`, in canonical order.
    pub fn control_points(&self, pose: &Pose) -> Vec<Point3<f64>> {
        control_points(pose, self)
    }
}

pub fn control_points(pose: &Pose, gripper: &GripperModel) -> Vec<Point3<f64>> {
    gripper
        .control_points
        .iter()
        .map(|p| pose.transform_point(p))
        .collect()
}

/// Mean Euclidean distance between corresponding control points.
pub fn grasp_distance(a: &Pose, b: &Pose, gripper: &GripperModel) -> f64 {
    let n = gripper.control_points.len() as f64;
    gripper
        .control_points
        .iter()
        .map(|p| (a.transform_point(p) - b.transform_point(p)).norm())
        .sum::<f64>()
        / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix4, Vector3, Vector4};
    use proptest::prelude::*;

    fn arb_pose() -> impl Strategy<Value = Pose> {
        (prop::array::uniform3(-1.0f64..1.0), -3.1f64..3.1, prop::array::uniform3(-0.5f64..0.5)).prop_map(|(ax, ang, t)| {
            let r = Pose::from_axis_angle(&Vector3::from(ax), ang);
            Pose::new(r.rotation(), Vector3::from(t))
        })
    }

    #[test]
    fn model_invariants() {
        let g = GripperModel::default();
        assert_eq!(g.canonical_control_points().len(), 7);
        assert!(g.body_mesh().is_watertight());
        assert!(g.closing_region().volume() > 0.0);
        // mirror symmetry about the x = 0 closing plane
        for p in g.canonical_control_points() {
            let m = Point3::new(-p.x, p.y, p.z);
            assert!(g.canonical_control_points().iter().any(|q| (q - m).norm() < 1e-15));
        }
        assert!(g.body_contains_local(&g.body_centroid()));
    }

    #[test]
    fn control_points_identity_and_translation() {
        let g = GripperModel::default();
        assert_eq!(g.control_points(&Pose::identity()), g.canonical_control_points());
        let t = Vector3::new(0.1, -0.2, 0.3);
        for (a, b) in g.control_points(&Pose::from_translation(t)).iter().zip(g.canonical_control_points()) {
            assert!((a - b - t).norm() < 1e-15);
        }
    }

    #[test]
    fn rotation_matches_matrix_multiply() {
        let r = Pose::rot_z(std::f64::consts::FRAC_PI_2);
        let m: Matrix4<f64> = r.to_matrix();
        let hom = m * Vector4::new(1.0, 0.0, 0.0, 1.0);
        let p = r.transform_point(&Point3::new(1.0, 0.0, 0.0));
        assert!((p - Point3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert!((p.coords - hom.xyz()).norm() < 1e-15);
    }

    #[test]
    fn distance_identity_translation_and_rotation() {
        let g = GripperModel::default();
        let p = Pose::new(nalgebra::UnitQuaternion::from_euler_angles(0.2, 0.4, -0.1), Vector3::new(0.1, 0.0, 0.2));
        assert_eq!(grasp_distance(&p, &p, &g), 0.0);
        let d = 0.013;
        let shifted = Pose::from_translation(Vector3::new(0.0, d, 0.0)).compose(&p);
        assert!((grasp_distance(&p, &shifted, &g) - d).abs() < 1e-12);

        // rotation by 10 degrees about an axis through the control-point centroid;
        // oracle: transform every point through 4x4 matrices and average
        let c = g.canonical_control_points().iter().fold(Vector3::zeros(), |a, q| a + q.coords) / 7.0;
        let about = Pose::from_translation(c)
            .compose(&Pose::rot_y(10f64.to_radians()))
            .compose(&Pose::from_translation(-c));
        let rotated = p.compose(&about);
        let (ma, mb) = (p.to_matrix(), rotated.to_matrix());
        let oracle = g
            .canonical_control_points()
            .iter()
            .map(|q| {
                let h = Vector4::new(q.x, q.y, q.z, 1.0);
                (ma * h - mb * h).norm()
            })
            .sum::<f64>()
            / 7.0;
        assert!((grasp_distance(&p, &rotated, &g) - oracle).abs() < 1e-12);
        assert!(oracle > 0.0);
    }

    proptest! {
        #[test]
        fn metric_axioms(a in arb_pose(), b in arb_pose(), c in arb_pose()) {
            let g = GripperModel::default();
            let ab = grasp_distance(&a, &b, &g);
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - grasp_distance(&b, &a, &g)).abs() < 1e-9);
            prop_assert!(ab <= grasp_distance(&a, &c, &g) + grasp_distance(&c, &b, &g) + 1e-9);
        }
    }
}
