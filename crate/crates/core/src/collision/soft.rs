use serde::{Deserialize, Serialize};

use crate::geometry::{GripperModel, PointCloud, Pose};

/// Shape of the point-based collision score.
///
/// With `n` non-target points inside the body and nearest clearance `d`,
/// the raw penetration is `n + (clearance - d) / clearance` for
/// `d < clearance` and zero otherwise. The score is `2 * logistic(slope * raw) - 1`.
/// The default slope `ln 3` puts a point touching the body surface at 0.5.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SoftCollisionParams {
    pub slope: f64,
    pub clearance: f64,
}

impl Default for SoftCollisionParams {
    fn default() -> Self {
        SoftCollisionParams {
            slope: 3f64.ln(),
            clearance: 0.01,
        }
    }
}

impl SoftCollisionParams {
    pub fn score_raw(&self, raw: f64) -> f64 {
        if raw <= 0.0 {
            return 0.0;
        }
        2.0 / (1.0 + (-self.slope * raw).exp()) - 1.0
    }
}

/// Penetration count and nearest clearance of the points other than `target`.
pub fn penetration(gripper: &GripperModel, g: &Pose, cloud: &PointCloud, target: u32, clearance: f64) -> (usize, f64) {
    let region = gripper
        .body_boxes()
        .iter()
        .fold(crate::geometry::Aabb::empty(), |a, b| a.union(b))
        .inflate(clearance);
    let inv = g.inverse();
    let mut inside = 0;
    let mut nearest = f64::INFINITY;
    for (p, &id) in cloud.points().iter().zip(cloud.instance_ids()) {
        if id == target {
            continue;
        }
        let q = inv.transform_point(p);
        if !region.contains(&q) {
            continue;
        }
        let d = gripper.body_distance_local(&q);
        if d == 0.0 {
            inside += 1;
        }
        nearest = nearest.min(d);
    }
    (inside, nearest)
}

/// Probability-like collision score in `[0, 1)`; zero when no non-target
/// point is within the clearance radius.
pub fn soft_collision_score(gripper: &GripperModel, g: &Pose, cloud: &PointCloud, target: u32, params: &SoftCollisionParams) -> f64 {
    let (inside, nearest) = penetration(gripper, g, cloud, target, params.clearance);
    if nearest >= params.clearance {
        return 0.0;
    }
    let raw = inside as f64 + (params.clearance - nearest) / params.clearance;
    params.score_raw(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point3, Vector3};
    use proptest::prelude::*;

    fn one_point(p: Point3<f64>) -> PointCloud {
        PointCloud::new(vec![p], vec![2]).unwrap()
    }

    #[test]
    fn empty_space_scores_zero() {
        let g = GripperModel::default();
        let p = SoftCollisionParams::default();
        assert_eq!(soft_collision_score(&g, &Pose::identity(), &PointCloud::empty(), 1, &p), 0.0);
        let far = one_point(Point3::new(1.0, 1.0, 1.0));
        assert_eq!(soft_collision_score(&g, &Pose::identity(), &far, 1, &p), 0.0);
        // target points never count
        let own = one_point(g.body_centroid());
        assert_eq!(soft_collision_score(&g, &Pose::identity(), &own, 2, &p), 0.0);
    }

    #[test]
    fn point_at_centroid() {
        let g = GripperModel::default();
        let p = SoftCollisionParams::default();
        // inside = 1, clearance term = 1, so raw = 2 and the score is 2/(1 + 3^-2) - 1
        let expected = 0.8;
        let s = soft_collision_score(&g, &Pose::identity(), &one_point(g.body_centroid()), 1, &p);
        assert!((s - expected).abs() < 1e-12);
        assert!(s > 0.5);
    }

    #[test]
    fn approaching_a_wall_never_decreases() {
        let g = GripperModel::default();
        let p = SoftCollisionParams::default();
        let wall: Vec<_> = (0..21)
            .flat_map(|i| (0..21).map(move |j| Point3::new(0.08, -0.05 + i as f64 * 0.005, j as f64 * 0.01)))
            .collect();
        let n = wall.len();
        let cloud = PointCloud::new(wall, vec![3; n]).unwrap();
        let mut last = 0.0;
        // stop once the outer finger reaches the middle of the wall
        for k in 0..36 {
            let pose = Pose::from_translation(Vector3::new(k as f64 * 0.001, 0.0, 0.0));
            let s = soft_collision_score(&g, &pose, &cloud, 1, &p);
            assert!(s >= last);
            last = s;
        }
        assert!(last > 0.9);
    }

    proptest! {
        #[test]
        fn rigid_invariance(ax in prop::array::uniform3(-1.0f64..1.0), ang in -3.0f64..3.0, t in prop::array::uniform3(-0.3f64..0.3),
                            pts in prop::collection::vec(prop::array::uniform3(-0.08f64..0.12), 1..40)) {
            let g = GripperModel::default();
            let params = SoftCollisionParams::default();
            let points: Vec<_> = pts.iter().map(|a| Point3::from(*a)).collect();
            let n = points.len();
            let cloud = PointCloud::new(points.clone(), vec![5; n]).unwrap();
            let m = Pose::new(Pose::from_axis_angle(&Vector3::from(ax), ang).rotation(), Vector3::from(t));
            let moved = PointCloud::new(points.iter().map(|p| m.transform_point(p)).collect(), vec![5; n]).unwrap();
            let grasp = Pose::rot_z(0.3);
            let a = soft_collision_score(&g, &grasp, &cloud, 1, &params);
            let b = soft_collision_score(&g, &m.compose(&grasp), &moved, 1, &params);
            prop_assert!((a - b).abs() < 1e-6);
        }
    }
}
