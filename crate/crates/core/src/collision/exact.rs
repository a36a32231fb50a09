use serde::Serialize;

use crate::canonical;
use crate::geometry::{Bvh, GripperModel, Pose};
use crate::scene::Scene;

/// How two closed meshes were found to overlap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Overlap {
    /// Source triangle indices `(a, b)` that intersect.
    Triangles(usize, usize),
    /// One mesh lies wholly inside the other without surface crossings.
    Enclosed,
}

/// Overlap test between closed meshes: surface intersection first, then
/// containment of one component point per connected component.
pub fn mesh_overlap(a: &Bvh, b: &Bvh) -> Option<Overlap> {
    if !a.bounds().intersects(&b.bounds()) {
        return None;
    }
    if let Some((i, j)) = a.first_overlap(b) {
        return Some(Overlap::Triangles(i, j));
    }
    let inside = |x: &Bvh, y: &Bvh| x.component_points().iter().any(|p| y.contains_point(p));
    (inside(a, b) || inside(b, a)).then_some(Overlap::Enclosed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Triangles {
        instance: u32,
        gripper_triangle: usize,
        scene_triangle: usize,
    },
    Enclosed {
        instance: u32,
    },
    /// Gripper vertex at or below the table plane.
    Table { gripper_vertex: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CollisionResult {
    pub colliding: bool,
    /// Surface-to-surface clearance; `None` when colliding.
    #[serde(serialize_with = "opt_f64")]
    pub min_distance: Option<f64>,
    pub witness: Option<Witness>,
}

fn opt_f64<S: serde::Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    x.map(canonical::round_sig).serialize(s)
}

fn table_witness(body: &Bvh, gripper: &GripperModel, g: &Pose, table_height: f64) -> Option<Witness> {
    if body.bounds().min.z > table_height {
        return None;
    }
    gripper
        .body_mesh()
        .vertices()
        .iter()
        .position(|v| g.transform_point(v).z <= table_height)
        .map(|gripper_vertex| Witness::Table { gripper_vertex })
}

fn first_witness(body: &Bvh, gripper: &GripperModel, g: &Pose, scene: &Scene, exclude: Option<u32>) -> Option<Witness> {
    if let Some(w) = table_witness(body, gripper, g, scene.table_height()) {
        return Some(w);
    }
    for o in scene.objects() {
        if Some(o.instance_id()) == exclude {
            continue;
        }
        match mesh_overlap(body, o.bvh()) {
            Some(Overlap::Triangles(i, j)) => {
                return Some(Witness::Triangles {
                    instance: o.instance_id(),
                    gripper_triangle: i,
                    scene_triangle: j,
                })
            }
            Some(Overlap::Enclosed) => return Some(Witness::Enclosed { instance: o.instance_id() }),
            None => {}
        }
    }
    None
}

/// Collision of the gripper body at `g` against every scene mesh except
/// `exclude` and against the table half-space. Touching counts as colliding.
pub fn exact_collision(gripper: &GripperModel, g: &Pose, scene: &Scene, exclude: Option<u32>) -> CollisionResult {
    let body = gripper.body_bvh_at(g);
    if let Some(w) = first_witness(&body, gripper, g, scene, exclude) {
        return CollisionResult {
            colliding: true,
            min_distance: None,
            witness: Some(w),
        };
    }
    let mut d = body.bounds().min.z - scene.table_height();
    for o in scene.objects() {
        if Some(o.instance_id()) != exclude && o.bvh().bounds().distance(&body.bounds()) < d {
            d = d.min(body.distance(o.bvh()));
        }
    }
    CollisionResult {
        colliding: false,
        min_distance: Some(d),
        witness: None,
    }
}

/// Boolean form of [`exact_collision`] without the clearance query.
pub fn collides(gripper: &GripperModel, g: &Pose, scene: &Scene, exclude: Option<u32>) -> bool {
    first_witness(&gripper.body_bvh_at(g), gripper, g, scene, exclude).is_some()
}

/// Instances (not the table) whose meshes the gripper at `g` overlaps.
pub fn colliding_instances(gripper: &GripperModel, g: &Pose, scene: &Scene) -> Vec<u32> {
    let body = gripper.body_bvh_at(g);
    scene
        .objects()
        .iter()
        .filter(|o| mesh_overlap(&body, o.bvh()).is_some())
        .map(|o| o.instance_id())
        .collect()
}

/// Whether the gripper at `g` touches or penetrates the table.
pub fn hits_table(gripper: &GripperModel, g: &Pose, table_height: f64) -> bool {
    gripper
        .body_mesh()
        .vertices()
        .iter()
        .any(|v| g.transform_point(v).z <= table_height)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::triangles_intersect;
    use crate::geometry::Vector3;
    use crate::scene::{AssetShape, CameraModel, ObjectAsset};
    use rand::Rng;
    use std::sync::Arc;

    fn cube_scene() -> Scene {
        let a = Arc::new(ObjectAsset::from_shape("c", AssetShape::Box { size: [0.1; 3] }).unwrap());
        Scene::new(0.0, [0.3, 0.3], CameraModel::default()).with_object(a, Pose::from_translation(Vector3::new(0.0, 0.0, 0.05)))
    }

    #[test]
    fn separated_gripper_reports_gap() {
        let g = GripperModel::default();
        let s = cube_scene();
        // approach straight down, tips 1 m above the cube top
        let tip = 0.04 + 0.02 + 0.05;
        let pose = Pose::from_translation(Vector3::new(0.0, 0.0, 1.1 + tip)).compose(&Pose::rot_x(std::f64::consts::PI));
        let r = exact_collision(&g, &pose, &s, None);
        assert!(!r.colliding);
        assert!((r.min_distance.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn centroid_inside_cube_collides() {
        let g = GripperModel::default();
        let s = cube_scene();
        let c = g.body_centroid();
        let pose = Pose::from_translation(Vector3::new(0.0, 0.0, 0.05) - c.coords);
        let r = exact_collision(&g, &pose, &s, None);
        assert!(r.colliding && r.witness.is_some() && r.min_distance.is_none());
    }

    #[test]
    fn enclosed_gripper_collides() {
        let g = GripperModel::default();
        let a = Arc::new(ObjectAsset::from_shape("big", AssetShape::Box { size: [0.5; 3] }).unwrap());
        let s = Scene::new(-1.0, [0.3, 0.3], CameraModel::default()).with_object(a, Pose::identity());
        let r = exact_collision(&g, &Pose::from_translation(Vector3::new(0.0, 0.0, -0.06)), &s, None);
        assert_eq!(r.witness, Some(Witness::Enclosed { instance: 1 }));
    }

    #[test]
    fn table_contact_counts() {
        let g = GripperModel::default();
        let s = Scene::new(0.0, [0.3, 0.3], CameraModel::default());
        assert!(collides(&g, &Pose::identity(), &s, None));
        assert!(!collides(&g, &Pose::from_translation(Vector3::new(0.0, 0.0, 1e-6)), &s, None));
    }

    #[test]
    fn matches_brute_force() {
        let g = GripperModel::default();
        let s = cube_scene();
        let obj = s.objects()[0].mesh();
        let mut rng = crate::seed::rng(4);
        for _ in 0..200 {
            let axis = Vector3::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let t = Vector3::new(rng.random_range(-0.15..0.15), rng.random_range(-0.15..0.15), rng.random_range(0.0..0.25));
            let pose = Pose::new(Pose::from_axis_angle(&axis, rng.random_range(-3.0..3.0)).rotation(), t);
            let body = g.body_mesh_at(&pose);
            let surf = (0..body.triangle_count())
                .any(|i| (0..obj.triangle_count()).any(|j| triangles_intersect(&body.triangle(i), &obj.triangle(j))));
            let inside = body.vertices().iter().any(|v| obj.contains(v)) || obj.vertices().iter().any(|v| body.contains(v));
            let table = body.vertices().iter().any(|v| v.z <= 0.0);
            assert_eq!(collides(&g, &pose, &s, None), surf || inside || table);
        }
    }
}
