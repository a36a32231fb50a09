#![allow(dead_code)]

use std::sync::Arc;

use clutterlab::geometry::{Point3, Pose, Vector3};
use clutterlab::scene::{AssetShape, CameraModel, ObjectAsset, Scene};

fn boxed(id: &str, size: [f64; 3]) -> Arc<ObjectAsset> {
    Arc::new(ObjectAsset::from_shape(id, AssetShape::Box { size }).unwrap())
}

/// Scripted blocked-target scene.
///
/// The target is a tall book-like box, wider than the jaw opening, so only
/// jaws closing across its thickness (y) fit. A wider, taller box stands
/// 5 mm behind it, so the far finger of every such grasp runs into it. The
/// camera looks from the front and the +x side, below the target's top.
/// Distractors stand well away. Returns `(scene, target, blocker)`.
pub fn blocked_target_scene(variant: usize) -> (Scene, u32, u32) {
    let v = variant as f64;
    let width = 0.10 + 0.004 * (variant % 3) as f64;
    let thickness = 0.03 + 0.002 * (variant % 4) as f64;
    let height = 0.16 + 0.005 * (variant % 5) as f64;
    let gap = 0.005;
    let blocker_size = [width + 0.08, 0.05, height + 0.03];
    let camera = CameraModel::look_at(
        160,
        120,
        140.0,
        &Point3::new(0.25 + 0.01 * (v - 4.5), -0.40, 0.10),
        &Point3::new(0.0, 0.0, height / 2.0),
    );
    let mut scene = Scene::new(0.0, [0.3, 0.3], camera);
    let distractors = [
        (0.22, -0.12, [0.05, 0.05, 0.07]),
        (-0.22, -0.10, [0.04, 0.06, 0.09]),
        (0.24, 0.14, [0.05, 0.04, 0.05]),
    ];
    let ndistract = 1 + variant % 3;
    let rot = Pose::rot_z(0.05 * (v - 4.5).signum() * (variant % 2) as f64);
    let place = |x: f64, y: f64, size: [f64; 3]| rot.compose(&Pose::from_translation(Vector3::new(x, y, size[2] / 2.0)));
    scene = scene.with_object(boxed("target", [width, thickness, height]), place(0.0, 0.0, [width, thickness, height]));
    let target = 1;
    scene = scene.with_object(
        boxed("blocker", blocker_size),
        place(0.0, thickness / 2.0 + gap + blocker_size[1] / 2.0, blocker_size),
    );
    let blocker = 2;
    for (i, &(x, y, size)) in distractors.iter().take(ndistract).enumerate() {
        scene = scene.with_object(boxed(&format!("d{i}"), size), place(x, y, size));
    }
    assert!(scene.intersecting_pairs().is_empty());
    (scene, target, blocker)
}
