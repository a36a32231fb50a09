use std::sync::{Arc, OnceLock};

use crate::collision::mesh_overlap;
use crate::error::{Error, Result};
use crate::geometry::{Bvh, PointCloud, Pose, TriMesh};
use crate::seed;

use super::asset::{sample_stable_pose_with, ObjectAsset};
use super::render::CameraModel;

/// Surface samples per object used by the success oracle.
pub const SURFACE_SAMPLES: usize = 2048;

/// A placed asset: world-space mesh and BVH for one instance.
#[derive(Debug)]
pub struct SceneObject {
    instance_id: u32,
    asset: Arc<ObjectAsset>,
    pose: Pose,
    mesh: TriMesh,
    bvh: Bvh,
    surface: OnceLock<PointCloud>,
}

impl SceneObject {
    pub fn new(instance_id: u32, asset: Arc<ObjectAsset>, pose: Pose) -> SceneObject {
        let mesh = asset.mesh().transformed(&pose);
        let bvh = Bvh::build(&mesh);
        SceneObject {
            instance_id,
            asset,
            pose,
            mesh,
            bvh,
            surface: OnceLock::new(),
        }
    }

    pub fn instance_id(&self) -> u32 {
        self.instance_id
    }

    pub fn asset(&self) -> &Arc<ObjectAsset> {
        &self.asset
    }

    pub fn pose(&self) -> &Pose {
        &self.pose
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    /// Deterministic area-weighted samples of the full surface with normals,
    /// labeled with this instance id.
    pub fn surface_cloud(&self) -> &PointCloud {
        self.surface.get_or_init(|| {
            let (pts, normals) = self
                .mesh
                .sample_surface(SURFACE_SAMPLES, seed::derive(0, seed::streams::SURFACE, self.instance_id as u64));
            let n = pts.len();
            PointCloud::new(pts, vec![self.instance_id; n])
                .and_then(|c| c.with_normals(normals))
                .expect("surface samples are finite")
        })
    }
}

/// Full scene state: table, camera and placed objects.
#[derive(Clone, Debug)]
pub struct Scene {
    table_height: f64,
    table_half_extent: [f64; 2],
    camera: CameraModel,
    objects: Vec<Arc<SceneObject>>,
}

impl Scene {
    pub fn new(table_height: f64, table_half_extent: [f64; 2], camera: CameraModel) -> Scene {
        Scene {
            table_height,
            table_half_extent,
            camera,
            objects: Vec::new(),
        }
    }

    pub fn table_height(&self) -> f64 {
        self.table_height
    }

    pub fn table_half_extent(&self) -> [f64; 2] {
        self.table_half_extent
    }

    pub fn camera(&self) -> &CameraModel {
        &self.camera
    }

    pub fn with_camera(&self, camera: CameraModel) -> Scene {
        Scene {
            camera,
            ..self.clone()
        }
    }

    pub fn objects(&self) -> &[Arc<SceneObject>] {
        &self.objects
    }

    pub fn object(&self, instance_id: u32) -> Option<&Arc<SceneObject>> {
        self.objects.iter().find(|o| o.instance_id == instance_id)
    }

    pub fn require(&self, instance_id: u32) -> Result<&Arc<SceneObject>> {
        self.object(instance_id).ok_or(Error::TargetNotFound(instance_id))
    }

    pub fn next_instance_id(&self) -> u32 {
        self.objects.iter().map(|o| o.instance_id).max().unwrap_or(0) + 1
    }

    /// Adds an object without any collision check.
    pub fn with_object(&self, asset: Arc<ObjectAsset>, pose: Pose) -> Scene {
        self.with_object_id(self.next_instance_id(), asset, pose)
    }

    pub(crate) fn with_object_id(&self, id: u32, asset: Arc<ObjectAsset>, pose: Pose) -> Scene {
        let mut s = self.clone();
        s.objects.push(Arc::new(SceneObject::new(id, asset, pose)));
        s
    }

    pub fn without(&self, instance_id: u32) -> Scene {
        let mut s = self.clone();
        s.objects.retain(|o| o.instance_id != instance_id);
        s
    }

    /// Only the given instance on the table.
    pub fn isolated(&self, instance_id: u32) -> Result<Scene> {
        let o = self.require(instance_id)?.clone();
        Ok(Scene {
            objects: vec![o],
            ..self.clone()
        })
    }

    /// Whether `mesh_bvh` intersects any placed object.
    pub fn overlaps_any(&self, bvh: &Bvh) -> bool {
        self.objects.iter().any(|o| mesh_overlap(bvh, &o.bvh).is_some())
    }

    /// Pairs of instance ids whose meshes intersect.
    pub fn intersecting_pairs(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (i, a) in self.objects.iter().enumerate() {
            for b in &self.objects[i + 1..] {
                if mesh_overlap(&a.bvh, &b.bvh).is_some() {
                    out.push((a.instance_id, b.instance_id));
                }
            }
        }
        out
    }
}

/// Adds `asset` at a sampled stable pose that does not intersect existing
/// objects, retrying up to `max_attempts` times.
pub fn place_with_rejection(scene: &Scene, asset: &Arc<ObjectAsset>, max_attempts: usize, seed_value: u64) -> Result<Scene> {
    let mut rng = seed::rng(seed_value);
    for _ in 0..max_attempts {
        let pose = sample_stable_pose_with(asset, scene.table_half_extent, scene.table_height, &mut rng)?;
        let candidate = SceneObject::new(scene.next_instance_id(), asset.clone(), pose);
        if candidate.mesh.aabb().min.z < scene.table_height - 1e-9 {
            continue;
        }
        if !scene.overlaps_any(&candidate.bvh) {
            let mut s = scene.clone();
            s.objects.push(Arc::new(candidate));
            return Ok(s);
        }
    }
    Err(Error::PlacementFailed(max_attempts))
}

/// Parameters for [`generate_scene`].
#[derive(Clone, Debug)]
pub struct SceneSpec {
    pub table_height: f64,
    pub table_half_extent: [f64; 2],
    pub camera: CameraModel,
    pub objects: usize,
    pub max_attempts: usize,
}

/// Draws `spec.objects` assets from `library` with replacement and places them
/// in order by rejection sampling. Objects that cannot be placed are skipped.
pub fn generate_scene(library: &[Arc<ObjectAsset>], spec: &SceneSpec, seed_value: u64) -> Result<Scene> {
    use rand::Rng;
    if library.is_empty() {
        return Err(Error::Empty("asset library"));
    }
    let mut rng = seed::rng(seed::derive(seed_value, seed::streams::SCENE, 0));
    let mut scene = Scene::new(spec.table_height, spec.table_half_extent, spec.camera.clone());
    for k in 0..spec.objects {
        let asset = &library[rng.random_range(0..library.len())];
        let s = seed::derive(seed_value, seed::streams::PLACEMENT, k as u64);
        match place_with_rejection(&scene, asset, spec.max_attempts, s) {
            Ok(next) => scene = next,
            Err(Error::PlacementFailed(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Aabb, Point3, Vector3};
    use crate::scene::asset::{procedural_library, AssetShape};

    fn camera() -> CameraModel {
        CameraModel::default()
    }

    #[test]
    fn empty_table_places_first_try() {
        let asset = Arc::new(ObjectAsset::from_shape("b", AssetShape::Box { size: [0.05; 3] }).unwrap());
        let scene = Scene::new(0.0, [0.3, 0.3], camera());
        let s = place_with_rejection(&scene, &asset, 1, 5).unwrap();
        assert_eq!(s.objects().len(), 1);
        assert_eq!(s.objects()[0].instance_id(), 1);
    }

    #[test]
    fn covered_table_fails() {
        let slab = Arc::new(ObjectAsset::from_shape("slab", AssetShape::Box { size: [2.0, 2.0, 0.05] }).unwrap());
        let scene = Scene::new(0.0, [0.3, 0.3], camera()).with_object(slab.clone(), slab.stable_poses()[0].pose);
        let small = Arc::new(ObjectAsset::from_shape("b", AssetShape::Box { size: [0.05; 3] }).unwrap());
        assert!(matches!(place_with_rejection(&scene, &small, 25, 1), Err(Error::PlacementFailed(25))));
    }

    #[test]
    fn generated_scenes_have_no_intersections() {
        let lib: Vec<_> = procedural_library(12, 2, "t").into_iter().map(Arc::new).collect();
        let spec = SceneSpec {
            table_height: 0.0,
            table_half_extent: [0.2, 0.2],
            camera: camera(),
            objects: 5,
            max_attempts: 50,
        };
        for s in 0..10 {
            let scene = generate_scene(&lib, &spec, s).unwrap();
            assert!(scene.intersecting_pairs().is_empty());
            for o in scene.objects() {
                assert!(o.mesh().aabb().min.z >= -1e-9);
            }
        }
    }

    #[test]
    fn isolated_and_without() {
        let a = Arc::new(ObjectAsset::from_shape("b", AssetShape::Box { size: [0.05; 3] }).unwrap());
        let s = Scene::new(0.0, [0.3, 0.3], camera())
            .with_object(a.clone(), Pose::from_translation(Vector3::new(0.0, 0.0, 0.025)))
            .with_object(a, Pose::from_translation(Vector3::new(0.2, 0.0, 0.025)));
        assert_eq!(s.isolated(2).unwrap().objects().len(), 1);
        assert_eq!(s.without(1).objects()[0].instance_id(), 2);
        assert!(matches!(s.isolated(9), Err(Error::TargetNotFound(9))));
        let surf = s.objects()[0].surface_cloud();
        assert_eq!(surf.len(), SURFACE_SAMPLES);
        let b = Aabb::new(Point3::new(-0.026, -0.026, -0.001), Point3::new(0.026, 0.026, 0.051));
        assert!(surf.points().iter().all(|p| b.contains(p)));
    }
}
