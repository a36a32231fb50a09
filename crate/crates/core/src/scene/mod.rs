//! Procedural assets, cluttered scene generation and single-view observation.

pub mod asset;
mod corrupt;
mod crop;
pub mod file;
mod render;
mod world;

pub use asset::{procedural_library, sample_stable_pose, AssetShape, ObjectAsset, StablePose};
pub use corrupt::{boundary_neighbors, corrupt_segmentation, occluded_instances, BOUNDARY_BAND};
pub use crop::{crop_target, Crop, DEFAULT_BOX_SIZE, DEFAULT_CENTER_NOISE, DEFAULT_CROP_POINTS};
pub use file::{cloud_to_ply, load_scene, save_scene, scene_from_json, scene_to_json, SceneDocument};
pub use render::{cast_ray, render_cloud, render_cloud_noisy, CameraModel};
pub use world::{generate_scene, place_with_rejection, Scene, SceneObject, SceneSpec, SURFACE_SAMPLES};
