//! Rigid-body math, gripper model, point clouds and triangle meshes.

mod bvh;
mod cloud;
mod gripper;
mod mesh;
pub mod mesh_io;
mod pose;
pub mod primitives;

pub use bvh::{Bvh, RayHit};
pub use cloud::{farthest_point_sample, PointCloud, PointGrid, SOURCE_GRIPPER, SOURCE_SCENE, TABLE_INSTANCE};
pub use gripper::{control_points, grasp_distance, GripperModel};
pub use mesh::TriMesh;
pub use pose::Pose;
pub use primitives::{Aabb, Triangle};

pub use nalgebra::{Point3, UnitQuaternion, Vector3};
