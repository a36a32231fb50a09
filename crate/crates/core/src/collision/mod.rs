//! Exact mesh collision over the full scene, the voxel occupancy heuristic
//! built from a partial cloud, and a point-based soft collision score.

mod exact;
mod soft;
mod voxel;

pub use exact::{colliding_instances, collides, exact_collision, hits_table, mesh_overlap, CollisionResult, Overlap, Witness};
pub use soft::{penetration, soft_collision_score, SoftCollisionParams};
pub use voxel::{voxel_collision, voxelize_scene, VoxelGrid, DEFAULT_POINTS_PER_OBJECT, DEFAULT_VOXEL_SIZE};
