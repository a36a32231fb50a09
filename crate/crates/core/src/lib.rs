//! Cascaded 6-DOF grasp synthesis for objects in clutter.
//!
//! The pipeline samples grasps on a segmented target point cloud, scores them
//! with an object-centric evaluator, refines them with Metropolis-Hastings,
//! and filters them with a clutter-centric collision score. All scorers here
//! are geometric; learned models plug in through the [`scoring::Scorer`]
//! trait and the dataset exporter.
//!
//! Modules:
//! - [`geometry`]: poses, gripper, meshes, BVH, point clouds
//! - [`scene`]: procedural assets, cluttered scene generation, rendering
//! - [`collision`]: exact mesh collision, voxel heuristic, soft score
//! - [`grasp`]: samplers and labeled grasp sets
//! - [`scoring`]: evaluator, cascade, refinement, ranking
//! - [`eval`]: success oracle, coverage, curves, ablation benchmark
//! - [`blocker`]: blocking-object ranking and removal planning
//! - [`dataset`], [`config`]: export and configuration

pub mod blocker;
pub mod canonical;
pub mod collision;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod grasp;
pub mod pipeline;
pub mod scene;
pub mod scoring;
pub mod seed;

pub use error::{Error, Result};
