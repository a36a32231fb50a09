use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::{collides, mesh_overlap};
use crate::error::{Error, Result};
use crate::eval::success_oracle;
use crate::geometry::{Bvh, GripperModel, PointCloud, Pose, UnitQuaternion, Vector3};
use crate::scene::Scene;
use crate::seed;

use super::sampler::{perturb_with, surface_normal_sampler, DEFAULT_STANDOFF};
use super::{Grasp, GraspLabel, GraspQuality, GraspSetKind, GraspSource};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledGrasp {
    pub grasp: Grasp,
    pub label: GraspLabel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceParams {
    pub standoff: (f64, f64),
    pub friction_mu: f64,
}

impl Default for ReferenceParams {
    fn default() -> Self {
        ReferenceParams {
            standoff: DEFAULT_STANDOFF,
            friction_mu: 0.5,
        }
    }
}

/// Candidates sampled on the target's full surface, labeled with the success
/// oracle on the isolated target (quality) and exact collision against the
/// full scene (collision). Positives form the positive set, the rest the
/// negative set.
pub fn generate_reference_set(
    scene: &Scene,
    target: u32,
    gripper: &GripperModel,
    n_candidates: usize,
    params: &ReferenceParams,
    seed_value: u64,
) -> Result<Vec<LabeledGrasp>> {
    let object = scene.require(target)?;
    let isolated = scene.isolated(target)?;
    let candidates = surface_normal_sampler(
        object.surface_cloud(),
        n_candidates,
        params.standoff,
        seed::derive(seed_value, seed::streams::REFERENCE, target as u64),
    )?;
    candidates
        .par_iter()
        .map(|g| {
            let positive = success_oracle(&g.pose, &isolated, target, gripper, params.friction_mu)?;
            let collision = collides(gripper, &g.pose, scene, None);
            let (quality, set) = if positive {
                (GraspQuality::Positive, GraspSetKind::Positive)
            } else {
                (GraspQuality::Negative, GraspSetKind::Negative)
            };
            Ok(LabeledGrasp {
                grasp: *g,
                label: GraspLabel::new(quality, collision, set)?,
            })
        })
        .collect()
}

/// Number of cloud points inside the closing region inflated by `margin`.
pub fn in_closing_region(gripper: &GripperModel, g: &Pose, cloud: &PointCloud, margin: f64) -> usize {
    let region = gripper.closing_region().inflate(margin);
    let inv = g.inverse();
    cloud
        .points()
        .iter()
        .filter(|p| region.contains(&inv.transform_point(p)))
        .count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardNegativeParams {
    pub max_translation: f64,
    pub max_rotation: f64,
    pub copies: usize,
    /// Margin around the closing region that must be empty for "too far".
    pub far_threshold: f64,
}

impl Default for HardNegativeParams {
    fn default() -> Self {
        HardNegativeParams {
            max_translation: 0.02,
            max_rotation: 15f64.to_radians(),
            copies: 4,
            far_threshold: 0.0,
        }
    }
}

/// Perturbed copies of `positives` that either intersect the target mesh or
/// hold no object point in the closing region.
pub fn hard_negatives(
    positives: &[Grasp],
    object_cloud: &PointCloud,
    target_mesh: &Bvh,
    gripper: &GripperModel,
    params: &HardNegativeParams,
    seed_value: u64,
) -> Vec<Grasp> {
    let mut out = Vec::new();
    for (i, g) in positives.iter().enumerate() {
        let mut rng = seed::rng(seed::derive(seed_value, seed::streams::HARD_NEGATIVE, i as u64));
        for _ in 0..params.copies {
            let p = perturb_with(g, gripper, params.max_translation, params.max_rotation, &mut rng);
            let hits = mesh_overlap(&gripper.body_bvh_at(&p.pose), target_mesh).is_some();
            if hits || in_closing_region(gripper, &p.pose, object_cloud, params.far_threshold) == 0 {
                out.push(p);
            }
        }
    }
    out
}

/// `n` collision-free poses drawn uniformly in the workspace above the
/// table: the table extent grown by 10 cm and up to 40 cm high.
pub fn free_space_grasps(scene: &Scene, gripper: &GripperModel, n: usize, seed_value: u64) -> Result<Vec<Grasp>> {
    let budget = 50 * n + 1000;
    let mut rng = seed::rng(seed::derive(seed_value, seed::streams::FREE_SPACE, 0));
    let [hx, hy] = scene.table_half_extent();
    let (hx, hy) = (hx + 0.1, hy + 0.1);
    let z0 = scene.table_height();
    let mut out = Vec::with_capacity(n);
    let mut tried = 0;
    while out.len() < n {
        if tried == budget {
            return Err(Error::WorkspaceSaturated {
                requested: n,
                accepted: out.len(),
                budget,
            });
        }
        tried += 1;
        let t = Vector3::new(
            rng.random_range(-hx..=hx),
            rng.random_range(-hy..=hy),
            z0 + rng.random_range(0.0..=0.4),
        );
        let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let rot = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]));
        let pose = Pose::new(rot, t);
        if !collides(gripper, &pose, scene, None) {
            out.push(Grasp::new(pose, GraspSource::FreeSpace));
        }
    }
    Ok(out)
}
