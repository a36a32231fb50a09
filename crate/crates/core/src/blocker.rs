//! Blocking-object ranking and removal planning.
//!
//! The blocking benefit of instance `j` is the mean drop in collision score
//! over the target's grasps when `j` is hallucinated away:
//! `alpha_j = mean_g [collider(g, X) - collider(g, X_hat_j)]`, where `X_hat_j`
//! projects the points of `j` onto the table plane.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Pose, Vector3, TABLE_INSTANCE};
use crate::pipeline::GraspPipeline;
use crate::scene::Scene;
use crate::scoring::{Observation, RankedGrasp, Scorer};
use crate::seed;

/// Relabels the points of `j` as table and drops them onto the table plane.
/// Normals of moved points become `+z`; every other point is unchanged.
pub fn hallucinate_removal(cloud: &PointCloud, j: u32, table_height: f64) -> Result<PointCloud> {
    if j == TABLE_INSTANCE {
        return Err(Error::invalid("the table cannot be removed"));
    }
    let ids = cloud.instance_ids();
    let points = cloud
        .points()
        .iter()
        .zip(ids)
        .map(|(p, &id)| if id == j { crate::geometry::Point3::new(p.x, p.y, table_height) } else { *p })
        .collect();
    let normals = cloud.normals().map(|ns| {
        ns.iter()
            .zip(ids)
            .map(|(n, &id)| if id == j { Vector3::z() } else { *n })
            .collect()
    });
    let new_ids = ids.iter().map(|&id| if id == j { TABLE_INSTANCE } else { id }).collect();
    Ok(PointCloud::from_parts(points, new_ids, cloud.source_flags().to_vec(), normals)?.with_viewpoint(cloud.viewpoint()))
}

/// Blocking benefit of removing `j` for the given target grasps.
///
/// Ground-truth colliders see `scene` before and `scene` without `j` after.
#[allow(clippy::too_many_arguments)]
pub fn blocking_score(
    j: u32,
    grasps: &[Pose],
    cloud: &PointCloud,
    target: u32,
    collider: &dyn Scorer,
    table_height: f64,
    scene: Option<&Scene>,
) -> Result<f64> {
    if grasps.is_empty() {
        return Err(Error::Empty("grasp set"));
    }
    let removed = hallucinate_removal(cloud, j, table_height)?;
    let scene_removed = scene.map(|s| s.without(j));
    let object = cloud.instance_subset(target);
    let object_removed = removed.instance_subset(target);
    let before = collider.bind(&Observation {
        scene_cloud: cloud,
        object_cloud: &object,
        target,
        scene,
    })?;
    let after = collider.bind(&Observation {
        scene_cloud: &removed,
        object_cloud: &object_removed,
        target,
        scene: scene_removed.as_ref(),
    })?;
    let total: f64 = grasps.iter().map(|g| before.score(g) - after.score(g)).sum();
    Ok(total / grasps.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockerEntry {
    pub instance_id: u32,
    #[serde(serialize_with = "canonical::f64")]
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockerRanking {
    pub target: u32,
    /// Descending by alpha, ties to the lower instance id.
    pub entries: Vec<BlockerEntry>,
    pub grasps: Vec<Pose>,
}

impl BlockerRanking {
    pub fn top(&self) -> Option<&BlockerEntry> {
        self.entries.first()
    }
}

/// Blocking scores of every non-table, non-target instance in `cloud`.
pub fn rank_blockers(
    grasps: &[Pose],
    cloud: &PointCloud,
    target: u32,
    collider: &dyn Scorer,
    table_height: f64,
    scene: Option<&Scene>,
) -> Result<BlockerRanking> {
    let candidates: Vec<u32> = cloud
        .instances()
        .into_iter()
        .filter(|&id| id != TABLE_INSTANCE && id != target)
        .collect();
    let mut entries = candidates
        .par_iter()
        .map(|&j| {
            Ok(BlockerEntry {
                instance_id: j,
                alpha: blocking_score(j, grasps, cloud, target, collider, table_height, scene)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| b.alpha.total_cmp(&a.alpha).then(a.instance_id.cmp(&b.instance_id)));
    Ok(BlockerRanking {
        target,
        entries,
        grasps: grasps.to_vec(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub instance_id: u32,
    #[serde(serialize_with = "canonical::f64")]
    pub alpha: f64,
    /// Best grasp found for the blocker, if any passed the cascade.
    pub grasp: Option<RankedGrasp>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovalPlan {
    pub target: u32,
    pub removals: Vec<Removal>,
    pub rankings: Vec<BlockerRanking>,
    pub final_grasp: RankedGrasp,
}

impl RemovalPlan {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }
}

/// Target grasps whose evaluator score passes the threshold, or all
/// candidates when none does.
fn blocking_grasp_set(plan: &crate::pipeline::GraspPlan, threshold: f64) -> Vec<Pose> {
    let good: Vec<Pose> = plan
        .candidates
        .iter()
        .filter(|c| c.evaluator >= threshold)
        .map(|c| c.grasp.pose)
        .collect();
    if good.is_empty() {
        plan.candidates.iter().map(|c| c.grasp.pose).collect()
    } else {
        good
    }
}

/// Removes the strongest blocker, one at a time, until the target has a
/// grasp that passes the cascade or `max_removals` is exhausted.
///
/// `scene` is only needed by ground-truth colliders; it loses each removed
/// object along with the cloud.
pub fn plan_removal(
    cloud: &PointCloud,
    target: u32,
    pipeline: &GraspPipeline,
    max_removals: usize,
    table_height: f64,
    scene: Option<&Scene>,
    seed_value: u64,
) -> Result<RemovalPlan> {
    if !cloud.has_instance(target) {
        return Err(Error::TargetNotFound(target));
    }
    let mut cloud = cloud.clone();
    let mut scene = scene.cloned();
    let mut removals = Vec::new();
    let mut rankings = Vec::new();
    for k in 0..=max_removals {
        let s = seed::derive(seed_value, seed::streams::BLOCKER, k as u64);
        let plan = pipeline.plan(&cloud, target, scene.as_ref(), s)?;
        if let Some(best) = plan.best() {
            return Ok(RemovalPlan {
                target,
                removals,
                rankings,
                final_grasp: *best,
            });
        }
        if k == max_removals {
            break;
        }
        let grasps = blocking_grasp_set(&plan, pipeline.cascade.evaluator_threshold);
        if grasps.is_empty() {
            break;
        }
        let ranking = rank_blockers(&grasps, &cloud, target, pipeline.collider.as_ref(), table_height, scene.as_ref())?;
        let Some(&top) = ranking.top() else {
            break;
        };
        rankings.push(ranking);
        let blocker_seed = seed::derive(seed_value, seed::streams::BLOCKER, (max_removals + 1 + k) as u64);
        let blocker_plan = pipeline.plan(&cloud, top.instance_id, scene.as_ref(), blocker_seed)?;
        removals.push(Removal {
            instance_id: top.instance_id,
            alpha: top.alpha,
            grasp: blocker_plan.best().copied(),
        });
        cloud = hallucinate_removal(&cloud, top.instance_id, table_height)?;
        scene = scene.map(|sc| sc.without(top.instance_id));
    }
    Err(Error::StillBlocked {
        target,
        removals: removals.len(),
    })
}
