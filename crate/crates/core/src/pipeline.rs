//! End-to-end grasp synthesis for one target: observe, crop, sample,
//! refine, score, filter and rank.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;
use crate::geometry::{GripperModel, PointCloud, Pose};
use crate::grasp::{Grasp, Sampler, SurfaceNormalSampler};
use crate::scene::{corrupt_segmentation, crop_target, render_cloud_noisy, Crop, Scene};
use crate::scoring::{
    filter_and_rank, mh_refine, scorer_by_name, CascadeConfig, Observation, RankedGrasp, ScoredGrasp, Scorer,
    ScorerParams,
};
use crate::seed;

/// Result of planning for one target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspPlan {
    pub target: u32,
    pub evaluator: String,
    pub collider: String,
    /// Refined candidates with their scores, in sampling order.
    pub candidates: Vec<ScoredGrasp>,
    /// Candidates passing both thresholds, best first.
    pub ranked: Vec<RankedGrasp>,
}

impl GraspPlan {
    pub fn best(&self) -> Option<&RankedGrasp> {
        self.ranked.first()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }
}

pub struct GraspPipeline {
    pub cascade: CascadeConfig,
    pub params: ScorerParams,
    pub sampler: Arc<dyn Sampler>,
    pub evaluator: Arc<dyn Scorer>,
    pub collider: Arc<dyn Scorer>,
    pub depth_sigma: f64,
    pub flip_prob: f64,
    pub merge_prob: f64,
    pub box_size: f64,
    pub center_noise: f64,
    pub crop_points: usize,
}

impl GraspPipeline {
    /// Pipeline with the scorers named in the configuration.
    pub fn from_config(config: &RunConfig) -> Result<GraspPipeline> {
        config.validate()?;
        let params = config.scoring.scorer_params();
        let evaluator: Arc<dyn Scorer> = scorer_by_name(&config.scoring.evaluator, &params)?.into();
        let collider: Arc<dyn Scorer> = scorer_by_name(&config.scoring.collider, &params)?.into();
        let o = &config.observation;
        Ok(GraspPipeline {
            cascade: config.cascade.clone(),
            params,
            sampler: Arc::new(SurfaceNormalSampler {
                standoff: config.scoring.standoff,
            }),
            evaluator,
            collider,
            depth_sigma: o.depth_sigma,
            flip_prob: o.flip_prob,
            merge_prob: o.merge_prob,
            box_size: o.box_size,
            center_noise: o.center_noise,
            crop_points: o.crop_points,
        })
    }

    pub fn gripper(&self) -> &GripperModel {
        &self.params.gripper
    }

    /// Rendered, instance-labeled cloud with configured depth noise and
    /// segmentation corruption.
    pub fn observe(&self, scene: &Scene, seed_value: u64) -> Result<PointCloud> {
        let cloud = render_cloud_noisy(scene, scene.camera(), self.depth_sigma, seed_value)?;
        if self.flip_prob > 0.0 || self.merge_prob > 0.0 {
            corrupt_segmentation(&cloud, self.flip_prob, self.merge_prob, seed_value)
        } else {
            Ok(cloud)
        }
    }

    pub fn crop(&self, cloud: &PointCloud, target: u32, seed_value: u64) -> Result<Crop> {
        crop_target(cloud, target, self.box_size, self.center_noise, self.crop_points, seed_value)
    }

    fn observation<'a>(&self, crop: &'a Crop, target: u32, scene: Option<&'a Scene>) -> Observation<'a> {
        Observation {
            scene_cloud: &crop.scene,
            object_cloud: &crop.object,
            target,
            scene,
        }
    }

    /// Samples `n_samples` grasps on the target crop and moves each to the
    /// last state of its refinement chain under `refiner`.
    pub fn propose_with(
        &self,
        refiner: &dyn Scorer,
        crop: &Crop,
        target: u32,
        scene: Option<&Scene>,
        seed_value: u64,
    ) -> Result<Vec<Grasp>> {
        let initial = self.sampler.sample(&crop.object, self.cascade.n_samples, seed_value)?;
        if self.cascade.mh_iterations == 0 {
            return Ok(initial);
        }
        let bound = refiner.bind(&self.observation(crop, target, scene))?;
        let steps = self.cascade.steps();
        Ok(initial
            .par_iter()
            .enumerate()
            .map(|(i, g)| {
                let chain = mh_refine(
                    &g.pose,
                    bound.as_ref(),
                    self.cascade.mh_iterations,
                    &steps,
                    self.gripper(),
                    seed::derive(seed_value, seed::streams::REFINE, i as u64),
                );
                Grasp::new(*chain.last().expect("chain holds the start"), g.source)
            })
            .collect())
    }

    pub fn propose(&self, crop: &Crop, target: u32, scene: Option<&Scene>, seed_value: u64) -> Result<Vec<Grasp>> {
        self.propose_with(self.evaluator.as_ref(), crop, target, scene, seed_value)
    }

    /// Evaluator and collision scores for each grasp.
    pub fn score_with(
        &self,
        evaluator: &dyn Scorer,
        collider: &dyn Scorer,
        grasps: &[Grasp],
        crop: &Crop,
        target: u32,
        scene: Option<&Scene>,
    ) -> Result<Vec<ScoredGrasp>> {
        let obs = self.observation(crop, target, scene);
        let e = evaluator.bind(&obs)?;
        let c = collider.bind(&obs)?;
        Ok(grasps
            .par_iter()
            .map(|g| ScoredGrasp {
                grasp: *g,
                evaluator: e.score(&g.pose),
                collision: c.score(&g.pose),
            })
            .collect())
    }

    pub fn score(&self, grasps: &[Grasp], crop: &Crop, target: u32, scene: Option<&Scene>) -> Result<Vec<ScoredGrasp>> {
        self.score_with(self.evaluator.as_ref(), self.collider.as_ref(), grasps, crop, target, scene)
    }

    /// Full pipeline on an observed cloud. `scene` is only needed by
    /// ground-truth scorers.
    pub fn plan(&self, cloud: &PointCloud, target: u32, scene: Option<&Scene>, seed_value: u64) -> Result<GraspPlan> {
        let crop = self.crop(cloud, target, seed_value)?;
        let grasps = self.propose(&crop, target, scene, seed_value)?;
        let candidates = self.score(&grasps, &crop, target, scene)?;
        let ranked = filter_and_rank(&candidates, &self.cascade);
        Ok(GraspPlan {
            target,
            evaluator: self.evaluator.name().to_string(),
            collider: self.collider.name().to_string(),
            candidates,
            ranked,
        })
    }

    /// Renders the scene and plans for `target`.
    pub fn plan_scene(&self, scene: &Scene, target: u32, seed_value: u64) -> Result<GraspPlan> {
        scene.require(target)?;
        let cloud = self.observe(scene, seed_value)?;
        self.plan(&cloud, target, Some(scene), seed_value)
    }
}

/// Best ranked pose of a plan, if any.
pub fn best_pose(plan: &GraspPlan) -> Option<Pose> {
    plan.best().map(|r| r.grasp.pose)
}
