use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::grasp::{generate_reference_set, ExternalSampler, Grasp, GraspQuality, ReferenceParams};
use crate::pipeline::GraspPipeline;
use crate::scene::{generate_scene, procedural_library, ObjectAsset, Scene, SceneSpec};
use crate::scoring::{filter_and_rank, scorer_by_name};
use crate::seed;

use super::metrics::{curve_sweep, SuccessCoverageCurve};
use super::oracle::success_outcomes;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SamplerKind {
    SurfaceNormal,
    External,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Collider {
    None,
    Voxel,
    VoxelNoTarget,
    Soft,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Labeling {
    Cascaded,
    SingleStage,
}

/// One benchmark configuration, written `sampler:collider:labeling`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variant {
    pub sampler: SamplerKind,
    pub collider: Collider,
    pub labeling: Labeling,
}

impl Variant {
    pub fn evaluator_name(&self) -> &'static str {
        match self.labeling {
            Labeling::Cascaded => "antipodal",
            Labeling::SingleStage => "single_stage",
        }
    }

    pub fn collider_name(&self) -> &'static str {
        match self.collider {
            Collider::None => "none",
            Collider::Voxel => "voxel_binary",
            Collider::VoxelNoTarget => "voxel_no_target_binary",
            Collider::Soft => "soft_collision",
            Collider::Exact => "exact_binary",
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        let unknown = || Error::UnknownVariant(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let [sampler, collider, labeling] = parts[..] else {
            return Err(unknown());
        };
        Ok(Variant {
            sampler: match sampler {
                "surface_normal" => SamplerKind::SurfaceNormal,
                "external" => SamplerKind::External,
                _ => return Err(unknown()),
            },
            collider: match collider {
                "none" => Collider::None,
                "voxel" => Collider::Voxel,
                "voxel_no_target" => Collider::VoxelNoTarget,
                "soft" => Collider::Soft,
                "exact" => Collider::Exact,
                _ => return Err(unknown()),
            },
            labeling: match labeling {
                "cascaded" => Labeling::Cascaded,
                "single_stage" => Labeling::SingleStage,
                _ => return Err(unknown()),
            },
        })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sampler = match self.sampler {
            SamplerKind::SurfaceNormal => "surface_normal",
            SamplerKind::External => "external",
        };
        let collider = match self.collider {
            Collider::None => "none",
            Collider::Voxel => "voxel",
            Collider::VoxelNoTarget => "voxel_no_target",
            Collider::Soft => "soft",
            Collider::Exact => "exact",
        };
        let labeling = match self.labeling {
            Labeling::Cascaded => "cascaded",
            Labeling::SingleStage => "single_stage",
        };
        write!(f, "{sampler}:{collider}:{labeling}")
    }
}

/// Result of one variant on one scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantResult {
    pub variant: String,
    /// Indices into the generated grasp list that passed both thresholds.
    pub accepted: Vec<usize>,
    pub successes: usize,
    #[serde(serialize_with = "canonical::f64")]
    pub success_rate: f64,
    #[serde(serialize_with = "canonical::f64")]
    pub coverage: f64,
    #[serde(serialize_with = "canonical::f64")]
    pub auc: f64,
    pub curve: SuccessCoverageCurve,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub scene: usize,
    pub seed: u64,
    pub objects: usize,
    pub target: u32,
    pub reference_positives: usize,
    pub generated: usize,
    pub results: Vec<VariantResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: String,
    pub scenes: usize,
    #[serde(serialize_with = "canonical::f64")]
    pub mean_auc: f64,
    #[serde(serialize_with = "canonical::f64")]
    pub mean_success_rate: f64,
    #[serde(serialize_with = "canonical::f64")]
    pub mean_coverage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub seed: u64,
    pub variants: Vec<String>,
    pub scenes_requested: usize,
    /// Scenes without a visible target that has a reachable reference grasp.
    pub skipped: Vec<usize>,
    pub scenes: Vec<SceneRecord>,
    pub summaries: Vec<VariantSummary>,
}

impl BenchmarkReport {
    /// Per-scene AUC of `variant`, in scene order.
    pub fn auc_series(&self, variant: &str) -> Option<Vec<f64>> {
        let k = self.variants.iter().position(|v| v == variant)?;
        Some(self.scenes.iter().map(|s| s.results[k].auc).collect())
    }

    pub fn result(&self, scene: usize, variant: &str) -> Option<&VariantResult> {
        let k = self.variants.iter().position(|v| v == variant)?;
        self.scenes.iter().find(|s| s.scene == scene).map(|s| &s.results[k])
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per operating point of every variant and scene.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,scene,target,threshold,coverage,success_rate,count\n");
        for s in &self.scenes {
            for r in &s.results {
                for o in &r.curve.operating_points {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        r.variant,
                        s.scene,
                        s.target,
                        canonical::round_sig(o.threshold),
                        canonical::round_sig(o.coverage),
                        canonical::round_sig(o.success_rate),
                        o.count
                    ));
                }
            }
        }
        out
    }
}

/// Held-out asset library used by the benchmark.
pub fn heldout_library(config: &RunConfig) -> Vec<Arc<ObjectAsset>> {
    procedural_library(config.scene.library_size, config.bench.library_seed, "heldout")
        .into_iter()
        .map(Arc::new)
        .collect()
}

fn bench_scene(library: &[Arc<ObjectAsset>], config: &RunConfig, seed_value: u64) -> Result<Scene> {
    let spec = SceneSpec {
        table_height: config.scene.table_height,
        table_half_extent: config.bench.table_half_extent,
        camera: config.scene.camera.clone(),
        objects: config.bench.objects,
        max_attempts: config.scene.max_attempts,
    };
    generate_scene(library, &spec, seed_value)
}

/// Evaluates every variant on one scene. Returns `None` when no visible
/// object has a collision-free reference positive.
pub fn benchmark_scene(
    scene: &Scene,
    index: usize,
    seed_value: u64,
    config: &RunConfig,
    variants: &[Variant],
    external: Option<&[Pose]>,
) -> Result<Option<SceneRecord>> {
    let pipeline = GraspPipeline::from_config(config)?;
    let gripper = pipeline.gripper().clone();
    let mu = config.scoring.friction_mu;
    let cloud = pipeline.observe(scene, seed_value)?;

    let mut candidates: Vec<u32> = scene
        .objects()
        .iter()
        .map(|o| o.instance_id())
        .filter(|&id| cloud.count_instance(id) >= config.bench.min_target_points)
        .collect();
    candidates.shuffle(&mut seed::rng(seed::derive(seed_value, seed::streams::TARGET, 0)));
    let reference_params = ReferenceParams {
        standoff: config.scoring.standoff,
        friction_mu: mu,
    };
    let mut chosen = None;
    for id in candidates {
        let set = generate_reference_set(
            scene,
            id,
            &gripper,
            config.bench.reference_candidates,
            &reference_params,
            seed_value,
        )?;
        let positives: Vec<Pose> = set
            .iter()
            .filter(|l| l.label.quality == GraspQuality::Positive && !l.label.collision)
            .map(|l| l.grasp.pose)
            .collect();
        if !positives.is_empty() {
            chosen = Some((id, positives));
            break;
        }
    }
    let Some((target, reference)) = chosen else {
        return Ok(None);
    };

    let crop = pipeline.crop(&cloud, target, seed_value)?;
    let params = &pipeline.params;
    let refiner = scorer_by_name("antipodal", params)?;
    let mut proposals: Vec<(SamplerKind, Vec<Grasp>)> = Vec::new();
    for kind in [SamplerKind::SurfaceNormal, SamplerKind::External] {
        if !variants.iter().any(|v| v.sampler == kind) {
            continue;
        }
        let grasps = match kind {
            SamplerKind::SurfaceNormal => pipeline.propose_with(refiner.as_ref(), &crop, target, Some(scene), seed_value)?,
            SamplerKind::External => {
                let poses = external.ok_or_else(|| Error::invalid("external sampler needs a grasp list"))?;
                let p = GraspPipeline {
                    sampler: Arc::new(ExternalSampler { poses: poses.to_vec() }),
                    ..GraspPipeline::from_config(config)?
                };
                p.propose_with(refiner.as_ref(), &crop, target, Some(scene), seed_value)?
            }
        };
        proposals.push((kind, grasps));
    }

    let mut generated = 0;
    let mut results = Vec::with_capacity(variants.len());
    for v in variants {
        let grasps = &proposals.iter().find(|(k, _)| *k == v.sampler).expect("proposed above").1;
        generated = generated.max(grasps.len());
        let poses: Vec<Pose> = grasps.iter().map(|g| g.pose).collect();
        let outcomes = success_outcomes(&poses, scene, target, &gripper, mu)?;
        let evaluator = scorer_by_name(v.evaluator_name(), params)?;
        let collider = scorer_by_name(v.collider_name(), params)?;
        let scored = pipeline.score_with(evaluator.as_ref(), collider.as_ref(), grasps, &crop, target, Some(scene))?;
        let ranked = filter_and_rank(&scored, &pipeline.cascade);
        let kept_scores: Vec<f64> = ranked.iter().map(|r| r.score).collect();
        let kept_poses: Vec<Pose> = ranked.iter().map(|r| r.grasp.pose).collect();
        let kept_outcomes: Vec<bool> = ranked.iter().map(|r| outcomes[r.index]).collect();
        let (curve, auc, coverage) = if ranked.is_empty() {
            (SuccessCoverageCurve::default(), 0.0, 0.0)
        } else {
            let c = curve_sweep(
                &kept_scores,
                &kept_poses,
                &kept_outcomes,
                &reference,
                config.bench.coverage_radius,
                &gripper,
            )?;
            let a = c.auc()?;
            let cov = c.operating_points.last().map_or(0.0, |o| o.coverage);
            (c, a, cov)
        };
        let mut accepted: Vec<usize> = ranked.iter().map(|r| r.index).collect();
        accepted.sort_unstable();
        let successes = kept_outcomes.iter().filter(|&&o| o).count();
        results.push(VariantResult {
            variant: v.to_string(),
            accepted,
            successes,
            success_rate: if ranked.is_empty() { 1.0 } else { successes as f64 / ranked.len() as f64 },
            coverage,
            auc,
            curve,
        });
    }
    Ok(Some(SceneRecord {
        scene: index,
        seed: seed_value,
        objects: scene.objects().len(),
        target,
        reference_positives: reference.len(),
        generated,
        results,
    }))
}

/// Runs every variant over `config.bench.scenes` generated scenes drawn from
/// the held-out library.
pub fn run_ablation(config: &RunConfig, variants: &[Variant], external: Option<&[Pose]>) -> Result<BenchmarkReport> {
    if variants.is_empty() {
        return Err(Error::Empty("variant list"));
    }
    let library = heldout_library(config);
    let records: Vec<(usize, Option<SceneRecord>)> = (0..config.bench.scenes)
        .into_par_iter()
        .map(|i| {
            let s = seed::derive(config.seed, seed::streams::SCENE, i as u64);
            let scene = bench_scene(&library, config, s)?;
            Ok((i, benchmark_scene(&scene, i, s, config, variants, external)?))
        })
        .collect::<Result<_>>()?;
    let mut skipped = Vec::new();
    let mut scenes = Vec::new();
    for (i, r) in records {
        match r {
            Some(r) => scenes.push(r),
            None => skipped.push(i),
        }
    }
    let names: Vec<String> = variants.iter().map(Variant::to_string).collect();
    let n = scenes.len();
    let mean = |f: &dyn Fn(&VariantResult) -> f64, k: usize| {
        if n == 0 {
            0.0
        } else {
            scenes.iter().map(|s| f(&s.results[k])).sum::<f64>() / n as f64
        }
    };
    let summaries = names
        .iter()
        .enumerate()
        .map(|(k, v)| VariantSummary {
            variant: v.clone(),
            scenes: n,
            mean_auc: mean(&|r| r.auc, k),
            mean_success_rate: mean(&|r| r.success_rate, k),
            mean_coverage: mean(&|r| r.coverage, k),
        })
        .collect();
    Ok(BenchmarkReport {
        seed: config.seed,
        variants: names,
        scenes_requested: config.bench.scenes,
        skipped,
        scenes,
        summaries,
    })
}
