//! Run configuration: every tunable with its default, loaded from TOML.
//!
//! Unknown keys are rejected at every level. Missing keys take defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::collision::{SoftCollisionParams, DEFAULT_POINTS_PER_OBJECT, DEFAULT_VOXEL_SIZE};
use crate::error::{Error, Result};
use crate::grasp::{HardNegativeParams, DEFAULT_STANDOFF};
use crate::scene::{CameraModel, DEFAULT_BOX_SIZE, DEFAULT_CENTER_NOISE, DEFAULT_CROP_POINTS};
use crate::scoring::{CascadeConfig, ScorerParams};

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "CLUTTERLAB_CONFIG";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub objects: usize,
    pub table_height: f64,
    pub table_half_extent: [f64; 2],
    pub max_attempts: usize,
    pub library_size: usize,
    pub library_seed: u64,
    pub camera: CameraModel,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            objects: 6,
            table_height: 0.0,
            table_half_extent: [0.15, 0.15],
            max_attempts: 100,
            library_size: 24,
            library_seed: 1,
            camera: CameraModel::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservationConfig {
    pub depth_sigma: f64,
    pub flip_prob: f64,
    pub merge_prob: f64,
    pub box_size: f64,
    pub center_noise: f64,
    pub crop_points: usize,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        ObservationConfig {
            depth_sigma: 0.0,
            flip_prob: 0.0,
            merge_prob: 0.0,
            box_size: DEFAULT_BOX_SIZE,
            center_noise: DEFAULT_CENTER_NOISE,
            crop_points: DEFAULT_CROP_POINTS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoringConfig {
    pub evaluator: String,
    pub collider: String,
    pub friction_mu: f64,
    pub jaw_width: f64,
    pub soft: SoftCollisionParams,
    pub voxel_size: f64,
    pub points_per_object: usize,
    pub standoff: (f64, f64),
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            evaluator: "antipodal".into(),
            collider: "soft_collision".into(),
            friction_mu: 0.5,
            jaw_width: 0.08,
            soft: SoftCollisionParams::default(),
            voxel_size: DEFAULT_VOXEL_SIZE,
            points_per_object: DEFAULT_POINTS_PER_OBJECT,
            standoff: DEFAULT_STANDOFF,
        }
    }
}

impl ScoringConfig {
    pub fn scorer_params(&self) -> ScorerParams {
        ScorerParams {
            gripper: crate::geometry::GripperModel::parallel_jaw(self.jaw_width),
            friction_mu: self.friction_mu,
            soft: self.soft,
            voxel_size: self.voxel_size,
            points_per_object: self.points_per_object,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub scenes: usize,
    pub objects: usize,
    pub table_half_extent: [f64; 2],
    pub reference_candidates: usize,
    pub coverage_radius: f64,
    pub min_target_points: usize,
    pub bootstrap_resamples: usize,
    pub variants: Vec<String>,
    /// Held-out asset library seed, distinct from the training library.
    pub library_seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            scenes: 100,
            objects: 15,
            table_half_extent: [0.15, 0.15],
            reference_candidates: 1000,
            coverage_radius: 0.02,
            min_target_points: 40,
            bootstrap_resamples: 2000,
            variants: vec![
                "surface_normal:soft:cascaded".into(),
                "surface_normal:none:single_stage".into(),
                "surface_normal:exact:cascaded".into(),
                "surface_normal:voxel:cascaded".into(),
                "surface_normal:voxel_no_target:cascaded".into(),
            ],
            library_seed: 1001,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub gripper_points: usize,
    pub reference_candidates: usize,
    pub free_space: usize,
    pub hard_negative: HardNegativeParams,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            gripper_points: 128,
            reference_candidates: 200,
            free_space: 50,
            hard_negative: HardNegativeParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlockerConfig {
    pub max_removals: usize,
}

impl Default for BlockerConfig {
    fn default() -> Self {
        BlockerConfig { max_removals: 3 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub scene: SceneConfig,
    pub observation: ObservationConfig,
    pub scoring: ScoringConfig,
    pub cascade: CascadeConfig,
    pub bench: BenchConfig,
    pub dataset: DatasetConfig,
    pub blocker: BlockerConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Explicit path first, then the path in [`CONFIG_ENV`], then defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<RunConfig> {
        let from_env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        match explicit.map(Path::to_path_buf).or(from_env) {
            Some(p) => Self::load(&p),
            None => Ok(RunConfig::default()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.cascade.validate()?;
        self.scene.camera.validate()?;
        let o = &self.observation;
        if !(0.0..=1.0).contains(&o.flip_prob) || !(0.0..=1.0).contains(&o.merge_prob) {
            return Err(Error::invalid("corruption probabilities must lie in [0, 1]"));
        }
        if o.crop_points == 0 || !(o.box_size > 0.0) {
            return Err(Error::invalid("crop needs positive size and point count"));
        }
        if !(self.scoring.jaw_width > 0.0) || !(self.scoring.voxel_size > 0.0) {
            return Err(Error::invalid("jaw width and voxel size must be positive"));
        }
        if !(self.bench.coverage_radius > 0.0) {
            return Err(Error::invalid("coverage radius must be positive"));
        }
        Ok(())
    }
}
