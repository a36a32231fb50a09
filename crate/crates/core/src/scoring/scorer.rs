use crate::collision::{collides, soft_collision_score, voxel_collision, voxelize_scene, SoftCollisionParams, VoxelGrid};
use crate::error::{Error, Result};
use crate::geometry::{GripperModel, PointCloud, Pose};
use crate::scene::Scene;

use super::antipodal::antipodal_score;

/// Everything a scorer may condition on for one target.
#[derive(Clone, Copy)]
pub struct Observation<'a> {
    /// Scene crop `X`.
    pub scene_cloud: &'a PointCloud,
    /// Target crop `X_o`.
    pub object_cloud: &'a PointCloud,
    pub target: u32,
    /// Full scene state, available only to ground-truth scorers.
    pub scene: Option<&'a Scene>,
}

/// A scorer with its conditioning fixed: maps a pose to `[0, 1]`.
pub trait BoundScorer: Send + Sync {
    fn score(&self, g: &Pose) -> f64;
}

impl<F: Fn(&Pose) -> f64 + Send + Sync> BoundScorer for F {
    fn score(&self, g: &Pose) -> f64 {
        self(g)
    }
}

/// Evaluation interface shared by grasp evaluators and collision scorers.
pub trait Scorer: Send + Sync {
    fn name(&self) -> &str;
    fn bind<'a>(&'a self, obs: &Observation<'a>) -> Result<Box<dyn BoundScorer + 'a>>;

    fn score(&self, g: &Pose, obs: &Observation<'_>) -> Result<f64> {
        Ok(self.bind(obs)?.score(g))
    }
}

/// Object-centric antipodal quality on `X_o`.
pub struct AntipodalScorer {
    pub gripper: GripperModel,
    pub friction_mu: f64,
}

impl Scorer for AntipodalScorer {
    fn name(&self) -> &str {
        "antipodal"
    }

    fn bind<'a>(&'a self, obs: &Observation<'a>) -> Result<Box<dyn BoundScorer + 'a>> {
        let cloud = obs.object_cloud;
        if cloud.normals().is_none() {
            return Err(Error::MissingNormals);
        }
        Ok(Box::new(move |g: &Pose| {
            antipodal_score(g, cloud, &self.gripper, self.friction_mu).expect("normals checked at bind")
        }))
    }
}

/// Single-stage stand-in: the antipodal quality evaluated on the whole
/// scene crop without instance labels, so neighbors count as contacts and
/// only points inside the gripper body register as collisions.
pub struct SingleStageScorer {
    pub gripper: GripperModel,
    pub friction_mu: f64,
}

impl Scorer for SingleStageScorer {
    fn name(&self) -> &str {
        "single_stage"
    }

    fn bind<'a>(&'a self, obs: &Observation<'a>) -> Result<Box<dyn BoundScorer + 'a>> {
        let cloud = obs.scene_cloud;
        if cloud.normals().is_none() {
            return Err(Error::MissingNormals);
        }
        Ok(Box::new(move |g: &Pose| {
            antipodal_score(g, cloud, &self.gripper, self.friction_mu).expect("normals checked at bind")
        }))
    }
}

/// Collision scorer that never predicts a collision.
pub struct NoCollider;

impl Scorer for NoCollider {
    fn name(&self) -> &str {
        "none"
    }

    fn bind<'a>(&'a self, _obs: &Observation<'a>) -> Result<Box<dyn BoundScorer + 'a>> {
        Ok(Box::new(|_: &Pose| 0.0))
    }
}

pub struct SoftCollisionScorer {
    pub gripper: GripperModel,
    pub params: SoftCollisionParams,
}

impl Scorer for SoftCollisionScorer {
    fn name(&self) -> &str {
        "soft_collision"
    }

    fn bind<'a>(&'a self, obs: &Observation<'a>) -> Result<Box<dyn BoundScorer + 'a>> {
        let (cloud, target) = (obs.scene_cloud, obs.target);
        Ok(Box::new(move |g: &Pose| soft_collision_score(&self.gripper, g, cloud, target, &self.params)))
    }
}

/// Binary voxel-occupancy collider; with `exclude_target` the target's own
/// points are not voxelized.
pub struct VoxelScorer {
    pub gripper: GripperModel,
    pub points_per_object: usize,
    pub voxel_size: f64,
    pub exclude_target: bool,
}

impl VoxelScorer {
    pub fn grid(&self, obs: &Observation<'_>) -> Result<VoxelGrid> {
        voxelize_scene(obs.scene_cloud, self.points_per_object, self.voxel_size, self.exclude_target, obs.target)
    }
}

impl Scorer for VoxelScorer {
    fn name(&self) -> &str {
        if self.exclude_target {
            "voxel_no_target_binary"
        } else {
            "voxel_binary"
        }
    }

    fn bind<'a>(&'a self, obs: &Observation<'a>) -> Result<Box<dyn BoundScorer + 'a>> {
        let grid = self.grid(obs)?;
        Ok(Box::new(move |g: &Pose| {
            if voxel_collision(&self.gripper, g, &grid) {
                1.0
            } else {
                0.0
            }
        }))
    }
}

/// Ground-truth collider over the full scene state.
pub struct ExactScorer {
    pub gripper: GripperModel,
}

impl Scorer for ExactScorer {
    fn name(&self) -> &str {
        "exact_binary"
    }

    fn bind<'a>(&'a self, obs: &Observation<'a>) -> Result<Box<dyn BoundScorer + 'a>> {
        let scene = obs
            .scene
            .ok_or_else(|| Error::invalid("exact collider needs the full scene state"))?;
        Ok(Box::new(move |g: &Pose| if collides(&self.gripper, g, scene, None) { 1.0 } else { 0.0 }))
    }
}

/// Parameters shared by the named scorers.
#[derive(Clone, Debug)]
pub struct ScorerParams {
    pub gripper: GripperModel,
    pub friction_mu: f64,
    pub soft: SoftCollisionParams,
    pub voxel_size: f64,
    pub points_per_object: usize,
}

impl Default for ScorerParams {
    fn default() -> Self {
        ScorerParams {
            gripper: GripperModel::default(),
            friction_mu: 0.5,
            soft: SoftCollisionParams::default(),
            voxel_size: crate::collision::DEFAULT_VOXEL_SIZE,
            points_per_object: crate::collision::DEFAULT_POINTS_PER_OBJECT,
        }
    }
}

pub const SCORER_NAMES: [&str; 7] = [
    "antipodal",
    "single_stage",
    "none",
    "soft_collision",
    "voxel_binary",
    "voxel_no_target_binary",
    "exact_binary",
];

/// Looks up a scorer by its registered name.
pub fn scorer_by_name(name: &str, p: &ScorerParams) -> Result<Box<dyn Scorer>> {
    let g = p.gripper.clone();
    let voxel = |exclude_target| VoxelScorer {
        gripper: p.gripper.clone(),
        points_per_object: p.points_per_object,
        voxel_size: p.voxel_size,
        exclude_target,
    };
    Ok(match name {
        "antipodal" => Box::new(AntipodalScorer {
            gripper: g,
            friction_mu: p.friction_mu,
        }),
        "single_stage" => Box::new(SingleStageScorer {
            gripper: g,
            friction_mu: p.friction_mu,
        }),
        "none" => Box::new(NoCollider),
        "soft_collision" => Box::new(SoftCollisionScorer {
            gripper: g,
            params: p.soft,
        }),
        "voxel_binary" => Box::new(voxel(false)),
        "voxel_no_target_binary" => Box::new(voxel(true)),
        "exact_binary" => Box::new(ExactScorer { gripper: g }),
        other => return Err(Error::UnknownScorer(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_round_trip() {
        let p = ScorerParams::default();
        for n in SCORER_NAMES {
            assert_eq!(scorer_by_name(n, &p).unwrap().name(), n);
        }
        assert!(matches!(scorer_by_name("bogus", &p), Err(Error::UnknownScorer(s)) if s == "bogus"));
    }

    #[test]
    fn exact_requires_scene() {
        let c = PointCloud::empty();
        let obs = Observation {
            scene_cloud: &c,
            object_cloud: &c,
            target: 1,
            scene: None,
        };
        let s = scorer_by_name("exact_binary", &ScorerParams::default()).unwrap();
        assert!(s.bind(&obs).is_err());
        let none = scorer_by_name("none", &ScorerParams::default()).unwrap();
        assert_eq!(none.score(&Pose::identity(), &obs).unwrap(), 0.0);
    }
}
