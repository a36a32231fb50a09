use serde::{Deserialize, Serialize};

use crate::collision::collides;
use crate::error::Result;
use crate::geometry::{GripperModel, Pose};
use crate::scene::Scene;
use crate::scoring::antipodal_score;

/// Ground truth success: the gripper is collision-free against the full
/// scene and the antipodal quality on the target's complete surface sample
/// exceeds 0.5.
pub fn success_oracle(g: &Pose, scene: &Scene, target: u32, gripper: &GripperModel, friction_mu: f64) -> Result<bool> {
    let object = scene.require(target)?;
    if collides(gripper, g, scene, None) {
        return Ok(false);
    }
    Ok(antipodal_score(g, object.surface_cloud(), gripper, friction_mu)? > 0.5)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessRate {
    pub rate: f64,
    pub successes: usize,
    pub attempts: usize,
    /// Set when there were no grasps; the rate is then reported as 1.0.
    pub empty: bool,
}

impl SuccessRate {
    pub fn from_outcomes(outcomes: &[bool]) -> SuccessRate {
        let successes = outcomes.iter().filter(|&&s| s).count();
        let attempts = outcomes.len();
        SuccessRate {
            rate: if attempts == 0 { 1.0 } else { successes as f64 / attempts as f64 },
            successes,
            attempts,
            empty: attempts == 0,
        }
    }
}

/// Fraction of `grasps` for which the oracle succeeds.
pub fn success_rate(
    grasps: &[Pose],
    scene: &Scene,
    target: u32,
    gripper: &GripperModel,
    friction_mu: f64,
) -> Result<SuccessRate> {
    let outcomes = success_outcomes(grasps, scene, target, gripper, friction_mu)?;
    Ok(SuccessRate::from_outcomes(&outcomes))
}

/// Per-grasp oracle outcomes, evaluated in parallel.
pub fn success_outcomes(
    grasps: &[Pose],
    scene: &Scene,
    target: u32,
    gripper: &GripperModel,
    friction_mu: f64,
) -> Result<Vec<bool>> {
    use rayon::prelude::*;
    scene.require(target)?;
    grasps
        .par_iter()
        .map(|g| success_oracle(g, scene, target, gripper, friction_mu))
        .collect()
}
