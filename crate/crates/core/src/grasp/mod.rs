//! Grasp candidates, samplers and labeled grasp sets.

mod sampler;
mod sets;

use serde::{Deserialize, Serialize};

use crate::geometry::Pose;

pub use sampler::{perturb, pose_from_approach, surface_normal_sampler, ExternalSampler, Sampler, SurfaceNormalSampler, DEFAULT_STANDOFF};
pub use sets::{
    free_space_grasps, generate_reference_set, hard_negatives, in_closing_region, HardNegativeParams, LabeledGrasp,
    ReferenceParams,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspSource {
    SurfaceNormal,
    External,
    Perturbed,
    FreeSpace,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grasp {
    pub pose: Pose,
    pub source: GraspSource,
}

impl Grasp {
    pub fn new(pose: Pose, source: GraspSource) -> Grasp {
        Grasp { pose, source }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspQuality {
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspSetKind {
    Positive,
    Negative,
    HardNegative,
    Free,
}

impl GraspSetKind {
    pub const ALL: [GraspSetKind; 4] = [
        GraspSetKind::Positive,
        GraspSetKind::Negative,
        GraspSetKind::HardNegative,
        GraspSetKind::Free,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraspLabel {
    pub quality: GraspQuality,
    pub collision: bool,
    pub set: GraspSetKind,
}

impl GraspLabel {
    /// Checks the set/quality/collision consistency rules.
    pub fn new(quality: GraspQuality, collision: bool, set: GraspSetKind) -> crate::Result<GraspLabel> {
        let ok = match set {
            GraspSetKind::HardNegative => quality == GraspQuality::Negative,
            GraspSetKind::Free => !collision,
            GraspSetKind::Positive => quality == GraspQuality::Positive,
            GraspSetKind::Negative => quality == GraspQuality::Negative,
        };
        if ok {
            Ok(GraspLabel { quality, collision, set })
        } else {
            Err(crate::Error::invalid(format!("inconsistent label for set {set:?}")))
        }
    }
}
