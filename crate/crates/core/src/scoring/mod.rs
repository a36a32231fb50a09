//! Grasp evaluation, cascade scoring, Metropolis-Hastings refinement and ranking.

mod antipodal;
mod cascade;
mod scorer;

pub use antipodal::{antipodal_score, BODY_MARGIN, CONTACT_BAND, HIDDEN_CLEARANCE, HIDDEN_CREDIT, OCCLUSION_RADIUS, PALM_CLEARANCE};
pub use cascade::{
    cascade_score, filter_and_rank, mh_refine, propose, single_stage_label, CascadeConfig, MhSteps, RankBy, RankedGrasp,
    ScoredGrasp,
};
pub use scorer::{
    scorer_by_name, AntipodalScorer, BoundScorer, ExactScorer, NoCollider, Observation, Scorer, ScorerParams,
    SingleStageScorer, SoftCollisionScorer, VoxelScorer, SCORER_NAMES,
};
