use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GripperModel, Pose, Vector3};
use crate::grasp::{Grasp, GraspLabel, GraspQuality, GraspSetKind};
use crate::seed;

use super::scorer::BoundScorer;

/// Which score orders the surviving grasps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankBy {
    #[default]
    Cascade,
    Evaluator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CascadeConfig {
    /// Minimum evaluator score kept.
    pub evaluator_threshold: f64,
    /// Minimum collision-free probability `1 - collision` kept.
    pub collision_threshold: f64,
    pub mh_iterations: usize,
    pub mh_translation_step: f64,
    pub mh_rotation_step: f64,
    pub n_samples: usize,
    pub rank_by: RankBy,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig {
            evaluator_threshold: 0.5,
            collision_threshold: 0.5,
            mh_iterations: 20,
            mh_translation_step: 0.01,
            mh_rotation_step: 5f64.to_radians(),
            n_samples: 200,
            rank_by: RankBy::Cascade,
        }
    }
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.evaluator_threshold) || !unit(self.collision_threshold) {
            return Err(Error::invalid("cascade thresholds must lie in [0, 1]"));
        }
        if !(self.mh_translation_step > 0.0 && self.mh_rotation_step > 0.0) {
            return Err(Error::invalid("refinement steps must be positive"));
        }
        Ok(())
    }

    pub fn steps(&self) -> MhSteps {
        MhSteps {
            translation: self.mh_translation_step,
            rotation: self.mh_rotation_step,
        }
    }
}

/// Evaluator success times collision-free probability.
pub fn cascade_score(evaluator: f64, collision: f64) -> f64 {
    evaluator * (1.0 - collision)
}

/// Half-widths of the uniform proposal box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MhSteps {
    /// Per-axis world translation (meters).
    pub translation: f64,
    /// Per-axis rotation vector component about the closing-region center (radians).
    pub rotation: f64,
}

/// Symmetric random-walk proposal.
pub fn propose(g: &Pose, gripper: &GripperModel, steps: &MhSteps, rng: &mut seed::Rng) -> Pose {
    let mut u = |s: f64| rng.random_range(-s..=s);
    let t = Vector3::new(u(steps.translation), u(steps.translation), u(steps.translation));
    let r = Vector3::new(u(steps.rotation), u(steps.rotation), u(steps.rotation));
    let c = gripper.closing_region().center().coords;
    let local = Pose::from_translation(c)
        .compose(&Pose::from_rotation(nalgebra::UnitQuaternion::from_scaled_axis(r)))
        .compose(&Pose::from_translation(-c));
    Pose::from_translation(t).compose(g).compose(&local)
}

/// Metropolis-Hastings chain of length `iterations + 1` starting at `g0`.
///
/// A proposal with score `s'` from current score `s` is accepted when
/// `u * s < s'` for `u ~ U[0, 1)`, i.e. with probability `min(1, s'/s)`.
/// From a zero-score state any positive proposal is accepted; zero to zero
/// is rejected.
pub fn mh_refine(
    g0: &Pose,
    scorer: &dyn BoundScorer,
    iterations: usize,
    steps: &MhSteps,
    gripper: &GripperModel,
    seed_value: u64,
) -> Vec<Pose> {
    let mut rng = seed::rng(seed::derive(seed_value, seed::streams::REFINE, 0));
    let mut chain = Vec::with_capacity(iterations + 1);
    let mut current = *g0;
    let mut s = scorer.score(&current);
    chain.push(current);
    for _ in 0..iterations {
        let proposal = propose(&current, gripper, steps, &mut rng);
        let u: f64 = rng.random();
        let s_new = scorer.score(&proposal);
        let accept = if s == 0.0 { s_new > 0.0 } else { u * s < s_new };
        if accept {
            current = proposal;
            s = s_new;
        }
        chain.push(current);
    }
    chain
}

/// A grasp with its evaluator and collision scores.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredGrasp {
    pub grasp: Grasp,
    pub evaluator: f64,
    pub collision: f64,
}

impl ScoredGrasp {
    pub fn cascade(&self) -> f64 {
        cascade_score(self.evaluator, self.collision)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedGrasp {
    /// Position in the input sequence.
    pub index: usize,
    pub grasp: Grasp,
    pub evaluator: f64,
    pub collision: f64,
    pub score: f64,
}

/// Keeps grasps with `evaluator >= evaluator_threshold` and
/// `1 - collision >= collision_threshold`, sorted by descending score with
/// ties to the lower input index.
pub fn filter_and_rank(grasps: &[ScoredGrasp], config: &CascadeConfig) -> Vec<RankedGrasp> {
    let mut out: Vec<RankedGrasp> = grasps
        .iter()
        .enumerate()
        .filter(|(_, s)| s.evaluator >= config.evaluator_threshold && 1.0 - s.collision >= config.collision_threshold)
        .map(|(index, s)| RankedGrasp {
            index,
            grasp: s.grasp,
            evaluator: s.evaluator,
            collision: s.collision,
            score: match config.rank_by {
                RankBy::Cascade => s.cascade(),
                RankBy::Evaluator => s.evaluator,
            },
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    out
}

/// Single-stage label: positive only for quality-positive, collision-free grasps.
pub fn single_stage_label(_g: &Grasp, quality: GraspQuality, collides: bool) -> GraspLabel {
    if quality == GraspQuality::Positive && !collides {
        GraspLabel {
            quality: GraspQuality::Positive,
            collision: false,
            set: GraspSetKind::Positive,
        }
    } else {
        GraspLabel {
            quality: GraspQuality::Negative,
            collision: collides,
            set: GraspSetKind::Negative,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::grasp_distance;
    use crate::grasp::GraspSource;
    use proptest::prelude::*;

    fn sg(e: f64, c: f64) -> ScoredGrasp {
        ScoredGrasp {
            grasp: Grasp::new(Pose::identity(), GraspSource::SurfaceNormal),
            evaluator: e,
            collision: c,
        }
    }

    #[test]
    fn cascade_arithmetic() {
        assert_eq!(cascade_score(0.7, 1.0), 0.0);
        assert_eq!(cascade_score(1.0, 0.0), 1.0);
        assert!((cascade_score(0.8, 0.25) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn cascade_monotone_on_grid() {
        let v: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        for &e in &v {
            for w in v.windows(2) {
                assert!(cascade_score(e, w[1]) <= cascade_score(e, w[0]));
                assert!(cascade_score(w[1], e) >= cascade_score(w[0], e));
            }
        }
    }

    #[test]
    fn rank_examples() {
        let c = CascadeConfig::default();
        assert!(filter_and_rank(&[sg(0.1, 0.0), sg(0.9, 0.9)], &c).is_empty());
        assert_eq!(filter_and_rank(&[sg(0.1, 0.0), sg(0.9, 0.1)], &c).len(), 1);
        let r = filter_and_rank(&[sg(0.9, 0.0), sg(0.7, 0.0), sg(0.95, 0.0)], &c);
        assert_eq!(r.iter().map(|x| x.index).collect::<Vec<_>>(), vec![2, 0, 1]);
        let ties = filter_and_rank(&[sg(0.8, 0.0), sg(0.8, 0.0)], &c);
        assert_eq!(ties.iter().map(|x| x.index).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn single_stage_truth_table() {
        let g = Grasp::new(Pose::identity(), GraspSource::SurfaceNormal);
        assert_eq!(single_stage_label(&g, GraspQuality::Positive, false).quality, GraspQuality::Positive);
        assert_eq!(single_stage_label(&g, GraspQuality::Positive, true).quality, GraspQuality::Negative);
        assert_eq!(single_stage_label(&g, GraspQuality::Negative, false).quality, GraspQuality::Negative);
    }

    #[test]
    fn chain_basics() {
        let gr = GripperModel::default();
        let steps = CascadeConfig::default().steps();
        let constant = |_: &Pose| 0.3;
        assert_eq!(mh_refine(&Pose::identity(), &constant, 0, &steps, &gr, 1), vec![Pose::identity()]);
        let chain = mh_refine(&Pose::identity(), &constant, 20, &steps, &gr, 1);
        assert_eq!(chain.len(), 21);
        // every proposal accepted under a constant score
        assert!(chain.windows(2).all(|w| w[0] != w[1]));
        let zero = |_: &Pose| 0.0;
        let stuck = mh_refine(&Pose::identity(), &zero, 5, &steps, &gr, 1);
        assert!(stuck.iter().all(|p| *p == Pose::identity()));
    }

    #[test]
    fn scale_invariant_chains() {
        let gr = GripperModel::default();
        let steps = CascadeConfig::default().steps();
        let opt = Pose::from_translation(Vector3::new(0.05, 0.0, 0.0));
        let f = |g: &Pose| (-(grasp_distance(g, &opt, &gr) / 0.05).powi(2)).exp();
        let f3 = |g: &Pose| 3.0 * f(g);
        for s in 0..20 {
            assert_eq!(
                mh_refine(&Pose::identity(), &f, 20, &steps, &gr, s),
                mh_refine(&Pose::identity(), &f3, 20, &steps, &gr, s)
            );
        }
    }

    proptest! {
        #[test]
        fn ranking_is_filtered_permutation(scores in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..40)) {
            let c = CascadeConfig::default();
            let input: Vec<_> = scores.iter().map(|&(e, k)| sg(e, k)).collect();
            let r = filter_and_rank(&input, &c);
            let expected = input.iter().filter(|s| s.evaluator >= 0.5 && 1.0 - s.collision >= 0.5).count();
            prop_assert_eq!(r.len(), expected);
            prop_assert!(r.windows(2).all(|w| w[0].score >= w[1].score));
        }
    }
}
