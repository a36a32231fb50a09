use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{Error, Result};
use crate::geometry::{GripperModel, Point3, Pose};
use crate::seed;

/// Default coverage radius on the control-point distance (meters).
pub const DEFAULT_COVERAGE_RADIUS: f64 = 0.02;

fn control_sets(poses: &[Pose], gripper: &GripperModel) -> Vec<Vec<Point3<f64>>> {
    poses.iter().map(|p| gripper.control_points(p)).collect()
}

fn mean_distance(a: &[Point3<f64>], b: &[Point3<f64>]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).norm()).sum::<f64>() / a.len() as f64
}

/// Fraction of reference grasps within `radius` of some generated grasp.
pub fn coverage(generated: &[Pose], reference: &[Pose], radius: f64, gripper: &GripperModel) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::Empty("reference grasp set"));
    }
    let gen = control_sets(generated, gripper);
    let covered = control_sets(reference, gripper)
        .par_iter()
        .filter(|r| gen.iter().any(|g| mean_distance(g, r) < radius))
        .count();
    Ok(covered as f64 / reference.len() as f64)
}

/// One threshold of a sweep: the grasps scoring at least `threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    #[serde(serialize_with = "canonical::f64")]
    pub threshold: f64,
    #[serde(serialize_with = "canonical::f64")]
    pub coverage: f64,
    #[serde(serialize_with = "canonical::f64")]
    pub success_rate: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuccessCoverageCurve {
    /// Sweep in order of decreasing threshold.
    pub operating_points: Vec<OperatingPoint>,
    /// `(coverage, success_rate)` with strictly increasing coverage; where
    /// several thresholds reach the same coverage the best success is kept.
    pub points: Vec<[f64; 2]>,
}

impl SuccessCoverageCurve {
    pub fn from_operating_points(operating_points: Vec<OperatingPoint>) -> SuccessCoverageCurve {
        let mut sorted: Vec<[f64; 2]> = operating_points.iter().map(|o| [o.coverage, o.success_rate]).collect();
        sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(b[1].total_cmp(&a[1])));
        let mut points: Vec<[f64; 2]> = Vec::new();
        for p in sorted {
            if points.last().is_none_or(|l| l[0] < p[0]) {
                points.push(p);
            }
        }
        SuccessCoverageCurve {
            operating_points,
            points,
        }
    }

    pub fn auc(&self) -> Result<f64> {
        auc(&self.points)
    }
}

/// Sweeps the acceptance threshold over every distinct score.
///
/// `outcomes[i]` is the oracle result for `poses[i]`. A reference grasp is
/// covered at threshold `t` when a grasp scoring at least `t` lies within
/// `radius`.
pub fn curve_sweep(
    scores: &[f64],
    poses: &[Pose],
    outcomes: &[bool],
    reference: &[Pose],
    radius: f64,
    gripper: &GripperModel,
) -> Result<SuccessCoverageCurve> {
    if scores.len() != poses.len() || scores.len() != outcomes.len() {
        return Err(Error::invalid("scores, poses and outcomes differ in length"));
    }
    if reference.is_empty() {
        return Err(Error::Empty("reference grasp set"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("non-finite score"));
    }
    let gen = control_sets(poses, gripper);
    // best score among generated grasps near each reference grasp
    let best: Vec<f64> = control_sets(reference, gripper)
        .par_iter()
        .map(|r| {
            gen.iter()
                .zip(scores)
                .filter(|(g, _)| mean_distance(g, r) < radius)
                .map(|(_, &s)| s)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let operating_points = thresholds
        .iter()
        .map(|&t| {
            let (mut count, mut ok) = (0usize, 0usize);
            for (&s, &o) in scores.iter().zip(outcomes) {
                if s >= t {
                    count += 1;
                    ok += o as usize;
                }
            }
            OperatingPoint {
                threshold: t,
                coverage: best.iter().filter(|&&b| b >= t).count() as f64 / reference.len() as f64,
                success_rate: ok as f64 / count as f64,
                count,
            }
        })
        .collect();
    Ok(SuccessCoverageCurve::from_operating_points(operating_points))
}

/// Trapezoidal area under a success-coverage curve. The first point is
/// extended left to coverage 0 at its own success rate.
pub fn auc(points: &[[f64; 2]]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Empty("curve"));
    }
    let unit = |x: f64| (0.0..=1.0).contains(&x);
    if points.iter().any(|p| !unit(p[0]) || !unit(p[1])) {
        return Err(Error::invalid("curve values must lie in [0, 1]"));
    }
    if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
        return Err(Error::invalid("curve coverage must increase strictly"));
    }
    let mut area = points[0][0] * points[0][1];
    for w in points.windows(2) {
        area += (w[1][0] - w[0][0]) * (w[0][1] + w[1][1]) / 2.0;
    }
    Ok(area)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInterval {
    #[serde(serialize_with = "canonical::f64")]
    pub mean: f64,
    #[serde(serialize_with = "canonical::f64")]
    pub lower: f64,
    #[serde(serialize_with = "canonical::f64")]
    pub upper: f64,
    #[serde(serialize_with = "canonical::f64")]
    pub confidence: f64,
    pub resamples: usize,
}

impl BootstrapInterval {
    /// The whole interval lies above zero.
    pub fn positive(&self) -> bool {
        self.lower > 0.0
    }
}

/// Percentile bootstrap interval for the mean of the paired differences
/// `a[i] - b[i]`.
pub fn paired_bootstrap(
    a: &[f64],
    b: &[f64],
    resamples: usize,
    confidence: f64,
    seed_value: u64,
) -> Result<BootstrapInterval> {
    if a.len() != b.len() {
        return Err(Error::invalid("paired samples differ in length"));
    }
    if a.is_empty() {
        return Err(Error::Empty("paired samples"));
    }
    if resamples == 0 || !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::invalid("bootstrap needs resamples and confidence in (0, 1)"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len();
    let mut rng = seed::rng(seed::derive(seed_value, seed::streams::BOOTSTRAP, 0));
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| d[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - confidence) / 2.0;
    let at = |q: f64| means[((q * resamples as f64).floor() as usize).min(resamples - 1)];
    Ok(BootstrapInterval {
        mean: d.iter().sum::<f64>() / n as f64,
        lower: at(tail),
        upper: at(1.0 - tail),
        confidence,
        resamples,
    })
}
