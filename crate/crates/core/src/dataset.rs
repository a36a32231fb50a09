//! Labeled training records for external learned scorers.
//!
//! Records are written as JSON lines. Point coordinates are embedded as
//! base64 little-endian `f32` xyz triplets with parallel instance-id and
//! source-flag arrays.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::collides;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::eval::success_oracle;
use crate::geometry::{GripperModel, Point3, PointCloud, Pose, SOURCE_GRIPPER};
use crate::grasp::{
    free_space_grasps, generate_reference_set, hard_negatives, Grasp, GraspLabel, GraspQuality, GraspSetKind,
    ReferenceParams,
};
use crate::pipeline::GraspPipeline;
use crate::scene::{generate_scene, procedural_library, ObjectAsset, Scene, SceneSpec};
use crate::seed;
use std::sync::Arc;

/// Instance id carried by appended gripper points.
pub const GRIPPER_INSTANCE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetRecord {
    /// Scene file name or other reference.
    pub scene: String,
    pub target: u32,
    pub grasp: Pose,
    pub label: GraspLabel,
    /// Scene crop, followed by gripper points when augmented.
    pub cloud: PointCloud,
    pub gripper_augmented: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    scene: String,
    target: u32,
    grasp: Pose,
    label: GraspLabel,
    gripper_augmented: bool,
    num_points: usize,
    points: String,
    instance_ids: Vec<u32>,
    source_flags: Vec<u8>,
}

fn encode_points(points: &[Point3<f64>]) -> String {
    let mut bytes = Vec::with_capacity(points.len() * 12);
    for p in points {
        for c in p.coords.iter() {
            bytes.extend_from_slice(&(*c as f32).to_le_bytes());
        }
    }
    STANDARD.encode(bytes)
}

fn decode_points(text: &str, n: usize) -> Result<Vec<Point3<f64>>> {
    let bytes = STANDARD.decode(text).map_err(|e| Error::Parse(e.to_string()))?;
    if bytes.len() != n * 12 {
        return Err(Error::Parse(format!("expected {} point bytes, found {}", n * 12, bytes.len())));
    }
    let f = |i: usize| f32::from_le_bytes(bytes[i * 4..i * 4 + 4].try_into().expect("4 bytes")) as f64;
    Ok((0..n).map(|k| Point3::new(f(3 * k), f(3 * k + 1), f(3 * k + 2))).collect())
}

impl DatasetRecord {
    /// One JSON line, without the trailing newline.
    pub fn to_json_line(&self) -> String {
        let line = RecordLine {
            scene: self.scene.clone(),
            target: self.target,
            grasp: self.grasp,
            label: self.label,
            gripper_augmented: self.gripper_augmented,
            num_points: self.cloud.len(),
            points: encode_points(self.cloud.points()),
            instance_ids: self.cloud.instance_ids().to_vec(),
            source_flags: self.cloud.source_flags().to_vec(),
        };
        serde_json::to_string(&line).expect("record serializes")
    }

    /// Inverse of [`DatasetRecord::to_json_line`]; coordinates come back at
    /// `f32` precision.
    pub fn from_json_line(text: &str) -> Result<DatasetRecord> {
        let line: RecordLine = serde_json::from_str(text)?;
        let points = decode_points(&line.points, line.num_points)?;
        let cloud = PointCloud::from_parts(points, line.instance_ids, line.source_flags, None)?;
        Ok(DatasetRecord {
            scene: line.scene,
            target: line.target,
            grasp: line.grasp,
            label: GraspLabel::new(line.label.quality, line.label.collision, line.label.set)?,
            cloud,
            gripper_augmented: line.gripper_augmented,
        })
    }
}

/// Appends `m` points sampled on the gripper body surface at `g`, flagged as
/// gripper points. Normals are dropped unless the input has none to drop.
pub fn attach_gripper_points(cloud: &PointCloud, g: &Pose, gripper: &GripperModel, m: usize) -> PointCloud {
    let mut out = cloud.clone();
    if m == 0 {
        return out;
    }
    let (local, _) = gripper.body_mesh().sample_surface(m, seed::derive(0, seed::streams::EXPORT, m as u64));
    let pts: Vec<Point3<f64>> = local.iter().map(|p| g.transform_point(p)).collect();
    let extra = PointCloud::from_parts(pts, vec![GRIPPER_INSTANCE; m], vec![SOURCE_GRIPPER; m], None)
        .expect("gripper samples are finite");
    out.append(&extra);
    out
}

/// Asset library used for generated training scenes.
pub fn training_library(config: &RunConfig) -> Vec<Arc<ObjectAsset>> {
    procedural_library(config.scene.library_size, config.scene.library_seed, "train")
        .into_iter()
        .map(Arc::new)
        .collect()
}

/// Scene `index` of the training stream for `config.seed`, with `objects`
/// overriding the configured object count.
pub fn training_scene(
    config: &RunConfig,
    library: &[Arc<ObjectAsset>],
    index: u64,
    objects: Option<usize>,
) -> Result<Scene> {
    let spec = SceneSpec {
        table_height: config.scene.table_height,
        table_half_extent: config.scene.table_half_extent,
        camera: config.scene.camera.clone(),
        objects: objects.unwrap_or(config.scene.objects),
        max_attempts: config.scene.max_attempts,
    };
    generate_scene(library, &spec, training_scene_seed(config, index))
}

/// Seed of training scene `index`, also used for its observation.
pub fn training_scene_seed(config: &RunConfig, index: u64) -> u64 {
    seed::derive(config.seed, seed::streams::SCENE, index)
}

/// Labeled records of one scene, split by grasp set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RecordPool {
    pub positive: Vec<DatasetRecord>,
    pub negative: Vec<DatasetRecord>,
    pub hard_negative: Vec<DatasetRecord>,
    pub free: Vec<DatasetRecord>,
}

impl RecordPool {
    pub fn subsets(&self) -> [&[DatasetRecord]; 4] {
        [&self.positive, &self.negative, &self.hard_negative, &self.free]
    }

    pub fn len(&self) -> usize {
        self.subsets().iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Builds the reference, hard-negative and free-space sets for `target` and
/// pairs each grasp with the target's scene crop.
///
/// Quality labels come from the success oracle on the isolated target,
/// collision labels from the exact collider on the full scene.
pub fn build_record_pool(
    scene: &Scene,
    scene_ref: &str,
    target: u32,
    config: &RunConfig,
    seed_value: u64,
) -> Result<RecordPool> {
    let pipeline = GraspPipeline::from_config(config)?;
    let gripper = pipeline.gripper().clone();
    let object = scene.require(target)?;
    let cloud = pipeline.observe(scene, seed_value)?;
    let crop = pipeline.crop(&cloud, target, seed_value)?;
    let params = ReferenceParams {
        standoff: config.scoring.standoff,
        friction_mu: config.scoring.friction_mu,
    };
    let reference = generate_reference_set(
        scene,
        target,
        &gripper,
        config.dataset.reference_candidates,
        &params,
        seed_value,
    )?;
    let positives: Vec<Grasp> = reference
        .iter()
        .filter(|l| l.label.quality == GraspQuality::Positive)
        .map(|l| l.grasp)
        .collect();
    let hard = hard_negatives(
        &positives,
        object.surface_cloud(),
        object.bvh(),
        &gripper,
        &config.dataset.hard_negative,
        seed_value,
    );
    let free = free_space_grasps(scene, &gripper, config.dataset.free_space, seed_value)?;
    let m = config.dataset.gripper_points;
    let record = |grasp: &Grasp, label: GraspLabel| DatasetRecord {
        scene: scene_ref.to_string(),
        target,
        grasp: grasp.pose,
        label,
        cloud: crop.scene.clone(),
        gripper_augmented: false,
    }
    .with_gripper(&gripper, m);
    let mut pool = RecordPool::default();
    for l in &reference {
        let r = record(&l.grasp, l.label);
        match l.label.set {
            GraspSetKind::Positive => pool.positive.push(r),
            _ => pool.negative.push(r),
        }
    }
    let hard_labels: Vec<GraspLabel> = hard
        .par_iter()
        .map(|g| GraspLabel::new(GraspQuality::Negative, collides(&gripper, &g.pose, scene, None), GraspSetKind::HardNegative))
        .collect::<Result<_>>()?;
    pool.hard_negative = hard.iter().zip(hard_labels).map(|(g, l)| record(g, l)).collect();
    let free_label = GraspLabel::new(GraspQuality::Negative, false, GraspSetKind::Free)?;
    pool.free = free.iter().map(|g| record(g, free_label)).collect();
    Ok(pool)
}

impl DatasetRecord {
    /// Appends gripper points when `m > 0`.
    pub fn with_gripper(mut self, gripper: &GripperModel, m: usize) -> DatasetRecord {
        if m > 0 {
            self.cloud = attach_gripper_points(&self.cloud, &self.grasp, gripper, m);
            self.gripper_augmented = true;
        }
        self
    }
}

/// Draws balanced batches from the four grasp sets.
///
/// Each batch takes `batch_size / 4` records from every set. The remaining
/// `batch_size % 4` go one each to consecutive sets in the order positive,
/// negative, hard negative, free, continuing where the previous batch
/// stopped. Within a set records are drawn without replacement from a
/// shuffled order that is reshuffled once exhausted.
pub struct BalancedBatcher<'a> {
    subsets: [&'a [DatasetRecord]; 4],
    orders: [Vec<usize>; 4],
    cursors: [usize; 4],
    epochs: [u64; 4],
    next_extra: usize,
    seed: u64,
}

impl<'a> BalancedBatcher<'a> {
    pub fn new(pool: &'a RecordPool, seed_value: u64) -> Result<BalancedBatcher<'a>> {
        let subsets = pool.subsets();
        if subsets.iter().any(|s| s.is_empty()) {
            return Err(Error::Empty("grasp set partition"));
        }
        let mut b = BalancedBatcher {
            subsets,
            orders: Default::default(),
            cursors: [0; 4],
            epochs: [0; 4],
            next_extra: 0,
            seed: seed_value,
        };
        for k in 0..4 {
            b.shuffle(k);
        }
        Ok(b)
    }

    fn shuffle(&mut self, k: usize) {
        let mut order: Vec<usize> = (0..self.subsets[k].len()).collect();
        let stream = seed::derive(self.seed, seed::streams::EXPORT, k as u64);
        order.shuffle(&mut seed::rng(seed::derive(stream, self.epochs[k], 0)));
        self.orders[k] = order;
        self.cursors[k] = 0;
        self.epochs[k] += 1;
    }

    fn draw(&mut self, k: usize) -> &'a DatasetRecord {
        if self.cursors[k] == self.orders[k].len() {
            self.shuffle(k);
        }
        let i = self.orders[k][self.cursors[k]];
        self.cursors[k] += 1;
        &self.subsets[k][i]
    }

    /// Per-set counts of the next batch.
    pub fn quota(&self, batch_size: usize) -> [usize; 4] {
        let mut q = [batch_size / 4; 4];
        for j in 0..batch_size % 4 {
            q[(self.next_extra + j) % 4] += 1;
        }
        q
    }

    pub fn next_batch(&mut self, batch_size: usize) -> Vec<DatasetRecord> {
        let quota = self.quota(batch_size);
        self.next_extra = (self.next_extra + batch_size % 4) % 4;
        let mut out = Vec::with_capacity(batch_size);
        for (k, &n) in quota.iter().enumerate() {
            for _ in 0..n {
                out.push(self.draw(k).clone());
            }
        }
        out
    }
}

/// First balanced batch of `batch_size` records from `pool`.
pub fn export_balanced_batch(pool: &RecordPool, batch_size: usize, seed_value: u64) -> Result<Vec<DatasetRecord>> {
    Ok(BalancedBatcher::new(pool, seed_value)?.next_batch(batch_size))
}

/// Re-derives the labels of a seeded sample of `fraction` of the records
/// (at least one) and returns `(checked, agreeing)`.
pub fn audit_labels(
    records: &[DatasetRecord],
    scene: &Scene,
    gripper: &GripperModel,
    friction_mu: f64,
    fraction: f64,
    seed_value: u64,
) -> Result<(usize, usize)> {
    if records.is_empty() {
        return Ok((0, 0));
    }
    let n = ((records.len() as f64 * fraction).ceil() as usize).clamp(1, records.len());
    let mut idx: Vec<usize> = (0..records.len()).collect();
    idx.shuffle(&mut seed::rng(seed::derive(seed_value, seed::streams::EXPORT, u64::MAX)));
    idx.truncate(n);
    let agree = idx
        .par_iter()
        .map(|&i| {
            let r = &records[i];
            let isolated = scene.isolated(r.target)?;
            let positive = success_oracle(&r.grasp, &isolated, r.target, gripper, friction_mu)?;
            let collision = collides(gripper, &r.grasp, scene, None);
            Ok((positive == (r.label.quality == GraspQuality::Positive) && collision == r.label.collision) as usize)
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    Ok((n, agree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::point_triangle_distance;
    use crate::geometry::Vector3;
    use crate::scene::{AssetShape, CameraModel};

    fn rec(set: GraspSetKind, i: usize) -> DatasetRecord {
        let quality = if set == GraspSetKind::Positive {
            GraspQuality::Positive
        } else {
            GraspQuality::Negative
        };
        DatasetRecord {
            scene: format!("s{i}"),
            target: 1,
            grasp: Pose::from_translation(Vector3::new(i as f64, 0.0, 0.0)),
            label: GraspLabel::new(quality, false, set).unwrap(),
            cloud: PointCloud::new(vec![Point3::new(0.1, 0.2, 0.3)], vec![1]).unwrap(),
            gripper_augmented: false,
        }
    }

    fn pool(sizes: [usize; 4]) -> RecordPool {
        let make = |k: usize| (0..sizes[k]).map(|i| rec(GraspSetKind::ALL[k], i)).collect::<Vec<_>>();
        RecordPool {
            positive: make(0),
            negative: make(1),
            hard_negative: make(2),
            free: make(3),
        }
    }

    fn counts(batch: &[DatasetRecord]) -> [usize; 4] {
        let mut c = [0; 4];
        for r in batch {
            c[GraspSetKind::ALL.iter().position(|&k| k == r.label.set).unwrap()] += 1;
        }
        c
    }

    #[test]
    fn batch_quotas() {
        let p = pool([5, 5, 5, 5]);
        assert_eq!(counts(&export_balanced_batch(&p, 4, 1).unwrap()), [1, 1, 1, 1]);
        assert_eq!(counts(&export_balanced_batch(&p, 6, 1).unwrap()), [2, 2, 1, 1]);
        assert!(export_balanced_batch(&pool([1, 0, 1, 1]), 4, 1).is_err());
    }

    #[test]
    fn epoch_frequencies_balanced() {
        let p = pool([7, 3, 5, 4]);
        let mut b = BalancedBatcher::new(&p, 9).unwrap();
        let mut total = [0usize; 4];
        let mut draws: Vec<Vec<usize>> = vec![vec![0; 7], vec![0; 3], vec![0; 5], vec![0; 4]];
        for _ in 0..21 {
            let batch = b.next_batch(7);
            for (k, c) in counts(&batch).iter().enumerate() {
                total[k] += c;
            }
            for r in &batch {
                let k = GraspSetKind::ALL.iter().position(|&s| s == r.label.set).unwrap();
                draws[k][r.grasp.translation().x as usize] += 1;
            }
        }
        assert!(total.iter().max().unwrap() - total.iter().min().unwrap() <= 1);
        // 147 draws, about 37 per set: within a set each record is drawn
        // floor or ceil of its share
        for d in &draws {
            assert!(d.iter().max().unwrap() - d.iter().min().unwrap() <= 1, "{d:?}");
        }
    }

    #[test]
    fn gripper_points_on_surface() {
        let g = GripperModel::default();
        let pose = Pose::new(
            crate::geometry::UnitQuaternion::from_euler_angles(0.3, -0.2, 1.0),
            Vector3::new(0.1, -0.2, 0.3),
        );
        let base = PointCloud::new(vec![Point3::new(0.0, 0.0, 0.0); 5], vec![2; 5]).unwrap();
        assert_eq!(attach_gripper_points(&base, &pose, &g, 0), base);
        let out = attach_gripper_points(&base, &pose, &g, 128);
        assert_eq!(out.len(), 133);
        assert_eq!(out.source_flags().iter().filter(|&&f| f == SOURCE_GRIPPER).count(), 128);
        assert!(out.source_flags()[..5].iter().all(|&f| f == 0));
        let mesh = g.body_mesh_at(&pose);
        for p in &out.points()[5..] {
            let d = (0..mesh.triangle_count())
                .map(|i| point_triangle_distance(p, &mesh.triangle(i)))
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1e-6);
        }
    }

    #[test]
    fn json_line_round_trip() {
        let g = GripperModel::default();
        let r = rec(GraspSetKind::HardNegative, 3).with_gripper(&g, 16);
        let line = r.to_json_line();
        assert!(!line.contains('\n'));
        let back = DatasetRecord::from_json_line(&line).unwrap();
        assert_eq!(back.to_json_line(), line);
        assert_eq!(back.cloud.len(), 17);
        assert!(back.gripper_augmented);
        for (a, b) in back.cloud.points().iter().zip(r.cloud.points()) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn pool_labels_pass_audit() {
        let a = Arc::new(ObjectAsset::from_shape("b", AssetShape::Box { size: [0.04, 0.05, 0.08] }).unwrap());
        let b = Arc::new(ObjectAsset::from_shape("c", AssetShape::Box { size: [0.06, 0.06, 0.06] }).unwrap());
        let scene = Scene::new(0.0, [0.2, 0.2], CameraModel::default())
            .with_object(a.clone(), a.stable_poses()[0].pose)
            .with_object(b.clone(), Pose::from_translation(Vector3::new(0.0, 0.09, 0.03)));
        let mut c = RunConfig::default();
        c.dataset.reference_candidates = 60;
        c.dataset.free_space = 10;
        c.dataset.gripper_points = 0;
        let pool = build_record_pool(&scene, "lone", 1, &c, 2).unwrap();
        assert!(!pool.positive.is_empty() && !pool.free.is_empty());
        let all: Vec<DatasetRecord> = pool.subsets().iter().flat_map(|s| s.iter().cloned()).collect();
        assert!(all.iter().all(|r| r.cloud.len() == c.observation.crop_points));
        let (checked, agree) = audit_labels(&all, &scene, &GripperModel::default(), 0.5, 1.0, 0).unwrap();
        assert_eq!(checked, all.len());
        assert_eq!(agree, checked);
    }
}
