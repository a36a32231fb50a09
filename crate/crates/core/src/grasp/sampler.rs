use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};

use crate::error::{Error, Result};
use crate::geometry::{GripperModel, PointCloud, Pose, Vector3};
use crate::seed;

use super::{Grasp, GraspSource};

/// Default standoff interval: the sampled point ends up 1 to 4.5 cm inside
/// the finger span of the default gripper.
pub const DEFAULT_STANDOFF: (f64, f64) = (0.065, 0.10);

/// Source of grasp candidates for a target object cloud.
pub trait Sampler: Send + Sync {
    fn name(&self) -> &str;
    fn sample(&self, object_cloud: &PointCloud, k: usize, seed_value: u64) -> Result<Vec<Grasp>>;
}

#[derive(Clone, Debug)]
pub struct SurfaceNormalSampler {
    pub standoff: (f64, f64),
}

impl Default for SurfaceNormalSampler {
    fn default() -> Self {
        SurfaceNormalSampler {
            standoff: DEFAULT_STANDOFF,
        }
    }
}

impl Sampler for SurfaceNormalSampler {
    fn name(&self) -> &str {
        "surface_normal"
    }

    fn sample(&self, object_cloud: &PointCloud, k: usize, seed_value: u64) -> Result<Vec<Grasp>> {
        surface_normal_sampler(object_cloud, k, self.standoff, seed_value)
    }
}

/// Returns a fixed, externally produced grasp list (for example from a
/// learned model), truncated to `k`.
#[derive(Clone, Debug, Default)]
pub struct ExternalSampler {
    pub poses: Vec<Pose>,
}

impl Sampler for ExternalSampler {
    fn name(&self) -> &str {
        "external"
    }

    fn sample(&self, _object_cloud: &PointCloud, k: usize, _seed_value: u64) -> Result<Vec<Grasp>> {
        if self.poses.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("external grasp pose is not finite"));
        }
        Ok(self
            .poses
            .iter()
            .take(k)
            .map(|&p| Grasp::new(p, GraspSource::External))
            .collect())
    }
}

/// Some unit vector orthogonal to `z`.
fn orthogonal(z: &Vector3<f64>) -> Vector3<f64> {
    let helper = if z.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    z.cross(&helper).normalize()
}

/// Gripper pose approaching along `approach` whose origin is `origin`, with
/// the closing axis rolled by `roll` about the approach.
pub fn pose_from_approach(origin: Vector3<f64>, approach: &Vector3<f64>, roll: f64) -> Pose {
    let z = approach.normalize();
    let u = orthogonal(&z);
    let w = z.cross(&u);
    let x = u * roll.cos() + w * roll.sin();
    let y = z.cross(&x);
    Pose::from_frame(x, y, z, origin)
}

/// `k` grasps approaching random cloud points against their normals.
pub fn surface_normal_sampler(object_cloud: &PointCloud, k: usize, standoff: (f64, f64), seed_value: u64) -> Result<Vec<Grasp>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    if object_cloud.is_empty() {
        return Err(Error::Empty("object cloud"));
    }
    let normals = object_cloud.normals().ok_or(Error::MissingNormals)?;
    if !(standoff.0 <= standoff.1) {
        return Err(Error::invalid("standoff interval is reversed"));
    }
    let mut rng = seed::rng(seed::derive(seed_value, seed::streams::SAMPLER, 0));
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let i = rng.random_range(0..object_cloud.len());
        let n = normals[i].normalize();
        let s = if standoff.0 == standoff.1 {
            standoff.0
        } else {
            rng.random_range(standoff.0..standoff.1)
        };
        let roll = rng.random::<f64>() * TAU;
        let origin = object_cloud.points()[i].coords + n * s;
        out.push(Grasp::new(pose_from_approach(origin, &(-n), roll), GraspSource::SurfaceNormal));
    }
    Ok(out)
}

/// Random rigid offset: world translation with norm uniform in
/// `[0, max_translation]` and a rotation by an angle uniform in
/// `[0, max_rotation]` about the closing-region center.
pub fn perturb(g: &Grasp, gripper: &GripperModel, max_translation: f64, max_rotation: f64, seed_value: u64) -> Grasp {
    let mut rng = seed::rng(seed_value);
    perturb_with(g, gripper, max_translation, max_rotation, &mut rng)
}

pub(crate) fn perturb_with(g: &Grasp, gripper: &GripperModel, max_translation: f64, max_rotation: f64, rng: &mut seed::Rng) -> Grasp {
    let dir: [f64; 3] = UnitSphere.sample(rng);
    let t = Vector3::from(dir) * (rng.random::<f64>() * max_translation);
    let axis: [f64; 3] = UnitSphere.sample(rng);
    let angle = rng.random::<f64>() * max_rotation;
    let c = gripper.closing_region().center().coords;
    let local = Pose::from_translation(c)
        .compose(&Pose::from_axis_angle(&Vector3::from(axis), angle))
        .compose(&Pose::from_translation(-c));
    let pose = Pose::from_translation(t).compose(&g.pose).compose(&local);
    Grasp::new(pose, GraspSource::Perturbed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{grasp_distance, Point3};

    fn patch() -> PointCloud {
        let pts: Vec<_> = (0..100).map(|i| Point3::new((i % 10) as f64 * 0.01, (i / 10) as f64 * 0.01, 0.2)).collect();
        let n = pts.len();
        PointCloud::new(pts, vec![1; n]).unwrap().with_normals(vec![Vector3::z(); n]).unwrap()
    }

    #[test]
    fn flat_patch_fixed_standoff() {
        let gs = surface_normal_sampler(&patch(), 50, (0.08, 0.08), 3).unwrap();
        assert_eq!(gs.len(), 50);
        for g in gs {
            assert!((g.pose.translation().z - 0.28).abs() < 1e-12);
            assert!((g.pose.approach() + Vector3::z()).norm() < 1e-6);
        }
        assert!(surface_normal_sampler(&patch(), 0, (0.08, 0.08), 3).unwrap().is_empty());
        assert!(surface_normal_sampler(&PointCloud::empty(), 1, (0.08, 0.08), 3).is_err());
    }

    #[test]
    fn sphere_approach_lines_hit_center() {
        let (pts, _) = crate::geometry::TriMesh::revolve(
            &(0..=16)
                .map(|i| {
                    let a = std::f64::consts::PI * i as f64 / 16.0;
                    (0.05 * a.sin(), -0.05 * a.cos())
                })
                .collect::<Vec<_>>(),
            32,
        )
        .unwrap()
        .sample_surface(300, 1);
        // radial normals instead of facet normals so the lines are exact
        let n: Vec<_> = pts.iter().map(|p| p.coords.normalize()).collect();
        let cloud = PointCloud::new(pts.clone(), vec![1; pts.len()]).unwrap().with_normals(n).unwrap();
        for g in surface_normal_sampler(&cloud, 200, DEFAULT_STANDOFF, 2).unwrap() {
            let o = g.pose.translation();
            let a = g.pose.approach();
            let closest = o - a * o.dot(&a);
            assert!(closest.norm() < 1e-3);
        }
    }

    #[test]
    fn roll_is_about_approach() {
        let a = Vector3::new(0.3, -0.2, -0.9).normalize();
        for r in [0.0, 1.0, 4.0] {
            let p = pose_from_approach(Vector3::zeros(), &a, r);
            assert!((p.approach() - a).norm() < 1e-12);
            assert!(p.closing_axis().dot(&a).abs() < 1e-12);
        }
    }

    #[test]
    fn perturb_bounds() {
        let gr = GripperModel::default();
        let g = Grasp::new(Pose::rot_x(0.4), GraspSource::SurfaceNormal);
        let same = perturb(&g, &gr, 0.0, 0.0, 9);
        assert!((same.pose.translation() - g.pose.translation()).norm() < 1e-15);
        assert!(same.pose.rotation().angle_to(&g.pose.rotation()) < 1e-12);
        assert_eq!(same.source, GraspSource::Perturbed);
        for s in 0..200 {
            let p = perturb(&g, &gr, 0.02, 0.0, s);
            assert!(grasp_distance(&g.pose, &p.pose, &gr) <= 0.02 + 1e-12);
        }
    }

    #[test]
    fn perturb_translation_norms_uniform() {
        // Kolmogorov-Smirnov distance of |t| / d against U(0, 1)
        let gr = GripperModel::default();
        let g = Grasp::new(Pose::identity(), GraspSource::SurfaceNormal);
        let mut v: Vec<f64> = (0..10_000)
            .map(|s| perturb(&g, &gr, 0.03, 0.0, s).pose.translation().norm() / 0.03)
            .collect();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let ks = v
            .iter()
            .enumerate()
            .map(|(i, x)| (x - i as f64 / n).abs().max((x - (i + 1) as f64 / n).abs()))
            .fold(0.0, f64::max);
        assert!(ks < 0.05, "ks {ks}");
    }

    #[test]
    fn external_passthrough() {
        let s = ExternalSampler {
            poses: vec![Pose::identity(), Pose::rot_z(1.0)],
        };
        let gs = s.sample(&PointCloud::empty(), 1, 0).unwrap();
        assert_eq!(gs, vec![Grasp::new(Pose::identity(), GraspSource::External)]);
    }
}
