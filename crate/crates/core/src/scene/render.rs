//! Single-view depth rendering by ray casting.
//!
//! Camera frame follows the pinhole convention: +z looks into the scene,
//! +x to the right in the image and +y down.

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Pose, Point3, Vector3, TABLE_INSTANCE};
use crate::geometry::primitives::triangle_normal;
use crate::seed;

use super::world::Scene;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraModel {
    #[serde(serialize_with = "canonical::f64")]
    pub fx: f64,
    #[serde(serialize_with = "canonical::f64")]
    pub fy: f64,
    #[serde(serialize_with = "canonical::f64")]
    pub cx: f64,
    #[serde(serialize_with = "canonical::f64")]
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    /// Camera-to-world transform.
    pub extrinsic: Pose,
}

impl Default for CameraModel {
    /// 160x120 view from 0.55 m away and 0.45 m above the table center.
    fn default() -> Self {
        CameraModel::look_at(
            160,
            120,
            140.0,
            &Point3::new(0.55, 0.0, 0.45),
            &Point3::new(0.0, 0.0, 0.02),
        )
    }
}

impl CameraModel {
    /// Camera at `eye` looking at `target` with world +z as the up hint.
    pub fn look_at(width: u32, height: u32, focal: f64, eye: &Point3<f64>, target: &Point3<f64>) -> CameraModel {
        let z = (target - eye).normalize();
        let mut up = Vector3::z();
        if z.cross(&up).norm() < 1e-9 {
            up = Vector3::x();
        }
        let x = z.cross(&up).normalize();
        let y = z.cross(&x);
        CameraModel {
            fx: focal,
            fy: focal,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            width,
            height,
            extrinsic: Pose::from_frame(x, y, z, eye.coords),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.fx, self.fy, self.cx, self.cy].iter().all(|v| v.is_finite());
        if !finite || self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(Error::invalid("camera focal lengths must be positive"));
        }
        if self.width < 16 || self.height < 16 {
            return Err(Error::invalid("camera resolution must be at least 16x16"));
        }
        Ok(())
    }

    pub fn center(&self) -> Point3<f64> {
        Point3::from(self.extrinsic.translation())
    }

    /// Unit world-space ray direction through the center of pixel `(u, v)`.
    pub fn ray(&self, u: u32, v: u32) -> Vector3<f64> {
        let d = Vector3::new(
            (u as f64 + 0.5 - self.cx) / self.fx,
            (v as f64 + 0.5 - self.cy) / self.fy,
            1.0,
        );
        self.extrinsic.transform_vector(&d.normalize())
    }
}

/// Nearest surface along a ray: range, instance id and outward normal.
pub fn cast_ray(scene: &Scene, origin: &Point3<f64>, dir: &Vector3<f64>) -> Option<(f64, u32, Vector3<f64>)> {
    let mut best: Option<(f64, u32, Vector3<f64>)> = None;
    if dir.z < 0.0 && origin.z > scene.table_height() {
        let t = (scene.table_height() - origin.z) / dir.z;
        best = Some((t, TABLE_INSTANCE, Vector3::z()));
    }
    for o in scene.objects() {
        if let Some(hit) = o.bvh().ray_cast(origin, dir) {
            if best.is_none_or(|(t, _, _)| hit.distance < t) {
                let n = triangle_normal(&o.mesh().triangle(hit.triangle)).normalize();
                best = Some((hit.distance, o.instance_id(), n));
            }
        }
    }
    best
}

/// Noise-free render: one point per pixel whose ray hits the table or an object.
pub fn render_cloud(scene: &Scene, camera: &CameraModel) -> Result<PointCloud> {
    render_cloud_noisy(scene, camera, 0.0, 0)
}

/// Render with additive Gaussian noise of standard deviation `depth_sigma` on
/// each ray range. Normals face the camera.
pub fn render_cloud_noisy(scene: &Scene, camera: &CameraModel, depth_sigma: f64, seed_value: u64) -> Result<PointCloud> {
    camera.validate()?;
    if !(depth_sigma >= 0.0 && depth_sigma.is_finite()) {
        return Err(Error::invalid("depth noise must be non-negative"));
    }
    let eye = camera.center();
    let rows: Vec<Vec<(Point3<f64>, u32, Vector3<f64>)>> = (0..camera.height)
        .into_par_iter()
        .map(|v| {
            let noise = (depth_sigma > 0.0).then(|| {
                let rng = seed::Rng::seed_from_u64(seed::derive(seed_value, seed::streams::RENDER, v as u64));
                (rng, Normal::new(0.0, depth_sigma).expect("valid sigma"))
            });
            let mut noise = noise;
            let mut row = Vec::new();
            for u in 0..camera.width {
                let dir = camera.ray(u, v);
                if let Some((mut t, id, mut n)) = cast_ray(scene, &eye, &dir) {
                    if let Some((rng, dist)) = noise.as_mut() {
                        t = (t + dist.sample(rng)).max(0.0);
                    }
                    if n.dot(&dir) > 0.0 {
                        n = -n;
                    }
                    row.push((eye + dir * t, id, n));
                }
            }
            row
        })
        .collect();
    let total: usize = rows.iter().map(Vec::len).sum();
    let mut pts = Vec::with_capacity(total);
    let mut ids = Vec::with_capacity(total);
    let mut normals = Vec::with_capacity(total);
    for (p, id, n) in rows.into_iter().flatten() {
        pts.push(p);
        ids.push(id);
        normals.push(n);
    }
    Ok(PointCloud::new(pts, ids)?.with_normals(normals)?.with_viewpoint(Some(eye)))
}
