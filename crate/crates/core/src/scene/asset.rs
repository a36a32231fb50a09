//! Procedural object assets and their resting poses.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point3, Pose, TriMesh, Vector3};
use crate::seed;

const REVOLVE_SEGMENTS: usize = 24;

/// Parametric shape of a procedural asset (meters).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AssetShape {
    Box {
        #[serde(serialize_with = "canonical::array3")]
        size: [f64; 3],
    },
    Cylinder {
        #[serde(serialize_with = "canonical::f64")]
        radius: f64,
        #[serde(serialize_with = "canonical::f64")]
        height: f64,
    },
    /// Open bowl: a revolved profile with a flat bottom and a flared wall.
    Bowl {
        #[serde(serialize_with = "canonical::f64")]
        bottom_radius: f64,
        #[serde(serialize_with = "canonical::f64")]
        top_radius: f64,
        #[serde(serialize_with = "canonical::f64")]
        height: f64,
        #[serde(serialize_with = "canonical::f64")]
        wall: f64,
    },
    /// Body cylinder, conical shoulder and neck cylinder stacked on z.
    Bottle {
        #[serde(serialize_with = "canonical::f64")]
        radius: f64,
        #[serde(serialize_with = "canonical::f64")]
        height: f64,
        #[serde(serialize_with = "canonical::f64")]
        neck_radius: f64,
        #[serde(serialize_with = "canonical::f64")]
        neck_height: f64,
    },
    /// Open-ended ring wall.
    Tube {
        #[serde(serialize_with = "canonical::f64")]
        inner_radius: f64,
        #[serde(serialize_with = "canonical::f64")]
        outer_radius: f64,
        #[serde(serialize_with = "canonical::f64")]
        height: f64,
    },
    /// Closed box with an empty interior cavity.
    HollowBox {
        #[serde(serialize_with = "canonical::array3")]
        size: [f64; 3],
        #[serde(serialize_with = "canonical::f64")]
        wall: f64,
    },
}

impl AssetShape {
    pub fn category(&self) -> &'static str {
        match self {
            AssetShape::Box { .. } => "box",
            AssetShape::Cylinder { .. } => "cylinder",
            AssetShape::Bowl { .. } => "bowl",
            AssetShape::Bottle { .. } => "bottle",
            AssetShape::Tube { .. } => "tube",
            AssetShape::HollowBox { .. } => "hollow_box",
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: &[f64]| v.iter().all(|x| x.is_finite() && *x > 0.0);
        let ok = match self {
            AssetShape::Box { size } => positive(size),
            AssetShape::Cylinder { radius, height } => positive(&[*radius, *height]),
            AssetShape::Bowl {
                bottom_radius,
                top_radius,
                height,
                wall,
            } => positive(&[*bottom_radius, *top_radius, *height, *wall]) && wall < bottom_radius && wall < height,
            AssetShape::Bottle {
                radius,
                height,
                neck_radius,
                neck_height,
            } => positive(&[*radius, *height, *neck_radius, *neck_height]) && neck_radius <= radius && *neck_height < *height,
            AssetShape::Tube {
                inner_radius,
                outer_radius,
                height,
            } => positive(&[*inner_radius, *outer_radius, *height]) && inner_radius < outer_radius,
            AssetShape::HollowBox { size, wall } => positive(size) && *wall > 0.0 && size.iter().all(|s| 2.0 * wall < *s),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid {} dimensions", self.category())))
        }
    }

    /// Mesh in the asset frame: z up, base on z = 0 for revolved shapes,
    /// centered at the origin for boxes.
    pub fn mesh(&self) -> Result<TriMesh> {
        self.validate()?;
        match *self {
            AssetShape::Box { size } => {
                let h = Vector3::from(size) / 2.0;
                Ok(TriMesh::cuboid(&Aabb::new(Point3::from(-h), Point3::from(h))))
            }
            AssetShape::Cylinder { radius, height } => {
                TriMesh::revolve(&[(0.0, 0.0), (radius, 0.0), (radius, height), (0.0, height)], REVOLVE_SEGMENTS)
            }
            AssetShape::Bowl {
                bottom_radius,
                top_radius,
                height,
                wall,
            } => TriMesh::revolve(
                &[
                    (0.0, 0.0),
                    (bottom_radius, 0.0),
                    (top_radius, height),
                    (top_radius - wall, height),
                    (bottom_radius - wall, wall),
                    (0.0, wall),
                ],
                REVOLVE_SEGMENTS,
            ),
            AssetShape::Bottle {
                radius,
                height,
                neck_radius,
                neck_height,
            } => {
                let shoulder = (height - neck_height) * 0.8;
                TriMesh::revolve(
                    &[
                        (0.0, 0.0),
                        (radius, 0.0),
                        (radius, shoulder),
                        (neck_radius, height - neck_height),
                        (neck_radius, height),
                        (0.0, height),
                    ],
                    REVOLVE_SEGMENTS,
                )
            }
            AssetShape::Tube {
                inner_radius,
                outer_radius,
                height,
            } => TriMesh::revolve(
                &[(inner_radius, 0.0), (outer_radius, 0.0), (outer_radius, height), (inner_radius, height)],
                REVOLVE_SEGMENTS * 2,
            ),
            AssetShape::HollowBox { size, wall } => {
                let h = Vector3::from(size) / 2.0;
                let outer = TriMesh::cuboid(&Aabb::new(Point3::from(-h), Point3::from(h)));
                let hi = h - Vector3::repeat(wall);
                let inner = TriMesh::cuboid(&Aabb::new(Point3::from(-hi), Point3::from(hi)));
                // inner surface faces into the cavity
                let flipped = TriMesh::new(
                    inner.vertices().to_vec(),
                    inner.triangles().iter().map(|t| [t[0], t[2], t[1]]).collect(),
                )?;
                Ok(outer.merge(&flipped))
            }
        }
    }

    /// Resting orientations with probabilities from the solid angle each
    /// support face subtends at the shape's center.
    fn resting_orientations(&self, mesh: &TriMesh) -> Vec<(Pose, f64)> {
        match *self {
            AssetShape::Box { size } | AssetShape::HollowBox { size, .. } => {
                let [sx, sy, sz] = size;
                vec![
                    (Pose::identity(), 2.0 * rect_solid_angle(sx, sy, sz / 2.0)),
                    (Pose::rot_y(FRAC_PI_2), 2.0 * rect_solid_angle(sz, sy, sx / 2.0)),
                    (Pose::rot_x(FRAC_PI_2), 2.0 * rect_solid_angle(sx, sz, sy / 2.0)),
                ]
            }
            AssetShape::Cylinder { radius, height } => {
                let end = disk_solid_angle(radius, height / 2.0);
                vec![(Pose::identity(), 2.0 * end), (Pose::rot_x(FRAC_PI_2), 4.0 * PI - 2.0 * end)]
            }
            AssetShape::Bottle { radius, .. } => {
                let zc = volume_centroid_z(mesh);
                let bottom = disk_solid_angle(radius, zc);
                vec![(Pose::identity(), bottom), (Pose::rot_x(FRAC_PI_2), 4.0 * PI - bottom)]
            }
            AssetShape::Bowl {
                bottom_radius,
                top_radius,
                height,
                ..
            } => {
                let zc = volume_centroid_z(mesh);
                vec![
                    (Pose::identity(), disk_solid_angle(bottom_radius, zc)),
                    (Pose::rot_x(PI), disk_solid_angle(top_radius, height - zc)),
                ]
            }
            AssetShape::Tube { .. } => vec![(Pose::identity(), 1.0)],
        }
    }
}

/// Solid angle of an `a x b` rectangle seen from distance `d` on its axis.
fn rect_solid_angle(a: f64, b: f64, d: f64) -> f64 {
    4.0 * ((a * b) / ((a * a + 4.0 * d * d) * (b * b + 4.0 * d * d)).sqrt()).asin()
}

/// Solid angle of a disk of radius `r` seen from distance `d` on its axis.
fn disk_solid_angle(r: f64, d: f64) -> f64 {
    TAU * (1.0 - d / (d * d + r * r).sqrt())
}

fn volume_centroid_z(mesh: &TriMesh) -> f64 {
    let mut vol = 0.0;
    let mut moment = 0.0;
    for i in 0..mesh.triangle_count() {
        let t = mesh.triangle(i);
        let v = t[0].coords.dot(&t[1].coords.cross(&t[2].coords)) / 6.0;
        vol += v;
        moment += v * (t[0].z + t[1].z + t[2].z) / 4.0;
    }
    moment / vol
}

#[derive(Clone, Debug, PartialEq)]
pub struct StablePose {
    pub pose: Pose,
    pub weight: f64,
}

/// A mesh with its resting poses; each resting pose puts the lowest vertex on z = 0.
#[derive(Clone, Debug)]
pub struct ObjectAsset {
    asset_id: String,
    shape: AssetShape,
    mesh: TriMesh,
    stable_poses: Vec<StablePose>,
}

impl ObjectAsset {
    pub fn from_shape(asset_id: impl Into<String>, shape: AssetShape) -> Result<ObjectAsset> {
        let mesh = shape.mesh()?;
        let raw = shape.resting_orientations(&mesh);
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        let stable_poses = raw
            .into_iter()
            .map(|(rot, w)| StablePose {
                pose: rest_on_plane(&mesh, &rot),
                weight: w / total,
            })
            .collect();
        Ok(ObjectAsset {
            asset_id: asset_id.into(),
            shape,
            mesh,
            stable_poses,
        })
    }

    /// Asset with caller-provided stable poses; weights are normalized.
    pub fn with_stable_poses(asset_id: impl Into<String>, shape: AssetShape, poses: Vec<StablePose>) -> Result<ObjectAsset> {
        let mesh = shape.mesh()?;
        let total: f64 = poses.iter().map(|p| p.weight).sum();
        if poses.iter().any(|p| p.weight < 0.0 || !p.weight.is_finite()) || (!poses.is_empty() && total <= 0.0) {
            return Err(Error::invalid("stable pose weights must be non-negative with positive sum"));
        }
        let stable_poses = poses
            .into_iter()
            .map(|p| StablePose {
                pose: p.pose,
                weight: p.weight / total,
            })
            .collect();
        Ok(ObjectAsset {
            asset_id: asset_id.into(),
            shape,
            mesh,
            stable_poses,
        })
    }

    pub fn asset_id(&self) -> &str {
        &self.asset_id
    }

    pub fn shape(&self) -> &AssetShape {
        &self.shape
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn stable_poses(&self) -> &[StablePose] {
        &self.stable_poses
    }
}

/// Rotation followed by the translation that centers the footprint at the
/// origin and lifts the lowest vertex to z = 0.
fn rest_on_plane(mesh: &TriMesh, rot: &Pose) -> Pose {
    let b = mesh.transformed(rot).aabb();
    let c = b.center();
    Pose::from_translation(Vector3::new(-c.x, -c.y, -b.min.z)).compose(rot)
}

/// Draws a resting pose by weight, then a uniform yaw about z and a uniform
/// position within `+-half_extent` of the table center.
pub fn sample_stable_pose(asset: &ObjectAsset, half_extent: [f64; 2], table_height: f64, seed_value: u64) -> Result<Pose> {
    let mut rng = seed::rng(seed_value);
    sample_stable_pose_with(asset, half_extent, table_height, &mut rng)
}

pub(crate) fn sample_stable_pose_with(
    asset: &ObjectAsset,
    half_extent: [f64; 2],
    table_height: f64,
    rng: &mut seed::Rng,
) -> Result<Pose> {
    if asset.stable_poses.is_empty() {
        return Err(Error::NoStablePoses(asset.asset_id.clone()));
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = asset.stable_poses.len() - 1;
    for (i, p) in asset.stable_poses.iter().enumerate() {
        acc += p.weight;
        if u < acc {
            chosen = i;
            break;
        }
    }
    // skip zero-weight tail entries picked only through rounding
    while asset.stable_poses[chosen].weight == 0.0 && chosen > 0 {
        chosen -= 1;
    }
    let yaw = rng.random::<f64>() * TAU;
    let x = (2.0 * rng.random::<f64>() - 1.0) * half_extent[0];
    let y = (2.0 * rng.random::<f64>() - 1.0) * half_extent[1];
    let placed = Pose::from_translation(Vector3::new(x, y, table_height))
        .compose(&Pose::rot_z(yaw))
        .compose(&asset.stable_poses[chosen].pose);
    Ok(placed)
}

/// Deterministic procedural asset set cycling through box, cylinder, bowl
/// and bottle categories. Every asset has a dimension that fits the jaw.
pub fn procedural_library(count: usize, seed_value: u64, prefix: &str) -> Vec<ObjectAsset> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = seed::rng(seed::derive(seed_value, seed::streams::ASSETS, i as u64));
        let mut r = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
        let shape = match i % 4 {
            0 => AssetShape::Box {
                size: [r(0.03, 0.06), r(0.04, 0.10), r(0.04, 0.12)],
            },
            1 => AssetShape::Cylinder {
                radius: r(0.015, 0.03),
                height: r(0.05, 0.14),
            },
            2 => {
                let bottom = r(0.025, 0.04);
                AssetShape::Bowl {
                    bottom_radius: bottom,
                    top_radius: bottom + r(0.015, 0.03),
                    height: r(0.04, 0.06),
                    wall: 0.006,
                }
            }
            _ => {
                let height = r(0.10, 0.18);
                AssetShape::Bottle {
                    radius: r(0.02, 0.03),
                    height,
                    neck_radius: r(0.009, 0.014),
                    neck_height: height * 0.25,
                }
            }
        };
        let id = format!("{prefix}-{}-{i:03}", shape.category());
        out.push(ObjectAsset::from_shape(id, shape).expect("procedural dimensions are valid"));
    }
    out
}
