use crate::error::{Error, Result};
use crate::geometry::{GripperModel, Point3, PointCloud, Pose};

/// Points within this distance of the extreme closing-axis coordinate count
/// as jaw contacts.
pub const CONTACT_BAND: f64 = 0.004;

/// Points outside the jaw opening this close to the body count as inside it.
pub const BODY_MARGIN: f64 = 0.005;

/// Points in the closing region this close to the palm count as inside the body.
pub const PALM_CLEARANCE: f64 = 0.003;

/// Fraction of the opposite side's score credited to a jaw side with no good
/// contact whose presumed contact point is hidden from the viewpoint.
pub const HIDDEN_CREDIT: f64 = 0.8;

/// Observed points within this distance of a sight line block it.
pub const OCCLUSION_RADIUS: f64 = 0.004;

const OCCLUSION_GAP: f64 = 0.005;

/// Gap between a hidden side's observed extreme and its jaw at which the
/// hidden credit is no longer scaled down.
pub const HIDDEN_CLEARANCE: f64 = 0.02;

struct Side {
    total: usize,
    ok: usize,
    /// Bounds of the good contacts in the gripper y-z plane.
    patch: [f64; 4],
}

impl Default for Side {
    fn default() -> Self {
        Side {
            total: 0,
            ok: 0,
            patch: [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY],
        }
    }
}

impl Side {
    fn fraction(&self) -> f64 {
        self.ok as f64 / self.total as f64
    }
}

/// Whether some cloud point lies on the sight line from `eye` to `q`,
/// clearly in front of `q`.
fn hidden(q: &Point3<f64>, eye: &Point3<f64>, cloud: &PointCloud) -> bool {
    let d = q - eye;
    let len = d.norm();
    if len <= OCCLUSION_GAP {
        return false;
    }
    let u = d / len;
    cloud.points().iter().any(|p| {
        let w = p - eye;
        let t = w.dot(&u);
        t > 0.0 && t < len - OCCLUSION_GAP && (w - u * t).norm_squared() < OCCLUSION_RADIUS * OCCLUSION_RADIUS
    })
}

/// Geometric grasp quality in `[0, 1]`.
///
/// Within the closing region, the points nearest each jaw (within
/// [`CONTACT_BAND`] of the extreme closing-axis coordinate) are the
/// contacts. Each side scores the fraction of its contacts whose outward
/// normal lies in the friction cone (half-angle `atan(mu)`) opposing that
/// jaw. A side with no good contact still scores when the other side has
/// good contacts and the patch they span, moved across to this side's
/// extreme, is occluded from the cloud's viewpoint at its corners and
/// center. It then gets [`HIDDEN_CREDIT`] times the other side's score,
/// times the fraction of the finger width that patch spans, scaled down
/// linearly when its extreme lies less than [`HIDDEN_CLEARANCE`] inside the
/// jaw. Clouds without a viewpoint never earn that credit.
///
/// The score is the smaller side score divided by `1 + k`, where `k` is the
/// number of points inside the gripper body, within [`PALM_CLEARANCE`] of
/// the palm, or outside the jaw opening along the closing axis and within
/// [`BODY_MARGIN`] of the body. Empty closing region gives 0.
pub fn antipodal_score(g: &Pose, cloud: &PointCloud, gripper: &GripperModel, friction_mu: f64) -> Result<f64> {
    let normals = cloud.normals().ok_or(Error::MissingNormals)?;
    if !(friction_mu >= 0.0) {
        return Err(Error::invalid("friction coefficient must be non-negative"));
    }
    let cos_cone = (1.0 / (1.0 + friction_mu * friction_mu)).sqrt();
    let region = gripper.closing_region();
    let reach = gripper
        .body_boxes()
        .iter()
        .fold(*region, |a, b| a.union(b))
        .inflate(BODY_MARGIN);
    let inv = g.inverse();
    let mut contacts = Vec::new();
    let mut inside_body = 0usize;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (p, n) in cloud.points().iter().zip(normals) {
        let q = inv.transform_point(p);
        if !reach.contains(&q) {
            continue;
        }
        if gripper.body_contains_local(&q) || (region.contains(&q) && q.z < region.min.z + PALM_CLEARANCE) {
            inside_body += 1;
        } else if region.contains(&q) {
            lo = lo.min(q.x);
            hi = hi.max(q.x);
            contacts.push((q, inv.transform_vector(n).x));
        } else if (q.x < region.min.x || q.x > region.max.x) && gripper.body_distance_local(&q) <= BODY_MARGIN {
            inside_body += 1;
        }
    }
    if contacts.is_empty() {
        return Ok(0.0);
    }
    let side = |near: &dyn Fn(f64) -> bool, good: &dyn Fn(f64) -> bool| {
        let mut s = Side::default();
        for (q, nx) in &contacts {
            if near(q.x) {
                s.total += 1;
                if good(*nx) {
                    s.ok += 1;
                    s.patch[0] = s.patch[0].min(q.y);
                    s.patch[1] = s.patch[1].max(q.y);
                    s.patch[2] = s.patch[2].min(q.z);
                    s.patch[3] = s.patch[3].max(q.z);
                }
            }
        }
        s
    };
    // the jaw at -x pushes along +x, so its contacts face -x
    let left = side(&|x| x <= lo + CONTACT_BAND, &|nx| -nx >= cos_cone);
    let right = side(&|x| x >= hi - CONTACT_BAND, &|nx| nx >= cos_cone);
    let credit = |this: &Side, other: &Side, extreme: f64, clearance: f64| {
        if this.ok > 0 {
            return this.fraction();
        }
        let (Some(eye), true) = (cloud.viewpoint(), other.ok > 0 && clearance > 0.0) else {
            return 0.0;
        };
        let [y0, y1, z0, z1] = other.patch;
        let probes = [(y0, z0), (y0, z1), (y1, z0), (y1, z1), ((y0 + y1) / 2.0, (z0 + z1) / 2.0)];
        if probes
            .iter()
            .all(|&(y, z)| hidden(&g.transform_point(&Point3::new(extreme, y, z)), &eye, cloud))
        {
            let coverage = ((y1 - y0) / (region.max.y - region.min.y)).min(1.0);
            HIDDEN_CREDIT * other.fraction() * coverage * (clearance / HIDDEN_CLEARANCE).min(1.0)
        } else {
            0.0
        }
    };
    let l = credit(&left, &right, lo, lo - region.min.x);
    let r = credit(&right, &left, hi, region.max.x - hi);
    Ok(l.min(r) / (1.0 + inside_body as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vector3;

    /// Two faces of a 2 cm thick plate at the center of the closing region,
    /// spanning the finger depth, with outward normals.
    fn plate(perpendicular: bool) -> PointCloud {
        let g = GripperModel::default();
        let c = g.closing_region().center();
        let mut pts = Vec::new();
        let mut normals = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                let a = -0.008 + i as f64 * 0.0018;
                let b = -0.02 + j as f64 * 0.004;
                for s in [-1.0, 1.0] {
                    if perpendicular {
                        pts.push(c + Vector3::new(s * 0.01, a, b));
                        normals.push(Vector3::new(s, 0.0, 0.0));
                    } else {
                        pts.push(c + Vector3::new(a * 3.0, s * 0.005, b));
                        normals.push(Vector3::new(0.0, s, 0.0));
                    }
                }
            }
        }
        let n = pts.len();
        PointCloud::new(pts, vec![1; n]).unwrap().with_normals(normals).unwrap()
    }

    #[test]
    fn empty_region_is_zero() {
        let g = GripperModel::default();
        let far = PointCloud::new(vec![Point3::new(5.0, 0.0, 0.0)], vec![1])
            .unwrap()
            .with_normals(vec![Vector3::x()])
            .unwrap();
        assert_eq!(antipodal_score(&Pose::identity(), &far, &g, 0.5).unwrap(), 0.0);
        assert!(antipodal_score(&Pose::identity(), &PointCloud::new(vec![], vec![]).unwrap(), &g, 0.5).is_err());
    }

    #[test]
    fn perpendicular_plate_scores_one() {
        let g = GripperModel::default();
        assert_eq!(antipodal_score(&Pose::identity(), &plate(true), &g, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn parallel_plate_scores_zero() {
        let g = GripperModel::default();
        for mu in [0.0, 0.5, 0.99] {
            assert_eq!(antipodal_score(&Pose::identity(), &plate(false), &g, mu).unwrap(), 0.0);
        }
    }

    #[test]
    fn cone_boundary() {
        // normals tilted 30 degrees off the closing axis: inside the cone for
        // mu = 0.6 (31 degrees), outside for mu = 0.5 (26.6 degrees)
        let g = GripperModel::default();
        let base = plate(true);
        let t = 30f64.to_radians();
        let tilted: Vec<_> = base
            .normals()
            .unwrap()
            .iter()
            .map(|n| Vector3::new(n.x * t.cos(), 0.0, t.sin()))
            .collect();
        let c = base.clone().with_normals(tilted).unwrap();
        assert_eq!(antipodal_score(&Pose::identity(), &c, &g, 0.6).unwrap(), 1.0);
        assert_eq!(antipodal_score(&Pose::identity(), &c, &g, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn body_points_reduce_score() {
        let g = GripperModel::default();
        let mut c = plate(true);
        let extra = PointCloud::new(vec![g.body_centroid()], vec![1])
            .unwrap()
            .with_normals(vec![Vector3::z()])
            .unwrap();
        c.append(&extra);
        assert_eq!(antipodal_score(&Pose::identity(), &c, &g, 0.5).unwrap(), 0.5);
    }

    /// One face at local x = -0.01 facing the -x jaw, plus a strip near the
    /// palm facing it, so the +x jaw sees only palm-facing points.
    fn ledge(viewpoint: Option<Point3<f64>>) -> PointCloud {
        let c = GripperModel::default().closing_region().center();
        let mut pts = Vec::new();
        let mut normals = Vec::new();
        for i in 0..9 {
            for j in 0..16 {
                let y = -0.008 + i as f64 * 0.002;
                pts.push(c + Vector3::new(-0.01, y, -0.015 + j as f64 * 0.002));
                normals.push(-Vector3::x());
                if j < 11 {
                    pts.push(c + Vector3::new(-0.01 + j as f64 * 0.002, y, -0.02));
                    normals.push(-Vector3::z());
                }
            }
        }
        let n = pts.len();
        PointCloud::new(pts, vec![1; n]).unwrap().with_normals(normals).unwrap().with_viewpoint(viewpoint)
    }

    #[test]
    fn one_sided_contact_needs_occlusion() {
        let g = GripperModel::default();
        let c = g.closing_region().center();
        let score = |v: Option<Point3<f64>>| antipodal_score(&Pose::identity(), &ledge(v), &g, 0.5).unwrap();
        assert_eq!(score(None), 0.0);
        // looking at the good face: the far jaw's contact would be behind it.
        // 144 face points and 27 strip points in the near band; the face
        // spans 16 of the 20 mm finger width
        let visible = 144.0 / 171.0;
        let front = Some(c + Vector3::new(-1.0, 0.0, 0.0));
        assert!((score(front) - HIDDEN_CREDIT * visible * 0.8).abs() < 1e-12);
        // looking from the far side: that contact point is in plain view
        assert_eq!(score(Some(c + Vector3::new(1.0, 0.0, 0.0))), 0.0);
        // far extreme 10 mm from the jaw instead of 30 mm halves the credit
        let shifted = Pose::from_translation(Vector3::new(-0.02, 0.0, 0.0));
        let s = antipodal_score(&shifted, &ledge(front), &g, 0.5).unwrap();
        assert!((s - HIDDEN_CREDIT * visible * 0.8 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn points_grazing_a_finger_count_as_body() {
        let g = GripperModel::default();
        let r = *g.closing_region();
        let tip = Point3::new(r.min.x - 0.005, 0.0, r.max.z + 0.003);
        let inside_opening = Point3::new(r.min.x + 0.002, 0.0, r.max.z + 0.003);
        for (p, expected) in [(tip, 0.5), (inside_opening, 1.0)] {
            let mut c = plate(true);
            let extra = PointCloud::new(vec![p], vec![1]).unwrap().with_normals(vec![Vector3::z()]).unwrap();
            c.append(&extra);
            assert_eq!(antipodal_score(&Pose::identity(), &c, &g, 0.5).unwrap(), expected);
        }
    }
}
