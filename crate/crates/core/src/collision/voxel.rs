use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{Error, Result};
use crate::geometry::{Aabb, GripperModel, PointCloud, Pose, Point3, Vector3, TABLE_INSTANCE};

pub const DEFAULT_VOXEL_SIZE: f64 = 0.02;
pub const DEFAULT_POINTS_PER_OBJECT: usize = 100;

/// Occupied cubes of side `voxel_size`; cell `i` spans
/// `origin + i * voxel_size .. origin + (i + 1) * voxel_size`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoxelGrid {
    #[serde(serialize_with = "canonical::f64")]
    pub voxel_size: f64,
    #[serde(serialize_with = "canonical::array3")]
    pub origin: [f64; 3],
    pub occupied: BTreeSet<[i64; 3]>,
}

impl VoxelGrid {
    pub fn new(voxel_size: f64) -> Result<VoxelGrid> {
        if !(voxel_size > 0.0 && voxel_size.is_finite()) {
            return Err(Error::invalid("voxel size must be positive"));
        }
        Ok(VoxelGrid {
            voxel_size,
            origin: [0.0; 3],
            occupied: BTreeSet::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn cell_of(&self, p: &Point3<f64>) -> [i64; 3] {
        let o = Vector3::from(self.origin);
        let q = (p.coords - o) / self.voxel_size;
        [q.x.floor() as i64, q.y.floor() as i64, q.z.floor() as i64]
    }

    pub fn insert_point(&mut self, p: &Point3<f64>) {
        let c = self.cell_of(p);
        self.occupied.insert(c);
    }

    pub fn cell_center(&self, c: [i64; 3]) -> Point3<f64> {
        let s = self.voxel_size;
        Point3::new(
            self.origin[0] + (c[0] as f64 + 0.5) * s,
            self.origin[1] + (c[1] as f64 + 0.5) * s,
            self.origin[2] + (c[2] as f64 + 0.5) * s,
        )
    }

    pub fn cell_box(&self, c: [i64; 3]) -> Aabb {
        let h = Vector3::repeat(self.voxel_size / 2.0);
        let m = self.cell_center(c);
        Aabb::new(m - h, m + h)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid serializes")
    }
}

/// Occupancy from up to `points_per_object` FPS-selected points per object
/// instance. The table is never voxelized; the target is skipped when
/// `exclude_target` is set.
pub fn voxelize_scene(
    cloud: &PointCloud,
    points_per_object: usize,
    voxel_size: f64,
    exclude_target: bool,
    target: u32,
) -> Result<VoxelGrid> {
    let mut grid = VoxelGrid::new(voxel_size)?;
    for id in cloud.instances() {
        if id == TABLE_INSTANCE || (exclude_target && id == target) {
            continue;
        }
        let sub = cloud.instance_subset(id);
        let k = points_per_object.min(sub.len());
        for i in sub.farthest_point_sample(k, 0)? {
            grid.insert_point(&sub.points()[i]);
        }
    }
    Ok(grid)
}

/// Whether the gripper body at `g` intersects any occupied cube.
pub fn voxel_collision(gripper: &GripperModel, g: &Pose, grid: &VoxelGrid) -> bool {
    if grid.is_empty() {
        return false;
    }
    let body = gripper.body_bvh_at(g);
    let bounds = body.bounds();
    let lo = grid.cell_of(&bounds.min);
    let hi = grid.cell_of(&bounds.max);
    grid.occupied.iter().any(|&c| {
        if (0..3).any(|k| c[k] < lo[k] || c[k] > hi[k]) {
            return false;
        }
        let b = grid.cell_box(c);
        // a cube swallowed by the body has its center inside the body
        body.intersects_box(&b) || gripper.body_contains_local(&g.inverse_transform_point(&b.center()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud_of(points: Vec<Point3<f64>>, id: u32) -> PointCloud {
        let n = points.len();
        PointCloud::new(points, vec![id; n]).unwrap()
    }

    #[test]
    fn empty_cloud_empty_grid() {
        let g = voxelize_scene(&PointCloud::empty(), 100, 0.02, false, 1).unwrap();
        assert!(g.is_empty());
        assert!(!voxel_collision(&GripperModel::default(), &Pose::identity(), &g));
    }

    #[test]
    fn few_points_all_used() {
        // 40 points spaced wider than a voxel
        let pts: Vec<_> = (0..40).map(|i| Point3::new(i as f64 * 0.05 + 0.01, 0.01, 0.01)).collect();
        let g = voxelize_scene(&cloud_of(pts, 2), 100, 0.02, false, 1).unwrap();
        assert_eq!(g.len(), 40);
    }

    #[test]
    fn excludes_target_and_table() {
        let mut c = cloud_of(vec![Point3::new(0.01, 0.01, 0.01)], 1);
        c.append(&cloud_of(vec![Point3::new(0.21, 0.01, 0.01)], 2));
        c.append(&cloud_of(vec![Point3::new(0.51, 0.01, 0.01)], TABLE_INSTANCE));
        let with = voxelize_scene(&c, 10, 0.02, false, 1).unwrap();
        let without = voxelize_scene(&c, 10, 0.02, true, 1).unwrap();
        assert_eq!(with.len(), 2);
        assert_eq!(without.occupied.iter().copied().collect::<Vec<_>>(), vec![[10, 0, 0]]);
    }

    #[test]
    fn gripper_on_voxel_collides() {
        let gr = GripperModel::default();
        let c = gr.body_centroid();
        let mut grid = VoxelGrid::new(0.02).unwrap();
        grid.insert_point(&Point3::new(0.5, 0.5, 0.5));
        let center = grid.cell_center(grid.cell_of(&Point3::new(0.5, 0.5, 0.5)));
        let pose = Pose::from_translation(center.coords - c.coords);
        assert!(voxel_collision(&gr, &pose, &grid));
        let far = Pose::from_translation(Vector3::new(2.0, 0.0, 0.0)).compose(&pose);
        assert!(!voxel_collision(&gr, &far, &grid));
    }

    #[test]
    fn json_dump_round_trips() {
        let mut grid = VoxelGrid::new(0.02).unwrap();
        grid.insert_point(&Point3::new(-0.03, 0.0, 0.07));
        let back: VoxelGrid = serde_json::from_str(&grid.to_json()).unwrap();
        assert_eq!(back, grid);
    }
}
