use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

pub const TABLE_INSTANCE: u32 = 0;
pub const SOURCE_SCENE: u8 = 0;
pub const SOURCE_GRIPPER: u8 = 1;

/// Points with per-point instance labels and a scene/gripper source flag.
///
/// Normals are optional and, when present, parallel to the points. The
/// viewpoint records the camera center for rendered clouds.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3<f64>>,
    instance_ids: Vec<u32>,
    source_flags: Vec<u8>,
    normals: Option<Vec<Vector3<f64>>>,
    viewpoint: Option<Point3<f64>>,
}

impl Default for PointCloud {
    fn default() -> Self {
        Self::empty()
    }
}

impl PointCloud {
    pub fn empty() -> Self {
        PointCloud {
            points: Vec::new(),
            instance_ids: Vec::new(),
            source_flags: Vec::new(),
            normals: None,
            viewpoint: None,
        }
    }

    pub fn new(points: Vec<Point3<f64>>, instance_ids: Vec<u32>) -> Result<Self> {
        let n = points.len();
        Self::from_parts(points, instance_ids, vec![SOURCE_SCENE; n], None)
    }

    pub fn from_parts(
        points: Vec<Point3<f64>>,
        instance_ids: Vec<u32>,
        source_flags: Vec<u8>,
        normals: Option<Vec<Vector3<f64>>>,
    ) -> Result<Self> {
        let n = points.len();
        if instance_ids.len() != n || source_flags.len() != n || normals.as_ref().is_some_and(|v| v.len() != n) {
            return Err(Error::invalid("point cloud arrays differ in length"));
        }
        if points.iter().any(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid("non-finite point"));
        }
        if source_flags.iter().any(|&f| f > 1) {
            return Err(Error::invalid("source flag must be 0 or 1"));
        }
        Ok(PointCloud {
            points,
            instance_ids,
            source_flags,
            normals,
            viewpoint: None,
        })
    }

    pub fn with_normals(mut self, normals: Vec<Vector3<f64>>) -> Result<Self> {
        if normals.len() != self.points.len() {
            return Err(Error::invalid("normal count differs from point count"));
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn with_viewpoint(mut self, viewpoint: Option<Point3<f64>>) -> Self {
        self.viewpoint = viewpoint;
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    pub fn instance_ids(&self) -> &[u32] {
        &self.instance_ids
    }

    pub fn source_flags(&self) -> &[u8] {
        &self.source_flags
    }

    pub fn normals(&self) -> Option<&[Vector3<f64>]> {
        self.normals.as_deref()
    }

    pub fn viewpoint(&self) -> Option<Point3<f64>> {
        self.viewpoint
    }

    pub fn has_instance(&self, id: u32) -> bool {
        self.instance_ids.contains(&id)
    }

    /// Distinct instance ids in ascending order.
    pub fn instances(&self) -> Vec<u32> {
        let mut ids = self.instance_ids.clone();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn count_instance(&self, id: u32) -> usize {
        self.instance_ids.iter().filter(|&&i| i == id).count()
    }

    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            instance_ids: indices.iter().map(|&i| self.instance_ids[i]).collect(),
            source_flags: indices.iter().map(|&i| self.source_flags[i]).collect(),
            normals: self.normals.as_ref().map(|n| indices.iter().map(|&i| n[i]).collect()),
            viewpoint: self.viewpoint,
        }
    }

    pub fn filter(&self, mut keep: impl FnMut(usize) -> bool) -> PointCloud {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        self.select(&idx)
    }

    pub fn instance_subset(&self, id: u32) -> PointCloud {
        self.filter(|i| self.instance_ids[i] == id)
    }

    pub fn centroid_of(&self, id: u32) -> Option<Point3<f64>> {
        let mut sum = Vector3::zeros();
        let mut n = 0usize;
        for (p, &i) in self.points.iter().zip(&self.instance_ids) {
            if i == id {
                sum += p.coords;
                n += 1;
            }
        }
        (n > 0).then(|| Point3::from(sum / n as f64))
    }

    pub fn set_instance_ids(&mut self, ids: Vec<u32>) -> Result<()> {
        if ids.len() != self.points.len() {
            return Err(Error::invalid("label count differs from point count"));
        }
        self.instance_ids = ids;
        Ok(())
    }

    /// Concatenates `other` after `self`. Normals are kept only if both carry them.
    pub fn append(&mut self, other: &PointCloud) {
        self.points.extend_from_slice(&other.points);
        self.instance_ids.extend_from_slice(&other.instance_ids);
        self.source_flags.extend_from_slice(&other.source_flags);
        self.normals = match (self.normals.take(), &other.normals) {
            (Some(mut a), Some(b)) => {
                a.extend_from_slice(b);
                Some(a)
            }
            _ => None,
        };
    }

    pub fn farthest_point_sample(&self, k: usize, seed_index: usize) -> Result<Vec<usize>> {
        farthest_point_sample(&self.points, k, seed_index)
    }
}

/// Greedy farthest point sampling.
///
/// The first index is `seed_index`; each following index maximizes the
/// distance to the already selected set, ties going to the lowest index.
pub fn farthest_point_sample(points: &[Point3<f64>], k: usize, seed_index: usize) -> Result<Vec<usize>> {
    if k > points.len() {
        return Err(Error::InsufficientPoints {
            requested: k,
            available: points.len(),
        });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    if seed_index >= points.len() {
        return Err(Error::invalid(format!("seed index {seed_index} out of range")));
    }
    let mut selected = Vec::with_capacity(k);
    let mut dist = vec![f64::INFINITY; points.len()];
    let mut current = seed_index;
    for _ in 0..k {
        selected.push(current);
        let c = points[current];
        dist[current] = f64::NEG_INFINITY;
        let mut best = usize::MAX;
        let mut best_d = f64::NEG_INFINITY;
        for (i, p) in points.iter().enumerate() {
            let d = &mut dist[i];
            if *d == f64::NEG_INFINITY {
                continue;
            }
            let dd = (p - c).norm_squared();
            if dd < *d {
                *d = dd;
            }
            if *d > best_d {
                best_d = *d;
                best = i;
            }
        }
        if best == usize::MAX {
            break;
        }
        current = best;
    }
    Ok(selected)
}

/// Uniform hash grid over points for fixed-radius neighbor queries.
pub struct PointGrid<'a> {
    points: &'a [Point3<f64>],
    cell: f64,
    cells: HashMap<[i64; 3], Vec<u32>>,
}

impl<'a> PointGrid<'a> {
    pub fn new(points: &'a [Point3<f64>], cell: f64) -> Self {
        let mut cells: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(p, cell)).or_default().push(i as u32);
        }
        PointGrid { points, cell, cells }
    }

    fn key(p: &Point3<f64>, cell: f64) -> [i64; 3] {
        [
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        ]
    }

    /// Indices within `radius` (strictly less) of `q`, ascending.
    pub fn within(&self, q: &Point3<f64>, radius: f64) -> Vec<usize> {
        let r2 = radius * radius;
        let lo = Self::key(&(q - Vector3::repeat(radius)), self.cell);
        let hi = Self::key(&(q + Vector3::repeat(radius)), self.cell);
        let mut out = Vec::new();
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    if let Some(v) = self.cells.get(&[x, y, z]) {
                        out.extend(
                            v.iter()
                                .map(|&i| i as usize)
                                .filter(|&i| (self.points[i] - q).norm_squared() < r2),
                        );
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}
