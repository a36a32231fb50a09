//! Synthetic segmentation errors: boundary label flips and occluded-instance merges.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, PointGrid, TABLE_INSTANCE};
use crate::seed;

/// Width of the boundary band in meters.
pub const BOUNDARY_BAND: f64 = 0.005;

/// Nearest point of a different object instance within the boundary band,
/// for every point. Table points and table neighbors are ignored.
pub fn boundary_neighbors(cloud: &PointCloud) -> Vec<Option<usize>> {
    let pts = cloud.points();
    let ids = cloud.instance_ids();
    let grid = PointGrid::new(pts, BOUNDARY_BAND);
    (0..cloud.len())
        .map(|i| {
            if ids[i] == TABLE_INSTANCE {
                return None;
            }
            grid.within(&pts[i], BOUNDARY_BAND)
                .into_iter()
                .filter(|&j| ids[j] != ids[i] && ids[j] != TABLE_INSTANCE)
                .min_by(|&a, &b| {
                    let da = (pts[a] - pts[i]).norm_squared();
                    let db = (pts[b] - pts[i]).norm_squared();
                    da.total_cmp(&db).then(a.cmp(&b))
                })
        })
        .collect()
}

/// Instances that are partially hidden by a neighbor, mapped to their
/// largest-contact neighbor.
///
/// An instance counts as occluded by a neighbor when, over their shared
/// boundary band, its points lie farther from the viewpoint on average
/// than the neighbor's. Clouds without a viewpoint have no occluded instances.
pub fn occluded_instances(cloud: &PointCloud, neighbors: &[Option<usize>]) -> BTreeMap<u32, u32> {
    let mut out = BTreeMap::new();
    let Some(eye) = cloud.viewpoint() else {
        return out;
    };
    let pts = cloud.points();
    let ids = cloud.instance_ids();
    // (a, b) -> (contact count of a toward b, summed range of those a points)
    let mut contact: BTreeMap<(u32, u32), (usize, f64)> = BTreeMap::new();
    for (i, n) in neighbors.iter().enumerate() {
        if let Some(j) = n {
            let e = contact.entry((ids[i], ids[*j])).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += (pts[i] - eye).norm();
        }
    }
    let mut largest: BTreeMap<u32, (usize, u32)> = BTreeMap::new();
    let mut occluded: Vec<u32> = Vec::new();
    for (&(a, b), &(count, range)) in &contact {
        let best = largest.entry(a).or_insert((count, b));
        if count > best.0 {
            *best = (count, b);
        }
        if let Some(&(bc, br)) = contact.get(&(b, a)) {
            if range / count as f64 > br / bc as f64 {
                occluded.push(a);
            }
        }
    }
    for a in occluded {
        out.insert(a, largest[&a].1);
    }
    out
}

/// Flips boundary-band labels to the neighbor's label with probability
/// `flip_prob`, then with probability `merge_prob` relabels each occluded
/// instance wholly as its largest-contact neighbor. Point positions,
/// normals and order are unchanged.
pub fn corrupt_segmentation(cloud: &PointCloud, flip_prob: f64, merge_prob: f64, seed_value: u64) -> Result<PointCloud> {
    for p in [flip_prob, merge_prob] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("corruption probabilities must lie in [0, 1]"));
        }
    }
    let ids = cloud.instance_ids();
    let neighbors = boundary_neighbors(cloud);
    let mut rng = seed::rng(seed::derive(seed_value, seed::streams::CORRUPT, 0));
    let mut labels = ids.to_vec();
    for (i, n) in neighbors.iter().enumerate() {
        if let Some(j) = n {
            if rng.random::<f64>() < flip_prob {
                labels[i] = ids[*j];
            }
        }
    }

    let mut merge: BTreeMap<u32, u32> = BTreeMap::new();
    for (a, b) in occluded_instances(cloud, &neighbors) {
        if rng.random::<f64>() < merge_prob {
            merge.insert(a, b);
        }
    }
    let resolve = |mut id: u32| {
        // follow merge chains; a cycle stops at its first repeat
        let mut seen = Vec::new();
        while let Some(&next) = merge.get(&id) {
            if seen.contains(&next) {
                break;
            }
            seen.push(id);
            id = next;
        }
        id
    };
    for l in labels.iter_mut() {
        *l = resolve(*l);
    }
    let mut out = cloud.clone();
    out.set_instance_ids(labels)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;

    /// Two abutting 1 mm grids: instance 1 on x < 0, instance 2 on x >= 0.
    fn abutting(viewpoint: Option<Point3<f64>>, tilt: f64) -> PointCloud {
        let mut pts = Vec::new();
        let mut ids = Vec::new();
        for i in -40..40 {
            for j in -20..20 {
                let x = i as f64 * 0.001 + 0.0005;
                let z = if x < 0.0 { 0.0 } else { tilt };
                pts.push(Point3::new(x, j as f64 * 0.001, z));
                ids.push(if x < 0.0 { 1 } else { 2 });
            }
        }
        PointCloud::new(pts, ids).unwrap().with_viewpoint(viewpoint)
    }

    #[test]
    fn zero_probabilities_are_identity() {
        let c = abutting(Some(Point3::new(0.0, 0.0, 1.0)), 0.001);
        assert_eq!(corrupt_segmentation(&c, 0.0, 0.0, 3).unwrap(), c);
    }

    #[test]
    fn half_flip_rate() {
        let c = abutting(None, 0.0);
        let band: Vec<usize> = boundary_neighbors(&c)
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.map(|_| i))
            .collect();
        // 4 columns either side lie within 5 mm of the seam
        assert_eq!(band.len(), 8 * 40);
        let out = corrupt_segmentation(&c, 0.5, 0.0, 11).unwrap();
        let flipped = band.iter().filter(|&&i| out.instance_ids()[i] != c.instance_ids()[i]).count();
        let rate = flipped as f64 / band.len() as f64;
        assert!((rate - 0.5).abs() < 0.05, "rate {rate}");
        let outside_same = (0..c.len())
            .filter(|i| !band.contains(i))
            .all(|i| out.instance_ids()[i] == c.instance_ids()[i]);
        assert!(outside_same);
        assert_eq!(out.points(), c.points());
    }

    #[test]
    fn occluded_instance_merges() {
        // instance 2 sits 1 mm lower, farther from an overhead camera
        let c = abutting(Some(Point3::new(0.0, 0.0, 1.0)), -0.001);
        let occ = occluded_instances(&c, &boundary_neighbors(&c));
        assert_eq!(occ.into_iter().collect::<Vec<_>>(), vec![(2, 1)]);
        let out = corrupt_segmentation(&c, 0.0, 1.0, 5).unwrap();
        assert!(!out.has_instance(2));
        assert_eq!(out.count_instance(1), c.len());
    }

    #[test]
    fn table_is_never_relabelled() {
        let mut c = abutting(None, 0.0);
        let ids: Vec<u32> = c.instance_ids().iter().map(|&i| if i == 2 { TABLE_INSTANCE } else { i }).collect();
        c.set_instance_ids(ids).unwrap();
        assert_eq!(corrupt_segmentation(&c, 1.0, 1.0, 2).unwrap(), c);
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(corrupt_segmentation(&abutting(None, 0.0), 1.5, 0.0, 0).is_err());
    }
}
