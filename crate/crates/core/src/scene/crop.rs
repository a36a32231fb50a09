use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{farthest_point_sample, PointCloud, Vector3};
use crate::seed;

pub const DEFAULT_BOX_SIZE: f64 = 0.40;
pub const DEFAULT_CENTER_NOISE: f64 = 0.02;
pub const DEFAULT_CROP_POINTS: usize = 4096;

/// Scene crop `X` and its target subset `X_o`.
#[derive(Clone, Debug, PartialEq)]
pub struct Crop {
    pub scene: PointCloud,
    pub object: PointCloud,
}

/// Cube crop around the (noisy) target centroid, resized to exactly
/// `n_points`. Downsampling uses FPS from a random start; selected points
/// keep their input order. Upsampling appends draws with replacement.
pub fn crop_target(
    cloud: &PointCloud,
    target: u32,
    box_size: f64,
    center_noise: f64,
    n_points: usize,
    seed_value: u64,
) -> Result<Crop> {
    if !(box_size > 0.0) || !(center_noise >= 0.0) {
        return Err(Error::invalid("crop box size must be positive and noise non-negative"));
    }
    if n_points == 0 {
        return Err(Error::invalid("crop point count must be positive"));
    }
    let centroid = cloud.centroid_of(target).ok_or(Error::InstanceAbsent(target))?;
    let mut rng = seed::rng(seed::derive(seed_value, seed::streams::CROP, target as u64));
    let offset = if center_noise > 0.0 {
        loop {
            let v = Vector3::new(
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
            );
            if v.norm_squared() <= 1.0 {
                break v * center_noise;
            }
        }
    } else {
        Vector3::zeros()
    };
    let center = centroid + offset;
    let h = box_size / 2.0;
    let inside: Vec<usize> = (0..cloud.len())
        .filter(|&i| (cloud.points()[i] - center).iter().all(|c| c.abs() <= h))
        .collect();
    if inside.is_empty() {
        return Err(Error::Empty("crop box"));
    }
    let mut chosen: Vec<usize> = if inside.len() > n_points {
        let pts: Vec<_> = inside.iter().map(|&i| cloud.points()[i]).collect();
        let start = rng.random_range(0..pts.len());
        let mut sel: Vec<usize> = farthest_point_sample(&pts, n_points, start)?
            .into_iter()
            .map(|k| inside[k])
            .collect();
        sel.sort_unstable();
        sel
    } else {
        inside.clone()
    };
    while chosen.len() < n_points {
        chosen.push(inside[rng.random_range(0..inside.len())]);
    }
    let scene = cloud.select(&chosen);
    let object = scene.instance_subset(target);
    Ok(Crop { scene, object })
}
