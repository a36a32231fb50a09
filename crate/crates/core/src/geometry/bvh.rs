//! Bounding-volume hierarchy over a triangle mesh.
//!
//! Read-only after construction; all queries take `&self` and may run
//! concurrently.

use nalgebra::{Point3, Vector3};

use super::mesh::TriMesh;
use super::primitives::{
    point_triangle_distance, ray_triangle, triangle_aabb, triangle_box_intersect, triangle_distance,
    triangles_intersect, winding_contribution, Aabb, Triangle,
};

const LEAF_SIZE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    /// Index into the source mesh's triangle list.
    pub triangle: usize,
}

#[derive(Clone, Debug)]
struct Node {
    bounds: Aabb,
    first: u32,
    count: u32,
    left: u32,
}

impl Node {
    fn is_leaf(&self) -> bool {
        self.count > 0
    }
}

#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    tris: Vec<Triangle>,
    ids: Vec<u32>,
    reps: Vec<Point3<f64>>,
}

impl Bvh {
    pub fn build(mesh: &TriMesh) -> Bvh {
        let n = mesh.triangle_count();
        let src: Vec<Triangle> = (0..n).map(|i| mesh.triangle(i)).collect();
        let boxes: Vec<Aabb> = src.iter().map(triangle_aabb).collect();
        let centroids: Vec<Point3<f64>> = boxes.iter().map(|b| b.center()).collect();
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::with_capacity(2 * n / LEAF_SIZE + 1);
        nodes.push(Node {
            bounds: Aabb::empty(),
            first: 0,
            count: 0,
            left: 0,
        });
        let mut stack = vec![(0usize, 0usize, n)];
        while let Some((node, lo, hi)) = stack.pop() {
            let bounds = order[lo..hi]
                .iter()
                .fold(Aabb::empty(), |acc, &i| acc.union(&boxes[i as usize]));
            nodes[node].bounds = bounds;
            if hi - lo <= LEAF_SIZE {
                nodes[node].first = lo as u32;
                nodes[node].count = (hi - lo) as u32;
                continue;
            }
            let cb = Aabb::from_points(order[lo..hi].iter().map(|&i| &centroids[i as usize]));
            let ext = cb.max - cb.min;
            let axis = if ext.x >= ext.y && ext.x >= ext.z {
                0
            } else if ext.y >= ext.z {
                1
            } else {
                2
            };
            let mid = (lo + hi) / 2;
            order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
                centroids[a as usize][axis]
                    .total_cmp(&centroids[b as usize][axis])
                    .then(a.cmp(&b))
            });
            let left = nodes.len();
            for _ in 0..2 {
                nodes.push(Node {
                    bounds: Aabb::empty(),
                    first: 0,
                    count: 0,
                    left: 0,
                });
            }
            nodes[node].left = left as u32;
            stack.push((left, lo, mid));
            stack.push((left + 1, mid, hi));
        }
        let tris = order.iter().map(|&i| src[i as usize]).collect();
        Bvh {
            nodes,
            tris,
            ids: order,
            reps: mesh.component_representatives(),
        }
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes[0].bounds
    }

    pub fn triangle_count(&self) -> usize {
        self.tris.len()
    }

    /// Nearest intersection with positive distance. Equal distances resolve
    /// to the lowest source triangle index.
    pub fn ray_cast(&self, origin: &Point3<f64>, dir: &Vector3<f64>) -> Option<RayHit> {
        let inv = Vector3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<RayHit> = None;
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            let limit = best.map_or(f64::INFINITY, |h| h.distance);
            if node.bounds.ray_entry(origin, &inv, limit).is_none() {
                continue;
            }
            if node.is_leaf() {
                for k in node.first..node.first + node.count {
                    if let Some(d) = ray_triangle(origin, dir, &self.tris[k as usize]) {
                        let id = self.ids[k as usize] as usize;
                        let better = match best {
                            None => true,
                            Some(h) => d < h.distance || (d == h.distance && id < h.triangle),
                        };
                        if better {
                            best = Some(RayHit { distance: d, triangle: id });
                        }
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.left + 1);
            }
        }
        best
    }

    /// First pair of intersecting triangles `(self, other)` found, as source indices.
    pub fn first_overlap(&self, other: &Bvh) -> Option<(usize, usize)> {
        let mut stack = vec![(0u32, 0u32)];
        while let Some((a, b)) = stack.pop() {
            let na = &self.nodes[a as usize];
            let nb = &other.nodes[b as usize];
            if !na.bounds.intersects(&nb.bounds) {
                continue;
            }
            match (na.is_leaf(), nb.is_leaf()) {
                (true, true) => {
                    for i in na.first..na.first + na.count {
                        let ta = &self.tris[i as usize];
                        for j in nb.first..nb.first + nb.count {
                            if triangles_intersect(ta, &other.tris[j as usize]) {
                                return Some((self.ids[i as usize] as usize, other.ids[j as usize] as usize));
                            }
                        }
                    }
                }
                (false, true) => {
                    stack.push((na.left, b));
                    stack.push((na.left + 1, b));
                }
                (true, false) => {
                    stack.push((a, nb.left));
                    stack.push((a, nb.left + 1));
                }
                (false, false) => {
                    let va = na.bounds.volume();
                    let vb = nb.bounds.volume();
                    if va >= vb {
                        stack.push((na.left, b));
                        stack.push((na.left + 1, b));
                    } else {
                        stack.push((a, nb.left));
                        stack.push((a, nb.left + 1));
                    }
                }
            }
        }
        None
    }

    /// Minimum distance between the two surfaces (zero if they touch).
    pub fn distance(&self, other: &Bvh) -> f64 {
        let mut best = f64::INFINITY;
        let mut stack = vec![(0u32, 0u32)];
        while let Some((a, b)) = stack.pop() {
            let na = &self.nodes[a as usize];
            let nb = &other.nodes[b as usize];
            if na.bounds.distance(&nb.bounds) >= best {
                continue;
            }
            match (na.is_leaf(), nb.is_leaf()) {
                (true, true) => {
                    for i in na.first..na.first + na.count {
                        for j in nb.first..nb.first + nb.count {
                            best = best.min(triangle_distance(&self.tris[i as usize], &other.tris[j as usize]));
                        }
                    }
                    if best == 0.0 {
                        return 0.0;
                    }
                }
                (false, true) => {
                    stack.push((na.left, b));
                    stack.push((na.left + 1, b));
                }
                (true, false) => {
                    stack.push((a, nb.left));
                    stack.push((a, nb.left + 1));
                }
                (false, false) => {
                    if na.bounds.volume() >= nb.bounds.volume() {
                        stack.push((na.left, b));
                        stack.push((na.left + 1, b));
                    } else {
                        stack.push((a, nb.left));
                        stack.push((a, nb.left + 1));
                    }
                }
            }
        }
        best
    }

    pub fn distance_to_point(&self, p: &Point3<f64>) -> f64 {
        let mut best = f64::INFINITY;
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if node.bounds.distance_to_point(p) >= best {
                continue;
            }
            if node.is_leaf() {
                for k in node.first..node.first + node.count {
                    best = best.min(point_triangle_distance(p, &self.tris[k as usize]));
                }
            } else {
                stack.push(node.left);
                stack.push(node.left + 1);
            }
        }
        best
    }

    pub fn intersects_box(&self, b: &Aabb) -> bool {
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if !node.bounds.intersects(b) {
                continue;
            }
            if node.is_leaf() {
                if (node.first..node.first + node.count).any(|k| triangle_box_intersect(&self.tris[k as usize], b)) {
                    return true;
                }
            } else {
                stack.push(node.left);
                stack.push(node.left + 1);
            }
        }
        false
    }

    pub fn winding_number(&self, p: &Point3<f64>) -> f64 {
        self.tris.iter().map(|t| winding_contribution(p, t)).sum()
    }

    /// Inside test by generalized winding number; cavities count as outside.
    pub fn contains_point(&self, p: &Point3<f64>) -> bool {
        self.bounds().contains(p) && self.winding_number(p) > 0.5
    }

    /// One surface point per connected component of the source mesh.
    pub fn component_points(&self) -> &[Point3<f64>] {
        &self.reps
    }
}
