use std::collections::HashMap;

use nalgebra::{Point3, Vector3};
use rand::Rng;

use super::pose::Pose;
use super::primitives::{triangle_area, triangle_normal, winding_contribution, Aabb, Triangle};
use crate::error::{Error, Result};
use crate::seed;

/// Indexed triangle mesh in meters.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Point3<f64>>,
    triangles: Vec<[u32; 3]>,
}

impl TriMesh {
    /// Validates indices and drops zero-area triangles.
    pub fn new(vertices: Vec<Point3<f64>>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        if vertices.iter().any(|v| !v.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidMesh("non-finite vertex".into()));
        }
        let n = vertices.len() as u32;
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
            return Err(Error::InvalidMesh(format!("triangle {t:?} indexes past {n} vertices")));
        }
        let triangles: Vec<[u32; 3]> = triangles
            .into_iter()
            .filter(|t| {
                let tri = [vertices[t[0] as usize], vertices[t[1] as usize], vertices[t[2] as usize]];
                triangle_area(&tri) > 0.0
            })
            .collect();
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no non-degenerate triangles".into()));
        }
        Ok(TriMesh { vertices, triangles })
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, i: usize) -> Triangle {
        let t = self.triangles[i];
        [
            self.vertices[t[0] as usize],
            self.vertices[t[1] as usize],
            self.vertices[t[2] as usize],
        ]
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter())
    }

    pub fn transformed(&self, pose: &Pose) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|v| pose.transform_point(v)).collect(),
            triangles: self.triangles.clone(),
        }
    }

    pub fn merge(&self, other: &TriMesh) -> TriMesh {
        let off = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut triangles = self.triangles.clone();
        triangles.extend(other.triangles.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
        TriMesh { vertices, triangles }
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| triangle_area(&self.triangle(i))).sum()
    }

    /// Signed enclosed volume; positive for outward-facing winding.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|i| {
                let t = self.triangle(i);
                t[0].coords.dot(&t[1].coords.cross(&t[2].coords)) / 6.0
            })
            .sum()
    }

    /// Every directed edge is matched by exactly one opposite edge.
    pub fn is_watertight(&self) -> bool {
        let mut edges: HashMap<(u32, u32), i32> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a, b)).or_default() += 1;
            }
        }
        edges.iter().all(|(&(a, b), &c)| c == 1 && edges.get(&(b, a)) == Some(&1))
    }

    /// Generalized winding number of the surface around `p`.
    pub fn winding_number(&self, p: &Point3<f64>) -> f64 {
        (0..self.triangles.len()).map(|i| winding_contribution(p, &self.triangle(i))).sum()
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        self.winding_number(p) > 0.5
    }

    /// One vertex from each edge-connected component.
    pub fn component_representatives(&self) -> Vec<Point3<f64>> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for t in &self.triangles {
            for &v in &t[1..] {
                let a = find(&mut parent, t[0] as usize);
                let b = find(&mut parent, v as usize);
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut used = vec![false; n];
        for t in &self.triangles {
            used[t[0] as usize] = true;
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut reps = Vec::new();
        for v in 0..n {
            if !used[v] {
                continue;
            }
            let r = find(&mut parent, v);
            if seen.insert(r) {
                reps.push(self.vertices[v]);
            }
        }
        reps
    }

    /// Area-weighted uniform surface samples with their face normals.
    pub fn sample_surface(&self, count: usize, seed_value: u64) -> (Vec<Point3<f64>>, Vec<Vector3<f64>>) {
        let mut cdf = Vec::with_capacity(self.triangles.len());
        let mut acc = 0.0;
        for i in 0..self.triangles.len() {
            acc += triangle_area(&self.triangle(i));
            cdf.push(acc);
        }
        let mut rng = seed::rng(seed_value);
        let mut pts = Vec::with_capacity(count);
        let mut normals = Vec::with_capacity(count);
        for _ in 0..count {
            let r = rng.random::<f64>() * acc;
            let idx = cdf.partition_point(|&c| c < r).min(cdf.len() - 1);
            let t = self.triangle(idx);
            let (mut u, mut v): (f64, f64) = (rng.random(), rng.random());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            pts.push(t[0] + (t[1] - t[0]) * u + (t[2] - t[0]) * v);
            normals.push(triangle_normal(&t).normalize());
        }
        (pts, normals)
    }

    /// Axis-aligned box with outward-facing triangles.
    pub fn cuboid(b: &Aabb) -> TriMesh {
        let vertices = b.corners().to_vec();
        // corner index bits: x = 1, y = 2, z = 4
        let quads = [
            [0, 2, 3, 1], // -z
            [4, 5, 7, 6], // +z
            [0, 1, 5, 4], // -y
            [2, 6, 7, 3], // +y
            [0, 4, 6, 2], // -x
            [1, 3, 7, 5], // +x
        ];
        let mut triangles = Vec::with_capacity(12);
        for q in quads {
            triangles.push([q[0], q[1], q[2]]);
            triangles.push([q[0], q[2], q[3]]);
        }
        TriMesh { vertices, triangles }
    }

    /// Surface of revolution about the z axis.
    ///
    /// `profile` is a closed loop of `(radius, z)` pairs traversed
    /// counter-clockwise in the half plane `radius >= 0`. Points with radius
    /// zero collapse onto the axis.
    pub fn revolve(profile: &[(f64, f64)], segments: usize) -> Result<TriMesh> {
        if profile.len() < 3 || segments < 3 {
            return Err(Error::InvalidMesh("revolve needs 3+ profile points and segments".into()));
        }
        let mut vertices = Vec::new();
        // ring[i] = vertex indices for profile point i
        let mut ring: Vec<Vec<u32>> = Vec::with_capacity(profile.len());
        for &(r, z) in profile {
            if r < 0.0 {
                return Err(Error::InvalidMesh("negative profile radius".into()));
            }
            if r == 0.0 {
                ring.push(vec![vertices.len() as u32; segments]);
                vertices.push(Point3::new(0.0, 0.0, z));
            } else {
                let start = vertices.len() as u32;
                for s in 0..segments {
                    let a = std::f64::consts::TAU * s as f64 / segments as f64;
                    vertices.push(Point3::new(r * a.cos(), r * a.sin(), z));
                }
                ring.push((start..start + segments as u32).collect());
            }
        }
        let mut triangles = Vec::new();
        let n = profile.len();
        for i in 0..n {
            let j = (i + 1) % n;
            if profile[i].0 == 0.0 && profile[j].0 == 0.0 {
                continue;
            }
            for s in 0..segments {
                let s1 = (s + 1) % segments;
                let (a, b) = (ring[i][s], ring[i][s1]);
                let (c, d) = (ring[j][s], ring[j][s1]);
                // profile step i -> j rotated about z; quad (a, b, d, c)
                if a != b {
                    triangles.push([a, c, b]);
                }
                if c != d {
                    triangles.push([b, c, d]);
                }
            }
        }
        let mut mesh = TriMesh::new(vertices, triangles)?;
        if mesh.signed_volume() < 0.0 {
            for t in &mut mesh.triangles {
                t.swap(1, 2);
            }
        }
        Ok(mesh)
    }

    /// Distance from `p` to the closest point of the surface (brute force).
    pub fn distance_to_point(&self, p: &Point3<f64>) -> f64 {
        (0..self.triangles.len())
            .map(|i| super::primitives::point_triangle_distance(p, &self.triangle(i)))
            .fold(f64::INFINITY, f64::min)
    }
}
