//! Low-level geometric predicates on triangles, boxes, rays and segments.
//!
//! Overlap tests are inclusive: touching counts as intersecting.

use nalgebra::{Point3, Vector3};

pub type Triangle = [Point3<f64>; 3];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn new(min: Point3<f64>, max: Point3<f64>) -> Self {
        Aabb { min, max }
    }

    pub fn empty() -> Self {
        Aabb {
            min: Point3::from([f64::INFINITY; 3]),
            max: Point3::from([f64::NEG_INFINITY; 3]),
        }
    }

    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a Point3<f64>>) -> Self {
        let mut b = Self::empty();
        for p in pts {
            b.grow(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.min[i] > self.max[i])
    }

    pub fn grow(&mut self, p: &Point3<f64>) {
        for i in 0..3 {
            self.min[i] = self.min[i].min(p[i]);
            self.max[i] = self.max[i].max(p[i]);
        }
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        let mut b = *self;
        b.grow(&o.min);
        b.grow(&o.max);
        b
    }

    pub fn inflate(&self, r: f64) -> Aabb {
        let d = Vector3::repeat(r);
        Aabb::new(self.min - d, self.max + d)
    }

    pub fn center(&self) -> Point3<f64> {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn half_extents(&self) -> Vector3<f64> {
        (self.max - self.min) * 0.5
    }

    pub fn volume(&self) -> f64 {
        let e = self.max - self.min;
        e.x * e.y * e.z
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn intersects(&self, o: &Aabb) -> bool {
        (0..3).all(|i| self.min[i] <= o.max[i] && o.min[i] <= self.max[i])
    }

    pub fn distance_to_point(&self, p: &Point3<f64>) -> f64 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let v = (self.min[i] - p[i]).max(0.0).max(p[i] - self.max[i]);
            d2 += v * v;
        }
        d2.sqrt()
    }

    pub fn distance(&self, o: &Aabb) -> f64 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let v = (self.min[i] - o.max[i]).max(0.0).max(o.min[i] - self.max[i]);
            d2 += v * v;
        }
        d2.sqrt()
    }

    pub fn corners(&self) -> [Point3<f64>; 8] {
        let (a, b) = (self.min, self.max);
        [
            Point3::new(a.x, a.y, a.z),
            Point3::new(b.x, a.y, a.z),
            Point3::new(a.x, b.y, a.z),
            Point3::new(b.x, b.y, a.z),
            Point3::new(a.x, a.y, b.z),
            Point3::new(b.x, a.y, b.z),
            Point3::new(a.x, b.y, b.z),
            Point3::new(b.x, b.y, b.z),
        ]
    }

    /// Slab test; returns the entry distance if the ray meets the box within `t_max`.
    pub fn ray_entry(&self, origin: &Point3<f64>, inv_dir: &Vector3<f64>, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for i in 0..3 {
            let mut ta = (self.min[i] - origin[i]) * inv_dir[i];
            let mut tb = (self.max[i] - origin[i]) * inv_dir[i];
            if ta.is_nan() || tb.is_nan() {
                // origin on a slab plane with a parallel ray
                if origin[i] < self.min[i] || origin[i] > self.max[i] {
                    return None;
                }
                continue;
            }
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

pub fn triangle_aabb(t: &Triangle) -> Aabb {
    Aabb::from_points(t.iter())
}

pub fn triangle_normal(t: &Triangle) -> Vector3<f64> {
    (t[1] - t[0]).cross(&(t[2] - t[0]))
}

pub fn triangle_area(t: &Triangle) -> f64 {
    0.5 * triangle_normal(t).norm()
}

fn project(t: &Triangle, axis: &Vector3<f64>) -> (f64, f64) {
    let a = t[0].coords.dot(axis);
    let b = t[1].coords.dot(axis);
    let c = t[2].coords.dot(axis);
    (a.min(b).min(c), a.max(b).max(c))
}

fn separated_on(a: &Triangle, b: &Triangle, axis: &Vector3<f64>) -> bool {
    if axis.norm_squared() == 0.0 {
        return false;
    }
    let (amin, amax) = project(a, axis);
    let (bmin, bmax) = project(b, axis);
    amax < bmin || bmax < amin
}

/// Separating-axis test between two closed triangles.
///
/// Axes: both face normals, the nine edge-edge cross products, and the six
/// in-plane edge normals that decide the coplanar case.
pub fn triangles_intersect(a: &Triangle, b: &Triangle) -> bool {
    let na = triangle_normal(a);
    let nb = triangle_normal(b);
    if separated_on(a, b, &na) || separated_on(a, b, &nb) {
        return false;
    }
    let ea = [a[1] - a[0], a[2] - a[1], a[0] - a[2]];
    let eb = [b[1] - b[0], b[2] - b[1], b[0] - b[2]];
    for u in &ea {
        for v in &eb {
            if separated_on(a, b, &u.cross(v)) {
                return false;
            }
        }
    }
    for e in &ea {
        if separated_on(a, b, &na.cross(e)) {
            return false;
        }
    }
    for e in &eb {
        if separated_on(a, b, &nb.cross(e)) {
            return false;
        }
    }
    true
}

/// Separating-axis test between a triangle and an axis-aligned box.
pub fn triangle_box_intersect(t: &Triangle, b: &Aabb) -> bool {
    let c = b.center();
    let h = b.half_extents();
    let v = [t[0] - c, t[1] - c, t[2] - c];
    let e = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];

    let test = |axis: Vector3<f64>| -> bool {
        if axis.norm_squared() == 0.0 {
            return false;
        }
        let p0 = v[0].dot(&axis);
        let p1 = v[1].dot(&axis);
        let p2 = v[2].dot(&axis);
        let r = h.x * axis.x.abs() + h.y * axis.y.abs() + h.z * axis.z.abs();
        p0.min(p1).min(p2) > r || p0.max(p1).max(p2) < -r
    };

    for i in 0..3 {
        let lo = v[0][i].min(v[1][i]).min(v[2][i]);
        let hi = v[0][i].max(v[1][i]).max(v[2][i]);
        if lo > h[i] || hi < -h[i] {
            return false;
        }
    }
    if test(e[0].cross(&e[1])) {
        return false;
    }
    let units = [Vector3::x(), Vector3::y(), Vector3::z()];
    for u in &units {
        for ed in &e {
            if test(u.cross(ed)) {
                return false;
            }
        }
    }
    true
}

/// Moller-Trumbore; returns the ray parameter of a hit with `t > 0`.
pub fn ray_triangle(origin: &Point3<f64>, dir: &Vector3<f64>, t: &Triangle) -> Option<f64> {
    let e1 = t[1] - t[0];
    let e2 = t[2] - t[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - t[0];
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let dist = e2.dot(&q) * inv;
    (dist > 0.0).then_some(dist)
}

/// Closest point on a triangle to `p`.
pub fn closest_point_on_triangle(p: &Point3<f64>, t: &Triangle) -> Point3<f64> {
    let (a, b, c) = (t[0], t[1], t[2]);
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

pub fn point_triangle_distance(p: &Point3<f64>, t: &Triangle) -> f64 {
    (closest_point_on_triangle(p, t) - p).norm()
}

/// Squared distance between segments `p1q1` and `p2q2`.
pub fn segment_segment_distance_sq(p1: &Point3<f64>, q1: &Point3<f64>, p2: &Point3<f64>, q2: &Point3<f64>) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let eps = 1e-300;
    let (s, t);
    if a <= eps && e <= eps {
        return r.norm_squared();
    }
    if a <= eps {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= eps {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > eps { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    (c1 - c2).norm_squared()
}

/// Distance between two triangles; zero when they intersect.
pub fn triangle_distance(a: &Triangle, b: &Triangle) -> f64 {
    if triangles_intersect(a, b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for p in a {
        best = best.min(point_triangle_distance(p, b));
    }
    for p in b {
        best = best.min(point_triangle_distance(p, a));
    }
    for i in 0..3 {
        for j in 0..3 {
            let d = segment_segment_distance_sq(&a[i], &a[(i + 1) % 3], &b[j], &b[(j + 1) % 3]).sqrt();
            best = best.min(d);
        }
    }
    best
}

/// Signed solid angle subtended by a triangle at `p`, divided by 4 pi.
pub fn winding_contribution(p: &Point3<f64>, t: &Triangle) -> f64 {
    let a = t[0] - p;
    let b = t[1] - p;
    let c = t[2] - p;
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let num = a.dot(&b.cross(&c));
    let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
    2.0 * num.atan2(den) / (4.0 * std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> Triangle {
        [Point3::from(a), Point3::from(b), Point3::from(c)]
    }

    #[test]
    fn crossing_triangles_intersect() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let b = tri([0.2, 0.2, -1.0], [0.2, 0.2, 1.0], [0.3, 0.25, 0.0]);
        assert!(triangles_intersect(&a, &b));
        let c = tri([0.2, 0.2, 0.5], [0.2, 0.3, 1.0], [0.3, 0.25, 1.0]);
        assert!(!triangles_intersect(&a, &c));
    }

    #[test]
    fn coplanar_cases() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let overlapping = tri([0.2, 0.2, 0.0], [2.0, 0.2, 0.0], [0.2, 2.0, 0.0]);
        let apart = tri([0.8, 0.8, 0.0], [2.0, 0.8, 0.0], [0.8, 2.0, 0.0]);
        let touching = tri([1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [1.0, 1.0, 0.0]);
        assert!(triangles_intersect(&a, &overlapping));
        assert!(!triangles_intersect(&a, &apart));
        assert!(triangles_intersect(&a, &touching));
    }

    #[test]
    fn triangle_box() {
        let b = Aabb::new(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0));
        assert!(triangle_box_intersect(&tri([0.5, 0.5, 0.5], [3.0, 0.5, 0.5], [0.5, 3.0, 0.5]), &b));
        assert!(triangle_box_intersect(&tri([-1.0, -1.0, 0.5], [3.0, -1.0, 0.5], [-1.0, 3.0, 0.5]), &b));
        assert!(!triangle_box_intersect(&tri([2.0, 2.0, 2.0], [3.0, 2.0, 2.0], [2.0, 3.0, 2.0]), &b));
        // diagonal plane that misses the corner region
        assert!(!triangle_box_intersect(&tri([2.5, 0.0, 0.0], [0.0, 2.5, 0.0], [0.0, 0.0, 2.5]).map(|p| p + Vector3::repeat(0.9)), &b));
    }

    #[test]
    fn ray_hits_and_misses() {
        let t = tri([-1.0, -1.0, 2.0], [1.0, -1.0, 2.0], [0.0, 1.0, 2.0]);
        let o = Point3::origin();
        assert!((ray_triangle(&o, &Vector3::z(), &t).unwrap() - 2.0).abs() < 1e-12);
        assert!(ray_triangle(&o, &-Vector3::z(), &t).is_none());
        assert!(ray_triangle(&o, &Vector3::x(), &t).is_none());
    }

    #[test]
    fn distances() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let b = tri([0.0, 0.0, 0.5], [1.0, 0.0, 0.5], [0.0, 1.0, 0.5]);
        assert!((triangle_distance(&a, &b) - 0.5).abs() < 1e-12);
        assert!((point_triangle_distance(&Point3::new(2.0, 0.0, 0.0), &a) - 1.0).abs() < 1e-12);
        let d = segment_segment_distance_sq(
            &Point3::new(0.0, 0.0, 0.0),
            &Point3::new(1.0, 0.0, 0.0),
            &Point3::new(0.5, -1.0, 1.0),
            &Point3::new(0.5, 1.0, 1.0),
        );
        assert!((d - 1.0).abs() < 1e-12);
    }
}
