//! OBJ (vertices and triangular faces) and binary STL readers.

use std::collections::HashMap;
use std::io::{BufRead, Read};
use std::path::Path;

use nalgebra::Point3;

use super::mesh::TriMesh;
use crate::error::{Error, Result};

pub fn load_mesh(path: &Path) -> Result<TriMesh> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    let file = std::fs::File::open(path)?;
    match ext.as_str() {
        "obj" => read_obj(std::io::BufReader::new(file)),
        "stl" => read_stl(file),
        _ => Err(Error::Parse(format!("unsupported mesh extension `{ext}`"))),
    }
}

/// Parses `v` and `f` records; faces with more than three corners are fanned.
pub fn read_obj<R: BufRead>(reader: R) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
                if c.len() != 3 {
                    return Err(Error::Parse(format!("line {}: vertex needs 3 coordinates", lineno + 1)));
                }
                vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in it {
                    let first = tok.split('/').next().unwrap_or("");
                    let i: i64 = first
                        .parse()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
                    let resolved = if i < 0 { vertices.len() as i64 + i } else { i - 1 };
                    if resolved < 0 {
                        return Err(Error::Parse(format!("line {}: bad face index {i}", lineno + 1)));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(Error::Parse(format!("line {}: face needs 3 indices", lineno + 1)));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, triangles)
}

/// Binary STL; coincident vertices are welded so the result is indexed.
pub fn read_stl<R: Read>(mut reader: R) -> Result<TriMesh> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() < 84 {
        return Err(Error::Parse("STL shorter than header".into()));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    if bytes.len() < 84 + count * 50 {
        return Err(Error::Parse(format!("STL declares {count} triangles but is truncated")));
    }
    let mut weld: HashMap<[u32; 3], u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(count);
    for t in 0..count {
        let rec = &bytes[84 + t * 50..84 + (t + 1) * 50];
        let mut tri = [0u32; 3];
        for (k, slot) in tri.iter_mut().enumerate() {
            let off = 12 + k * 12;
            let mut key = [0u32; 3];
            let mut p = [0f64; 3];
            for c in 0..3 {
                let raw: [u8; 4] = rec[off + c * 4..off + c * 4 + 4].try_into().unwrap();
                key[c] = u32::from_le_bytes(raw);
                p[c] = f32::from_le_bytes(raw) as f64;
            }
            *slot = *weld.entry(key).or_insert_with(|| {
                vertices.push(Point3::from(p));
                (vertices.len() - 1) as u32
            });
        }
        triangles.push(tri);
    }
    TriMesh::new(vertices, triangles)
}

/// Writes a binary STL (used by tests and tooling).
pub fn write_stl(mesh: &TriMesh) -> Vec<u8> {
    let mut out = vec![0u8; 80];
    out.extend_from_slice(&(mesh.triangle_count() as u32).to_le_bytes());
    for i in 0..mesh.triangle_count() {
        let t = mesh.triangle(i);
        let n = super::primitives::triangle_normal(&t).normalize();
        for c in n.iter() {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
        for p in &t {
            for c in p.iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&[0, 0]);
    }
    out
}
