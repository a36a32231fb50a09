//! Scene documents (JSON) and point cloud export (ASCII PLY).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Pose};

use super::asset::{AssetShape, ObjectAsset};
use super::render::CameraModel;
use super::world::Scene;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetDescriptor {
    pub asset_id: String,
    pub shape: AssetShape,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementRecord {
    pub instance_id: u32,
    pub asset: AssetDescriptor,
    pub pose: Pose,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDocument {
    #[serde(serialize_with = "canonical::f64")]
    pub table_height: f64,
    #[serde(serialize_with = "canonical::array2")]
    pub table_half_extent: [f64; 2],
    pub camera: CameraModel,
    pub placements: Vec<PlacementRecord>,
}

impl SceneDocument {
    pub fn from_scene(scene: &Scene) -> SceneDocument {
        SceneDocument {
            table_height: scene.table_height(),
            table_half_extent: scene.table_half_extent(),
            camera: scene.camera().clone(),
            placements: scene
                .objects()
                .iter()
                .map(|o| PlacementRecord {
                    instance_id: o.instance_id(),
                    asset: AssetDescriptor {
                        asset_id: o.asset().asset_id().to_string(),
                        shape: o.asset().shape().clone(),
                    },
                    pose: *o.pose(),
                })
                .collect(),
        }
    }

    /// Rebuilds the scene; placements sharing an asset id share one asset.
    pub fn to_scene(&self) -> Result<Scene> {
        self.camera.validate()?;
        let mut assets: HashMap<&str, Arc<ObjectAsset>> = HashMap::new();
        let mut scene = Scene::new(self.table_height, self.table_half_extent, self.camera.clone());
        for p in &self.placements {
            if p.instance_id == crate::geometry::TABLE_INSTANCE || scene.object(p.instance_id).is_some() {
                return Err(Error::invalid(format!("invalid or duplicate instance id {}", p.instance_id)));
            }
            let asset = match assets.get(p.asset.asset_id.as_str()) {
                Some(a) if a.shape() == &p.asset.shape => a.clone(),
                Some(_) => return Err(Error::invalid(format!("asset `{}` has conflicting shapes", p.asset.asset_id))),
                None => {
                    let a = Arc::new(ObjectAsset::from_shape(p.asset.asset_id.clone(), p.asset.shape.clone())?);
                    assets.insert(&p.asset.asset_id, a.clone());
                    a
                }
            };
            scene = scene.with_object_id(p.instance_id, asset, p.pose);
        }
        Ok(scene)
    }
}

pub fn scene_to_json(scene: &Scene) -> String {
    let mut s = serde_json::to_string_pretty(&SceneDocument::from_scene(scene)).expect("scene serializes");
    s.push('\n');
    s
}

pub fn scene_from_json(text: &str) -> Result<Scene> {
    let doc: SceneDocument = serde_json::from_str(text)?;
    doc.to_scene()
}

pub fn save_scene(scene: &Scene, path: &Path) -> Result<()> {
    std::fs::write(path, scene_to_json(scene))?;
    Ok(())
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    scene_from_json(&std::fs::read_to_string(path)?)
}

/// ASCII PLY with `instance` and `source` vertex properties and normals when present.
pub fn cloud_to_ply(cloud: &PointCloud) -> String {
    let r = canonical::round_sig;
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(s, "element vertex {}", cloud.len());
    s.push_str("property double x\nproperty double y\nproperty double z\n");
    if cloud.normals().is_some() {
        s.push_str("property double nx\nproperty double ny\nproperty double nz\n");
    }
    s.push_str("property uint instance\nproperty uchar source\nend_header\n");
    for i in 0..cloud.len() {
        let p = cloud.points()[i];
        let _ = write!(s, "{} {} {}", r(p.x), r(p.y), r(p.z));
        if let Some(n) = cloud.normals() {
            let _ = write!(s, " {} {} {}", r(n[i].x), r(n[i].y), r(n[i].z));
        }
        let _ = writeln!(s, " {} {}", cloud.instance_ids()[i], cloud.source_flags()[i]);
    }
    s
}
