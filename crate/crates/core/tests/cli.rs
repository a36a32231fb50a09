use std::path::Path;
use std::process::{Command, Output};

use clutterlab::dataset::{DatasetRecord, GRIPPER_INSTANCE};
use clutterlab::geometry::SOURCE_GRIPPER;
use clutterlab::grasp::GraspSetKind;
use clutterlab::scene::{load_scene, scene_to_json};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clutterlab"))
        .args(args)
        .current_dir(dir)
        .env_remove(clutterlab::config::CONFIG_ENV)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn gen(dir: &Path, n: &str) {
    let o = run(&["gen-scenes", "--n", n, "--objects", "5", "--seed", "4", "--out", "scenes"], dir);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn gen_scenes_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    gen(a.path(), "3");
    gen(b.path(), "3");
    for name in ["scene_0000.json", "scene_0001.ply", "scene_0002.json"] {
        let x = std::fs::read(a.path().join("scenes").join(name)).unwrap();
        let y = std::fs::read(b.path().join("scenes").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let path = a.path().join("scenes/scene_0001.json");
    let scene = load_scene(&path).unwrap();
    assert_eq!(scene.objects().len(), 5);
    assert_eq!(scene_to_json(&scene), std::fs::read_to_string(&path).unwrap());
}

#[test]
fn plan_missing_target_fails() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "1");
    let o = run(&["plan", "--scene", "scenes/scene_0000.json", "--target", "42"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("target not found"), "{}", stderr(&o));
    let o = run(&["remove-blockers", "--scene", "scenes/scene_0000.json", "--target", "42"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("target not found"));
}

#[test]
fn plan_writes_ranked_grasps() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "1");
    let o = run(&["plan", "--scene", "scenes/scene_0000.json", "--target", "1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["target"], 1);
    assert!(v["ranked"].is_array());
    assert!(!v["candidates"].as_array().unwrap().is_empty());
}

#[test]
fn bench_unknown_variant_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["bench", "--variants", "surface_normal:exact:cascaded,surface_normal:laser:cascaded", "--out", "b"],
        dir.path(),
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("surface_normal:laser:cascaded"), "{}", stderr(&o));
    assert!(!dir.path().join("b").exists());
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[cascade]\nbogus = 1\n").unwrap();
    gen(dir.path(), "1");
    let o = run(
        &["plan", "--scene", "scenes/scene_0000.json", "--target", "1", "--config", "c.toml"],
        dir.path(),
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[scene]\nobjects = 2\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_clutterlab"))
        .args(["gen-scenes", "--n", "1", "--out", "s"])
        .current_dir(dir.path())
        .env(clutterlab::config::CONFIG_ENV, "c.toml")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(load_scene(&dir.path().join("s/scene_0000.json")).unwrap().objects().len(), 2);
}

#[test]
fn export_dataset_records() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "1");
    std::fs::write(
        dir.path().join("c.toml"),
        "[dataset]\nreference_candidates = 60\nfree_space = 8\ngripper_points = 32\n",
    )
    .unwrap();
    let o = run(
        &["export-dataset", "--config", "c.toml", "--scenes", "scenes", "--batch", "6", "--target", "1", "--out", "d.jsonl"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("d.jsonl")).unwrap();
    let records: Vec<DatasetRecord> = text.lines().map(|l| DatasetRecord::from_json_line(l).unwrap()).collect();
    assert_eq!(records.len(), 6);
    let mut counts = [0; 4];
    for r in &records {
        counts[GraspSetKind::ALL.iter().position(|&k| k == r.label.set).unwrap()] += 1;
        assert_eq!(r.scene, "scene_0000.json");
        assert!(r.gripper_augmented);
        assert_eq!(r.cloud.len(), 4096 + 32);
        let flags = r.cloud.source_flags();
        assert!(flags[..4096].iter().all(|&f| f == 0));
        assert!(flags[4096..].iter().all(|&f| f == SOURCE_GRIPPER));
        assert!(r.cloud.instance_ids()[4096..].iter().all(|&i| i == GRIPPER_INSTANCE));
    }
    assert_eq!(counts, [2, 2, 1, 1]);
}
