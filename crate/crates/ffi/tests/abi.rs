use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use clutterlab_ffi::*;

fn last_error() -> String {
    let p = cl_last_error();
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { cl_string_free(p) };
    s
}

fn config() -> *mut ClConfig {
    let mut c = ptr::null_mut();
    let toml = CString::new("[cascade]\nn_samples = 60\nmh_iterations = 5\n").unwrap();
    assert_eq!(unsafe { cl_config_from_toml(toml.as_ptr(), &mut c) }, ClStatus::Ok);
    c
}

fn scene(c: *const ClConfig) -> *mut ClScene {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cl_scene_generate(c, 0, &mut s) }, ClStatus::Ok);
    s
}

#[test]
fn plan_through_handles() {
    let c = config();
    let s = scene(c);
    let mut n = 0usize;
    let mut target = 0u32;
    unsafe {
        assert_eq!(cl_scene_object_count(s, &mut n), ClStatus::Ok);
        assert!(n > 0);
        assert_eq!(cl_scene_instance_id(s, 0, &mut target), ClStatus::Ok);
        assert_eq!(cl_scene_instance_id(s, n, &mut target), ClStatus::OutOfRange);
        assert_eq!(cl_scene_instance_id(s, 0, &mut target), ClStatus::Ok);

        let mut plan = ptr::null_mut();
        assert_eq!(cl_plan(c, s, target, 4, &mut plan), ClStatus::Ok);
        let mut ranked = 0usize;
        assert_eq!(cl_plan_ranked_count(plan, &mut ranked), ClStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(cl_plan_to_json(plan, &mut json), ClStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        cl_string_free(json);
        assert_eq!(v["ranked"].as_array().unwrap().len(), ranked);
        if ranked > 0 {
            let mut pose = [0.0; 7];
            let mut score = 0.0;
            assert_eq!(cl_plan_grasp(plan, 0, pose.as_mut_ptr(), &mut score), ClStatus::Ok);
            let q = &v["ranked"][0]["grasp"]["pose"]["quaternion_wxyz"];
            assert!((q[0].as_f64().unwrap() - pose[0]).abs() < 1e-8);
            assert_eq!(v["ranked"][0]["score"].as_f64().unwrap(), score);
        }
        assert_eq!(cl_plan_grasp(plan, ranked, [0.0; 7].as_mut_ptr(), &mut 0.0), ClStatus::OutOfRange);
        cl_plan_free(plan);
        cl_scene_free(s);
        cl_config_free(c);
    }
}

#[test]
fn errors_set_status_and_message() {
    let c = config();
    let s = scene(c);
    unsafe {
        let mut plan = ptr::null_mut();
        assert_eq!(cl_plan(c, s, 999, 0, &mut plan), ClStatus::TargetNotFound);
        assert!(plan.is_null());
        assert!(last_error().contains("target not found"));
        let mut json = ptr::null_mut();
        assert_eq!(cl_remove_blockers(c, s, 999, 0, &mut json), ClStatus::TargetNotFound);

        let bad = CString::new("[cascade]\nbogus = 1\n").unwrap();
        let mut c2 = ptr::null_mut();
        assert_eq!(cl_config_from_toml(bad.as_ptr(), &mut c2), ClStatus::Parse);
        assert!(last_error().contains("bogus"));
        assert_eq!(cl_config_from_toml(ptr::null(), &mut c2), ClStatus::NullPointer);
        assert_eq!(cl_scene_object_count(ptr::null(), &mut 0), ClStatus::NullPointer);
        let missing = CString::new("/nonexistent/scene.json").unwrap();
        let mut s2 = ptr::null_mut();
        assert_eq!(cl_scene_load(missing.as_ptr(), &mut s2), ClStatus::Io);
        cl_scene_free(s);
        cl_config_free(c);
        cl_scene_free(ptr::null_mut());
        cl_string_free(ptr::null_mut());
    }
}

#[test]
fn scene_json_round_trip() {
    let c = config();
    let s = scene(c);
    unsafe {
        let mut a = ptr::null_mut();
        assert_eq!(cl_scene_to_json(s, &mut a), ClStatus::Ok);
        let mut s2 = ptr::null_mut();
        assert_eq!(cl_scene_from_json(a, &mut s2), ClStatus::Ok);
        let mut b = ptr::null_mut();
        assert_eq!(cl_scene_to_json(s2, &mut b), ClStatus::Ok);
        assert_eq!(CStr::from_ptr(a), CStr::from_ptr(b));
        cl_string_free(a);
        cl_string_free(b);
        cl_scene_free(s2);
        cl_scene_free(s);
        cl_config_free(c);
    }
}

#[test]
fn grasp_distance_matches_translation() {
    let a = [1.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.3];
    let b = [1.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.35];
    let mut d = 0.0;
    assert_eq!(unsafe { cl_grasp_distance(a.as_ptr(), b.as_ptr(), &mut d) }, ClStatus::Ok);
    assert!((d - 0.05).abs() < 1e-12);
    let bad = [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    assert_eq!(unsafe { cl_grasp_distance(a.as_ptr(), bad.as_ptr(), &mut d) }, ClStatus::InvalidArgument);
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(cl_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_exports() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/clutterlab.h")).unwrap();
    for f in [
        "cl_last_error",
        "cl_string_free",
        "cl_config_from_toml",
        "cl_scene_load",
        "cl_plan_grasp",
        "cl_remove_blockers",
        "cl_grasp_distance",
        "typedef struct ClScene ClScene",
        "CL_STATUS_TARGET_NOT_FOUND = 4",
    ] {
        assert!(header.contains(f), "{f}");
    }
}

#[test]
fn c_example_links_against_static_library() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // cargo test only builds the rlib; build the static library into its own
    // target dir so the outer build lock is not contended
    let target = dir.join("../../target/c-abi");
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let built = Command::new(cargo)
        .args(["build", "--release", "--lib", "-p", "clutterlab-ffi", "--target-dir"])
        .arg(&target)
        .current_dir(&dir)
        .status()
        .unwrap();
    assert!(built.success());
    let lib = target.join("release/libclutterlab_ffi.a");
    let out = tempfile::tempdir().unwrap();
    let bin = out.path().join("plan");
    let status = Command::new("cc")
        .arg(dir.join("examples/plan.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("ranked"));
}
