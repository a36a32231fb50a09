//! C ABI over the clutterlab core.
//!
//! Objects cross the boundary as opaque handles written to an out pointer by
//! their constructors and released with the matching `cl_*_free`. Every
//! fallible call returns a [`ClStatus`]; on failure the message is available
//! from [`cl_last_error`] on the same thread. Strings returned to the caller
//! are owned by the caller and released with [`cl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use clutterlab::blocker::plan_removal;
use clutterlab::config::RunConfig;
use clutterlab::dataset::{training_library, training_scene};
use clutterlab::geometry::{grasp_distance, GripperModel, Pose};
use clutterlab::pipeline::{GraspPipeline, GraspPlan};
use clutterlab::scene::{load_scene, scene_from_json, scene_to_json, Scene};
use clutterlab::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    TargetNotFound = 4,
    Io = 5,
    Parse = 6,
    OutOfRange = 7,
    StillBlocked = 8,
    Internal = 9,
}

/// Run configuration handle.
pub struct ClConfig(RunConfig);

/// Scene handle.
pub struct ClScene(Scene);

/// Grasp plan handle: ranked grasps for one target.
pub struct ClPlan(GraspPlan);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ClStatus {
    match e {
        Error::TargetNotFound(_) | Error::InstanceAbsent(_) => ClStatus::TargetNotFound,
        Error::Io(_) => ClStatus::Io,
        Error::Json(_) | Error::Parse(_) => ClStatus::Parse,
        Error::StillBlocked { .. } => ClStatus::StillBlocked,
        _ => ClStatus::InvalidArgument,
    }
}

struct Failure(ClStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ClStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ClStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ClStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(ClStatus::NullPointer, format!("null pointer: {what}"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(ClStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn owned_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(ClStatus::Internal, "string contains nul".into()))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or null if none. Free with
/// [`cl_string_free`].
#[no_mangle]
pub extern "C" fn cl_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null_mut(), |c| c.clone().into_raw()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default configuration.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_config_default(out: *mut *mut ClConfig) -> ClStatus {
    guard(|| {
        *out_ptr(out, "out")? = boxed(ClConfig(RunConfig::default()));
        Ok(())
    })
}

/// Configuration from a TOML document overriding defaults.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_config_from_toml(toml: *const c_char, out: *mut *mut ClConfig) -> ClStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(ClConfig(RunConfig::from_toml(str_arg(toml, "toml")?)?));
        Ok(())
    })
}

/// Sets the master seed.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cl_config_set_seed(config: *mut ClConfig, seed: u64) -> ClStatus {
    guard(|| {
        out_ptr(config, "config")?.0.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cl_config_free(config: *mut ClConfig) {
    release(config)
}

/// Generates training scene `index` for the configuration's seed.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_scene_generate(config: *const ClConfig, index: u64, out: *mut *mut ClScene) -> ClStatus {
    guard(|| {
        let c = &borrow(config, "config")?.0;
        let out = out_ptr(out, "out")?;
        *out = boxed(ClScene(training_scene(c, &training_library(c), index, None)?));
        Ok(())
    })
}

/// Loads a scene JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_scene_load(path: *const c_char, out: *mut *mut ClScene) -> ClStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(ClScene(load_scene(Path::new(str_arg(path, "path")?))?));
        Ok(())
    })
}

/// Parses a scene JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_scene_from_json(json: *const c_char, out: *mut *mut ClScene) -> ClStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(ClScene(scene_from_json(str_arg(json, "json")?)?));
        Ok(())
    })
}

/// Canonical scene JSON. Free the result with [`cl_string_free`].
///
/// # Safety
/// `scene` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_scene_to_json(scene: *const ClScene, out: *mut *mut c_char) -> ClStatus {
    guard(|| {
        let s = &borrow(scene, "scene")?.0;
        *out_ptr(out, "out")? = owned_string(scene_to_json(s))?;
        Ok(())
    })
}

/// Number of objects in the scene.
///
/// # Safety
/// `scene` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_scene_object_count(scene: *const ClScene, out: *mut usize) -> ClStatus {
    guard(|| {
        *out_ptr(out, "out")? = borrow(scene, "scene")?.0.objects().len();
        Ok(())
    })
}

/// Instance id of the object at `index`.
///
/// # Safety
/// `scene` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_scene_instance_id(scene: *const ClScene, index: usize, out: *mut u32) -> ClStatus {
    guard(|| {
        let objects = borrow(scene, "scene")?.0.objects();
        let o = objects
            .get(index)
            .ok_or_else(|| Failure(ClStatus::OutOfRange, format!("object index {index} out of range")))?;
        *out_ptr(out, "out")? = o.instance_id();
        Ok(())
    })
}

/// # Safety
/// `scene` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cl_scene_free(scene: *mut ClScene) {
    release(scene)
}

/// Renders the scene and plans grasps for `target`.
///
/// # Safety
/// `config` and `scene` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_plan(
    config: *const ClConfig,
    scene: *const ClScene,
    target: u32,
    seed: u64,
    out: *mut *mut ClPlan,
) -> ClStatus {
    guard(|| {
        let c = &borrow(config, "config")?.0;
        let s = &borrow(scene, "scene")?.0;
        let out = out_ptr(out, "out")?;
        let pipeline = GraspPipeline::from_config(c)?;
        *out = boxed(ClPlan(pipeline.plan_scene(s, target, seed)?));
        Ok(())
    })
}

/// Number of ranked grasps.
///
/// # Safety
/// `plan` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_plan_ranked_count(plan: *const ClPlan, out: *mut usize) -> ClStatus {
    guard(|| {
        *out_ptr(out, "out")? = borrow(plan, "plan")?.0.ranked.len();
        Ok(())
    })
}

/// Ranked grasp `rank` (0 is best) as `w, x, y, z` quaternion then
/// translation in `pose[7]`, with its cascade score.
///
/// # Safety
/// `plan` must be a live handle, `pose` must point to 7 doubles and `score`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_plan_grasp(plan: *const ClPlan, rank: usize, pose: *mut f64, score: *mut f64) -> ClStatus {
    guard(|| {
        let ranked = &borrow(plan, "plan")?.0.ranked;
        let r = ranked
            .get(rank)
            .ok_or_else(|| Failure(ClStatus::OutOfRange, format!("rank {rank} out of range")))?;
        if pose.is_null() {
            return Err(null("pose"));
        }
        let p = r.grasp.pose;
        let values: Vec<f64> = p.wxyz().into_iter().chain(p.translation_array()).collect();
        std::slice::from_raw_parts_mut(pose, 7).copy_from_slice(&values);
        *out_ptr(score, "score")? = r.score;
        Ok(())
    })
}

/// Full plan as JSON. Free the result with [`cl_string_free`].
///
/// # Safety
/// `plan` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_plan_to_json(plan: *const ClPlan, out: *mut *mut c_char) -> ClStatus {
    guard(|| {
        let p = &borrow(plan, "plan")?.0;
        *out_ptr(out, "out")? = owned_string(p.to_json())?;
        Ok(())
    })
}

/// # Safety
/// `plan` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cl_plan_free(plan: *mut ClPlan) {
    release(plan)
}

/// Plans blocker removals for `target` and returns the removal plan JSON.
/// Free the result with [`cl_string_free`].
///
/// # Safety
/// `config` and `scene` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_remove_blockers(
    config: *const ClConfig,
    scene: *const ClScene,
    target: u32,
    seed: u64,
    out: *mut *mut c_char,
) -> ClStatus {
    guard(|| {
        let c = &borrow(config, "config")?.0;
        let s = &borrow(scene, "scene")?.0;
        let out = out_ptr(out, "out")?;
        s.require(target)?;
        let pipeline = GraspPipeline::from_config(c)?;
        let cloud = pipeline.observe(s, seed)?;
        let plan = plan_removal(&cloud, target, &pipeline, c.blocker.max_removals, s.table_height(), Some(s), seed)?;
        *out = owned_string(plan.to_json())?;
        Ok(())
    })
}

/// Control-point distance between two grasps given as `w, x, y, z, tx, ty, tz`,
/// for the default gripper.
///
/// # Safety
/// `a` and `b` must point to 7 doubles and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_grasp_distance(a: *const f64, b: *const f64, out: *mut f64) -> ClStatus {
    guard(|| {
        if a.is_null() || b.is_null() {
            return Err(null("pose"));
        }
        let read = |p: *const f64| -> Result<Pose, Failure> {
            let v = std::slice::from_raw_parts(p, 7);
            Ok(Pose::from_wxyz([v[0], v[1], v[2], v[3]], [v[4], v[5], v[6]])?)
        };
        *out_ptr(out, "out")? = grasp_distance(&read(a)?, &read(b)?, &GripperModel::default());
        Ok(())
    })
}
