#ifndef CLUTTERLAB_H
#define CLUTTERLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum ClStatus {
  CL_STATUS_OK = 0,
  CL_STATUS_NULL_POINTER = 1,
  CL_STATUS_INVALID_UTF8 = 2,
  CL_STATUS_INVALID_ARGUMENT = 3,
  CL_STATUS_TARGET_NOT_FOUND = 4,
  CL_STATUS_IO = 5,
  CL_STATUS_PARSE = 6,
  CL_STATUS_OUT_OF_RANGE = 7,
  CL_STATUS_STILL_BLOCKED = 8,
  CL_STATUS_INTERNAL = 9,
} ClStatus;

// Run configuration handle.
typedef struct ClConfig ClConfig;

// Grasp plan handle: ranked grasps for one target.
typedef struct ClPlan ClPlan;

// Scene handle.
typedef struct ClScene ClScene;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *cl_version(void);

// Copy of the last error message on this thread, or null if none. Free with
// [`cl_string_free`].
char *cl_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void cl_string_free(char *s);

// Default configuration.
//
// # Safety
// `out` must be a valid pointer.
enum ClStatus cl_config_default(struct ClConfig **out);

// Configuration from a TOML document overriding defaults.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a valid pointer.
enum ClStatus cl_config_from_toml(const char *toml, struct ClConfig **out);

// Sets the master seed.
//
// # Safety
// `config` must be a live handle.
enum ClStatus cl_config_set_seed(struct ClConfig *config, uint64_t seed);

// # Safety
// `config` must be null or a live handle, not used afterwards.
void cl_config_free(struct ClConfig *config);

// Generates training scene `index` for the configuration's seed.
//
// # Safety
// `config` must be a live handle and `out` a valid pointer.
enum ClStatus cl_scene_generate(const struct ClConfig *config,
                                uint64_t index,
                                struct ClScene **out);

// Loads a scene JSON file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum ClStatus cl_scene_load(const char *path, struct ClScene **out);

// Parses a scene JSON document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum ClStatus cl_scene_from_json(const char *json, struct ClScene **out);

// Canonical scene JSON. Free the result with [`cl_string_free`].
//
// # Safety
// `scene` must be a live handle and `out` a valid pointer.
enum ClStatus cl_scene_to_json(const struct ClScene *scene, char **out);

// Number of objects in the scene.
//
// # Safety
// `scene` must be a live handle and `out` a valid pointer.
enum ClStatus cl_scene_object_count(const struct ClScene *scene, size_t *out);

// Instance id of the object at `index`.
//
// # Safety
// `scene` must be a live handle and `out` a valid pointer.
enum ClStatus cl_scene_instance_id(const struct ClScene *scene, size_t index, uint32_t *out);

// # Safety
// `scene` must be null or a live handle, not used afterwards.
void cl_scene_free(struct ClScene *scene);

// Renders the scene and plans grasps for `target`.
//
// # Safety
// `config` and `scene` must be live handles and `out` a valid pointer.
enum ClStatus cl_plan(const struct ClConfig *config,
                      const struct ClScene *scene,
                      uint32_t target,
                      uint64_t seed,
                      struct ClPlan **out);

// Number of ranked grasps.
//
// # Safety
// `plan` must be a live handle and `out` a valid pointer.
enum ClStatus cl_plan_ranked_count(const struct ClPlan *plan, size_t *out);

// Ranked grasp `rank` (0 is best) as `w, x, y, z` quaternion then
// translation in `pose[7]`, with its cascade score.
//
// # Safety
// `plan` must be a live handle, `pose` must point to 7 doubles and `score`
// must be a valid pointer.
enum ClStatus cl_plan_grasp(const struct ClPlan *plan, size_t rank, double *pose, double *score);

// Full plan as JSON. Free the result with [`cl_string_free`].
//
// # Safety
// `plan` must be a live handle and `out` a valid pointer.
enum ClStatus cl_plan_to_json(const struct ClPlan *plan, char **out);

// # Safety
// `plan` must be null or a live handle, not used afterwards.
void cl_plan_free(struct ClPlan *plan);

// Plans blocker removals for `target` and returns the removal plan JSON.
// Free the result with [`cl_string_free`].
//
// # Safety
// `config` and `scene` must be live handles and `out` a valid pointer.
enum ClStatus cl_remove_blockers(const struct ClConfig *config,
                                 const struct ClScene *scene,
                                 uint32_t target,
                                 uint64_t seed,
                                 char **out);

// Control-point distance between two grasps given as `w, x, y, z, tx, ty, tz`,
// for the default gripper.
//
// # Safety
// `a` and `b` must point to 7 doubles and `out` must be a valid pointer.
enum ClStatus cl_grasp_distance(const double *a, const double *b, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLUTTERLAB_H */
