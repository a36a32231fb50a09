#include <stdio.h>
#include "clutterlab.h"

static int fail(const char *what) {
    char *msg = cl_last_error();
    fprintf(stderr, "%s: %s\n", what, msg ? msg : "?");
    cl_string_free(msg);
    return 1;
}

int main(void) {
    ClConfig *config = NULL;
    ClScene *scene = NULL;
    ClPlan *plan = NULL;
    if (cl_config_default(&config) != CL_STATUS_OK) return fail("config");
    if (cl_scene_generate(config, 0, &scene) != CL_STATUS_OK) return fail("scene");
    uint32_t target = 0;
    if (cl_scene_instance_id(scene, 0, &target) != CL_STATUS_OK) return fail("instance");
    if (cl_plan(config, scene, 999, 1, &plan) != CL_STATUS_TARGET_NOT_FOUND) return fail("missing target");
    if (cl_plan(config, scene, target, 1, &plan) != CL_STATUS_OK) return fail("plan");
    size_t n = 0;
    cl_plan_ranked_count(plan, &n);
    printf("version %s, target %u, %zu ranked\n", cl_version(), target, n);
    if (n > 0) {
        double pose[7], score;
        cl_plan_grasp(plan, 0, pose, &score);
        printf("best score %.4f at (%.3f, %.3f, %.3f)\n", score, pose[4], pose[5], pose[6]);
    }
    cl_plan_free(plan);
    cl_scene_free(scene);
    cl_config_free(config);
    return 0;
}
