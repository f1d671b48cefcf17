/* SPDX-License-Identifier: Apache-2.0
 * Copyright (c) 2026 iatrack contributors
 *
 * C interface of the iatrack multi-object tracking engine. All state lives
 * behind opaque handles; every call returns a status code and leaves a
 * message for the calling thread retrievable via ia_last_error().
 */

#ifndef IATRACK_H
#define IATRACK_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ia_status {
    IA_OK = 0,
    IA_ERROR_INVALID_ARGUMENT = 1,
    IA_ERROR_IO = 2,
    IA_ERROR_PARSE = 3,
    IA_ERROR_STATE = 4,
    IA_ERROR_INTERNAL = 5
} ia_status;

const char* ia_version(void);

/* Message for the last failing call on this thread; empty string otherwise. */
const char* ia_last_error(void);

/* ------------------------------------------------------------------ */
/* Configuration                                                       */

typedef struct ia_config ia_config;

ia_status ia_config_create(ia_config** out);
ia_status ia_config_load(const char* path, ia_config** out);
ia_status ia_config_save(const ia_config* cfg, const char* path);
ia_status ia_config_set(ia_config* cfg, const char* key, const char* value);
ia_status ia_config_get(const ia_config* cfg, const char* key, char* buf, size_t buf_size);
void ia_config_destroy(ia_config* cfg);

/* ------------------------------------------------------------------ */
/* Tracking                                                            */

typedef struct ia_track_stats {
    int64_t frames;
    int64_t targets_created;
    int64_t live_at_end;
    double wall_seconds;
} ia_track_stats;

/* Run the tracker on the configured sequence and write the result file.
 * output_path overrides paths.output when non-NULL; graph_dump_dir, when
 * non-NULL, receives one association-graph dump per frame. */
ia_status ia_track(const ia_config* cfg, const char* output_path, const char* graph_dump_dir, ia_track_stats* stats);

/* ------------------------------------------------------------------ */
/* Evaluation                                                          */

typedef struct ia_mot_report {
    double mota;
    double motp;
    double mt_percent;
    double ml_percent;
    int64_t fp;
    int64_t fn;
    int64_t id_switches;
    int64_t fragmentations;
    int64_t gt_total;
} ia_mot_report;

ia_status ia_evaluate(const char* results_path, const char* gt_path, double iou_threshold, ia_mot_report* report);

/* ------------------------------------------------------------------ */
/* Training                                                            */

typedef struct ia_train_stats {
    int refresh_converged; /* 1 when a zero-mistake pass was reached */
    int64_t refresh_epochs;
    int64_t refresh_pool_size;
    int64_t refresh_episodes;
    int64_t pair_samples;
} ia_train_stats;

/* Train the refresh policy and the pair scorer on the configured sequence
 * (ground truth required); weight files are written to the configured
 * paths. */
ia_status ia_train(const ia_config* cfg, ia_train_stats* stats);

/* ------------------------------------------------------------------ */
/* Synthetic sequences                                                 */

/* Generate the configured synthetic sequence under out_dir
 * (img1/NNNNNN.ppm, det/det.txt, gt/gt.txt). */
ia_status ia_synth(const ia_config* cfg, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* IATRACK_H */
