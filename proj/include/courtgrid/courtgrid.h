/* courtgrid C API: multiresolution tensor models of shot selection.
 *
 * All functions return a cg_status. On failure the message is available from
 * cg_last_error() on the calling thread until the next API call there.
 * Objects are opaque handles released with the matching *_free function;
 * passing NULL to a *_free function is a no-op.
 */
#ifndef COURTGRID_H
#define COURTGRID_H

#include <stddef.h>
#include <stdint.h>

#if defined(COURTGRID_BUILDING_LIBRARY)
#define CG_API __attribute__((visibility("default")))
#else
#define CG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cg_status {
  CG_OK = 0,
  CG_ERR_INVALID_ARGUMENT = 1,
  CG_ERR_PARSE = 2,
  CG_ERR_IO = 3,
  CG_ERR_NUMERIC = 4,
  CG_ERR_INTERNAL = 5
} cg_status;

enum { CG_FORMAT_CSV = 1, CG_FORMAT_PPM = 2 };

typedef struct cg_dataset cg_dataset;
typedef struct cg_config cg_config;
typedef struct cg_model cg_model;
typedef struct cg_report cg_report;
typedef struct cg_clusters cg_clusters;

typedef struct cg_metrics {
  double f1;
  double precision;
  double recall;
  double loss;
  double threshold;
  long long tp, fp, fn, tn;
} cg_metrics;

typedef struct cg_synth_params {
  int players;
  int rank;
  int contexts; /* 1, or 4 for quarter-varying court factors */
  double rho;   /* correlation between quarter blocks */
  int court_rows, court_cols;
  int defender_rows, defender_cols;
  double factor_scale;
  double bias;
  double noise;
  uint64_t seed;
  size_t samples;
} cg_synth_params;

CG_API const char* cg_last_error(void);
CG_API const char* cg_version(void);

/* Worker threads for gradient evaluation (results do not depend on it). */
CG_API cg_status cg_set_threads(int threads);

/* Datasets: canonical JSONL samples. */
CG_API cg_status cg_dataset_load(const char* path, cg_dataset** out);
CG_API void cg_dataset_free(cg_dataset* data);
CG_API size_t cg_dataset_size(const cg_dataset* data);
CG_API int cg_dataset_players(const cg_dataset* data);
CG_API size_t cg_dataset_positives(const cg_dataset* data);

/* Synthetic data with planted low-rank structure. */
CG_API void cg_synth_default_params(cg_synth_params* params);
CG_API cg_status cg_synth_write(const cg_synth_params* params, const char* samples_path,
                                const char* spec_path);

/* Playstyle clustering from a synergy table. names_csv may be NULL
 * (default archetype names when k == 7). */
CG_API cg_status cg_clusters_fit(const char* synergy_path, int k, uint64_t seed,
                                 const char* names_csv, cg_clusters** out);
CG_API cg_status cg_clusters_load(const char* assignments_path, cg_clusters** out);
CG_API cg_status cg_clusters_save(const cg_clusters* clusters, const char* path);
CG_API cg_status cg_clusters_silhouette(const cg_clusters* clusters, double* out);
CG_API size_t cg_clusters_size(const cg_clusters* clusters);
CG_API void cg_clusters_free(cg_clusters* clusters);

/* Run configuration: "section.key" = value (see README for keys). */
CG_API cg_status cg_config_create(cg_config** out);
CG_API void cg_config_free(cg_config* config);
CG_API cg_status cg_config_set(cg_config* config, const char* key, const char* value);
CG_API cg_status cg_config_load(cg_config* config, const char* path);
CG_API cg_status cg_config_validate(const cg_config* config);
/* Copies the canonical config text into buf (NUL-terminated, truncated to
 * capacity); *needed receives the full length + 1. buf may be NULL. */
CG_API cg_status cg_config_to_ini(const cg_config* config, char* buf, size_t capacity,
                                  size_t* needed);
CG_API cg_status cg_config_fingerprint(const cg_config* config, char* buf, size_t capacity,
                                       size_t* needed);

/* Training: split, full-rank stage, CP handoff, low-rank stage, threshold
 * tuning, test metrics. clusters may be NULL for non-playstyle variants. */
CG_API cg_status cg_train(const cg_config* config, const cg_dataset* data,
                          const cg_clusters* clusters, cg_model** model, cg_report** report);

CG_API cg_status cg_report_write_json(const cg_report* report, const char* path,
                                      int include_timings);
CG_API cg_status cg_report_write_metrics_csv(const cg_report* report, const char* path);
CG_API cg_status cg_report_test_metrics(const cg_report* report, cg_metrics* out);
CG_API void cg_report_free(cg_report* report);

CG_API cg_status cg_model_save(const cg_model* model, const char* path);
CG_API cg_status cg_model_load(const char* path, cg_model** out);
CG_API void cg_model_free(cg_model* model);
CG_API double cg_model_threshold(const cg_model* model);
CG_API int cg_model_rank(const cg_model* model);
/* threshold <= 0 uses the model's tuned threshold. */
CG_API cg_status cg_model_evaluate(const cg_model* model, const cg_dataset* data,
                                   double threshold, cg_metrics* out);
/* Writes one probability per sample; capacity must be >= cg_dataset_size. */
CG_API cg_status cg_model_predict(const cg_model* model, const cg_dataset* data, double* out,
                                  size_t capacity);

/* Heatmap export. With has_player == 0, general heatmaps (base/ST models);
 * otherwise the top_n profiles of raw player id `player` per context.
 * formats is a mask of CG_FORMAT_*. */
CG_API cg_status cg_model_export_heatmaps(const cg_model* model, int has_player, int64_t player,
                                          int top_n, const char* out_dir, int formats,
                                          size_t* files_written);

#ifdef __cplusplus
}
#endif

#endif /* COURTGRID_H */
