/* C interface to the fatigue-classification pipeline.
 *
 * Every object is an opaque handle created and destroyed by this library.
 * Functions return FTG_OK (0) on success or a nonzero status; the message
 * for the most recent failure on the calling thread is available from
 * ftg_last_error(). Strings returned through char** out-parameters are
 * heap-allocated and must be released with ftg_string_free().
 */

#ifndef FATIGUE_CAPI_H
#define FATIGUE_CAPI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FTG_API __declspec(dllexport)
#else
#define FTG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ftg_status {
  FTG_OK = 0,
  FTG_ERR_DOMAIN = 1,
  FTG_ERR_SHAPE = 2,
  FTG_ERR_DESIGN = 3,
  FTG_ERR_LENGTH = 4,
  FTG_ERR_IO = 5,
  FTG_ERR_FORMAT = 6,
  FTG_ERR_INSUFFICIENT_CLASSES = 7,
  FTG_ERR_NUMERIC = 8,
  FTG_ERR_INVALID_ARGUMENT = 9,
  FTG_ERR_INTERNAL = 10,
  FTG_ERR_CHECK_FAILED = 11
} ftg_status;

typedef struct ftg_config ftg_config;
typedef struct ftg_montage ftg_montage;
typedef struct ftg_recording ftg_recording;
typedef struct ftg_schedule ftg_schedule;
typedef struct ftg_epochset ftg_epochset;
typedef struct ftg_model ftg_model;

/* --- library ----------------------------------------------------------- */
FTG_API const char* ftg_version(void);
FTG_API const char* ftg_status_name(int status);
FTG_API const char* ftg_last_error(void); /* thread-local, valid until next call */
FTG_API void ftg_string_free(char* s);

/* --- run configuration -------------------------------------------------- */
FTG_API int ftg_config_create_default(ftg_config** out);
FTG_API int ftg_config_load(const char* path, ftg_config** out);
FTG_API int ftg_config_parse(const char* json_text, ftg_config** out);
FTG_API int ftg_config_dump(const ftg_config* cfg, char** json_out);
FTG_API int ftg_config_hash(const ftg_config* cfg, char** hash_out);
FTG_API int ftg_config_set_seed(ftg_config* cfg, uint64_t seed);
FTG_API int ftg_config_set_jobs(ftg_config* cfg, int jobs);
FTG_API void ftg_config_free(ftg_config* cfg);

/* --- montage ------------------------------------------------------------ */
FTG_API int ftg_montage_standard(ftg_montage** out);
FTG_API int ftg_montage_load_csv(const char* path, ftg_montage** out);
FTG_API int ftg_montage_save_csv(const ftg_montage* m, const char* path);
FTG_API int ftg_montage_channel_count(const ftg_montage* m, int* out);
FTG_API int ftg_montage_eeg_count(const ftg_montage* m, int* out);
FTG_API int ftg_montage_channel_name(const ftg_montage* m, int index, char** name_out);
FTG_API void ftg_montage_free(ftg_montage* m);

/* --- synthetic sessions -------------------------------------------------- */
/* Generates subject `subject_index` (0-based) of the configured cohort. */
FTG_API int ftg_synth_session(const ftg_config* cfg, int subject_index, ftg_recording** rec_out,
                              ftg_schedule** schedule_out);
FTG_API int ftg_schedule_save_csv(const ftg_schedule* s, const char* path);
FTG_API int ftg_schedule_load_csv(const char* path, ftg_schedule** out);
FTG_API int ftg_schedule_minutes(const ftg_schedule* s, int* out);
FTG_API void ftg_schedule_free(ftg_schedule* s);

/* --- recordings ---------------------------------------------------------- */
FTG_API int ftg_recording_save(const ftg_recording* rec, const char* path);
FTG_API int ftg_recording_load(const char* path, ftg_recording** out);
FTG_API int ftg_recording_info(const ftg_recording* rec, uint32_t* n_channels,
                               uint64_t* n_samples, double* fs);
FTG_API void ftg_recording_free(ftg_recording* rec);

/* --- preprocessing ------------------------------------------------------- */
FTG_API int ftg_preprocess(const ftg_config* cfg, const ftg_recording* rec,
                           const ftg_schedule* schedule, const char* subject_id,
                           ftg_epochset** out);

/* --- epoch sets ----------------------------------------------------------- */
FTG_API int ftg_epochset_save(const ftg_epochset* set, const char* path);
FTG_API int ftg_epochset_load(const char* path, ftg_epochset** out);
FTG_API int ftg_epochset_info(const ftg_epochset* set, uint64_t* n_epochs, int* n_channels,
                              int* n_samples, double* fs);
FTG_API int ftg_epochset_class_counts(const ftg_epochset* set, int counts_out[3]);
/* Stratified split for train/validation hand-offs. */
FTG_API int ftg_epochset_split(const ftg_epochset* set, double val_fraction, uint64_t seed,
                               ftg_epochset** train_out, ftg_epochset** val_out);
FTG_API void ftg_epochset_free(ftg_epochset* set);

/* --- features & topography ------------------------------------------------ */
FTG_API int ftg_features_csv(const ftg_config* cfg, const ftg_epochset* set, const char* path);
/* Writes topo_<tag>.csv plus one topo_<tag>_<band>.svg per band. */
FTG_API int ftg_topo_outputs(const ftg_config* cfg, const ftg_epochset* set, const char* out_dir,
                             const char* tag);

/* --- models ---------------------------------------------------------------- */
FTG_API int ftg_train_hybrid(const ftg_config* cfg, const ftg_epochset* train,
                             const ftg_epochset* val /* may be NULL */, ftg_model** out);
FTG_API int ftg_train_svm(const ftg_config* cfg, const ftg_epochset* train, ftg_model** out);
FTG_API int ftg_model_kind(const ftg_model* m, char** kind_out);
FTG_API int ftg_model_save(const ftg_model* m, const char* path);
FTG_API int ftg_model_load_hybrid(const char* path, ftg_model** out);
FTG_API int ftg_model_load_svm(const char* path, ftg_model** out);
FTG_API int ftg_model_accuracy(ftg_model* m, const ftg_config* cfg, const ftg_epochset* set,
                               double* accuracy_out);
/* labels_out must hold n_epochs ints (class indices 0/1/2). */
FTG_API int ftg_model_predict(ftg_model* m, const ftg_config* cfg, const ftg_epochset* set,
                              int* labels_out);
FTG_API int ftg_model_history_json(const ftg_model* m, char** json_out);
FTG_API void ftg_model_free(ftg_model* m);

/* --- evaluation ------------------------------------------------------------- */
/* Per-subject k-fold cross-validation of both models over a cohort of epoch
 * files; writes the accuracy-table CSV and a JSON report with per-fold
 * details. Any failed fold makes the call return FTG_ERR_CHECK_FAILED after
 * writing the report. */
FTG_API int ftg_evaluate_cohort(const ftg_config* cfg, const char* const* epochset_paths,
                                int n_paths, const char* csv_out, const char* json_out,
                                double* hybrid_mean_out, double* svm_mean_out,
                                double* p_hybrid_vs_chance_out, double* p_svm_vs_chance_out);

/* Aggregate a bundled accuracy-table fixture (per-subject rows, model
 * columns); optionally verify the bundled reference statistics. */
FTG_API int ftg_fixture_eval(const char* fixture_csv, int check, const char* csv_out /* nullable */,
                             char** summary_json_out /* nullable */);

/* Two-sided exact Wilcoxon signed-rank p-value for paired samples. */
FTG_API int ftg_paired_significance(const double* a, const double* b, int n, double* p_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FATIGUE_CAPI_H */
