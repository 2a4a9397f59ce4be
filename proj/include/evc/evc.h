/*
 * evc.h - C interface to the evc prosody toolkit.
 *
 * Objects are opaque handles created by evc_*_create / *_load / *_read
 * functions and released with the matching *_free. Every fallible call
 * returns an evc_status; on failure a human-readable message for the calling
 * thread is available from evc_last_error() until the next failing call on
 * that thread.
 *
 * Handles are not internally synchronised. Distinct handles may be used from
 * different threads concurrently; all computations are pure.
 */
#ifndef EVC_EVC_H_
#define EVC_EVC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(EVC_BUILDING_LIBRARY)
#    define EVC_API __declspec(dllexport)
#  else
#    define EVC_API __declspec(dllimport)
#  endif
#else
#  define EVC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum evc_status {
  EVC_OK = 0,
  EVC_ERR_INVALID_ARGUMENT = 1,
  EVC_ERR_IO = 2,
  EVC_ERR_FORMAT = 3,
  EVC_ERR_UNSUPPORTED_CHANNELS = 4,
  EVC_ERR_UNSUPPORTED_DEPTH = 5,
  EVC_ERR_TOO_SHORT = 6,
  EVC_ERR_INSUFFICIENT_DATA = 7,
  EVC_ERR_DEGENERATE = 8,
  EVC_ERR_UNDEFINED = 9,
  EVC_ERR_LOOKUP = 10,
  EVC_ERR_SCHEMA = 11,
  EVC_ERR_INTERNAL = 12
} evc_status;

EVC_API const char* evc_version(void);
EVC_API const char* evc_status_name(evc_status status);
EVC_API const char* evc_last_error(void);

/* Strings returned through char** are heap allocated; release them here. */
EVC_API void evc_string_free(char* s);

/* ------------------------------------------------------------ sequences */

/* Owned array of doubles (contours, VUV flags as 0/1, embeddings). */
typedef struct evc_seq evc_seq;

EVC_API evc_status evc_seq_create(const double* values, size_t n, evc_seq** out);
EVC_API size_t evc_seq_size(const evc_seq* s);
EVC_API const double* evc_seq_data(const evc_seq* s);
EVC_API void evc_seq_free(evc_seq* s);

/* Whitespace/comma separated numbers from a text file. */
EVC_API evc_status evc_seq_read_text(const char* path, evc_seq** out);
/* CSV with header `frame,value`. */
EVC_API evc_status evc_seq_write_csv(const evc_seq* s, const char* path);

/* ------------------------------------------------------------- waveform */

typedef struct evc_waveform evc_waveform;

EVC_API evc_status evc_waveform_load(const char* path, evc_waveform** out);
EVC_API evc_status evc_waveform_create(const double* samples, size_t n, int sample_rate,
                                       evc_waveform** out);
EVC_API evc_status evc_waveform_save(const evc_waveform* w, const char* path);
EVC_API size_t evc_waveform_length(const evc_waveform* w);
EVC_API int evc_waveform_sample_rate(const evc_waveform* w);
EVC_API const double* evc_waveform_samples(const evc_waveform* w);
EVC_API void evc_waveform_free(evc_waveform* w);

/* ---------------------------------------------------------- parameters */

typedef struct evc_frame_params {
  size_t window_size; /* 1024 */
  size_t hop_size;    /* 256 */
  size_t n_mels;      /* 80 */
  double fmin;        /* 0 */
  double fmax;        /* 8000 */
} evc_frame_params;

typedef struct evc_f0_params {
  double f0_min;                /* 50 */
  double f0_max;                /* 600 */
  double periodicity_threshold; /* 0.45 */
} evc_f0_params;

typedef struct evc_smooth_params {
  size_t window; /* 9, odd */
  size_t order;  /* 2 */
} evc_smooth_params;

typedef struct evc_augment_params {
  int max_shift;    /* 15 */
  int min_segments; /* 2 */
  int max_segments; /* 5 */
  double min_scale; /* 0.4 */
  double max_scale; /* 1.6 */
} evc_augment_params;

EVC_API void evc_frame_params_default(evc_frame_params* p);
EVC_API void evc_f0_params_default(evc_f0_params* p);
EVC_API void evc_smooth_params_default(evc_smooth_params* p);
EVC_API void evc_augment_params_default(evc_augment_params* p);

/* --------------------------------------------------- signal and prosody */

/* Row-major T x n_mels written to a new evc_seq; *frames receives T. */
EVC_API evc_status evc_mel_spectrogram(const evc_waveform* w, const evc_frame_params* p,
                                       evc_seq** mel, size_t* frames);
EVC_API evc_status evc_frame_energy(const evc_waveform* w, const evc_frame_params* p,
                                    evc_seq** energy);
/* Frames follow the mel framing of `frame` so F0 and energy line up. */
EVC_API evc_status evc_estimate_f0(const evc_waveform* w, const evc_frame_params* frame,
                                   const evc_f0_params* p, evc_seq** f0, evc_seq** vuv);
EVC_API evc_status evc_savgol(const evc_seq* values, const evc_smooth_params* p, evc_seq** out);
/* F0 smoothing: bridges unvoiced gaps, smooths, restores zeros. */
EVC_API evc_status evc_savgol_f0(const evc_seq* f0, const evc_seq* vuv,
                                 const evc_smooth_params* p, evc_seq** out);

/* ------------------------------------------------------------ augmenting */

EVC_API evc_status evc_random_shift(const evc_seq* values, int shift, evc_seq** out);
EVC_API evc_status evc_time_warp(const evc_seq* values, const size_t* boundaries,
                                 size_t n_boundaries, const double* scales, size_t n_scales,
                                 evc_seq** out);
/* *op_out receives 0 for shift, 1 for warp. */
EVC_API evc_status evc_pro_aug(const evc_seq* f0, const evc_seq* energy,
                               const evc_augment_params* p, uint64_t seed, evc_seq** f0_out,
                               evc_seq** energy_out, int* op_out);

/* --------------------------------------------------------------- bundles */

typedef struct evc_bundle evc_bundle;

EVC_API evc_status evc_bundle_read(const char* path, evc_bundle** out);
EVC_API evc_status evc_bundle_write(const evc_bundle* b, const char* path);
/* Serialised JSON, as written by evc_bundle_write. */
EVC_API evc_status evc_bundle_to_json(const evc_bundle* b, char** out);
EVC_API void evc_bundle_free(evc_bundle* b);

/* Copies a contour field: "f0", "energy", "vuv", "f0_smooth",
 * "energy_smooth", "f0_aug", "energy_aug", "durations_smooth",
 * "duration_units", "duration_counts". EVC_ERR_LOOKUP when absent. */
EVC_API evc_status evc_bundle_get(const evc_bundle* b, const char* field, evc_seq** out);
EVC_API int evc_bundle_has_seed(const evc_bundle* b);
EVC_API uint64_t evc_bundle_seed(const evc_bundle* b);

/* units_path may be NULL. */
EVC_API evc_status evc_extract(const char* wav_path, const evc_frame_params* frame,
                               const evc_f0_params* f0, const evc_smooth_params* smooth,
                               const char* units_path, evc_bundle** out);
EVC_API evc_status evc_bundle_smooth(evc_bundle* b, const evc_smooth_params* p);
EVC_API evc_status evc_bundle_augment(evc_bundle* b, const evc_augment_params* p, uint64_t seed);

/* ----------------------------------------------------------------- units */

typedef struct evc_matrix evc_matrix;
typedef struct evc_units evc_units;
typedef struct evc_codebook evc_codebook;
typedef struct evc_dedup_result evc_dedup_result;

/* .csv -> CSV, otherwise little-endian float32 with `<path>.json` sidecar. */
EVC_API evc_status evc_features_load(const char* path, evc_matrix** out);
EVC_API evc_status evc_matrix_create(const double* row_major, size_t rows, size_t cols,
                                     evc_matrix** out);
EVC_API size_t evc_matrix_rows(const evc_matrix* m);
EVC_API size_t evc_matrix_cols(const evc_matrix* m);
EVC_API const double* evc_matrix_data(const evc_matrix* m);
EVC_API void evc_matrix_free(evc_matrix* m);

/* Per-iteration inertia is written to *inertia when non-NULL. */
EVC_API evc_status evc_kmeans_fit(const evc_matrix* features, size_t k, uint64_t seed,
                                  size_t max_iters, size_t jobs, evc_codebook** out,
                                  evc_seq** inertia);
EVC_API evc_status evc_codebook_read(const char* path, evc_codebook** out);
EVC_API evc_status evc_codebook_write(const evc_codebook* cb, const char* path);
EVC_API size_t evc_codebook_k(const evc_codebook* cb);
EVC_API size_t evc_codebook_dim(const evc_codebook* cb);
EVC_API void evc_codebook_free(evc_codebook* cb);

EVC_API evc_status evc_kmeans_assign(const evc_matrix* features, const evc_codebook* cb,
                                     evc_units** out);
EVC_API evc_status evc_units_create(const int32_t* units, size_t n, evc_units** out);
EVC_API evc_status evc_units_read(const char* path, evc_units** out);
EVC_API evc_status evc_units_write(const evc_units* u, const char* path);
EVC_API size_t evc_units_size(const evc_units* u);
EVC_API const int32_t* evc_units_data(const evc_units* u);
EVC_API void evc_units_free(evc_units* u);

EVC_API evc_status evc_dedup(const evc_units* u, evc_dedup_result** out);
EVC_API evc_status evc_expand(const evc_dedup_result* d, evc_units** out);
EVC_API evc_status evc_dedup_read(const char* path, evc_dedup_result** out);
EVC_API evc_status evc_dedup_write(const evc_dedup_result* d, const char* path);
EVC_API size_t evc_dedup_size(const evc_dedup_result* d);
EVC_API const int32_t* evc_dedup_units(const evc_dedup_result* d);
EVC_API const int32_t* evc_dedup_counts(const evc_dedup_result* d);
EVC_API void evc_dedup_free(evc_dedup_result* d);

/* ------------------------------------------------------- neural numerics */

/* All matrices row-major. Output buffers are caller-allocated with the
 * shapes stated. */

/* out: tq x d. weights (optional): tq x tk. w_*: d x d. */
EVC_API evc_status evc_cross_attention(const double* q_in, size_t tq, const double* kv_in,
                                       size_t tk, size_t d, const double* wq, const double* wk,
                                       const double* wv, const double* wo, double* out,
                                       double* weights);
/* out = -lambda * upstream, n values. */
EVC_API evc_status evc_grl_backward(const double* upstream, size_t n, double lambda, double* out);

/* Returns the summed loss in *value; grad buffers (same lengths as the
 * predictions) may be NULL. vuv holds 0/1 flags. */
EVC_API evc_status evc_loss_prosody(const double* f0_hat, const double* f0, const double* vuv,
                                    size_t n_frames, const double* energy_hat,
                                    const double* energy, const double* dur_hat,
                                    const double* dur, size_t n_units, double* value,
                                    double* grad_f0_hat, double* grad_energy_hat,
                                    double* grad_dur_hat);
/* a, p, n: n_rows x d. Gradients optional. */
EVC_API evc_status evc_loss_triplet(const double* a, const double* p, const double* n,
                                    size_t n_rows, size_t d, double alpha, double* value,
                                    double* grad_a, double* grad_p, double* grad_n);
EVC_API evc_status evc_cross_entropy(const double* logits, size_t n_rows, size_t n_classes,
                                     const int32_t* labels, double* value, double* grad);
EVC_API evc_status evc_cosine_similarity(const double* u, const double* v, size_t n,
                                         double* out);
/* Weighted sum; names[i] pairs with values[i]; weights may name a subset of
 * the parts (others weigh 1). */
EVC_API evc_status evc_assemble_losses(const char* const* part_names, const double* part_values,
                                       size_t n_parts, const char* const* weight_names,
                                       const double* weight_values, size_t n_weights,
                                       double* total);

/* --------------------------------------------------------------- metrics */

EVC_API evc_status evc_dtw(const double* a, size_t na, const double* b, size_t nb,
                           double* cost, size_t* path_len);
EVC_API evc_status evc_aligned_pcc(const double* a, size_t na, const double* b, size_t nb,
                                   int drop_zeros, double* out);
EVC_API evc_status evc_wer(const char* ref, const char* hyp, double* out);
EVC_API evc_status evc_cer(const char* ref, const char* hyp, double* out);
EVC_API evc_status evc_eecs(const double* e1, const double* e2, size_t n, double* out);

enum {
  EVC_WARN_F0_PCC_UNDEFINED = 1,
  EVC_WARN_E_PCC_UNDEFINED = 2
};

typedef struct evc_metric_report {
  int has_wer, has_cer, has_eecs, has_f0_pcc, has_e_pcc;
  double wer, cer, eecs, f0_pcc, e_pcc;
  unsigned warnings; /* EVC_WARN_* bits */
} evc_metric_report;

/* Texts and embeddings may be NULL; missing inputs leave the metric absent.
 * A zero-variance contour leaves the PCC absent and sets a warning bit. */
EVC_API evc_status evc_evaluate(const evc_bundle* ref, const evc_bundle* hyp,
                                const char* ref_text, const char* hyp_text,
                                const evc_seq* ref_emb, const evc_seq* hyp_emb,
                                evc_metric_report* out);
/* Keys wer, cer, eecs, f0_pcc, e_pcc (null when absent); ref/hyp names are
 * added as "ref"/"hyp" when non-NULL. */
EVC_API evc_status evc_metric_report_to_json(const evc_metric_report* r, const char* ref_name,
                                             const char* hyp_name, char** out);
/* {"summary": true, "count": n, ...per-metric means over present values}. */
EVC_API evc_status evc_metric_summary_to_json(const evc_metric_report* reports, size_t n,
                                              char** out);

/* ---------------------------------------------------------------- checks */

enum { EVC_CHECK_GRADIENTS = 1, EVC_CHECK_ORACLES = 2 };

/* Invoked once per check with a JSON line
 * {"check":..,"passed":..,"max_error":..,"tolerance":..,"cases":..}. */
typedef void (*evc_check_callback)(const char* json_line, void* user);

EVC_API evc_status evc_run_checks(unsigned which, uint64_t seed, evc_check_callback cb,
                                  void* user, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif /* EVC_EVC_H_ */
