#ifndef DEWS_DEWS_H
#define DEWS_DEWS_H

/* C interface to the watermark stress-test library. Objects are opaque and
 * owned by the caller once returned; free them with the matching *_free.
 * Every call returning dews_status leaves a message for dews_last_error()
 * (per thread) when it fails. Strings returned through char** are allocated
 * by the library and released with dews_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DEWS_BUILDING_LIBRARY)
#    define DEWS_API __declspec(dllexport)
#  else
#    define DEWS_API __declspec(dllimport)
#  endif
#else
#  define DEWS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dews_status {
  DEWS_OK = 0,
  DEWS_INVALID_ARGUMENT = 1,
  DEWS_OUT_OF_RANGE = 2,
  DEWS_SHAPE_MISMATCH = 3,
  DEWS_IO = 4,
  DEWS_FORMAT = 5,
  DEWS_CAPACITY = 6,
  DEWS_DEGENERATE_BAND = 7,
  DEWS_CONFIG = 8,
  DEWS_INFEASIBLE = 9,
  DEWS_INTERNAL = 100
} dews_status;

typedef struct dews_image dews_image;
typedef struct dews_bank dews_bank;
typedef struct dews_schedule dews_schedule;

DEWS_API const char* dews_version(void);
DEWS_API const char* dews_last_error(void);
DEWS_API const char* dews_status_name(dews_status status);
DEWS_API void dews_string_free(char* s);

/* images: planar layout, h*w*c doubles. data may be NULL for a zero image. */
DEWS_API dews_status dews_image_new(size_t h, size_t w, size_t c, const double* data, dews_image** out);
/* kind: gaussian_field, flat, checker, multiscale_texture */
DEWS_API dews_status dews_image_synth(const char* kind, size_t h, size_t w, size_t c, uint64_t seed,
                                      dews_image** out);
DEWS_API dews_status dews_image_load(const char* path, dews_image** out);
/* .png writes 8-bit PNG, anything else the raw DWS1 format */
DEWS_API dews_status dews_image_save(const dews_image* img, const char* path);
DEWS_API dews_status dews_image_save_png(const dews_image* img, const char* path, int bit_depth);
DEWS_API void dews_image_free(dews_image* img);
DEWS_API dews_status dews_image_shape(const dews_image* img, size_t* h, size_t* w, size_t* c);
/* borrowed pointer, valid until the image is freed */
DEWS_API dews_status dews_image_data(const dews_image* img, const double** data, size_t* len);

DEWS_API dews_status dews_psnr(const dews_image* a, const dews_image* b, double* out);
DEWS_API dews_status dews_ssim(const dews_image* a, const dews_image* b, double* out);

/* schedule_json NULL gives the protocol default;
 * otherwise {"kind": ..., "beta_start": ..., "beta_end": ..., "T": ...} */
DEWS_API dews_status dews_schedule_new(const char* schedule_json, dews_schedule** out);
DEWS_API dews_status dews_schedule_steps(const dews_schedule* s, int* out);
DEWS_API dews_status dews_schedule_alpha_bar(const dews_schedule* s, int t, double* out);
DEWS_API dews_status dews_schedule_start_step(const dews_schedule* s, double t_star, int* out);
DEWS_API void dews_schedule_free(dews_schedule* s);

/* profile: low/mid/high energy fractions summing to 1; count = L_enc */
DEWS_API dews_status dews_bank_new(uint64_t key_seed, const double profile[3], size_t count, size_t h, size_t w,
                                   size_t c, dews_bank** out);
DEWS_API dews_status dews_bank_count(const dews_bank* bank, size_t* out);
DEWS_API dews_status dews_bank_gram_offdiag_max(const dews_bank* bank, double* out);
DEWS_API void dews_bank_free(dews_bank* bank);

/* payload_hex carries count/ecc_r info bits, repeated ecc_r times on embed */
DEWS_API dews_status dews_embed(const dews_image* x, const char* payload_hex, int ecc_r, const dews_bank* bank,
                                double gamma, dews_image** out);
/* x_ref NULL selects blind decoding. scores (optional) receives count
 * doubles. */
DEWS_API dews_status dews_decode(const dews_image* y, const dews_image* x_ref, const dews_bank* bank, int ecc_r,
                                 char** payload_hex, double* detect_score, double* scores);

/* edit_json mirrors the edit configuration; step_log_csv optional */
DEWS_API dews_status dews_edit(const dews_image* x, const char* edit_json, const dews_schedule* sched,
                               uint64_t seed, dews_image** out, char** step_log_csv);

DEWS_API dews_status dews_band_energies(const dews_image* residual, double f1, double f2, double out[3]);
/* one-sample retention ratio; band_csv optional */
DEWS_API dews_status dews_spectral_retention(const dews_image* edited_wm, const dews_image* edited_base,
                                             const dews_image* input_wm, const dews_image* input_clean, double f1,
                                             double f2, double rho[3], char** band_csv);

DEWS_API dews_status dews_snr(double alpha_bar, double gamma, double* out);
DEWS_API dews_status dews_mi_upper_bound(int d, double gamma, double alpha_bar, double* out);
DEWS_API dews_status dews_fano_lower_bound(double mi_nats, int L, double* out);
DEWS_API dews_status dews_gamma_for_psnr(double psnr_db, double* out);
/* CSV t_star,start_step,alpha_bar,snr,mi_bound_nats,mi_bound_bits,fano_bound */
DEWS_API dews_status dews_bounds_table(const dews_schedule* sched, double gamma, int d, int L,
                                       const double* t_stars, size_t n, char** csv);

DEWS_API dews_status dews_default_protocol_json(char** out);
/* format: "csv" or "json"; workers <= 0 keeps the config value.
 * aggregates_csv (optional) receives the aggregate table. */
DEWS_API dews_status dews_run_protocol(const char* config_json, const char* out_dir, const char* format,
                                       int workers, char** aggregates_csv);

DEWS_API dews_status dews_default_tune_json(char** out);
/* trace_csv_path optional */
DEWS_API dews_status dews_tune(const char* config_json, uint64_t seed, const char* trace_csv_path,
                               char** result_json);

#ifdef __cplusplus
}
#endif

#endif
