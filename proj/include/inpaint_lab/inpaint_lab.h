#ifndef INPAINT_LAB_H
#define INPAINT_LAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define IL_API __attribute__((visibility("default")))
#else
#define IL_API
#endif

typedef enum il_status {
  IL_OK = 0,
  IL_ERR_VALIDATION = 1, /* bad input or config; CLI exit code 1 */
  IL_ERR_RUNTIME = 2     /* failure while working; CLI exit code 2 */
} il_status;

typedef enum il_plot_kind {
  IL_PLOT_GAN_LOSS = 0,
  IL_PLOT_ENHANCE_LOSS = 1,
  IL_PLOT_INPAINT_TRACE = 2
} il_plot_kind;

/* Opaque handle to an open run directory. Holds the directory lock. */
typedef struct il_run il_run;

IL_API const char* il_version(void);

/* Message of the last failure on the calling thread ("" when none). */
IL_API const char* il_last_error(void);

/* Strings returned through char** out-params are owned by the caller. */
IL_API void il_free_string(char* s);

/* Validates a config file and returns its normalized JSON. seed may be NULL. */
IL_API il_status il_validate_config(const char* config_path, const uint64_t* seed, char** normalized_json);

/* Opens (creating if needed) a run directory. Either config_path or run_dir
   may be NULL, not both. seed may be NULL; otherwise it overrides the
   config's top-level seed. */
IL_API il_status il_run_open(const char* config_path, const char* run_dir, const uint64_t* seed,
                             il_run** out);
IL_API void il_run_close(il_run* run);

/* Borrowed strings, valid until il_run_close. */
IL_API const char* il_run_dir(const il_run* run);
IL_API const char* il_run_config_hash(const il_run* run);

IL_API il_status il_prepare_data(il_run* run);
IL_API il_status il_make_masks(il_run* run);
IL_API il_status il_train_gan(il_run* run, int resume);
IL_API il_status il_train_enhance(il_run* run);
/* manifest may be NULL (run_dir/masks/manifest.json). */
IL_API il_status il_inpaint(il_run* run, const char* manifest, int use_enhancer);
IL_API il_status il_evaluate(il_run* run);
/* Plots every history and trace found in the run. */
IL_API il_status il_plot(il_run* run);

/* Single plot from a CSV; writes out_png and its .summary.json sibling. */
IL_API il_status il_emit_plot(const char* csv_path, const char* out_png, il_plot_kind kind);
IL_API il_status il_parse_plot_kind(const char* name, il_plot_kind* out);

/* Metrics on interleaved 8-bit RGB buffers of height*width*3 bytes. */
IL_API il_status il_psnr(const uint8_t* a, const uint8_t* b, int height, int width, double* out_db);
IL_API il_status il_ssim(const uint8_t* a, const uint8_t* b, int height, int width, double* out);

#ifdef __cplusplus
}
#endif

#endif
