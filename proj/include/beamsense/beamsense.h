/* beamsense: smart-factory beam prediction workbench.
 *
 * C API over the simulation, sensing, and training pipeline. All functions
 * return bs_status; on failure, bs_last_error_message() describes the cause
 * (thread-local). Handles are opaque and must be released with their
 * matching destroy function.
 */
#ifndef BEAMSENSE_H
#define BEAMSENSE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BEAMSENSE_API __declspec(dllexport)
#else
#define BEAMSENSE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bs_status {
  BS_OK = 0,
  BS_ERR_INVALID_ARGUMENT = 1,
  BS_ERR_CONFIG = 2,
  BS_ERR_IO = 3,
  BS_ERR_LAYOUT = 4,
  BS_ERR_SIMULATION = 5,
  BS_ERR_TRAINING = 6,
  BS_ERR_NUMERIC = 7,
  BS_ERR_INTERNAL = 8
} bs_status;

typedef struct bs_config bs_config;

BEAMSENSE_API const char* bs_version(void);
BEAMSENSE_API const char* bs_status_name(bs_status status);

/* Last error message of the calling thread; empty string when none. */
BEAMSENSE_API const char* bs_last_error_message(void);

/* Configuration handle. Keys use the plain-text `section.key` form; values
 * are strings parsed on use. */
BEAMSENSE_API bs_status bs_config_create(bs_config** out);
BEAMSENSE_API bs_status bs_config_load(const char* path, bs_config** out);
BEAMSENSE_API bs_status bs_config_set(bs_config* cfg, const char* key, const char* value);
BEAMSENSE_API void bs_config_destroy(bs_config* cfg);

/* Dataset generation; mode is "single" or "multi". */
BEAMSENSE_API bs_status bs_generate(const bs_config* cfg, const char* mode, const char* out_dir);

/* Dynamic scatterer detection over one dataset path directory. */
BEAMSENSE_API bs_status bs_sense(const bs_config* cfg, const char* path_dir, const char* out_dir);

/* Pre-training on a multi-environment dataset; saves the best checkpoint. */
BEAMSENSE_API bs_status bs_pretrain(const bs_config* cfg, const char* dataset_dir,
                                    const char* out_dir);

/* Fine-tune vs. retrain comparison on a target-environment dataset. */
BEAMSENSE_API bs_status bs_finetune(const bs_config* cfg, const char* pretrained_dir,
                                    const char* dataset_dir, const char* out_dir);

/* Model evaluation; writes metrics JSON to out_path. */
BEAMSENSE_API bs_status bs_evaluate(const bs_config* cfg, const char* model_dir,
                                    const char* dataset_dir, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* BEAMSENSE_H */
