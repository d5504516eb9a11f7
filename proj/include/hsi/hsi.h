/*
 * hsi: hyperspectral pixel classification with superpixel majority-vote
 * refinement.
 *
 * C interface over the C++ core. All objects are opaque handles created by
 * *_read / *_create / compute functions and released with the matching
 * *_free. Every fallible call returns an hsi_status; on failure the message
 * for the calling thread is available from hsi_last_error() until the next
 * call on that thread. Output handles are only written on success.
 *
 * Handles are immutable after creation and may be shared read-only across
 * threads.
 */
#ifndef HSI_HSI_H
#define HSI_HSI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(HSI_BUILDING_LIBRARY)
#    define HSI_API __declspec(dllexport)
#  else
#    define HSI_API __declspec(dllimport)
#  endif
#else
#  define HSI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hsi_status {
  HSI_OK = 0,
  HSI_ERR_DIMENSION_MISMATCH = 1,
  HSI_ERR_NON_FINITE_VALUE = 2,
  HSI_ERR_LABEL_OUT_OF_RANGE = 3,
  HSI_ERR_BAD_MAGIC = 4,
  HSI_ERR_BAD_HEADER = 5,
  HSI_ERR_TRUNCATED_PAYLOAD = 6,
  HSI_ERR_HEADER_TOO_LARGE = 7,
  HSI_ERR_IO_FAILURE = 8,
  HSI_ERR_BAND_OUT_OF_RANGE = 9,
  HSI_ERR_PALETTE_TOO_SMALL = 10,
  HSI_ERR_EMPTY_CLASS = 11,
  HSI_ERR_FRACTION_TOO_SMALL = 12,
  HSI_ERR_NON_FINITE_LOSS = 13,
  HSI_ERR_TOO_MANY_SUPERPIXELS = 14,
  HSI_ERR_EMPTY_SEGMENT = 15,
  HSI_ERR_EMPTY_MASK = 16,
  HSI_ERR_INVALID_ARGUMENT = 17,
  HSI_ERR_INVALID_CONFIG = 18,
  HSI_ERR_INTERNAL = 19
} hsi_status;

typedef struct hsi_cube hsi_cube;               /* H x W x B reflectance, band-sequential */
typedef struct hsi_labels hsi_labels;           /* ground truth, 0 = unlabeled */
typedef struct hsi_classmap hsi_classmap;       /* total prediction map */
typedef struct hsi_superpixels hsi_superpixels; /* segment-id partition */
typedef struct hsi_mask hsi_mask;               /* boolean pixel mask */
typedef struct hsi_rgb hsi_rgb;                 /* 8-bit RGB image */
typedef struct hsi_affinity hsi_affinity;       /* right/down pixel affinities */
typedef struct hsi_model hsi_model;             /* trained classifier */

/* ---- library-wide ------------------------------------------------------ */

HSI_API const char* hsi_version(void);
HSI_API const char* hsi_last_error(void);
HSI_API const char* hsi_status_name(hsi_status status);
/* Caps worker threads; 0 = HSI_THREADS or hardware concurrency. Results never
 * depend on this value. */
HSI_API void hsi_set_threads(unsigned threads);
HSI_API unsigned hsi_get_threads(void);
/* Frees strings and byte buffers returned by this library. */
HSI_API void hsi_free_buffer(void* buffer);

/* ---- cubes ---------------------------------------------------------------- */

HSI_API hsi_status hsi_cube_create(size_t height, size_t width, size_t bands, const float* data,
                                   hsi_cube** out);
HSI_API hsi_status hsi_cube_read(const char* path, hsi_cube** out);
HSI_API hsi_status hsi_cube_write(const hsi_cube* cube, const char* path);
HSI_API void hsi_cube_dims(const hsi_cube* cube, size_t* height, size_t* width, size_t* bands);
HSI_API const float* hsi_cube_data(const hsi_cube* cube);
HSI_API void hsi_cube_free(hsi_cube* cube);

/* ---- label maps ----------------------------------------------------------- */

/* num_classes is taken as the largest label present. */
HSI_API hsi_status hsi_labels_create(size_t height, size_t width, const uint16_t* labels, hsi_labels** out);
HSI_API hsi_status hsi_labels_read(const char* path, hsi_labels** out);
HSI_API hsi_status hsi_labels_write(const hsi_labels* labels, const char* path);
HSI_API void hsi_labels_dims(const hsi_labels* labels, size_t* height, size_t* width, size_t* num_classes);
HSI_API const uint16_t* hsi_labels_data(const hsi_labels* labels);
/* counts must hold num_classes + 1 entries; counts[0] is the unlabeled count. */
HSI_API void hsi_labels_histogram(const hsi_labels* labels, uint64_t* counts);
HSI_API void hsi_labels_free(hsi_labels* labels);

/* Checks every cube and label-map invariant and that dimensions agree. */
HSI_API hsi_status hsi_validate(const hsi_cube* cube, const hsi_labels* labels);

/* ---- class maps ----------------------------------------------------------- */

HSI_API hsi_status hsi_classmap_create(size_t height, size_t width, size_t num_classes, const uint16_t* classes,
                                       hsi_classmap** out);
HSI_API hsi_status hsi_classmap_read(const char* path, hsi_classmap** out);
/* Reads an externally produced .hsp and checks it against the ground truth. */
HSI_API hsi_status hsi_classmap_import(const char* path, const hsi_labels* labels, hsi_classmap** out);
HSI_API hsi_status hsi_classmap_write(const hsi_classmap* map, const char* path);
HSI_API void hsi_classmap_dims(const hsi_classmap* map, size_t* height, size_t* width, size_t* num_classes);
HSI_API const uint16_t* hsi_classmap_data(const hsi_classmap* map);
HSI_API void hsi_classmap_free(hsi_classmap* map);

/* ---- masks ---------------------------------------------------------------- */

HSI_API hsi_status hsi_mask_create(size_t height, size_t width, const uint8_t* values, hsi_mask** out);
HSI_API hsi_status hsi_mask_read(const char* path, hsi_mask** out);
HSI_API hsi_status hsi_mask_write(const hsi_mask* mask, const char* path);
HSI_API size_t hsi_mask_count(const hsi_mask* mask);
HSI_API const uint8_t* hsi_mask_data(const hsi_mask* mask);
HSI_API void hsi_mask_free(hsi_mask* mask);

typedef struct hsi_split_params {
  double fraction;
  uint64_t seed;
  int stratified;        /* nonzero = per-class proportional */
  size_t min_per_class;
} hsi_split_params;

HSI_API hsi_split_params hsi_split_defaults(void);
HSI_API hsi_status hsi_split(const hsi_labels* labels, const hsi_split_params* params, hsi_mask** train,
                             hsi_mask** test);

/* ---- classifiers ---------------------------------------------------------- */

typedef enum hsi_model_kind { HSI_MODEL_CENTROID = 0, HSI_MODEL_SOFTMAX = 1 } hsi_model_kind;

typedef struct hsi_train_params {
  hsi_model_kind kind;
  size_t patch_radius;
  int standardize;
  size_t epochs;
  size_t batch_size;
  double learning_rate;
  double l2;
  uint64_t seed;
} hsi_train_params;

HSI_API hsi_train_params hsi_train_defaults(void);
HSI_API hsi_status hsi_model_train(const hsi_cube* cube, const hsi_labels* labels, const hsi_mask* train_mask,
                                   const hsi_train_params* params, hsi_model** out);
HSI_API hsi_status hsi_model_predict(const hsi_model* model, const hsi_cube* cube, hsi_classmap** out);
HSI_API hsi_status hsi_model_read(const char* path, hsi_model** out);
HSI_API hsi_status hsi_model_write(const hsi_model* model, const char* path);
/* Objective after each epoch (entry 0 = before training). Softmax models
 * only; returns the number of entries and copies up to `capacity`. */
HSI_API size_t hsi_model_loss_history(const hsi_model* model, double* out, size_t capacity);
HSI_API void hsi_model_free(hsi_model* model);

/* ---- rendering ------------------------------------------------------------ */

HSI_API hsi_status hsi_cube_to_rgb(const hsi_cube* cube, size_t band_r, size_t band_g, size_t band_b,
                                   hsi_rgb** out);
/* Defaults: round(0.6(B-1)), round(0.4(B-1)), round(0.1(B-1)). */
HSI_API void hsi_default_rgb_bands(size_t bands, size_t* band_r, size_t* band_g, size_t* band_b);
HSI_API void hsi_rgb_dims(const hsi_rgb* image, size_t* height, size_t* width);
HSI_API const uint8_t* hsi_rgb_data(const hsi_rgb* image);
HSI_API hsi_status hsi_rgb_write_png(const hsi_rgb* image, const char* path);
HSI_API void hsi_rgb_free(hsi_rgb* image);

/* palette: `colors` RGB triplets; NULL selects the built-in 16-color palette.
 * On success *png is allocated (release with hsi_free_buffer). */
HSI_API hsi_status hsi_classmap_render_png(const hsi_classmap* map, const uint8_t* palette, size_t colors,
                                           uint8_t** png, size_t* size);
HSI_API hsi_status hsi_labels_render_png(const hsi_labels* labels, const uint8_t* palette, size_t colors,
                                         uint8_t** png, size_t* size);
/* Copies the built-in palette (48 bytes) into `out`. */
HSI_API size_t hsi_default_palette(uint8_t* out, size_t capacity);

/* ---- superpixels ---------------------------------------------------------- */

typedef struct hsi_slic_params {
  size_t n;
  double compactness;
  size_t iterations;
  uint64_t seed;
} hsi_slic_params;

HSI_API hsi_slic_params hsi_slic_defaults(void);
HSI_API hsi_status hsi_superpixels_slic(const hsi_rgb* image, const hsi_slic_params* params,
                                        hsi_superpixels** out);

HSI_API hsi_status hsi_affinity_create(size_t height, size_t width, const float* right, const float* down,
                                       hsi_affinity** out);
HSI_API hsi_status hsi_affinity_read(const char* path, hsi_affinity** out);
HSI_API hsi_status hsi_affinity_write(const hsi_affinity* aff, const char* path);
HSI_API void hsi_affinity_free(hsi_affinity* aff);
HSI_API hsi_status hsi_superpixels_affinity(const hsi_affinity* aff, size_t n, uint64_t seed,
                                            hsi_superpixels** out);

HSI_API hsi_status hsi_superpixels_create(size_t height, size_t width, const uint32_t* ids,
                                          hsi_superpixels** out);
HSI_API hsi_status hsi_superpixels_read(const char* path, hsi_superpixels** out);
HSI_API hsi_status hsi_superpixels_write(const hsi_superpixels* sp, const char* path);
HSI_API hsi_status hsi_superpixels_enforce_connectivity(const hsi_superpixels* sp, hsi_superpixels** out);
HSI_API void hsi_superpixels_dims(const hsi_superpixels* sp, size_t* height, size_t* width, size_t* segments);
HSI_API const uint32_t* hsi_superpixels_data(const hsi_superpixels* sp);
/* Writes a PNG of `image` with segment boundaries painted red. */
HSI_API hsi_status hsi_superpixels_overlay_png(const hsi_superpixels* sp, const hsi_rgb* image, const char* path);
HSI_API void hsi_superpixels_free(hsi_superpixels* sp);

/* ---- refinement ----------------------------------------------------------- */

HSI_API hsi_status hsi_refine(const hsi_classmap* z, const hsi_superpixels* sp, hsi_classmap** out);
/* Extension: substitutes known training labels into z before voting. */
HSI_API hsi_status hsi_pin_training_labels(const hsi_classmap* z, const hsi_labels* truth,
                                           const hsi_mask* train_mask, hsi_classmap** out);

typedef struct hsi_delta {
  size_t test_pixels;
  size_t correct_before;
  size_t correct_after;
  double oa_before;
  double oa_after;
  size_t changed_pixels;
  size_t segments_with_flips;
  size_t fixed;   /* wrong -> right on test pixels */
  size_t broken;  /* right -> wrong on test pixels */
} hsi_delta;

/* Per-segment flips are included in *json (release with hsi_free_buffer);
 * pass json = NULL to skip. */
HSI_API hsi_status hsi_refinement_delta(const hsi_classmap* z, const hsi_classmap* y, const hsi_labels* truth,
                                        const hsi_mask* test_mask, const hsi_superpixels* sp, hsi_delta* out,
                                        char** json);

/* ---- evaluation ----------------------------------------------------------- */

typedef struct hsi_metrics {
  double oa;
  double kappa;
  int degenerate;  /* expected agreement 1, kappa reported as 0 */
  size_t test_pixels;
  size_t correct;
} hsi_metrics;

HSI_API hsi_status hsi_evaluate(const hsi_classmap* pred, const hsi_labels* truth, const hsi_mask* mask,
                                hsi_metrics* out);
/* Full report (confusion matrix, per-class accuracy) as JSON. */
HSI_API hsi_status hsi_evaluate_json(const hsi_classmap* pred, const hsi_labels* truth, const hsi_mask* mask,
                                     char** json);

/* ---- experiments ---------------------------------------------------------- */

/* Runs the experiment described by the config file and writes runs.csv,
 * aggregate.csv and table.txt to its output directory (overridden by
 * output_dir when non-NULL). *table receives the formatted table. */
HSI_API hsi_status hsi_experiment_run(const char* config_path, const char* output_dir, char** table);

#ifdef __cplusplus
}
#endif

#endif /* HSI_HSI_H */
