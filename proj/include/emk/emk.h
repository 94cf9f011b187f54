#ifndef EMK_H
#define EMK_H

/* C interface to the evolution-generator toolkit. All functions are
 * thread-safe; error details for the calling thread are retrievable via
 * emk_last_error(). Strings returned through char** outputs are owned by the
 * caller and released with emk_string_free(). Matrices cross the boundary as
 * row-major interleaved doubles: re(0,0), im(0,0), re(0,1), ... (2*dim*dim). */

#include <stddef.h>

#if defined(_WIN32)
#define EMK_API __declspec(dllexport)
#elif defined(__GNUC__)
#define EMK_API __attribute__((visibility("default")))
#else
#define EMK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum emk_status {
  EMK_OK = 0,
  EMK_ERR_INVALID_ARGUMENT = 1,
  EMK_ERR_UNKNOWN_MODEL = 2,
  EMK_ERR_SINGULAR = 3,
  EMK_ERR_CLASSIFICATION = 4,
  EMK_ERR_NUMERIC = 5,
  EMK_ERR_IO = 6,
  EMK_ERR_INSUFFICIENT_DATA = 7,
  EMK_ERR_INTERNAL = 99
} emk_status;

typedef enum emk_point_class {
  EMK_CLASS_REGULAR = 0,
  EMK_CLASS_DP = 1,
  EMK_CLASS_EP = 2
} emk_point_class;

typedef enum emk_gauge {
  EMK_GAUGE_ADIABATIC = 0,
  EMK_GAUGE_REGULAR_DP = 1,
  EMK_GAUGE_REGULAR_EP = 2,
  EMK_GAUGE_CLOSED_FORM = 3
} emk_gauge;

typedef struct emk_model emk_model;
typedef struct emk_scan_result emk_scan_result;

typedef struct emk_scan_record {
  double q;
  int classification; /* emk_point_class */
  double gap;
  double knorm;
  double chi_re;
  double chi_im;
  double residual;
  unsigned flags;
} emk_scan_record;

EMK_API const char* emk_version(void);
EMK_API const char* emk_status_name(emk_status s);

/* Message for the last failing call on this thread; empty string if none. */
EMK_API const char* emk_last_error(void);
EMK_API void emk_string_free(char* s);

/* JSON array of model descriptors: name, params with defaults, sweep params. */
EMK_API emk_status emk_models_json(char** out_json);

/* params_json: JSON object of numeric overrides, e.g. {"gamma": 0.5}; NULL ok. */
EMK_API emk_status emk_model_open(const char* name, const char* params_json, emk_model** out);
EMK_API emk_status emk_model_open_custom(const char* path, emk_model** out);
EMK_API void emk_model_close(emk_model* m);

EMK_API emk_status emk_model_dim(const emk_model* m, int* out_dim);
/* H(q) / dH(q) of the model's sweep family at its current parameters. */
EMK_API emk_status emk_model_hamiltonian(const emk_model* m, double q, double* out);
EMK_API emk_status emk_model_dhamiltonian(const emk_model* m, double q, double* out);
EMK_API emk_status emk_model_classify(const emk_model* m, double q, int* out_class,
                                      double* out_gap, double* out_min_sv);
/* K(t, q) in the requested gauge (closed-form falls back to regular-dp when the
 * model has no closed form). */
EMK_API emk_status emk_model_k(const emk_model* m, emk_gauge gauge, double q, double t,
                               double* out);
EMK_API emk_status emk_model_susceptibility(const emk_model* m, int n, double q, double* out_re,
                                            double* out_im);
EMK_API emk_status emk_model_fidelity(const emk_model* m, int n, double q, double eps,
                                      double* out_value, double* out_imag);

/* config_json mirrors the CLI scan options:
 * {"model": "...", "params": {...}, "model_file": "...", "sweep":
 *  {"param": "...", "start": a, "stop": b, "step": s}, "gauge": "adiabatic",
 *  "t_ref": 1.0, "workers": 1, "tolerances": {...}} */
EMK_API emk_status emk_scan_run(const char* config_json, emk_scan_result** out);
EMK_API size_t emk_scan_size(const emk_scan_result* r);
EMK_API emk_status emk_scan_record_at(const emk_scan_result* r, size_t i, emk_scan_record* out);
/* format: "csv" or "json". */
EMK_API emk_status emk_scan_render(const emk_scan_result* r, const char* format, char** out);
EMK_API emk_status emk_scan_parse(const char* text, const char* format, emk_scan_result** out);
EMK_API void emk_scan_free(emk_scan_result* r);

/* Power-law fit of log(quantity) vs log|q - q_star| over [lo, hi];
 * quantity "knorm" or "chi". Result: {"exponent", "r2", "coeff", "n_points"}. */
EMK_API emk_status emk_fit(const emk_scan_result* r, double q_star, double lo, double hi,
                           const char* quantity, char** out_json);

/* config_json: {"model", "params", "model_file", "gauge", "q", "t_ref",
 * "corrupt_k"}. Report lists each check with value and bound; *out_pass is 1
 * only if every check passed. */
EMK_API emk_status emk_verify_run(const char* config_json, char** out_report_json, int* out_pass);

#ifdef __cplusplus
}
#endif

#endif /* EMK_H */
