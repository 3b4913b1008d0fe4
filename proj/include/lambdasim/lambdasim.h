/* lambdasim — Monte Carlo simulator and estimator toolkit for transient
 * fluorescence of a single trapped three-level ion.
 *
 * C interface of the shared library. All heavy objects live behind opaque
 * handles; every call returns a status code and leaves a human-readable
 * message for the calling thread in ls_last_error().
 */
#ifndef LAMBDASIM_LAMBDASIM_H
#define LAMBDASIM_LAMBDASIM_H

#include <stdint.h>

#if defined(_WIN32)
#define LAMBDASIM_API __declspec(dllexport)
#else
#define LAMBDASIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ls_status {
  LS_OK = 0,
  LS_ERR_CONFIG = 1, /* bad configuration, arguments or input files */
  LS_ERR_RUNTIME = 2 /* simulation, numerical or I/O failure */
} ls_status;

/* Opaque experiment description (parsed configuration file). */
typedef struct ls_config ls_config;
/* Opaque analysis result. */
typedef struct ls_report ls_report;

LAMBDASIM_API const char* ls_version(void);

/* Message describing the most recent failure on this thread. Never NULL. */
LAMBDASIM_API const char* ls_last_error(void);

/* --- configuration ------------------------------------------------------ */

LAMBDASIM_API ls_status ls_config_load(const char* path, ls_config** out);
LAMBDASIM_API ls_status ls_config_parse(const char* text, const char* name,
                                        ls_config** out);
LAMBDASIM_API void ls_config_free(ls_config* cfg);

LAMBDASIM_API ls_status ls_config_set_seed(ls_config* cfg, uint64_t seed);
LAMBDASIM_API ls_status ls_config_set_repetitions(ls_config* cfg,
                                                  uint64_t repetitions);
LAMBDASIM_API ls_status ls_config_set_bin_width_ns(ls_config* cfg, double ns);

/* --- pipelines ----------------------------------------------------------
 * ls_simulate writes trajectory.csv, histogram.csv and meta.json (plus
 * stream.csv when export_stream is nonzero) into out_dir.
 * ls_analyze consumes two histogram files (S-P curve first, D-P curve
 * second) and an optional stray-light reference for the S-P background.
 * ls_sweep writes per-point directories and sweep.csv.
 */

LAMBDASIM_API ls_status ls_simulate(const ls_config* cfg, const char* out_dir,
                                    int export_stream);
LAMBDASIM_API ls_status ls_analyze(const ls_config* cfg, const char* sp_csv,
                                   const char* dp_csv,
                                   const char* stray_csv_or_null,
                                   ls_report** out);
LAMBDASIM_API ls_status ls_sweep(const ls_config* cfg, const char* out_dir);

/* --- reports ------------------------------------------------------------ */

LAMBDASIM_API ls_status ls_report_write(const ls_report* report,
                                        const char* path);

/* Background-subtracted per-shot series (value and sigma per bin) as
 * sp_corrected.csv / dp_corrected.csv inside dir. */
LAMBDASIM_API ls_status ls_report_export_corrected(const ls_report* report,
                                                   const char* dir);

/* Scalar access. Known keys:
 *   p, p_sigma, eta, eta_sigma, tau_us, tau_sigma_us,
 *   s_from_tau, s_from_tau_sigma, s_from_intensity, s_from_intensity_sigma,
 *   rho_pp_from_tau, fit_n0, fit_c, fit_reduced_chi2,
 *   fit_window_start_us, fit_window_end_us, n_sp, n_dp
 */
LAMBDASIM_API ls_status ls_report_value(const ls_report* report,
                                        const char* key, double* out);
LAMBDASIM_API void ls_report_free(ls_report* report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LAMBDASIM_LAMBDASIM_H */
