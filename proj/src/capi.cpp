#include "lambdasim/lambdasim.h"

#include <cmath>
#include <string>

#include "driver/config.hpp"
#include "driver/pipeline.hpp"

struct ls_config {
  lambdasim::ExperimentConfig cfg;
};

struct ls_report {
  lambdasim::Report rep;
};

namespace {

thread_local std::string g_last_error = "no error";

template <typename F>
ls_status guarded(F&& body) {
  try {
    body();
    return LS_OK;
  } catch (const lambdasim::ConfigError& e) {
    g_last_error = e.what();
    return LS_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LS_ERR_RUNTIME;
  }
}

ls_status usage_error(const std::string& what) {
  g_last_error = what;
  return LS_ERR_CONFIG;
}

}  // namespace

extern "C" {

const char* ls_version(void) { return "0.1.0"; }

const char* ls_last_error(void) { return g_last_error.c_str(); }

ls_status ls_config_load(const char* path, ls_config** out) {
  if (!path || !out) return usage_error("ls_config_load: NULL argument");
  *out = nullptr;
  return guarded([&] {
    *out = new ls_config{lambdasim::load_config(path)};
  });
}

ls_status ls_config_parse(const char* text, const char* name,
                          ls_config** out) {
  if (!text || !out) return usage_error("ls_config_parse: NULL argument");
  *out = nullptr;
  return guarded([&] {
    *out = new ls_config{
        lambdasim::parse_config(text, name ? name : "<inline>")};
  });
}

void ls_config_free(ls_config* cfg) { delete cfg; }

ls_status ls_config_set_seed(ls_config* cfg, uint64_t seed) {
  if (!cfg) return usage_error("ls_config_set_seed: NULL config");
  return guarded([&] {
    cfg->cfg.master_seed = seed;
    cfg->cfg.finalize();
  });
}

ls_status ls_config_set_repetitions(ls_config* cfg, uint64_t repetitions) {
  if (!cfg) return usage_error("ls_config_set_repetitions: NULL config");
  return guarded([&] {
    cfg->cfg.repetitions = repetitions;
    cfg->cfg.finalize();
  });
}

ls_status ls_config_set_bin_width_ns(ls_config* cfg, double ns) {
  if (!cfg) return usage_error("ls_config_set_bin_width_ns: NULL config");
  if (!(ns > 0.0)) return usage_error("bin width must be positive");
  return guarded([&] {
    cfg->cfg.bin_width = ns * 1e-3;
    cfg->cfg.finalize();
  });
}

ls_status ls_simulate(const ls_config* cfg, const char* out_dir,
                      int export_stream) {
  if (!cfg || !out_dir) return usage_error("ls_simulate: NULL argument");
  return guarded([&] {
    lambdasim::run_simulate(cfg->cfg, out_dir, export_stream != 0);
  });
}

ls_status ls_analyze(const ls_config* cfg, const char* sp_csv,
                     const char* dp_csv, const char* stray_csv_or_null,
                     ls_report** out) {
  if (!cfg || !sp_csv || !dp_csv || !out)
    return usage_error("ls_analyze: NULL argument");
  *out = nullptr;
  return guarded([&] {
    std::optional<std::filesystem::path> stray;
    if (stray_csv_or_null) stray = stray_csv_or_null;
    *out = new ls_report{
        lambdasim::run_analyze(cfg->cfg, sp_csv, dp_csv, stray)};
  });
}

ls_status ls_sweep(const ls_config* cfg, const char* out_dir) {
  if (!cfg || !out_dir) return usage_error("ls_sweep: NULL argument");
  return guarded([&] { lambdasim::run_sweep(cfg->cfg, out_dir); });
}

ls_status ls_report_write(const ls_report* report, const char* path) {
  if (!report || !path) return usage_error("ls_report_write: NULL argument");
  return guarded([&] {
    lambdasim::write_text_file(path, report->rep.to_json_text());
  });
}

ls_status ls_report_export_corrected(const ls_report* report,
                                     const char* dir) {
  if (!report || !dir)
    return usage_error("ls_report_export_corrected: NULL argument");
  return guarded([&] { report->rep.export_corrected(dir); });
}

ls_status ls_report_value(const ls_report* report, const char* key,
                          double* out) {
  if (!report || !key || !out)
    return usage_error("ls_report_value: NULL argument");
  const lambdasim::Report& r = report->rep;
  const std::string k = key;
  const double nan = std::nan("");
  double v = nan;
  if (k == "p") v = r.p ? r.p->value : nan;
  else if (k == "p_sigma") v = r.p ? r.p->sigma : nan;
  else if (k == "eta") v = r.eta ? r.eta->value : nan;
  else if (k == "eta_sigma") v = r.eta ? r.eta->sigma : nan;
  else if (k == "tau_us") v = r.chain.fit.tau;
  else if (k == "tau_sigma_us") v = r.chain.fit.tau_sigma();
  else if (k == "s_from_tau") v = r.chain.sat.s;
  else if (k == "s_from_tau_sigma") v = r.chain.sat.s_sigma;
  else if (k == "s_from_intensity")
    v = r.chain.s_intensity ? *r.chain.s_intensity : nan;
  else if (k == "s_from_intensity_sigma") v = r.chain.s_intensity_sigma;
  else if (k == "rho_pp_from_tau") v = r.chain.sat.rho_pp;
  else if (k == "fit_n0") v = r.chain.fit.n0;
  else if (k == "fit_c") v = r.chain.fit.c;
  else if (k == "fit_reduced_chi2") v = r.chain.fit.reduced_chi2;
  else if (k == "fit_window_start_us") v = r.chain.fit.fit_window.first;
  else if (k == "fit_window_end_us") v = r.chain.fit.fit_window.second;
  else if (k == "n_sp") v = r.n_sp;
  else if (k == "n_dp") v = r.n_dp;
  else return usage_error("ls_report_value: unknown key '" + k + "'");
  *out = v;
  return LS_OK;
}

void ls_report_free(ls_report* report) { delete report; }

}  // extern "C"
