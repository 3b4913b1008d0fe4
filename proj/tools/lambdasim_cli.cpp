// Command-line front end. Talks to the simulator exclusively through the
// shared library's C interface.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lambdasim/lambdasim.h"

namespace {

struct Overrides {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::uint64_t repetitions = 0;
  bool repetitions_set = false;
  double bin_width_ns = 0.0;
  bool bin_width_set = false;
};

void add_override_options(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--seed", ov.seed, "Override run.master_seed")
      ->each([&ov](const std::string&) { ov.seed_set = true; });
  cmd->add_option("--repetitions", ov.repetitions,
                  "Override run.repetitions")
      ->each([&ov](const std::string&) { ov.repetitions_set = true; });
  cmd->add_option("--bin-width-ns", ov.bin_width_ns,
                  "Override run.bin_width_us (given in ns)")
      ->each([&ov](const std::string&) { ov.bin_width_set = true; });
}

// Exit code contract: 0 success, 1 usage/config error, 2 runtime error.
int fail(ls_status status) {
  std::fprintf(stderr, "error: %s\n", ls_last_error());
  return status == LS_ERR_CONFIG ? 1 : 2;
}

ls_config* load_with_overrides(const std::string& path, const Overrides& ov,
                               ls_status& status) {
  ls_config* cfg = nullptr;
  status = ls_config_load(path.c_str(), &cfg);
  if (status != LS_OK) return nullptr;
  if (ov.seed_set) status = ls_config_set_seed(cfg, ov.seed);
  if (status == LS_OK && ov.repetitions_set)
    status = ls_config_set_repetitions(cfg, ov.repetitions);
  if (status == LS_OK && ov.bin_width_set)
    status = ls_config_set_bin_width_ns(cfg, ov.bin_width_ns);
  if (status != LS_OK) {
    ls_config_free(cfg);
    return nullptr;
  }
  return cfg;
}

void print_value(const ls_report* rep, const char* label, const char* key,
                 const char* sigma_key) {
  double v = 0.0, s = 0.0;
  if (ls_report_value(rep, key, &v) != LS_OK) return;
  if (ls_report_value(rep, sigma_key, &s) != LS_OK) return;
  std::printf("%-18s %.6g +- %.2g\n", label, v, s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient-fluorescence simulator for a trapped three-level ion"};
  app.require_subcommand(1);

  std::string config_path, out_dir, report_path;
  std::vector<std::string> hist_files;
  bool export_stream = false;
  Overrides ov;

  CLI::App* simulate =
      app.add_subcommand("simulate", "Run one protocol and write data files");
  simulate->add_option("config", config_path, "Experiment config (JSON)")
      ->required();
  simulate->add_option("-o,--out", out_dir, "Output directory")->required();
  simulate->add_flag("--export-stream", export_stream,
                     "Also write the raw time-tag stream");
  add_override_options(simulate, ov);

  CLI::App* analyze = app.add_subcommand(
      "analyze", "Estimate p, eta, tau and saturation from histogram files");
  analyze
      ->add_option("files", hist_files,
                   "S-P histogram, D-P histogram, optional stray reference")
      ->expected(2, 3)
      ->required();
  analyze->add_option("-c,--config", config_path, "Experiment config (JSON)")
      ->required();
  analyze->add_option("-o,--out", report_path, "Report file (JSON)")
      ->required();

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Scan intensity or detuning and fit tau at every point");
  sweep->add_option("config", config_path, "Experiment config (JSON)")
      ->required();
  sweep->add_option("-o,--out", out_dir, "Output directory")->required();
  add_override_options(sweep, ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  ls_status status = LS_OK;
  ls_config* cfg = load_with_overrides(config_path, ov, status);
  if (!cfg) return fail(status);

  int rc = 0;
  if (simulate->parsed()) {
    status = ls_simulate(cfg, out_dir.c_str(), export_stream ? 1 : 0);
    if (status != LS_OK) rc = fail(status);
  } else if (analyze->parsed()) {
    ls_report* rep = nullptr;
    status = ls_analyze(cfg, hist_files[0].c_str(), hist_files[1].c_str(),
                        hist_files.size() > 2 ? hist_files[2].c_str() : nullptr,
                        &rep);
    if (status != LS_OK) {
      rc = fail(status);
    } else {
      status = ls_report_write(rep, report_path.c_str());
      if (status == LS_OK) {
        // Corrected series land next to the report for replotting.
        const auto parent =
            std::filesystem::path(report_path).parent_path().string();
        status = ls_report_export_corrected(
            rep, parent.empty() ? "." : parent.c_str());
      }
      if (status != LS_OK) {
        rc = fail(status);
      } else {
        print_value(rep, "p", "p", "p_sigma");
        print_value(rep, "eta", "eta", "eta_sigma");
        print_value(rep, "tau_us", "tau_us", "tau_sigma_us");
        print_value(rep, "s_from_tau", "s_from_tau", "s_from_tau_sigma");
        print_value(rep, "s_from_intensity", "s_from_intensity",
                    "s_from_intensity_sigma");
      }
      ls_report_free(rep);
    }
  } else if (sweep->parsed()) {
    status = ls_sweep(cfg, out_dir.c_str());
    if (status != LS_OK) rc = fail(status);
  }

  ls_config_free(cfg);
  return rc;
}
