#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const char* kSpConfig = R"({
  "system": {
    "doppler": { "intensity_uw_um2": 5.4085e-3, "detuning_mhz": 0.0 },
    "repump":  { "rabi_mhz": 10.0 }
  },
  "timeline": { "protocol": "sp_transition" },
  "detector": { "efficiency": 0.01,
                "background_rate_per_us": 1e-4,
                "stray_rate_max_per_us": 1e-4 },
  "run": { "repetitions": 30000, "master_seed": 21, "bin_width_us": 0.01 }
})";

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "lambdasim_cli_out.txt";
  const std::string cmd =
      std::string(LAMBDASIM_CLI_PATH) + " " + args + " > " + log.string() +
      " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::ostringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(status), ss.str()};
}

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "lambdasim_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli: usage errors exit with code 1") {
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("frobnicate").exit_code == 1);
  CHECK(run_cli("simulate").exit_code == 1);

  const RunResult missing = run_cli("simulate /no/such/config.json -o /tmp/x");
  CHECK(missing.exit_code == 1);
  CHECK(missing.output.find("config.json") != std::string::npos);
}

TEST_CASE("cli: malformed config reports the offending line, exit 1") {
  const fs::path dir = fresh_dir("badcfg");
  const std::string cfg = write_file(dir / "bad.json", "{\n  \"run\": [1,\n}");
  const RunResult r = run_cli("simulate " + cfg + " -o " + (dir / "out").string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("bad.json") != std::string::npos);
  CHECK(r.output.find("line") != std::string::npos);
}

TEST_CASE("cli: simulate then analyze round trip, exit 0") {
  const fs::path dir = fresh_dir("roundtrip");
  const std::string sp_cfg = write_file(dir / "sp.json", kSpConfig);
  std::string dp_text = kSpConfig;
  dp_text.replace(dp_text.find("sp_transition"), 13, "dp_transition");
  const std::string dp_cfg = write_file(dir / "dp.json", dp_text);

  CHECK(run_cli("simulate " + sp_cfg + " -o " + (dir / "sp").string()).exit_code == 0);
  CHECK(run_cli("simulate " + dp_cfg + " -o " + (dir / "dp").string() +
                " --seed 22").exit_code == 0);

  const std::string report = (dir / "report.json").string();
  const RunResult analyze = run_cli(
      "analyze " + (dir / "sp" / "histogram.csv").string() + " " +
      (dir / "dp" / "histogram.csv").string() + " -c " + sp_cfg + " -o " + report);
  CHECK(analyze.exit_code == 0);
  CHECK(analyze.output.find("p ") != std::string::npos);
  CHECK(fs::exists(report));

  // The report carries the hash of the config it was produced with.
  const std::string report_text = slurp(report);
  std::ifstream cfg_in(sp_cfg);
  std::ostringstream cfg_text;
  cfg_text << cfg_in.rdbuf();
  CHECK(report_text.find("config_hash") != std::string::npos);

  // Histogram rows are machine-readable CSV with the documented header.
  const std::string hist = slurp(dir / "sp" / "histogram.csv");
  CHECK(hist.rfind("bin_width_us,t0_us,shot_count", 0) == 0);
}

TEST_CASE("cli: malformed histogram CSV names the row, exit 1") {
  const fs::path dir = fresh_dir("badcsv");
  const std::string cfg = write_file(dir / "sp.json", kSpConfig);
  const std::string bad = write_file(
      dir / "h.csv",
      "bin_width_us,t0_us,shot_count\n0.01,0,10\nbin_start_us,count\n0,1\nx,y\n");
  const RunResult r = run_cli("analyze " + bad + " " + bad + " -c " + cfg +
                              " -o " + (dir / "r.json").string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("row 5") != std::string::npos);
}

TEST_CASE("cli: analysis that cannot converge exits with code 2") {
  const fs::path dir = fresh_dir("runtime");
  std::string flat_text = kSpConfig;
  flat_text.replace(flat_text.find("sp_transition"), 13, "background_only");
  const std::string flat_cfg = write_file(dir / "flat.json", flat_text);
  CHECK(run_cli("simulate " + flat_cfg + " -o " + (dir / "flat").string())
            .exit_code == 0);

  // Pure background histograms hold no decaying tail to fit.
  const std::string sp_cfg = write_file(dir / "sp.json", kSpConfig);
  const std::string hist = (dir / "flat" / "histogram.csv").string();
  const RunResult r = run_cli("analyze " + hist + " " + hist + " -c " + sp_cfg +
                              " -o " + (dir / "r.json").string());
  CHECK(r.exit_code == 2);
}

TEST_CASE("cli: same seed gives byte-identical outputs, new seed differs") {
  const fs::path dir = fresh_dir("determinism");
  const std::string cfg = write_file(dir / "sp.json", kSpConfig);
  CHECK(run_cli("simulate " + cfg + " -o " + (dir / "a").string() +
                " --export-stream").exit_code == 0);
  CHECK(run_cli("simulate " + cfg + " -o " + (dir / "b").string() +
                " --export-stream").exit_code == 0);
  for (const char* f :
       {"trajectory.csv", "histogram.csv", "meta.json", "stream.csv"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK(run_cli("simulate " + cfg + " -o " + (dir / "c").string() +
                " --seed 4242 --export-stream").exit_code == 0);
  CHECK(slurp(dir / "a" / "stream.csv") != slurp(dir / "c" / "stream.csv"));
}

TEST_CASE("cli: repetition and bin width overrides reach the output") {
  const fs::path dir = fresh_dir("overrides");
  const std::string cfg = write_file(dir / "sp.json", kSpConfig);
  CHECK(run_cli("simulate " + cfg + " -o " + (dir / "out").string() +
                " --repetitions 500 --bin-width-ns 20").exit_code == 0);
  const std::string hist = slurp(dir / "out" / "histogram.csv");
  CHECK(hist.find("\n0.02,") != std::string::npos);  // 20 ns bins
  CHECK(hist.find(",500\n") != std::string::npos);   // 500 shots
}
