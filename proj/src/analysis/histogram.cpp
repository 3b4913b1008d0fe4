#include "analysis/histogram.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace lambdasim {

std::uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

double CorrectedSeries::total_counts(double a, double b) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < value.size(); ++k) {
    const double c = bin_center(k);
    if (c >= a && c < b) acc += value[k];
  }
  return acc * static_cast<double>(shot_count);
}

Histogram bin_timestamps(const TimeTagStream& stream, double bin_width,
                         std::pair<double, double> range) {
  if (!(bin_width > 0.0)) throw PreconditionError("bin_timestamps: bin_width must be > 0");
  if (!(range.second > range.first))
    throw PreconditionError("bin_timestamps: empty range");

  Histogram hist;
  hist.bin_width = bin_width;
  hist.t0 = range.first;
  hist.shot_count = stream.shot_count;
  const auto n_bins = static_cast<std::size_t>(
      std::floor((range.second - range.first) / bin_width + 1e-9));
  if (n_bins == 0) throw PreconditionError("bin_timestamps: range narrower than one bin");
  hist.counts.assign(n_bins, 0);

  const double t_end = hist.t0 + bin_width * static_cast<double>(n_bins);
  for (const auto& e : stream.events) {
    if (e.t < hist.t0 || e.t >= t_end) continue;
    auto k = static_cast<std::size_t>(std::floor((e.t - hist.t0) / bin_width));
    if (k >= n_bins) k = n_bins - 1;
    // Enforce the edge rule against the actual bin boundaries.
    while (k + 1 < n_bins && e.t >= hist.bin_start(k + 1)) ++k;
    while (k > 0 && e.t < hist.bin_start(k)) --k;
    ++hist.counts[k];
  }
  return hist;
}

namespace {

CorrectedSeries make_series(const Histogram& hist) {
  if (hist.shot_count == 0)
    throw PreconditionError("subtract_background: histogram has no shots");
  CorrectedSeries s;
  s.bin_width = hist.bin_width;
  s.t0 = hist.t0;
  s.shot_count = hist.shot_count;
  s.value.resize(hist.size());
  s.sigma.resize(hist.size());
  return s;
}

double poisson_sigma(std::uint64_t counts, std::uint64_t shots) {
  const double c = counts > 0 ? static_cast<double>(counts) : 1.0;
  return std::sqrt(c) / static_cast<double>(shots);
}

}  // namespace

CorrectedSeries subtract_background(const Histogram& hist,
                                    const Histogram& reference) {
  if (reference.shot_count == 0)
    throw PreconditionError("subtract_background: reference has no shots");
  if (hist.size() != reference.size() ||
      std::abs(hist.bin_width - reference.bin_width) > 1e-12 ||
      std::abs(hist.t0 - reference.t0) > 1e-9)
    throw PreconditionError("subtract_background: bin grids do not match");

  CorrectedSeries s = make_series(hist);
  const auto n = static_cast<double>(hist.shot_count);
  const auto m = static_cast<double>(reference.shot_count);
  for (std::size_t k = 0; k < hist.size(); ++k) {
    s.value[k] = static_cast<double>(hist.counts[k]) / n -
                 static_cast<double>(reference.counts[k]) / m;
    s.sigma[k] = std::hypot(poisson_sigma(hist.counts[k], hist.shot_count),
                            poisson_sigma(reference.counts[k],
                                          reference.shot_count));
  }
  return s;
}

CorrectedSeries subtract_background(const Histogram& hist,
                                    double constant_rate) {
  if (constant_rate < 0.0)
    throw DomainError("subtract_background: negative constant rate");
  CorrectedSeries s = make_series(hist);
  const auto n = static_cast<double>(hist.shot_count);
  const double pedestal = constant_rate * hist.bin_width;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    s.value[k] = static_cast<double>(hist.counts[k]) / n - pedestal;
    s.sigma[k] = poisson_sigma(hist.counts[k], hist.shot_count);
  }
  return s;
}

void write_histogram_csv(const Histogram& hist, std::ostream& os) {
  char line[128];
  os << "bin_width_us,t0_us,shot_count\n";
  std::snprintf(line, sizeof line, "%.9g,%.9g,%llu\n", hist.bin_width, hist.t0,
                static_cast<unsigned long long>(hist.shot_count));
  os << line;
  os << "bin_start_us,count\n";
  for (std::size_t k = 0; k < hist.size(); ++k) {
    std::snprintf(line, sizeof line, "%.9g,%llu\n", hist.bin_start(k),
                  static_cast<unsigned long long>(hist.counts[k]));
    os << line;
  }
}

namespace {

[[noreturn]] void bad_row(const std::string& name, std::size_t row,
                          const std::string& what) {
  throw ConfigError(name + ": row " + std::to_string(row) + ": " + what);
}

}  // namespace

Histogram read_histogram_csv(std::istream& is, const std::string& name) {
  Histogram hist;
  std::string line;
  std::size_t row = 0;

  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++row;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };

  if (!next_line() || line != "bin_width_us,t0_us,shot_count")
    bad_row(name, row, "expected header 'bin_width_us,t0_us,shot_count'");
  if (!next_line()) bad_row(name, row + 1, "missing histogram metadata");
  {
    std::istringstream ss(line);
    char c1 = 0, c2 = 0;
    if (!(ss >> hist.bin_width >> c1 >> hist.t0 >> c2 >> hist.shot_count) ||
        c1 != ',' || c2 != ',')
      bad_row(name, row, "malformed metadata row '" + line + "'");
  }
  if (!(hist.bin_width > 0.0)) bad_row(name, row, "bin width must be > 0");
  if (!next_line() || line != "bin_start_us,count")
    bad_row(name, row, "expected header 'bin_start_us,count'");

  while (next_line()) {
    std::istringstream ss(line);
    double start = 0.0;
    long long count = 0;
    char c1 = 0;
    if (!(ss >> start >> c1 >> count) || c1 != ',' || count < 0)
      bad_row(name, row, "malformed bin row '" + line + "'");
    const double expected =
        hist.t0 + hist.bin_width * static_cast<double>(hist.counts.size());
    if (std::abs(start - expected) > 1e-6)
      bad_row(name, row, "bin start off the uniform grid");
    hist.counts.push_back(static_cast<std::uint64_t>(count));
  }
  if (hist.counts.empty()) bad_row(name, row, "histogram has no bins");
  return hist;
}

void write_corrected_csv(const CorrectedSeries& series, std::ostream& os) {
  char line[160];
  os << "bin_width_us,t0_us,shot_count\n";
  std::snprintf(line, sizeof line, "%.9g,%.9g,%llu\n", series.bin_width,
                series.t0, static_cast<unsigned long long>(series.shot_count));
  os << line;
  os << "bin_start_us,value,sigma\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::snprintf(line, sizeof line, "%.9g,%.12g,%.12g\n",
                  series.t0 + series.bin_width * static_cast<double>(k),
                  series.value[k], series.sigma[k]);
    os << line;
  }
}

}  // namespace lambdasim
