#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "instrument/detect.hpp"

namespace lambdasim {

// Aggregated counts on a uniform grid of left-closed right-open bins.
struct Histogram {
  double bin_width = 0.0;  // us
  double t0 = 0.0;         // start of the first bin, us
  std::vector<std::uint64_t> counts;
  std::uint64_t shot_count = 0;

  std::size_t size() const { return counts.size(); }
  double bin_start(std::size_t k) const {
    return t0 + bin_width * static_cast<double>(k);
  }
  double bin_center(std::size_t k) const {
    return bin_start(k) + 0.5 * bin_width;
  }
  std::uint64_t total() const;
};

// Background-subtracted, per-shot series with per-bin Poisson uncertainty.
// Bins with zero raw counts carry sigma = 1/shots so weights stay finite.
struct CorrectedSeries {
  double bin_width = 0.0;
  double t0 = 0.0;
  std::vector<double> value;  // counts per bin per shot
  std::vector<double> sigma;
  std::uint64_t shot_count = 0;

  std::size_t size() const { return value.size(); }
  double bin_center(std::size_t k) const {
    return t0 + bin_width * (static_cast<double>(k) + 0.5);
  }
  // Sum of value over bins whose centers lie in [a, b), times shot_count.
  double total_counts(double a, double b) const;
};

// Left-closed right-open binning over [range.first, range.second); an event
// exactly on an edge lands in the bin that starts there.
Histogram bin_timestamps(const TimeTagStream& stream, double bin_width,
                         std::pair<double, double> range);

// corrected[k] = counts[k]/shots - reference[k]/reference_shots.
CorrectedSeries subtract_background(const Histogram& hist,
                                    const Histogram& reference);

// corrected[k] = counts[k]/shots - constant_rate * bin_width, with
// constant_rate in counts/us per shot.
CorrectedSeries subtract_background(const Histogram& hist,
                                    double constant_rate);

void write_histogram_csv(const Histogram& hist, std::ostream& os);
// Throws ConfigError naming `name` and the offending row on malformed input.
Histogram read_histogram_csv(std::istream& is, const std::string& name);
void write_corrected_csv(const CorrectedSeries& series, std::ostream& os);

}  // namespace lambdasim
