#include "analysis/estimators.hpp"
#include "analysis/fit.hpp"
#include "analysis/histogram.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "rng.hpp"

using namespace lambdasim;

namespace {

TimeTagStream make_stream(std::vector<double> times, std::uint64_t shots) {
  TimeTagStream s;
  s.shot_count = shots;
  for (double t : times) s.events.push_back({0, t});
  return s;
}

// Poisson sampling via exponential gaps; independent of the library path.
std::uint64_t poisson_draw(double mean, std::mt19937_64& gen) {
  std::exponential_distribution<double> exp_dist(1.0);
  double acc = 0.0;
  std::uint64_t k = 0;
  for (;;) {
    acc += exp_dist(gen);
    if (acc > mean) return k;
    ++k;
  }
}

Histogram poisson_histogram(double mean, std::size_t bins, std::uint64_t shots,
                            std::uint64_t seed) {
  Histogram h;
  h.bin_width = 0.01;
  h.t0 = 0.0;
  h.shot_count = shots;
  std::mt19937_64 gen(seed);
  h.counts.resize(bins);
  for (auto& c : h.counts) c = poisson_draw(mean, gen);
  return h;
}

}  // namespace

TEST_CASE("bin_timestamps: empty stream gives an all-zero histogram") {
  const Histogram h = bin_timestamps(make_stream({}, 10), 0.01, {0.0, 1.0});
  CHECK(h.size() == 100);
  CHECK(h.total() == 0);
  CHECK(h.shot_count == 10);
}

TEST_CASE("bin_timestamps: edge events land in the right-open bin") {
  const Histogram h =
      bin_timestamps(make_stream({0.0, 0.01, 0.02, 0.0199999999}, 1), 0.01,
                     {0.0, 0.03});
  REQUIRE(h.size() == 3);
  CHECK(h.counts[0] == 1);
  CHECK(h.counts[1] == 2);
  CHECK(h.counts[2] == 1);
}

TEST_CASE("bin_timestamps: conserves in-range events exactly") {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> u(-0.2, 1.2);
  std::vector<double> times;
  std::size_t in_range = 0;
  for (int i = 0; i < 5000; ++i) {
    const double t = u(gen);
    times.push_back(t);
    if (t >= 0.0 && t < 1.0) ++in_range;
  }
  const Histogram h = bin_timestamps(make_stream(times, 1), 0.01, {0.0, 1.0});
  CHECK(h.total() == in_range);
  CHECK_THROWS_AS(bin_timestamps(make_stream({}, 1), 0.01, {1.0, 1.0}),
                  PreconditionError);
  CHECK_THROWS_AS(bin_timestamps(make_stream({}, 1), 0.0, {0.0, 1.0}),
                  PreconditionError);
}

TEST_CASE("bin_timestamps: uniform stream spreads multinomially") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> times;
  constexpr std::size_t events = 100000;
  for (std::size_t i = 0; i < events; ++i) times.push_back(u(gen));
  const Histogram h = bin_timestamps(make_stream(times, 1), 0.05, {0.0, 1.0});
  const double expected = static_cast<double>(events) / 20.0;
  const double sigma = std::sqrt(expected * (1.0 - 0.05));
  for (auto c : h.counts)
    CHECK(std::abs(static_cast<double>(c) - expected) < 4.0 * sigma);
}

TEST_CASE("subtract_background: a histogram minus itself vanishes") {
  const Histogram h = poisson_histogram(5.0, 200, 100, 7);
  const CorrectedSeries s = subtract_background(h, h);
  for (double v : s.value) CHECK(v == 0.0);
  for (double sg : s.sigma) CHECK(sg > 0.0);
}

TEST_CASE("subtract_background: grids must match") {
  const Histogram h = poisson_histogram(5.0, 200, 100, 8);
  Histogram other = h;
  other.bin_width *= 2.0;
  CHECK_THROWS_AS(subtract_background(h, other), PreconditionError);
  Histogram shifted = h;
  shifted.t0 += 0.5;
  CHECK_THROWS_AS(subtract_background(h, shifted), PreconditionError);
  Histogram fewer = h;
  fewer.counts.pop_back();
  CHECK_THROWS_AS(subtract_background(h, fewer), PreconditionError);
}

TEST_CASE("subtract_background: subtracting then adding back restores the series") {
  const Histogram h = poisson_histogram(7.0, 150, 50, 9);
  const double rate = 3.1;  // counts/us per shot
  const CorrectedSeries s = subtract_background(h, rate);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double restored = s.value[k] + rate * h.bin_width;
    CHECK(restored ==
          doctest::Approx(static_cast<double>(h.counts[k]) / 50.0).epsilon(1e-12));
  }
}

TEST_CASE("subtract_background: pre-probe residual is consistent with zero") {
  // Constant-rate stream, subtract the known rate: the mean residual must
  // sit within three standard errors of zero.
  const double rate = 2.0;
  const std::uint64_t shots = 2000;
  TimeTagStream stream;
  stream.shot_count = shots;
  for (std::uint64_t s = 0; s < shots; ++s) {
    SplitMix64 rng = shot_rng(2718, s);
    double t = 0.0;
    for (;;) {
      t += rng.exponential(rate);
      if (t >= 2.0) break;
      stream.events.push_back({s, t});
    }
  }
  const Histogram h = bin_timestamps(stream, 0.01, {0.0, 2.0});
  const CorrectedSeries s = subtract_background(h, rate);
  double mean = 0.0, var = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    mean += s.value[k];
    var += s.sigma[k] * s.sigma[k];
  }
  mean /= static_cast<double>(s.size());
  const double sem = std::sqrt(var) / static_cast<double>(s.size());
  CHECK(std::abs(mean) < 3.0 * sem);
}

TEST_CASE("estimate_branching: symmetry, degeneracy and scaling") {
  const Estimate even = estimate_branching(500.0, 500.0);
  CHECK(even.value == 0.5);
  CHECK(even.sigma == doctest::Approx(std::sqrt(0.25 / 1000.0)));

  const Estimate all_sp = estimate_branching(100.0, 0.0);
  CHECK(all_sp.value == 1.0);
  CHECK(all_sp.sigma == 0.0);
  CHECK(all_sp.degenerate);

  const Estimate base = estimate_branching(930.0, 70.0);
  const Estimate scaled = estimate_branching(9300.0, 700.0);
  CHECK(base.value == scaled.value);
  CHECK(scaled.sigma == doctest::Approx(base.sigma / std::sqrt(10.0)));

  CHECK_THROWS_AS(estimate_branching(0.0, 0.0), DomainError);
}

TEST_CASE("estimate_efficiency: ratio and boundaries") {
  CHECK(estimate_efficiency(0.0, 1000.0).value == 0.0);
  const Estimate sat = estimate_efficiency(1000.0, 1000.0);
  CHECK(sat.value == 1.0);
  const Estimate e = estimate_efficiency(1400.0, 1e6);
  CHECK(e.value == doctest::Approx(0.0014));
  CHECK(e.sigma == doctest::Approx(std::sqrt(1400.0) / 1e6));
  CHECK_THROWS_AS(estimate_efficiency(1.0, 0.0), DomainError);
}

TEST_CASE("s_from_tau: frozen point, boundary and round trip") {
  // Frozen with tests/oracles/gen_expected.py.
  const SaturationFromTau r = s_from_tau(0.2334, 9.312);
  CHECK(r.rho_pp == doctest::Approx(0.46010418231).epsilon(1e-9));
  CHECK(r.s == doctest::Approx(11.5326419899).epsilon(1e-9));

  CHECK_THROWS_AS(s_from_tau(2.0 / 9.312, 9.312), DomainError);
  CHECK_THROWS_AS(s_from_tau(-1.0, 9.312), DomainError);
  CHECK_THROWS_AS(s_from_tau(1.0, 0.0), DomainError);

  // tau -> infinity pushes both rho_PP and s to zero.
  const SaturationFromTau tiny = s_from_tau(1e9, 9.312);
  CHECK(tiny.rho_pp < 1e-9);
  CHECK(tiny.s < 1e-8);

  // Composing the forward maps and inverting recovers s exactly.
  const double gamma_dp = 9.312;
  for (double s : {0.1, 1.0, 11.4}) {
    const double rho = two_level_excited_population(s);
    const double tau = 1.0 / (rho * gamma_dp);
    CHECK(s_from_tau(tau, gamma_dp).s == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("fit: noiseless synthetic curve is a fixed point") {
  CorrectedSeries s;
  s.bin_width = 0.01;
  s.t0 = 2.0;
  s.shot_count = 1;
  const double n0 = 100.0, tau = 0.5, c = 2.0;
  for (std::size_t k = 0; k < 400; ++k) {
    const double t = s.bin_center(k) - 2.0;
    s.value.push_back(n0 * std::exp(-t / tau) + c);
    s.sigma.push_back(1.0);
  }
  const FitResult fit = fit_exponential_tail(s, {2.0, 6.0});
  // The model clock starts at the window edge; compare against the value at
  // the first half-bin.
  CHECK(fit.tau == doctest::Approx(tau).epsilon(1e-6));
  CHECK(fit.c == doctest::Approx(c).epsilon(1e-4));
  CHECK(fit.n0 == doctest::Approx(n0).epsilon(1e-6));
  CHECK(fit.reduced_chi2 < 1e-12);
  CHECK(!fit.init_fallback);
}

TEST_CASE("fit: window too narrow is refused") {
  CorrectedSeries s;
  s.bin_width = 0.01;
  s.t0 = 0.0;
  s.shot_count = 1;
  for (std::size_t k = 0; k < 50; ++k) {
    s.value.push_back(1.0);
    s.sigma.push_back(1.0);
  }
  CHECK_THROWS_AS(fit_exponential_tail(s, {0.0, 0.05}), PreconditionError);
}

TEST_CASE("fit: Poisson-noisy synthetic covers the true tau") {
  // Coverage study: the 3-sigma interval must contain the truth in at
  // least 99 of 100 seeded repetitions.
  const double n0 = 400.0, tau = 0.5, c = 20.0;
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 gen(9000 + seed);
    CorrectedSeries s;
    s.bin_width = 0.01;
    s.t0 = 0.0;
    s.shot_count = 1;
    for (std::size_t k = 0; k < 500; ++k) {
      const double t = s.bin_center(k);
      const double mean = n0 * std::exp(-t / tau) + c;
      const double draw = static_cast<double>(poisson_draw(mean, gen));
      s.value.push_back(draw);
      s.sigma.push_back(std::sqrt(std::max(draw, 1.0)));
    }
    const FitResult fit = fit_exponential_tail(s, {0.0, 5.0});
    if (std::abs(fit.tau - tau) <= 3.0 * fit.tau_sigma()) ++covered;
  }
  CHECK(covered >= 99);
}

TEST_CASE("fit: default window tracks the 60% rule and the noise floor") {
  CorrectedSeries s;
  s.bin_width = 0.01;
  s.t0 = 0.0;
  s.shot_count = 1;
  const double n0 = 1000.0, tau = 0.3, c = 0.0;
  for (std::size_t k = 0; k < 600; ++k) {
    const double t = s.bin_center(k);
    // Fast rise over the first 50 ns, then the decaying tail.
    const double rise = t < 0.05 ? t / 0.05 : 1.0;
    s.value.push_back(rise * n0 * std::exp(-std::max(t - 0.05, 0.0) / tau) + c);
    s.sigma.push_back(std::sqrt(std::max(s.value.back(), 1.0)));
  }
  const auto [start, end] = default_fit_window(s);
  // 60% of the peak along the decay is at 0.05 + tau*ln(1/0.6) = 0.203.
  CHECK(start == doctest::Approx(0.05 + tau * std::log(1.0 / 0.6)).epsilon(0.1));
  CHECK(end > start + 10 * s.bin_width);
  const FitResult fit = fit_exponential_tail(s, {start, end});
  CHECK(fit.tau == doctest::Approx(tau).epsilon(0.01));
}

TEST_CASE("poisson_gof: Poisson data accepted, regular data rejected") {
  const Histogram good = poisson_histogram(19.54, 1000, 3000, 77);
  const PoissonGof g = poisson_gof(good);
  CHECK(g.mean == doctest::Approx(19.54).epsilon(0.02));
  CHECK(g.p_value > 0.01);
  CHECK(std::abs(g.dispersion - 1.0) < 3.0 * std::sqrt(2.0 / 999.0));

  // Deterministic, equally filled bins: dispersion collapses far below one.
  Histogram regular;
  regular.bin_width = 0.01;
  regular.t0 = 0.0;
  regular.shot_count = 1000;
  regular.counts.assign(1000, 20);
  const PoissonGof r = poisson_gof(regular);
  CHECK(r.dispersion < 0.01);
  CHECK(r.p_value < 1e-6);
}

TEST_CASE("poisson_gof: sum of two Poisson streams is still Poisson") {
  const Histogram a = poisson_histogram(8.0, 1000, 1, 101);
  const Histogram b = poisson_histogram(12.0, 1000, 1, 102);
  Histogram sum = a;
  for (std::size_t k = 0; k < sum.size(); ++k) sum.counts[k] += b.counts[k];
  const PoissonGof g = poisson_gof(sum);
  CHECK(g.mean == doctest::Approx(20.0).epsilon(0.03));
  CHECK(g.p_value > 0.01);
}

TEST_CASE("poisson_gof: refuses short segments") {
  CHECK_THROWS_AS(poisson_gof(poisson_histogram(5.0, 99, 1, 5)),
                  InsufficientDataError);
}

TEST_CASE("histogram csv: round trip and row-anchored errors") {
  const Histogram h = poisson_histogram(3.0, 120, 40, 11);
  std::ostringstream os;
  write_histogram_csv(h, os);
  std::istringstream is(os.str());
  const Histogram back = read_histogram_csv(is, "roundtrip.csv");
  CHECK(back.bin_width == doctest::Approx(h.bin_width).epsilon(1e-12));
  CHECK(back.t0 == h.t0);
  CHECK(back.shot_count == h.shot_count);
  REQUIRE(back.size() == h.size());
  for (std::size_t k = 0; k < h.size(); ++k) CHECK(back.counts[k] == h.counts[k]);

  std::istringstream bad1("not,a,header\n");
  CHECK_THROWS_WITH_AS(read_histogram_csv(bad1, "bad.csv"),
                       doctest::Contains("bad.csv: row 1"), ConfigError);

  std::istringstream bad2(
      "bin_width_us,t0_us,shot_count\n0.01,0,10\nbin_start_us,count\n0,3\n"
      "0.01,oops\n");
  CHECK_THROWS_WITH_AS(read_histogram_csv(bad2, "bad2.csv"),
                       doctest::Contains("row 5"), ConfigError);
}

TEST_CASE("corrected csv lists value and sigma per bin") {
  const Histogram h = poisson_histogram(3.0, 50, 40, 12);
  const CorrectedSeries s = subtract_background(h, 0.5);
  std::ostringstream os;
  write_corrected_csv(s, os);
  const std::string text = os.str();
  CHECK(text.find("bin_start_us,value,sigma") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3 + 50);
}
