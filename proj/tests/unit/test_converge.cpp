#include "helpers.hpp"

#include "svlq/converge.hpp"
#include "svlq/csv.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

using namespace svlq;
using namespace svlq::testing;

namespace {

SweepOptions sweep_options(std::size_t steps = 1000, unsigned threads = 1) {
  SweepOptions o;
  o.riccati.steps = steps;
  o.threads = threads;
  return o;
}

}  // namespace

TEST_CASE("default schedule") {
  const auto s = default_schedule({5, 20});
  REQUIRE(s.size() == 2);
  CHECK(s[0].ratio == doctest::Approx(1.0 + 2.0 / std::sqrt(5.0)));
  CHECK(s[1].n == 20);
  CHECK(s[1].g0_shift == 0.0);
  // r_n decreases to 1 while n ln r_n grows.
  const auto long_schedule = default_schedule({10, 100, 1000, 10000});
  for (std::size_t i = 0; i + 1 < long_schedule.size(); ++i) {
    CHECK(long_schedule[i + 1].ratio < long_schedule[i].ratio);
    CHECK(long_schedule[i + 1].n * std::log(long_schedule[i + 1].ratio) >
          long_schedule[i].n * std::log(long_schedule[i].ratio));
  }
}

TEST_CASE("exact atomic kernels give a flat sweep") {
  const auto spec = KernelSpec::atomic({Atom{scalar(1.0), 0.0}, Atom{scalar(0.5), 2.0}});
  const SweepTable t = value_sweep(spec, brownian_regulator(), default_schedule({5, 10, 20}), sweep_options(500));
  REQUIRE(t.rows.size() == 3);
  CHECK(t.reference == "finest_row");
  for (const SweepRow& r : t.rows) {
    CHECK(r.kernel_error == 0.0);
    CHECK(r.value_error <= 1e-12);
  }
}

TEST_CASE("fractional sweep converges at first order or better") {
  const SweepTable t =
      value_sweep(KernelSpec::fractional(0.3), brownian_regulator(), default_schedule({5, 10, 20, 40}), sweep_options());
  REQUIRE(t.rows.size() == 4);
  CHECK(t.reference_value == t.rows.back().value);
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
    CHECK(t.rows[i + 1].value_error < t.rows[i].value_error);
    CHECK(t.rows[i + 1].kernel_error < t.rows[i].kernel_error);
  }
  double lo = INFINITY, hi = 0.0;
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
    lo = std::min(lo, t.rows[i].error_ratio);
    hi = std::max(hi, t.rows[i].error_ratio);
  }
  CHECK(hi / lo <= 10.0);
  CHECK(t.rows.back().error_ratio == 0.0);
  const RateFit fit = fit_rate(t);
  CHECK(fit.used_rows == 3);
  CHECK(fit.slope >= 0.9);
}

TEST_CASE("shifting g0 moves the value at the rate of the shift") {
  const auto spec = KernelSpec::atomic({Atom{scalar(1.0), 0.0}, Atom{scalar(0.5), 2.0}});
  ModelCoefficients md = brownian_regulator();
  md.L = Vec::Constant(1, 0.5);
  SweepOptions o = sweep_options(500);
  o.reference_value = value_sweep(spec, md, {SweepEntry{1, 2.0, 0.0}}, o).rows[0].value;
  std::vector<SweepEntry> schedule;
  for (int n : {5, 10, 20, 40}) schedule.push_back({n, 2.0, 1.0 / n});
  const SweepTable t = value_sweep(spec, md, schedule, o);
  CHECK(t.reference == "given");
  double lo = INFINITY, hi = 0.0;
  for (const SweepRow& r : t.rows) {
    CHECK(r.g0_error == doctest::Approx(1.0 / r.n).epsilon(1e-12));
    const double c = r.value_error * r.n;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  CHECK(hi / lo <= 1.5);
}

TEST_CASE("sweeps are reproducible across thread counts") {
  const auto schedule = default_schedule({4, 8, 16});
  const SweepTable a = value_sweep(KernelSpec::fractional(0.2), brownian_regulator(), schedule, sweep_options(300, 1));
  const SweepTable b = value_sweep(KernelSpec::fractional(0.2), brownian_regulator(), schedule, sweep_options(300, 3));
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].value == b.rows[i].value);
    CHECK(a.rows[i].kernel_error == b.rows[i].kernel_error);
  }
}

TEST_CASE("sweep preconditions") {
  ModelCoefficients md = brownian_regulator();
  CHECK_THROWS_AS(value_sweep(KernelSpec::fractional(0.3), md, {SweepEntry{4, 1.0, 0.0}}), ValidationError);
  md.Q = scalar(0.0);
  CHECK_THROWS_AS(value_sweep(KernelSpec::fractional(0.3), md, default_schedule({4})), ValidationError);
}

TEST_CASE("rate fit") {
  SweepTable t;
  for (double e : {0.4, 0.2, 0.1, 0.05}) t.rows.push_back({0, 0.0, e, 0.0, 0.0, 3.0 * e, 3.0});
  const RateFit fit = fit_rate(t);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-9));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.used_rows == 4);

  SweepTable two;
  two.rows = {t.rows[0], t.rows[1]};
  CHECK_THROWS_AS(fit_rate(two), ValidationError);

  SweepTable same;
  same.rows = {t.rows[0], t.rows[0], SweepRow{0, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0}};
  try {
    fit_rate(same);
    FAIL("expected a degenerate fit");
  } catch (const ValidationError& e) {
    CHECK(e.invariant() == "degenerate_fit");
  }
}

TEST_CASE("sweep CSV") {
  const SweepTable t = value_sweep(KernelSpec::fractional(0.3), brownian_regulator(), default_schedule({4, 8}), sweep_options(100));
  const auto path = (std::filesystem::temp_directory_path() / "svlq_sweep_test.csv").string();
  t.write_csv(path);
  const auto rows = csv::parse(csv::read_file(path));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"n", "r", "kernel_error", "g0_error", "value", "value_error", "ratio"});
  CHECK(rows[2][5] == "0");
  std::filesystem::remove(path);
}
