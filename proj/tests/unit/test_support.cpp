#include "helpers.hpp"

#include "svlq/csv.hpp"
#include "svlq/liftlq.hpp"
#include "svlq/rng.hpp"

#include <doctest.h>

#include <clocale>
#include <cmath>
#include <limits>

using namespace svlq;
using namespace svlq::testing;

TEST_CASE("Philox4x32-10 known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(rng::philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(rng::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(rng::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normal streams are reproducible and independent of draw order") {
  rng::NormalStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  double same = 0.0, diff_stream = 0.0, diff_seed = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = a();
    same += std::abs(x - b());
    diff_stream += std::abs(x - c());
    diff_seed += std::abs(x - d());
  }
  CHECK(same == 0.0);
  CHECK(diff_stream > 1.0);
  CHECK(diff_seed > 1.0);
}

TEST_CASE("normal stream moments") {
  rng::NormalStream s(1, 0);
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = s();
    REQUIRE(std::isfinite(x));
    m1 += x;
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  CHECK(std::abs(m1) < 5.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("CSV formatting and parsing") {
  CHECK(csv::format_double(0.1) == "0.1");
  CHECK(csv::format_double(-2.0) == "-2");
  CHECK(csv::format_double(1e-300) == "1e-300");
  for (double v : {1.0 / 3.0, std::sqrt(2.0), -1e-17, 6.02214076e23, std::numeric_limits<double>::denorm_min()})
    CHECK(std::strtod(csv::format_double(v).c_str(), nullptr) == v);
  CHECK(csv::quote("plain") == "plain");
  CHECK(csv::quote("a,b") == "\"a,b\"");
  CHECK(csv::quote("say \"hi\"") == "\"say \"\"hi\"\"\"");

  csv::Table t({"name", "value"});
  t.add_row({"x,y", "1"});
  t.add_row({"line\nbreak", "\"q\""});
  const auto rows = csv::parse(t.str());
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == "x,y");
  CHECK(rows[2][0] == "line\nbreak");
  CHECK(rows[2][1] == "\"q\"");
}

TEST_CASE("CSV numbers ignore the C locale") {
  const std::string saved = std::setlocale(LC_NUMERIC, nullptr);
  if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8")) {
    CHECK(csv::format_double(2.5) == "2.5");
    std::setlocale(LC_NUMERIC, saved.c_str());
  }
}

TEST_CASE("model validation") {
  ModelCoefficients m = brownian_regulator();
  CHECK_NOTHROW(m.validate());
  m.N = scalar(0.0);
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = brownian_regulator();
  m.Q = scalar(-1.0);
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = brownian_regulator();
  m.B = Mat::Zero(2, 1);
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = brownian_regulator();
  m.horizon = 0.0;
  CHECK_THROWS_AS(m.validate(), ValidationError);
}

TEST_CASE("lifted factor dynamics") {
  const auto mu = scalar_measure({0.0, 2.0}, {1.0, 0.5});
  ModelCoefficients md = random_scalar_model(2);
  const LiftedSystem sys(mu, md);
  CHECK(sys.factors() == 2);
  CHECK(sys.factor_dim() == 2);
  const Vec y = (Vec(2) << 0.3, -0.4).finished();
  const Vec a = Vec::Constant(1, 0.25);
  const double xbar = 0.3 - 0.2, t = 0.4;
  CHECK(sys.aggregate(y)(0) == doctest::Approx(xbar));
  CHECK(sys.state(t, y)(0) == doctest::Approx(md.g0(t)(0) + xbar));
  const Vec b = sys.drift(t, y, a), s = sys.diffusion(t, y, a);
  const double common = md.beta_tilde(t)(0) + md.B(0, 0) * xbar + md.C(0, 0) * 0.25;
  CHECK(b(0) == doctest::Approx(common));
  CHECK(b(1) == doctest::Approx(-2.0 * -0.4 + common));
  CHECK(s(0) == doctest::Approx(md.gamma_tilde(t)(0) + md.D(0, 0) * xbar + md.F(0, 0) * 0.25));
  CHECK(s(1) == s(0));
  CHECK_THROWS_AS(LiftedSystem(DiscreteMeasure({Atom{Mat::Ones(1, 2), 0.0}}), md), ValidationError);
}

TEST_CASE("flattening round trip") {
  const DiscreteMeasure mu({Atom{(Mat(1, 2) << 1.0, 0.0).finished(), 0.0},
                            Atom{(Mat(1, 2) << 0.0, 0.7).finished(), 1.5},
                            Atom{(Mat(1, 2) << 0.2, -0.3).finished(), 8.0}});
  ModelCoefficients md;
  md.B = Mat::Zero(2, 1);
  md.D = Mat::Zero(2, 1);
  md.C = (Mat(2, 1) << 1.0, 0.0).finished();
  md.F = Mat::Zero(2, 1);
  md.Q = scalar(1.0);
  md.N = scalar(1.0);
  md.L = Vec::Zero(1);
  md.beta = Curve::zero(2);
  md.gamma = Curve::constant((Vec(2) << 0.0, 1.0).finished());
  md.g0 = Curve::zero(1);
  const FlatLQ flat = flatten(mu, md, FlatConvention::Factor);
  CHECK(flat.size() == 6);
  const DiscreteMeasure back = unflatten(flat);
  REQUIRE(back.size() == mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    CHECK(back.node(i) == mu.node(i));
    CHECK(max_abs(back.weight(i) - mu.weight(i)) == 0.0);
  }
  CHECK(flatten(mu, md, FlatConvention::Rescaled).size() == 3);
}

TEST_CASE("scalar flattening matrices") {
  const auto mu = scalar_measure({0.5, 3.0}, {2.0, 0.5});
  const ModelCoefficients md = random_scalar_model(9);
  const FlatLQ z = flatten(mu, md, FlatConvention::Rescaled);
  const double B = md.B(0, 0);
  CHECK(z.A(0, 0) == doctest::Approx(B * 2.0 - 0.5));
  CHECK(z.A(0, 1) == doctest::Approx(B * 2.0));
  CHECK(z.A(1, 0) == doctest::Approx(B * 0.5));
  CHECK(z.C(1, 0) == doctest::Approx(md.C(0, 0) * 0.5));
  const FlatLQ y = flatten(mu, md, FlatConvention::Factor);
  CHECK(y.A(1, 0) == doctest::Approx(B * 2.0));
  CHECK(y.Q(0, 1) == doctest::Approx(md.Q(0, 0) * 2.0 * 0.5));
  CHECK(y.reconstruction(0, 0) == 2.0);
}
