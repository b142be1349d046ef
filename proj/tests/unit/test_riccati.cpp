#include "helpers.hpp"

#include "svlq/csv.hpp"
#include "svlq/liftlq.hpp"
#include "svlq/riccati.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace svlq;
using namespace svlq::testing;

namespace {

// Term-by-term transcription of R1, R2, R3 for scalar blocks (d = d' = m = 1),
// written with explicit loops and no shared code with the solver.
struct ScalarTranscription {
  std::vector<double> c, theta;
  ModelCoefficients md;

  double agg(const Mat& G) const {
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
      for (std::size_t l = 0; l < c.size(); ++l) s += c[k] * G(k, l) * c[l];
    return s;
  }
  double colsum(const Mat& G, std::size_t j) const {  // sum_k c_k Gamma_kj
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * G(k, j);
    return s;
  }
  double S(const Mat& G, std::size_t j) const {
    return md.C(0, 0) * colsum(G, j) + md.F(0, 0) * agg(G) * md.D(0, 0);
  }
  double nhat(const Mat& G) const { return md.N(0, 0) + md.F(0, 0) * agg(G) * md.F(0, 0); }
  double ell(const Vec& L) const {
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * L(k);
    return s;
  }
  double h(double t, const Mat& G, const Vec& L) const {
    return md.C(0, 0) * ell(L) + md.F(0, 0) * agg(G) * md.gamma_tilde(t)(0);
  }
  double r1(const Mat& G, std::size_t i, std::size_t j) const {
    const double B = md.B(0, 0), D = md.D(0, 0);
    return md.Q(0, 0) + D * agg(G) * D + B * colsum(G, j) + colsum(G, i) * B - S(G, i) * S(G, j) / nhat(G);
  }
  double r2(double t, const Mat& G, const Vec& L, std::size_t i) const {
    const double g0 = md.g0(t)(0), bt = md.beta_tilde(t)(0), gt = md.gamma_tilde(t)(0);
    return md.L(0) + md.Q(0, 0) * g0 + md.B(0, 0) * ell(L) + colsum(G, i) * bt + md.D(0, 0) * agg(G) * gt -
           S(G, i) * h(t, G, L) / nhat(G);
  }
  double r3(double t, const Mat& G, const Vec& L) const {
    const double g0 = md.g0(t)(0), bt = md.beta_tilde(t)(0), gt = md.gamma_tilde(t)(0);
    const double hv = h(t, G, L);
    return g0 * md.Q(0, 0) * g0 + 2.0 * md.L(0) * g0 + gt * agg(G) * gt + 2.0 * bt * ell(L) - hv * hv / nhat(G);
  }
};

Mat random_symmetric_psd(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat a(static_cast<Index>(n), static_cast<Index>(n));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = u(gen);
  return a * a.transpose() * 0.3;
}

double max_gap_to_tanh(const RiccatiSolution& s) {
  double gap = 0.0;
  for (std::size_t k = 0; k <= s.steps(); ++k)
    gap = std::max(gap, std::abs(s.gamma(k)(0, 0) - std::tanh(s.horizon() - s.time(k))));
  return gap;
}

}  // namespace

TEST_CASE("R1 reduces to Q at the zero solution") {
  const auto mu = scalar_measure({0.0, 1.0, 3.0}, {1.0, 0.5, 0.25});
  const ModelCoefficients md = random_scalar_model(3);
  const Mat r1 = rhs_r1(Mat::Zero(3, 3), mu, md);
  CHECK(max_abs(r1 - Mat::Constant(3, 3, md.Q(0, 0))) == 0.0);
}

TEST_CASE("intro regulator right-hand sides") {
  const auto mu = dirac();
  const ModelCoefficients md = brownian_regulator();
  for (double g : {0.0, 0.3, 0.761594}) {
    CHECK(rhs_r1(scalar(g), mu, md)(0, 0) == doctest::Approx(1.0 - g * g).epsilon(1e-15));
    CHECK(rhs_r3(0.2, scalar(g), Vec::Zero(1), mu, md) == doctest::Approx(g).epsilon(1e-15));
  }
}

TEST_CASE("R2 and R3 at zero data") {
  const auto mu = scalar_measure({0.0, 2.0}, {1.0, 0.5});
  ModelCoefficients md = brownian_regulator();
  md.L = Vec::Constant(1, 0.7);
  md.gamma = Curve::zero(1);
  const Vec r2 = rhs_r2(0.0, Mat::Zero(2, 2), Vec::Zero(2), mu, md);
  CHECK(r2(0) == 0.7);
  CHECK(r2(1) == 0.7);
  md.g0 = Curve::scalar_poly({1.5});
  const Vec r2b = rhs_r2(0.0, Mat::Zero(2, 2), Vec::Zero(2), mu, md);
  CHECK(r2b(0) == doctest::Approx(0.7 + 1.5));
  ModelCoefficients zero = brownian_regulator();
  zero.Q = scalar(0.0);
  zero.gamma = Curve::zero(1);
  CHECK(rhs_r3(0.0, Mat::Zero(2, 2), Vec::Zero(2), mu, zero) == 0.0);
}

TEST_CASE("right-hand sides match a term-by-term transcription") {
  for (unsigned seed : {1u, 2u, 3u, 4u}) {
    ScalarTranscription tr{{0.8, -0.4, 0.3}, {0.0, 1.5, 7.0}, random_scalar_model(seed)};
    const auto mu = scalar_measure(tr.theta, tr.c);
    const Mat G = random_symmetric_psd(3, seed + 10);
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Vec L = Vec::NullaryExpr(3, [&] { return u(gen); });
    const double t = 0.37;
    const Mat r1 = rhs_r1(G, mu, tr.md);
    const Vec r2 = rhs_r2(t, G, L, mu, tr.md);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(r1(static_cast<Index>(i), static_cast<Index>(j)) == doctest::Approx(tr.r1(G, i, j)).epsilon(1e-13));
      CHECK(r2(static_cast<Index>(i)) == doctest::Approx(tr.r2(t, G, L, i)).epsilon(1e-13));
    }
    CHECK(rhs_r3(t, G, L, mu, tr.md) == doctest::Approx(tr.r3(t, G, L)).epsilon(1e-13));
    CHECK(max_abs(r1 - r1.transpose()) < 1e-14);
  }
}

TEST_CASE("singular N^ is reported with its time") {
  ModelCoefficients md = random_scalar_model(5);
  md.N = scalar(1e-3);
  md.F = scalar(1.0);
  const auto mu = dirac();
  // N + F^2 Gamma < 0 for Gamma = -1e-3.
  CHECK_THROWS_AS(rhs_r1(scalar(-1e-3), mu, md), NumericalError);
  try {
    rhs_r1(scalar(-1e-3), mu, md);
  } catch (const NumericalError& e) {
    CHECK(e.invariant() == "nhat_invertible");
  }
}

TEST_CASE("intro regulator: tanh trajectory and log cosh value") {
  RiccatiOptions opts;
  opts.steps = 10000;
  const RiccatiSolution s = solve_backward(dirac(), brownian_regulator(), opts);
  CHECK(max_gap_to_tanh(s) <= 1e-6);
  CHECK(std::abs(s.chi0() - std::log(std::cosh(1.0))) <= 1e-5);
  CHECK(s.gamma(s.steps())(0, 0) == 0.0);
  CHECK(s.lambda(s.steps())(0) == 0.0);
  CHECK(s.chi(s.steps()) == 0.0);
  CHECK(s.invariants().max_asymmetry <= 1e-10);
  CHECK(s.invariants().min_lifted_eig >= 0.0);
}

TEST_CASE("zero running cost gives the zero solution exactly") {
  ModelCoefficients md = random_scalar_model(11);
  md.Q = scalar(0.0);
  md.L = Vec::Zero(1);
  md.g0 = Curve::zero(1);
  const auto mu = scalar_measure({0.0, 0.5, 4.0}, {1.0, -0.3, 0.6});
  for (Scheme sc : {Scheme::ExpEuler, Scheme::ExpMidpoint}) {
    RiccatiOptions opts;
    opts.steps = 200;
    opts.scheme = sc;
    const RiccatiSolution s = solve_backward(mu, md, opts);
    for (std::size_t k = 0; k <= s.steps(); ++k) {
      CHECK(max_abs(s.gamma(k)) == 0.0);
      CHECK(max_abs(s.lambda(k)) == 0.0);
      CHECK(s.chi(k) == 0.0);
    }
  }
  CHECK(oracle_rk4(mu, md, 1000).chi0() == 0.0);
}

TEST_CASE("flat Riccati reproduces the kernel solution") {
  SUBCASE("single Dirac atom gives tanh") {
    const FlatLQ flat = flatten(dirac(), brownian_regulator());
    const FlatRiccatiSolution f = solve_flat(flat, 10000, 1.0);
    double gap = 0.0;
    for (std::size_t k = 0; k < f.times.size(); ++k)
      gap = std::max(gap, std::abs(f.gamma[k](0, 0) - std::tanh(1.0 - f.times[k])));
    CHECK(gap <= 1e-6);
  }
  SUBCASE("four atoms across four decades") {
    const auto mu = scalar_measure({0.1, 1.0, 10.0, 100.0}, {0.9, 0.5, -0.35, 0.7});
    const ModelCoefficients md = random_scalar_model(7);
    RiccatiOptions opts;
    opts.steps = 2000;
    const RiccatiSolution s = solve_backward(mu, md, opts);
    const FlatRiccatiSolution factor = solve_flat(flatten(mu, md, FlatConvention::Factor), 2000, 1.0);
    const FlatRiccatiSolution rescaled = solve_flat(flatten(mu, md, FlatConvention::Rescaled), 2000, 1.0);
    double gap_factor = 0.0, gap_rescaled = 0.0;
    for (std::size_t k = 0; k <= s.steps(); ++k) {
      Mat lifted(4, 4);
      for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j)
          lifted(i, j) = mu.weight(static_cast<std::size_t>(i))(0, 0) * s.gamma(k)(i, j) *
                         mu.weight(static_cast<std::size_t>(j))(0, 0);
      gap_factor = std::max(gap_factor, max_abs(lifted - factor.gamma[k]));
      gap_rescaled = std::max(gap_rescaled, max_abs(s.gamma(k) - rescaled.gamma[k]));
    }
    CHECK(gap_factor <= 1e-9);
    CHECK(gap_rescaled <= 1e-9);
    CHECK(factor.min_eig >= -1e-10);
  }
  SUBCASE("zero state cost") {
    ModelCoefficients md = random_scalar_model(8);
    md.Q = scalar(0.0);
    const auto mu = scalar_measure({0.0, 3.0}, {1.0, 0.5});
    const FlatRiccatiSolution f = solve_flat(flatten(mu, md, FlatConvention::Factor), 100, 1.0);
    for (const Mat& g : f.gamma) CHECK(max_abs(g) == 0.0);
  }
}

TEST_CASE("RK4 reference") {
  SUBCASE("tanh at a fine grid") {
    const RiccatiSolution s = oracle_rk4(dirac(), brownian_regulator(), 100000);
    CHECK(max_gap_to_tanh(s) <= 1e-8);
  }
  SUBCASE("stiffness guard") {
    const auto mu = scalar_measure({0.0, 1000.0}, {1.0, 1.0});
    CHECK_THROWS_AS(oracle_rk4(mu, brownian_regulator(), 100), NumericalError);
  }
}

TEST_CASE("exponential midpoint converges at second order to the RK4 reference") {
  const auto mu = scalar_measure({0.5, 2.0}, {0.8, 0.6});
  const ModelCoefficients md = random_scalar_model(21);
  const RiccatiSolution ref = oracle_rk4(mu, md, 100000);
  auto sup_err = [&](std::size_t M) {
    RiccatiOptions opts;
    opts.steps = M;
    const RiccatiSolution s = solve_backward(mu, md, opts);
    const std::size_t stride = 100000 / M;
    double e = 0.0;
    for (std::size_t k = 0; k <= M; ++k) {
      e = std::max(e, max_abs(s.gamma(k) - ref.gamma(k * stride)));
      e = std::max(e, max_abs(s.lambda(k) - ref.lambda(k * stride)));
      e = std::max(e, std::abs(s.chi(k) - ref.chi(k * stride)));
    }
    return e;
  };
  const double e1000 = sup_err(1000), e2000 = sup_err(2000), e4000 = sup_err(4000);
  CHECK(e4000 <= 1e-6);
  CHECK(e1000 / e2000 >= 3.5);
  CHECK(e2000 / e4000 >= 3.5);
}

TEST_CASE("value increases with the state cost") {
  for (unsigned seed : {31u, 32u, 33u}) {
    const auto mu = scalar_measure({0.0, 1.0, 5.0}, {1.0, 0.4, 0.3});
    ModelCoefficients md = random_scalar_model(seed);
    RiccatiOptions opts;
    opts.steps = 500;
    const double base = solve_backward(mu, md, opts).chi0();
    md.Q = md.Q + scalar(0.1);
    CHECK(solve_backward(mu, md, opts).chi0() >= base);
  }
}

TEST_CASE("stiff nodes stay finite and positive semidefinite") {
  const auto mu = scalar_measure({0.0, 1.0, 1e4}, {1.0, 0.5, 2.0});
  RiccatiOptions opts;
  opts.steps = 1000;
  opts.scheme = Scheme::ExpEuler;
  const RiccatiSolution s = solve_backward(mu, random_scalar_model(41), opts);
  for (std::size_t k = 0; k <= s.steps(); ++k) CHECK(s.gamma(k).allFinite());
  CHECK(s.invariants().min_lifted_eig >= -1e-8 * s.invariants().lifted_scale);
  CHECK(s.invariants().max_asymmetry <= 1e-10);
}

TEST_CASE("grid-adjacent jumps shrink under refinement") {
  const auto mu = scalar_measure({0.0, 3.0}, {1.0, 0.5});
  const ModelCoefficients md = random_scalar_model(51);
  auto jump = [&](std::size_t M) {
    RiccatiOptions opts;
    opts.steps = M;
    const RiccatiSolution s = solve_backward(mu, md, opts);
    double j = 0.0;
    for (std::size_t k = 0; k < M; ++k) j = std::max(j, max_abs(s.gamma(k + 1) - s.gamma(k)));
    return j;
  };
  const double j100 = jump(100), j400 = jump(400);
  CHECK(j400 < j100 / 3.0);
}

TEST_CASE("solution CSV export") {
  RiccatiOptions opts;
  opts.steps = 10;
  const RiccatiSolution s = solve_backward(scalar_measure({0.0, 1.0}, {1.0, 0.5}), brownian_regulator(), opts);
  const auto path = (std::filesystem::temp_directory_path() / "svlq_riccati_test.csv").string();
  s.write_csv(path, 5);
  const auto rows = csv::parse(csv::read_file(path));
  REQUIRE(rows.size() == 1 + 3 * (4 + 2 + 1));
  CHECK(rows[0] == std::vector<std::string>{"kind", "t", "i", "j", "row", "col", "value"});
  CHECK(rows[1][0] == "gamma");
  CHECK(rows.back()[0] == "chi");
  CHECK(rows.back()[6] == "0");
  std::filesystem::remove(path);
}

TEST_CASE("scheme names") {
  CHECK(parse_scheme("exp-euler") == Scheme::ExpEuler);
  CHECK(scheme_name(Scheme::ExpMidpoint) == "exp-midpoint");
  CHECK_THROWS_AS(parse_scheme("rk4"), ValidationError);
}
