#include "helpers.hpp"

#include "svlq/montecarlo.hpp"

#include <doctest.h>

#include <cmath>

using namespace svlq;
using namespace svlq::testing;

namespace {

FeedbackPolicy intro_policy(std::size_t steps) {
  RiccatiOptions ro;
  ro.steps = steps;
  return FeedbackPolicy(std::make_shared<const RiccatiSolution>(solve_backward(dirac(), brownian_regulator(), ro)),
                        dirac(), brownian_regulator());
}

}  // namespace

TEST_CASE("sample estimates") {
  const Estimate e = sample_estimate({1.0, 2.0, 3.0, 4.0});
  CHECK(e.mean == 2.5);
  CHECK(e.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK_THROWS_AS(sample_estimate({1.0}), ValidationError);
}

TEST_CASE("uncontrolled Brownian cost is one half") {
  SimOptions opts;
  opts.paths = 20000;
  opts.steps = 500;
  opts.seed = 1;
  const Estimate e = estimate_cost(simulate_lifted(LiftedSystem(dirac(), brownian_regulator()), ControlLaw::zero(), opts));
  CHECK(std::abs(e.mean - 0.5) <= 3.0 * e.se);
}

TEST_CASE("optimal feedback cost matches the value") {
  const FeedbackPolicy p = intro_policy(500);
  SimOptions opts;
  opts.paths = 20000;
  opts.steps = 500;
  opts.seed = 2;
  const Estimate e = estimate_cost(simulate_lifted(LiftedSystem(dirac(), brownian_regulator()), ControlLaw::feedback(p), opts));
  CHECK(std::abs(e.mean - std::log(std::cosh(1.0))) <= 3.0 * e.se);
}

TEST_CASE("verification identity") {
  const FeedbackPolicy p = intro_policy(500);
  const LiftedSystem sys(dirac(), brownian_regulator());
  SimOptions opts;
  opts.paths = 20000;
  opts.steps = 500;
  opts.seed = 3;
  SUBCASE("no perturbation") {
    const VerificationReport r = verify_identity(sys, p, Curve::zero(1), opts);
    CHECK(r.rhs == 0.0);
    CHECK(std::abs(r.lhs) <= 3.0 * r.lhs_se);
    CHECK(r.pass);
    CHECK(r.rhs_nonnegative);
  }
  SUBCASE("constant perturbation") {
    const VerificationReport r = verify_identity(sys, p, Curve::scalar_poly({0.5}), opts);
    CHECK(r.rhs == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(r.lhs > 0.0);
    CHECK(r.pass);
    CHECK(r.chi0 == p.solution().chi0());
  }
  SUBCASE("state-dependent model with a polynomial perturbation") {
    const auto mu = scalar_measure({0.0, 2.0}, {0.8, 0.5});
    const ModelCoefficients md = random_scalar_model(81);
    RiccatiOptions ro;
    ro.steps = 500;
    const FeedbackPolicy q(std::make_shared<const RiccatiSolution>(solve_backward(mu, md, ro)), mu, md);
    const VerificationReport r = verify_identity(LiftedSystem(mu, md), q, Curve::scalar_poly({0.0, 1.5, -1.5}), opts);
    CHECK(r.rhs > 0.0);
    CHECK(r.pass);
    CHECK(r.lhs >= -3.0 * r.lhs_se);
  }
}

TEST_CASE("combined standard error halves when the path count quadruples") {
  const FeedbackPolicy p = intro_policy(200);
  const LiftedSystem sys(dirac(), brownian_regulator());
  SimOptions opts;
  opts.steps = 200;
  opts.paths = 2000;
  const double se1 = verify_identity(sys, p, Curve::scalar_poly({0.5}), opts).lhs_se;
  opts.paths = 8000;
  const double se4 = verify_identity(sys, p, Curve::scalar_poly({0.5}), opts).lhs_se;
  CHECK(se1 / se4 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("L2 diagnostics") {
  CHECK(curve_l2_sq(Curve::scalar_poly({2.0}), 1.5) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(curve_l2_sq(Curve::scalar_poly({0.0, 1.0}), 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  SimOptions opts;
  opts.paths = 4000;
  opts.steps = 200;
  const SimulationBatch b = simulate_lifted(LiftedSystem(dirac(), brownian_regulator()), ControlLaw::zero(), opts);
  CHECK(control_l2_sq(b) == 0.0);
  CHECK(state_l2_sq(b) == doctest::Approx(0.5).epsilon(0.05));
  // ||K||^2 = 1 and ||gamma||^2 = 1 for the intro model.
  CHECK(apriori_scale(brownian_regulator(), dirac(), b) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(stability_scale(0.0, 0.0, b) == 0.0);
  CHECK(stability_scale(0.25, 0.5, b) == doctest::Approx(0.25 + 0.25 * state_l2_sq(b)));
}
