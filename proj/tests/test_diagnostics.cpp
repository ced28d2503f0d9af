#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sharpkit/data.hpp"
#include "sharpkit/diagnostics.hpp"
#include "test_util.hpp"

using namespace sharpkit;
using namespace sharpkit::diagnostics;
using testutil::QuadraticFixture;

namespace {

model::ModelSpec logistic_spec(int dim, int classes) {
  model::ModelSpec spec;
  spec.kind = model::ModelKind::LogisticSoftmax;
  spec.layer_sizes = {dim, classes};
  spec.loss = model::LossKind::CrossEntropy;
  return spec;
}

// Power-iteration oracle for the dominant eigenvalue of the HVP operator.
double power_iteration_lambda1(const model::ModelSpec& spec, const ParamVector& params,
                               const Dataset& ds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParamVector v = testutil::random_vector(rng, params.size());
  const Batch whole = Batch::whole(ds);
  const double h = model::default_hvp_step(params);
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    ParamVector av = model::hvp(spec, params, whole, v, h);
    lambda = dot(av, v) / dot(v, v);
    const double n = norm2(av);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = av[i] / n;
  }
  return lambda;
}

}  // namespace

TEST_CASE("ema_error basics") {
  const Dataset ds = data::gen_gaussian_mixture(20, 2, 2, 1.5, 3);
  const model::ModelSpec spec = logistic_spec(2, 2);
  const ParamVector w = model::init_params(spec, 1);
  const ParamVector gf = model::full_grad(spec, w, ds);

  numkit::EmaState exact(w.size(), 0.5);
  exact.m = gf;
  CHECK(ema_error(exact, spec, w, ds) == doctest::Approx(0.0).epsilon(1e-15));

  numkit::EmaState fresh(w.size(), 0.5);
  CHECK(ema_error(fresh, spec, w, ds) == doctest::Approx(norm2(gf)).epsilon(1e-14));

  // lambda = 0 after one update on a single-example dataset: exact match
  Dataset one;
  one.class_count = 2;
  one.features = Matrix(1, 2);
  one.features.at(0, 0) = 0.3;
  one.features.at(0, 1) = -0.8;
  one.labels = {1};
  numkit::EmaState passthrough(w.size(), 0.0);
  passthrough = numkit::ema_update(passthrough, model::full_grad(spec, w, one));
  CHECK(ema_error(passthrough, spec, w, one) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("ema_error is invariant to dataset order") {
  const Dataset ds = data::gen_gaussian_mixture(16, 2, 2, 1.0, 5);
  Dataset reversed = ds;
  for (int i = 0; i < ds.size(); ++i) {
    const int src = ds.size() - 1 - i;
    for (int j = 0; j < ds.dim(); ++j) reversed.features.at(i, j) = ds.features.at(src, j);
    reversed.labels[i] = ds.labels[src];
  }
  const model::ModelSpec spec = logistic_spec(2, 2);
  const ParamVector w = model::init_params(spec, 2);
  numkit::EmaState state(w.size(), 0.9);
  state = numkit::ema_update(state, model::full_grad(spec, w, ds));
  CHECK(ema_error(state, spec, w, ds) ==
        doctest::Approx(ema_error(state, spec, w, reversed)).epsilon(1e-12));
}

TEST_CASE("orthogonality statistic vanishes under exhaustive enumeration") {
  const Dataset ds = data::gen_gaussian_mixture(8, 2, 2, 1.5, 21);
  const model::ModelSpec spec = logistic_spec(2, 2);
  const ParamVector w = model::init_params(spec, 7);
  const double g2 = std::pow(norm2(model::full_grad(spec, w, ds)), 2);

  const OrthogonalityStat stat =
      orthogonality_stat(spec, w, ds, 2, OrthogonalityMode::Enumerate);
  CHECK(stat.count == 28);
  CHECK(std::abs(stat.mean_inner) <= 1e-10 * std::max(1.0, g2));

  // b = n: the only minibatch is the dataset itself
  const OrthogonalityStat full = orthogonality_stat(spec, w, ds, 8, OrthogonalityMode::Enumerate);
  CHECK(full.count == 1);
  CHECK(std::abs(full.mean_inner) <= 1e-12);
}

TEST_CASE("orthogonality statistic in sample mode stays within 4 stderr") {
  const Dataset ds = data::gen_gaussian_mixture(32, 2, 2, 1.5, 4);
  const model::ModelSpec spec = logistic_spec(2, 2);
  const ParamVector w = model::init_params(spec, 9);
  const OrthogonalityStat stat =
      orthogonality_stat(spec, w, ds, 4, OrthogonalityMode::Sample, 10000, 17);
  CHECK(stat.count == 10000);
  CHECK(std::abs(stat.mean_inner) <= 4.0 * stat.stderr_inner);
}

TEST_CASE("friendly objective identities") {
  const Dataset ds = data::gen_gaussian_mixture(24, 2, 2, 1.5, 6);
  const model::ModelSpec spec = logistic_spec(2, 2);
  const ParamVector w = model::init_params(spec, 3);

  // batch == dataset and sigma=1 cancels exactly
  std::mt19937_64 rng(1);
  const ParamVector eps = testutil::random_vector(rng, w.size(), 0.05);
  CHECK(friendly_objective(spec, w, eps, Batch::whole(ds), ds, 1.0) ==
        doctest::Approx(0.0).epsilon(1e-15));

  // eps = 0, sigma = 0 reduces to the batch loss at w
  Batch batch{&ds, {0, 1, 2, 3}};
  const ParamVector zero(w.size(), 0.0);
  CHECK(friendly_objective(spec, w, zero, batch, ds, 0.0) ==
        doctest::Approx(model::loss(spec, w, batch)).epsilon(1e-15));
}

TEST_CASE("noise direction scores at least the gradient direction") {
  // With m set to the exact full gradient and sigma=1, the direction
  // d = g_B - grad L maximizes the first-order friendly objective; at a
  // small radius the exact objective must agree.
  const Dataset ds = data::gen_gaussian_mixture(32, 2, 3, 1.5, 12);
  const model::ModelSpec spec = logistic_spec(2, 3);
  std::mt19937_64 rng(8);
  const double rho = 1e-3;
  int wins = 0;
  for (int trial = 0; trial < 20; ++trial) {
    ParamVector w = model::init_params(spec, 100 + trial);
    for (double& x : w) x += 0.1 * std::tanh(double(trial + 1) * x + 0.3);
    Batch batch{&ds, {}};
    for (int i = 0; i < 8; ++i) {
      batch.indices.push_back(std::uniform_int_distribution<int>(0, ds.size() - 1)(rng));
    }
    const ParamVector g = model::grad(spec, w, batch).grad;
    const ParamVector gf = model::full_grad(spec, w, ds);
    const ParamVector d = subtracted(g, gf);
    const double score_d =
        friendly_objective(spec, w, numkit::perturbation(d, rho), batch, ds, 1.0);
    const double score_g =
        friendly_objective(spec, w, numkit::perturbation(g, rho), batch, ds, 1.0);
    if (score_d >= score_g - 1e-10) ++wins;
  }
  CHECK(wins == 20);
}

TEST_CASE("sharpness gap on a known quadratic") {
  QuadraticFixture quad({3.0});
  const ParamVector w{1.0, 0.0};
  CHECK(sharpness_gap(quad.spec, w, quad.dataset, 0.0) == doctest::Approx(0.0));
  // closed form: L((1.1,0)) - L((1,0)) = 1.815 - 1.5 = 0.315
  CHECK(sharpness_gap(quad.spec, w, quad.dataset, 0.1) ==
        doctest::Approx(0.315).epsilon(1e-12));
  // monotone in rho along the fixed ascent ray on a convex quadratic
  double prev = 0.0;
  for (double rho : {0.05, 0.1, 0.2, 0.4}) {
    const double gap = sharpness_gap(quad.spec, w, quad.dataset, rho);
    CHECK(gap > prev);
    prev = gap;
  }
  // Batch overload agrees with the dataset overload on the whole set
  CHECK(sharpness_gap(quad.spec, w, quad.whole(), 0.1) ==
        doctest::Approx(0.315).epsilon(1e-12));
}

TEST_CASE("lanczos recovers a known spectrum") {
  QuadraticFixture quad({5.0, 2.0});  // Hessian diag(5,2,1)
  const ParamVector w{0.4, -0.3, 0.2};
  const SpectrumReport rep = lanczos_spectrum(quad.spec, w, quad.dataset, 2, 3, 11);
  REQUIRE(rep.eigenvalues.size() == 2);
  CHECK(rep.eigenvalues[0] == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(rep.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(rep.lambda1 == rep.eigenvalues[0]);
  // Ritz values never exceed the true extreme by more than rounding
  CHECK(rep.eigenvalues[0] <= 5.0 + 1e-5);
}

TEST_CASE("lanczos k=1 agrees with power iteration") {
  QuadraticFixture quad({4.0, 2.5, 1.5});
  const ParamVector w{0.1, 0.2, -0.1, 0.4};
  const SpectrumReport rep = lanczos_spectrum(quad.spec, w, quad.dataset, 1, 6, 2);
  const double oracle = power_iteration_lambda1(quad.spec, w, quad.dataset, 3);
  CHECK(rep.lambda1 == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(rep.lambda1 == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("identity Hessian breaks down immediately with Ritz value 1") {
  QuadraticFixture quad({1.0, 1.0, 1.0});  // Hessian = I_4
  const ParamVector w{0.3, -0.2, 0.5, 0.1};
  const SpectrumReport rep = lanczos_spectrum(quad.spec, w, quad.dataset, 3, 8, 5);
  CHECK(rep.breakdown);
  REQUIRE(!rep.eigenvalues.empty());
  for (double v : rep.eigenvalues) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("lanczos preconditions") {
  QuadraticFixture quad({2.0});
  const ParamVector w{0.1, 0.1};
  CHECK_THROWS_AS(lanczos_spectrum(quad.spec, w, quad.dataset, 3, 2, 0), ConfigError);
  CHECK_THROWS_AS(lanczos_spectrum(quad.spec, w, quad.dataset, 5, 10, 0), ConfigError);
}

TEST_CASE("ratio_1_5 present only with five values") {
  QuadraticFixture quad({5.0, 2.0, 1.0, 1.0});  // Hessian diag(5,2,1,1,1)
  const ParamVector w(5, 0.2);
  const SpectrumReport rep = lanczos_spectrum(quad.spec, w, quad.dataset, 5, 25, 7);
  REQUIRE(rep.eigenvalues.size() == 5);
  REQUIRE(rep.ratio_1_5.has_value());
  CHECK(*rep.ratio_1_5 == doctest::Approx(5.0).epsilon(1e-4));

  const SpectrumReport small = lanczos_spectrum(quad.spec, w, quad.dataset, 3, 9, 7);
  CHECK(!small.ratio_1_5.has_value());
}

TEST_CASE("estimation trace tail mean") {
  EstimationTrace trace;
  for (int i = 0; i < 100; ++i) {
    trace.steps.push_back(i);
    trace.phi.push_back(i < 90 ? 100.0 : 1.0);
  }
  CHECK(trace.tail_mean(0.1) == doctest::Approx(1.0));
  CHECK(trace.tail_mean(1.0) == doctest::Approx(0.9 * 100.0 + 0.1 * 1.0));
}

TEST_CASE("jacobi eigenvalues oracle") {
  // symmetric 3x3 with known spectrum {6, 3, 1} via a rotation of a diagonal
  std::vector<double> a = {
      4.0, 1.0, 1.0,
      1.0, 4.0, 1.0,
      1.0, 1.0, 2.0,
  };
  const auto eig = symmetric_eigenvalues(a, 3);
  // characteristic oracle computed with the companion cubic:
  // eigenvalues of this matrix are 3 and (7 +- sqrt(17))/2
  CHECK(eig[0] == doctest::Approx((7.0 + std::sqrt(17.0)) / 2.0).epsilon(1e-10));
  CHECK(eig[1] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(eig[2] == doctest::Approx((7.0 - std::sqrt(17.0)) / 2.0).epsilon(1e-10));
}
