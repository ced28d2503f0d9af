#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sharpkit/model.hpp"
#include "test_util.hpp"

using namespace sharpkit;
using namespace sharpkit::model;
using testutil::QuadraticFixture;

namespace {

ModelSpec mlp_spec(std::vector<int> layers, Activation act = Activation::Tanh,
                   LossKind loss = LossKind::CrossEntropy) {
  ModelSpec spec;
  spec.kind = ModelKind::Mlp;
  spec.layer_sizes = std::move(layers);
  spec.activation = act;
  spec.loss = loss;
  return spec;
}

Dataset random_classification(std::mt19937_64& rng, int n, int dim, int classes) {
  Dataset ds;
  ds.features = Matrix(n, dim);
  ds.labels.resize(n);
  ds.class_count = classes;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, classes - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) ds.features.at(i, j) = gauss(rng);
    ds.labels[i] = pick(rng);
  }
  return ds;
}

Dataset random_regression(std::mt19937_64& rng, int n, int dim, int out) {
  Dataset ds;
  ds.features = Matrix(n, dim);
  ds.targets = Matrix(n, out);
  ds.class_count = 0;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) ds.features.at(i, j) = gauss(rng);
    for (int j = 0; j < out; ++j) ds.targets.at(i, j) = gauss(rng);
  }
  return ds;
}

}  // namespace

TEST_CASE("init_params conventions") {
  ModelSpec lin;
  lin.kind = ModelKind::LinearRegression;
  lin.layer_sizes = {2, 1};
  lin.loss = LossKind::Mse;

  const ParamVector p = init_params(lin, 7);
  CHECK(p.size() == 3);
  CHECK(p[2] == 0.0);  // bias exactly zero
  const double bound = std::sqrt(6.0 / 3.0);
  CHECK(std::abs(p[0]) <= bound);
  CHECK(std::abs(p[1]) <= bound);

  CHECK(init_params(lin, 7) == p);          // determinism
  CHECK(init_params(lin, 8) != p);          // seed sensitivity

  // oracle: 2*8+8 + 8*2+2 = 42
  const ModelSpec mlp = mlp_spec({2, 8, 2});
  CHECK(param_count(mlp) == 42);
  CHECK(init_params(mlp, 1).size() == 42);
}

TEST_CASE("spec validation") {
  ModelSpec bad;
  bad.kind = ModelKind::Mlp;
  bad.layer_sizes = {4};
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  ModelSpec ce1;
  ce1.kind = ModelKind::LogisticSoftmax;
  ce1.layer_sizes = {3, 1};
  ce1.loss = LossKind::CrossEntropy;
  CHECK_THROWS_AS(ce1.validate(), ConfigError);

  ModelSpec wrongloss;
  wrongloss.kind = ModelKind::LinearRegression;
  wrongloss.layer_sizes = {3, 2};
  wrongloss.loss = LossKind::CrossEntropy;
  CHECK_THROWS_AS(wrongloss.validate(), ConfigError);
}

TEST_CASE("cross-entropy at zero params is ln(k)") {
  std::mt19937_64 rng(2);
  for (int k : {2, 3, 5}) {
    ModelSpec spec;
    spec.kind = ModelKind::LogisticSoftmax;
    spec.layer_sizes = {4, k};
    spec.loss = LossKind::CrossEntropy;
    const Dataset ds = random_classification(rng, 20, 4, k);
    const ParamVector zero(param_count(spec), 0.0);
    CHECK(model::loss(spec, zero, Batch::whole(ds)) ==
          doctest::Approx(std::log(double(k))).epsilon(1e-12));
  }
  // single example, 2 classes, logits (0,0), label 0 -> ln 2
  ModelSpec two;
  two.kind = ModelKind::LogisticSoftmax;
  two.layer_sizes = {1, 2};
  two.loss = LossKind::CrossEntropy;
  Dataset one;
  one.features = Matrix(1, 1);
  one.labels = {0};
  one.class_count = 2;
  const ParamVector zero(param_count(two), 0.0);
  CHECK(model::loss(two, zero, Batch::whole(one)) ==
        doctest::Approx(0.693147).epsilon(1e-5));
}

TEST_CASE("mse at perfect predictions is zero") {
  // targets produced by the model itself
  ModelSpec spec;
  spec.kind = ModelKind::LinearRegression;
  spec.layer_sizes = {2, 1};
  spec.loss = LossKind::Mse;
  std::mt19937_64 rng(3);
  Dataset ds = random_regression(rng, 10, 2, 1);
  const ParamVector w = init_params(spec, 5);
  for (int i = 0; i < ds.size(); ++i) {
    ds.targets.at(i, 0) = model::predict(spec, w, ds, i)[0];
  }
  CHECK(model::loss(spec, w, Batch::whole(ds)) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("quadratic surrogate gradient") {
  // loss is exactly 1/2 |(w,b)|^2; at (1,0) the gradient is (1,0)
  QuadraticFixture quad({1.0});
  const ParamVector w{1.0, 0.0};
  CHECK(model::loss(quad.spec, w, quad.whole()) == doctest::Approx(0.5).epsilon(1e-14));
  const auto g = model::grad(quad.spec, w, quad.whole());
  CHECK(g.grad[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g.grad[1] == doctest::Approx(0.0));
}

TEST_CASE("gradient vanishes at the least-squares optimum") {
  std::mt19937_64 rng(17);
  ModelSpec spec;
  spec.kind = ModelKind::LinearRegression;
  spec.layer_sizes = {3, 1};
  spec.loss = LossKind::Mse;
  Dataset ds = random_regression(rng, 40, 3, 1);
  const std::vector<double> fit = testutil::normal_equations_fit(ds);
  const ParamVector w(fit.begin(), fit.end());
  CHECK(norm2(model::grad(spec, w, Batch::whole(ds)).grad) < 1e-10);
}

TEST_CASE("gradient matches central finite differences on 20 random cases") {
  std::mt19937_64 rng(123);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    ModelSpec spec;
    Dataset ds;
    const int kind = trial % 4;
    if (kind == 0) {
      spec.kind = ModelKind::LinearRegression;
      spec.layer_sizes = {3, 1};
      spec.loss = LossKind::Mse;
      ds = random_regression(rng, 8, 3, 1);
    } else if (kind == 1) {
      spec.kind = ModelKind::LogisticSoftmax;
      spec.layer_sizes = {4, 3};
      spec.loss = LossKind::CrossEntropy;
      ds = random_classification(rng, 8, 4, 3);
    } else if (kind == 2) {
      spec = mlp_spec({3, 6, 3}, Activation::Tanh, LossKind::CrossEntropy);
      ds = random_classification(rng, 8, 3, 3);
    } else {
      spec = mlp_spec({3, 5, 2}, Activation::Relu, LossKind::Mse);
      ds = random_regression(rng, 8, 3, 2);
    }
    ParamVector w = init_params(spec, 1000 + trial);
    // move off the all-zeros bias point
    for (double& x : w) x += 0.05 * std::sin(double(&x - w.data()) + trial);

    const Batch batch = Batch::whole(ds);
    const ParamVector analytic = model::grad(spec, w, batch).grad;
    const ParamVector numeric = testutil::fd_gradient(spec, w, batch);
    const double scale = std::max(1.0, norm2(numeric));
    const double err = testutil::max_abs_diff(analytic, numeric) / scale;
    worst = std::max(worst, err);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("loss is invariant to example order within the batch") {
  std::mt19937_64 rng(9);
  const ModelSpec spec = mlp_spec({3, 5, 2});
  const Dataset ds = random_classification(rng, 12, 3, 2);
  const ParamVector w = init_params(spec, 4);
  Batch fwd = Batch::whole(ds);
  Batch rev = fwd;
  std::reverse(rev.indices.begin(), rev.indices.end());
  std::shuffle(rev.indices.begin(), rev.indices.end(), rng);
  CHECK(model::loss(spec, w, fwd) == doctest::Approx(model::loss(spec, w, rev)).epsilon(1e-13));
}

TEST_CASE("full_grad equals the weighted mean of partition gradients") {
  std::mt19937_64 rng(21);
  const ModelSpec spec = mlp_spec({2, 4, 2});
  const Dataset ds = random_classification(rng, 30, 2, 2);
  const ParamVector w = init_params(spec, 2);

  const ParamVector full = model::full_grad(spec, w, ds);

  // single-batch dataset reduces to grad
  CHECK(testutil::max_abs_diff(full, model::grad(spec, w, Batch::whole(ds)).grad) == 0.0);

  // uneven two-part partition; oracle = example-count-weighted mean
  Batch part1{&ds, {}};
  Batch part2{&ds, {}};
  for (int i = 0; i < ds.size(); ++i) {
    (i < 11 ? part1 : part2).indices.push_back(i);
  }
  const ParamVector g1 = model::grad(spec, w, part1).grad;
  const ParamVector g2 = model::grad(spec, w, part2).grad;
  ParamVector mix(w.size());
  const double w1 = double(part1.size()) / ds.size();
  const double w2 = double(part2.size()) / ds.size();
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = w1 * g1[i] + w2 * g2[i];
  CHECK(testutil::max_abs_diff(full, mix) < 1e-12);
}

TEST_CASE("dataset of identical examples gives the single-example gradient") {
  ModelSpec spec;
  spec.kind = ModelKind::LogisticSoftmax;
  spec.layer_sizes = {2, 2};
  spec.loss = LossKind::CrossEntropy;
  Dataset ds;
  ds.features = Matrix(6, 2);
  ds.labels.assign(6, 1);
  ds.class_count = 2;
  for (int i = 0; i < 6; ++i) {
    ds.features.at(i, 0) = 0.3;
    ds.features.at(i, 1) = -1.2;
  }
  const ParamVector w = init_params(spec, 10);
  Batch one{&ds, {0}};
  CHECK(testutil::max_abs_diff(model::full_grad(spec, w, ds),
                               model::grad(spec, w, one).grad) < 1e-15);
}

TEST_CASE("hvp on a known quadratic") {
  QuadraticFixture quad({3.0});  // Hessian diag(3, 1)
  const ParamVector w{1.0, 0.0};
  const Batch batch = quad.whole();

  const ParamVector h1 = model::hvp(quad.spec, w, batch, {1, 0}, 1e-3);
  CHECK(h1[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(std::abs(h1[1]) < 1e-6);

  const ParamVector h2 = model::hvp(quad.spec, w, batch, {0, 1}, 1e-3);
  CHECK(std::abs(h2[0]) < 1e-6);
  CHECK(h2[1] == doctest::Approx(1.0).epsilon(1e-6));

  // antisymmetry of the central difference
  const ParamVector plus = model::hvp(quad.spec, w, batch, {0.6, -0.8}, 1e-3);
  const ParamVector minus = model::hvp(quad.spec, w, batch, {-0.6, 0.8}, 1e-3);
  CHECK(norm2(added(plus, minus)) < 1e-6);

  CHECK_THROWS_AS(model::hvp(quad.spec, w, batch, {0, 0}, 1e-3), DomainError);
}

TEST_CASE("hvp symmetry on a smooth model") {
  std::mt19937_64 rng(31);
  const ModelSpec spec = mlp_spec({2, 4, 2}, Activation::Tanh, LossKind::CrossEntropy);
  const Dataset ds = random_classification(rng, 10, 2, 2);
  const Batch batch = Batch::whole(ds);
  const ParamVector w = init_params(spec, 3);
  const double h = model::default_hvp_step(w);
  for (int trial = 0; trial < 5; ++trial) {
    const ParamVector u = testutil::random_vector(rng, w.size());
    const ParamVector v = testutil::random_vector(rng, w.size());
    const double a = dot(model::hvp(spec, w, batch, u, h), v);
    const double b = dot(u, model::hvp(spec, w, batch, v, h));
    CHECK(std::abs(a - b) <= 1e-5 * std::max(1.0, std::abs(a)));
  }
}
