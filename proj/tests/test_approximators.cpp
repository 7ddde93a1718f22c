#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "memmo/approximators.hpp"

using namespace memmo;
using namespace memmo::testing;

namespace {

Matrix Col(std::initializer_list<double> values) {
  Matrix m(static_cast<int>(values.size()), 1);
  int i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

Vector V(std::initializer_list<double> values) { return Col(values).col(0); }

/// Pairs of rows sharing x uniform in [-1, 1], one with y near +1 and one near -1.
void BimodalSet(int n, Rng& rng, Matrix& X, Matrix& Y) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.02);
  X.resize(n, 1);
  Y.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = i % 2 == 0 ? u(rng) : X(i - 1, 0);
    Y(i, 0) = (i % 2 == 0 ? 1.0 : -1.0) + noise(rng);
  }
}

/// Rows at least `gap` apart, so the kernel matrix stays well conditioned.
Matrix SeparatedInputs(int n, int d, double gap, Rng& rng) {
  Matrix X(n, d);
  for (int i = 0; i < n;) {
    X.row(i) = RandomMatrix(1, d, rng, -3.0, 3.0);
    bool ok = true;
    for (int j = 0; j < i && ok; ++j) ok = (X.row(i) - X.row(j)).norm() >= gap;
    i += ok;
  }
  return X;
}

}  // namespace

TEST_CASE("rbf kernel values") {
  const GprHyper unit{1.0, 1.0, 1e-8};
  CHECK(RbfKernel(V({0.3, 0.2}), V({0.3, 0.2}), GprHyper{0.5, 2.5, 1e-8}) == 2.5);
  CHECK(RbfKernel(V({0.0}), V({1.0}), unit) == doctest::Approx(0.6065306597).epsilon(1e-9));
  double prev = 1.0;
  for (double r = 0.5; r < 20; r += 0.5) {
    const double k = RbfKernel(V({0.0}), V({r}), unit);
    CHECK(k < prev);
    prev = k;
  }
  CHECK(prev < 1e-80);
}

TEST_CASE("k-NN examples") {
  const Matrix X = Col({0.0, 1.0, 10.0}), Y = Col({0.0, 2.0, 100.0});
  CHECK(KnnModel::Fit(X, Y, {2}).Predict(V({0.4})).y[0] == 1.0);
  CHECK(KnnModel::Fit(X, Y, {3}).Predict(V({5.0})).y[0] == doctest::Approx(34.0));
  const KnnModel one = KnnModel::Fit(X, Y);
  for (int i = 0; i < 3; ++i) CHECK(one.Predict(X.row(i).transpose()).y == Y.row(i).transpose());
  CHECK(KnnModel::Fit(Col({0.0, 2.0}), Col({5.0, 7.0})).Neighbors(V({1.0})).front() == 0);
  CHECK_THROWS_AS(KnnModel::Fit(X, Y, {4}), InputError);
  CHECK_THROWS_AS(one.Predict(V({0.0, 1.0})), InputError);
}

TEST_CASE("k-NN neighbour search is identical serially and in parallel") {
  Rng rng(1);
  const Matrix X = RandomMatrix(200, 6, rng), Y = RandomMatrix(200, 3, rng);
  const KnnModel m = KnnModel::Fit(X, Y, {5, true});
  for (int q = 0; q < 20; ++q) {
    const Vector x = RandomMatrix(6, 1, rng);
    CHECK(m.Neighbors(x, Exec::kSerial) == m.Neighbors(x, Exec::kParallel));
  }
}

TEST_CASE("GPR posterior mean matches a 2x2 linear-solve oracle") {
  const GprHyper h{1.0, 1.0, 1e-8};
  const GprModel m = GprModel::Fit(Col({0.0, 1.0}), Col({0.0, 1.0}), h);
  const double k01 = std::exp(-0.5), kq = std::exp(-0.125);
  // Cramer's rule on [[1+s, k01], [k01, 1+s]] a = (0, 1).
  const double s = 1.0 + h.noise_variance + m.jitter();
  const double det = s * s - k01 * k01;
  const double a0 = -k01 / det, a1 = s / det;
  CHECK(std::abs(m.Predict(V({0.5})).y[0] - (kq * a0 + kq * a1)) <= 1e-10);
  CHECK(m.Predict(V({0.5})).mode_probability == 1.0);
}

TEST_CASE("GPR interpolates training data on random datasets") {
  Rng rng(2);
  std::uniform_int_distribution<int> size(2, 30), dim(1, 4);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(rng), d = dim(rng);
    const Matrix X = SeparatedInputs(n, d, 0.1, rng);
    const Matrix Y = RandomMatrix(n, 3, rng);
    const GprModel m = GprModel::Fit(X, Y, {0.2, 1.0, 1e-8});
    double worst = 0.0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, MaxAbs(m.Predict(X.row(i).transpose()).y - Y.row(i).transpose()));
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("GPR is linear in the outputs and returns to zero far away") {
  Rng rng(3);
  const Matrix X = RandomMatrix(25, 3, rng), Y = RandomMatrix(25, 4, rng);
  const GprHyper h = GprHyper::Defaults(X, Y);
  const GprModel a = GprModel::Fit(X, Y, h), b = GprModel::Fit(X, -2.5 * Y, h);
  for (int q = 0; q < 10; ++q) {
    const Vector x = RandomMatrix(3, 1, rng);
    CHECK(MaxAbs(b.Predict(x).y + 2.5 * a.Predict(x).y) <= 1e-10);
  }
  CHECK(MaxAbs(a.Predict(Vector::Constant(3, 1e3)).y) <= 1e-6);
  CHECK(a.PosteriorVariance(Vector::Constant(3, 1e3)) == doctest::Approx(h.signal_variance));
}

TEST_CASE("GPR fitting edge cases") {
  const GprModel single = GprModel::Fit(Col({0.4}), Col({2.0}), {1.0, 1.5, 1e-6});
  CHECK(single.factor()(0, 0) * single.factor()(0, 0) == doctest::Approx(1.5 + 1e-6).epsilon(1e-12));
  const GprModel dup = GprModel::Fit(Col({0.0, 0.0, 1.0}), Col({1.0, 1.0, 0.0}), {1.0, 1.0, 1e-8});
  CHECK(std::abs(dup.Predict(V({0.0})).y[0] - 1.0) <= 1e-3);
  CHECK_THROWS_AS(GprModel::Fit(Col({0.0}), Col({0.0}), {0.0, 1.0, 1e-6}), InputError);
  CHECK_THROWS_AS(GprModel::Fit(Col({0.0}), Col({0.0}), {1.0, 1.0, 1e-9}), InputError);
}

TEST_CASE("GPR defaults follow the data") {
  const Matrix X = Col({0.0, 1.0, 3.0});
  const Matrix Y = Col({1.0, 2.0, 3.0});
  const GprHyper h = GprHyper::Defaults(X, Y);
  CHECK(h.length_scale == doctest::Approx(2.0));
  CHECK(h.signal_variance == doctest::Approx(2.0 / 3.0));
  CHECK(h.noise_variance == 1e-6);
}

TEST_CASE("BGMR keeps one component for a single Gaussian and two for separated clusters") {
  Rng rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix X(400, 1), Y(400, 1);
  for (int i = 0; i < 400; ++i) {
    X(i, 0) = n(rng);
    Y(i, 0) = 0.5 * X(i, 0) + n(rng);
  }
  BgmrOptions opt;
  opt.max_components = 5;
  CHECK(BgmrModel::Fit(X, Y, opt).components() == 1);

  for (int i = 0; i < 400; ++i) {
    const double c = i < 200 ? 0.0 : 10.0;
    X(i, 0) = c + n(rng);
    Y(i, 0) = c + n(rng);
  }
  const BgmrModel two = BgmrModel::Fit(X, Y, opt);
  CHECK(two.components() == 2);
  double total = 0.0;
  for (int k = 0; k < two.components(); ++k) total += two.component(k).weight;
  CHECK(std::abs(total - 1.0) <= 1e-10);
  CHECK_THROWS_AS(BgmrModel::Fit(Col({0.0}), Col({0.0})), InputError);
}

TEST_CASE("BGMR picks a mode on bimodal data while GPR averages") {
  Rng rng(5);
  Matrix X, Y;
  BimodalSet(400, rng, X, Y);
  const BgmrModel bgmr = BgmrModel::Fit(X, Y);
  REQUIRE(bgmr.components() >= 2);
  const GprModel gpr = GprModel::Fit(X, Y, GprHyper::Defaults(X, Y));
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  int near_mode = 0;
  const int queries = 200;
  for (int q = 0; q < queries; ++q) {
    const Vector x = V({u(rng)});
    const double y = bgmr.Predict(x).y[0];
    CHECK_FALSE((y > -0.5 && y < 0.5));
    near_mode += std::min(std::abs(y - 1.0), std::abs(y + 1.0)) <= 0.1;
    CHECK(std::abs(gpr.Predict(x).y[0]) <= 0.1);
  }
  CHECK(near_mode >= 95 * queries / 100);
}

TEST_CASE("BGMR responsibilities and mode lists are consistent") {
  Rng rng(6);
  Matrix X, Y;
  BimodalSet(300, rng, X, Y);
  const BgmrModel m = BgmrModel::Fit(X, Y);
  for (int q = 0; q < 50; ++q) {
    const Vector x = RandomMatrix(1, 1, rng, -3.0, 3.0);
    const Vector r = m.Responsibilities(x);
    CHECK((r.array() >= 0.0).all());
    CHECK(std::abs(r.sum() - 1.0) <= 1e-10);
    const auto modes = m.PredictModes(x, 100);
    CHECK(static_cast<int>(modes.size()) == m.components());
    double total = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      total += modes[i].mode_probability;
      if (i > 0) CHECK(modes[i].mode_probability <= modes[i - 1].mode_probability);
    }
    CHECK(total <= 1.0 + 1e-10);
    CHECK(modes.front().y == m.Predict(x).y);
    CHECK(m.PredictModes(x, 1).size() == 1);
  }
}

TEST_CASE("single-component BGMR reduces to Gaussian conditioning") {
  BgmrComponent c;
  c.weight = 1.0;
  c.mean = V({1.0, -1.0, 2.0});
  c.scale = Matrix::Identity(3, 3);
  c.scale << 2.0, 0.3, 0.5,
             0.3, 1.0, -0.2,
             0.5, -0.2, 1.5;
  c.dof = 7.0;
  const BgmrModel m = BgmrModel::FromComponents({c}, 2);
  const Vector x = V({0.2, 0.7});
  const Matrix sxx = c.scale.topLeftCorner(2, 2), syx = c.scale.bottomLeftCorner(1, 2);
  const Vector expected = c.mean.tail(1) + syx * sxx.inverse() * (x - c.mean.head(2));
  CHECK(std::abs(m.Predict(x).y[0] - expected[0]) <= 1e-12);
  CHECK(m.Predict(x).mode_probability == doctest::Approx(1.0));
}

TEST_CASE("equal responsibilities resolve to the lower component index") {
  BgmrComponent a, b;
  a.weight = b.weight = 0.5;
  a.mean = V({-1.0, 5.0});
  b.mean = V({1.0, -5.0});
  a.scale = b.scale = Matrix::Identity(2, 2);
  a.dof = b.dof = 10.0;
  const BgmrModel m = BgmrModel::FromComponents({a, b}, 1);
  CHECK(m.Predict(V({0.0})).y[0] == 5.0);
  const BgmrModel swapped = BgmrModel::FromComponents({b, a}, 1);
  CHECK(swapped.Predict(V({0.0})).y[0] == -5.0);
}

TEST_CASE("GPR and BGMR fit a noisy sine") {
  Rng rng(7);
  const double sigma = 0.05;
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  std::normal_distribution<double> noise(0.0, sigma);
  Matrix X(300, 1), Y(300, 1);
  for (int i = 0; i < 300; ++i) {
    X(i, 0) = u(rng);
    Y(i, 0) = std::sin(X(i, 0)) + noise(rng);
  }
  const GprModel gpr = GprModel::Fit(X, Y, {0.8, 0.5, sigma * sigma});
  const BgmrModel bgmr = BgmrModel::Fit(X, Y);
  double se_gpr = 0.0, se_bgmr = 0.0;
  const int n = 200;
  for (int q = 0; q < n; ++q) {
    const double x = 0.2 + (2.0 * kPi - 0.4) * q / (n - 1);
    const double y = std::sin(x) + noise(rng);
    se_gpr += std::pow(gpr.Predict(V({x})).y[0] - y, 2);
    se_bgmr += std::pow(bgmr.Predict(V({x})).y[0] - y, 2);
  }
  CHECK(std::sqrt(se_gpr / n) <= 3.0 * sigma);
  CHECK(std::sqrt(se_bgmr / n) <= 3.0 * sigma);
}

TEST_CASE("every regressor round-trips through its container") {
  Rng rng(8);
  Matrix X, Y;
  BimodalSet(120, rng, X, Y);
  const std::vector<RegressorPtr> models = {
      std::make_shared<KnnModel>(KnnModel::Fit(X, Y, {3, true})),
      std::make_shared<GprModel>(GprModel::Fit(X, Y, GprHyper::Defaults(X, Y))),
      std::make_shared<BgmrModel>(BgmrModel::Fit(X, Y))};
  for (const auto& m : models) {
    const RegressorPtr back = RegressorFromContainer(m->ToContainer());
    CHECK(back->kind() == m->kind());
    for (int q = 0; q < 10; ++q) {
      const Vector x = RandomMatrix(1, 1, rng);
      CHECK(back->Predict(x).y == m->Predict(x).y);
    }
  }
}

TEST_CASE("datasets validate shapes and take prefixes") {
  Dataset d;
  d.X = Matrix::Zero(3, 2);
  d.Y = Matrix::Zero(2, 4);
  CHECK_THROWS_AS(d.Validate(), InputError);
  d.Y = Matrix::Zero(3, 4);
  d.Y(1, 1) = std::nan("");
  CHECK_THROWS_AS(d.Validate(), InputError);
  d.Y(1, 1) = 0.0;
  d.X(2, 0) = 7.0;
  const Dataset head = d.Head(2);
  CHECK(head.size() == 2);
  CHECK(head.X == d.X.topRows(2));
  CHECK(DatasetFromContainer(DatasetToContainer(d)).X == d.X);
}
