#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "redress/gradcheck.hpp"
#include "redress/matrix.hpp"
#include "redress/rng.hpp"

using namespace redress;

namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, RngStream& rng, double scale = 1.0) {
  DenseMatrix m(r, c);
  for (double& v : m.values) v = scale * (2.0 * rng.uniform() - 1.0);
  return m;
}

// Naive triple-loop product, the oracle for matmul.
DenseMatrix matmul_oracle(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += a.at(i, k) * b.at(k, j);
      c.at(i, j) = s;
    }
  return c;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  REQUIRE(a.same_shape(b));
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    m = std::max(m, std::fabs(a.values[i] - b.values[i]));
  }
  return m;
}

}  // namespace

TEST_CASE("matmul identity and hand arithmetic") {
  DenseMatrix a(2, 2);
  a.values = {1, 2, 3, 4};
  DenseMatrix r = matmul(DenseMatrix::identity(2), a);
  CHECK(r.values == std::vector<double>{1, 2, 3, 4});

  DenseMatrix row(1, 2), col(2, 1);
  row.values = {1, 2};
  col.values = {3, 4};
  CHECK(matmul(row, col).values == std::vector<double>{11});
}

TEST_CASE("matmul against triple-loop oracle") {
  RngStream rng(11);
  DenseMatrix a = random_matrix(5, 4, rng), b = random_matrix(4, 3, rng);
  CHECK(max_abs_diff(matmul(a, b), matmul_oracle(a, b)) <= 1e-12);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  DenseMatrix a(2, 3), b(2, 2);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("2x3"), DimensionError);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("2x2"), DimensionError);
}

TEST_CASE("matmul associativity on random conforming triples") {
  RngStream rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n1 = 1 + rng.below(6), n2 = 1 + rng.below(6), n3 = 1 + rng.below(6),
                      n4 = 1 + rng.below(6);
    DenseMatrix a = random_matrix(n1, n2, rng), b = random_matrix(n2, n3, rng),
                c = random_matrix(n3, n4, rng);
    DenseMatrix lhs = matmul(matmul(a, b), c), rhs = matmul(a, matmul(b, c));
    double scale = 0.0;
    for (double v : rhs.values) scale = std::max(scale, std::fabs(v));
    CHECK(max_abs_diff(lhs, rhs) <= 1e-9 * std::max(1.0, scale));
  }
}

TEST_CASE("matmul variants match the plain product") {
  RngStream rng(13);
  DenseMatrix a = random_matrix(4, 6, rng), b = random_matrix(4, 3, rng);
  CHECK(max_abs_diff(matmul_at_b(a, b), matmul(transpose(a), b)) <= 1e-12);
  DenseMatrix c = random_matrix(5, 6, rng);
  CHECK(max_abs_diff(matmul_a_bt(a, c), matmul(a, transpose(c))) <= 1e-12);
  DenseMatrix acc(4, 3);
  acc.fill(1.0);
  DenseMatrix d = random_matrix(6, 3, rng);
  matmul_acc(a, d, acc);
  DenseMatrix expect = matmul(a, d);
  for (double& v : expect.values) v += 1.0;
  CHECK(max_abs_diff(acc, expect) <= 1e-12);
}

TEST_CASE("relu forward and backward conventions") {
  DenseMatrix x(1, 3);
  x.values = {-1, 0, 2};
  CHECK(relu(x).values == std::vector<double>{0, 0, 2});
  DenseMatrix up(1, 3);
  up.values = {5, 5, 5};
  CHECK(relu_backward(x, up).values == std::vector<double>{0, 0, 5});
}

TEST_CASE("relu finite-difference away from the kink") {
  RngStream rng(14);
  DenseMatrix x = random_matrix(3, 3, rng);
  for (double& v : x.values) {
    if (std::fabs(v) < 0.05) v = 0.1;  // keep clear of the kink
  }
  const double h = 1e-6;
  DenseMatrix up(3, 3);
  up.fill(1.0);
  DenseMatrix analytic = relu_backward(x, up);
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    DenseMatrix xp = x, xm = x;
    xp.values[i] += h;
    xm.values[i] -= h;
    double sp = 0.0, sm = 0.0;
    for (double v : relu(xp).values) sp += v;
    for (double v : relu(xm).values) sm += v;
    const double central = (sp - sm) / (2.0 * h);
    CHECK(std::fabs(analytic.values[i] - central) <= 1e-6 * std::max(1.0, std::fabs(central)));
  }
}

TEST_CASE("sigmoid basics, antisymmetry and stability") {
  CHECK(sigmoid(0.0) == 0.5);
  for (double x : {-3.0, 0.7, 12.0}) {
    CHECK(sigmoid(x) + sigmoid(-x) == doctest::Approx(1.0).epsilon(1e-15));
  }
  const double tiny = sigmoid(-1000.0);  // may underflow to 0, must not NaN
  CHECK(tiny >= 0.0);
  CHECK(tiny <= 1e-300);
  CHECK(std::isfinite(tiny));
  CHECK(sigmoid(-40.0) > 0.0);
  CHECK(sigmoid(1000.0) == 1.0);
}

TEST_CASE("mean_rows trivial groups and oracle") {
  DenseMatrix x(4, 2);
  x.values = {1, 1, 5, 7, 3, 3, 9, 9};
  SUBCASE("single-row group is identity") {
    DenseMatrix m = mean_rows(x, {{1}});
    CHECK(m.values == std::vector<double>{5, 7});
  }
  SUBCASE("hand mean") {
    DenseMatrix xx(2, 2);
    xx.values = {1, 1, 3, 3};
    CHECK(mean_rows(xx, {{0, 1}}).values == std::vector<double>{2, 2});
  }
  SUBCASE("empty group is a contract violation") {
    CHECK_THROWS_AS(mean_rows(x, {{}}), ContractError);
  }
  SUBCASE("random groups vs naive oracle") {
    RngStream rng(15);
    DenseMatrix big = random_matrix(20, 5, rng);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::vector<std::size_t>> groups(1);
      const std::size_t gsize = 1 + rng.below(8);
      for (std::size_t i = 0; i < gsize; ++i) groups[0].push_back(rng.below(20));
      DenseMatrix got = mean_rows(big, groups);
      for (std::size_t j = 0; j < 5; ++j) {
        double s = 0.0;
        for (std::size_t r : groups[0]) s += big.at(r, j);
        CHECK(std::fabs(got.at(0, j) - s / static_cast<double>(gsize)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("finite_difference_check on a linear loss") {
  RngStream rng(16);
  ParamTensor p(random_matrix(3, 4, rng), "p");
  auto loss = [&]() {
    double s = 0.0;
    for (double v : p.value.values) s += v;
    return s;
  };
  p.grad.fill(1.0);
  CHECK(finite_difference_check(loss, {&p}, 1e-5) <= 1e-9);
}

TEST_CASE("finite_difference_check flags a corrupted gradient") {
  RngStream rng(17);
  ParamTensor p(random_matrix(2, 2, rng), "p");
  auto loss = [&]() {
    double s = 0.0;
    for (double v : p.value.values) s += v;
    return s;
  };
  p.grad.fill(2.0);  // doubled on purpose
  CHECK(finite_difference_check(loss, {&p}, 1e-5) >= 0.4);
}

TEST_CASE("finite_difference_check rejects non-finite losses") {
  ParamTensor p(DenseMatrix(1, 1), "p");
  auto loss = [&]() { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(finite_difference_check(loss, {&p}, 1e-5), NumericError);
}

TEST_CASE("operations are bitwise deterministic") {
  RngStream rng(18);
  DenseMatrix a = random_matrix(7, 5, rng), b = random_matrix(5, 6, rng);
  DenseMatrix r1 = matmul(a, b), r2 = matmul(a, b);
  CHECK(r1.values == r2.values);
}

TEST_CASE("check_finite rejects NaN and infinity") {
  DenseMatrix m(1, 2);
  m.values = {1.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(check_finite(m, "m"), NumericError);
  m.values[1] = 0.0;
  CHECK_NOTHROW(check_finite(m, "m"));
}
