#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "barankin/psd.hpp"
#include "test_util.hpp"

using namespace barankin;
using test_util::random_matrix;
using test_util::random_snnd;
using test_util::random_spd;

namespace {
const Tolerance kTol;

Eigen::MatrixXd diag2(double a, double b) {
  Eigen::Vector2d d(a, b);
  return Eigen::MatrixXd(d.asDiagonal());
}

// single-test-point scalar bound for the unit-variance Gaussian mean family
double gaussian_point_bound(double t) { return t * t / (std::exp(t * t) - 1.0); }
}  // namespace

TEST_CASE("SymMatrix symmetrizes and validates") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0 + 1e-12, 2.0, 3.0;
  const SymMatrix s(m);
  CHECK(s(0, 1) == s(1, 0));

  m(0, 1) = 2.1;  // gross asymmetry
  CHECK_THROWS_AS(SymMatrix{m}, InvalidInputError);

  m(0, 1) = std::nan("");
  CHECK_THROWS_AS(SymMatrix{m}, InvalidInputError);

  CHECK_THROWS_AS(SymMatrix{Eigen::MatrixXd::Zero(2, 3)}, InvalidInputError);
}

TEST_CASE("is_snnd examples") {
  CHECK(is_snnd(SymMatrix::Identity(3), kTol));
  CHECK_FALSE(is_snnd(SymMatrix(diag2(1.0, -1e-3)), kTol));

  // Gram matrix of the Bernoulli likelihood ratios at (0.5, 0.75), built by
  // exact enumeration over {0, 1}: pi(0.5) = (1, 1), pi(0.75) = (0.5, 1.5).
  Eigen::MatrixXd b(2, 2);
  const double p0 = 0.5, p1 = 0.5;
  b(0, 0) = p0 * 1.0 * 1.0 + p1 * 1.0 * 1.0;
  b(0, 1) = p0 * 1.0 * 0.5 + p1 * 1.0 * 1.5;
  b(1, 0) = b(0, 1);
  b(1, 1) = p0 * 0.25 + p1 * 2.25;
  CHECK(b(1, 1) == 1.25);
  CHECK(is_snnd(SymMatrix(b), kTol));
}

TEST_CASE("loewner_compare examples") {
  const auto ge = loewner_compare(SymMatrix::Identity(2), SymMatrix::Zero(2), kTol);
  CHECK(ge.order == LoewnerOrder::kGreaterEqual);

  const auto inc =
      loewner_compare(SymMatrix(diag2(1, 0)), SymMatrix(diag2(0, 1)), kTol);
  CHECK(inc.order == LoewnerOrder::kIncomparable);
  CHECK(inc.lambda_min == doctest::Approx(-1.0));
  CHECK(inc.lambda_max == doctest::Approx(1.0));

  // scalar bounds at two Gaussian test points
  const double w_half = gaussian_point_bound(0.5);
  const double w_one = gaussian_point_bound(1.0);
  CHECK(w_half == doctest::Approx(0.8802).epsilon(1e-3));
  CHECK(w_one == doctest::Approx(0.58198).epsilon(1e-4));
  const auto cmp = loewner_compare(
      SymMatrix(Eigen::MatrixXd::Constant(1, 1, w_half)),
      SymMatrix(Eigen::MatrixXd::Constant(1, 1, w_one)), kTol);
  CHECK(cmp.order == LoewnerOrder::kGreaterEqual);

  CHECK_THROWS_AS(loewner_compare(SymMatrix::Identity(2), SymMatrix::Identity(3), kTol),
                  InvalidInputError);
}

TEST_CASE("lambda_max examples") {
  Eigen::Vector3d d(3, 1, 2);
  CHECK(lambda_max(SymMatrix::FromDiagonal(d)) == doctest::Approx(3.0));

  Eigen::MatrixXd m(2, 2);
  m << 2, 1, 1, 2;
  CHECK(lambda_max(SymMatrix(m)) == doctest::Approx(3.0).epsilon(1e-12));

  // characteristic-polynomial oracle for [[1,1],[1,e]]
  const double e = std::exp(1.0);
  Eigen::MatrixXd b(2, 2);
  b << 1, 1, 1, e;
  const double tr = 1 + e, det = e - 1;
  const double oracle = 0.5 * (tr + std::sqrt(tr * tr - 4 * det));
  CHECK(lambda_max(SymMatrix(b)) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("k_identity_dominates examples and equivalence") {
  CHECK(k_identity_dominates(1.0, SymMatrix::Identity(4), kTol));
  CHECK_FALSE(k_identity_dominates(0.9, SymMatrix::Identity(4), kTol));
  CHECK_THROWS_AS(k_identity_dominates(1.0, SymMatrix(diag2(1, -1)), kTol),
                  InvalidInputError);

  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const SymMatrix x(random_snnd(3, 4, seed));
    const double lmax = lambda_max(x);
    CHECK(k_identity_dominates(lmax + 1e-6, x, kTol));
    // agreement with the direct Loewner comparison
    const auto cmp = loewner_compare(
        SymMatrix(Eigen::MatrixXd::Identity(3, 3) * (lmax + 1e-6)), x, kTol);
    CHECK((cmp.order == LoewnerOrder::kGreaterEqual ||
           cmp.order == LoewnerOrder::kEqual));
    // equivalence with the eigenvalue test both ways
    for (double k : {lmax - 0.1, lmax + 0.1}) {
      const bool via_op = k_identity_dominates(k, x, kTol);
      const bool via_snnd = is_snnd(
          SymMatrix(k * Eigen::MatrixXd::Identity(3, 3) - x.mat()), kTol);
      CHECK(via_op == via_snnd);
    }
  }
}

TEST_CASE("weighted_cauchy_schwarz examples") {
  // X = Y square full rank: equality with Lambda = I
  const Eigen::MatrixXd y = random_matrix(3, 3, 7);
  const SymMatrix h(random_spd(3, 8));
  const auto eq = weighted_cauchy_schwarz(y, y, h, kTol);
  CHECK(eq.equality);
  CHECK(eq.gap_is_snnd);
  CHECK((eq.lhs.mat() - eq.rhs.mat()).norm() <= 1e-9 * (1 + eq.lhs.frobenius()));

  // orthogonal rows
  Eigen::MatrixXd x1(1, 2), y1(1, 2);
  x1 << 1, 0;
  y1 << 0, 1;
  const auto orth = weighted_cauchy_schwarz(x1, y1, SymMatrix::Identity(2), kTol);
  CHECK(orth.rhs.mat().norm() == doctest::Approx(0.0));
  CHECK(orth.lhs(0, 0) == doctest::Approx(1.0));
  CHECK(orth.gap_is_snnd);
  CHECK_FALSE(orth.equality);

  // singular Y H Y^T
  Eigen::MatrixXd ysing(2, 2);
  ysing << 1, 0, 2, 0;
  CHECK_THROWS_AS(
      weighted_cauchy_schwarz(x1, ysing, SymMatrix::Identity(2), kTol),
      RankDeficiencyError);
}

TEST_CASE("weighted_cauchy_schwarz gap is s.n.n.d. on random instances") {
  barankin::rng::Stream rs(99, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rs.uniform() * 4);
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rs.uniform() * 3);
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rs.uniform() * m);
    const Eigen::MatrixXd x = random_matrix(n, m, 1000 + trial);
    const Eigen::MatrixXd y = random_matrix(p, m, 2000 + trial);
    const SymMatrix h(random_spd(m, 3000 + trial));
    const auto r = weighted_cauchy_schwarz(x, y, h, kTol);
    CHECK(r.gap_is_snnd);
    // brute-force eigenvalue oracle on the gap
    const double min_eig = lambda_min(SymMatrix(r.lhs.mat() - r.rhs.mat()));
    CHECK(min_eig >= -1e-9 * (1 + r.lhs.frobenius()));
    // generic X is not in the row space of Y unless Y's rows span everything
    if (p < m) CHECK_FALSE(r.equality);
  }
}

TEST_CASE("weighted_cauchy_schwarz equality triggers exactly on X = Lambda Y") {
  barankin::rng::Stream rs(77, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = 3 + static_cast<Eigen::Index>(rs.uniform() * 3);
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rs.uniform() * (m - 1));
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rs.uniform() * 3);
    const Eigen::MatrixXd y = random_matrix(p, m, 4000 + trial);
    const Eigen::MatrixXd lambda = random_matrix(n, p, 5000 + trial);
    const SymMatrix h(random_spd(m, 6000 + trial));
    const auto r = weighted_cauchy_schwarz(lambda * y, y, h, kTol);
    CHECK(r.equality);
    CHECK((r.lhs.mat() - r.rhs.mat()).norm() <=
          10 * kTol.psd_eps * (1 + r.lhs.frobenius()));
  }
}

TEST_CASE("rayleigh_reduction examples") {
  // A = identity: V = W
  const Eigen::MatrixXd g = random_matrix(2, 4, 17);
  const SymMatrix b(random_spd(4, 18));
  const auto eq = rayleigh_reduction(g, b, Eigen::MatrixXd::Identity(4, 4), kTol);
  CHECK(eq.dominance.order == LoewnerOrder::kEqual);

  // selector row on a diagonal B: W keeps one coordinate's contribution
  Eigen::VectorXd d(3);
  d << 2.0, 0.5, 1.25;
  Eigen::MatrixXd g3 = random_matrix(2, 3, 19);
  Eigen::MatrixXd sel(1, 3);
  sel << 1, 0, 0;
  const auto r = rayleigh_reduction(g3, SymMatrix::FromDiagonal(d), sel, kTol);
  // hand expansion: V = sum_i g_i g_i^T / d_i, W = g_0 g_0^T / d_0
  Eigen::MatrixXd v_hand = Eigen::MatrixXd::Zero(2, 2);
  for (int i = 0; i < 3; ++i)
    v_hand += g3.col(i) * g3.col(i).transpose() / d[i];
  const Eigen::MatrixXd w_hand = g3.col(0) * g3.col(0).transpose() / d[0];
  CHECK((r.v.mat() - v_hand).norm() <= 1e-12 * (1 + v_hand.norm()));
  CHECK((r.w.mat() - w_hand).norm() <= 1e-12 * (1 + w_hand.norm()));
  CHECK((r.dominance.order == LoewnerOrder::kGreaterEqual ||
         r.dominance.order == LoewnerOrder::kEqual));
  CHECK(lambda_min(SymMatrix(r.v.mat() - r.w.mat())) >=
        -1e-9 * (1 + r.v.frobenius()));

  // singular A B A^T
  Eigen::MatrixXd azero = Eigen::MatrixXd::Zero(1, 3);
  CHECK_THROWS_AS(rayleigh_reduction(g3, SymMatrix::FromDiagonal(d), azero, kTol),
                  RankDeficiencyError);
}

TEST_CASE("rayleigh_reduction dominance on random instances") {
  barankin::rng::Stream rs(55, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rs.uniform() * 4);
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rs.uniform() * 3);
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rs.uniform() * m);
    const Eigen::MatrixXd g = random_matrix(n, m, 7000 + trial);
    const SymMatrix b(random_spd(m, 8000 + trial));
    const Eigen::MatrixXd a = random_matrix(p, m, 9000 + trial);
    const auto r = rayleigh_reduction(g, b, a, kTol);
    CHECK((r.dominance.order == LoewnerOrder::kGreaterEqual ||
           r.dominance.order == LoewnerOrder::kEqual));
  }
}

TEST_CASE("psd_limit_check") {
  std::vector<SymMatrix> constant(5, SymMatrix::Identity(2));
  CHECK(psd_limit_check(constant, kTol));

  std::vector<SymMatrix> seq;
  for (int n = 1; n <= 64; n *= 2) seq.push_back(SymMatrix(diag2(1.0 / n, 1.0)));
  seq.push_back(SymMatrix(diag2(0.0, 1.0)));
  CHECK(psd_limit_check(seq, kTol));

  CHECK_THROWS_AS(psd_limit_check({}, kTol), InvalidInputError);
  std::vector<SymMatrix> mixed{SymMatrix::Identity(2), SymMatrix::Identity(3)};
  CHECK_THROWS_AS(psd_limit_check(mixed, kTol), InvalidInputError);
}

TEST_CASE("Loewner transitivity and antisymmetry on random chains") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Eigen::MatrixXd c = random_snnd(3, 5, seed * 3 + 1);
    const Eigen::MatrixXd b = c + random_snnd(3, 5, seed * 3 + 2);
    const Eigen::MatrixXd a = b + random_snnd(3, 5, seed * 3 + 3);
    const SymMatrix sa(a), sb(b), sc(c);
    CHECK(loewner_compare(sa, sb, kTol).order == LoewnerOrder::kGreaterEqual);
    CHECK(loewner_compare(sb, sc, kTol).order == LoewnerOrder::kGreaterEqual);
    CHECK(loewner_compare(sa, sc, kTol).order == LoewnerOrder::kGreaterEqual);
    CHECK(loewner_compare(sb, sa, kTol).order == LoewnerOrder::kLessEqual);

    // antisymmetry: mutual domination collapses to equality
    const SymMatrix almost(a + 1e-14 * Eigen::MatrixXd::Identity(3, 3));
    const auto ab = loewner_compare(sa, almost, kTol);
    const auto ba = loewner_compare(almost, sa, kTol);
    CHECK(ab.order == LoewnerOrder::kEqual);
    CHECK(ba.order == LoewnerOrder::kEqual);
    CHECK(loewner_compare(sa, sa, kTol).order == LoewnerOrder::kEqual);
  }
}
