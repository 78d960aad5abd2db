#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "barankin/bound.hpp"
#include "barankin/mc.hpp"
#include "barankin/rng.hpp"

using namespace barankin;

namespace {
const Tolerance kTol;
const double kE = std::exp(1.0);

mc::McConfig quick(std::int64_t samples, std::uint64_t seed) {
  mc::McConfig cfg;
  cfg.samples = samples;
  cfg.seed = seed;
  cfg.batches = 40;
  return cfg;
}
}  // namespace

TEST_CASE("McConfig validation") {
  mc::McConfig bad = quick(1000, 1);
  bad.batches = 7;  // 1000 % 7 != 0
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.batches = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_NOTHROW(quick(1000, 1).validate());
}

TEST_CASE("empirical_moment examples") {
  GaussianMeanModel g(1, 1.0, 0.0);
  const auto m11 = mc::empirical_moment(g, ParameterPoint(1.0),
                                        ParameterPoint(1.0), quick(400000, 3));
  CHECK(std::abs(m11.scalar() - kE) <= 4.0 * m11.scalar_err());

  const auto anchor = mc::empirical_moment(g, g.theta_true(),
                                           ParameterPoint(0.8), quick(100000, 4));
  CHECK(std::abs(anchor.scalar() - 1.0) <= 4.0 * anchor.scalar_err());

  BernoulliModel b(1, 0.5);
  const auto bm = mc::empirical_moment(b, ParameterPoint(0.75),
                                       ParameterPoint(0.75), quick(100000, 5));
  CHECK(std::abs(bm.scalar() - 1.25) <= 4.0 * bm.scalar_err());
}

TEST_CASE("empirical_moment agrees with exact moments on random pairs") {
  const BernoulliModel bern(2, 0.4);
  const GaussianMeanModel gauss(3, 1.0, 0.25);
  const GaussianMeanVectorModel gvec(2, 2, Eigen::Vector2d(1.0, 0.5),
                                     Eigen::Vector2d(0.0, 1.0));
  const ExponentialRateModel expo(1, 1.0);
  rng::Stream rs(13, 0);

  auto draw = [&rs](const Model& m) {
    Eigen::VectorXd c(m.param_dim());
    if (m.name() == "bernoulli")
      c[0] = 0.2 + 0.6 * rs.uniform();
    else if (m.name() == "exponential_rate")
      c[0] = m.theta_true()[0] * (0.7 + 0.8 * rs.uniform());
    else
      for (Eigen::Index j = 0; j < c.size(); ++j)
        c[j] = m.theta_true()[j] + 0.6 * (2.0 * rs.uniform() - 1.0);
    return ParameterPoint(c);
  };

  int trial = 0;
  for (const Model* m :
       std::initializer_list<const Model*>{&bern, &gauss, &gvec, &expo}) {
    for (int i = 0; i < 13; ++i, ++trial) {
      const ParameterPoint t1 = draw(*m);
      const ParameterPoint t2 = draw(*m);
      const double exact = m->moment(t1, t2);
      const auto est =
          mc::empirical_moment(*m, t1, t2, quick(40000, 600 + trial));
      CHECK(std::abs(est.scalar() - exact) <= 4.0 * est.scalar_err() + 1e-12);
    }
  }
}

TEST_CASE("empirical_bias examples") {
  auto g = std::make_shared<GaussianMeanModel>(1, 1.0, 0.0);
  const SampleMeanEstimator mean_est(g);
  const auto unbiased =
      mc::empirical_bias(mean_est, *g, ParameterPoint(0.7), quick(100000, 8));
  CHECK(std::abs(unbiased.scalar()) <= 4.0 * unbiased.scalar_err());

  const MomentMatrices mm =
      compute_B(*g, TestPointSet::scalars({0.0, 1.0}), MomentMethod::kClosedForm);
  const SpanEstimator psi =
      construct_estimator(g, mm, Eigen::MatrixXd::Identity(2, 2), kTol);

  const auto biased =
      mc::empirical_bias(psi, *g, ParameterPoint(0.5), quick(100000, 9));
  const double want = (std::exp(0.5) - 1.0) / (kE - 1.0) - 0.5;
  CHECK(std::abs(biased.scalar() - want) <= 4.0 * biased.scalar_err());
  CHECK(want == doctest::Approx(-0.12246).epsilon(1e-4));

  // unbiased at the test point itself
  const auto at_one =
      mc::empirical_bias(psi, *g, ParameterPoint(1.0), quick(200000, 10));
  CHECK(std::abs(at_one.scalar()) <= 4.0 * at_one.scalar_err());
}

TEST_CASE("empirical_cov examples") {
  auto g5 = std::make_shared<GaussianMeanModel>(5, 1.0, 0.0);
  const SampleMeanEstimator mean_est(g5);
  const auto cov = mc::empirical_cov(mean_est, *g5, quick(100000, 11));
  CHECK(std::abs(cov.scalar() - 0.2) <= 4.0 * cov.scalar_err());

  // constant estimator has exactly zero covariance
  auto g = std::make_shared<GaussianMeanModel>(1, 1.0, 0.0);
  const MomentMatrices anchor =
      compute_B(*g, TestPointSet::scalars({0.0}), MomentMethod::kClosedForm);
  const SpanEstimator constant =
      construct_estimator(g, anchor, Eigen::MatrixXd::Identity(1, 1), kTol);
  const auto zero = mc::empirical_cov(constant, *g, quick(10000, 12));
  CHECK(zero.scalar() == 0.0);

  // psi* for the Bernoulli identity target is X itself
  auto b = std::make_shared<BernoulliModel>(1, 0.5);
  const MomentMatrices bm = compute_B(
      *b, TestPointSet::scalars({0.5, 0.75}), MomentMethod::kEnumeration);
  const SpanEstimator bpsi =
      construct_estimator(b, bm, Eigen::MatrixXd::Identity(2, 2), kTol);
  const auto bcov = mc::empirical_cov(bpsi, *b, quick(100000, 13));
  CHECK(std::abs(bcov.scalar() - 0.25) <= 4.0 * bcov.scalar_err());
}

TEST_CASE("sampling-noise dominance over random test sets") {
  auto g5 = std::make_shared<GaussianMeanModel>(5, 1.0, 0.0);
  const SampleMeanEstimator mean_est(g5);
  const auto cov = mc::empirical_cov(mean_est, *g5, quick(100000, 14));

  rng::Stream rs(15, 0);
  int violations = 0;
  for (int trial = 0; trial < 50; ++trial) {
    TestPointSet tau;
    tau.points.emplace_back(0.0);
    const int extra = 1 + static_cast<int>(rs.uniform() * 3);
    for (int i = 0; i < extra; ++i)
      tau.points.emplace_back(std::round((2.0 * rs.uniform() - 1.0) * 20.0) /
                              20.0);
    const auto [kept, reduced] = deflate_dependent(
        compute_B(*g5, tau, MomentMethod::kClosedForm), kTol);
    const BoundMatrix v = bound_V(reduced, kTol);
    const double min_eig = cov.scalar() - v.W(0, 0);
    if (min_eig < -3.0 * cov.scalar_err()) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("gram_convergence_experiment decays like one over root N") {
  GaussianMeanModel g(1, 1.0, 0.0);
  const std::vector<ParameterPoint> tau{ParameterPoint(0.0), ParameterPoint(1.0)};
  // the distance is dominated by the heavy-tailed pi(1)^2 entry, so average
  // a few replicates per rung before asserting decay
  const std::vector<std::int64_t> ladder{1000, 10000, 100000};
  std::vector<double> avg(ladder.size(), 0.0);
  const int reps = 4;
  for (int r = 0; r < reps; ++r) {
    const auto rungs =
        mc::gram_convergence_experiment(g, tau, ladder, 160 + r, 40);
    for (std::size_t i = 0; i < rungs.size(); ++i) avg[i] += rungs[i].second;
  }
  for (double& d : avg) d /= reps;
  CHECK(avg[0] > avg[1]);
  CHECK(avg[1] > avg[2]);
  CHECK(avg[0] / avg[2] > 3.0);  // ideal CLT ratio is 10

  // single rung: just a distance, no monotonicity claim
  const auto one = mc::gram_convergence_experiment(g, tau, {1000}, 17, 40);
  CHECK(one.size() == 1);
  CHECK(one[0].second > 0.0);
}

TEST_CASE("exact_unbiased_polytope examples") {
  // two constraints, two unknowns: the unique solution is psi(x) = x
  BernoulliModel b(1, 0.5);
  const auto p = mc::exact_unbiased_polytope(
      b, {ParameterPoint(0.5), ParameterPoint(0.75)});
  REQUIRE(p.feasible);
  CHECK(p.null_dim() == 0);
  CHECK(p.particular(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.particular(0, 1) == doctest::Approx(1.0).epsilon(1e-12));

  // incompatible square target: infeasible
  BernoulliModel sq(1, 0.5, ScalarTarget::kSquare);
  const auto infeasible = mc::exact_unbiased_polytope(
      sq, {ParameterPoint(0.25), ParameterPoint(0.5), ParameterPoint(0.75)});
  CHECK_FALSE(infeasible.feasible);

  // anchored-only constraint: particular is the constant, s-1 homogeneous dims
  const auto anchored = mc::exact_unbiased_polytope(b, {ParameterPoint(0.5)});
  REQUIRE(anchored.feasible);
  CHECK(anchored.null_dim() == 1);
  CHECK(anchored.particular(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(anchored.particular(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("polytope members dominate the bound; the particular one attains it") {
  BernoulliModel b(2, 0.5);
  rng::Stream rs(19, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ParameterPoint> tau{ParameterPoint(0.5)};
    const int extra = 1 + static_cast<int>(rs.uniform() * 3);
    for (int i = 0; i < extra; ++i)
      tau.emplace_back(0.1 + 0.8 * rs.uniform());

    const auto poly = mc::exact_unbiased_polytope(b, tau);
    REQUIRE(poly.feasible);

    const auto [kept, reduced] = deflate_dependent(
        compute_B(b, TestPointSet{tau}, MomentMethod::kEnumeration), kTol);
    const BoundMatrix v = bound_V(reduced, kTol);

    // the minimum-covariance member attains the deflated bound exactly
    const SymMatrix min_cov = mc::exact_covariance(b, poly.particular);
    CHECK((min_cov.mat() - v.W.mat()).norm() <=
          1e-10 * (1.0 + v.W.frobenius()));

    // every member dominates the bound
    for (int member = 0; member < 5; ++member) {
      Eigen::MatrixXd coeff(1, poly.null_dim());
      for (Eigen::Index c = 0; c < coeff.cols(); ++c)
        coeff(0, c) = 2.0 * rs.uniform() - 1.0;
      const SymMatrix cov =
          mc::exact_covariance(b, poly.member_values(coeff));
      CHECK(lambda_min(SymMatrix(cov.mat() - v.W.mat())) >= -1e-10);
      // members really are unbiased at every tau point
      for (const ParameterPoint& t : tau) {
        const Eigen::VectorXd e =
            mc::exact_expectation(b, poly.member_values(coeff), t);
        CHECK((e - b.target(t)).cwiseAbs().maxCoeff() <= 1e-11);
      }
    }
  }
}

TEST_CASE("psd_limit_check accepts a Monte Carlo bound sequence") {
  GaussianMeanModel g(1, 1.0, 0.0);
  const TestPointSet tau = TestPointSet::scalars({0.0, 1.0});
  std::vector<SymMatrix> seq;
  for (std::int64_t n : {10000, 40000, 160000}) {
    const MomentMatrices mm =
        compute_B(g, tau, MomentMethod::kMonteCarlo, n, 23, 40);
    seq.push_back(bound_V(mm, kTol).W);
  }
  CHECK(psd_limit_check(seq, kTol));
}
