#include "barankin/mc.hpp"

#include <cmath>
#include <functional>
#include <thread>

#include "barankin/kernels.hpp"
#include "barankin/rng.hpp"

namespace barankin::mc {

namespace {

void run_chunked(int threads, std::size_t n,
                 const std::function<void(std::size_t)>& work) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  const int used = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (int t = 0; t < used; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += used) work(i);
    });
  for (auto& th : pool) th.join();
}

// Batch means -> (value, std_err). Reduction runs in batch order regardless
// of which thread produced each batch.
McEstimate combine_batches(const std::vector<Eigen::MatrixXd>& batch_means,
                           std::int64_t samples) {
  const int nb = static_cast<int>(batch_means.size());
  Eigen::MatrixXd mean =
      Eigen::MatrixXd::Zero(batch_means[0].rows(), batch_means[0].cols());
  for (const Eigen::MatrixXd& b : batch_means) mean += b;
  mean /= static_cast<double>(nb);
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(mean.rows(), mean.cols());
  for (const Eigen::MatrixXd& b : batch_means)
    var += (b - mean).cwiseProduct(b - mean);
  var /= static_cast<double>(nb - 1);
  McEstimate out;
  out.value = std::move(mean);
  out.std_err = (var / static_cast<double>(nb)).cwiseSqrt();
  out.samples_used = samples;
  return out;
}

}  // namespace

std::int64_t McConfig::batch_size() const { return samples / batches; }

void McConfig::validate() const {
  if (samples < 1) throw ConfigError("mc: samples must be positive");
  if (batches < 2) throw ConfigError("mc: need at least 2 batches");
  if (samples % batches != 0)
    throw ConfigError("mc: samples must be divisible by batches");
}

McEstimate empirical_moment(const Model& model, const ParameterPoint& t1,
                            const ParameterPoint& t2, const McConfig& cfg) {
  cfg.validate();
  model.require_in_domain(t1);
  model.require_in_domain(t2);
  const std::int64_t nb = cfg.batch_size();
  const std::vector<ParameterPoint> tau{t1, t2};
  std::vector<Eigen::MatrixXd> batch_means(cfg.batches);
  run_chunked(cfg.threads, static_cast<std::size_t>(cfg.batches),
              [&](std::size_t b) {
                const SampleBatch batch =
                    model.sample(model.theta_true(), nb, cfg.seed, b);
                Eigen::MatrixXd z(nb, 2);
                model.pi_matrix(tau, batch, z);
                Eigen::MatrixXd m(1, 1);
                m(0, 0) = kernels::dot(z.col(0).data(), z.col(1).data(),
                                       static_cast<std::size_t>(nb)) /
                          static_cast<double>(nb);
                batch_means[b] = std::move(m);
              });
  return combine_batches(batch_means, cfg.samples);
}

McEstimate empirical_bias(const Estimator& est, const Model& model,
                          const ParameterPoint& theta, const McConfig& cfg) {
  cfg.validate();
  model.require_in_domain(theta);
  const std::int64_t nb = cfg.batch_size();
  const Eigen::VectorXd g = model.target(theta);
  std::vector<Eigen::MatrixXd> batch_means(cfg.batches);
  run_chunked(cfg.threads, static_cast<std::size_t>(cfg.batches),
              [&](std::size_t b) {
                const SampleBatch batch = model.sample(theta, nb, cfg.seed, b);
                const Eigen::MatrixXd vals = est.evaluate_batch(batch);
                batch_means[b] =
                    (vals.colwise().mean().transpose() - g).eval();
              });
  return combine_batches(batch_means, cfg.samples);
}

McEstimate empirical_cov(const Estimator& est, const Model& model,
                         const McConfig& cfg) {
  cfg.validate();
  const std::int64_t nb = cfg.batch_size();
  const Eigen::VectorXd g0 = model.target(model.theta_true());
  const Eigen::Index d = est.output_dim();
  std::vector<Eigen::MatrixXd> batch_means(cfg.batches);
  run_chunked(cfg.threads, static_cast<std::size_t>(cfg.batches),
              [&](std::size_t b) {
                const SampleBatch batch =
                    model.sample(model.theta_true(), nb, cfg.seed, b);
                Eigen::MatrixXd phi = est.evaluate_batch(batch);
                phi.rowwise() -= g0.transpose();
                Eigen::MatrixXd c(d, d);
                for (Eigen::Index i = 0; i < d; ++i)
                  for (Eigen::Index j = i; j < d; ++j) {
                    const double v =
                        kernels::dot(phi.col(i).data(), phi.col(j).data(),
                                     static_cast<std::size_t>(nb)) /
                        static_cast<double>(nb);
                    c(i, j) = v;
                    c(j, i) = v;
                  }
                batch_means[b] = std::move(c);
              });
  return combine_batches(batch_means, cfg.samples);
}

std::vector<std::pair<std::int64_t, double>> gram_convergence_experiment(
    const Model& model, const std::vector<ParameterPoint>& tau,
    const std::vector<std::int64_t>& ladder, std::uint64_t seed, int batches,
    int threads) {
  if (!model.has_exact_moments())
    throw ModeError("gram_convergence_experiment: exact moments required");
  const Eigen::Index m = static_cast<Eigen::Index>(tau.size());
  Eigen::MatrixXd exact(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) {
      const double v = model.moment(tau[i], tau[j]);
      exact(i, j) = v;
      exact(j, i) = v;
    }

  std::vector<std::pair<std::int64_t, double>> out;
  for (std::size_t rung = 0; rung < ladder.size(); ++rung) {
    const std::int64_t n = ladder[rung];
    const std::int64_t nb = n / batches;
    if (nb < 1) throw ConfigError("gram_convergence_experiment: ladder rung too small");
    std::vector<Eigen::MatrixXd> sums(batches);
    run_chunked(threads, static_cast<std::size_t>(batches), [&](std::size_t b) {
      const SampleBatch batch =
          model.sample(model.theta_true(), nb, seed,
                       rng::mix(rung + 1, b));
      Eigen::MatrixXd z(nb, m);
      model.pi_matrix(tau, batch, z);
      Eigen::MatrixXd s(m, m);
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i; j < m; ++j) {
          const double v = kernels::dot(z.col(i).data(), z.col(j).data(),
                                        static_cast<std::size_t>(nb));
          s(i, j) = v;
          s(j, i) = v;
        }
      sums[b] = std::move(s);
    });
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
    for (const Eigen::MatrixXd& s : sums) acc += s;
    acc /= static_cast<double>(nb * batches);
    out.emplace_back(n, (acc - exact).norm());
  }
  return out;
}

Eigen::MatrixXd UnbiasedPolytope::member_values(
    const Eigen::MatrixXd& coeff) const {
  if (coeff.rows() != particular.rows() || coeff.cols() != null_basis.cols())
    throw InvalidInputError("UnbiasedPolytope: coefficient shape mismatch");
  return particular + coeff * null_basis.transpose();
}

TabulatedEstimator UnbiasedPolytope::member(const Eigen::MatrixXd& coeff) const {
  return TabulatedEstimator(support, member_values(coeff));
}

UnbiasedPolytope exact_unbiased_polytope(
    const Model& model, const std::vector<ParameterPoint>& tau) {
  if (model.moment_mode() != MomentMethod::kEnumeration)
    throw ModeError("exact_unbiased_polytope: enumeration mode required");
  if (tau.empty()) throw InvalidInputError("exact_unbiased_polytope: empty tau");

  UnbiasedPolytope out;
  out.support = model.enumerate_support();
  const Eigen::Index s = static_cast<Eigen::Index>(out.support.size());
  const Eigen::Index m = static_cast<Eigen::Index>(tau.size());
  const Eigen::Index d = model.target_dim();

  // theta_T weights; the minimum-covariance solution is the weighted
  // least-norm solution of the unbiasedness constraints on phi = psi - g0.
  Eigen::VectorXd sqrt_w(s);
  for (Eigen::Index x = 0; x < s; ++x) {
    if (!(out.support[x].prob > 0.0))
      throw InvalidInputError(
          "exact_unbiased_polytope: zero-probability support atom under theta_T");
    sqrt_w[x] = std::sqrt(out.support[x].prob);
  }

  // Constraint rows: sum_x p_theta_i(x) phi(x) = h(theta_i), with
  // p_theta_i(x) = p_T(x) pi(theta_i; x). In y = sqrt(p_T) .* phi variables
  // the row becomes sqrt(p_T(x)) pi(theta_i; x).
  Eigen::MatrixXd c(m, s);
  Eigen::MatrixXd h(d, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index x = 0; x < s; ++x)
      c(i, x) = sqrt_w[x] * std::exp(model.log_pi(tau[i], out.support[x].x));
    h.col(i) = model.target_increment(tau[i]);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smax = svd.singularValues().size()
                          ? svd.singularValues().maxCoeff()
                          : 0.0;
  const double cutoff = 1e-12 * std::max(smax, 1.0);
  Eigen::Index rank = 0;
  while (rank < svd.singularValues().size() &&
         svd.singularValues()[rank] > cutoff)
    ++rank;

  // Feasibility: h must have no component along null(C^T).
  const Eigen::MatrixXd ut_h = svd.matrixU().transpose() * h.transpose();
  const double resid = ut_h.bottomRows(m - rank).norm();
  if (resid > 1e-10 * (1.0 + h.norm())) {
    out.feasible = false;
    return out;
  }
  out.feasible = true;

  // Minimum-norm solution in y, back to phi, then psi = phi + g0.
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(s, d);
  for (Eigen::Index r = 0; r < rank; ++r)
    y += svd.matrixV().col(r) *
         (ut_h.row(r) / svd.singularValues()[r]);
  const Eigen::VectorXd g0 = model.target(model.theta_true());
  out.particular.resize(d, s);
  for (Eigen::Index x = 0; x < s; ++x)
    out.particular.col(x) = y.row(x).transpose() / sqrt_w[x] + g0;

  // Homogeneous directions, mapped back to psi space.
  out.null_basis.resize(s, s - rank);
  for (Eigen::Index r = rank; r < s; ++r)
    out.null_basis.col(r - rank) =
        svd.matrixV().col(r).cwiseQuotient(sqrt_w);
  return out;
}

SymMatrix exact_covariance(const Model& model, const Eigen::MatrixXd& values) {
  const std::vector<SupportAtom> support = model.enumerate_support();
  if (values.cols() != static_cast<Eigen::Index>(support.size()))
    throw InvalidInputError("exact_covariance: value count mismatch");
  const Eigen::VectorXd g0 = model.target(model.theta_true());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(values.rows(), values.rows());
  for (std::size_t x = 0; x < support.size(); ++x) {
    const Eigen::VectorXd phi =
        values.col(static_cast<Eigen::Index>(x)) - g0;
    acc += support[x].prob * phi * phi.transpose();
  }
  return SymMatrix(acc);
}

Eigen::VectorXd exact_expectation(const Model& model,
                                  const Eigen::MatrixXd& values,
                                  const ParameterPoint& theta) {
  const std::vector<SupportAtom> support = model.enumerate_support();
  if (values.cols() != static_cast<Eigen::Index>(support.size()))
    throw InvalidInputError("exact_expectation: value count mismatch");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(values.rows());
  for (std::size_t x = 0; x < support.size(); ++x) {
    const double p =
        support[x].prob * std::exp(model.log_pi(theta, support[x].x));
    acc += p * values.col(static_cast<Eigen::Index>(x));
  }
  return acc;
}

}  // namespace barankin::mc
