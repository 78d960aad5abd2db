#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "barankin/estimator.hpp"
#include "barankin/model.hpp"
#include "barankin/psd.hpp"

namespace barankin::mc {

// Batch-means Monte Carlo configuration. samples must divide evenly into
// batches; each batch runs on its own counter-based substream, so results
// are bit-identical under any thread schedule.
struct McConfig {
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  int batches = 32;
  int threads = 1;

  std::int64_t batch_size() const;
  void validate() const;
};

struct McEstimate {
  Eigen::MatrixXd value;
  Eigen::MatrixXd std_err;  // entrywise, batch-means based
  std::int64_t samples_used = 0;

  double scalar() const { return value(0, 0); }
  double scalar_err() const { return std_err(0, 0); }
};

// Batch mean of pi(t1; X) pi(t2; X) under theta_T.
McEstimate empirical_moment(const Model& model, const ParameterPoint& t1,
                            const ParameterPoint& t2, const McConfig& cfg);

// Mean of psi(X) - g(theta) under P_theta.
McEstimate empirical_bias(const Estimator& est, const Model& model,
                          const ParameterPoint& theta, const McConfig& cfg);

// E_thetaT[(psi - g(theta_T))(psi - g(theta_T))^T], centered at the known
// target value, not the sample mean.
McEstimate empirical_cov(const Estimator& est, const Model& model,
                         const McConfig& cfg);

// Frobenius distance of the N-sample empirical Gram matrix to the exact
// B(tau) at each ladder rung (the decay should be O(N^{-1/2})).
std::vector<std::pair<std::int64_t, double>> gram_convergence_experiment(
    const Model& model, const std::vector<ParameterPoint>& tau,
    const std::vector<std::int64_t>& ladder, std::uint64_t seed,
    int batches = 32, int threads = 1);

// Affine space of estimators unbiased at the tau points, on a finite sample
// space: particular (minimum-covariance) solution plus a basis of the
// homogeneous solutions. Infeasible systems yield feasible == false.
struct UnbiasedPolytope {
  bool feasible = false;
  std::vector<SupportAtom> support;
  Eigen::MatrixXd particular;  // d_g x s, psi values per support atom
  Eigen::MatrixXd null_basis;  // s x n_null

  Eigen::Index null_dim() const { return null_basis.cols(); }
  // particular + coeff * null_basis^T rows; coeff is d_g x n_null.
  Eigen::MatrixXd member_values(const Eigen::MatrixXd& coeff) const;
  TabulatedEstimator member(const Eigen::MatrixXd& coeff) const;
};

UnbiasedPolytope exact_unbiased_polytope(const Model& model,
                                         const std::vector<ParameterPoint>& tau);

// Exact covariance (centered at g(theta_T)) of a tabulated estimator over
// the model's finite support.
SymMatrix exact_covariance(const Model& model, const Eigen::MatrixXd& values);

// Exact expectation of a tabulated estimator under P_theta.
Eigen::VectorXd exact_expectation(const Model& model,
                                  const Eigen::MatrixXd& values,
                                  const ParameterPoint& theta);

}  // namespace barankin::mc
