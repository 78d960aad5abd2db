#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "barankin/errors.hpp"

namespace barankin {

// One point of the parameter box Theta.
struct ParameterPoint {
  Eigen::VectorXd coords;

  ParameterPoint() = default;
  explicit ParameterPoint(Eigen::VectorXd c) : coords(std::move(c)) {}
  explicit ParameterPoint(double v) : coords(Eigen::VectorXd::Constant(1, v)) {}

  Eigen::Index dim() const { return coords.size(); }
  double operator[](Eigen::Index i) const { return coords[i]; }
  std::vector<double> to_vector() const {
    return {coords.data(), coords.data() + coords.size()};
  }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

enum class MomentMethod { kClosedForm, kEnumeration, kMonteCarlo };

const char* moment_method_name(MomentMethod m);
MomentMethod moment_method_from_name(const std::string& name);

// Row-major so each draw is a contiguous record (the kernels reduce rows).
using SampleMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A batch of samples drawn under one theta; one row per draw. Reproducible:
// the content is a pure function of (model, theta, count, seed, stream).
struct SampleBatch {
  SampleMatrix points;  // count x sample_dim
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  ParameterPoint theta;

  Eigen::Index count() const { return points.rows(); }
};

struct SupportAtom {
  Eigen::VectorXd x;
  double prob = 0.0;
};

// A parametric family: true index theta_T, target g(theta), likelihood
// ratio pi(theta; x) = dP_theta/dP_thetaT, samplers, and exact second
// moments where the family admits them (closed form or finite enumeration).
class Model {
 public:
  virtual ~Model() = default;

  const std::string& name() const { return name_; }
  const ParameterPoint& theta_true() const { return theta_true_; }
  Eigen::Index sample_dim() const { return sample_dim_; }
  Eigen::Index target_dim() const { return target_dim_; }
  Eigen::Index param_dim() const { return theta_true_.dim(); }
  const std::vector<Interval>& domain() const { return domain_; }
  MomentMethod moment_mode() const { return mode_; }
  bool has_exact_moments() const { return mode_ != MomentMethod::kMonteCarlo; }

  bool in_domain(const ParameterPoint& theta) const;
  void require_in_domain(const ParameterPoint& theta) const;

  // log pi(theta; x); exp of it is the likelihood ratio at x.
  virtual double log_pi(const ParameterPoint& theta,
                        Eigen::Ref<const Eigen::VectorXd> x) const = 0;

  virtual Eigen::VectorXd target(const ParameterPoint& theta) const = 0;

  // E_thetaT[pi(t1) pi(t2)], exact. Throws PostulateViolationError when the
  // second-moment postulate fails for the pair, ModeError when the model has
  // no exact moments.
  virtual double moment(const ParameterPoint& t1,
                        const ParameterPoint& t2) const;

  virtual SampleBatch sample(const ParameterPoint& theta, std::int64_t count,
                             std::uint64_t seed, std::uint64_t stream = 0) const = 0;

  // Finite support with theta_T probabilities; ModeError unless enumeration.
  virtual std::vector<SupportAtom> enumerate_support() const;

  // out.col(i) = pi(tau[i]; row x) for every row of the batch. Models with a
  // low-dimensional sufficient statistic override this with a kernel path.
  virtual void pi_matrix(const std::vector<ParameterPoint>& tau,
                         const SampleBatch& batch,
                         Eigen::Ref<Eigen::MatrixXd> out) const;

  Eigen::VectorXd target_increment(const ParameterPoint& theta) const {
    return target(theta) - target(theta_true());
  }

 protected:
  Model(std::string name, ParameterPoint theta_true, Eigen::Index sample_dim,
        Eigen::Index target_dim, std::vector<Interval> domain,
        MomentMethod mode);

  std::string name_;
  ParameterPoint theta_true_;
  Eigen::Index sample_dim_;
  Eigen::Index target_dim_;
  std::vector<Interval> domain_;
  MomentMethod mode_;
};

enum class ScalarTarget { kIdentity, kAffine, kOdds, kSquare };

// n i.i.d. N(theta, sigma^2) observations of a scalar mean.
class GaussianMeanModel final : public Model {
 public:
  GaussianMeanModel(int n_obs, double sigma, double theta_true,
                    ScalarTarget target = ScalarTarget::kIdentity,
                    double affine_a = 1.0, double affine_b = 0.0);

  double log_pi(const ParameterPoint& theta,
                Eigen::Ref<const Eigen::VectorXd> x) const override;
  Eigen::VectorXd target(const ParameterPoint& theta) const override;
  double moment(const ParameterPoint& t1,
                const ParameterPoint& t2) const override;
  SampleBatch sample(const ParameterPoint& theta, std::int64_t count,
                     std::uint64_t seed, std::uint64_t stream) const override;
  void pi_matrix(const std::vector<ParameterPoint>& tau,
                 const SampleBatch& batch,
                 Eigen::Ref<Eigen::MatrixXd> out) const override;

  int n_obs() const { return n_obs_; }
  double sigma() const { return sigma_; }

 private:
  // log pi(theta; x) = a(theta) * sum(x) + b(theta)
  void affine_coeffs(const ParameterPoint& theta, double& a, double& b) const;

  int n_obs_;
  double sigma_;
  ScalarTarget target_kind_;
  double affine_a_, affine_b_;
};

// n i.i.d. N(theta, diag(sigma2)) observations of a d-dimensional mean,
// identity target.
class GaussianMeanVectorModel final : public Model {
 public:
  GaussianMeanVectorModel(int dim, int n_obs, Eigen::VectorXd sigma2,
                          Eigen::VectorXd theta_true);

  double log_pi(const ParameterPoint& theta,
                Eigen::Ref<const Eigen::VectorXd> x) const override;
  Eigen::VectorXd target(const ParameterPoint& theta) const override;
  double moment(const ParameterPoint& t1,
                const ParameterPoint& t2) const override;
  SampleBatch sample(const ParameterPoint& theta, std::int64_t count,
                     std::uint64_t seed, std::uint64_t stream) const override;
  void pi_matrix(const std::vector<ParameterPoint>& tau,
                 const SampleBatch& batch,
                 Eigen::Ref<Eigen::MatrixXd> out) const override;

 private:
  int dim_, n_obs_;
  Eigen::VectorXd sigma2_;
};

// n i.i.d. Bernoulli(p) observations; finite support, exact enumeration.
// Targets: p, odds p/(1-p) (domain capped below 1), or p^2.
class BernoulliModel final : public Model {
 public:
  BernoulliModel(int n_obs, double p_true,
                 ScalarTarget target = ScalarTarget::kIdentity);

  double log_pi(const ParameterPoint& theta,
                Eigen::Ref<const Eigen::VectorXd> x) const override;
  Eigen::VectorXd target(const ParameterPoint& theta) const override;
  SampleBatch sample(const ParameterPoint& theta, std::int64_t count,
                     std::uint64_t seed, std::uint64_t stream) const override;
  std::vector<SupportAtom> enumerate_support() const override;
  void pi_matrix(const std::vector<ParameterPoint>& tau,
                 const SampleBatch& batch,
                 Eigen::Ref<Eigen::MatrixXd> out) const override;

  int n_obs() const { return n_obs_; }

 private:
  int n_obs_;
  double p_true_;
  ScalarTarget target_kind_;
};

// n i.i.d. Exponential(lambda) observations, identity target. The second
// moment E[pi(l1) pi(l2)] is finite only for l1 + l2 > lambda_T, exercising
// the postulate-violation path.
class ExponentialRateModel final : public Model {
 public:
  ExponentialRateModel(int n_obs, double lambda_true);

  double log_pi(const ParameterPoint& theta,
                Eigen::Ref<const Eigen::VectorXd> x) const override;
  Eigen::VectorXd target(const ParameterPoint& theta) const override;
  double moment(const ParameterPoint& t1,
                const ParameterPoint& t2) const override;
  SampleBatch sample(const ParameterPoint& theta, std::int64_t count,
                     std::uint64_t seed, std::uint64_t stream) const override;
  void pi_matrix(const std::vector<ParameterPoint>& tau,
                 const SampleBatch& batch,
                 Eigen::Ref<Eigen::MatrixXd> out) const override;

 private:
  int n_obs_;
  double lambda_true_;
};

// Parameter table for construction by name (CLI config entry point).
struct ModelParams {
  std::map<std::string, double> scalars;
  std::map<std::string, std::vector<double>> vectors;

  double get(const std::string& key) const;
  double get_or(const std::string& key, double fallback) const;
};

std::shared_ptr<const Model> make_model(const std::string& name,
                                        const ModelParams& params,
                                        const std::string& target_name);

ScalarTarget scalar_target_from_name(const std::string& name);

}  // namespace barankin
