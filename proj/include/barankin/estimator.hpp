#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <vector>

#include "barankin/model.hpp"

namespace barankin {

// An estimator is a pure map from a sample vector to R^{d_g}.
class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual Eigen::Index output_dim() const = 0;
  virtual Eigen::VectorXd evaluate(Eigen::Ref<const Eigen::VectorXd> x) const = 0;
  // count x d_g; default loops evaluate(), concrete classes batch it.
  virtual Eigen::MatrixXd evaluate_batch(const SampleBatch& batch) const;
};

// psi(x) = offset + coeff * beta(tau; x), the span form produced by the
// equality condition (offset = g(theta_T), coeff = Lambda0 * A).
class SpanEstimator final : public Estimator {
 public:
  SpanEstimator(std::shared_ptr<const Model> model,
                std::vector<ParameterPoint> tau, Eigen::MatrixXd coeff,
                Eigen::VectorXd offset);

  Eigen::Index output_dim() const override { return offset_.size(); }
  Eigen::VectorXd evaluate(Eigen::Ref<const Eigen::VectorXd> x) const override;
  Eigen::MatrixXd evaluate_batch(const SampleBatch& batch) const override;

  const Eigen::MatrixXd& coeff() const { return coeff_; }
  const std::vector<ParameterPoint>& tau() const { return tau_; }
  const Model& model() const { return *model_; }

 private:
  std::shared_ptr<const Model> model_;
  std::vector<ParameterPoint> tau_;
  Eigen::MatrixXd coeff_;   // d_g x M
  Eigen::VectorXd offset_;  // d_g
};

// g(mean of the n observations): exactly unbiased for identity/affine
// targets, plug-in otherwise.
class SampleMeanEstimator final : public Estimator {
 public:
  explicit SampleMeanEstimator(std::shared_ptr<const Model> model);

  Eigen::Index output_dim() const override;
  Eigen::VectorXd evaluate(Eigen::Ref<const Eigen::VectorXd> x) const override;

 private:
  std::shared_ptr<const Model> model_;
};

// Values tabulated on a finite support (enumeration models only).
class TabulatedEstimator final : public Estimator {
 public:
  TabulatedEstimator(std::vector<SupportAtom> support, Eigen::MatrixXd values);

  Eigen::Index output_dim() const override { return values_.rows(); }
  Eigen::VectorXd evaluate(Eigen::Ref<const Eigen::VectorXd> x) const override;

  const Eigen::MatrixXd& values() const { return values_; }  // d_g x s

 private:
  std::vector<SupportAtom> support_;
  Eigen::MatrixXd values_;
  std::map<std::vector<double>, Eigen::Index> index_;
};

}  // namespace barankin
