#include "barankin/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "barankin/errors.hpp"

namespace barankin {

Eigen::MatrixXd Estimator::evaluate_batch(const SampleBatch& batch) const {
  Eigen::MatrixXd out(batch.count(), output_dim());
  for (Eigen::Index r = 0; r < batch.count(); ++r)
    out.row(r) = evaluate(batch.points.row(r).transpose()).transpose();
  return out;
}

SpanEstimator::SpanEstimator(std::shared_ptr<const Model> model,
                             std::vector<ParameterPoint> tau,
                             Eigen::MatrixXd coeff, Eigen::VectorXd offset)
    : model_(std::move(model)),
      tau_(std::move(tau)),
      coeff_(std::move(coeff)),
      offset_(std::move(offset)) {
  if (!model_) throw InvalidInputError("SpanEstimator: null model");
  if (coeff_.cols() != static_cast<Eigen::Index>(tau_.size()) ||
      coeff_.rows() != offset_.size())
    throw InvalidInputError("SpanEstimator: coefficient shape mismatch");
}

Eigen::VectorXd SpanEstimator::evaluate(
    Eigen::Ref<const Eigen::VectorXd> x) const {
  Eigen::VectorXd beta(tau_.size());
  for (std::size_t i = 0; i < tau_.size(); ++i)
    beta[static_cast<Eigen::Index>(i)] = std::exp(model_->log_pi(tau_[i], x));
  return offset_ + coeff_ * beta;
}

Eigen::MatrixXd SpanEstimator::evaluate_batch(const SampleBatch& batch) const {
  Eigen::MatrixXd beta(batch.count(), static_cast<Eigen::Index>(tau_.size()));
  model_->pi_matrix(tau_, batch, beta);
  Eigen::MatrixXd out = beta * coeff_.transpose();
  out.rowwise() += offset_.transpose();
  return out;
}

SampleMeanEstimator::SampleMeanEstimator(std::shared_ptr<const Model> model)
    : model_(std::move(model)) {
  if (!model_) throw InvalidInputError("SampleMeanEstimator: null model");
}

Eigen::Index SampleMeanEstimator::output_dim() const {
  return model_->target_dim();
}

Eigen::VectorXd SampleMeanEstimator::evaluate(
    Eigen::Ref<const Eigen::VectorXd> x) const {
  if (x.size() != model_->sample_dim())
    throw InvalidInputError("SampleMeanEstimator: sample dimension mismatch");
  const Eigen::Index k = model_->param_dim();
  // mean of the observations, reshaped to the parameter layout
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
  const Eigen::Index reps = x.size() / k;
  for (Eigen::Index j = 0; j < reps; ++j) mean += x.segment(j * k, k);
  mean /= static_cast<double>(reps);
  for (Eigen::Index j = 0; j < k; ++j)
    mean[j] = std::clamp(mean[j], model_->domain()[j].lo, model_->domain()[j].hi);
  return model_->target(ParameterPoint(mean));
}

TabulatedEstimator::TabulatedEstimator(std::vector<SupportAtom> support,
                                       Eigen::MatrixXd values)
    : support_(std::move(support)), values_(std::move(values)) {
  if (values_.cols() != static_cast<Eigen::Index>(support_.size()))
    throw InvalidInputError("TabulatedEstimator: value count mismatch");
  for (std::size_t i = 0; i < support_.size(); ++i) {
    const Eigen::VectorXd& x = support_[i].x;
    index_[{x.data(), x.data() + x.size()}] = static_cast<Eigen::Index>(i);
  }
}

Eigen::VectorXd TabulatedEstimator::evaluate(
    Eigen::Ref<const Eigen::VectorXd> x) const {
  const auto it = index_.find({x.data(), x.data() + x.size()});
  if (it == index_.end())
    throw DomainError("TabulatedEstimator: sample not in the finite support");
  return values_.col(it->second);
}

}  // namespace barankin
