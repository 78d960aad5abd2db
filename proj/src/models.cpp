#include "barankin/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "barankin/kernels.hpp"
#include "barankin/rng.hpp"

namespace barankin {

namespace {

std::string point_str(const ParameterPoint& p) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < p.dim(); ++i) {
    if (i) os << ", ";
    os << p[i];
  }
  os << ")";
  return os.str();
}

}  // namespace

const char* moment_method_name(MomentMethod m) {
  switch (m) {
    case MomentMethod::kClosedForm:
      return "closed_form";
    case MomentMethod::kEnumeration:
      return "enumeration";
    case MomentMethod::kMonteCarlo:
      return "monte_carlo";
  }
  return "?";
}

MomentMethod moment_method_from_name(const std::string& name) {
  if (name == "closed_form") return MomentMethod::kClosedForm;
  if (name == "enumeration") return MomentMethod::kEnumeration;
  if (name == "monte_carlo") return MomentMethod::kMonteCarlo;
  throw ConfigError("unknown moment method: " + name);
}

Model::Model(std::string name, ParameterPoint theta_true,
             Eigen::Index sample_dim, Eigen::Index target_dim,
             std::vector<Interval> domain, MomentMethod mode)
    : name_(std::move(name)),
      theta_true_(std::move(theta_true)),
      sample_dim_(sample_dim),
      target_dim_(target_dim),
      domain_(std::move(domain)),
      mode_(mode) {
  if (static_cast<Eigen::Index>(domain_.size()) != theta_true_.dim())
    throw InvalidInputError(name_ + ": domain dimension mismatch");
  if (!in_domain(theta_true_))
    throw InvalidInputError(name_ + ": theta_true outside its own domain");
}

bool Model::in_domain(const ParameterPoint& theta) const {
  if (theta.dim() != theta_true_.dim()) return false;
  for (Eigen::Index i = 0; i < theta.dim(); ++i) {
    if (!(theta[i] >= domain_[i].lo && theta[i] <= domain_[i].hi)) return false;
  }
  return true;
}

void Model::require_in_domain(const ParameterPoint& theta) const {
  if (!in_domain(theta))
    throw DomainError(name_ + ": parameter point " + point_str(theta) +
                      " outside the admissible domain");
}

double Model::moment(const ParameterPoint& t1, const ParameterPoint& t2) const {
  if (mode_ != MomentMethod::kEnumeration)
    throw ModeError(name_ + ": exact moments not available in mode " +
                    moment_method_name(mode_));
  require_in_domain(t1);
  require_in_domain(t2);
  double acc = 0.0;
  for (const SupportAtom& atom : enumerate_support()) {
    const double p1 = std::exp(log_pi(t1, atom.x));
    const double p2 = std::exp(log_pi(t2, atom.x));
    acc += atom.prob * p1 * p2;
  }
  return acc;
}

std::vector<SupportAtom> Model::enumerate_support() const {
  throw ModeError(name_ + ": enumerate_support requires enumeration mode");
}

void Model::pi_matrix(const std::vector<ParameterPoint>& tau,
                      const SampleBatch& batch,
                      Eigen::Ref<Eigen::MatrixXd> out) const {
  const Eigen::Index count = batch.count();
  for (std::size_t j = 0; j < tau.size(); ++j) {
    for (Eigen::Index r = 0; r < count; ++r)
      out(r, static_cast<Eigen::Index>(j)) =
          std::exp(log_pi(tau[j], batch.points.row(r).transpose()));
  }
}

// ---------------------------------------------------------------------------
// GaussianMeanModel

GaussianMeanModel::GaussianMeanModel(int n_obs, double sigma, double theta_true,
                                     ScalarTarget target, double affine_a,
                                     double affine_b)
    : Model("gaussian_mean", ParameterPoint(theta_true), n_obs, 1,
            {{theta_true - 10.0 * sigma, theta_true + 10.0 * sigma}},
            MomentMethod::kClosedForm),
      n_obs_(n_obs),
      sigma_(sigma),
      target_kind_(target),
      affine_a_(affine_a),
      affine_b_(affine_b) {
  if (n_obs < 1) throw InvalidInputError("gaussian_mean: n must be >= 1");
  if (!(sigma > 0.0)) throw InvalidInputError("gaussian_mean: sigma must be > 0");
  if (target != ScalarTarget::kIdentity && target != ScalarTarget::kAffine)
    throw InvalidInputError("gaussian_mean: unsupported target");
}

void GaussianMeanModel::affine_coeffs(const ParameterPoint& theta, double& a,
                                      double& b) const {
  const double t = theta[0];
  const double t0 = theta_true()[0];
  const double inv_s2 = 1.0 / (sigma_ * sigma_);
  a = (t - t0) * inv_s2;
  b = -0.5 * n_obs_ * (t * t - t0 * t0) * inv_s2;
}

double GaussianMeanModel::log_pi(const ParameterPoint& theta,
                                 Eigen::Ref<const Eigen::VectorXd> x) const {
  require_in_domain(theta);
  if (x.size() != sample_dim_)
    throw InvalidInputError("gaussian_mean: sample dimension mismatch");
  double a, b;
  affine_coeffs(theta, a, b);
  return a * kernels::sum(x.data(), static_cast<std::size_t>(x.size())) + b;
}

Eigen::VectorXd GaussianMeanModel::target(const ParameterPoint& theta) const {
  require_in_domain(theta);
  const double t = theta[0];
  Eigen::VectorXd g(1);
  g[0] = target_kind_ == ScalarTarget::kIdentity ? t : affine_a_ * t + affine_b_;
  return g;
}

double GaussianMeanModel::moment(const ParameterPoint& t1,
                                 const ParameterPoint& t2) const {
  require_in_domain(t1);
  require_in_domain(t2);
  const double t0 = theta_true()[0];
  const double e =
      n_obs_ * (t1[0] - t0) * (t2[0] - t0) / (sigma_ * sigma_);
  return std::exp(e);
}

SampleBatch GaussianMeanModel::sample(const ParameterPoint& theta,
                                      std::int64_t count, std::uint64_t seed,
                                      std::uint64_t stream) const {
  require_in_domain(theta);
  if (count < 0) throw InvalidInputError("sample: negative count");
  SampleBatch b;
  b.points.resize(count, sample_dim_);
  b.seed = seed;
  b.stream = stream;
  b.theta = theta;
  rng::Stream rs(seed, stream);
  rs.fill_normal(b.points.data(),
                 static_cast<std::size_t>(count * sample_dim_), theta[0],
                 sigma_);
  return b;
}

void GaussianMeanModel::pi_matrix(const std::vector<ParameterPoint>& tau,
                                  const SampleBatch& batch,
                                  Eigen::Ref<Eigen::MatrixXd> out) const {
  const Eigen::Index count = batch.count();
  Eigen::VectorXd stats(count);
  for (Eigen::Index r = 0; r < count; ++r)
    stats[r] = kernels::sum(batch.points.row(r).data(),
                            static_cast<std::size_t>(sample_dim_));
  for (std::size_t j = 0; j < tau.size(); ++j) {
    require_in_domain(tau[j]);
    double a, b;
    affine_coeffs(tau[j], a, b);
    kernels::exp_affine(out.col(static_cast<Eigen::Index>(j)).data(),
                        stats.data(), a, b, static_cast<std::size_t>(count));
  }
}

// ---------------------------------------------------------------------------
// GaussianMeanVectorModel

namespace {
std::vector<Interval> box_around(const Eigen::VectorXd& center,
                                 const Eigen::VectorXd& half_width) {
  std::vector<Interval> box(center.size());
  for (Eigen::Index i = 0; i < center.size(); ++i)
    box[i] = {center[i] - half_width[i], center[i] + half_width[i]};
  return box;
}
}  // namespace

GaussianMeanVectorModel::GaussianMeanVectorModel(int dim, int n_obs,
                                                 Eigen::VectorXd sigma2,
                                                 Eigen::VectorXd theta_true)
    : Model("gaussian_mean_vector", ParameterPoint(theta_true),
            static_cast<Eigen::Index>(dim) * n_obs, dim,
            box_around(theta_true, 10.0 * sigma2.cwiseSqrt()),
            MomentMethod::kClosedForm),
      dim_(dim),
      n_obs_(n_obs),
      sigma2_(std::move(sigma2)) {
  if (dim < 1 || n_obs < 1)
    throw InvalidInputError("gaussian_mean_vector: dim and n must be >= 1");
  if (sigma2_.size() != dim || (sigma2_.array() <= 0.0).any())
    throw InvalidInputError("gaussian_mean_vector: bad variance vector");
}

double GaussianMeanVectorModel::log_pi(
    const ParameterPoint& theta, Eigen::Ref<const Eigen::VectorXd> x) const {
  require_in_domain(theta);
  if (x.size() != sample_dim_)
    throw InvalidInputError("gaussian_mean_vector: sample dimension mismatch");
  const Eigen::VectorXd d = theta.coords - theta_true().coords;
  const Eigen::VectorXd w = d.cwiseQuotient(sigma2_);
  // per-coordinate sums over the n_obs observations
  Eigen::VectorXd t = Eigen::VectorXd::Zero(dim_);
  for (int j = 0; j < n_obs_; ++j) t += x.segment(j * dim_, dim_);
  const double quad = theta.coords.cwiseQuotient(sigma2_).dot(theta.coords) -
                      theta_true().coords.cwiseQuotient(sigma2_).dot(
                          theta_true().coords);
  return w.dot(t) - 0.5 * n_obs_ * quad;
}

Eigen::VectorXd GaussianMeanVectorModel::target(
    const ParameterPoint& theta) const {
  require_in_domain(theta);
  return theta.coords;
}

double GaussianMeanVectorModel::moment(const ParameterPoint& t1,
                                       const ParameterPoint& t2) const {
  require_in_domain(t1);
  require_in_domain(t2);
  const Eigen::VectorXd d1 = t1.coords - theta_true().coords;
  const Eigen::VectorXd d2 = t2.coords - theta_true().coords;
  return std::exp(n_obs_ * d1.cwiseQuotient(sigma2_).dot(d2));
}

SampleBatch GaussianMeanVectorModel::sample(const ParameterPoint& theta,
                                            std::int64_t count,
                                            std::uint64_t seed,
                                            std::uint64_t stream) const {
  require_in_domain(theta);
  if (count < 0) throw InvalidInputError("sample: negative count");
  SampleBatch b;
  b.points.resize(count, sample_dim_);
  b.seed = seed;
  b.stream = stream;
  b.theta = theta;
  rng::Stream rs(seed, stream);
  for (Eigen::Index r = 0; r < count; ++r)
    for (int j = 0; j < n_obs_; ++j)
      for (int c = 0; c < dim_; ++c)
        b.points(r, j * dim_ + c) =
            theta[c] + std::sqrt(sigma2_[c]) * rs.normal();
  return b;
}

void GaussianMeanVectorModel::pi_matrix(const std::vector<ParameterPoint>& tau,
                                        const SampleBatch& batch,
                                        Eigen::Ref<Eigen::MatrixXd> out) const {
  const Eigen::Index count = batch.count();
  Eigen::MatrixXd stats = Eigen::MatrixXd::Zero(count, dim_);
  for (int j = 0; j < n_obs_; ++j)
    stats += batch.points.middleCols(static_cast<Eigen::Index>(j) * dim_, dim_);
  for (std::size_t j = 0; j < tau.size(); ++j) {
    require_in_domain(tau[j]);
    const Eigen::VectorXd d = tau[j].coords - theta_true().coords;
    const Eigen::VectorXd w = d.cwiseQuotient(sigma2_);
    const double quad =
        tau[j].coords.cwiseQuotient(sigma2_).dot(tau[j].coords) -
        theta_true().coords.cwiseQuotient(sigma2_).dot(theta_true().coords);
    const double b = -0.5 * n_obs_ * quad;
    Eigen::Index col = static_cast<Eigen::Index>(j);
    out.col(col) = (stats * w).array() + b;
    kernels::exp_inplace(out.col(col).data(), static_cast<std::size_t>(count));
  }
}

// ---------------------------------------------------------------------------
// BernoulliModel

namespace {
std::vector<Interval> bernoulli_domain(ScalarTarget target) {
  // The odds target must stay finite on the closed domain.
  const double hi =
      target == ScalarTarget::kOdds ? 1.0 - std::ldexp(1.0, -30) : 1.0;
  return {{0.0, hi}};
}
}  // namespace

BernoulliModel::BernoulliModel(int n_obs, double p_true, ScalarTarget target)
    : Model("bernoulli", ParameterPoint(p_true), n_obs, 1,
            bernoulli_domain(target), MomentMethod::kEnumeration),
      n_obs_(n_obs),
      p_true_(p_true),
      target_kind_(target) {
  if (n_obs < 1 || n_obs > 16)
    throw InvalidInputError("bernoulli: n must be in [1, 16]");
  if (!(p_true > 0.0 && p_true < 1.0))
    throw InvalidInputError("bernoulli: p_true must lie in (0, 1)");
  if (target == ScalarTarget::kAffine)
    throw InvalidInputError("bernoulli: unsupported target");
}

double BernoulliModel::log_pi(const ParameterPoint& theta,
                              Eigen::Ref<const Eigen::VectorXd> x) const {
  require_in_domain(theta);
  if (x.size() != sample_dim_)
    throw InvalidInputError("bernoulli: sample dimension mismatch");
  int ones = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] == 1.0)
      ++ones;
    else if (x[i] != 0.0)
      throw DomainError("bernoulli: sample outside the {0,1} support");
  }
  const double p = theta[0];
  const double log_ratio1 = std::log(p / p_true_);
  const double log_ratio0 = std::log((1.0 - p) / (1.0 - p_true_));
  double acc = 0.0;
  if (ones > 0) acc += ones * log_ratio1;            // avoids 0 * (-inf)
  if (ones < n_obs_) acc += (n_obs_ - ones) * log_ratio0;
  return acc;
}

Eigen::VectorXd BernoulliModel::target(const ParameterPoint& theta) const {
  require_in_domain(theta);
  const double p = theta[0];
  Eigen::VectorXd g(1);
  switch (target_kind_) {
    case ScalarTarget::kIdentity:
      g[0] = p;
      break;
    case ScalarTarget::kOdds:
      g[0] = p / (1.0 - p);
      break;
    case ScalarTarget::kSquare:
      g[0] = p * p;
      break;
    default:
      throw InvalidInputError("bernoulli: unsupported target");
  }
  return g;
}

SampleBatch BernoulliModel::sample(const ParameterPoint& theta,
                                   std::int64_t count, std::uint64_t seed,
                                   std::uint64_t stream) const {
  require_in_domain(theta);
  if (count < 0) throw InvalidInputError("sample: negative count");
  SampleBatch b;
  b.points.resize(count, sample_dim_);
  b.seed = seed;
  b.stream = stream;
  b.theta = theta;
  rng::Stream rs(seed, stream);
  const double p = theta[0];
  for (Eigen::Index r = 0; r < count; ++r)
    for (Eigen::Index c = 0; c < sample_dim_; ++c)
      b.points(r, c) = rs.uniform() < p ? 1.0 : 0.0;
  return b;
}

std::vector<SupportAtom> BernoulliModel::enumerate_support() const {
  const std::size_t size = std::size_t{1} << n_obs_;
  std::vector<SupportAtom> support(size);
  for (std::size_t mask = 0; mask < size; ++mask) {
    SupportAtom& atom = support[mask];
    atom.x.resize(n_obs_);
    double prob = 1.0;
    for (int i = 0; i < n_obs_; ++i) {
      const bool one = (mask >> i) & 1u;
      atom.x[i] = one ? 1.0 : 0.0;
      prob *= one ? p_true_ : 1.0 - p_true_;
    }
    atom.prob = prob;
  }
  return support;
}

void BernoulliModel::pi_matrix(const std::vector<ParameterPoint>& tau,
                               const SampleBatch& batch,
                               Eigen::Ref<Eigen::MatrixXd> out) const {
  const Eigen::Index count = batch.count();
  Eigen::VectorXd ones(count);
  for (Eigen::Index r = 0; r < count; ++r)
    ones[r] = kernels::sum(batch.points.row(r).data(),
                           static_cast<std::size_t>(sample_dim_));
  for (std::size_t j = 0; j < tau.size(); ++j) {
    require_in_domain(tau[j]);
    const double p = tau[j][0];
    const Eigen::Index col = static_cast<Eigen::Index>(j);
    if (p <= 0.0 || p >= 1.0) {
      // log-odds coefficients degenerate at the boundary
      for (Eigen::Index r = 0; r < count; ++r)
        out(r, col) = std::exp(log_pi(tau[j], batch.points.row(r).transpose()));
      continue;
    }
    const double log_ratio1 = std::log(p / p_true_);
    const double log_ratio0 = std::log((1.0 - p) / (1.0 - p_true_));
    kernels::exp_affine(out.col(col).data(), ones.data(),
                        log_ratio1 - log_ratio0, n_obs_ * log_ratio0,
                        static_cast<std::size_t>(count));
  }
}

// ---------------------------------------------------------------------------
// ExponentialRateModel

ExponentialRateModel::ExponentialRateModel(int n_obs, double lambda_true)
    : Model("exponential_rate", ParameterPoint(lambda_true), n_obs, 1,
            {{lambda_true / 16.0, 8.0 * lambda_true}},
            MomentMethod::kClosedForm),
      n_obs_(n_obs),
      lambda_true_(lambda_true) {
  if (n_obs < 1) throw InvalidInputError("exponential_rate: n must be >= 1");
  if (!(lambda_true > 0.0))
    throw InvalidInputError("exponential_rate: lambda_true must be > 0");
}

double ExponentialRateModel::log_pi(const ParameterPoint& theta,
                                    Eigen::Ref<const Eigen::VectorXd> x) const {
  require_in_domain(theta);
  if (x.size() != sample_dim_)
    throw InvalidInputError("exponential_rate: sample dimension mismatch");
  if ((x.array() <= 0.0).any())
    throw DomainError("exponential_rate: sample outside the positive support");
  const double l = theta[0];
  const double s = kernels::sum(x.data(), static_cast<std::size_t>(x.size()));
  return n_obs_ * std::log(l / lambda_true_) - (l - lambda_true_) * s;
}

Eigen::VectorXd ExponentialRateModel::target(const ParameterPoint& theta) const {
  require_in_domain(theta);
  Eigen::VectorXd g(1);
  g[0] = theta[0];
  return g;
}

double ExponentialRateModel::moment(const ParameterPoint& t1,
                                    const ParameterPoint& t2) const {
  require_in_domain(t1);
  require_in_domain(t2);
  const double l1 = t1[0], l2 = t2[0];
  if (l1 + l2 <= lambda_true_) {
    std::ostringstream os;
    os << "exponential_rate: E[pi(" << l1 << ") pi(" << l2
       << ")] is infinite (second-moment postulate fails: lambda1 + lambda2 <= "
          "lambda_true)";
    throw PostulateViolationError(os.str(), t1.to_vector(), t2.to_vector());
  }
  const double per_obs = l1 * l2 / (lambda_true_ * (l1 + l2 - lambda_true_));
  return std::pow(per_obs, n_obs_);
}

SampleBatch ExponentialRateModel::sample(const ParameterPoint& theta,
                                         std::int64_t count,
                                         std::uint64_t seed,
                                         std::uint64_t stream) const {
  require_in_domain(theta);
  if (count < 0) throw InvalidInputError("sample: negative count");
  SampleBatch b;
  b.points.resize(count, sample_dim_);
  b.seed = seed;
  b.stream = stream;
  b.theta = theta;
  rng::Stream rs(seed, stream);
  const double inv_l = 1.0 / theta[0];
  for (Eigen::Index r = 0; r < count; ++r)
    for (Eigen::Index c = 0; c < sample_dim_; ++c)
      b.points(r, c) = -std::log(rs.uniform_open()) * inv_l;
  return b;
}

void ExponentialRateModel::pi_matrix(const std::vector<ParameterPoint>& tau,
                                     const SampleBatch& batch,
                                     Eigen::Ref<Eigen::MatrixXd> out) const {
  const Eigen::Index count = batch.count();
  Eigen::VectorXd stats(count);
  for (Eigen::Index r = 0; r < count; ++r)
    stats[r] = kernels::sum(batch.points.row(r).data(),
                            static_cast<std::size_t>(sample_dim_));
  for (std::size_t j = 0; j < tau.size(); ++j) {
    require_in_domain(tau[j]);
    const double l = tau[j][0];
    kernels::exp_affine(out.col(static_cast<Eigen::Index>(j)).data(),
                        stats.data(), -(l - lambda_true_),
                        n_obs_ * std::log(l / lambda_true_),
                        static_cast<std::size_t>(count));
  }
}

// ---------------------------------------------------------------------------
// Factory

double ModelParams::get(const std::string& key) const {
  auto it = scalars.find(key);
  if (it == scalars.end()) throw ConfigError("missing model parameter: " + key);
  return it->second;
}

double ModelParams::get_or(const std::string& key, double fallback) const {
  auto it = scalars.find(key);
  return it == scalars.end() ? fallback : it->second;
}

ScalarTarget scalar_target_from_name(const std::string& name) {
  if (name.empty() || name == "identity") return ScalarTarget::kIdentity;
  if (name == "affine") return ScalarTarget::kAffine;
  if (name == "odds") return ScalarTarget::kOdds;
  if (name == "square") return ScalarTarget::kSquare;
  throw ConfigError("unknown target: " + name);
}

std::shared_ptr<const Model> make_model(const std::string& name,
                                        const ModelParams& params,
                                        const std::string& target_name) {
  const ScalarTarget target = scalar_target_from_name(target_name);
  if (name == "gaussian_mean") {
    return std::make_shared<GaussianMeanModel>(
        static_cast<int>(params.get("n")), params.get_or("sigma", 1.0),
        params.get("theta_true"), target, params.get_or("affine_a", 1.0),
        params.get_or("affine_b", 0.0));
  }
  if (name == "gaussian_mean_vector") {
    auto theta = params.vectors.find("theta_true");
    auto sigma2 = params.vectors.find("sigma2");
    if (theta == params.vectors.end() || sigma2 == params.vectors.end())
      throw ConfigError("gaussian_mean_vector requires theta_true and sigma2 vectors");
    if (target != ScalarTarget::kIdentity)
      throw ConfigError("gaussian_mean_vector supports the identity target only");
    const int dim = static_cast<int>(theta->second.size());
    return std::make_shared<GaussianMeanVectorModel>(
        dim, static_cast<int>(params.get("n")),
        Eigen::Map<const Eigen::VectorXd>(sigma2->second.data(), dim),
        Eigen::Map<const Eigen::VectorXd>(theta->second.data(), dim));
  }
  if (name == "bernoulli") {
    return std::make_shared<BernoulliModel>(static_cast<int>(params.get("n")),
                                            params.get("p_true"), target);
  }
  if (name == "exponential_rate") {
    if (target != ScalarTarget::kIdentity)
      throw ConfigError("exponential_rate supports the identity target only");
    return std::make_shared<ExponentialRateModel>(
        static_cast<int>(params.get("n")), params.get("lambda_true"));
  }
  throw ConfigError("unknown model: " + name);
}

}  // namespace barankin
