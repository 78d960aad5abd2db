#include "barankin/bound.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "barankin/kernels.hpp"
#include "barankin/mc.hpp"
#include "barankin/rng.hpp"

namespace barankin {

namespace {

// Greedy left-to-right Schur-complement sweep: index i survives iff its
// Schur complement over the surviving prefix exceeds rank_eps * diagonal.
// This single rank criterion backs both deflation and the det != 0 gates,
// so a deflated set always passes the bound evaluation it feeds.
std::vector<int> schur_independent_prefix(const Eigen::MatrixXd& b,
                                          double rank_eps) {
  const Eigen::Index m = b.rows();
  std::vector<int> kept;
  if (m == 0) return kept;
  if (!(b(0, 0) > 0.0)) return kept;
  kept.push_back(0);
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(m, m);
  chol(0, 0) = std::sqrt(b(0, 0));
  for (Eigen::Index i = 1; i < m; ++i) {
    const Eigen::Index k = static_cast<Eigen::Index>(kept.size());
    Eigen::VectorXd c(k);
    for (Eigen::Index j = 0; j < k; ++j) c[j] = b(kept[j], i);
    const Eigen::VectorXd y =
        chol.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(c);
    const double schur = b(i, i) - y.squaredNorm();
    if (schur > rank_eps * b(i, i)) {
      chol.row(k).head(k) = y.transpose();
      chol(k, k) = std::sqrt(schur);
      kept.push_back(static_cast<int>(i));
    }
  }
  return kept;
}

struct SpdGate {
  double condition_number = 0.0;
};

SpdGate gate_nonsingular(const Eigen::MatrixXd& m, const Tolerance& tol,
                         const char* label) {
  if (schur_independent_prefix(m, tol.rank_eps).size() !=
      static_cast<std::size_t>(m.rows()))
    throw RankDeficiencyError(
        std::string(label) +
        ": singular within rank tolerance (deflate_dependent removes "
        "almost-surely dependent test points)");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw InvalidInputError(std::string(label) + ": eigen-decomposition failed");
  SpdGate g;
  const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
  const double emin = es.eigenvalues().cwiseAbs().minCoeff();
  g.condition_number = emin > 0.0 ? emax / emin
                                  : std::numeric_limits<double>::infinity();
  return g;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

void run_chunked(int threads, std::size_t n,
                 const std::function<void(std::size_t)>& work) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  const int used = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (int t = 0; t < used; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += used) work(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

TestPointSet TestPointSet::scalars(std::initializer_list<double> vals) {
  TestPointSet t;
  for (double v : vals) t.points.emplace_back(v);
  return t;
}

TestPointSet TestPointSet::select(const std::vector<int>& indices) const {
  TestPointSet out;
  out.points.reserve(indices.size());
  for (int i : indices) out.points.push_back(points.at(i));
  return out;
}

const char* cert_verdict_name(CertVerdict v) {
  switch (v) {
    case CertVerdict::kAttainedOnSpan:
      return "AttainedOnSpan";
    case CertVerdict::kNotAttained:
      return "NotAttained";
    case CertVerdict::kInconclusive:
      return "Inconclusive";
  }
  return "?";
}

const char* boundedness_name(Boundedness b) {
  return b == Boundedness::kBoundedEvidence ? "BoundedEvidence"
                                            : "DivergenceDetected";
}

Eigen::MatrixXd compute_G(const Model& model, const TestPointSet& tau) {
  if (tau.size() < 1) throw InvalidInputError("compute_G: empty test set");
  Eigen::MatrixXd g(model.target_dim(), static_cast<Eigen::Index>(tau.size()));
  for (std::size_t i = 0; i < tau.size(); ++i)
    g.col(static_cast<Eigen::Index>(i)) = model.target_increment(tau.points[i]);
  return g;
}

MomentMatrices compute_B(const Model& model, const TestPointSet& tau,
                         MomentMethod method, std::int64_t mc_samples,
                         std::uint64_t seed, int mc_batches, int threads) {
  if (tau.size() < 1) throw InvalidInputError("compute_B: empty test set");
  for (const ParameterPoint& p : tau.points) model.require_in_domain(p);
  const Eigen::Index m = static_cast<Eigen::Index>(tau.size());

  MomentMatrices mm;
  mm.tau = tau;
  mm.method = method;
  mm.G = compute_G(model, tau);

  if (method != MomentMethod::kMonteCarlo) {
    if (method != model.moment_mode())
      throw ModeError(model.name() + ": moment method " +
                      moment_method_name(method) + " not supported (model is " +
                      moment_method_name(model.moment_mode()) + ")");
    Eigen::MatrixXd b(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = i; j < m; ++j) {
        const double v = model.moment(tau.points[i], tau.points[j]);
        b(i, j) = v;
        b(j, i) = v;
      }
    mm.B = SymMatrix(b);
    return mm;
  }

  if (mc_samples < 1000)
    throw ConfigError("compute_B: monte_carlo needs at least 1000 samples");
  if (mc_batches < 2) throw ConfigError("compute_B: need at least 2 batches");
  if (mc_samples % mc_batches != 0)
    throw ConfigError("compute_B: samples must be divisible by batches");
  const std::int64_t per_batch = mc_samples / mc_batches;

  std::vector<Eigen::MatrixXd> batch_means(mc_batches);
  run_chunked(threads, static_cast<std::size_t>(mc_batches), [&](std::size_t b) {
    const SampleBatch batch = model.sample(model.theta_true(), per_batch, seed,
                                           /*stream=*/b);
    Eigen::MatrixXd z(per_batch, m);
    model.pi_matrix(tau.points, batch, z);
    Eigen::MatrixXd bm(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = i; j < m; ++j) {
        const double v = kernels::dot(z.col(i).data(), z.col(j).data(),
                                      static_cast<std::size_t>(per_batch)) /
                         static_cast<double>(per_batch);
        bm(i, j) = v;
        bm(j, i) = v;
      }
    batch_means[b] = std::move(bm);
  });

  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(m, m);
  for (const Eigen::MatrixXd& bm : batch_means) mean += bm;
  mean /= static_cast<double>(mc_batches);
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(m, m);
  for (const Eigen::MatrixXd& bm : batch_means)
    var += (bm - mean).cwiseProduct(bm - mean);
  var /= static_cast<double>(mc_batches - 1);
  const Eigen::MatrixXd std_err =
      (var / static_cast<double>(mc_batches)).cwiseSqrt();

  if (!mean.allFinite())
    throw DiagnosticsError(
        "compute_B: Monte Carlo moment estimate overflowed; the pair is "
        "likely near the second-moment postulate boundary");

  // Project into the PSD cone: tiny negative eigenvalues (within 3 sigma of
  // the MC noise, or plain rounding) clip to zero, larger violations are a
  // diagnostics failure.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(mean));
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < 0.0) {
    const double allowance = 3.0 * std_err.maxCoeff() + 1e-12 * mean.norm();
    if (min_eig < -allowance)
      throw DiagnosticsError(
          "compute_B: Monte Carlo Gram estimate is indefinite beyond its own "
          "standard errors");
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    mean = es.eigenvectors() * clipped.asDiagonal() *
           es.eigenvectors().transpose();
  }

  mm.B = SymMatrix(symmetrized(mean));
  mm.mc_std_err = std_err;
  return mm;
}

BoundMatrix bound_V(const MomentMatrices& mm, const Tolerance& tol) {
  const SpdGate gate = gate_nonsingular(mm.B.mat(), tol, "bound_V: B");
  BoundMatrix out;
  out.spec.tau = mm.tau;
  out.condition_number = gate.condition_number;
  out.in_C_A = true;
  const Eigen::MatrixXd sol = mm.B.mat().ldlt().solve(mm.G.transpose());
  out.W = SymMatrix(symmetrized(mm.G * sol));
  return out;
}

BoundMatrix bound_W(const MomentMatrices& mm, const Eigen::MatrixXd& a,
                    const Tolerance& tol) {
  if (a.cols() != mm.B.dim())
    throw InvalidInputError("bound_W: A must have M columns");
  if (!a.allFinite()) throw InvalidInputError("bound_W: non-finite A");
  const Eigen::MatrixXd abat = symmetrized(a * mm.B.mat() * a.transpose());
  const SpdGate gate = gate_nonsingular(abat, tol, "bound_W: A B A^T");
  BoundMatrix out;
  out.spec.tau = mm.tau;
  out.spec.a_matrix = a;
  out.condition_number = gate.condition_number;
  out.in_C_A = true;
  const Eigen::MatrixXd gat = mm.G * a.transpose();
  const Eigen::MatrixXd sol = abat.ldlt().solve(gat.transpose());
  out.W = SymMatrix(symmetrized(gat * sol));
  return out;
}

Eigen::MatrixXd lambda0(const MomentMatrices& mm, const Eigen::MatrixXd& a,
                        const Tolerance& tol) {
  if (a.cols() != mm.B.dim())
    throw InvalidInputError("lambda0: A must have M columns");
  const Eigen::MatrixXd abat = symmetrized(a * mm.B.mat() * a.transpose());
  gate_nonsingular(abat, tol, "lambda0: A B A^T");
  const Eigen::MatrixXd gat = mm.G * a.transpose();
  return abat.ldlt().solve(gat.transpose()).transpose();
}

std::pair<std::vector<int>, MomentMatrices> deflate_dependent(
    const MomentMatrices& mm, const Tolerance& tol) {
  const Eigen::MatrixXd& b = mm.B.mat();
  if (!(b(0, 0) > 0.0))
    throw InvalidInputError("deflate_dependent: B(0,0) must be positive");

  const std::vector<int> kept = schur_independent_prefix(b, tol.rank_eps);

  MomentMatrices reduced;
  reduced.method = mm.method;
  reduced.tau = mm.tau.select(kept);
  const Eigen::Index r = static_cast<Eigen::Index>(kept.size());
  reduced.G.resize(mm.G.rows(), r);
  Eigen::MatrixXd rb(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    reduced.G.col(i) = mm.G.col(kept[i]);
    for (Eigen::Index j = 0; j < r; ++j) rb(i, j) = b(kept[i], kept[j]);
  }
  reduced.B = SymMatrix(rb);
  if (mm.mc_std_err) {
    Eigen::MatrixXd se(r, r);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j)
        se(i, j) = (*mm.mc_std_err)(kept[i], kept[j]);
    reduced.mc_std_err = se;
  }
  return {kept, reduced};
}

CompatibilityResult b0_compatibility_check(const MomentMatrices& mm,
                                           const Tolerance& tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mm.B.mat());
  if (es.info() != Eigen::Success)
    throw InvalidInputError("b0_compatibility_check: eigen-decomposition failed");
  const double emax = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
  const double gnorm = mm.G.norm();
  CompatibilityResult out;
  for (Eigen::Index i = 0; i < mm.B.dim(); ++i) {
    if (std::abs(es.eigenvalues()[i]) > tol.rank_eps * emax) continue;
    const Eigen::VectorXd a = es.eigenvectors().col(i);
    if ((mm.G * a).norm() > tol.psd_eps * gnorm) {
      out.compatible = false;
      out.witness = a;
      return out;
    }
  }
  return out;
}

SymMatrix crb_limit(const Model& model, double eps, MomentMethod method,
                    const Tolerance& tol) {
  if (!(eps > 0.0)) throw InvalidInputError("crb_limit: eps must be > 0");
  TestPointSet tau;
  tau.points.push_back(model.theta_true());
  for (Eigen::Index j = 0; j < model.param_dim(); ++j) {
    Eigen::VectorXd c = model.theta_true().coords;
    c[j] += eps;
    ParameterPoint p{c};
    model.require_in_domain(p);
    tau.points.push_back(std::move(p));
  }
  const MomentMatrices mm = compute_B(model, tau, method, 100000, 1);
  return bound_V(mm, tol).W;
}

SpanEstimator construct_estimator(std::shared_ptr<const Model> model,
                                  const MomentMatrices& mm,
                                  const Eigen::MatrixXd& a,
                                  const Tolerance& tol) {
  if (!model) throw InvalidInputError("construct_estimator: null model");
  const Eigen::MatrixXd l0 = lambda0(mm, a, tol);
  Eigen::VectorXd offset = model->target(model->theta_true());
  return SpanEstimator(std::move(model), mm.tau.points, l0 * a,
                       std::move(offset));
}

EfficiencyCertificate certify_efficiency(
    std::shared_ptr<const Model> model, const MomentMatrices& mm,
    const Eigen::MatrixXd& a, const std::vector<ParameterPoint>& probes,
    const CertifyConfig& cfg, const Tolerance& tol) {
  if (!model) throw InvalidInputError("certify_efficiency: null model");
  EfficiencyCertificate cert;
  const BoundMatrix wb = bound_W(mm, a, tol);
  cert.lambda0 = lambda0(mm, a, tol);
  const Eigen::MatrixXd coeff = cert.lambda0 * a;
  const Eigen::VectorXd g0 = model->target(model->theta_true());
  const SpanEstimator est(model, mm.tau.points, coeff, g0);

  const bool exact_moments =
      model->has_exact_moments() && mm.method != MomentMethod::kMonteCarlo;
  const bool use_exact_probes =
      cfg.probe_method == ProbeMethod::kExact ||
      (cfg.probe_method == ProbeMethod::kAuto && exact_moments);
  if (cfg.probe_method == ProbeMethod::kExact && !exact_moments)
    throw ConfigError("certify_efficiency: exact probes need exact moments");

  mc::McConfig mc_cfg;
  mc_cfg.samples = cfg.mc_samples;
  mc_cfg.seed = cfg.seed;
  mc_cfg.batches = cfg.mc_batches;
  mc_cfg.threads = cfg.threads;

  // residual: trace(E[phi phi^T] - W), zero when equality holds on the span
  if (exact_moments && model->moment_mode() == MomentMethod::kEnumeration) {
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(g0.size(), g0.size());
    for (const SupportAtom& atom : model->enumerate_support()) {
      const Eigen::VectorXd phi = est.evaluate(atom.x) - g0;
      second += atom.prob * phi * phi.transpose();
    }
    cert.residual_trace = (second - wb.W.mat()).trace();
  } else if (exact_moments) {
    const Eigen::MatrixXd second =
        coeff * mm.B.mat() * coeff.transpose();
    cert.residual_trace = (second - wb.W.mat()).trace();
  } else {
    const mc::McEstimate cov = mc::empirical_cov(est, *model, mc_cfg);
    cert.residual_trace = cov.value.trace() - wb.W.mat().trace();
    cert.residual_std_err = cov.std_err.trace();
  }

  const double w_scale = 1.0 + wb.W.mat().trace();
  bool residual_fail;
  if (cert.residual_std_err)
    residual_fail = std::abs(cert.residual_trace) -
                        4.0 * (*cert.residual_std_err) >
                    cfg.certify_tol * w_scale;
  else
    residual_fail = std::abs(cert.residual_trace) > cfg.certify_tol * w_scale;

  for (const ParameterPoint& theta : probes) {
    ProbeResult pr;
    pr.theta = theta;
    bool exact_probe = use_exact_probes;
    if (exact_probe) {
      try {
        Eigen::VectorXd moments(static_cast<Eigen::Index>(mm.tau.size()));
        for (std::size_t i = 0; i < mm.tau.size(); ++i)
          moments[static_cast<Eigen::Index>(i)] =
              model->moment(mm.tau.points[i], theta);
        pr.bias = coeff * moments - model->target_increment(theta);
      } catch (const PostulateViolationError&) {
        exact_probe = false;  // moment blew up; sample the bias instead
      }
    }
    if (!exact_probe) {
      const mc::McEstimate b = mc::empirical_bias(est, *model, theta, mc_cfg);
      pr.bias = b.value.col(0);
      pr.std_err = b.std_err.col(0);
    }
    const double probe_scale =
        1.0 + model->target(theta).cwiseAbs().maxCoeff();
    if (pr.std_err) {
      pr.decisive_fail =
          ((pr.bias.cwiseAbs() - 4.0 * (*pr.std_err)).array() >
           cfg.certify_tol * probe_scale)
              .any();
      pr.inconclusive = !pr.decisive_fail &&
                        pr.std_err->maxCoeff() > cfg.certify_tol * probe_scale;
    } else {
      pr.decisive_fail =
          pr.bias.cwiseAbs().maxCoeff() > cfg.certify_tol * probe_scale;
    }
    cert.probes.push_back(std::move(pr));
  }

  bool any_fail = residual_fail;
  bool any_inconclusive = cert.residual_std_err.has_value();
  for (const ProbeResult& pr : cert.probes) {
    any_fail = any_fail || pr.decisive_fail;
    any_inconclusive = any_inconclusive || pr.inconclusive;
  }
  if (any_fail)
    cert.verdict = CertVerdict::kNotAttained;
  else if (probes.empty() || any_inconclusive)
    cert.verdict = CertVerdict::kInconclusive;
  else
    cert.verdict = CertVerdict::kAttainedOnSpan;

  if (wb.W.mat().trace() <= 1e-12 * (1.0 + g0.squaredNorm()))
    cert.notes.push_back(
        "bound is numerically zero; the candidate estimator is near-constant "
        "and the certificate carries no information about other targets");
  return cert;
}

namespace {

struct CandidateScore {
  bool valid = false;
  double trace = -std::numeric_limits<double>::infinity();
  double lambda_max = 0.0;
  std::string prune_reason;
  bool incompatible = false;
  std::optional<Eigen::VectorXd> incompat_witness;
};

CandidateScore score_candidate(const Model& model, const TestPointSet& tau,
                               const ParameterPoint& cand,
                               const SearchConfig& cfg) {
  CandidateScore s;
  TestPointSet trial = tau;
  trial.points.push_back(cand);
  try {
    const MomentMatrices mm =
        compute_B(model, trial, cfg.method, cfg.mc_samples, cfg.seed,
                  cfg.mc_batches, /*threads=*/1);
    const auto [kept, reduced] = deflate_dependent(mm, cfg.tol);
    // Flag incompatibility only on machine-exact dependence with exact
    // moments; near-dependence of a smooth family is mere ill-conditioning
    // and says nothing about the target.
    if (kept.size() < trial.size() &&
        mm.method != MomentMethod::kMonteCarlo &&
        schur_independent_prefix(mm.B.mat(), 1e-14).size() < trial.size()) {
      const CompatibilityResult comp = b0_compatibility_check(mm, cfg.tol);
      if (!comp.compatible) {
        s.incompatible = true;
        s.incompat_witness = comp.witness;
      }
    }
    const BoundMatrix v = bound_V(reduced, cfg.tol);
    s.valid = true;
    s.trace = v.W.trace();
    s.lambda_max = lambda_max(v.W);
  } catch (const PostulateViolationError& e) {
    s.prune_reason = e.what();
  } catch (const RankDeficiencyError&) {
    // fully dependent candidate adds nothing
  }
  return s;
}

}  // namespace

SearchReport search_msup(const Model& model, const SearchConfig& config) {
  const Eigen::Index k = model.param_dim();
  Eigen::VectorXd lo = config.grid_lo, hi = config.grid_hi;
  if (lo.size() == 0 || hi.size() == 0) {
    lo.resize(k);
    hi.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      lo[j] = model.domain()[j].lo;
      hi[j] = model.domain()[j].hi;
    }
  }
  if (lo.size() != k || hi.size() != k)
    throw ConfigError("search_msup: grid bounds must match the parameter dimension");
  if (config.grid_points < 2) throw ConfigError("search_msup: grid_points < 2");

  // Cartesian grid over the box.
  std::vector<ParameterPoint> grid;
  {
    double total = 1;
    for (Eigen::Index j = 0; j < k; ++j) total *= config.grid_points;
    if (total > 1e5)
      throw ConfigError("search_msup: grid too large; reduce grid_points");
    std::vector<int> idx(k, 0);
    const int n = config.grid_points;
    while (true) {
      Eigen::VectorXd c(k);
      for (Eigen::Index j = 0; j < k; ++j)
        c[j] = lo[j] + (hi[j] - lo[j]) * idx[j] / double(n - 1);
      grid.emplace_back(c);
      Eigen::Index j = 0;
      for (; j < k; ++j) {
        if (++idx[j] < n) break;
        idx[j] = 0;
      }
      if (j == k) break;
    }
  }

  SearchReport report;
  report.divergence_threshold = config.divergence_threshold.value_or([&] {
    try {
      const MomentMethod m = model.has_exact_moments()
                                 ? model.moment_mode()
                                 : MomentMethod::kMonteCarlo;
      return 1e3 * crb_limit(model, 1e-3, m, config.tol).trace();
    } catch (const Error&) {
      return 1e9;  // no usable CRB scale for this model
    }
  }());

  TestPointSet tau;
  tau.points.push_back(model.theta_true());

  auto evaluate_current = [&](const TestPointSet& t) {
    MomentMatrices raw = compute_B(model, t, config.method, config.mc_samples,
                                   config.seed, config.mc_batches,
                                   config.threads);
    auto [kept, reduced] = deflate_dependent(raw, config.tol);
    if (kept.size() < t.size() && raw.method != MomentMethod::kMonteCarlo &&
        schur_independent_prefix(raw.B.mat(), 1e-14).size() < t.size()) {
      const CompatibilityResult comp = b0_compatibility_check(raw, config.tol);
      if (!comp.compatible && !report.incompatible_target) {
        report.incompatible_target = true;
        report.incompatibility_witness = comp.witness;
      }
    }
    BoundMatrix v = bound_V(reduced, config.tol);
    return std::make_pair(std::move(reduced), std::move(v));
  };

  auto [cur_mm, cur_v] = evaluate_current(tau);
  double cur_trace = cur_v.W.trace();
  double cur_lmax = lambda_max(cur_v.W);
  report.k_witness = cur_lmax;
  report.iterations.push_back(
      {0, tau, model.theta_true(), cur_trace, cur_lmax});

  int accepted = 0;
  int stall_count = 0;
  report.stop_reason = "budget_exhausted";
  report.boundedness = Boundedness::kBoundedEvidence;

  for (int round = 0; accepted < config.budget; ++round) {
    // candidate pool: fixed grid plus shrinking local proposals
    std::vector<ParameterPoint> candidates = grid;
    {
      rng::Stream rs(config.seed, rng::mix(0x70726F70ull, round));
      const double scale =
          config.proposal_scale * std::ldexp(1.0, -round);
      for (int p = 0; p < config.proposals_per_round; ++p) {
        const ParameterPoint& base =
            tau.points[static_cast<std::size_t>(p) % tau.size()];
        Eigen::VectorXd c(k);
        for (Eigen::Index j = 0; j < k; ++j) {
          const double u = 2.0 * rs.uniform() - 1.0;
          c[j] = std::clamp(base[j] + scale * (hi[j] - lo[j]) * u, lo[j],
                            hi[j]);
        }
        candidates.emplace_back(c);
      }
    }
    // drop exact duplicates of accepted points
    std::erase_if(candidates, [&](const ParameterPoint& c) {
      for (const ParameterPoint& p : tau.points)
        if (p.coords == c.coords) return true;
      return false;
    });
    if (candidates.empty()) {
      report.stop_reason = "stalled";
      break;
    }

    std::vector<CandidateScore> scores(candidates.size());
    run_chunked(config.threads, candidates.size(), [&](std::size_t i) {
      scores[i] = score_candidate(model, tau, candidates[i], config);
    });

    std::size_t best = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (scores[i].incompatible && !report.incompatible_target) {
        report.incompatible_target = true;
        report.incompatibility_witness = scores[i].incompat_witness;
      }
      if (!scores[i].valid) {
        if (!scores[i].prune_reason.empty())
          report.pruned.push_back({candidates[i], scores[i].prune_reason});
        continue;
      }
      if (best == candidates.size() || scores[i].trace > scores[best].trace)
        best = i;
    }
    if (best == candidates.size()) {
      report.stop_reason = "stalled";
      break;
    }

    const double gain = scores[best].trace - cur_trace;
    const double rel_gain = gain / std::max(cur_trace, 1e-300);
    if (!(rel_gain >= config.stall_tol)) {
      if (++stall_count >= config.patience) {
        report.stop_reason = "stalled";
        break;
      }
      continue;
    }
    stall_count = 0;

    tau.points.push_back(candidates[best]);
    std::tie(cur_mm, cur_v) = evaluate_current(tau);
    cur_trace = cur_v.W.trace();
    cur_lmax = lambda_max(cur_v.W);
    ++accepted;
    report.k_witness = std::max(report.k_witness, cur_lmax);
    report.iterations.push_back({accepted, tau, candidates[best], cur_trace,
                                 cur_lmax});
    if (cur_lmax > report.divergence_threshold) {
      report.boundedness = Boundedness::kDivergenceDetected;
      report.stop_reason = "divergence";
      break;
    }
  }

  report.tau = tau;
  report.best_mm = std::move(cur_mm);
  report.best = std::move(cur_v);
  return report;
}

}  // namespace barankin
