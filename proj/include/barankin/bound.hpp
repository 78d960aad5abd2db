#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "barankin/estimator.hpp"
#include "barankin/model.hpp"
#include "barankin/psd.hpp"

namespace barankin {

// Ordered list of test points tau = (theta_1, ..., theta_M), M >= 1.
struct TestPointSet {
  std::vector<ParameterPoint> points;

  TestPointSet() = default;
  explicit TestPointSet(std::vector<ParameterPoint> p) : points(std::move(p)) {}
  static TestPointSet scalars(std::initializer_list<double> vals);

  std::size_t size() const { return points.size(); }
  TestPointSet select(const std::vector<int>& indices) const;
};

// (tau, optional A). A absent means A = identity, giving the V(d) bound.
struct BoundSpec {
  TestPointSet tau;
  std::optional<Eigen::MatrixXd> a_matrix;
};

// G(tau) (d_g x M target increments) and B(tau) (M x M Gram matrix of the
// likelihood ratios) with provenance.
struct MomentMatrices {
  Eigen::MatrixXd G;
  SymMatrix B;
  MomentMethod method = MomentMethod::kClosedForm;
  std::optional<Eigen::MatrixXd> mc_std_err;  // entrywise, M x M
  TestPointSet tau;
};

struct BoundMatrix {
  SymMatrix W;
  BoundSpec spec;
  double condition_number = 0.0;
  bool in_C_A = false;
};

enum class CertVerdict { kAttainedOnSpan, kNotAttained, kInconclusive };
const char* cert_verdict_name(CertVerdict v);

struct ProbeResult {
  ParameterPoint theta;
  Eigen::VectorXd bias;
  std::optional<Eigen::VectorXd> std_err;  // present for MC probes
  bool decisive_fail = false;
  bool inconclusive = false;
};

struct EfficiencyCertificate {
  Eigen::MatrixXd lambda0;  // d_g x d_A
  double residual_trace = 0.0;
  std::optional<double> residual_std_err;
  std::vector<ProbeResult> probes;
  CertVerdict verdict = CertVerdict::kInconclusive;
  std::vector<std::string> notes;
};

enum class Boundedness { kBoundedEvidence, kDivergenceDetected };
const char* boundedness_name(Boundedness b);

struct SearchIteration {
  int index = 0;
  TestPointSet tau;       // accepted set at this iteration
  ParameterPoint added;
  double trace = 0.0;
  double lambda_max = 0.0;
};

struct SearchConfig {
  Eigen::VectorXd grid_lo;  // per parameter coordinate; empty = model domain
  Eigen::VectorXd grid_hi;
  int grid_points = 33;     // per coordinate
  int budget = 16;          // max accepted points beyond theta_true
  double stall_tol = 1e-6;  // relative trace gain considered a stall
  int patience = 3;         // consecutive stalled rounds before stopping
  std::optional<double> divergence_threshold;  // default 1e3 * trace(CRB)
  int proposals_per_round = 8;
  double proposal_scale = 0.25;  // in units of the grid width, halved per round
  MomentMethod method = MomentMethod::kClosedForm;
  std::int64_t mc_samples = 100000;
  int mc_batches = 32;
  std::uint64_t seed = 1;
  int threads = 1;
  Tolerance tol;
};

struct PrunedCandidate {
  ParameterPoint point;
  std::string reason;
};

struct SearchReport {
  std::vector<SearchIteration> iterations;
  TestPointSet tau;             // final accepted set (includes theta_true)
  BoundMatrix best;             // V of the final deflated set
  MomentMatrices best_mm;       // deflated moment matrices behind `best`
  Boundedness boundedness = Boundedness::kBoundedEvidence;
  std::string stop_reason;      // "stalled" | "budget_exhausted" | "divergence"
  double k_witness = 0.0;       // max lambda_max over visited bounds
  double divergence_threshold = 0.0;
  bool incompatible_target = false;
  std::optional<Eigen::VectorXd> incompatibility_witness;
  std::vector<PrunedCandidate> pruned;
};

// --- moment matrices ---------------------------------------------------

// Column i = g(theta_i) - g(theta_T).
Eigen::MatrixXd compute_G(const Model& model, const TestPointSet& tau);

// B_ij = E[pi(theta_i) pi(theta_j)], exact for closed-form/enumeration
// methods, batch-mean Monte Carlo with per-entry standard errors otherwise.
MomentMatrices compute_B(const Model& model, const TestPointSet& tau,
                         MomentMethod method, std::int64_t mc_samples = 0,
                         std::uint64_t seed = 0, int mc_batches = 32,
                         int threads = 1);

// --- bounds -------------------------------------------------------------

BoundMatrix bound_V(const MomentMatrices& mm, const Tolerance& tol);
BoundMatrix bound_W(const MomentMatrices& mm, const Eigen::MatrixXd& a,
                    const Tolerance& tol);

// Lambda0 = G A^T (A B A^T)^{-1}; satisfies W = Lambda0 (A B A^T) Lambda0^T.
Eigen::MatrixXd lambda0(const MomentMatrices& mm, const Eigen::MatrixXd& a,
                        const Tolerance& tol);

// Greedy left-to-right elimination of likelihood ratios that are linear
// combinations of earlier ones (Schur-complement test per index). The first
// index is always kept.
std::pair<std::vector<int>, MomentMatrices> deflate_dependent(
    const MomentMatrices& mm, const Tolerance& tol);

struct CompatibilityResult {
  bool compatible = true;
  std::optional<Eigen::VectorXd> witness;  // unit null vector a with G a != 0
};

// For every null vector a of B: a combination of likelihood ratios that
// vanishes must take the target increments to zero too; otherwise no
// unbiased estimator exists.
CompatibilityResult b0_compatibility_check(const MomentMatrices& mm,
                                           const Tolerance& tol);

// bound_V on tau = (theta_T, theta_T + eps*e_j for each coordinate j); the
// eps -> 0 limit is the Cramer-Rao matrix.
SymMatrix crb_limit(const Model& model, double eps, MomentMethod method,
                    const Tolerance& tol = {});

// Greedy test-point accretion maximizing trace(bound_V) after deflation.
SearchReport search_msup(const Model& model, const SearchConfig& config);

// psi(x) = g(theta_T) + Lambda0 A beta(tau; x).
SpanEstimator construct_estimator(std::shared_ptr<const Model> model,
                                  const MomentMatrices& mm,
                                  const Eigen::MatrixXd& a,
                                  const Tolerance& tol);

enum class ProbeMethod { kAuto, kExact, kMonteCarlo };

struct CertifyConfig {
  ProbeMethod probe_method = ProbeMethod::kAuto;
  std::int64_t mc_samples = 100000;
  int mc_batches = 32;
  std::uint64_t seed = 1;
  int threads = 1;
  double certify_tol = 1e-9;
};

EfficiencyCertificate certify_efficiency(std::shared_ptr<const Model> model,
                                         const MomentMatrices& mm,
                                         const Eigen::MatrixXd& a,
                                         const std::vector<ParameterPoint>& probes,
                                         const CertifyConfig& cfg,
                                         const Tolerance& tol);

}  // namespace barankin
