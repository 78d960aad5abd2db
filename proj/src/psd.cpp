#include "barankin/psd.hpp"

#include <algorithm>
#include <cmath>

namespace barankin {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite())
    throw InvalidInputError(std::string(what) + ": non-finite entries");
}

Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw InvalidInputError("symmetric eigen-decomposition failed");
  return es.eigenvalues();
}

// Solves M * X = RHS for symmetric positive (semi)definite M, after gating
// the relative spectrum against rank_eps. Returns the solution and the
// condition number of M.
struct GatedSolve {
  Eigen::MatrixXd solution;
  double condition_number;
};

GatedSolve gated_spd_solve(const Eigen::MatrixXd& m, const Eigen::MatrixXd& rhs,
                           const Tolerance& tol, const char* label) {
  const Eigen::VectorXd ev = sym_eigenvalues(m);
  const double emax = ev.cwiseAbs().maxCoeff();
  const double emin = ev.cwiseAbs().minCoeff();
  if (emax <= 0.0 || emin <= tol.rank_eps * emax)
    throw RankDeficiencyError(std::string(label) +
                              ": matrix singular within rank tolerance");
  GatedSolve out;
  out.condition_number = emax / emin;
  out.solution = m.ldlt().solve(rhs);
  return out;
}

}  // namespace

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols())
    throw InvalidInputError("SymMatrix: matrix not square");
  require_finite(m, "SymMatrix");
  const double scale = std::max(1.0, m.norm());
  const double asym = (m - m.transpose()).norm();
  if (asym > 1e-8 * scale)
    throw InvalidInputError("SymMatrix: relative asymmetry above 1e-8");
  mat_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::Identity(Eigen::Index n) {
  return SymMatrix(Eigen::MatrixXd::Identity(n, n));
}

SymMatrix SymMatrix::Zero(Eigen::Index n) {
  return SymMatrix(Eigen::MatrixXd::Zero(n, n));
}

SymMatrix SymMatrix::FromDiagonal(const Eigen::VectorXd& d) {
  return SymMatrix(Eigen::MatrixXd(d.asDiagonal()));
}

const char* loewner_order_name(LoewnerOrder o) {
  switch (o) {
    case LoewnerOrder::kGreaterEqual:
      return "GreaterEqual";
    case LoewnerOrder::kLessEqual:
      return "LessEqual";
    case LoewnerOrder::kEqual:
      return "Equal";
    case LoewnerOrder::kIncomparable:
      return "Incomparable";
  }
  return "?";
}

bool is_snnd(const SymMatrix& s, const Tolerance& tol) {
  if (s.dim() == 0) return true;
  const double lmin = sym_eigenvalues(s.mat()).minCoeff();
  return lmin >= -tol.psd_eps * (1.0 + s.frobenius());
}

double lambda_min(const SymMatrix& s) {
  if (s.dim() == 0) throw InvalidInputError("lambda_min: empty matrix");
  return sym_eigenvalues(s.mat()).minCoeff();
}

double lambda_max(const SymMatrix& s) {
  if (s.dim() == 0) throw InvalidInputError("lambda_max: empty matrix");
  return sym_eigenvalues(s.mat()).maxCoeff();
}

LoewnerVerdict loewner_compare(const SymMatrix& x, const SymMatrix& y,
                               const Tolerance& tol) {
  if (x.dim() != y.dim())
    throw InvalidInputError("loewner_compare: dimension mismatch");
  const Eigen::MatrixXd d = x.mat() - y.mat();
  const Eigen::VectorXd ev = sym_eigenvalues(d);
  LoewnerVerdict v;
  v.lambda_min = ev.minCoeff();
  v.lambda_max = ev.maxCoeff();
  const double slack =
      tol.psd_eps * (1.0 + std::max(x.frobenius(), y.frobenius()));
  const bool ge = v.lambda_min >= -slack;
  const bool le = v.lambda_max <= slack;
  if ((ge && le) || d.norm() <= tol.psd_eps * (1.0 + x.frobenius()))
    v.order = LoewnerOrder::kEqual;
  else if (ge)
    v.order = LoewnerOrder::kGreaterEqual;
  else if (le)
    v.order = LoewnerOrder::kLessEqual;
  else
    v.order = LoewnerOrder::kIncomparable;
  return v;
}

bool k_identity_dominates(double k, const SymMatrix& x, const Tolerance& tol) {
  if (!std::isfinite(k)) throw InvalidInputError("k_identity_dominates: K not finite");
  if (!is_snnd(x, tol))
    throw InvalidInputError("k_identity_dominates: X is not s.n.n.d.");
  const Eigen::MatrixXd kid =
      k * Eigen::MatrixXd::Identity(x.dim(), x.dim());
  return is_snnd(SymMatrix(kid - x.mat()), tol);
}

CauchySchwarzResult weighted_cauchy_schwarz(const Eigen::MatrixXd& x,
                                            const Eigen::MatrixXd& y,
                                            const SymMatrix& h,
                                            const Tolerance& tol) {
  if (x.cols() != h.dim() || y.cols() != h.dim())
    throw InvalidInputError("weighted_cauchy_schwarz: column counts must match H");
  require_finite(x, "weighted_cauchy_schwarz X");
  require_finite(y, "weighted_cauchy_schwarz Y");

  const Eigen::MatrixXd xh = x * h.mat();             // N x M
  const Eigen::MatrixXd yh = y * h.mat();             // P x M
  const Eigen::MatrixXd yhyt = yh * y.transpose();    // P x P

  // (Y H Y^T)^{-1} Y H, gated on the spectrum of Y H Y^T
  const GatedSolve solve =
      gated_spd_solve(yhyt, yh, tol, "weighted_cauchy_schwarz");
  const Eigen::MatrixXd proj = solve.solution;        // P x M

  CauchySchwarzResult out;
  out.lhs = SymMatrix(xh * x.transpose());
  const Eigen::MatrixXd xhyt = xh * y.transpose();    // N x P
  Eigen::MatrixXd rhs = xhyt * proj * x.transpose();
  out.rhs = SymMatrix(0.5 * (rhs + rhs.transpose()));
  out.gap_is_snnd =
      is_snnd(SymMatrix(out.lhs.mat() - out.rhs.mat()), tol);
  // equality iff X lies in the row space of Y: X = X H Y^T (Y H Y^T)^{-1} Y
  const Eigen::MatrixXd row_proj = yhyt.ldlt().solve(y);
  const double resid = (x - xhyt * row_proj).norm();
  out.equality = resid <= tol.psd_eps * (1.0 + x.norm());
  return out;
}

RayleighResult rayleigh_reduction(const Eigen::MatrixXd& g, const SymMatrix& b,
                                  const Eigen::MatrixXd& a,
                                  const Tolerance& tol) {
  if (g.cols() != b.dim() || a.cols() != b.dim())
    throw InvalidInputError("rayleigh_reduction: column counts must match B");
  require_finite(g, "rayleigh_reduction G");
  require_finite(a, "rayleigh_reduction A");

  const GatedSolve binv_gt =
      gated_spd_solve(b.mat(), g.transpose(), tol, "rayleigh_reduction B");
  RayleighResult out;
  Eigen::MatrixXd v = g * binv_gt.solution;
  out.v = SymMatrix(0.5 * (v + v.transpose()));

  const Eigen::MatrixXd abat = a * b.mat() * a.transpose();
  const Eigen::MatrixXd gat = g * a.transpose();
  const GatedSolve inner = gated_spd_solve(abat, gat.transpose(), tol,
                                           "rayleigh_reduction A*B*A^T");
  Eigen::MatrixXd w = gat * inner.solution;
  out.w = SymMatrix(0.5 * (w + w.transpose()));
  out.dominance = loewner_compare(out.v, out.w, tol);
  return out;
}

bool psd_limit_check(const std::vector<SymMatrix>& seq, const Tolerance& tol) {
  if (seq.empty()) throw InvalidInputError("psd_limit_check: empty sequence");
  const Eigen::Index n = seq.front().dim();
  for (const SymMatrix& s : seq)
    if (s.dim() != n)
      throw InvalidInputError("psd_limit_check: dimension mismatch in sequence");
  return is_snnd(seq.back(), tol);
}

}  // namespace barankin
