#pragma once

#include <Eigen/Dense>
#include <vector>

#include "barankin/errors.hpp"

namespace barankin {

// Numerical slack for decisions the underlying theory states exactly.
// psd_eps scales eigenvalue tests as psd_eps*(1+||.||_F); rank_eps is a
// relative singular-value cutoff standing in for det != 0.
struct Tolerance {
  double psd_eps = 1e-9;
  double rank_eps = 1e-10;
};

// Dense real symmetric matrix. Inputs are symmetrized as (S+S^T)/2 on
// construction; relative asymmetry above 1e-8 or any non-finite entry is an
// error. Immutable after construction.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Eigen::MatrixXd& m);

  static SymMatrix Identity(Eigen::Index n);
  static SymMatrix Zero(Eigen::Index n);
  static SymMatrix FromDiagonal(const Eigen::VectorXd& d);

  Eigen::Index dim() const { return mat_.rows(); }
  const Eigen::MatrixXd& mat() const { return mat_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return mat_(i, j); }
  double frobenius() const { return mat_.norm(); }
  double trace() const { return mat_.trace(); }

 private:
  Eigen::MatrixXd mat_;
};

enum class LoewnerOrder { kGreaterEqual, kLessEqual, kEqual, kIncomparable };

const char* loewner_order_name(LoewnerOrder o);

// Classification of X - Y with the extremal eigenvalues of the difference as
// witness.
struct LoewnerVerdict {
  LoewnerOrder order = LoewnerOrder::kIncomparable;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

// min eigenvalue of S >= -psd_eps*(1+||S||_F)?
bool is_snnd(const SymMatrix& s, const Tolerance& tol);

// Smallest / largest eigenvalues (dense symmetric solver).
double lambda_min(const SymMatrix& s);
double lambda_max(const SymMatrix& s);

LoewnerVerdict loewner_compare(const SymMatrix& x, const SymMatrix& y,
                               const Tolerance& tol);

// K*I >= X in the Loewner order; X must be s.n.n.d. Agrees with
// loewner_compare(K*I, X) by construction.
bool k_identity_dominates(double k, const SymMatrix& x, const Tolerance& tol);

struct CauchySchwarzResult {
  SymMatrix lhs;   // X H X^T
  SymMatrix rhs;   // X H Y^T (Y H Y^T)^{-1} Y H X^T
  bool gap_is_snnd = false;
  bool equality = false;
};

// Weighted matrix Cauchy-Schwarz LMI: lhs >= rhs, equality iff X = Lambda*Y
// for some Lambda, detected via the projection residual.
CauchySchwarzResult weighted_cauchy_schwarz(const Eigen::MatrixXd& x,
                                            const Eigen::MatrixXd& y,
                                            const SymMatrix& h,
                                            const Tolerance& tol);

struct RayleighResult {
  SymMatrix v;  // G B^{-1} G^T
  SymMatrix w;  // G A^T (A B A^T)^{-1} A G^T
  LoewnerVerdict dominance;
};

// LMI generalization of the Rayleigh quotient: V >= W for every selector A
// with A B A^T nonsingular.
RayleighResult rayleigh_reduction(const Eigen::MatrixXd& g, const SymMatrix& b,
                                  const Eigen::MatrixXd& a,
                                  const Tolerance& tol);

// Treats the last element as the limit proxy of a convergent s.n.n.d.
// sequence and checks it stayed in the cone.
bool psd_limit_check(const std::vector<SymMatrix>& seq, const Tolerance& tol);

}  // namespace barankin
