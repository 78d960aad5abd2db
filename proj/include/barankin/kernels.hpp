#pragma once

#include <cstddef>

namespace barankin::kernels {

// Data-parallel inner-loop kernels used by the Monte Carlo paths.
// A scalar reference implementation always exists; on x86-64 an AVX2+FMA
// variant is selected at runtime when the CPU supports it. The two lanes are
// equivalence-tested against each other (exp to <= 1e-14 relative, reductions
// to summation-order rounding).

enum class Lane { kScalar, kAvx2 };

const char* lane_name(Lane lane);
bool lane_available(Lane lane);

// Lane in effect for the dispatched entry points below. Resolved once at
// first use: AVX2 when compiled in and supported by the CPU, else scalar.
// BARANKIN_LANE=scalar|avx2 in the environment overrides the default.
Lane active_lane();

// Force a lane (tests). Throws InvalidInputError if unavailable.
void set_lane(Lane lane);

double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);

// x[i] <- exp(x[i]). Overflow saturates to +inf, arguments below the double
// underflow threshold flush to +0, NaN propagates.
void exp_inplace(double* x, std::size_t n);

// out[i] = exp(a * s[i] + b); the likelihood-ratio evaluation kernel.
void exp_affine(double* out, const double* s, double a, double b,
                std::size_t n);

// Scalar reference lane, callable directly (oracles for equivalence tests).
namespace ref {
double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void exp_inplace(double* x, std::size_t n);
void exp_affine(double* out, const double* s, double a, double b,
                std::size_t n);
}  // namespace ref

}  // namespace barankin::kernels
