#include "barankin/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <mutex>

#include "barankin/errors.hpp"

namespace barankin::kernels {

namespace ref {

double sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void exp_inplace(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(x[i]);
}

void exp_affine(double* out, const double* s, double a, double b,
                std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a * s[i] + b);
}

}  // namespace ref

#if defined(BARANKIN_BUILD_AVX2)
namespace avx2 {
double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void exp_inplace(double* x, std::size_t n);
void exp_affine(double* out, const double* s, double a, double b,
                std::size_t n);
}  // namespace avx2
#endif

namespace {

struct Table {
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  void (*exp_inplace)(double*, std::size_t);
  void (*exp_affine)(double*, const double*, double, double, std::size_t);
};

constexpr Table kScalarTable{ref::sum, ref::dot, ref::exp_inplace,
                             ref::exp_affine};

#if defined(BARANKIN_BUILD_AVX2)
constexpr Table kAvx2Table{avx2::sum, avx2::dot, avx2::exp_inplace,
                           avx2::exp_affine};
#endif

bool cpu_supports_avx2() {
#if defined(BARANKIN_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

struct State {
  Lane lane;
  const Table* table;
};

State g_state{Lane::kScalar, &kScalarTable};
std::once_flag g_init_once;

void init_state() {
  Lane lane = lane_available(Lane::kAvx2) ? Lane::kAvx2 : Lane::kScalar;
  if (const char* env = std::getenv("BARANKIN_LANE")) {
    if (std::strcmp(env, "scalar") == 0) lane = Lane::kScalar;
    if (std::strcmp(env, "avx2") == 0 && lane_available(Lane::kAvx2))
      lane = Lane::kAvx2;
  }
  g_state.lane = lane;
#if defined(BARANKIN_BUILD_AVX2)
  g_state.table = (lane == Lane::kAvx2) ? &kAvx2Table : &kScalarTable;
#else
  g_state.table = &kScalarTable;
#endif
}

const State& state() {
  std::call_once(g_init_once, init_state);
  return g_state;
}

}  // namespace

const char* lane_name(Lane lane) {
  return lane == Lane::kAvx2 ? "avx2" : "scalar";
}

bool lane_available(Lane lane) {
  if (lane == Lane::kScalar) return true;
  return cpu_supports_avx2();
}

Lane active_lane() { return state().lane; }

void set_lane(Lane lane) {
  if (!lane_available(lane))
    throw InvalidInputError("kernel lane not available on this CPU: " +
                            std::string(lane_name(lane)));
  std::call_once(g_init_once, init_state);
  g_state.lane = lane;
#if defined(BARANKIN_BUILD_AVX2)
  g_state.table = (lane == Lane::kAvx2) ? &kAvx2Table : &kScalarTable;
#else
  g_state.table = &kScalarTable;
#endif
}

double sum(const double* x, std::size_t n) { return state().table->sum(x, n); }

double dot(const double* x, const double* y, std::size_t n) {
  return state().table->dot(x, y, n);
}

void exp_inplace(double* x, std::size_t n) { state().table->exp_inplace(x, n); }

void exp_affine(double* out, const double* s, double a, double b,
                std::size_t n) {
  state().table->exp_affine(out, s, a, b, n);
}

}  // namespace barankin::kernels
