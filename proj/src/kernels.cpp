#include "advq/kernels.hpp"

#include "advq/error.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace advq::kernels {

namespace detail {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s0 = 0.0, s1 = 0.0;
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) {
    s0 += x[i] * y[i];
    s1 += x[i + 1] * y[i + 1];
  }
  if (i < n) s0 += x[i] * y[i];
  return s0 + s1;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double nrm2sq_scalar(const double* x, std::size_t n) {
  return dot_scalar(x, x, n);
}

void rot_scalar(double* x, double* y, std::size_t n, double c, double s) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi + s * yi;
    y[i] = -s * xi + c * yi;
  }
}

} // namespace detail

#if defined(__x86_64__) || defined(_M_X64)
#define ADVQ_HAVE_AVX2_BUILD 1
double dot_avx2(const double* x, const double* y, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
void scal_avx2(double a, double* x, std::size_t n);
double nrm2sq_avx2(const double* x, std::size_t n);
void rot_avx2(double* x, double* y, std::size_t n, double c, double s);
#endif

#if defined(__aarch64__)
#define ADVQ_HAVE_NEON_BUILD 1
double dot_neon(const double* x, const double* y, std::size_t n);
void axpy_neon(double a, const double* x, double* y, std::size_t n);
void scal_neon(double a, double* x, std::size_t n);
double nrm2sq_neon(const double* x, std::size_t n);
void rot_neon(double* x, double* y, std::size_t n, double c, double s);
#endif

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  double (*nrm2sq)(const double*, std::size_t);
  void (*rot)(double*, double*, std::size_t, double, double);
  Lane lane;
};

constexpr Table kScalarTable{detail::dot_scalar, detail::axpy_scalar,
                             detail::scal_scalar, detail::nrm2sq_scalar,
                             detail::rot_scalar, Lane::Scalar};

Table make_table(Lane lane) {
  switch (lane) {
    case Lane::Scalar:
      return kScalarTable;
#ifdef ADVQ_HAVE_AVX2_BUILD
    case Lane::Avx2:
      return Table{dot_avx2, axpy_avx2, scal_avx2, nrm2sq_avx2, rot_avx2,
                   Lane::Avx2};
#endif
#ifdef ADVQ_HAVE_NEON_BUILD
    case Lane::Neon:
      return Table{dot_neon, axpy_neon, scal_neon, nrm2sq_neon, rot_neon,
                   Lane::Neon};
#endif
    default:
      return kScalarTable;
  }
}

Lane detect_lane() {
  if (const char* env = std::getenv("ADVQ_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Lane::Scalar;
    if (std::strcmp(env, "avx2") == 0 && lane_supported(Lane::Avx2))
      return Lane::Avx2;
    if (std::strcmp(env, "neon") == 0 && lane_supported(Lane::Neon))
      return Lane::Neon;
    return Lane::Scalar;
  }
  if (lane_supported(Lane::Avx2)) return Lane::Avx2;
  if (lane_supported(Lane::Neon)) return Lane::Neon;
  return Lane::Scalar;
}

Table g_table = make_table(detect_lane());

} // namespace

bool lane_supported(Lane lane) {
  switch (lane) {
    case Lane::Scalar:
      return true;
    case Lane::Avx2:
#ifdef ADVQ_HAVE_AVX2_BUILD
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Lane::Neon:
#ifdef ADVQ_HAVE_NEON_BUILD
      return true;
#else
      return false;
#endif
  }
  return false;
}

const char* lane_name(Lane lane) {
  switch (lane) {
    case Lane::Scalar:
      return "scalar";
    case Lane::Avx2:
      return "avx2";
    case Lane::Neon:
      return "neon";
  }
  return "scalar";
}

Lane active_lane() { return g_table.lane; }

void set_lane(Lane lane) {
  if (!lane_supported(lane))
    throw Error(Error::Kind::Usage, "kernels",
                std::string("lane not supported on this CPU: ") +
                    lane_name(lane));
  g_table = make_table(lane);
}

double dot(const double* x, const double* y, std::size_t n) {
  return g_table.dot(x, y, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  g_table.axpy(a, x, y, n);
}

void scal(double a, double* x, std::size_t n) { g_table.scal(a, x, n); }

double nrm2sq(const double* x, std::size_t n) { return g_table.nrm2sq(x, n); }

void rot(double* x, double* y, std::size_t n, double c, double s) {
  g_table.rot(x, y, n, c, s);
}

} // namespace advq::kernels
