#pragma once

#include <cstddef>
#include <string>

// Dense double-precision inner loops used by the linear algebra layer.
// Each operation has a scalar reference kernel plus SIMD variants; the
// active variant is chosen once at startup from CPU capabilities and can
// be overridden with the ADVQ_KERNELS environment variable or set_lane().

namespace advq::kernels {

enum class Lane { Scalar, Avx2, Neon };

const char* lane_name(Lane lane);

// Lane currently used by the dispatch table.
Lane active_lane();

// Force a lane. Throws advq::Error{Usage} if unsupported on this CPU.
void set_lane(Lane lane);

// True when the CPU (and build) can run the given lane.
bool lane_supported(Lane lane);

// x . y
double dot(const double* x, const double* y, std::size_t n);

// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);

// x *= a
void scal(double a, double* x, std::size_t n);

// sum of squares
double nrm2sq(const double* x, std::size_t n);

// Givens rotation of two rows: (x, y) <- (c*x + s*y, -s*x + c*y)
void rot(double* x, double* y, std::size_t n, double c, double s);

namespace detail {
// Reference implementations, exposed so the equivalence tests can compare
// the dispatched lane against them directly.
double dot_scalar(const double* x, const double* y, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
void scal_scalar(double a, double* x, std::size_t n);
double nrm2sq_scalar(const double* x, std::size_t n);
void rot_scalar(double* x, double* y, std::size_t n, double c, double s);
} // namespace detail

} // namespace advq::kernels
