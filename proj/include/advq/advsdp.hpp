#pragma once

#include "advq/boolfn.hpp"
#include "advq/linalg.hpp"

#include <string>
#include <vector>

// The dual adversary SDP: witness vectors v_{x,j} in R^m, one per
// (input, bit) pair, minimizing the worst-case total squared length
// W = max_x sum_j ||v_{x,j}||^2 subject to, for every pair (x,y) in
// F0 x F1,  sum_{j : x_j != y_j} <v_{x,j}, v_{y,j}> = 1.
// Also the primal side: adversary matrices Gamma with value
// ||Gamma|| / max_j ||Gamma o Delta_j||, used to sandwich the solver.

namespace advq::advsdp {

using boolfn::BooleanFunction;

struct SolverTolerances {
  double feas = 1e-8;       // max feasibility residual of returned vectors
  double psd = 1e-7;        // most negative Gram eigenvalue tolerated
  double objRel = 1e-4;     // certified relative accuracy target on W
  double gap = 1e-4;        // weak-duality slack in assertions
  double rankRel = 1e-9;    // eigenvalues <= rankRel * lambda_max drop
  int maxIter = 200;
};

// Gram matrix of the witness vectors, rows indexed by (x, j) with the flat
// index  domainIndex(x) * n + (j - 1).
struct GramMatrix {
  int n = 0;
  std::vector<std::string> domain;
  la::Mat M;

  std::size_t rowOf(std::size_t domainIdx, int j) const {
    return domainIdx * std::size_t(n) + std::size_t(j - 1);
  }
};

struct DualSolution {
  int n = 0;
  int m = 0;
  double W = 0.0;
  std::vector<std::string> domain;
  la::Mat vectors;  // (|D| * n) x m, same row indexing as GramMatrix
  double feasibilityResidual = 0.0;

  // solver metadata (zeroed for hand-constructed points)
  int iterations = 0;
  bool converged = true;
  double gapRel = 0.0;

  std::size_t rowOf(std::size_t domainIdx, int j) const {
    return domainIdx * std::size_t(n) + std::size_t(j - 1);
  }
  la::Vec vectorAt(const BooleanFunction& f, const std::string& x,
                   int j) const;
};

struct PrimalCertificate {
  la::Mat gamma;     // |D| x |D|, zero on pairs with f(x) = f(y)
  double value = 0.0;
  double gammaNorm = 0.0;
  double maxColumnNorm = 0.0;  // max_j ||Gamma o Delta_j||
  bool unbounded = false;      // max_j norm vanished while ||Gamma|| > 0
};

// Solve the dual SDP. Requires F0 and F1 nonempty. If the interior-point
// iteration fails to converge the returned solution carries
// converged = false together with the best iterate's residuals.
DualSolution solveDual(const BooleanFunction& f,
                       const SolverTolerances& tol = {});

// Factor a Gram matrix into witness vectors: eigenvalues below
// -tol.psd raise a PSD violation, eigenvalues in [-tol.psd,
// rankRel * lambda_max] are clamped to zero, m = retained rank.
DualSolution extractVectors(const BooleanFunction& f, const GramMatrix& M,
                            const SolverTolerances& tol = {});

GramMatrix gramFromVectors(const BooleanFunction& f, const DualSolution& d);

// Exhaustive max over F0 x F1 of |sum_{j: x_j != y_j} <v_xj, v_yj> - 1|.
double feasibilityResidual(const BooleanFunction& f, const DualSolution& d);

// max_x sum_j ||v_xj||^2
double objectiveValue(const BooleanFunction& f, const DualSolution& d);

// Scale all F0 vectors by s and F1 vectors by 1/s with the s minimizing the
// objective; feasibility is untouched. Never increases W.
DualSolution rebalance(const BooleanFunction& f, const DualSolution& d);

// Gauss-Newton least-norm correction of the pair constraints. The
// constraints are bilinear in the vectors, so a couple of steps take a
// residual of 1e-7 down to machine precision while moving the point (and
// W) by the same 1e-7 order.
DualSolution polishFeasibility(const BooleanFunction& f, const DualSolution& d,
                               int steps = 2);

PrimalCertificate evaluatePrimal(const BooleanFunction& f,
                                 const la::Mat& gamma);

// d.W - p.value; weak duality keeps this >= -tol.gap.
double dualityGap(const DualSolution& d, const PrimalCertificate& p);

// Closed-form primal/dual pairs used as solver regression oracles.
struct CertificatePair {
  BooleanFunction f;
  la::Mat gamma;
  DualSolution dual;
  double exactValue = 0.0;  // optimum both sides attain
};

CertificatePair identCertificate();
CertificatePair orCertificate(int n);      // value sqrt(n), n in [1,4]
CertificatePair andCertificate(int n);     // value sqrt(n), n in [1,4]
CertificatePair parityCertificate(int n);  // value n, n in [1,4]
CertificatePair maj3Certificate();         // value 2

// Dual-solution file I/O:
// {"n": int, "m": int, "W": float, "vectors": {"<x>,<j>": [floats]}}.
void saveDual(const DualSolution& d, const std::string& path);
DualSolution loadDual(const BooleanFunction& f, const std::string& path);

} // namespace advq::advsdp
