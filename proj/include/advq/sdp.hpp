#pragma once

#include "advq/linalg.hpp"

#include <cstddef>
#include <string>
#include <vector>

// Generic primal-dual interior-point solver for block-diagonal SDPs in
// standard form:
//
//   min <C, X>   s.t.  <A_k, X> = b_k  (k = 1..K),   X >= 0 (PSD),
//
// with X block diagonal. Directions are HKM with a Mehrotra
// predictor-corrector step; the Schur complement is formed densely, which
// is fine at the problem sizes this project solves (a few hundred rows).

namespace advq::sdp {

// Symmetric sparse coefficient matrix over the block structure. Entries are
// stored once with row <= col; an off-diagonal entry (r,c,v) stands for
// value v at both (r,c) and (c,r).
struct SparseSym {
  struct Entry {
    std::size_t block;
    std::size_t row;
    std::size_t col;
    double value;
  };
  std::vector<Entry> entries;

  void add(std::size_t block, std::size_t row, std::size_t col, double value);
};

using BlockMat = std::vector<la::Mat>;

struct Problem {
  std::vector<std::size_t> blockSizes;
  std::vector<SparseSym> constraints;
  std::vector<double> b;
  SparseSym objective;
};

enum class Status { Converged, MaxIterations, Stalled };

struct Options {
  int maxIter = 200;
  double tolGapRel = 1e-10;    // <X,Z> / (1 + |pobj| + |dobj|)
  double tolPrimal = 1e-9;     // max_k |b_k - <A_k,X>| / (1 + max|b|)
  double tolDual = 1e-9;       // ||Rd||_max / (1 + ||C||_max)
  double stepFraction = 0.98;
  double initScale = 0.0;      // 0 -> chosen from data
};

struct Result {
  Status status = Status::MaxIterations;
  BlockMat X;
  std::vector<double> y;
  BlockMat Z;
  int iterations = 0;
  double primalObj = 0.0;
  double dualObj = 0.0;
  double gapRel = 0.0;
  double primalResidual = 0.0;
  double dualResidual = 0.0;
};

Result solve(const Problem& p, const Options& opts = {});

const char* status_name(Status s);

} // namespace advq::sdp
