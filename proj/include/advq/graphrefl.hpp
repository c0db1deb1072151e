#pragma once

#include "advq/advsdp.hpp"
#include "advq/boolfn.hpp"
#include "advq/linalg.hpp"

#include <string>
#include <vector>

// The weighted bipartite graph built from a dual solution, its kernel
// projector, and the per-input reflection pair. Vertices are ordered
// F0 (domain order), then the marked vertex 0, then the index set
// I = [n] x {0,1} x [m] in lexicographic (j, b, k) order.

namespace advq::graphrefl {

using advsdp::DualSolution;
using boolfn::BooleanFunction;

struct VertexIndex {
  int n = 0;
  int m = 0;
  std::vector<std::string> f0;

  std::size_t size() const { return f0.size() + 1 + iSize(); }
  std::size_t iSize() const { return std::size_t(2) * n * m; }

  std::size_t f0Vertex(std::size_t idx) const { return idx; }
  std::size_t zeroVertex() const { return f0.size(); }
  // j in [n], b in {0,1}, k in [m]
  std::size_t iVertex(int j, int b, int k) const {
    return f0.size() + 1 +
           (std::size_t(j - 1) * 2 + std::size_t(b)) * std::size_t(m) +
           std::size_t(k - 1);
  }
  // offset of vertex (j,b,k) within the I block alone
  std::size_t iOffset(int j, int b, int k) const {
    return (std::size_t(j - 1) * 2 + std::size_t(b)) * std::size_t(m) +
           std::size_t(k - 1);
  }

  std::string label(std::size_t v) const;
};

struct AdversaryGraph {
  BooleanFunction f;
  VertexIndex idx;
  double W = 0.0;
  double kappa = 1.0 / 3.0;

  la::Vec t;      // over F0, every entry kappa / sqrt(W)
  la::Mat A;      // F0 x I
  la::Mat B_G;    // F0 x ({0} u I), columnwise (t | A)
  la::Mat A_G;    // symmetric over all vertices
  la::Mat Delta;  // orthogonal projector onto ker(A_G)

  std::size_t deltaRank = 0;
  double kernelGap = 0.0;   // smallest |eigenvalue| above the kernel cut
  double norm = 0.0;        // ||A_G||
  double kernelCut = 0.0;   // |eigenvalue| <= kernelCut counted as kernel
};

struct InputOperators {
  std::string x;
  int fx = 0;
  double W = 0.0;

  la::Vec piDiag;     // over all vertices of G; 0 exactly at (j, ~x_j, k)
  la::Mat U;          // (2 Pi_x - 1)(2 Delta - 1)
  la::Vec piBarDiag;  // over I only; 1 exactly at (j, ~x_j, k)
  la::Mat B_Gx;       // (F0 u I) x ({0} u I)
  la::Mat B_Gpx;      // (F0 u I) x I

  const AdversaryGraph* graph = nullptr;
};

struct GraphOptions {
  double kappa = 1.0 / 3.0;
  double kernelTolRel = 1e-9;  // |eigenvalue| <= tol * ||A_G|| is kernel
};

// Requires F0 and F1 nonempty and a dual point for the same function.
AdversaryGraph buildGraph(const BooleanFunction& f, const DualSolution& d,
                          const GraphOptions& opts = {});

// Requires x in D.
InputOperators buildInputOperators(const AdversaryGraph& g,
                                   const std::string& x);

// The oracle permutation O_x (x) 1_m extended by the identity on F0 and 0.
la::Mat oracleMatrix(const AdversaryGraph& g, const std::string& x);

// Confirms that the query reflection is the oracle conjugation of a fixed
// sign matrix: 2 Pi_x - 1 == O_x S O_x S' with S the input-independent
// diagonal sign flipping the b = 1 vertices of I and S' = identity.
bool queryOracleCheck(const AdversaryGraph& g, const std::string& x);

// Same check against an explicit reflection diagonal (fault-injection
// hook: flipping one entry must return false).
bool queryOracleCheck(const AdversaryGraph& g, const std::string& x,
                      const la::Vec& piDiag);

// Residual of the kernel-transfer identity: applying the adjacency matrix
// of G(x) to Delta (embedded in the larger vertex set) reproduces, up to
// the row/column relabeling permutation, exactly the complement rows
// (1 - Pi_x) Delta. Near zero for a correctly built pair.
double kernelTransferResidual(const AdversaryGraph& g,
                              const InputOperators& ops);

// Graph dump: vertex labels plus sparse B_G entries (row, col, weight).
void saveGraph(const AdversaryGraph& g, const std::string& path);

} // namespace advq::graphrefl
