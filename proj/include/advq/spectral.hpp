#pragma once

#include "advq/graphrefl.hpp"
#include "advq/linalg.hpp"
#include "advq/report.hpp"

#include <vector>

// Spectral analysis of the two-reflection unitary: the Jordan block
// decomposition induced by the projector pair, the kernel witness vectors,
// and the numeric checks of the effective-gap and phase-gap inequalities.

namespace advq::spectral {

using graphrefl::AdversaryGraph;
using graphrefl::InputOperators;
using report::GapReport;

struct JordanBlock {
  enum class Type {
    FixedBoth,     // Delta v = v, Pi v = v      -> U eigenvalue +1
    FixedDelta,    // Delta v = v, Pi v = 0      -> U eigenvalue -1
    FixedPi,       // Delta v = 0, Pi v = v      -> U eigenvalue -1
    FixedNeither,  // Delta v = 0, Pi v = 0      -> U eigenvalue +1
    Rotation,      // 2-D invariant subspace, eigenvalues e^{+-i theta}
  };
  Type type = Type::FixedBoth;
  double lambda = 0.0;  // eigenvalue of Delta Pi Delta (rotation blocks)
  double theta = 0.0;   // 0, pi, or 2 arccos sqrt(lambda)
  la::Vec v;
  la::Vec vperp;  // rotation blocks only

  bool unitEigenvalue() const {
    return type == Type::FixedBoth || type == Type::FixedNeither;
  }
};

struct ReflectionSpectrum {
  std::size_t dim = 0;
  std::vector<JordanBlock> blocks;

  struct Phase {
    double theta = 0.0;    // in (-pi, pi]
    double overlap = 0.0;  // |<beta|ref>|^2
  };

  // Eigenphase/overlap pairs of U against a reference vector; rotation
  // blocks contribute +-theta with equal overlap.
  std::vector<Phase> phases(const la::Vec& ref) const;

  // sum of |<beta|ref>|^2 over |theta(beta)| <= Theta
  double massInPhaseWindow(const la::Vec& ref, double Theta) const;

  // |ref|-mass of the eigenvalue-one eigenspace of U
  double eigenvalueOneMass(const la::Vec& ref) const;

  la::Mat reconstruct() const;

  // max over rotation blocks of |<0|beta_+> - e^{-i theta} <0|beta_->|,
  // the pairing identity behind the spectrum's symmetry.
  double pairingResidual(const la::Vec& ref) const;
};

struct JordanOptions {
  double projectorTol = 1e-10;  // inputs must be projectors to this
  double classifyTol = 1e-12;   // lambda within this of {0,1} -> 1-D block
};

ReflectionSpectrum jordanDecompose(const la::Mat& pi, const la::Mat& delta,
                                   const JordanOptions& opts = {});
ReflectionSpectrum jordanDecompose(const InputOperators& ops,
                                   const JordanOptions& opts = {});

struct Witness {
  la::Vec psi;
  double overlap = 0.0;   // squared, already normalized
  double residual = 0.0;  // kernel identity residual
};

// f(x) = 1: psi on {0} u I with B_G(x) psi = 0 and
// |<0|psi>|^2 / ||psi||^2 >= 1/(1+kappa^2)  (9/10 at the default scaling).
Witness witnessPositive(const AdversaryGraph& g,
                        const advsdp::DualSolution& d, const std::string& x);

// f(x) = 0: psi on F0 u I with B_G'(x)^T psi = 0 and
// |<t|psi>|^2 / ||psi||^2 >= kappa^2/(W(W+1)) (1/(9W(W+1)) at default).
Witness witnessNegative(const AdversaryGraph& g,
                        const advsdp::DualSolution& d, const std::string& x);

// The bipartite effective-gap statement: given B' with B'^T psi = 0 and
// delta = |<t|psi>|^2/||psi||^2 > 0, the |0>-mass of eigenvectors of A_G
// within |rho| <= gamma is at most 8 gamma^2 / delta. gammaGrid entries are
// absolute eigenvalue cutoffs.
GapReport verifyBipartiteGap(const la::Mat& bPrime, const la::Vec& t,
                             const la::Vec& psi,
                             const std::vector<double>& gammaGrid);

// Same inequality instantiated on A_G(x) with its absolute constants:
// mass(|rho| <= c/W) <= 72 (1 + 1/W) c^2, for f(x) = 0.
GapReport verifyEffectiveGap(const InputOperators& ops,
                             const std::vector<double>& cGrid);

// Phase-gap transfer to U_x. f(x) = 1: the eigenvalue-one eigenspace holds
// |0>-mass >= 1/(1+kappa^2). f(x) = 0: mass(|theta| <= Theta) is at most
// (2 sqrt(6 Theta W) + Theta/2)^2 across the grid.
GapReport verifyPhaseGap(const InputOperators& ops,
                         const std::vector<double>& thetaGrid);
GapReport verifyPhaseGap(const InputOperators& ops,
                         const ReflectionSpectrum& spect,
                         const std::vector<double>& thetaGrid);

// Projector analysis behind the third algorithm's soundness constant: at
// Theta = 1/(2000 W), Lambda = pi - Theta, bound the small-phase and
// near-pi masses and evaluate the resulting output-probability bound
// against 61%.
GapReport alg3ProjectorReport(const InputOperators& ops,
                              const ReflectionSpectrum& spect,
                              long long tau);

// ||Delta |0>||^2: the kernel overlap of the marked vertex; at the default
// scaling it is at least 1/(1+kappa^2) for non-constant f.
double kernelZeroOverlap(const AdversaryGraph& g);

// Default grids.
std::vector<double> logGrid(double lo, double hi, int points);
std::vector<double> linearGrid(double lo, double hi, int points);

jsonio::Value toJson(const ReflectionSpectrum& s, const la::Vec& ref);

} // namespace advq::spectral
