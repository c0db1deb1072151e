#pragma once

#include "advq/graphrefl.hpp"
#include "advq/jsonio.hpp"
#include "advq/spectral.hpp"

#include <cstdint>
#include <optional>
#include <string>

// Exact simulation of the three query algorithms from the eigenphase
// structure of U_x, plus a seeded Monte-Carlo cross-check. Output
// probabilities are always computed analytically; sampling never feeds the
// verified numbers.

namespace advq::algsim {

using graphrefl::InputOperators;
using spectral::ReflectionSpectrum;

struct AlgParams {
  double deltaE = 0.1;       // phase-estimation error rate
  double precFactor = 100.0; // delta_p = 1 / (precFactor * W)
  double tau2Factor = 100.0; // T drawn from [ceil(tau2Factor * W)]
  double tau3Factor = 1e5;   // T drawn from [ceil(tau3Factor * W)]
  std::optional<long long> tauOverride;  // harness hook for small-tau runs
};

struct SampleStats {
  long long trials = 0;
  long long successes = 0;
  std::uint64_t seed = 0;
};

struct AlgorithmOutcome {
  int algorithm = 0;
  std::string input;
  int fx = 0;

  double pOne = 0.0;
  // Algorithm 1 brackets: any phase-estimation realization meeting
  // (delta_p, delta_e) lands between these; pOne is the standard
  // inverse-Fourier response with the register sized below.
  double pLower = 0.0;
  double pUpper = 0.0;

  double deltaP = 0.0;
  double deltaE = 0.0;
  long long tau = 0;
  int phaseQubits = 0;
  long long queryCount = 0;

  std::optional<SampleStats> sampled;
};

AlgorithmOutcome runAlg1(const InputOperators& ops,
                         const ReflectionSpectrum& spect,
                         const AlgParams& params = {});
AlgorithmOutcome runAlg2(const InputOperators& ops,
                         const ReflectionSpectrum& spect,
                         const AlgParams& params = {});
AlgorithmOutcome runAlg3(const InputOperators& ops,
                         const ReflectionSpectrum& spect,
                         const AlgParams& params = {});
AlgorithmOutcome runAlgorithm(int algorithm, const InputOperators& ops,
                              const ReflectionSpectrum& spect,
                              const AlgParams& params = {});

// Simulates the stated measurement procedure `trials` times with a seeded
// generator; the exact fields are filled as in runAlgorithm.
AlgorithmOutcome sample(int algorithm, const InputOperators& ops,
                        const ReflectionSpectrum& spect, long long trials,
                        std::uint64_t seed, const AlgParams& params = {});

// Worst-case oracle queries of one run: the number of controlled-U_x
// applications for algorithm 1, tau for algorithms 2 and 3.
long long queryCount(int algorithm, double W, const AlgParams& params = {});

// Phase-estimation response used for algorithm 1: probability that the
// inverse-Fourier readout over M grid points returns outcome zero on an
// eigenvector with phase theta.
double phaseEstimationResponse(double theta, long long M);

jsonio::Value toJson(const AlgorithmOutcome& o);

} // namespace advq::algsim
