#pragma once

#include "advq/advsdp.hpp"
#include "advq/algsim.hpp"
#include "advq/boolfn.hpp"
#include "advq/graphrefl.hpp"
#include "advq/report.hpp"
#include "advq/spectral.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Orchestration shared by the CLI subcommands: configuration, the
// per-function verification report, and composition checks.

namespace advq::pipeline {

struct GridSpec {
  double lo = 1e-4;
  double hi = 1.0;
  int points = 50;
};

struct RunConfig {
  advsdp::SolverTolerances tol;
  double epsKer = 1e-9;   // kernel cut, relative to ||A_G||
  double epsGap = 1e-4;   // weak-duality slack
  double kappa = 1.0 / 3.0;
  GridSpec gammaGrid;     // log grid; a zero entry is prepended
  GridSpec thetaGrid;     // log grid
  int cPoints = 21;       // linear grid on [0, 1]
  std::uint64_t seed = 1;
  int jobs = 1;

  void validate() const;
};

// ADVQ_CONFIG file, then flag overrides on top; both optional.
RunConfig loadConfig(const std::optional<std::string>& path);

struct SolverSummary {
  double W = 0.0;
  int m = 0;
  int iterations = 0;
  bool converged = false;
  double gapRel = 0.0;
  double feasibilityResidual = 0.0;
};

struct VerificationReport {
  std::string functionSource;
  int n = 0;
  std::size_t domainSize = 0;
  SolverSummary solver;
  double kappa = 0.0;
  std::size_t deltaRank = 0;
  double kernelGap = 0.0;

  std::vector<report::GapReport> checks;
  std::vector<algsim::AlgorithmOutcome> algorithms;
  bool overallPass = false;

  void finalize();
  const report::GapReport* find(const std::string& name,
                                const std::string& input) const;
};

// Which checks to run; All covers every inequality plus the three
// algorithms.
enum class Scope { All, Witnesses, BipartiteGap, EffectiveGap, PhaseGap,
                   Jordan };

// Build graph + operators + every requested check for every input
// (or a single input when given). The dual is solved when not supplied.
VerificationReport verifyFunction(
    const boolfn::BooleanFunction& f, const std::string& source,
    const std::optional<advsdp::DualSolution>& dual, const RunConfig& cfg,
    Scope scope = Scope::All,
    const std::optional<std::string>& onlyInput = std::nullopt);

jsonio::Value toJson(const VerificationReport& r);

struct CompositionReport {
  double wF = 0.0;
  double wG = 0.0;
  double wComposed = 0.0;
  double product = 0.0;
  double relativeDeviation = 0.0;
  bool pass = false;  // deviation within tolerance
};

// The truth-table compose cap is 12 bits, but the SDP solve behind this
// check is only desk-scale up to 6 composed bits, so that is the default
// here.
CompositionReport composeCheck(const boolfn::BooleanFunction& f,
                               const boolfn::BooleanFunction& g,
                               const RunConfig& cfg, int bitCap = 6,
                               double relTol = 1e-3);

jsonio::Value toJson(const CompositionReport& r);

} // namespace advq::pipeline
