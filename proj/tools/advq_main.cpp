// advq: compile a boolean truth table into the two-reflection query
// algorithm and verify its spectral guarantees.
//
// Exit codes: 0 success, 1 usage/validation failure, 2 a verified bound
// measured as violated.

#include "advq/advsdp.hpp"
#include "advq/algsim.hpp"
#include "advq/boolfn.hpp"
#include "advq/error.hpp"
#include "advq/graphrefl.hpp"
#include "advq/jsonio.hpp"
#include "advq/pipeline.hpp"
#include "advq/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace advq;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBoundViolated = 2;

struct GlobalFlags {
  std::optional<double> tolFeas;
  std::optional<double> tolObj;
  std::optional<double> kappa;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<int> maxIter;
};

pipeline::RunConfig effectiveConfig(const GlobalFlags& flags) {
  std::optional<std::string> cfgPath;
  if (const char* env = std::getenv("ADVQ_CONFIG")) cfgPath = env;
  pipeline::RunConfig cfg = pipeline::loadConfig(cfgPath);
  if (flags.tolFeas) cfg.tol.feas = *flags.tolFeas;
  if (flags.tolObj) cfg.tol.objRel = *flags.tolObj;
  if (flags.kappa) cfg.kappa = *flags.kappa;
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.jobs) cfg.jobs = *flags.jobs;
  if (flags.maxIter) cfg.tol.maxIter = *flags.maxIter;
  cfg.validate();
  return cfg;
}

la::Mat loadGamma(const boolfn::BooleanFunction& f, const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Error::Kind::Parse, "cli", "cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Error::Kind::Parse, "cli",
                "malformed JSON in " + path + ": " + e.what());
  }
  if (!j.contains("entries") || !j["entries"].is_array())
    throw Error(Error::Kind::Parse, "cli",
                "expected {\"entries\": [{x, y, v}...]} in " + path);
  la::Mat gamma(f.domainSize(), f.domainSize());
  for (const auto& e : j["entries"]) {
    const auto x = e.at("x").get<std::string>();
    const auto y = e.at("y").get<std::string>();
    const double v = e.at("v").get<double>();
    gamma(f.domainIndex(x), f.domainIndex(y)) = v;
    gamma(f.domainIndex(y), f.domainIndex(x)) = v;
  }
  return gamma;
}

int cmdSolve(const GlobalFlags& flags, const std::string& fnPath,
             const std::string& outPath) {
  const auto cfg = effectiveConfig(flags);
  const auto f = boolfn::load(fnPath);
  const auto d = advsdp::solveDual(f, cfg.tol);
  if (!d.converged) {
    std::cerr << "advq solve: solver did not converge after " << d.iterations
              << " iterations (gap " << d.gapRel << ", residual "
              << d.feasibilityResidual << "); best iterate written\n";
    advsdp::saveDual(d, outPath);
    return kExitUsage;
  }
  advsdp::saveDual(d, outPath);
  std::cout << "W = " << jsonio::format_double(d.W) << ", m = " << d.m
            << ", feasibility residual = "
            << jsonio::format_double(d.feasibilityResidual) << "\n";
  return kExitOk;
}

int cmdBuild(const GlobalFlags& flags, const std::string& fnPath,
             const std::string& dualPath, const std::string& outPath) {
  const auto cfg = effectiveConfig(flags);
  const auto f = boolfn::load(fnPath);
  const auto d = advsdp::loadDual(f, dualPath);
  graphrefl::GraphOptions gopt;
  gopt.kappa = cfg.kappa;
  gopt.kernelTolRel = cfg.epsKer;
  const auto g = graphrefl::buildGraph(f, d, gopt);
  graphrefl::saveGraph(g, outPath);
  std::cout << "graph: " << g.idx.size() << " vertices, kernel rank "
            << g.deltaRank << ", kernel gap "
            << jsonio::format_double(g.kernelGap) << "\n";
  return kExitOk;
}

int cmdSimulate(const GlobalFlags& flags, const std::string& fnPath,
                const std::string& dualPath, int alg,
                const std::optional<std::string>& input, bool allInputs,
                long long trials, const std::string& outPath) {
  const auto cfg = effectiveConfig(flags);
  const auto f = boolfn::load(fnPath);
  const auto d = advsdp::loadDual(f, dualPath);
  graphrefl::GraphOptions gopt;
  gopt.kappa = cfg.kappa;
  gopt.kernelTolRel = cfg.epsKer;
  const auto g = graphrefl::buildGraph(f, d, gopt);

  std::vector<std::string> inputs;
  if (allInputs) {
    inputs = f.domain();
  } else if (input) {
    inputs.push_back(*input);
  } else {
    throw Error(Error::Kind::Usage, "cli",
                "simulate needs --input or --all-inputs");
  }

  jsonio::Value rows = jsonio::Value::array();
  for (const auto& x : inputs) {
    const auto ops = graphrefl::buildInputOperators(g, x);
    const auto spect = spectral::jordanDecompose(ops);
    algsim::AlgorithmOutcome out =
        trials > 0 ? algsim::sample(alg, ops, spect, trials, cfg.seed, {})
                   : algsim::runAlgorithm(alg, ops, spect, {});
    rows.push(algsim::toJson(out));
  }
  jsonio::Value doc = jsonio::Value::object();
  doc.set("outcomes", std::move(rows));
  if (!outPath.empty())
    jsonio::write_file(outPath, doc);
  else
    std::cout << doc.dump();
  return kExitOk;
}

int cmdVerify(const GlobalFlags& flags, const std::string& fnPath,
              const std::optional<std::string>& dualPath,
              const std::optional<std::string>& input,
              const std::string& lemma, const std::string& outPath) {
  const auto cfg = effectiveConfig(flags);
  if (std::fabs(cfg.kappa - 1.0 / 3.0) > 1e-12)
    throw Error(Error::Kind::Usage, "cli",
                "verify checks the published constants, which are stated for "
                "the default scaling kappa = 1/3");

  pipeline::Scope scope = pipeline::Scope::All;
  if (lemma == "3.1")
    scope = pipeline::Scope::Witnesses;
  else if (lemma == "3.2")
    scope = pipeline::Scope::BipartiteGap;
  else if (lemma == "3.3")
    scope = pipeline::Scope::EffectiveGap;
  else if (lemma == "3.4")
    scope = pipeline::Scope::PhaseGap;
  else if (lemma == "jordan")
    scope = pipeline::Scope::Jordan;
  else if (lemma != "all")
    throw Error(Error::Kind::Usage, "cli",
                "--lemma must be one of 3.1, 3.2, 3.3, 3.4, jordan, all");

  const auto f = boolfn::load(fnPath);
  std::optional<advsdp::DualSolution> d;
  if (dualPath) d = advsdp::loadDual(f, *dualPath);

  const auto rep = pipeline::verifyFunction(f, fnPath, d, cfg, scope, input);
  if (!outPath.empty()) jsonio::write_file(outPath, pipeline::toJson(rep));

  for (const auto& c : rep.checks) {
    if (c.pass) continue;
    std::cerr << "advq verify: FAILED " << c.name;
    if (!c.input.empty()) std::cerr << " on input " << c.input;
    std::cerr << "\n";
  }
  std::cout << (rep.overallPass ? "verify: all checks passed"
                                : "verify: bound violated")
            << " (W = " << jsonio::format_double(rep.solver.W) << ", m = "
            << rep.solver.m << ")\n";
  return rep.overallPass ? kExitOk : kExitBoundViolated;
}

int cmdCompose(const GlobalFlags& flags, const std::string& fPath,
               const std::string& gPath, int bitCap,
               const std::string& outPath) {
  const auto cfg = effectiveConfig(flags);
  const auto f = boolfn::load(fPath);
  const auto g = boolfn::load(gPath);
  const auto rep = pipeline::composeCheck(f, g, cfg, bitCap);
  const auto doc = pipeline::toJson(rep);
  if (!outPath.empty())
    jsonio::write_file(outPath, doc);
  else
    std::cout << doc.dump();
  if (!rep.pass) {
    std::cerr << "advq compose: multiplicativity violated: deviation "
              << jsonio::format_double(rep.relativeDeviation) << "\n";
    return kExitBoundViolated;
  }
  return kExitOk;
}

int cmdCertify(const GlobalFlags& flags, const std::string& fnPath,
               const std::string& gammaPath,
               const std::optional<std::string>& dualPath) {
  const auto cfg = effectiveConfig(flags);
  const auto f = boolfn::load(fnPath);
  const auto gamma = loadGamma(f, gammaPath);
  const auto cert = advsdp::evaluatePrimal(f, gamma);

  jsonio::Value doc = jsonio::Value::object();
  doc.set("value", cert.value);
  doc.set("gamma_norm", cert.gammaNorm);
  doc.set("max_masked_norm", cert.maxColumnNorm);
  doc.set("unbounded", cert.unbounded);

  int code = kExitOk;
  if (dualPath) {
    const auto d = advsdp::loadDual(f, *dualPath);
    const double gap = advsdp::dualityGap(d, cert);
    doc.set("dual_W", d.W);
    doc.set("duality_gap", gap);
    const bool weakDuality = gap >= -cfg.epsGap;
    doc.set("weak_duality", weakDuality);
    if (!weakDuality) {
      std::cerr << "advq certify: weak duality violated: gap "
                << jsonio::format_double(gap) << "\n";
      code = kExitBoundViolated;
    }
  }
  std::cout << doc.dump();
  return code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-reflection query algorithms from adversary-bound duals"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalFlags flags;
  app.add_option("--tol-feas", flags.tolFeas, "feasibility tolerance");
  app.add_option("--tol-obj", flags.tolObj, "relative objective tolerance");
  app.add_option("--kappa", flags.kappa, "marked-vertex scaling in (0,1]");
  app.add_option("--seed", flags.seed, "sampling seed");
  app.add_option("--jobs", flags.jobs, "parallel workers for fan-out");
  app.add_option("--max-iter", flags.maxIter, "solver iteration cap");

  std::string fnPath, dualPath, outPath, gammaPath, gPath;
  std::string lemma = "all";
  std::optional<std::string> inputOpt, dualOpt;
  bool allInputs = false;
  int alg = 0;
  long long trials = 0;

  auto* solve = app.add_subcommand("solve", "solve the dual SDP");
  solve->add_option("--function", fnPath, "truth-table JSON")->required();
  solve->add_option("--out", outPath, "dual-solution output path")->required();

  auto* build = app.add_subcommand("build", "build the graph and dump it");
  build->add_option("--function", fnPath)->required();
  build->add_option("--dual", dualPath)->required();
  build->add_option("--out", outPath)->required();

  auto* simulate = app.add_subcommand("simulate", "run an algorithm exactly "
                                                  "or with sampling");
  simulate->add_option("--function", fnPath)->required();
  simulate->add_option("--dual", dualPath)->required();
  simulate->add_option("--alg", alg, "1, 2 or 3")->required();
  std::string inputStr;
  auto* simInput = simulate->add_option("--input", inputStr, "single input x");
  simulate->add_flag("--all-inputs", allInputs, "simulate every x in D");
  simulate->add_option("--trials", trials, "Monte-Carlo trials (0 = exact)");
  simulate->add_option("--out", outPath, "outcome JSON path");

  auto* verify = app.add_subcommand("verify", "check the spectral bounds");
  verify->add_option("--function", fnPath)->required();
  std::string dualStr, verifyInputStr;
  auto* vDual = verify->add_option("--dual", dualStr, "dual-solution JSON");
  auto* vInput = verify->add_option("--input", verifyInputStr, "single input");
  verify->add_option("--lemma", lemma, "3.1|3.2|3.3|3.4|jordan|all");
  verify->add_flag("--all", "run every check (default)");
  verify->add_option("--out", outPath, "report JSON path");

  auto* compose = app.add_subcommand("compose", "bound multiplicativity");
  int bitCap = 6;
  compose->add_option("--f", fnPath)->required();
  compose->add_option("--g", gPath)->required();
  compose->add_option("--bit-cap", bitCap, "composed-arity solve cap");
  compose->add_option("--out", outPath);

  auto* certify = app.add_subcommand("certify", "evaluate an adversary matrix");
  certify->add_option("--function", fnPath)->required();
  certify->add_option("--gamma", gammaPath)->required();
  std::string certDualStr;
  auto* cDual = certify->add_option("--dual", certDualStr);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simInput->count()) inputOpt = inputStr;
    if (vDual->count()) dualOpt = dualStr;
    if (vInput->count()) inputOpt = verifyInputStr;

    if (solve->parsed()) return cmdSolve(flags, fnPath, outPath);
    if (build->parsed()) return cmdBuild(flags, fnPath, dualPath, outPath);
    if (simulate->parsed())
      return cmdSimulate(flags, fnPath, dualPath, alg, inputOpt, allInputs,
                         trials, outPath);
    if (verify->parsed())
      return cmdVerify(flags, fnPath, dualOpt, inputOpt, lemma, outPath);
    if (compose->parsed())
      return cmdCompose(flags, fnPath, gPath, bitCap, outPath);
    if (certify->parsed())
      return cmdCertify(flags, fnPath, gammaPath,
                        cDual->count() ? std::optional(certDualStr)
                                       : std::nullopt);
  } catch (const Error& e) {
    std::cerr << "advq: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "advq: unexpected error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
