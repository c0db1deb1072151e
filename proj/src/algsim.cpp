#include "advq/algsim.hpp"

#include "advq/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace advq::algsim {

using la::Vec;
using spectral::ReflectionSpectrum;

namespace {

Vec zeroRef(const InputOperators& ops) {
  Vec ref(ops.graph->idx.size(), 0.0);
  ref[ops.graph->idx.zeroVertex()] = 1.0;
  return ref;
}

// ceil(v) with a small absolute guard so solver dust on W does not bump
// the draw range by one.
long long guardedCeil(double v) {
  return llround(std::ceil(v - 1e-6));
}

// (1/tau) sum_{T=1..tau} cos(phi T)
double cosAverage(double phi, long long tau) {
  const double half = std::sin(phi / 2.0);
  if (std::fabs(half) < 1e-12) return 1.0;
  // Dirichlet form: sum cos(phi T) = sin(phi tau / 2) cos(phi (tau+1)/2) / sin(phi/2)
  const double s =
      std::sin(phi * double(tau) / 2.0) * std::cos(phi * double(tau + 1) / 2.0) /
      half;
  return s / double(tau);
}

struct PhaseList {
  std::vector<ReflectionSpectrum::Phase> all;  // signed phases
  double a0 = 0.0;   // mass at theta = 0
  double api = 0.0;  // mass at theta = pi
  std::vector<std::pair<double, double>> rot;  // (theta > 0, pair mass)
};

PhaseList collect(const InputOperators& ops, const ReflectionSpectrum& spect) {
  PhaseList out;
  const Vec ref = zeroRef(ops);
  out.all = spect.phases(ref);
  for (const auto& p : out.all) {
    if (p.theta == 0.0)
      out.a0 += p.overlap;
    else if (p.theta == M_PI)
      out.api += p.overlap;
    else if (p.theta > 0.0)
      out.rot.emplace_back(p.theta, 2.0 * p.overlap);
  }
  return out;
}

int phaseQubitCount(double deltaP, double deltaE) {
  const int a = int(std::ceil(std::log2(2.0 * M_PI / deltaP)));
  const int b = int(std::ceil(std::log2(2.0 + 1.0 / (2.0 * deltaE))));
  return a + b;
}

AlgorithmOutcome baseOutcome(int algorithm, const InputOperators& ops) {
  AlgorithmOutcome o;
  o.algorithm = algorithm;
  o.input = ops.x;
  o.fx = ops.fx;
  return o;
}

} // namespace

double phaseEstimationResponse(double theta, long long M) {
  const double half = std::sin(theta / 2.0);
  if (std::fabs(half) < 1e-14) return 1.0;
  const double num = std::sin(double(M) * theta / 2.0);
  const double r = num / (double(M) * half);
  return r * r;
}

AlgorithmOutcome runAlg1(const InputOperators& ops,
                         const ReflectionSpectrum& spect,
                         const AlgParams& params) {
  AlgorithmOutcome o = baseOutcome(1, ops);
  o.deltaE = params.deltaE;
  o.deltaP = 1.0 / (params.precFactor * ops.W);
  o.phaseQubits = phaseQubitCount(o.deltaP, o.deltaE);
  const long long M = 1LL << o.phaseQubits;
  o.queryCount = M - 1;

  const PhaseList ph = collect(ops, spect);
  double p = 0.0;
  double massWithinPrec = 0.0;
  for (const auto& [theta, mass] : ph.all) {
    p += mass * phaseEstimationResponse(theta, M);
    if (std::fabs(theta) <= o.deltaP) massWithinPrec += mass;
  }
  o.pOne = p;
  o.pLower = (1.0 - o.deltaE) * ph.a0;
  o.pUpper = massWithinPrec + o.deltaE * (1.0 - massWithinPrec);
  return o;
}

AlgorithmOutcome runAlg2(const InputOperators& ops,
                         const ReflectionSpectrum& spect,
                         const AlgParams& params) {
  AlgorithmOutcome o = baseOutcome(2, ops);
  o.tau = params.tauOverride.value_or(guardedCeil(params.tau2Factor * ops.W));
  o.queryCount = o.tau;

  // E_T 1/4 ||(1 + U^T)|0>||^2 = sum_beta m_beta (1 + cos(theta T)) / 2
  const PhaseList ph = collect(ops, spect);
  double p = 0.0;
  for (const auto& [theta, mass] : ph.all)
    p += mass * 0.5 * (1.0 + cosAverage(theta, o.tau));
  o.pOne = p;
  o.pLower = o.pUpper = p;
  return o;
}

AlgorithmOutcome runAlg3(const InputOperators& ops,
                         const ReflectionSpectrum& spect,
                         const AlgParams& params) {
  AlgorithmOutcome o = baseOutcome(3, ops);
  o.tau = params.tauOverride.value_or(guardedCeil(params.tau3Factor * ops.W));
  o.queryCount = o.tau;

  // <0|U^T|0> = a0 + api (-1)^T + sum_i m_i cos(theta_i T); average the
  // square over T with per-pair geometric sums instead of matrix powers.
  const PhaseList ph = collect(ops, spect);
  const long long tau = o.tau;
  const double a0 = ph.a0, api = ph.api;

  double p = a0 * a0 + api * api;
  p += 2.0 * a0 * api * cosAverage(M_PI, tau);
  for (const auto& [ti, mi] : ph.rot) {
    p += mi * mi * 0.5 * (1.0 + cosAverage(2.0 * ti, tau));
    p += 2.0 * a0 * mi * cosAverage(ti, tau);
    p += api * mi *
         (cosAverage(M_PI + ti, tau) + cosAverage(M_PI - ti, tau));
  }
  for (std::size_t i = 0; i < ph.rot.size(); ++i)
    for (std::size_t j = i + 1; j < ph.rot.size(); ++j) {
      const auto& [ti, mi] = ph.rot[i];
      const auto& [tj, mj] = ph.rot[j];
      p += mi * mj * (cosAverage(ti + tj, tau) + cosAverage(ti - tj, tau));
    }
  o.pOne = p;
  o.pLower = o.pUpper = p;
  return o;
}

AlgorithmOutcome runAlgorithm(int algorithm, const InputOperators& ops,
                              const ReflectionSpectrum& spect,
                              const AlgParams& params) {
  switch (algorithm) {
    case 1: return runAlg1(ops, spect, params);
    case 2: return runAlg2(ops, spect, params);
    case 3: return runAlg3(ops, spect, params);
    default:
      throw Error(Error::Kind::Usage, "algsim",
                  "algorithm must be 1, 2 or 3");
  }
}

AlgorithmOutcome sample(int algorithm, const InputOperators& ops,
                        const ReflectionSpectrum& spect, long long trials,
                        std::uint64_t seed, const AlgParams& params) {
  if (trials < 1)
    throw Error(Error::Kind::Usage, "algsim", "trials must be >= 1");

  AlgorithmOutcome o = runAlgorithm(algorithm, ops, spect, params);
  const PhaseList ph = collect(ops, spect);

  std::mt19937_64 rng(seed);
  auto uniform01 = [&]() { return double(rng() >> 11) * 0x1.0p-53; };
  auto bernoulli = [&](double p) { return uniform01() < p; };

  double total = 0.0;
  for (const auto& p : ph.all) total += p.overlap;

  const long long M = 1LL << o.phaseQubits;
  long long successes = 0;
  for (long long t = 0; t < trials; ++t) {
    if (algorithm == 1) {
      // measure the eigenvector register, then the phase readout
      double u = uniform01() * total;
      std::size_t pick = 0;
      for (; pick + 1 < ph.all.size(); ++pick) {
        u -= ph.all[pick].overlap;
        if (u <= 0.0) break;
      }
      if (bernoulli(phaseEstimationResponse(ph.all[pick].theta, M)))
        ++successes;
    } else {
      const long long T = 1 + (long long)(rng() % std::uint64_t(o.tau));
      if (algorithm == 2) {
        double p = 0.0;
        for (const auto& ppair : ph.all)
          p += ppair.overlap * 0.5 * (1.0 + std::cos(ppair.theta * double(T)));
        if (bernoulli(p)) ++successes;
      } else {
        double amp = 0.0;
        for (const auto& ppair : ph.all)
          amp += ppair.overlap * std::cos(ppair.theta * double(T));
        if (bernoulli(amp * amp)) ++successes;
      }
    }
  }
  o.sampled = SampleStats{trials, successes, seed};
  return o;
}

long long queryCount(int algorithm, double W, const AlgParams& params) {
  switch (algorithm) {
    case 1: {
      const double deltaP = 1.0 / (params.precFactor * W);
      return (1LL << phaseQubitCount(deltaP, params.deltaE)) - 1;
    }
    case 2:
      return params.tauOverride.value_or(guardedCeil(params.tau2Factor * W));
    case 3:
      return params.tauOverride.value_or(guardedCeil(params.tau3Factor * W));
    default:
      throw Error(Error::Kind::Usage, "algsim",
                  "algorithm must be 1, 2 or 3");
  }
}

jsonio::Value toJson(const AlgorithmOutcome& o) {
  jsonio::Value v = jsonio::Value::object();
  v.set("alg", o.algorithm);
  v.set("x", o.input);
  v.set("f_x", o.fx);
  v.set("p_one", o.pOne);
  if (o.algorithm == 1) {
    v.set("p_lower", o.pLower);
    v.set("p_upper", o.pUpper);
  }
  jsonio::Value params = jsonio::Value::object();
  if (o.algorithm == 1) {
    params.set("delta_p", o.deltaP);
    params.set("delta_e", o.deltaE);
    params.set("phase_qubits", o.phaseQubits);
  } else {
    params.set("tau", o.tau);
  }
  v.set("params", std::move(params));
  v.set("query_count", o.queryCount);
  if (o.sampled) {
    jsonio::Value s = jsonio::Value::object();
    s.set("trials", o.sampled->trials);
    s.set("successes", o.sampled->successes);
    s.set("seed", std::int64_t(o.sampled->seed));
    v.set("sampled", std::move(s));
  }
  return v;
}

} // namespace advq::algsim
