#include "advq/advsdp.hpp"

#include "advq/error.hpp"
#include "advq/jsonio.hpp"
#include "advq/kernels.hpp"
#include "advq/sdp.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace advq::advsdp {

using la::Mat;
using la::Vec;
using nlohmann::json;

la::Vec DualSolution::vectorAt(const BooleanFunction& f, const std::string& x,
                               int j) const {
  const std::size_t r = rowOf(f.domainIndex(x), j);
  const double* p = vectors.row(r);
  return Vec(p, p + m);
}

namespace {

// Bits where x and y disagree, 1-based.
std::vector<int> differingBits(const std::string& x, const std::string& y) {
  std::vector<int> out;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) out.push_back(int(i) + 1);
  return out;
}

DualSolution fromVectors(const BooleanFunction& f, Mat vectors, int m) {
  DualSolution d;
  d.n = f.n();
  d.m = m;
  d.domain = f.domain();
  d.vectors = std::move(vectors);
  d.W = objectiveValue(f, d);
  d.feasibilityResidual = feasibilityResidual(f, d);
  return d;
}

} // namespace

double feasibilityResidual(const BooleanFunction& f, const DualSolution& d) {
  const auto [f0, f1] = partition(f);
  double worst = 0.0;
  for (const auto& x : f0) {
    const std::size_t xi = f.domainIndex(x);
    for (const auto& y : f1) {
      const std::size_t yi = f.domainIndex(y);
      double s = 0.0;
      for (int j : differingBits(x, y))
        s += advq::kernels::dot(d.vectors.row(d.rowOf(xi, j)),
                                d.vectors.row(d.rowOf(yi, j)),
                                std::size_t(d.m));
      worst = std::max(worst, std::fabs(s - 1.0));
    }
  }
  return worst;
}

double objectiveValue(const BooleanFunction& f, const DualSolution& d) {
  double w = 0.0;
  for (const auto& x : f.domain()) {
    const std::size_t xi = f.domainIndex(x);
    double s = 0.0;
    for (int j = 1; j <= d.n; ++j)
      s += advq::kernels::nrm2sq(d.vectors.row(d.rowOf(xi, j)),
                                 std::size_t(d.m));
    w = std::max(w, s);
  }
  return w;
}

DualSolution rebalance(const BooleanFunction& f, const DualSolution& d) {
  const auto [f0, f1] = partition(f);
  auto rowSum = [&](const std::string& x) {
    const std::size_t xi = f.domainIndex(x);
    double s = 0.0;
    for (int j = 1; j <= d.n; ++j)
      s += advq::kernels::nrm2sq(d.vectors.row(d.rowOf(xi, j)),
                                 std::size_t(d.m));
    return s;
  };
  double w0 = 0.0, w1 = 0.0;
  for (const auto& x : f0) w0 = std::max(w0, rowSum(x));
  for (const auto& x : f1) w1 = std::max(w1, rowSum(x));
  if (w0 <= 0.0 || w1 <= 0.0) return d;

  const double s = std::pow(w1 / w0, 0.25);
  DualSolution out = d;
  for (const auto& x : f0) {
    const std::size_t xi = f.domainIndex(x);
    for (int j = 1; j <= d.n; ++j)
      advq::kernels::scal(s, out.vectors.row(out.rowOf(xi, j)),
                          std::size_t(d.m));
  }
  for (const auto& x : f1) {
    const std::size_t xi = f.domainIndex(x);
    for (int j = 1; j <= d.n; ++j)
      advq::kernels::scal(1.0 / s, out.vectors.row(out.rowOf(xi, j)),
                          std::size_t(d.m));
  }
  out.W = objectiveValue(f, out);
  out.feasibilityResidual = feasibilityResidual(f, out);
  return out;
}

DualSolution polishFeasibility(const BooleanFunction& f, const DualSolution& d,
                               int steps) {
  DualSolution out = d;
  if (out.m == 0) return out;
  const auto [f0, f1] = partition(f);
  const std::size_t cols = out.vectors.rows() * std::size_t(out.m);

  for (int step = 0; step < steps; ++step) {
    // residuals and the Jacobian of the pair constraints at the current point
    std::vector<double> r;
    std::vector<la::Vec> jac;
    for (const auto& x : f0) {
      const std::size_t xi = f.domainIndex(x);
      for (const auto& y : f1) {
        const std::size_t yi = f.domainIndex(y);
        double s = 0.0;
        la::Vec row(cols, 0.0);
        for (int j : differingBits(x, y)) {
          const std::size_t rx = out.rowOf(xi, j);
          const std::size_t ry = out.rowOf(yi, j);
          s += advq::kernels::dot(out.vectors.row(rx), out.vectors.row(ry),
                                  std::size_t(out.m));
          for (int k = 0; k < out.m; ++k) {
            row[rx * out.m + k] += out.vectors(ry, std::size_t(k));
            row[ry * out.m + k] += out.vectors(rx, std::size_t(k));
          }
        }
        r.push_back(s - 1.0);
        jac.push_back(std::move(row));
      }
    }

    double worst = 0.0;
    for (double v : r) worst = std::max(worst, std::fabs(v));
    if (worst <= 1e-14) break;

    // least-norm step: solve (J J^T) y = -r, dV = J^T y
    const std::size_t K = r.size();
    la::Mat gram(K, K);
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = i; j < K; ++j) {
        const double v =
            advq::kernels::dot(jac[i].data(), jac[j].data(), cols);
        gram(i, j) = v;
        gram(j, i) = v;
      }
    for (std::size_t i = 0; i < K; ++i)
      gram(i, i) += 1e-12 * (1.0 + gram(i, i));
    la::Mat l;
    if (!la::cholesky(gram, l)) break;
    la::Vec neg(K);
    for (std::size_t i = 0; i < K; ++i) neg[i] = -r[i];
    const la::Vec y = la::cholesky_solve(l, neg);

    for (std::size_t i = 0; i < K; ++i)
      advq::kernels::axpy(y[i], jac[i].data(), out.vectors.data(), cols);
  }

  out.W = objectiveValue(f, out);
  out.feasibilityResidual = feasibilityResidual(f, out);
  return out;
}

GramMatrix gramFromVectors(const BooleanFunction& f, const DualSolution& d) {
  GramMatrix g;
  g.n = d.n;
  g.domain = f.domain();
  g.M = la::matmul_nt(d.vectors, d.vectors);
  return g;
}

DualSolution extractVectors(const BooleanFunction& f, const GramMatrix& gm,
                            const SolverTolerances& tol) {
  const std::size_t rows = gm.M.rows();
  if (la::asymmetry(gm.M) > 1e-9)
    throw Error(Error::Kind::Validation, "advsdp", "Gram matrix not symmetric");
  const la::Eigh e = la::jacobi_eigh(gm.M);
  const double lmax = e.values.empty() ? 0.0 : std::max(0.0, e.values.back());
  const double lmin = e.values.empty() ? 0.0 : e.values.front();
  if (lmin < -tol.psd)
    throw Error(Error::Kind::Numeric, "advsdp",
                "Gram matrix PSD violation: min eigenvalue " +
                    std::to_string(lmin));

  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < e.values.size(); ++k)
    if (e.values[k] > tol.rankRel * lmax) keep.push_back(k);

  const int m = int(keep.size());
  Mat v(rows, keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const double s = std::sqrt(e.values[keep[c]]);
    for (std::size_t i = 0; i < rows; ++i)
      v(i, c) = s * e.vectors(i, keep[c]);
  }
  return fromVectors(f, std::move(v), m);
}

namespace {

struct DualProblemShape {
  sdp::Problem prob;
  std::size_t gramDim = 0;
};

// Shared assembly for the two solve phases. With minimizeW the scalar W is
// an extra 1x1 block and the objective; otherwise the per-x sums are capped
// at a fixed budget and the objective is the Gram trace (the usual
// rank-reduction pass over the optimal face).
DualProblemShape buildDualProblem(const BooleanFunction& f, bool minimizeW,
                                  double wCap) {
  const auto [f0, f1] = partition(f);
  const int n = f.n();
  const std::size_t nd = f.domainSize();

  DualProblemShape shape;
  shape.gramDim = nd * std::size_t(n);
  sdp::Problem& prob = shape.prob;

  prob.blockSizes.push_back(shape.gramDim);
  if (minimizeW) prob.blockSizes.push_back(1);
  const std::size_t slack0 = minimizeW ? 2 : 1;
  for (std::size_t i = 0; i < nd; ++i) prob.blockSizes.push_back(1);

  auto rowOf = [&](std::size_t xi, int j) {
    return xi * std::size_t(n) + std::size_t(j - 1);
  };

  for (const auto& x : f0) {
    const std::size_t xi = f.domainIndex(x);
    for (const auto& y : f1) {
      const std::size_t yi = f.domainIndex(y);
      sdp::SparseSym a;
      for (int j : differingBits(x, y)) a.add(0, rowOf(xi, j), rowOf(yi, j), 0.5);
      prob.constraints.push_back(std::move(a));
      prob.b.push_back(1.0);
    }
  }
  for (std::size_t xi = 0; xi < nd; ++xi) {
    sdp::SparseSym a;
    for (int j = 1; j <= n; ++j) a.add(0, rowOf(xi, j), rowOf(xi, j), 1.0);
    if (minimizeW) a.add(1, 0, 0, -1.0);
    a.add(slack0 + xi, 0, 0, 1.0);
    prob.constraints.push_back(std::move(a));
    prob.b.push_back(minimizeW ? 0.0 : wCap);
  }
  if (minimizeW) {
    prob.objective.add(1, 0, 0, 1.0);
  } else {
    for (std::size_t r = 0; r < shape.gramDim; ++r)
      prob.objective.add(0, r, r, 1.0);
  }
  return shape;
}

} // namespace

DualSolution solveDual(const BooleanFunction& f, const SolverTolerances& tol) {
  const auto [f0, f1] = partition(f);
  if (f0.empty() || f1.empty())
    throw Error(Error::Kind::Degenerate, "advsdp",
                "constant function: the dual SDP needs F0 and F1 nonempty");

  sdp::Options opts;
  opts.maxIter = tol.maxIter;

  // Phase one: minimize W.
  DualProblemShape phase1 = buildDualProblem(f, true, 0.0);
  const sdp::Result res = sdp::solve(phase1.prob, opts);

  GramMatrix gm;
  gm.n = f.n();
  gm.domain = f.domain();
  gm.M = res.X[0];
  la::symmetrize(gm.M);

  DualSolution d = extractVectors(f, gm, tol);
  d = polishFeasibility(f, d);
  d = rebalance(f, d);
  d.iterations = res.iterations;
  d.converged = (res.status == sdp::Status::Converged);
  d.gapRel = res.gapRel;

  if (!d.converged)
    return d;  // best iterate; caller inspects converged and residuals

  // Phase two: the interior point lands on the maximum-rank point of the
  // optimal face, which inflates the witness dimension m and with it every
  // downstream spectral computation. Re-solving with the objective
  // tr(M) at the fixed budget W picks out a low-rank optimum instead.
  // The rank pass may stop on the stall detector right at the optimal
  // face; that is fine as long as the extracted vectors pass the direct
  // feasibility and objective checks below. The budget carries a little
  // slack so the active per-x constraints keep an interior.
  DualProblemShape phase2 =
      buildDualProblem(f, false, d.W * (1.0 + 1e-7) + 1e-9);
  const sdp::Result res2 = sdp::solve(phase2.prob, opts);
  if (res2.gapRel <= 1e-6) {
    GramMatrix gm2;
    gm2.n = f.n();
    gm2.domain = f.domain();
    gm2.M = res2.X[0];
    la::symmetrize(gm2.M);
    try {
      DualSolution d2 = extractVectors(f, gm2, tol);
      d2 = polishFeasibility(f, d2);
      d2 = rebalance(f, d2);
      d2.iterations = res.iterations + res2.iterations;
      d2.converged = true;
      d2.gapRel = std::max(res.gapRel, res2.gapRel);
      if (d2.feasibilityResidual <= tol.feas &&
          d2.W <= d.W * (1.0 + tol.objRel) && d2.m <= d.m)
        d = std::move(d2);
    } catch (const Error&) {
      // keep the phase-one solution
    }
  }

  if (d.feasibilityResidual > tol.feas)
    throw Error(Error::Kind::Numeric, "advsdp",
                "converged solve left feasibility residual " +
                    std::to_string(d.feasibilityResidual) + " > " +
                    std::to_string(tol.feas));
  return d;
}

PrimalCertificate evaluatePrimal(const BooleanFunction& f,
                                 const la::Mat& gamma) {
  const std::size_t nd = f.domainSize();
  if (gamma.rows() != nd || gamma.cols() != nd)
    throw Error(Error::Kind::Validation, "advsdp",
                "adversary matrix must be |D| x |D|");
  if (la::asymmetry(gamma) > 1e-12)
    throw Error(Error::Kind::Validation, "advsdp",
                "adversary matrix must be symmetric");
  const auto& dom = f.domain();
  for (std::size_t i = 0; i < nd; ++i)
    for (std::size_t j = 0; j < nd; ++j)
      if (gamma(i, j) != 0.0 && f.value(dom[i]) == f.value(dom[j]))
        throw Error(Error::Kind::Validation, "advsdp",
                    "zero-pattern violation at (" + dom[i] + ", " + dom[j] +
                        ")");

  PrimalCertificate cert;
  cert.gamma = gamma;
  cert.gammaNorm = la::spectral_norm_sym(gamma);

  double maxJ = 0.0;
  for (int j = 1; j <= f.n(); ++j) {
    Mat masked(nd, nd);
    for (std::size_t i = 0; i < nd; ++i)
      for (std::size_t l = 0; l < nd; ++l)
        if (BooleanFunction::bit(dom[i], j) != BooleanFunction::bit(dom[l], j))
          masked(i, l) = gamma(i, l);
    maxJ = std::max(maxJ, la::spectral_norm_sym(masked));
  }
  cert.maxColumnNorm = maxJ;

  if (cert.gammaNorm == 0.0) {
    cert.value = 0.0;
  } else if (maxJ == 0.0) {
    cert.unbounded = true;
    cert.value = std::numeric_limits<double>::infinity();
  } else {
    cert.value = cert.gammaNorm / maxJ;
  }
  return cert;
}

double dualityGap(const DualSolution& d, const PrimalCertificate& p) {
  return d.W - p.value;
}

namespace {

DualSolution handDual(const BooleanFunction& f, int m,
                      const std::vector<std::tuple<std::string, int, Vec>>&
                          assignments) {
  Mat v(f.domainSize() * std::size_t(f.n()), std::size_t(m));
  for (const auto& [x, j, vec] : assignments) {
    const std::size_t r =
        f.domainIndex(x) * std::size_t(f.n()) + std::size_t(j - 1);
    for (int c = 0; c < m; ++c) v(r, std::size_t(c)) = vec[std::size_t(c)];
  }
  return fromVectors(f, std::move(v), m);
}

Mat crossPairGamma(const BooleanFunction& f,
                   const std::vector<std::pair<std::string, std::string>>&
                       pairs) {
  Mat g(f.domainSize(), f.domainSize());
  for (const auto& [x, y] : pairs) {
    g(f.domainIndex(x), f.domainIndex(y)) = 1.0;
    g(f.domainIndex(y), f.domainIndex(x)) = 1.0;
  }
  return g;
}

void requireRange(int n, const char* what) {
  if (n < 1 || n > 4)
    throw Error(Error::Kind::Usage, "advsdp",
                std::string(what) + " certificate needs n in [1,4]");
}

} // namespace

CertificatePair identCertificate() {
  CertificatePair c;
  c.f = boolfn::ident1();
  c.gamma = crossPairGamma(c.f, {{"0", "1"}});
  c.dual = handDual(c.f, 1, {{"0", 1, {1.0}}, {"1", 1, {1.0}}});
  c.exactValue = 1.0;
  return c;
}

CertificatePair orCertificate(int n) {
  requireRange(n, "OR");
  CertificatePair c;
  c.f = boolfn::orN(n);
  const std::string zero(std::size_t(n), '0');

  std::vector<std::pair<std::string, std::string>> pairs;
  for (int i = 0; i < n; ++i) {
    std::string e = zero;
    e[std::size_t(i)] = '1';
    pairs.emplace_back(zero, e);
  }
  c.gamma = crossPairGamma(c.f, pairs);

  const double lo = std::pow(double(n), -0.25);
  const double hi = std::pow(double(n), 0.25);
  std::vector<std::tuple<std::string, int, Vec>> assign;
  for (int j = 1; j <= n; ++j) assign.emplace_back(zero, j, Vec{lo});
  for (const auto& y : c.f.domain()) {
    if (y == zero) continue;
    const int jstar = int(y.find('1')) + 1;
    assign.emplace_back(y, jstar, Vec{hi});
  }
  c.dual = handDual(c.f, 1, assign);
  c.exactValue = std::sqrt(double(n));
  return c;
}

CertificatePair andCertificate(int n) {
  requireRange(n, "AND");
  CertificatePair c;
  c.f = boolfn::andN(n);
  const std::string ones(std::size_t(n), '1');

  std::vector<std::pair<std::string, std::string>> pairs;
  for (int i = 0; i < n; ++i) {
    std::string e = ones;
    e[std::size_t(i)] = '0';
    pairs.emplace_back(e, ones);
  }
  c.gamma = crossPairGamma(c.f, pairs);

  const double lo = std::pow(double(n), -0.25);
  const double hi = std::pow(double(n), 0.25);
  std::vector<std::tuple<std::string, int, Vec>> assign;
  for (int j = 1; j <= n; ++j) assign.emplace_back(ones, j, Vec{lo});
  for (const auto& x : c.f.domain()) {
    if (x == ones) continue;
    const int jstar = int(x.find('0')) + 1;
    assign.emplace_back(x, jstar, Vec{hi});
  }
  c.dual = handDual(c.f, 1, assign);
  c.exactValue = std::sqrt(double(n));
  return c;
}

CertificatePair parityCertificate(int n) {
  requireRange(n, "PARITY");
  CertificatePair c;
  c.f = boolfn::parityN(n);

  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& x : c.f.domain()) {
    if (c.f.value(x) == 1) continue;
    for (int i = 0; i < n; ++i) {
      std::string y = x;
      y[std::size_t(i)] = y[std::size_t(i)] == '0' ? '1' : '0';
      pairs.emplace_back(x, y);
    }
  }
  c.gamma = crossPairGamma(c.f, pairs);

  std::vector<std::tuple<std::string, int, Vec>> assign;
  for (const auto& x : c.f.domain()) {
    for (int j = 1; j <= n; ++j) {
      int suffix = 0;
      for (int l = j + 1; l <= n; ++l) suffix ^= BooleanFunction::bit(x, l);
      assign.emplace_back(x, j, Vec{suffix ? -1.0 : 1.0});
    }
  }
  c.dual = handDual(c.f, 1, assign);
  c.exactValue = double(n);
  return c;
}

CertificatePair maj3Certificate() {
  CertificatePair c;
  c.f = boolfn::maj3();

  // Cross pairs at Hamming distance one: weight-1 against weight-2 inputs.
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& x : c.f.domain()) {
    if (c.f.value(x) == 1) continue;
    for (int i = 0; i < 3; ++i) {
      std::string y = x;
      y[std::size_t(i)] = y[std::size_t(i)] == '0' ? '1' : '0';
      if (c.f.value(y) == 1) pairs.emplace_back(x, y);
    }
  }
  c.gamma = crossPairGamma(c.f, pairs);

  // Two-dimensional witness vectors. At each position t the two inputs
  // whose minority bit is elsewhere share a 60-degree pair of unit
  // vectors; the all-equal inputs sit on the bisector with norm 1/sqrt(3).
  const double rt3h = std::sqrt(3.0) / 2.0;
  auto wvec = [&](int r, int t) -> Vec {
    int other = -1;
    for (int u = 1; u <= 3; ++u)
      if (u != t && u != r) other = u;
    const double sign = (r < other) ? 0.5 : -0.5;
    return {rt3h, sign};
  };
  const Vec bisector = {1.0 / std::sqrt(3.0), 0.0};

  auto minorityPos = [](const std::string& x, char minority) {
    return int(x.find(minority)) + 1;
  };

  std::vector<std::tuple<std::string, int, Vec>> assign;
  for (const auto& x : c.f.domain()) {
    const int weight = int(std::count(x.begin(), x.end(), '1'));
    if (weight == 0 || weight == 3) {
      for (int j = 1; j <= 3; ++j) assign.emplace_back(x, j, bisector);
      continue;
    }
    // Weight-one inputs own the pair vector named by their minority
    // position; weight-two inputs share it through the remaining index,
    // which makes the distance-one constraints collapse to equal vectors.
    const int s = (weight == 1) ? minorityPos(x, '1') : minorityPos(x, '0');
    for (int t = 1; t <= 3; ++t) {
      if (t == s) continue;
      int r = s;
      if (weight == 2)
        for (int u = 1; u <= 3; ++u)
          if (u != s && u != t) r = u;
      assign.emplace_back(x, t, wvec(r, t));
    }
  }
  c.dual = handDual(c.f, 2, assign);
  c.exactValue = 2.0;
  return c;
}

void saveDual(const DualSolution& d, const std::string& path) {
  jsonio::Value doc = jsonio::Value::object();
  doc.set("n", d.n);
  doc.set("m", d.m);
  doc.set("W", d.W);
  jsonio::Value vecs = jsonio::Value::object();
  for (std::size_t xi = 0; xi < d.domain.size(); ++xi) {
    for (int j = 1; j <= d.n; ++j) {
      jsonio::Value arr = jsonio::Value::array();
      const double* row = d.vectors.row(d.rowOf(xi, j));
      for (int k = 0; k < d.m; ++k) arr.push(row[k]);
      vecs.set(d.domain[xi] + "," + std::to_string(j), std::move(arr));
    }
  }
  doc.set("vectors", std::move(vecs));
  jsonio::write_file(path, doc);
}

DualSolution loadDual(const BooleanFunction& f, const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Error::Kind::Parse, "advsdp", "cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Error::Kind::Parse, "advsdp",
                "malformed JSON in " + path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("m") ||
      !j.contains("W") || !j.contains("vectors") || !j["vectors"].is_object())
    throw Error(Error::Kind::Parse, "advsdp",
                "expected {n, m, W, vectors} in " + path);

  DualSolution d;
  d.n = j["n"].get<int>();
  d.m = j["m"].get<int>();
  if (d.n != f.n())
    throw Error(Error::Kind::Validation, "advsdp",
                "dual has n=" + std::to_string(d.n) + " but the function has n=" +
                    std::to_string(f.n()));
  if (d.m < 0)
    throw Error(Error::Kind::Validation, "advsdp", "negative witness dimension");
  d.domain = f.domain();
  d.vectors = Mat(f.domainSize() * std::size_t(d.n), std::size_t(d.m));
  for (std::size_t xi = 0; xi < d.domain.size(); ++xi) {
    for (int jj = 1; jj <= d.n; ++jj) {
      const std::string key = d.domain[xi] + "," + std::to_string(jj);
      if (!j["vectors"].contains(key))
        throw Error(Error::Kind::Validation, "advsdp",
                    "missing vector for key '" + key + "'");
      const auto& arr = j["vectors"][key];
      if (!arr.is_array() || int(arr.size()) != d.m)
        throw Error(Error::Kind::Validation, "advsdp",
                    "vector '" + key + "' must have m=" + std::to_string(d.m) +
                        " entries");
      for (int k = 0; k < d.m; ++k)
        d.vectors(d.rowOf(xi, jj), std::size_t(k)) = arr[std::size_t(k)].get<double>();
    }
  }
  d.W = j["W"].get<double>();
  d.feasibilityResidual = feasibilityResidual(f, d);
  return d;
}

} // namespace advq::advsdp
