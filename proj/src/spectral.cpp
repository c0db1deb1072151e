#include "advq/spectral.hpp"

#include "advq/error.hpp"
#include "advq/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace advq::spectral {

using advsdp::DualSolution;
using boolfn::BooleanFunction;
using la::Mat;
using la::Vec;
using report::GapReport;
using report::GapRow;

namespace {

constexpr double kPassSlack = 1e-12;  // absolute slack on upper bounds

// Relative cut under which an eigenvalue of the embedded adjacency matrix
// counts as zero when a grid asks for the gamma = 0 window.
constexpr double kKernelFloorRel = 1e-12;

double vecDot(const Vec& a, const Vec& b) {
  return advq::kernels::dot(a.data(), b.data(), a.size());
}

void checkProjector(const Mat& p, double tol, const char* what) {
  if (p.rows() != p.cols())
    throw Error(Error::Kind::Validation, "spectral",
                std::string(what) + " is not square");
  if (la::asymmetry(p) > tol)
    throw Error(Error::Kind::Validation, "spectral",
                std::string(what) + " is not symmetric");
  const Mat pp = la::matmul(p, p);
  if (la::max_abs(la::sub(pp, p)) > tol)
    throw Error(Error::Kind::Validation, "spectral",
                std::string(what) + " is not idempotent");
}

// Columns with eigenvalue above 1/2 span the range, the rest the kernel.
std::pair<Mat, Mat> splitProjectorBasis(const Mat& p) {
  const la::Eigh e = la::jacobi_eigh(p);
  std::size_t rank = 0;
  for (double v : e.values)
    if (v > 0.5) ++rank;
  Mat range(p.rows(), rank), kernel(p.rows(), p.rows() - rank);
  std::size_t ri = 0, ki = 0;
  for (std::size_t k = 0; k < e.values.size(); ++k) {
    if (e.values[k] > 0.5) {
      for (std::size_t i = 0; i < p.rows(); ++i) range(i, ri) = e.vectors(i, k);
      ++ri;
    } else {
      for (std::size_t i = 0; i < p.rows(); ++i) kernel(i, ki) = e.vectors(i, k);
      ++ki;
    }
  }
  return {range, kernel};
}

// Symmetric bipartite embedding of a biadjacency matrix, with the
// |ref|-masses of its eigenvalue windows. Vertices are ordered rows first,
// then columns; refCol names the column carrying the marked vertex.
struct EmbeddedSpectrum {
  std::vector<double> eigenvalues;
  std::vector<double> refOverlapSq;
  double norm = 0.0;

  double massWithin(double gamma) const {
    const double cut = std::max(gamma, kKernelFloorRel * norm);
    double m = 0.0;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i)
      if (std::fabs(eigenvalues[i]) <= cut) m += refOverlapSq[i];
    return m;
  }
};

EmbeddedSpectrum embedAndDecompose(const Mat& b, std::size_t refCol) {
  const std::size_t rows = b.rows();
  const std::size_t cols = b.cols();
  Mat aG(rows + cols, rows + cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      aG(r, rows + c) = b(r, c);
      aG(rows + c, r) = b(r, c);
    }
  const la::Eigh e = la::jacobi_eigh(aG);

  EmbeddedSpectrum out;
  out.eigenvalues = e.values;
  out.refOverlapSq.resize(e.values.size());
  const std::size_t ref = rows + refCol;
  for (std::size_t k = 0; k < e.values.size(); ++k) {
    const double o = e.vectors(ref, k);
    out.refOverlapSq[k] = o * o;
    out.norm = std::max(out.norm, std::fabs(e.values[k]));
  }
  return out;
}

Vec zeroVertexRef(const AdversaryGraph& g) {
  Vec ref(g.idx.size(), 0.0);
  ref[g.idx.zeroVertex()] = 1.0;
  return ref;
}

} // namespace

std::vector<ReflectionSpectrum::Phase> ReflectionSpectrum::phases(
    const Vec& ref) const {
  std::vector<Phase> out;
  for (const auto& b : blocks) {
    if (b.type == JordanBlock::Type::Rotation) {
      const double a = vecDot(b.v, ref);
      const double c = vecDot(b.vperp, ref);
      const double half = 0.5 * (a * a + c * c);
      out.push_back({b.theta, half});
      out.push_back({-b.theta, half});
    } else {
      const double a = vecDot(b.v, ref);
      out.push_back({b.unitEigenvalue() ? 0.0 : M_PI, a * a});
    }
  }
  return out;
}

double ReflectionSpectrum::massInPhaseWindow(const Vec& ref,
                                             double Theta) const {
  double m = 0.0;
  for (const auto& p : phases(ref))
    if (std::fabs(p.theta) <= Theta) m += p.overlap;
  return m;
}

double ReflectionSpectrum::eigenvalueOneMass(const Vec& ref) const {
  double m = 0.0;
  for (const auto& b : blocks) {
    if (b.type == JordanBlock::Type::Rotation || !b.unitEigenvalue()) continue;
    const double a = vecDot(b.v, ref);
    m += a * a;
  }
  return m;
}

la::Mat ReflectionSpectrum::reconstruct() const {
  Mat u(dim, dim);
  for (const auto& b : blocks) {
    if (b.type == JordanBlock::Type::Rotation) {
      const double c = std::cos(b.theta);
      const double s = std::sin(b.theta);
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
          u(i, j) += c * (b.v[i] * b.v[j] + b.vperp[i] * b.vperp[j]) +
                     s * (b.vperp[i] * b.v[j] - b.v[i] * b.vperp[j]);
    } else {
      const double sign = b.unitEigenvalue() ? 1.0 : -1.0;
      for (std::size_t i = 0; i < dim; ++i) {
        if (b.v[i] == 0.0) continue;
        for (std::size_t j = 0; j < dim; ++j)
          u(i, j) += sign * b.v[i] * b.v[j];
      }
    }
  }
  return u;
}

double ReflectionSpectrum::pairingResidual(const Vec& ref) const {
  double worst = 0.0;
  const std::complex<double> iu(0.0, 1.0);
  for (const auto& b : blocks) {
    if (b.type != JordanBlock::Type::Rotation) continue;
    const double a = vecDot(b.v, ref);
    const double c = vecDot(b.vperp, ref);
    const std::complex<double> plus = (a - iu * c) / std::sqrt(2.0);
    const std::complex<double> minus = (a + iu * c) / std::sqrt(2.0);
    worst =
        std::max(worst, std::abs(plus - std::exp(-iu * b.theta) * minus));
  }
  return worst;
}

ReflectionSpectrum jordanDecompose(const Mat& pi, const Mat& delta,
                                   const JordanOptions& opts) {
  checkProjector(pi, opts.projectorTol, "Pi");
  checkProjector(delta, opts.projectorTol, "Delta");
  if (pi.rows() != delta.rows())
    throw Error(Error::Kind::Validation, "spectral",
                "projector dimensions differ");

  const std::size_t dim = pi.rows();
  ReflectionSpectrum spect;
  spect.dim = dim;

  const auto [range, kernel] = splitProjectorBasis(delta);

  // Range side: eigenvectors of Pi compressed to range(Delta).
  std::size_t rotations = 0;
  if (range.cols() > 0) {
    const Mat piRange = la::matmul_tn(range, la::matmul(pi, range));
    const la::Eigh e = la::jacobi_eigh(piRange);
    for (std::size_t k = 0; k < e.values.size(); ++k) {
      const double lambda = std::clamp(e.values[k], 0.0, 1.0);
      Vec v(dim, 0.0);
      for (std::size_t c = 0; c < range.cols(); ++c) {
        const double w = e.vectors(c, k);
        if (w == 0.0) continue;
        for (std::size_t i = 0; i < dim; ++i) v[i] += w * range(i, c);
      }

      JordanBlock blk;
      blk.v = std::move(v);
      if (lambda >= 1.0 - opts.classifyTol) {
        blk.type = JordanBlock::Type::FixedBoth;
        blk.lambda = 1.0;
      } else if (lambda <= opts.classifyTol) {
        blk.type = JordanBlock::Type::FixedDelta;
        blk.lambda = 0.0;
        blk.theta = M_PI;
      } else {
        blk.type = JordanBlock::Type::Rotation;
        blk.lambda = lambda;
        blk.theta = 2.0 * std::acos(std::sqrt(lambda));
        // vperp = (1 - Delta) Pi v, normalized
        Vec pv = la::matvec(pi, blk.v);
        const Vec dpv = la::matvec(delta, pv);
        for (std::size_t i = 0; i < dim; ++i) pv[i] -= dpv[i];
        const double nrm = std::sqrt(advq::kernels::nrm2sq(pv.data(), dim));
        if (nrm <= 0.0)
          throw Error(Error::Kind::Numeric, "spectral",
                      "degenerate rotation block");
        advq::kernels::scal(1.0 / nrm, pv.data(), dim);
        blk.vperp = std::move(pv);
        ++rotations;
      }
      spect.blocks.push_back(std::move(blk));
    }
  }

  // Complement side: rotation partners reappear at 1 - lambda and are
  // already covered by vperp; the rest are one-dimensional blocks.
  std::size_t partners = 0;
  if (kernel.cols() > 0) {
    const Mat piKer = la::matmul_tn(kernel, la::matmul(pi, kernel));
    const la::Eigh e = la::jacobi_eigh(piKer);
    for (std::size_t k = 0; k < e.values.size(); ++k) {
      const double mu = std::clamp(e.values[k], 0.0, 1.0);
      if (mu > opts.classifyTol && mu < 1.0 - opts.classifyTol) {
        ++partners;
        continue;
      }
      Vec v(dim, 0.0);
      for (std::size_t c = 0; c < kernel.cols(); ++c) {
        const double w = e.vectors(c, k);
        if (w == 0.0) continue;
        for (std::size_t i = 0; i < dim; ++i) v[i] += w * kernel(i, c);
      }
      JordanBlock blk;
      blk.v = std::move(v);
      if (mu >= 1.0 - opts.classifyTol) {
        blk.type = JordanBlock::Type::FixedPi;
        blk.theta = M_PI;
      } else {
        blk.type = JordanBlock::Type::FixedNeither;
      }
      spect.blocks.push_back(std::move(blk));
    }
  }

  if (partners != rotations)
    throw Error(Error::Kind::Numeric, "spectral",
                "Jordan decomposition mismatch: " + std::to_string(rotations) +
                    " rotation blocks vs " + std::to_string(partners) +
                    " complement partners");
  return spect;
}

ReflectionSpectrum jordanDecompose(const InputOperators& ops,
                                   const JordanOptions& opts) {
  const std::size_t dim = ops.piDiag.size();
  Mat pi(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) pi(i, i) = ops.piDiag[i];
  return jordanDecompose(pi, ops.graph->Delta, opts);
}

Witness witnessPositive(const AdversaryGraph& g, const DualSolution& d,
                        const std::string& x) {
  if (g.f.value(x) != 1)
    throw Error(Error::Kind::Domain, "spectral",
                "positive witness requires f(x) = 1");

  const std::size_t ni = g.idx.iSize();
  const std::size_t di = g.f.domainIndex(x);

  // psi = -(sqrt(W)/kappa) |0> + sum_j |j, x_j> (x) |v_xj> on {0} u I.
  Witness w;
  w.psi.assign(1 + ni, 0.0);
  w.psi[0] = -std::sqrt(g.W) / g.kappa;
  for (int j = 1; j <= g.idx.n; ++j) {
    const int xj = BooleanFunction::bit(x, j);
    const std::size_t row = d.rowOf(di, j);
    for (int k = 1; k <= g.idx.m; ++k)
      w.psi[1 + g.idx.iOffset(j, xj, k)] = d.vectors(row, std::size_t(k - 1));
  }

  // Residual of B_G(x) psi = 0: the F0 rows read (t | A) psi, the extra I
  // rows read PiBar(x) psi and vanish because psi sits on the x_j side.
  const auto ops = graphrefl::buildInputOperators(g, x);
  const Vec top = la::matvec(ops.B_Gx, w.psi);
  w.residual = la::norm2(top);

  const double psiSq = advq::kernels::nrm2sq(w.psi.data(), w.psi.size());
  w.overlap = (w.psi[0] * w.psi[0]) / psiSq;
  return w;
}

Witness witnessNegative(const AdversaryGraph& g, const DualSolution& d,
                        const std::string& x) {
  if (g.f.value(x) != 0)
    throw Error(Error::Kind::Domain, "spectral",
                "negative witness requires f(x) = 0");

  const std::size_t ni = g.idx.iSize();
  const std::size_t nf0 = g.idx.f0.size();
  const std::size_t di = g.f.domainIndex(x);

  // psi = -|x> + sum_j |j, ~x_j> (x) |v_xj> on F0 u I.
  Witness w;
  w.psi.assign(nf0 + ni, 0.0);
  std::size_t xPos = nf0;
  for (std::size_t i = 0; i < nf0; ++i)
    if (g.idx.f0[i] == x) xPos = i;
  w.psi[xPos] = -1.0;
  for (int j = 1; j <= g.idx.n; ++j) {
    const int bbar = 1 - BooleanFunction::bit(x, j);
    const std::size_t row = d.rowOf(di, j);
    for (int k = 1; k <= g.idx.m; ++k)
      w.psi[nf0 + g.idx.iOffset(j, bbar, k)] =
          d.vectors(row, std::size_t(k - 1));
  }

  const auto ops = graphrefl::buildInputOperators(g, x);
  const Vec bottom = la::matvec_t(ops.B_Gpx, w.psi);
  w.residual = la::norm2(bottom);

  const double psiSq = advq::kernels::nrm2sq(w.psi.data(), w.psi.size());
  const double tPsi = -g.t[xPos];
  w.overlap = (tPsi * tPsi) / psiSq;
  return w;
}

GapReport verifyBipartiteGap(const Mat& bPrime, const Vec& t, const Vec& psi,
                             const std::vector<double>& gammaGrid) {
  if (t.size() != bPrime.rows() || psi.size() != bPrime.rows())
    throw Error(Error::Kind::Validation, "spectral",
                "t and psi must live on the row side of B'");

  const Vec ker = la::matvec_t(bPrime, psi);
  const double kerResid = la::norm2(ker);
  if (kerResid > 1e-8)
    throw Error(Error::Kind::Validation, "spectral",
                "psi is not a kernel vector of B'^T: residual " +
                    std::to_string(kerResid));

  const double tPsi = vecDot(t, psi);
  const double psiSq = advq::kernels::nrm2sq(psi.data(), psi.size());
  const double delta = (tPsi * tPsi) / psiSq;
  if (!(delta > 0.0))
    throw Error(Error::Kind::Validation, "spectral",
                "effective-gap certificate needs <t|psi> != 0");

  // G = (t | B') with the new vertex 0 in the first column.
  Mat b(bPrime.rows(), 1 + bPrime.cols());
  for (std::size_t r = 0; r < bPrime.rows(); ++r) {
    b(r, 0) = t[r];
    for (std::size_t c = 0; c < bPrime.cols(); ++c) b(r, 1 + c) = bPrime(r, c);
  }
  const EmbeddedSpectrum es = embedAndDecompose(b, 0);

  GapReport rep;
  rep.name = "bipartite-gap";
  rep.direction = GapReport::Direction::Upper;
  for (double gamma : gammaGrid) {
    GapRow row;
    row.parameter = gamma;
    row.measured = es.massWithin(gamma);
    row.bound = 8.0 * gamma * gamma / delta;
    row.pass = row.measured <= row.bound + kPassSlack;
    rep.rows.push_back(row);
  }
  rep.finalize();
  return rep;
}

GapReport verifyEffectiveGap(const InputOperators& ops,
                             const std::vector<double>& cGrid) {
  if (ops.fx != 0)
    throw Error(Error::Kind::Domain, "spectral",
                "effective-gap check requires f(x) = 0");

  const double W = ops.W;
  const EmbeddedSpectrum es = embedAndDecompose(ops.B_Gx, 0);

  GapReport rep;
  rep.name = "effective-gap";
  rep.input = ops.x;
  rep.W = W;
  rep.direction = GapReport::Direction::Upper;
  for (double c : cGrid) {
    GapRow row;
    row.parameter = c;
    row.measured = es.massWithin(c / W);
    row.bound = 72.0 * (1.0 + 1.0 / W) * c * c;
    row.pass = row.measured <= row.bound + kPassSlack;
    rep.rows.push_back(row);
  }
  rep.finalize();
  return rep;
}

GapReport verifyPhaseGap(const InputOperators& ops,
                         const std::vector<double>& thetaGrid) {
  return verifyPhaseGap(ops, jordanDecompose(ops), thetaGrid);
}

GapReport verifyPhaseGap(const InputOperators& ops,
                         const ReflectionSpectrum& spect,
                         const std::vector<double>& thetaGrid) {
  const AdversaryGraph& g = *ops.graph;
  const Vec ref = zeroVertexRef(g);

  GapReport rep;
  rep.name = "phase-gap";
  rep.input = ops.x;
  rep.W = g.W;

  if (ops.fx == 1) {
    rep.direction = GapReport::Direction::Lower;
    GapRow row;
    row.parameter = 0.0;
    row.measured = spect.eigenvalueOneMass(ref);
    row.bound = 1.0 / (1.0 + g.kappa * g.kappa);
    row.pass = row.measured >= row.bound - 1e-9;
    rep.rows.push_back(row);
  } else {
    rep.direction = GapReport::Direction::Upper;
    for (double Theta : thetaGrid) {
      GapRow row;
      row.parameter = Theta;
      row.measured = spect.massInPhaseWindow(ref, Theta);
      const double s = 2.0 * std::sqrt(6.0 * Theta * g.W) + Theta / 2.0;
      row.bound = s * s;
      row.pass = row.measured <= row.bound + kPassSlack;
      rep.rows.push_back(row);
    }
  }
  rep.finalize();
  return rep;
}

GapReport alg3ProjectorReport(const InputOperators& ops,
                              const ReflectionSpectrum& spect,
                              long long tau) {
  const AdversaryGraph& g = *ops.graph;
  const Vec ref = zeroVertexRef(g);
  const double W = g.W;

  GapReport rep;
  rep.name = "alg3-projectors";
  rep.input = ops.x;
  rep.W = W;

  if (ops.fx == 1) {
    rep.direction = GapReport::Direction::Lower;
    const double m0 = spect.eigenvalueOneMass(ref);
    GapRow r1{0.0, m0, 1.0 / (1.0 + g.kappa * g.kappa), false};
    r1.pass = r1.measured >= r1.bound - 1e-9;
    rep.rows.push_back(r1);
    const double crude = (2.0 * m0 - 1.0) * (2.0 * m0 - 1.0);
    GapRow r2{0.0, crude, 0.64, false};
    r2.pass = r2.measured >= r2.bound - 1e-9;
    rep.rows.push_back(r2);
    rep.finalize();
    return rep;
  }

  rep.direction = GapReport::Direction::Upper;
  const double Theta = 1.0 / (2000.0 * W);
  const double Lambda = M_PI - Theta;

  const double mTheta = spect.massInPhaseWindow(ref, Theta);
  const double xiBound =
      std::pow(2.0 * std::sqrt(6.0 * Theta * W) + Theta / 2.0, 2.0);
  GapRow r1{Theta, mTheta, xiBound, false};
  r1.pass = r1.measured <= r1.bound + kPassSlack;
  rep.rows.push_back(r1);

  const double mLambdaBar = 1.0 - spect.massInPhaseWindow(ref, Lambda);
  const double sinHalf = std::sin(Lambda / 2.0);
  GapRow r2{Lambda, mLambdaBar, 1.0 / (10.0 * sinHalf * sinHalf), false};
  r2.pass = r2.measured <= r2.bound + kPassSlack;
  rep.rows.push_back(r2);

  // Output-probability bound assembled from the measured masses, exactly
  // the chain that closes the 61% soundness constant.
  const double sigmaSq = std::max(1.0 - mTheta - mLambdaBar, 0.0);
  const double eps =
      1.0 / (2.0 * double(tau) * std::min(std::sin(Theta), std::sin(Lambda)));
  const double p1Bound = 1.0 - 0.5 * (1.0 - eps) * sigmaSq * sigmaSq;
  GapRow r3{double(tau), p1Bound, 0.61, false};
  r3.pass = r3.measured <= r3.bound + kPassSlack;
  rep.rows.push_back(r3);

  rep.finalize();
  return rep;
}

double kernelZeroOverlap(const AdversaryGraph& g) {
  const std::size_t z = g.idx.zeroVertex();
  return g.Delta(z, z);
}

std::vector<double> logGrid(double lo, double hi, int points) {
  if (points < 2 || lo <= 0.0 || hi <= lo)
    throw Error(Error::Kind::Usage, "spectral", "bad log grid parameters");
  std::vector<double> out(points);
  const double step = std::log(hi / lo) / double(points - 1);
  for (int i = 0; i < points; ++i) out[i] = lo * std::exp(step * i);
  out.back() = hi;
  return out;
}

std::vector<double> linearGrid(double lo, double hi, int points) {
  if (points < 1 || hi < lo)
    throw Error(Error::Kind::Usage, "spectral", "bad linear grid parameters");
  std::vector<double> out(points);
  if (points == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / double(points - 1);
  for (int i = 0; i < points; ++i) out[i] = lo + step * i;
  out.back() = hi;
  return out;
}

jsonio::Value toJson(const ReflectionSpectrum& s, const Vec& ref) {
  jsonio::Value doc = jsonio::Value::object();
  doc.set("dim", std::int64_t(s.dim));
  jsonio::Value blocks = jsonio::Value::array();
  for (const auto& b : s.blocks) {
    jsonio::Value v = jsonio::Value::object();
    const char* type = "rotation";
    switch (b.type) {
      case JordanBlock::Type::FixedBoth: type = "fixed-both"; break;
      case JordanBlock::Type::FixedDelta: type = "fixed-delta"; break;
      case JordanBlock::Type::FixedPi: type = "fixed-pi"; break;
      case JordanBlock::Type::FixedNeither: type = "fixed-neither"; break;
      case JordanBlock::Type::Rotation: type = "rotation"; break;
    }
    v.set("type", type);
    v.set("theta", b.theta);
    if (b.type == JordanBlock::Type::Rotation) v.set("lambda", b.lambda);
    double o = vecDot(b.v, ref);
    double oSq = o * o;
    if (b.type == JordanBlock::Type::Rotation) {
      const double c = vecDot(b.vperp, ref);
      oSq += c * c;
    }
    v.set("overlap", oSq);
    blocks.push(std::move(v));
  }
  doc.set("blocks", std::move(blocks));
  return doc;
}

} // namespace advq::spectral
