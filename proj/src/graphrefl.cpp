#include "advq/graphrefl.hpp"

#include "advq/error.hpp"
#include "advq/jsonio.hpp"

#include <algorithm>
#include <cmath>

namespace advq::graphrefl {

using la::Mat;
using la::Vec;

std::string VertexIndex::label(std::size_t v) const {
  if (v < f0.size()) return f0[v];
  if (v == zeroVertex()) return "0";
  std::size_t off = v - f0.size() - 1;
  const int k = int(off % std::size_t(m)) + 1;
  off /= std::size_t(m);
  const int b = int(off % 2);
  const int j = int(off / 2) + 1;
  return std::to_string(j) + ":" + std::to_string(b) + ":" + std::to_string(k);
}

AdversaryGraph buildGraph(const BooleanFunction& f, const DualSolution& d,
                          const GraphOptions& opts) {
  const auto [f0, f1] = partition(f);
  if (f0.empty() || f1.empty())
    throw Error(Error::Kind::Degenerate, "graphrefl",
                "graph construction needs a non-constant function");
  if (d.n != f.n())
    throw Error(Error::Kind::Validation, "graphrefl",
                "dual solution built for a different arity");
  if (opts.kappa <= 0.0 || opts.kappa > 1.0)
    throw Error(Error::Kind::Validation, "graphrefl",
                "scaling kappa must lie in (0, 1]");

  AdversaryGraph g;
  g.f = f;
  g.idx.n = f.n();
  g.idx.m = d.m;
  g.idx.f0 = f0;
  g.W = d.W;
  g.kappa = opts.kappa;

  const std::size_t nf0 = f0.size();
  const std::size_t ni = g.idx.iSize();
  const std::size_t total = g.idx.size();

  g.t.assign(nf0, opts.kappa / std::sqrt(d.W));

  g.A = Mat(nf0, ni);
  for (std::size_t xi = 0; xi < nf0; ++xi) {
    const auto& x = f0[xi];
    const std::size_t di = f.domainIndex(x);
    for (int j = 1; j <= f.n(); ++j) {
      const int bbar = 1 - BooleanFunction::bit(x, j);
      const std::size_t row = d.rowOf(di, j);
      for (int k = 1; k <= d.m; ++k)
        g.A(xi, g.idx.iOffset(j, bbar, k)) =
            d.vectors(row, std::size_t(k - 1));
    }
  }

  g.B_G = Mat(nf0, 1 + ni);
  for (std::size_t xi = 0; xi < nf0; ++xi) {
    g.B_G(xi, 0) = g.t[xi];
    for (std::size_t c = 0; c < ni; ++c) g.B_G(xi, 1 + c) = g.A(xi, c);
  }

  g.A_G = Mat(total, total);
  for (std::size_t r = 0; r < nf0; ++r)
    for (std::size_t c = 0; c < 1 + ni; ++c) {
      g.A_G(r, nf0 + c) = g.B_G(r, c);
      g.A_G(nf0 + c, r) = g.B_G(r, c);
    }

  const la::Eigh eig = la::jacobi_eigh(g.A_G);
  double norm = 0.0;
  for (double v : eig.values) norm = std::max(norm, std::fabs(v));
  const double cut = opts.kernelTolRel * std::max(norm, 1e-300);
  g.norm = norm;
  g.kernelCut = cut;

  g.Delta = Mat(total, total);
  g.deltaRank = 0;
  g.kernelGap = norm;
  for (std::size_t k = 0; k < eig.values.size(); ++k) {
    if (std::fabs(eig.values[k]) <= cut) {
      ++g.deltaRank;
      for (std::size_t i = 0; i < total; ++i) {
        const double vi = eig.vectors(i, k);
        if (vi == 0.0) continue;
        for (std::size_t j = 0; j < total; ++j)
          g.Delta(i, j) += vi * eig.vectors(j, k);
      }
    } else {
      g.kernelGap = std::min(g.kernelGap, std::fabs(eig.values[k]));
    }
  }
  la::symmetrize(g.Delta);
  return g;
}

InputOperators buildInputOperators(const AdversaryGraph& g,
                                   const std::string& x) {
  if (!g.f.contains(x))
    throw Error(Error::Kind::Domain, "graphrefl",
                "input '" + x + "' not in the function domain");

  InputOperators ops;
  ops.x = x;
  ops.fx = g.f.value(x);
  ops.W = g.W;
  ops.graph = &g;

  const std::size_t total = g.idx.size();
  const std::size_t ni = g.idx.iSize();
  const std::size_t nf0 = g.idx.f0.size();
  const int n = g.idx.n;
  const int m = g.idx.m;

  ops.piDiag.assign(total, 1.0);
  ops.piBarDiag.assign(ni, 0.0);
  for (int j = 1; j <= n; ++j) {
    const int bbar = 1 - BooleanFunction::bit(x, j);
    for (int k = 1; k <= m; ++k) {
      ops.piDiag[g.idx.iVertex(j, bbar, k)] = 0.0;
      ops.piBarDiag[g.idx.iOffset(j, bbar, k)] = 1.0;
    }
  }

  // U = (2 Pi - 1)(2 Delta - 1): scale the rows of 2 Delta - 1 by the
  // reflection signs.
  ops.U = la::scaled(g.Delta, 2.0);
  for (std::size_t i = 0; i < total; ++i) ops.U(i, i) -= 1.0;
  for (std::size_t i = 0; i < total; ++i) {
    if (ops.piDiag[i] == 0.0)
      for (std::size_t j = 0; j < total; ++j) ops.U(i, j) = -ops.U(i, j);
  }

  // Row side F0 u I, column side {0} u I.
  ops.B_Gx = Mat(nf0 + ni, 1 + ni);
  ops.B_Gpx = Mat(nf0 + ni, ni);
  for (std::size_t r = 0; r < nf0; ++r) {
    ops.B_Gx(r, 0) = g.t[r];
    for (std::size_t c = 0; c < ni; ++c) {
      ops.B_Gx(r, 1 + c) = g.A(r, c);
      ops.B_Gpx(r, c) = g.A(r, c);
    }
  }
  for (std::size_t c = 0; c < ni; ++c) {
    if (ops.piBarDiag[c] != 0.0) {
      ops.B_Gx(nf0 + c, 1 + c) = 1.0;
      ops.B_Gpx(nf0 + c, c) = 1.0;
    }
  }
  return ops;
}

la::Mat oracleMatrix(const AdversaryGraph& g, const std::string& x) {
  if (!g.f.contains(x))
    throw Error(Error::Kind::Domain, "graphrefl",
                "input '" + x + "' not in the function domain");
  const std::size_t total = g.idx.size();
  Mat o(total, total);
  for (std::size_t v = 0; v <= g.idx.zeroVertex(); ++v) o(v, v) = 1.0;
  for (int j = 1; j <= g.idx.n; ++j) {
    const int xj = BooleanFunction::bit(x, j);
    for (int b = 0; b <= 1; ++b)
      for (int k = 1; k <= g.idx.m; ++k)
        o(g.idx.iVertex(j, b ^ xj, k), g.idx.iVertex(j, b, k)) = 1.0;
  }
  return o;
}

namespace {

bool oracleCheckImpl(const AdversaryGraph& g, const std::string& x,
                     const Vec& piDiag) {
  const std::size_t total = g.idx.size();
  if (piDiag.size() != total) return false;

  // Fixed sign matrix S: -1 on the b = 1 vertices of I, +1 elsewhere.
  Vec sign(total, 1.0);
  for (int j = 1; j <= g.idx.n; ++j)
    for (int k = 1; k <= g.idx.m; ++k) sign[g.idx.iVertex(j, 1, k)] = -1.0;

  const Mat o = oracleMatrix(g, x);

  // O_x S O_x S' with S' = identity; both factors diagonal/permutation, so
  // the product stays diagonal and can be compared entrywise.
  Mat conj = o;
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = 0; j < total; ++j) conj(i, j) *= sign[j];
  conj = la::matmul(conj, o);

  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = 0; j < total; ++j) {
      const double expected = (i == j) ? 2.0 * piDiag[i] - 1.0 : 0.0;
      if (std::fabs(conj(i, j) - expected) > 1e-12) return false;
    }
  }
  return true;
}

} // namespace

bool queryOracleCheck(const AdversaryGraph& g, const std::string& x) {
  return oracleCheckImpl(g, x, buildInputOperators(g, x).piDiag);
}

bool queryOracleCheck(const AdversaryGraph& g, const std::string& x,
                      const Vec& piDiag) {
  return oracleCheckImpl(g, x, piDiag);
}

double kernelTransferResidual(const AdversaryGraph& g,
                              const InputOperators& ops) {
  const std::size_t nf0 = g.idx.f0.size();
  const std::size_t ni = g.idx.iSize();
  const std::size_t gdim = g.idx.size();

  // Delta restricted to the two sides of the bipartition.
  Mat deltaCols(1 + ni, gdim);  // rows of Delta on {0} u I
  for (std::size_t r = 0; r < 1 + ni; ++r)
    for (std::size_t w = 0; w < gdim; ++w)
      deltaCols(r, w) = g.Delta(nf0 + r, w);
  Mat deltaF0(nf0, gdim);
  for (std::size_t r = 0; r < nf0; ++r)
    for (std::size_t w = 0; w < gdim; ++w) deltaF0(r, w) = g.Delta(r, w);

  // Row side of A_G(x) applied to the embedded Delta: the F0 rows must
  // vanish and the extra I rows must read back the complement rows of
  // Delta; the column side must vanish outright.
  const Mat top = la::matmul(ops.B_Gx, deltaCols);
  double worst = 0.0;
  for (std::size_t r = 0; r < nf0; ++r)
    for (std::size_t w = 0; w < gdim; ++w)
      worst = std::max(worst, std::fabs(top(r, w)));
  for (std::size_t o = 0; o < ni; ++o) {
    const double keep = ops.piBarDiag[o];
    for (std::size_t w = 0; w < gdim; ++w) {
      const double expected = keep * g.Delta(nf0 + 1 + o, w);
      worst = std::max(worst, std::fabs(top(nf0 + o, w) - expected));
    }
  }
  // only the F0 block of the embedded Delta is nonzero on the row side
  Mat padded(ops.B_Gx.rows(), gdim);
  for (std::size_t r = 0; r < nf0; ++r)
    for (std::size_t w = 0; w < gdim; ++w) padded(r, w) = deltaF0(r, w);
  const Mat bottom = la::matmul_tn(ops.B_Gx, padded);
  worst = std::max(worst, la::max_abs(bottom));
  return worst;
}

void saveGraph(const AdversaryGraph& g, const std::string& path) {
  jsonio::Value doc = jsonio::Value::object();
  doc.set("n", g.idx.n);
  doc.set("m", g.idx.m);
  doc.set("W", g.W);
  doc.set("kappa", g.kappa);
  doc.set("delta_rank", std::int64_t(g.deltaRank));
  doc.set("kernel_gap", g.kernelGap);

  jsonio::Value verts = jsonio::Value::array();
  for (std::size_t v = 0; v < g.idx.size(); ++v) verts.push(g.idx.label(v));
  doc.set("vertices", std::move(verts));

  jsonio::Value entries = jsonio::Value::array();
  for (std::size_t r = 0; r < g.B_G.rows(); ++r)
    for (std::size_t c = 0; c < g.B_G.cols(); ++c) {
      if (g.B_G(r, c) == 0.0) continue;
      jsonio::Value e = jsonio::Value::object();
      e.set("row", g.idx.label(r));
      e.set("col", g.idx.label(g.idx.f0.size() + c));
      e.set("weight", g.B_G(r, c));
      entries.push(std::move(e));
    }
  doc.set("B_G", std::move(entries));
  jsonio::write_file(path, doc);
}

} // namespace advq::graphrefl
