#include "advq/sdp.hpp"

#include "advq/error.hpp"
#include "advq/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace advq::sdp {

using la::Mat;
using la::Vec;

void SparseSym::add(std::size_t block, std::size_t row, std::size_t col,
                    double value) {
  if (row > col) std::swap(row, col);
  entries.push_back({block, row, col, value});
}

namespace {

BlockMat make_blocks(const std::vector<std::size_t>& sizes, double diag) {
  BlockMat m;
  m.reserve(sizes.size());
  for (std::size_t s : sizes) {
    Mat b(s, s);
    for (std::size_t i = 0; i < s; ++i) b(i, i) = diag;
    m.push_back(std::move(b));
  }
  return m;
}

Mat dense_block(const SparseSym& s, std::size_t block, std::size_t size) {
  Mat m(size, size);
  for (const auto& e : s.entries) {
    if (e.block != block) continue;
    m(e.row, e.col) += e.value;
    if (e.row != e.col) m(e.col, e.row) += e.value;
  }
  return m;
}

// <S, M> treating S as the symmetric matrix its entries describe; M need
// not be symmetric.
double sparse_inner(const SparseSym& s, const BlockMat& m) {
  double acc = 0.0;
  for (const auto& e : s.entries) {
    const Mat& blk = m[e.block];
    if (e.row == e.col)
      acc += e.value * blk(e.row, e.col);
    else
      acc += e.value * (blk(e.row, e.col) + blk(e.col, e.row));
  }
  return acc;
}

void sparse_axpy(double a, const SparseSym& s, BlockMat& m) {
  for (const auto& e : s.entries) {
    m[e.block](e.row, e.col) += a * e.value;
    if (e.row != e.col) m[e.block](e.col, e.row) += a * e.value;
  }
}

double block_inner(const BlockMat& a, const BlockMat& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += la::trace_product(a[i], b[i]);
  return acc;
}

double block_max_abs(const BlockMat& a) {
  double m = 0.0;
  for (const auto& blk : a) m = std::max(m, la::max_abs(blk));
  return m;
}

std::size_t total_dim(const std::vector<std::size_t>& sizes) {
  std::size_t t = 0;
  for (std::size_t s : sizes) t += s;
  return t;
}

// Largest alpha in [0, cap] with S + alpha * dS PSD, located by bisection
// on Cholesky feasibility. The returned value is itself certified PSD and
// within about 0.1% of the true boundary, which is all the fractional step
// rule needs.
double max_step(const BlockMat& s, const BlockMat& ds, double cap) {
  double alpha = cap;
  for (std::size_t bi = 0; bi < s.size(); ++bi) {
    const std::size_t n = s[bi].rows();
    if (n == 1) {
      const double sv = s[bi](0, 0), dv = ds[bi](0, 0);
      if (dv < 0.0) alpha = std::min(alpha, -sv / dv);
      continue;
    }
    Mat trial(n, n), l;
    auto feasible = [&](double a) {
      trial = s[bi];
      la::add_inplace(trial, ds[bi], a);
      return la::cholesky(trial, l);
    };
    if (feasible(alpha)) continue;
    double lo = 0.0, hi = alpha;
    for (int it = 0; it < 14 && hi - lo > 1e-3 * hi + 1e-14; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (feasible(mid))
        lo = mid;
      else
        hi = mid;
    }
    alpha = lo;
  }
  return std::max(alpha, 0.0);
}

struct Direction {
  Vec dy;
  BlockMat dX;
  BlockMat dZ;
};

} // namespace

const char* status_name(Status s) {
  switch (s) {
    case Status::Converged: return "converged";
    case Status::MaxIterations: return "max-iterations";
    case Status::Stalled: return "stalled";
  }
  return "unknown";
}

Result solve(const Problem& p, const Options& opts) {
  const std::size_t nblk = p.blockSizes.size();
  const std::size_t K = p.constraints.size();
  if (p.b.size() != K)
    throw Error(Error::Kind::Usage, "sdp", "b size mismatch");

  const std::size_t dim = total_dim(p.blockSizes);

  double bmax = 0.0;
  for (double v : p.b) bmax = std::max(bmax, std::fabs(v));
  double amax = 1.0;
  for (const auto& a : p.constraints)
    for (const auto& e : a.entries) amax = std::max(amax, std::fabs(e.value));
  double cmax = 0.0;
  for (const auto& e : p.objective.entries)
    cmax = std::max(cmax, std::fabs(e.value));

  const double rho =
      opts.initScale > 0.0
          ? opts.initScale
          : std::max({10.0, std::sqrt(double(dim)), 2.0 * bmax, 2.0 * amax,
                      2.0 * cmax});

  Result res;
  res.X = make_blocks(p.blockSizes, rho);
  res.Z = make_blocks(p.blockSizes, rho);
  res.y.assign(K, 0.0);

  BlockMat cDense;
  for (std::size_t bi = 0; bi < nblk; ++bi)
    cDense.push_back(dense_block(p.objective, bi, p.blockSizes[bi]));

  const bool trace = std::getenv("ADVQ_SDP_TRACE") != nullptr;
  int stallCount = 0;

  // Iterates can degrade once X touches the PSD boundary, so keep the best
  // one seen and return it if later steps stop making progress.
  Result best = res;
  double bestScore = std::numeric_limits<double>::infinity();
  int sinceImprovement = 0;

  for (int iter = 0; iter < opts.maxIter; ++iter) {
    res.iterations = iter;

    // Residuals.
    Vec rp(K);
    double rpMax = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      rp[k] = p.b[k] - sparse_inner(p.constraints[k], res.X);
      rpMax = std::max(rpMax, std::fabs(rp[k]));
    }
    BlockMat rd = cDense;
    for (std::size_t bi = 0; bi < nblk; ++bi)
      la::add_inplace(rd[bi], res.Z[bi], -1.0);
    for (std::size_t k = 0; k < K; ++k)
      sparse_axpy(-res.y[k], p.constraints[k], rd);
    const double rdMax = block_max_abs(rd);

    const double xz = block_inner(res.X, res.Z);
    const double mu = xz / double(dim);
    res.primalObj = sparse_inner(p.objective, res.X);
    res.dualObj = la::dot(res.y, p.b);
    res.gapRel = xz / (1.0 + std::fabs(res.primalObj) + std::fabs(res.dualObj));
    res.primalResidual = rpMax / (1.0 + bmax);
    res.dualResidual = rdMax / (1.0 + cmax);

    const double score = std::max({res.gapRel / opts.tolGapRel,
                                   res.primalResidual / opts.tolPrimal,
                                   res.dualResidual / opts.tolDual});
    if (score < bestScore) {
      bestScore = score;
      best = res;
      sinceImprovement = 0;
    } else {
      ++sinceImprovement;
    }

    if (score <= 1.0) {
      res.status = Status::Converged;
      return res;
    }
    if (sinceImprovement >= 6) {
      best.status = bestScore <= 1.0 ? Status::Converged : Status::Stalled;
      return best;
    }

    // Z^-1 per block.
    BlockMat zinv(nblk);
    bool zok = true;
    for (std::size_t bi = 0; bi < nblk; ++bi) {
      Mat l;
      if (!la::cholesky(res.Z[bi], l)) {
        zok = false;
        break;
      }
      zinv[bi] = la::cholesky_inverse(l);
    }
    if (!zok) {
      best.status = Status::Stalled;
      return best;
    }

    // Schur complement M_ij = sum_b tr(A_i Zinv A_j X). The coefficient
    // matrices are sparse, so Zinv A_j X is assembled from rank-one terms
    // Zinv(:,r) X(c,:) instead of dense triple products.
    Mat schur(K, K);
    std::vector<BlockMat> t(K);
    for (std::size_t j = 0; j < K; ++j) {
      t[j].resize(nblk);
      for (std::size_t bi = 0; bi < nblk; ++bi)
        t[j][bi] = Mat(p.blockSizes[bi], p.blockSizes[bi]);
      for (const auto& e : p.constraints[j].entries) {
        const Mat& zb = zinv[e.block];
        const Mat& xb = res.X[e.block];
        Mat& tb = t[j][e.block];
        const std::size_t nb = tb.rows();
        for (std::size_t i = 0; i < nb; ++i) {
          advq::kernels::axpy(e.value * zb(i, e.row), xb.row(e.col),
                              tb.row(i), nb);
          if (e.row != e.col)
            advq::kernels::axpy(e.value * zb(i, e.col), xb.row(e.row),
                                tb.row(i), nb);
        }
      }
      for (std::size_t i = 0; i < K; ++i)
        schur(i, j) = sparse_inner(p.constraints[i], t[j]);
    }
    la::symmetrize(schur);
    Mat schurL;
    {
      bool ok = la::cholesky(schur, schurL);
      if (!ok) {
        // Tiny ridge; the constraint set is linearly independent so this
        // only triggers very close to the optimum.
        Mat ridged = schur;
        for (std::size_t i = 0; i < K; ++i)
          ridged(i, i) += 1e-13 * (1.0 + ridged(i, i));
        if (!la::cholesky(ridged, schurL)) {
          best.status = Status::Stalled;
          return best;
        }
      }
    }

    // tr(A_i Zinv) and tr(A_i Zinv Rd X) are shared by both solves.
    Vec trAZinv(K), trAZRdX(K);
    BlockMat zrdx(nblk);
    for (std::size_t bi = 0; bi < nblk; ++bi)
      zrdx[bi] = la::matmul(zinv[bi], la::matmul(rd[bi], res.X[bi]));
    for (std::size_t k = 0; k < K; ++k) {
      trAZinv[k] = sparse_inner(p.constraints[k], zinv);
      trAZRdX[k] = sparse_inner(p.constraints[k], zrdx);
    }

    auto solve_direction = [&](double sigmaMu,
                               const BlockMat* corr) -> Direction {
      // corr = Zinv * dZa * dXa when running the corrector.
      Vec rhs(K);
      for (std::size_t k = 0; k < K; ++k) {
        rhs[k] = p.b[k] - sigmaMu * trAZinv[k] + trAZRdX[k];
        if (corr) rhs[k] += sparse_inner(p.constraints[k], *corr);
      }
      Direction d;
      d.dy = la::cholesky_solve(schurL, rhs);
      d.dZ = rd;
      for (std::size_t k = 0; k < K; ++k)
        sparse_axpy(-d.dy[k], p.constraints[k], d.dZ);
      d.dX.resize(nblk);
      for (std::size_t bi = 0; bi < nblk; ++bi) {
        Mat dx = la::scaled(zinv[bi], sigmaMu);
        la::add_inplace(dx, res.X[bi], -1.0);
        if (corr) la::add_inplace(dx, (*corr)[bi], -1.0);
        la::add_inplace(
            dx, la::matmul(zinv[bi], la::matmul(d.dZ[bi], res.X[bi])), -1.0);
        la::symmetrize(dx);
        d.dX[bi] = std::move(dx);
      }
      return d;
    };

    // Predictor.
    Direction aff = solve_direction(0.0, nullptr);
    const double apAff = max_step(res.X, aff.dX, 1.0);
    const double adAff = max_step(res.Z, aff.dZ, 1.0);

    double xzAff = 0.0;
    {
      BlockMat xa = res.X, za = res.Z;
      for (std::size_t bi = 0; bi < nblk; ++bi) {
        la::add_inplace(xa[bi], aff.dX[bi], apAff);
        la::add_inplace(za[bi], aff.dZ[bi], adAff);
      }
      xzAff = block_inner(xa, za);
    }
    double sigma = std::pow(std::max(xzAff, 0.0) / xz, 3.0);
    sigma = std::clamp(sigma, 1e-10, 1.0);

    // Corrector.
    BlockMat corr(nblk);
    for (std::size_t bi = 0; bi < nblk; ++bi)
      corr[bi] =
          la::matmul(zinv[bi], la::matmul(aff.dZ[bi], aff.dX[bi]));
    Direction dir = solve_direction(sigma * mu, &corr);

    double ap = opts.stepFraction * max_step(res.X, dir.dX, 1.0 / opts.stepFraction);
    double ad = opts.stepFraction * max_step(res.Z, dir.dZ, 1.0 / opts.stepFraction);
    ap = std::min(ap, 1.0);
    ad = std::min(ad, 1.0);

    if (trace)
      std::fprintf(stderr,
                   "sdp iter=%3d mu=%9.3e gap=%9.3e rp=%9.3e rd=%9.3e "
                   "sigma=%7.1e ap=%6.4f ad=%6.4f\n",
                   iter, mu, res.gapRel, res.primalResidual, res.dualResidual,
                   sigma, ap, ad);

    if (ap < 1e-4 && ad < 1e-4) {
      if (++stallCount >= 3) {
        best.status = bestScore <= 1.0 ? Status::Converged : Status::Stalled;
        return best;
      }
    } else {
      stallCount = 0;
    }

    for (std::size_t bi = 0; bi < nblk; ++bi) {
      la::add_inplace(res.X[bi], dir.dX[bi], ap);
      la::add_inplace(res.Z[bi], dir.dZ[bi], ad);
    }
    for (std::size_t k = 0; k < K; ++k) res.y[k] += ad * dir.dy[k];
  }

  best.status = bestScore <= 1.0 ? Status::Converged : Status::MaxIterations;
  return best;
}

} // namespace advq::sdp
