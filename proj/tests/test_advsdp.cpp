#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "advq/advsdp.hpp"
#include "advq/boolfn.hpp"
#include "advq/error.hpp"
#include "advq/linalg.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

using namespace advq;
using advsdp::CertificatePair;
using advsdp::DualSolution;
using boolfn::BooleanFunction;
using la::Mat;

namespace {

// Every stored certificate pair is itself validated from first principles:
// the dual point must be feasible and the primal value must match, which
// pins the optimum from both sides before the solver is ever trusted.
void checkCertificate(const CertificatePair& c, double tol = 1e-12) {
  CAPTURE(c.exactValue);
  CHECK(c.dual.feasibilityResidual <= tol);
  CHECK(c.dual.W == doctest::Approx(c.exactValue).epsilon(1e-12));
  const auto p = advsdp::evaluatePrimal(c.f, c.gamma);
  CHECK(p.value == doctest::Approx(c.exactValue).epsilon(1e-12));
  CHECK(advsdp::dualityGap(c.dual, p) >= -1e-10);
}

} // namespace

TEST_CASE("certificate library sandwiches are tight") {
  checkCertificate(advsdp::identCertificate());
  for (int n = 1; n <= 4; ++n) {
    checkCertificate(advsdp::orCertificate(n));
    checkCertificate(advsdp::andCertificate(n));
    checkCertificate(advsdp::parityCertificate(n));
  }
  checkCertificate(advsdp::maj3Certificate());
}

TEST_CASE("evaluatePrimal on the worked examples") {
  // identity: Gamma = [[0,1],[1,0]] has norm 1 and Gamma o Delta_1 = Gamma.
  const auto ident = boolfn::ident1();
  Mat g(2, 2);
  g(0, 1) = g(1, 0) = 1.0;
  const auto p = advsdp::evaluatePrimal(ident, g);
  CHECK(p.value == doctest::Approx(1.0).epsilon(1e-13));

  // OR_2 with the two distance-one pairs: norm sqrt(2), per-bit norm 1.
  const auto or2 = boolfn::orN(2);
  Mat g2(4, 4);
  g2(or2.domainIndex("00"), or2.domainIndex("01")) = 1.0;
  g2(or2.domainIndex("01"), or2.domainIndex("00")) = 1.0;
  g2(or2.domainIndex("00"), or2.domainIndex("10")) = 1.0;
  g2(or2.domainIndex("10"), or2.domainIndex("00")) = 1.0;
  const auto p2 = advsdp::evaluatePrimal(or2, g2);
  CHECK(p2.gammaNorm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  CHECK(p2.maxColumnNorm == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(p2.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));

  // zero certificate evaluates to zero by convention
  const auto pz = advsdp::evaluatePrimal(or2, Mat(4, 4));
  CHECK(pz.value == 0.0);
  CHECK_FALSE(pz.unbounded);
}

TEST_CASE("evaluatePrimal enforces the zero pattern") {
  const auto or2 = boolfn::orN(2);
  Mat g(4, 4);
  g(or2.domainIndex("01"), or2.domainIndex("10")) = 1.0;  // both f=1
  g(or2.domainIndex("10"), or2.domainIndex("01")) = 1.0;
  CHECK_THROWS_AS(advsdp::evaluatePrimal(or2, g), Error);

  Mat bad(4, 4);
  bad(0, 1) = 1.0;  // asymmetric
  CHECK_THROWS_AS(advsdp::evaluatePrimal(or2, bad), Error);
}

TEST_CASE("extractVectors handles the trivial Gram matrices") {
  const auto ident = boolfn::ident1();

  advsdp::GramMatrix allOnes;
  allOnes.n = 1;
  allOnes.domain = ident.domain();
  allOnes.M = Mat(2, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) allOnes.M(i, j) = 1.0;
  const auto d = advsdp::extractVectors(ident, allOnes);
  CHECK(d.m == 1);
  CHECK(std::fabs(d.vectors(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.vectors(0, 0) == doctest::Approx(d.vectors(1, 0)).epsilon(1e-12));

  const auto par2 = boolfn::parityN(2);
  // Identity Gram over a 2-entry domain slice: use a 2-bit function with
  // two domain rows per input -> 8 rows is the full matrix; instead check
  // the documented 4x4 identity case on a 2-input function.
  const auto tot2 = BooleanFunction::fromEntries(2, {{"00", 0}, {"11", 1}});
  advsdp::GramMatrix id4;
  id4.n = 2;
  id4.domain = tot2.domain();
  id4.M = Mat::identity(4);
  const auto d4 = advsdp::extractVectors(tot2, id4);
  CHECK(d4.m == 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(std::fabs(d4.vectors(i, j)) ==
            doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
  (void)par2;
}

TEST_CASE("extractVectors clamps slightly negative eigenvalues") {
  const auto tot2 = BooleanFunction::fromEntries(2, {{"00", 0}, {"11", 1}});
  advsdp::GramMatrix gm;
  gm.n = 2;
  gm.domain = tot2.domain();
  gm.M = Mat::identity(4);
  gm.M(3, 3) = -1e-12;
  CHECK_NOTHROW(advsdp::extractVectors(tot2, gm));

  gm.M(3, 3) = -1.0;
  CHECK_THROWS_AS(advsdp::extractVectors(tot2, gm), Error);
}

TEST_CASE("solveDual matches the certificate oracles") {
  struct Case {
    CertificatePair cert;
    double relTol;
  };
  const Case cases[] = {
      {advsdp::identCertificate(), 1e-6},
      {advsdp::orCertificate(2), 1e-6},
      {advsdp::andCertificate(2), 1e-6},
      {advsdp::parityCertificate(2), 1e-6},
      {advsdp::orCertificate(3), 1e-6},
      {advsdp::maj3Certificate(), 1e-6},
  };
  for (const auto& [cert, relTol] : cases) {
    CAPTURE(cert.exactValue);
    const DualSolution d = advsdp::solveDual(cert.f);
    REQUIRE(d.converged);
    CHECK(d.feasibilityResidual <= 1e-8);
    CHECK(d.W == doctest::Approx(cert.exactValue).epsilon(relTol));

    // weak duality against the stored primal certificate
    const auto p = advsdp::evaluatePrimal(cert.f, cert.gamma);
    CHECK(advsdp::dualityGap(d, p) >= -1e-6);
  }
}

TEST_CASE("solveDual rejects constant functions") {
  const auto c1 = BooleanFunction::fromEntries(1, {{"0", 1}, {"1", 1}});
  CHECK_THROWS_AS(advsdp::solveDual(c1), Error);
}

TEST_CASE("rebalancing never increases the objective") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int round = 0; round < 8; ++round) {
    auto cert = advsdp::orCertificate(3);
    // Skew the two sides with a random feasibility-preserving scale.
    const double s = u(rng);
    auto skew = cert.dual;
    const auto [f0, f1] = boolfn::partition(cert.f);
    for (const auto& x : f0)
      for (int j = 1; j <= skew.n; ++j) {
        auto r = skew.rowOf(cert.f.domainIndex(x), j);
        for (int k = 0; k < skew.m; ++k) skew.vectors(r, std::size_t(k)) *= s;
      }
    for (const auto& x : f1)
      for (int j = 1; j <= skew.n; ++j) {
        auto r = skew.rowOf(cert.f.domainIndex(x), j);
        for (int k = 0; k < skew.m; ++k) skew.vectors(r, std::size_t(k)) /= s;
      }
    skew.W = advsdp::objectiveValue(cert.f, skew);
    skew.feasibilityResidual = advsdp::feasibilityResidual(cert.f, skew);
    CHECK(skew.feasibilityResidual <= 1e-10);

    const auto fixed = advsdp::rebalance(cert.f, skew);
    CHECK(fixed.feasibilityResidual <= 1e-10);
    CHECK(fixed.W <= skew.W + 1e-12);
    CHECK(fixed.W <= cert.exactValue + 1e-9);
  }
}

TEST_CASE("dual solutions round-trip through files") {
  const auto cert = advsdp::maj3Certificate();
  const auto path =
      (std::filesystem::temp_directory_path() / "advq_dual_rt.json").string();
  advsdp::saveDual(cert.dual, path);
  const auto back = advsdp::loadDual(cert.f, path);
  CHECK(back.m == cert.dual.m);
  CHECK(back.W == doctest::Approx(cert.dual.W).epsilon(1e-15));
  CHECK(la::max_abs(la::sub(back.vectors, cert.dual.vectors)) <= 1e-16);
  std::remove(path.c_str());
}

TEST_CASE("composition multiplies the adversary bound") {
  // OR_2 . OR_2 = OR_4: solver W should match W(OR_2)^2 = 2.
  const auto or4 = boolfn::compose(boolfn::orN(2), boolfn::orN(2));
  const auto d4 = advsdp::solveDual(or4);
  REQUIRE(d4.converged);
  const auto d2 = advsdp::solveDual(boolfn::orN(2));
  CHECK(std::fabs(d4.W - d2.W * d2.W) <= 2e-3);
}

TEST_CASE("composition invariant holds at six bits") {
  // the largest block size the invariant is claimed for
  const auto or6 = boolfn::compose(boolfn::orN(2), boolfn::orN(3));
  const auto d6 = advsdp::solveDual(or6);
  REQUIRE(d6.converged);
  CHECK(d6.feasibilityResidual <= 1e-8);
  const double product =
      advsdp::solveDual(boolfn::orN(2)).W * advsdp::solveDual(boolfn::orN(3)).W;
  CHECK(std::fabs(d6.W - product) / product <= 1e-3);
  CHECK(d6.W == doctest::Approx(std::sqrt(6.0)).epsilon(1e-4));
}
