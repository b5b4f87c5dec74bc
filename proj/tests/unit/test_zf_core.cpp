#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "support.hpp"
#include "wsrm/error.hpp"
#include "wsrm/zf_core.hpp"

using namespace wsrm;
using namespace wsrm::testing;

namespace {

void check_geometry(const Instance& inst, const ZfGeometry& geo) {
  const Index K = inst.users();
  const Index r = geo.reduced_dimension();
  for (Index k = 0; k < K; ++k) {
    const CMatrix& U = geo.U[static_cast<std::size_t>(k)];
    CHECK(U.rows() == inst.antennas());
    CHECK(U.cols() == r);
    CHECK((U.adjoint() * U - CMatrix::Identity(r, r)).cwiseAbs().maxCoeff() < 1e-12);
    for (Index j = 0; j < K; ++j) {
      if (j == k) continue;
      CHECK((U.adjoint() * inst.channel(j)).cwiseAbs().maxCoeff() < 1e-10 * inst.channel(j).norm());
    }
    CHECK(geo.d(k) > 0.0);
    const Complex gh = geo.G.col(k).dot(inst.channel(k));
    CHECK(std::abs(gh.imag()) < 1e-12 * std::abs(gh));
    CHECK(gh.real() > 0.0);
    CHECK(std::abs(geo.d(k) - std::norm(gh)) < 1e-12 * geo.d(k));
    for (Index l = 0; l < inst.constraint_count(); ++l) {
      const CMatrix expected = U.adjoint() * inst.constraint(l).phi() * U;
      CHECK((geo.reduced[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] - expected).norm() < 1e-12);
    }
  }
}

}  // namespace

TEST_CASE("identity channels") {
  const Instance inst(CMatrix::Identity(3, 3), RVector::Ones(3), {LinearConstraint::sum_power(3, 1.0)});
  const ZfGeometry geo = zf_geometry(inst);
  CHECK((geo.G - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(geo.U_perp.cols() == 0);
  CHECK((geo.d - RVector::Ones(3)).cwiseAbs().maxCoeff() < 1e-14);
  check_geometry(inst, geo);
}

TEST_CASE("diagonal channels") {
  CMatrix H = CMatrix::Zero(2, 2);
  H(0, 0) = 2.0;
  H(1, 1) = 1.0;
  const Instance inst(H, RVector::Ones(2), {LinearConstraint::sum_power(2, 1.0)});
  const ZfGeometry geo = zf_geometry(inst);
  CHECK((geo.G - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(geo.d(0) - 4.0) < 1e-13);
  CHECK(std::abs(geo.d(1) - 1.0) < 1e-13);
}

TEST_CASE("reference instance geometry") {
  const Instance inst = table1();
  const ZfGeometry geo = zf_geometry(inst);
  CHECK(geo.reduced_dimension() == 2);
  check_geometry(inst, geo);

  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance other = random_instance(rng, 5, 3, 2);
    check_geometry(other, zf_geometry(other));
  }
}

TEST_CASE("rank deficiency") {
  CMatrix H(3, 2);
  H.col(0) << 1.0, 0.0, 1.0;
  H.col(1) = H.col(0) * Complex(0.0, 2.0);
  const Instance inst(H, RVector::Ones(2), {LinearConstraint::sum_power(3, 1.0)});
  CHECK_THROWS_AS(zf_geometry(inst), RankDeficientError);
  const Instance wide(CMatrix::Ones(2, 3), RVector::Ones(3), {LinearConstraint::sum_power(2, 1.0)});
  CHECK_THROWS_AS(zf_geometry(wide), RankDeficientError);
}

TEST_CASE("every zero-forcing vector lies in the span of U_k") {
  std::mt19937_64 rng(62);
  const Instance inst = random_instance(rng, 5, 3, 1);
  const ZfGeometry geo = zf_geometry(inst);
  for (Index k = 0; k < 3; ++k) {
    CMatrix others(5, 2);
    Index c = 0;
    for (Index j = 0; j < 3; ++j) {
      if (j != k) others.col(c++) = inst.channel(j);
    }
    Eigen::JacobiSVD<CMatrix> svd(others.adjoint(), Eigen::ComputeFullV);
    const CMatrix null = svd.matrixV().rightCols(3);
    const CVector t = null * random_cvector(rng, 3);
    const CMatrix& U = geo.U[static_cast<std::size_t>(k)];
    CHECK((t - U * (U.adjoint() * t)).norm() < 1e-12 * t.norm());
  }
}

TEST_CASE("reduced rate identity h^H T h = d [A]_11") {
  std::mt19937_64 rng(63);
  const Instance inst = table1();
  const ZfGeometry geo = zf_geometry(inst);
  for (Index k = 0; k < 3; ++k) {
    const CMatrix A = random_psd(rng, 2, 2);
    const CMatrix& U = geo.U[static_cast<std::size_t>(k)];
    const CMatrix T = U * A * U.adjoint();
    const CVector h = inst.channel(k);
    CHECK(std::abs(std::real(h.dot(T * h)) - geo.d(k) * std::real(A(0, 0))) < 1e-12);
  }
}

TEST_CASE("extraction is idempotent on its own rank-one output") {
  // An arbitrary rank-one point can be improved; an extracted one cannot.
  std::mt19937_64 rng(64);
  const Instance inst = table1();
  const ZfGeometry geo = zf_geometry(inst);
  for (int trial = 0; trial < 10; ++trial) {
    const Precoder first = rank1_extract(inst, geo, relaxation_budgets(geo, random_feasible_point(rng, inst, geo, 2)));
    std::vector<CMatrix> A;
    for (Index k = 0; k < 3; ++k) {
      const CMatrix& U = geo.U[static_cast<std::size_t>(k)];
      const CVector a = U.adjoint() * first.columns().col(k);
      A.push_back(a * a.adjoint());
    }
    const Precoder second = rank1_extract(inst, geo, relaxation_budgets(geo, A));
    for (Index k = 0; k < 3; ++k) {
      const CVector expected = first.columns().col(k);
      const CVector got = second.columns().col(k);
      const Complex phase = expected.dot(got) / std::abs(expected.dot(got));
      // The value is certified to 1e-7, which pins the maximizer only to
      // about its square root.
      CHECK((got - phase * expected).norm() < 1e-4 * expected.norm());
      const double before = std::norm(inst.channel(k).dot(expected));
      const double after = std::norm(inst.channel(k).dot(got));
      CHECK(std::abs(after - before) <= 1e-9 * before);
    }
  }
}

TEST_CASE("single user under a power cap is matched filtering") {
  std::mt19937_64 rng(65);
  const CVector h = random_cvector(rng, 3);
  const Instance inst(CMatrix(h), RVector::Ones(1), {LinearConstraint::sum_power(3, 2.5)});
  const ZfGeometry geo = zf_geometry(inst);
  RMatrix budgets(1, 1);
  budgets << 2.5;
  const Precoder pre = rank1_extract(inst, geo, budgets);
  const CVector expected = std::sqrt(2.5) * h / h.norm();
  CHECK((pre.columns().col(0) - expected).norm() < 1e-7);
  CHECK(std::abs(std::real(h.dot(pre.columns().col(0))) - std::sqrt(2.5) * h.norm()) < 1e-7);
}

TEST_CASE("extraction never loses rate and stays feasible on random rank-two points") {
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 100; ++trial) {
    const Instance inst = random_instance(rng, 4, 3, 2, 10.0, 5.0, true);
    const ZfGeometry geo = zf_geometry(inst);
    const std::vector<CMatrix> A = random_feasible_point(rng, inst, geo, 2);
    const Precoder pre = rank1_extract(inst, geo, relaxation_budgets(geo, A));
    const RateReport r = zf_rates(inst, pre);
    CAPTURE(trial);
    CHECK(r.weighted_sum >= relax_rate_reference(inst, geo, A) - 1e-8);
    CHECK(*r.zf_residual < 1e-8);
    for (Index l = 0; l < 3; ++l) CHECK(r.usage(l) <= inst.constraint(l).gamma() * (1.0 + 1e-9));
  }
}
