#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "wsrm/socp.hpp"

using namespace wsrm;
using namespace wsrm::testing;

namespace {

void check_certified(const SocpExtractProblem& prob, const SocpExtractResult& res) {
  CHECK(res.value <= res.dual_bound * (1.0 + 1e-12) + 1e-15);
  CHECK(res.dual_bound - res.value <= 1e-7 * std::max(1.0, std::abs(res.dual_bound)));
  if (prob.equality.rows() > 0) CHECK((prob.equality * res.a).cwiseAbs().maxCoeff() <= 1e-10);
  for (const QuadraticCap& cap : prob.caps) {
    CHECK(std::real(res.a.dot(cap.psi * res.a)) <= cap.eta + 1e-9);
  }
  CHECK(std::abs(std::real(prob.u.dot(res.a)) - res.value) < 1e-12 * std::max(1.0, res.value));
}

}  // namespace

TEST_CASE("linear objective over a ball") {
  SocpExtractProblem prob;
  prob.u = CVector::Zero(2);
  prob.u(0) = 1.0;
  prob.equality = CMatrix(0, 2);
  prob.caps.push_back({CMatrix::Identity(2, 2), 4.0});
  const SocpExtractResult res = socp_max_linear(prob);
  CHECK(std::abs(res.value - 2.0) < 1e-9);
  CHECK(std::abs(res.a(0) - Complex(2.0, 0.0)) < 1e-8);
  CHECK(std::abs(res.a(1)) < 1e-8);
  check_certified(prob, res);
}

TEST_CASE("objective orthogonal to the feasible subspace") {
  SocpExtractProblem prob;
  prob.u = CVector::Zero(3);
  prob.u(0) = 1.0;
  prob.equality = CMatrix::Zero(1, 3);
  prob.equality(0, 0) = 1.0;
  prob.caps.push_back({CMatrix::Identity(3, 3), 1.0});
  const SocpExtractResult res = socp_max_linear(prob);
  CHECK(std::abs(res.value) < 1e-12);
  CHECK(res.a.norm() < 1e-12);
}

TEST_CASE("single cap with equalities matches the closed form") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 5;
    SocpExtractProblem prob;
    prob.u = random_cvector(rng, n);
    prob.equality = random_cmatrix(rng, 2, n);
    const CMatrix psi = random_psd(rng, n, n) + 0.1 * CMatrix::Identity(n, n);
    std::uniform_real_distribution<double> eta(0.5, 3.0);
    prob.caps.push_back({psi, eta(rng)});
    const SocpExtractResult res = socp_max_linear(prob);

    Eigen::JacobiSVD<CMatrix> svd(prob.equality, Eigen::ComputeFullV);
    const CMatrix N = svd.matrixV().rightCols(n - 2);
    const CMatrix Q = N.adjoint() * psi * N;
    const CVector c = N.adjoint() * prob.u;
    const double expected = std::sqrt(prob.caps[0].eta * std::real(c.dot(Q.ldlt().solve(c))));
    CHECK(std::abs(res.value - expected) <= 1e-7 * expected);
    check_certified(prob, res);
  }
}

TEST_CASE("several caps: certificate, feasibility and phase invariance") {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int trial = 0; trial < 20; ++trial) {
    SocpExtractProblem prob;
    prob.u = random_cvector(rng, 4);
    prob.equality = random_cmatrix(rng, 1, 4);
    prob.caps.push_back({CMatrix::Identity(4, 4), 3.0});
    prob.caps.push_back({random_psd(rng, 4, 1), 0.5});
    prob.caps.push_back({random_psd(rng, 4, 1), 0.8});
    const SocpExtractResult res = socp_max_linear(prob);
    check_certified(prob, res);

    SocpExtractProblem rotated = prob;
    rotated.u *= std::polar(1.0, angle(rng));
    const SocpExtractResult rot = socp_max_linear(rotated);
    CHECK(std::abs(rot.value - res.value) <= 1e-7 * res.value);
  }
}

TEST_CASE("min-max norm without free variables") {
  std::mt19937_64 rng(53);
  SocpMinMaxProblem prob;
  prob.fixed = random_cmatrix(rng, 3, 2);
  prob.basis = CMatrix(3, 0);
  prob.constraints = {LinearConstraint::sum_power(3, 4.0), LinearConstraint::interference(random_cvector(rng, 3), 0.5)};
  const SocpMinMaxResult res = socp_min_max_norm(prob);
  double expected = 0.0;
  for (const LinearConstraint& c : prob.constraints) {
    expected = std::max(expected, std::sqrt(c.usage(prob.fixed) / c.gamma()));
  }
  CHECK(res.B.size() == 0);
  CHECK(std::abs(res.u - expected) < 1e-12 * expected);
}

TEST_CASE("min-max norm with the identity is a least-norm completion") {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 10; ++trial) {
    SocpMinMaxProblem prob;
    prob.fixed = random_cmatrix(rng, 4, 2);
    Eigen::HouseholderQR<CMatrix> qr(random_cmatrix(rng, 4, 2));
    prob.basis = qr.householderQ() * CMatrix::Identity(4, 2);
    prob.constraints = {LinearConstraint::sum_power(4, 2.0)};
    const SocpMinMaxResult res = socp_min_max_norm(prob);
    const CMatrix B = -prob.basis.adjoint() * prob.fixed;
    const double expected = (prob.fixed + prob.basis * B).norm() / std::sqrt(2.0);
    CHECK(std::abs(res.u - expected) <= 1e-7 * expected);
    CHECK((res.B - B).norm() <= 1e-5 * std::max(1.0, B.norm()));
    CHECK(res.u - res.lower_bound <= 1e-6 * res.u);
  }
}

TEST_CASE("min-max norm agrees with a grid search on a tiny instance") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 3; ++trial) {
    SocpMinMaxProblem prob;
    prob.fixed = random_cmatrix(rng, 2, 1);
    prob.basis = random_cmatrix(rng, 2, 1);
    prob.basis.normalize();
    prob.constraints = {LinearConstraint::sum_power(2, 3.0), LinearConstraint::interference(random_cvector(rng, 2), 0.4),
                        LinearConstraint::interference(random_cvector(rng, 2), 0.6)};
    const SocpMinMaxResult res = socp_min_max_norm(prob);

    auto objective = [&](double re, double im) {
      const CMatrix T = prob.fixed + prob.basis * Complex(re, im);
      double worst = 0.0;
      for (const LinearConstraint& c : prob.constraints) worst = std::max(worst, std::sqrt(c.usage(T) / c.gamma()));
      return worst;
    };
    const double span = 3.0 * std::max(1.0, prob.fixed.norm());
    double best = std::numeric_limits<double>::infinity();
    double cx = 0.0;
    double cy = 0.0;
    double width = span;
    for (int level = 0; level < 6; ++level) {
      double bx = cx;
      double by = cy;
      for (int i = -100; i <= 100; ++i) {
        for (int j = -100; j <= 100; ++j) {
          const double x = cx + width * i / 100.0;
          const double y = cy + width * j / 100.0;
          const double v = objective(x, y);
          if (v < best) {
            best = v;
            bx = x;
            by = y;
          }
        }
      }
      cx = bx;
      cy = by;
      width /= 20.0;
    }
    CHECK(res.u <= best + 1e-9);
    CHECK(std::abs(res.u - best) < 1e-3);
    CHECK(std::abs(objective(std::real(res.B(0, 0)), std::imag(res.B(0, 0))) - res.u) < 1e-9);
    CHECK(res.u - res.lower_bound <= 1e-6 * res.u);
  }
}
