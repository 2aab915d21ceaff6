#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "taskexplore/instances.hpp"
#include "taskexplore/lqr.hpp"
#include "taskexplore/rng.hpp"

using namespace taskexplore;

namespace {

Eigen::MatrixXd random_stable(Eigen::Index n, GaussianSource& gen, double radius = 0.9) {
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i) A.row(i) = gen.normal_vector(n).transpose();
  return A * (radius / spectral_radius(A));
}

Eigen::MatrixXd random_pd(Eigen::Index n, GaussianSource& gen) {
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i) G.row(i) = gen.normal_vector(n).transpose();
  return G * G.transpose() + Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("DARE with A=0 returns P=Rx, K=0") {
  SystemParams sys(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2));
  CostParams costs{2.0 * Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)};
  RiccatiSolution sol = solve_dare(sys, costs);
  CHECK((sol.P - costs.Rx).norm() < 1e-12);
  CHECK(sol.K.norm() < 1e-12);
}

TEST_CASE("scalar DARE closed form at a=0.8") {
  const double a = 0.8;
  SystemParams sys(Eigen::MatrixXd::Constant(1, 1, a), Eigen::MatrixXd::Identity(1, 1));
  CostParams costs{Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1)};
  RiccatiSolution sol = solve_dare(sys, costs);
  const double expected = (a * a + std::sqrt(a * a * a * a + 4.0)) / 2.0;
  CHECK(std::abs(sol.P(0, 0) - expected) < 1e-10);
}

TEST_CASE("DARE on the Jordan instance: residual and stability") {
  Instance inst = make_jordan(0.8, 5, 5, 21);
  RiccatiSolution sol = solve_dare(inst.system, inst.costs);
  const Eigen::MatrixXd& A = inst.system.A;
  const Eigen::MatrixXd& B = inst.system.B;
  Eigen::MatrixXd res = A.transpose() * sol.P * A - sol.P -
                        A.transpose() * sol.P * B *
                            (inst.costs.Ru + B.transpose() * sol.P * B)
                                .ldlt()
                                .solve(B.transpose() * sol.P * A) +
                        inst.costs.Rx;
  CHECK(res.norm() <= 1e-10 * sol.P.norm());
  CHECK(spectral_radius(A + B * sol.K) < 1.0);
}

TEST_CASE("dlyap basics") {
  SUBCASE("A=0 gives P=Q") {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(3, 3) * 2.5;
    CHECK((dlyap(Eigen::MatrixXd::Zero(3, 3), Q) - Q).norm() < 1e-14);
  }
  SUBCASE("scalar rho=0.5 geometric series") {
    Eigen::MatrixXd P =
        dlyap(0.5 * Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2));
    CHECK((P - (4.0 / 3.0) * Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
  }
  SUBCASE("random stable 4x4 residual and linearity in Q") {
    GaussianSource gen(5);
    Eigen::MatrixXd A = random_stable(4, gen);
    Eigen::MatrixXd Q1 = random_pd(4, gen), Q2 = random_pd(4, gen);
    Eigen::MatrixXd P = dlyap(A, Q1);
    CHECK((P - A.transpose() * P * A - Q1).norm() <= 1e-10 * P.norm());
    Eigen::MatrixXd P12 = dlyap(A, Q1 + Q2);
    CHECK((P12 - dlyap(A, Q1) - dlyap(A, Q2)).norm() <= 1e-10 * P12.norm());
  }
}

TEST_CASE("lqr_cost identities") {
  Instance inst = make_lqrex1(0.9, 3);
  RiccatiSolution sol = solve_dare(inst.system, inst.costs);
  SUBCASE("sigma_w = 0 gives zero cost") {
    CHECK(lqr_cost(inst.system, inst.costs, sol.K, 0.0) == doctest::Approx(0.0));
  }
  SUBCASE("A=0, K=0 gives sigma_w^2 tr(Rx)") {
    SystemParams zero_sys(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2));
    CostParams costs{3.0 * Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)};
    const double c = lqr_cost(zero_sys, costs, Eigen::MatrixXd::Zero(2, 2), 0.5);
    CHECK(c == doctest::Approx(0.25 * 6.0).epsilon(1e-12));
  }
  SUBCASE("optimal K yields sigma_w^2 tr(P)") {
    const double c = lqr_cost(inst.system, inst.costs, sol.K, 0.1);
    CHECK(c == doctest::Approx(0.01 * sol.P.trace()).epsilon(1e-8));
  }
}

TEST_CASE("excess risk: zero at optimum, +inf on destabilizers, matches cost gap") {
  Instance inst = make_lqrex2(0.9, 3);
  RiccatiSolution sol = solve_dare(inst.system, inst.costs);
  CHECK(excess_risk(sol.K, inst.system, inst.costs) == doctest::Approx(0.0).epsilon(1e-10));
  Eigen::MatrixXd bad = sol.K + 10.0 * Eigen::MatrixXd::Ones(3, 3);
  CHECK(excess_risk(bad, inst.system, inst.costs) ==
        std::numeric_limits<double>::infinity());
  GaussianSource gen(8);
  Eigen::MatrixXd dK(3, 3);
  for (Eigen::Index i = 0; i < 3; ++i) dK.row(i) = gen.normal_vector(3).transpose();
  Eigen::MatrixXd K = sol.K + 0.05 * dK;
  REQUIRE(spectral_radius(inst.system.A + inst.system.B * K) < 1.0);
  const double sigma_w = 0.3;
  const double direct = (lqr_cost(inst.system, inst.costs, K, sigma_w) -
                         lqr_cost(inst.system, inst.costs, sol.K, sigma_w)) /
                        (sigma_w * sigma_w);
  CHECK(excess_risk(K, inst.system, inst.costs) == doctest::Approx(direct).epsilon(1e-8));
}

TEST_CASE("excess risk is flat at the optimum: O(s^2) decay") {
  Instance inst = make_lqrex1(0.85, 2);
  RiccatiSolution sol = solve_dare(inst.system, inst.costs);
  GaussianSource gen(10);
  Eigen::MatrixXd dK(2, 2);
  for (Eigen::Index i = 0; i < 2; ++i) dK.row(i) = gen.normal_vector(2).transpose();
  dK /= dK.norm();
  const double r1 = excess_risk(sol.K + 1e-3 * dK, inst.system, inst.costs);
  const double r2 = excess_risk(sol.K + 5e-4 * dK, inst.system, inst.costs);
  // Halving the step should quarter a quadratic residual.
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("scalar closed-form Hessian matches finite differences") {
  DiagonalInstance inst;
  inst.rho1 = inst.rho2 = 0.9;
  inst.b = std::sqrt(0.1);
  inst.kappa1 = inst.kappa2 = 1.0 / std::sqrt(0.1);
  inst.mu = 1.0 / 0.01;
  inst.dx = 1;
  TaskHessian closed = task_hessian_closed_form(inst);
  TaskHessian fd = task_hessian_fd(inst.system(), inst.costs());
  for (Eigen::Index i = 0; i < closed.dim(); ++i) {
    for (Eigen::Index j = 0; j < closed.dim(); ++j) {
      if (std::abs(closed.H(i, j)) > 1e-12)
        CHECK(fd.H(i, j) == doctest::Approx(closed.H(i, j)).epsilon(1e-3));
    }
  }
}

TEST_CASE("closed-form specializations at rho=0") {
  DiagonalInstance inst;
  inst.rho1 = inst.rho2 = 0.0;
  inst.b = 1.3;
  inst.kappa1 = inst.kappa2 = 2.0;
  inst.mu = 0.7;
  inst.dx = 2;
  // With a_n = 0: p_n solves the scalar DARE, k_n = 0, and the A_nn-A_nn entry
  // reduces to 2 (b p_n)^2 / (mu + b^2 p_n), matching the independent scalar
  // second derivative of the risk through the gain map.
  TaskHessian closed = task_hessian_closed_form(inst);
  const double b = inst.b, mu = inst.mu, kappa = inst.kappa1, rho = 0.0;
  const double p = (b * b * kappa - mu + mu * rho * rho +
                    std::sqrt(4 * b * b * mu * kappa +
                              std::pow(mu - b * b * kappa - mu * rho * rho, 2))) /
                   (2 * b * b);
  const double expected = 2.0 * (b * p) * (b * p) / (mu + b * b * p);
  const Eigen::Index d = inst.dx + inst.dx;
  for (Eigen::Index n = 0; n < inst.dx; ++n)
    CHECK(closed.H(n * d + n, n * d + n) == doctest::Approx(expected).epsilon(1e-10));
  TaskHessian fd = task_hessian_fd(inst.system(), inst.costs());
  for (Eigen::Index i = 0; i < closed.dim(); ++i)
    for (Eigen::Index j = 0; j < closed.dim(); ++j)
      if (std::abs(closed.H(i, j)) > 1e-12)
        CHECK(fd.H(i, j) == doctest::Approx(closed.H(i, j)).epsilon(1e-3));
}

TEST_CASE("FD Hessian is PSD up to noise on a random instance") {
  GaussianSource gen(14);
  SystemParams sys(random_stable(3, gen, 0.8), random_pd(3, gen));
  CostParams costs{random_pd(3, gen), random_pd(3, gen)};
  TaskHessian H = task_hessian_fd(sys, costs);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.H);
  const double scale = H.H.norm();
  CHECK(es.eigenvalues().minCoeff() >= -1e-6 * scale);
}

TEST_CASE("idealized risk identities") {
  SUBCASE("H=I, gamma=I") {
    TaskHessian H = TaskHessian::identity(3, 2);
    CHECK(idealized_risk(H, Eigen::MatrixXd::Identity(5, 5)) ==
          doctest::Approx(15.0).epsilon(1e-12));
  }
  SUBCASE("homogeneity in gamma") {
    TaskHessian H = TaskHessian::identity(2, 2);
    const double base = idealized_risk(H, Eigen::MatrixXd::Identity(4, 4));
    CHECK(idealized_risk(H, 3.0 * Eigen::MatrixXd::Identity(4, 4)) ==
          doctest::Approx(base / 3.0).epsilon(1e-12));
  }
  SUBCASE("matches the dense Kronecker evaluation") {
    const Eigen::Index dx = 2, du = 1, d = dx + du, D = dx * d;
    GaussianSource gen(15);
    Eigen::MatrixXd G(D, D);
    for (Eigen::Index i = 0; i < D; ++i) G.row(i) = gen.normal_vector(D).transpose();
    TaskHessian H;
    H.H = G * G.transpose();
    H.dx = dx;
    H.du = du;
    Eigen::MatrixXd gamma = random_pd(d, gen);
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(D, D);
    for (Eigen::Index i = 0; i < dx; ++i) big.block(i * d, i * d, d, d) = gamma;
    CHECK(idealized_risk(H, gamma) ==
          doctest::Approx((big.inverse() * H.H).trace()).epsilon(1e-10));
  }
  SUBCASE("adding vv' to gamma strictly decreases the risk") {
    GaussianSource gen(16);
    TaskHessian H = TaskHessian::identity(2, 2);
    Eigen::MatrixXd gamma = random_pd(4, gen);
    Eigen::VectorXd v = gen.normal_vector(4);
    CHECK(idealized_risk(H, gamma + v * v.transpose()) < idealized_risk(H, gamma));
  }
}
