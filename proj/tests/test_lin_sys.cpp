#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "taskexplore/instances.hpp"
#include "taskexplore/lin_sys.hpp"
#include "taskexplore/rng.hpp"

using namespace taskexplore;

TEST_CASE("zero dynamics stay at zero") {
  SystemParams sys(0.5 * Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2));
  Trajectory traj = simulate(sys, NoisePolicy::zero(2), 50, 0.0, 7);
  for (const auto& x : traj.states) CHECK(x.norm() == doctest::Approx(0.0));
}

TEST_CASE("one-step memory: A=0, constant input e1") {
  SystemParams sys(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2));
  NoisePolicy policy = NoisePolicy::zero(2);
  policy.mean_signal.assign(64, Eigen::Vector2d(1.0, 0.0));
  Trajectory traj = simulate(sys, policy, 64, 0.0, 0);
  for (std::size_t t = 1; t < traj.states.size(); ++t) {
    CHECK(traj.states[t](0) == doctest::Approx(1.0));
    CHECK(traj.states[t](1) == doctest::Approx(0.0));
  }
}

TEST_CASE("Jordan instance rollout stays bounded") {
  Instance inst = make_jordan(0.8, 5, 5, 11);
  Trajectory traj = simulate(inst.system, NoisePolicy::isotropic(5, 1.0), 10000, 1.0, 3);
  double max_norm = 0.0;
  for (const auto& x : traj.states) max_norm = std::max(max_norm, x.norm());
  CHECK(max_norm < 1e4);
}

TEST_CASE("simulate is bit-deterministic per seed") {
  Instance inst = make_lqrex1(0.9, 3);
  Trajectory a = simulate(inst.system, NoisePolicy::isotropic(3, 0.5), 200, 0.1, 42);
  Trajectory b = simulate(inst.system, NoisePolicy::isotropic(3, 0.5), 200, 0.1, 42);
  for (Eigen::Index t = 0; t < a.horizon(); ++t) {
    CHECK((a.states[t] - b.states[t]).norm() == 0.0);
    CHECK((a.inputs[t] - b.inputs[t]).norm() == 0.0);
  }
}

TEST_CASE("spectral radius of known matrices") {
  Eigen::MatrixXd A(2, 2);
  A << 0.0, 1.0, -0.25, 0.0;  // eigenvalues +-0.5i
  CHECK(spectral_radius(A) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(spectral_radius(0.9 * Eigen::MatrixXd::Identity(4, 4)) ==
        doctest::Approx(0.9).epsilon(1e-10));
}

TEST_CASE("hinf norm: scalar rho I gives 1/(1-rho)") {
  // max over the unit circle of 1/|e^{iw} - rho| is attained at w = 0.
  const double rho = 0.7;
  Eigen::MatrixXd A = rho * Eigen::MatrixXd::Identity(3, 3);
  CHECK(hinf_norm(A) == doctest::Approx(1.0 / (1.0 - rho)).epsilon(1e-6));
}

TEST_CASE("lift produces the documented block structure") {
  Instance inst = make_lqrex1(0.9, 2);
  LiftedSystem lifted = lift(inst.system);
  CHECK(lifted.A_tilde.rows() == 4);
  CHECK((lifted.A_tilde.topLeftCorner(2, 2) - inst.system.A).norm() == 0.0);
  CHECK((lifted.A_tilde.topRightCorner(2, 2) - inst.system.B).norm() == 0.0);
  CHECK(lifted.A_tilde.bottomRows(2).norm() == 0.0);
  CHECK(lifted.B_tilde.topRows(2).norm() == 0.0);
  CHECK((lifted.B_tilde.bottomRows(2) - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("noise policy periodic extension wraps the mean signal") {
  SystemParams sys(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Identity(1, 1));
  NoisePolicy policy = NoisePolicy::zero(1);
  policy.mean_signal = {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 2.0)};
  policy.periodic_extension = true;
  Trajectory traj = simulate(sys, policy, 5, 0.0, 0);
  CHECK(traj.inputs[0](0) == doctest::Approx(1.0));
  CHECK(traj.inputs[1](0) == doctest::Approx(2.0));
  CHECK(traj.inputs[2](0) == doctest::Approx(1.0));
  CHECK(traj.inputs[4](0) == doctest::Approx(1.0));
}

TEST_CASE("append continues from the last state") {
  Instance inst = make_lqrex2(0.9, 2);
  GaussianSource gen(5);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
  Trajectory head = simulate_with_source(inst.system, NoisePolicy::isotropic(2, 1.0), 10, 0.1,
                                         gen, x0);
  Trajectory tail = simulate_with_source(inst.system, NoisePolicy::isotropic(2, 1.0), 10, 0.1,
                                         gen, head.states.back());
  Trajectory joined = head;
  joined.append(tail);
  CHECK(joined.horizon() == 20);
  CHECK((joined.states[10] - tail.states[0]).norm() == 0.0);
}
