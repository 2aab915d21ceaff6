#include "taskexplore/instances.hpp"

#include <cmath>
#include <stdexcept>

#include "taskexplore/rng.hpp"

namespace taskexplore {

namespace {

void check_params(double rho, Eigen::Index dx) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("instance: rho must be in (0,1)");
  if (dx < 1) throw std::invalid_argument("instance: d_x must be >= 1");
}

}  // namespace

DiagonalInstance lqrex1_diagonal(double rho, Eigen::Index dx) {
  check_params(rho, dx);
  DiagonalInstance inst;
  inst.rho1 = rho;
  inst.rho2 = 0.0;
  inst.b = std::sqrt(1.0 - rho);
  inst.kappa1 = inst.kappa2 = 1.0 / std::sqrt(1.0 - rho);
  inst.mu = 1.0 / ((1.0 - rho) * (1.0 - rho));
  inst.dx = dx;
  return inst;
}

DiagonalInstance lqrex2_diagonal(double rho, Eigen::Index dx) {
  check_params(rho, dx);
  DiagonalInstance inst;
  inst.rho1 = inst.rho2 = rho;
  inst.b = 1.0;
  inst.kappa1 = 1.0 + 1.0 / std::pow(1.0 - rho, 4);
  inst.kappa2 = 1.0;
  inst.mu = 1.0 / ((1.0 - rho) * (1.0 - rho));
  inst.dx = dx;
  return inst;
}

Instance make_lqrex1(double rho, Eigen::Index dx) {
  DiagonalInstance d = lqrex1_diagonal(rho, dx);
  return Instance{"lqrex1", d.system(), d.costs()};
}

Instance make_lqrex2(double rho, Eigen::Index dx) {
  DiagonalInstance d = lqrex2_diagonal(rho, dx);
  return Instance{"lqrex2", d.system(), d.costs()};
}

Instance make_jordan(double rho, Eigen::Index dx, Eigen::Index du, std::uint64_t seed) {
  check_params(rho, dx);
  if (du < 1) throw std::invalid_argument("instance: d_u must be >= 1");
  Eigen::MatrixXd A = rho * Eigen::MatrixXd::Identity(dx, dx);
  for (Eigen::Index i = 0; i + 1 < dx; ++i) A(i, i + 1) = 1.0;

  GaussianSource gen(seed);
  Eigen::MatrixXd B(dx, du);
  for (Eigen::Index j = 0; j < du; ++j) B.col(j) = gen.normal_vector(dx) / std::sqrt(dx);

  auto random_pd = [&](Eigen::Index n) {
    Eigen::MatrixXd C(n, n);
    for (Eigen::Index j = 0; j < n; ++j) C.col(j) = gen.normal_vector(n) / std::sqrt(n);
    return Eigen::MatrixXd(C * C.transpose() + Eigen::MatrixXd::Identity(n, n));
  };

  CostParams costs;
  costs.Rx = random_pd(dx);
  costs.Ru = random_pd(du);
  return Instance{"jordan", SystemParams(std::move(A), std::move(B)), std::move(costs)};
}

}  // namespace taskexplore
