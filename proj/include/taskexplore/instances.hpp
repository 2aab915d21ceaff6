#pragma once

#include <string>

#include "taskexplore/lqr.hpp"

namespace taskexplore {

struct Instance {
  std::string name;
  SystemParams system;
  CostParams costs;
};

/// A = rho e1 e1', B = sqrt(1-rho) I, Rx = (1/sqrt(1-rho)) I,
/// Ru = (1/(1-rho)^2) I. The easily-excited-coordinate example.
Instance make_lqrex1(double rho, Eigen::Index dx);

/// A = rho I, B = I, Rx = I + (1/(1-rho)^4) e1 e1', Ru = (1/(1-rho)^2) I.
/// Isotropic dynamics with a distinguished costly coordinate.
Instance make_lqrex2(double rho, Eigen::Index dx);

/// Single Jordan block (diagonal rho, superdiagonal ones) with randomly
/// generated B, Rx, Ru (Rx, Ru >= I).
Instance make_jordan(double rho, Eigen::Index dx, Eigen::Index du, std::uint64_t seed);

/// The diagonal closed-form family for lqrex1 parameters.
DiagonalInstance lqrex1_diagonal(double rho, Eigen::Index dx);
/// And for lqrex2 parameters.
DiagonalInstance lqrex2_diagonal(double rho, Eigen::Index dx);

}  // namespace taskexplore
