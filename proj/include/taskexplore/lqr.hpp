#pragma once

#include <Eigen/Core>

#include "taskexplore/lin_sys.hpp"

namespace taskexplore {

struct CostParams {
  Eigen::MatrixXd Rx;  // d_x x d_x symmetric PD
  Eigen::MatrixXd Ru;  // d_u x d_u symmetric PD
};

struct RiccatiSolution {
  Eigen::MatrixXd P;  // d_x x d_x symmetric PSD
  Eigen::MatrixXd K;  // d_u x d_x, u = K x, closed loop A + B K
  double residual = 0.0;
  int iterations = 0;
};

/// DARE by value iteration from P_0 = Rx. K = -(Ru + B'PB)^{-1} B'PA.
RiccatiSolution solve_dare(const SystemParams& sys, const CostParams& costs, double tol = 1e-12,
                           int max_iter = 100000);

/// P = A_cl' P A_cl + Q by doubling.
Eigen::MatrixXd dlyap(const Eigen::Ref<const Eigen::MatrixXd>& A_cl,
                      const Eigen::Ref<const Eigen::MatrixXd>& Q);

/// Infinite-horizon average cost of u = Kx under N(0, sigma_w^2 I) noise:
/// sigma_w^2 tr(dlyap(A+BK, Rx + K'RuK)).
double lqr_cost(const SystemParams& sys, const CostParams& costs,
                const Eigen::Ref<const Eigen::MatrixXd>& K, double sigma_w);

/// tr(dlyap(A+BK, (K-K*)'(Ru+B'P*B)(K-K*))); +inf when A+BK is unstable.
double excess_risk(const Eigen::Ref<const Eigen::MatrixXd>& K, const SystemParams& sys,
                   const CostParams& costs);

/// PSD Hessian of the certainty-equivalence excess risk in the row-interleaved
/// vectorization basis, with per-state-row diagonal block access.
struct TaskHessian {
  Eigen::MatrixXd H;  // D x D, D = d_x(d_x+d_u)
  Eigen::Index dx = 0;
  Eigen::Index du = 0;

  Eigen::Index dim() const { return dx * (dx + du); }
  Eigen::MatrixXd block(Eigen::Index i) const {
    const Eigen::Index d = dx + du;
    return H.block(i * d, i * d, d, d);
  }
  static TaskHessian identity(Eigen::Index dx, Eigen::Index du);
};

/// Central second differences of delta -> excess_risk(K_opt(theta+delta); theta).
/// The entries are the true second derivative, so excess_risk ~ (1/2) d'Hd.
TaskHessian task_hessian_fd(const SystemParams& theta, const CostParams& costs,
                            double step = 1e-5);

/// Diagonal LQR family admitting closed-form Hessian entries:
/// A = rho1 e1 e1' + rho2 (I - e1 e1'), B = b I, Rx analogous, Ru = mu I.
struct DiagonalInstance {
  double rho1 = 0.0, rho2 = 0.0;
  double b = 1.0;
  double kappa1 = 1.0, kappa2 = 1.0;
  double mu = 1.0;
  Eigen::Index dx = 1;  // d_u == d_x

  SystemParams system() const;
  CostParams costs() const;
};

TaskHessian task_hessian_closed_form(const DiagonalInstance& inst);

/// Phi = sum_i tr(H_i gamma^{-1}) over the d_x diagonal blocks of H; the
/// Kronecker-block evaluation of tr(H (I (x) gamma)^{-1}).
double idealized_risk(const TaskHessian& H, const Eigen::Ref<const Eigen::MatrixXd>& gamma);

}  // namespace taskexplore
