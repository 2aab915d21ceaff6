#pragma once

#include <Eigen/Core>

#include "taskexplore/lin_sys.hpp"

namespace taskexplore {

// Row-interleaved vectorization of theta = (A, B):
// vec(theta) = [A_1; B_1; ...; A_{d_x}; B_{d_x}] with A_i, B_i the i-th rows.
// This convention is shared with the task Hessian so its (d_x+d_u) diagonal
// blocks align with the covariance of z = [x; u].
namespace vec_convention {

inline Eigen::Index dim(Eigen::Index dx, Eigen::Index du) { return dx * (dx + du); }

// Index of A(i,j) / B(i,j) in the vectorized parameter, all zero-based.
inline Eigen::Index a_index(Eigen::Index i, Eigen::Index j, Eigen::Index dx, Eigen::Index du) {
  return i * (dx + du) + j;
}
inline Eigen::Index b_index(Eigen::Index i, Eigen::Index j, Eigen::Index dx, Eigen::Index du) {
  return i * (dx + du) + dx + j;
}

Eigen::VectorXd vectorize(const SystemParams& theta);
SystemParams unvectorize(const Eigen::VectorXd& v, Eigen::Index dx, Eigen::Index du);

}  // namespace vec_convention

struct EmpiricalCovariance {
  Eigen::MatrixXd sigma;  // (d_x+d_u) square, Sigma_T = sum_t z_t z_t^T
  Eigen::Index samples = 0;
};

EmpiricalCovariance empirical_covariance(const Trajectory& traj);

class RankDeficientCovariance : public std::runtime_error {
 public:
  RankDeficientCovariance(double lambda_min, double trace);
  double lambda_min;
  double trace;
};

/// Ordinary least squares [A B] = (sum x_{t+1} z_t^T)(sum z_t z_t^T)^{-1}.
/// Throws RankDeficientCovariance when lambda_min(Sigma) <= 1e-10 * trace.
SystemParams least_squares(const Trajectory& traj);

/// vec(theta_hat - theta_star)^T M vec(theta_hat - theta_star).
double m_norm_error(const SystemParams& theta_hat, const SystemParams& theta_star,
                    const Eigen::Ref<const Eigen::MatrixXd>& M);

}  // namespace taskexplore
