#include "taskexplore/sysid.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <sstream>
#include <stdexcept>

namespace taskexplore {

namespace vec_convention {

Eigen::VectorXd vectorize(const SystemParams& theta) {
  const Eigen::Index dx = theta.dx(), du = theta.du();
  Eigen::VectorXd v(dim(dx, du));
  for (Eigen::Index i = 0; i < dx; ++i) {
    v.segment(i * (dx + du), dx) = theta.A.row(i).transpose();
    v.segment(i * (dx + du) + dx, du) = theta.B.row(i).transpose();
  }
  return v;
}

SystemParams unvectorize(const Eigen::VectorXd& v, Eigen::Index dx, Eigen::Index du) {
  if (v.size() != dim(dx, du))
    throw std::invalid_argument("unvectorize: wrong vector length");
  Eigen::MatrixXd A(dx, dx), B(dx, du);
  for (Eigen::Index i = 0; i < dx; ++i) {
    A.row(i) = v.segment(i * (dx + du), dx).transpose();
    B.row(i) = v.segment(i * (dx + du) + dx, du).transpose();
  }
  return SystemParams(std::move(A), std::move(B));
}

}  // namespace vec_convention

EmpiricalCovariance empirical_covariance(const Trajectory& traj) {
  const Eigen::Index T = traj.horizon();
  const Eigen::Index dx = traj.states.empty() ? 0 : traj.states[0].size();
  const Eigen::Index du = T > 0 ? traj.inputs[0].size() : 0;
  EmpiricalCovariance cov;
  cov.sigma = Eigen::MatrixXd::Zero(dx + du, dx + du);
  cov.samples = T;
  Eigen::VectorXd z(dx + du);
  for (Eigen::Index t = 0; t < T; ++t) {
    z.head(dx) = traj.states[t];
    z.tail(du) = traj.inputs[t];
    cov.sigma.selfadjointView<Eigen::Lower>().rankUpdate(z);
  }
  cov.sigma = cov.sigma.selfadjointView<Eigen::Lower>();
  return cov;
}

RankDeficientCovariance::RankDeficientCovariance(double lmin, double tr)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "least_squares: rank-deficient covariance, lambda_min=" << lmin
           << " trace=" << tr;
        return os.str();
      }()),
      lambda_min(lmin),
      trace(tr) {}

SystemParams least_squares(const Trajectory& traj) {
  const Eigen::Index T = traj.horizon();
  if (T < 1) throw std::invalid_argument("least_squares: empty trajectory");
  const Eigen::Index dx = traj.states[0].size();
  const Eigen::Index du = traj.inputs[0].size();

  EmpiricalCovariance cov = empirical_covariance(traj);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(dx, dx + du);  // sum x_{t+1} z_t^T
  Eigen::VectorXd z(dx + du);
  for (Eigen::Index t = 0; t < T; ++t) {
    z.head(dx) = traj.states[t];
    z.tail(du) = traj.inputs[t];
    cross += traj.states[t + 1] * z.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.sigma);
  const double lmin = es.eigenvalues().minCoeff();
  const double tr = cov.sigma.trace();
  if (lmin <= 1e-10 * tr) throw RankDeficientCovariance(lmin, tr);

  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov.sigma);
  Eigen::MatrixXd theta = ldlt.solve(cross.transpose()).transpose();
  return SystemParams(theta.leftCols(dx), theta.rightCols(du));
}

double m_norm_error(const SystemParams& theta_hat, const SystemParams& theta_star,
                    const Eigen::Ref<const Eigen::MatrixXd>& M) {
  if (theta_hat.dx() != theta_star.dx() || theta_hat.du() != theta_star.du())
    throw std::invalid_argument("m_norm_error: system dimension mismatch");
  Eigen::VectorXd delta =
      vec_convention::vectorize(theta_hat) - vec_convention::vectorize(theta_star);
  if (M.rows() != delta.size() || M.cols() != delta.size())
    throw std::invalid_argument("m_norm_error: M dimension mismatch");
  return delta.dot(M * delta);
}

}  // namespace taskexplore
