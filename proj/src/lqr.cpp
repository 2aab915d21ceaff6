#include "taskexplore/lqr.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "taskexplore/sysid.hpp"

namespace taskexplore {

namespace {

double operator_norm_sym(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

RiccatiSolution solve_dare(const SystemParams& sys, const CostParams& costs, double tol,
                           int max_iter) {
  const Eigen::Index dx = sys.dx();
  if (costs.Rx.rows() != dx || costs.Ru.rows() != sys.du())
    throw std::invalid_argument("solve_dare: cost dimension mismatch");

  Eigen::MatrixXd P = costs.Rx;
  int it = 0;
  double change = std::numeric_limits<double>::infinity();
  for (; it < max_iter; ++it) {
    Eigen::MatrixXd BtP = sys.B.transpose() * P;
    Eigen::MatrixXd G = costs.Ru + BtP * sys.B;
    Eigen::MatrixXd Pnext =
        sys.A.transpose() * P * sys.A -
        (BtP * sys.A).transpose() * G.ldlt().solve(BtP * sys.A) + costs.Rx;
    Pnext = 0.5 * (Pnext + Pnext.transpose()).eval();
    change = operator_norm_sym(Pnext - P) / std::max(1.0, operator_norm_sym(Pnext));
    P = std::move(Pnext);
    if (change < tol) break;
  }
  if (change >= tol)
    throw std::runtime_error("solve_dare: no convergence within max_iter");

  RiccatiSolution sol;
  sol.P = P;
  Eigen::MatrixXd G = costs.Ru + sys.B.transpose() * P * sys.B;
  sol.K = -G.ldlt().solve(sys.B.transpose() * P * sys.A);
  sol.iterations = it + 1;

  Eigen::MatrixXd riccati_rhs =
      sys.A.transpose() * P * sys.A -
      (sys.B.transpose() * P * sys.A).transpose() *
          G.ldlt().solve(sys.B.transpose() * P * sys.A) +
      costs.Rx;
  sol.residual = operator_norm_sym(P - riccati_rhs);

  if (spectral_radius(sys.A + sys.B * sol.K) >= 1.0)
    throw std::runtime_error("solve_dare: closed loop A+BK unstable");
  return sol;
}

Eigen::MatrixXd dlyap(const Eigen::Ref<const Eigen::MatrixXd>& A_cl,
                      const Eigen::Ref<const Eigen::MatrixXd>& Q) {
  if (A_cl.rows() != A_cl.cols() || Q.rows() != A_cl.rows() || Q.cols() != A_cl.cols())
    throw std::invalid_argument("dlyap: dimension mismatch");
  if (spectral_radius(A_cl) >= 1.0) throw std::invalid_argument("dlyap: unstable A_cl");

  // Doubling: after j rounds X = sum_{s<2^j} (A^T)^s Q A^s with M = A^{2^j}.
  Eigen::MatrixXd X = 0.5 * (Q + Q.transpose());
  Eigen::MatrixXd M = A_cl;
  const double scale = std::max(X.norm(), 1e-300);
  for (int j = 0; j < 200; ++j) {
    Eigen::MatrixXd term = M.transpose() * X * M;
    if (term.norm() <= 1e-18 * scale && M.norm() < 1.0) break;
    X += term;
    X = 0.5 * (X + X.transpose()).eval();
    M = (M * M).eval();
  }
  return X;
}

double lqr_cost(const SystemParams& sys, const CostParams& costs,
                const Eigen::Ref<const Eigen::MatrixXd>& K, double sigma_w) {
  Eigen::MatrixXd A_cl = sys.A + sys.B * K;
  if (spectral_radius(A_cl) >= 1.0) throw std::invalid_argument("lqr_cost: destabilizing K");
  if (sigma_w == 0.0) return 0.0;
  Eigen::MatrixXd Q = costs.Rx + K.transpose() * costs.Ru * K;
  return sigma_w * sigma_w * dlyap(A_cl, Q).trace();
}

double excess_risk(const Eigen::Ref<const Eigen::MatrixXd>& K, const SystemParams& sys,
                   const CostParams& costs) {
  Eigen::MatrixXd A_cl = sys.A + sys.B * K;
  if (spectral_radius(A_cl) >= 1.0) return std::numeric_limits<double>::infinity();
  RiccatiSolution star = solve_dare(sys, costs);
  Eigen::MatrixXd dK = K - star.K;
  Eigen::MatrixXd W = costs.Ru + sys.B.transpose() * star.P * sys.B;
  return dlyap(A_cl, dK.transpose() * W * dK).trace();
}

TaskHessian TaskHessian::identity(Eigen::Index dx, Eigen::Index du) {
  TaskHessian H;
  H.dx = dx;
  H.du = du;
  H.H = Eigen::MatrixXd::Identity(dx * (dx + du), dx * (dx + du));
  return H;
}

namespace {

// Excess risk of the certainty-equivalence controller synthesized at
// theta + delta, evaluated on theta. Throws if the DARE at the perturbed
// point fails.
double ce_excess(const SystemParams& theta, const CostParams& costs,
                 const Eigen::VectorXd& theta_vec, const Eigen::VectorXd& delta) {
  SystemParams pert =
      vec_convention::unvectorize(theta_vec + delta, theta.dx(), theta.du());
  RiccatiSolution sol = solve_dare(pert, costs);
  double r = excess_risk(sol.K, theta, costs);
  if (!std::isfinite(r)) throw std::runtime_error("task_hessian_fd: unstable CE controller");
  return r;
}

}  // namespace

TaskHessian task_hessian_fd(const SystemParams& theta, const CostParams& costs, double step) {
  if (step <= 0.0) throw std::invalid_argument("task_hessian_fd: step must be positive");
  const Eigen::Index dx = theta.dx(), du = theta.du();
  const Eigen::Index D = vec_convention::dim(dx, du);
  const Eigen::VectorXd tv = vec_convention::vectorize(theta);
  const double scale = std::max(1.0, theta.A.operatorNorm());

  double h = step * scale;
  for (int attempt = 0;; ++attempt) {
    try {
      Eigen::MatrixXd H(D, D);
      Eigen::VectorXd ei = Eigen::VectorXd::Zero(D), ej = Eigen::VectorXd::Zero(D);
      for (Eigen::Index i = 0; i < D; ++i) {
        ei.setZero();
        ei[i] = h;
        const double rp = ce_excess(theta, costs, tv, ei);
        const double rm = ce_excess(theta, costs, tv, -ei);
        H(i, i) = (rp + rm) / (h * h);  // R(theta) = 0 at the base point
        for (Eigen::Index j = i + 1; j < D; ++j) {
          ej.setZero();
          ej[j] = h;
          const double rpp = ce_excess(theta, costs, tv, ei + ej);
          const double rpm = ce_excess(theta, costs, tv, ei - ej);
          const double rmp = ce_excess(theta, costs, tv, -ei + ej);
          const double rmm = ce_excess(theta, costs, tv, -ei - ej);
          H(i, j) = H(j, i) = (rpp - rpm - rmp + rmm) / (4.0 * h * h);
        }
      }
      TaskHessian out;
      out.H = 0.5 * (H + H.transpose());
      out.dx = dx;
      out.du = du;
      return out;
    } catch (const std::runtime_error&) {
      if (attempt >= 3) throw;
      h *= 0.5;
    }
  }
}

SystemParams DiagonalInstance::system() const {
  Eigen::MatrixXd A = rho2 * Eigen::MatrixXd::Identity(dx, dx);
  A(0, 0) = rho1;
  return SystemParams(A, b * Eigen::MatrixXd::Identity(dx, dx));
}

CostParams DiagonalInstance::costs() const {
  CostParams c;
  c.Rx = kappa2 * Eigen::MatrixXd::Identity(dx, dx);
  c.Rx(0, 0) = kappa1;
  c.Ru = mu * Eigen::MatrixXd::Identity(dx, dx);
  return c;
}

TaskHessian task_hessian_closed_form(const DiagonalInstance& inst) {
  const Eigen::Index n = inst.dx;
  const double b = inst.b, mu = inst.mu;

  // Scalar DARE per coordinate: p from the quadratic root, gain k = rho b p /
  // (mu + b^2 p) in the positive convention, closed loop a = rho - b k.
  auto scalar = [&](double rho, double kappa, double& p, double& k, double& a) {
    p = (b * b * kappa - mu + mu * rho * rho +
         std::sqrt(4.0 * b * b * mu * kappa +
                   std::pow(mu - b * b * kappa - mu * rho * rho, 2))) /
        (2.0 * b * b);
    k = rho * b * p / (mu + b * b * p);
    a = rho - b * k;
  };

  Eigen::VectorXd p(n), kk(n), a(n);
  scalar(inst.rho1, inst.kappa1, p(0), kk(0), a(0));
  for (Eigen::Index i = 1; i < n; ++i) scalar(inst.rho2, inst.kappa2, p(i), kk(i), a(i));

  const Eigen::Index D = vec_convention::dim(n, n);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(D, D);

  for (Eigen::Index nn = 0; nn < n; ++nn) {
    for (Eigen::Index mm = 0; mm < n; ++mm) {
      const double pn = p(nn), pm = p(mm);
      const double an = a(nn), am = a(mm);
      const double kn = kk(nn), km = kk(mm);
      const Eigen::Index ia = vec_convention::a_index(nn, mm, n, n);
      const Eigen::Index ib = vec_convention::b_index(nn, mm, n, n);
      double haa, hbb, hab;
      if (nn != mm) {
        const double c1 = 1.0 / ((mu + b * b * pn) * (1.0 - am * am));
        const double c2 = 1.0 / ((mu + b * b * pm) * (1.0 - an * an));
        const double r = b * pn / (1.0 - an * am);
        const double s = b * pn * an * an / (1.0 - an * am);
        haa = c1 * r * r + c2 * s * s;
        hbb = c1 * (r * km) * (r * km) + c2 * (pn * an - s * km) * (pn * an - s * km);
        hab = -km * c1 * r * r + c2 * (pn * an - s * km) * s;
      } else {
        const double c = 1.0 / ((mu + b * b * pn) * (1.0 - an * an));
        const double g = b * pn * (1.0 + an * an) / (1.0 - an * an);
        haa = c * g * g;
        const double w = pn * an - kn * g;
        hbb = c * w * w;
        hab = c * g * w;
      }
      // The bilinear form d^2/dt1 dt2 carries both symmetric cross terms
      // (K^t1)' M K^t2 and (K^t2)' M K^t1, which coincide entrywise on this
      // diagonal family; hence the factor 2 over the single-term sums above.
      H(ia, ia) = 2.0 * haa;
      H(ib, ib) = 2.0 * hbb;
      H(ia, ib) = H(ib, ia) = 2.0 * hab;
    }
  }

  TaskHessian out;
  out.H = std::move(H);
  out.dx = n;
  out.du = n;
  return out;
}

double idealized_risk(const TaskHessian& H, const Eigen::Ref<const Eigen::MatrixXd>& gamma) {
  const Eigen::Index d = H.dx + H.du;
  if (gamma.rows() != d || gamma.cols() != d)
    throw std::invalid_argument("idealized_risk: gamma dimension mismatch");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gamma);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 0.0)
    throw std::invalid_argument("idealized_risk: gamma must be positive definite");
  Eigen::MatrixXd ginv = ldlt.solve(Eigen::MatrixXd::Identity(d, d));
  double phi = 0.0;
  for (Eigen::Index i = 0; i < H.dx; ++i)
    phi += (H.block(i).array() * ginv.array()).sum();  // tr(H_i gamma^{-1})
  return phi;
}

}  // namespace taskexplore
