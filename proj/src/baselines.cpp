#include "taskexplore/baselines.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace taskexplore {

DesignResult design_operator_norm(const SystemParams& theta, double gamma_sq, Eigen::Index T,
                                  Eigen::Index k, double sigma_w, int iters) {
  // The feasible set is the full-budget U_{gamma^2,k}: the operator-norm
  // baseline plays a purely deterministic design, so no exploration-noise
  // split and sigma_u = 0 (gamma_ss falls back to the regularized path).
  const double budget_sq = gamma_sq;
  FreqDesignContext ctx(theta, T, k, 0.0, sigma_w);
  const Eigen::Index du = theta.du();

  MatrixSignal U = project(MatrixSignal::isotropic(k, du, budget_sq));

  auto lambda_min_of = [&](const MatrixSignal& sig, Eigen::MatrixXd* evecs,
                           Eigen::VectorXd* evals) {
    Eigen::MatrixXd g = ctx.gamma(sig);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    if (evecs) *evecs = es.eigenvectors();
    if (evals) *evals = es.eigenvalues();
    return es.eigenvalues().minCoeff();
  };

  MatrixSignal best = U;
  double best_val = lambda_min_of(U, nullptr, nullptr);
  DesignResult res;
  res.objective_trace.push_back(best_val);

  // Scale-free base step: the iterates live on the trace sphere of radius
  // k^2 budget; c/sqrt(i) schedule with best-iterate tracking.
  const double c = k * k * budget_sq;
  for (int it = 1; it <= iters; ++it) {
    Eigen::MatrixXd V;
    Eigen::VectorXd lam;
    lambda_min_of(U, &V, &lam);
    // Subgradient: average v v^T over the (near-)degenerate minimal eigenspace.
    const double gap_tol = 1e-10 * std::max(1.0, std::abs(lam[0]));
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(ctx.dim, ctx.dim);
    int mult = 0;
    for (Eigen::Index j = 0; j < lam.size() && lam[j] <= lam[0] + gap_tol; ++j, ++mult)
      S += V.col(j) * V.col(j).transpose();
    S /= std::max(mult, 1);

    double gnorm = 0.0;
    std::vector<Eigen::MatrixXcd> G(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      G[i] = ctx.resolvents[i].adjoint() * S * ctx.resolvents[i] /
             static_cast<double>(k * k);
      gnorm += G[i].squaredNorm();
    }
    gnorm = std::sqrt(gnorm);
    if (gnorm == 0.0) break;

    const double step = c / (std::sqrt(static_cast<double>(it)) * gnorm);
    std::vector<Eigen::MatrixXcd> cand(k);
    for (Eigen::Index i = 0; i < k; ++i) cand[i] = U.entries[i] + step * G[i];
    U = project(cand, budget_sq, k);

    const double val = lambda_min_of(U, nullptr, nullptr);
    if (val > best_val) {
      best_val = val;
      best = U;
    }
    res.objective_trace.push_back(best_val);
  }

  res.signal = std::move(best);
  res.final_objective = best_val;
  res.predicted_phi = best_val / static_cast<double>(T);
  return res;
}

DesignResult design_frobenius(const SystemParams& theta, double gamma_sq, Eigen::Index T,
                              Eigen::Index k, double sigma_w, const PGDConfig& pgd) {
  return steady_state_design(theta, TaskHessian::identity(theta.dx(), theta.du()), T, k,
                             gamma_sq, sigma_w, pgd);
}

NoiseDesignResult design_noise(const SystemParams& theta, const TaskHessian& H,
                               double gamma_sq, Eigen::Index T, double sigma_w,
                               const PGDConfig& pgd) {
  if (spectral_radius(theta.A) >= 1.0)
    throw std::invalid_argument("design_noise: unstable system");
  const Eigen::Index du = theta.du();
  const Eigen::Index d = theta.dx() + du;
  const LiftedSystem lifted = lift(theta);

  auto gamma_of = [&](const Eigen::MatrixXd& lambda) {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(d, d);
    Q.topLeftCorner(d - du, d - du) =
        sigma_w * sigma_w * Eigen::MatrixXd::Identity(d - du, d - du);
    Q.bottomRightCorner(du, du) = lambda;
    Eigen::MatrixXd g = gamma_noise_average(lifted.A_tilde, Q, T);
    g += (1e-12 * std::max(g.trace(), 1.0) / d) * Eigen::MatrixXd::Identity(d, d);
    return g;
  };

  auto objective = [&](const Eigen::MatrixXd& lambda) {
    return idealized_risk(H, gamma_of(lambda));
  };

  // Gradient: dGamma/dLambda is the weighted sum over s of
  // ((T-s)/T) A^s Btil . Btil^T A^sT, so grad = -Btil^T W Btil with
  // W = sum_s ((T-s)/T) (A^T)^s S A^s.
  auto gradient = [&](const Eigen::MatrixXd& lambda) {
    Eigen::MatrixXd g = gamma_of(lambda);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    Eigen::MatrixXd ginv = ldlt.solve(Eigen::MatrixXd::Identity(d, d));
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < H.dx; ++i) S += ginv * H.block(i) * ginv;
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::MatrixXd W = gamma_noise_average(lifted.A_tilde.transpose(), S, T);
    Eigen::MatrixXd grad = -lifted.B_tilde.transpose() * W * lifted.B_tilde;
    return Eigen::MatrixXd(0.5 * (grad + grad.transpose()));
  };

  auto proj = [&](const Eigen::MatrixXd& lambda) {
    Eigen::MatrixXd sym = 0.5 * (lambda + lambda.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd out =
        es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    const double tr = lam.sum();
    if (tr > gamma_sq && tr > 0.0) out *= gamma_sq / tr;
    return out;
  };

  Eigen::MatrixXd lambda = (gamma_sq / du) * Eigen::MatrixXd::Identity(du, du);
  NoiseDesignResult res;
  double f = objective(lambda);
  res.objective_trace.push_back(f);

  double step = pgd.init_step;
  for (int it = 0; it < pgd.max_iter; ++it) {
    Eigen::MatrixXd G = gradient(lambda);
    if (G.norm() == 0.0) break;
    step *= 2.0;
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      Eigen::MatrixXd cand = proj(lambda - step * G);
      const double decrease_ref = (G.array() * (lambda - cand).array()).sum();
      const double fv = objective(cand);
      if (std::isfinite(fv) && fv <= f - pgd.armijo * decrease_ref && fv <= f) {
        const double rel_impr = (f - fv) / std::max(std::abs(f), 1e-300);
        lambda = std::move(cand);
        f = fv;
        res.objective_trace.push_back(f);
        accepted = true;
        if (rel_impr < pgd.rel_tol) it = pgd.max_iter;
        break;
      }
      step *= pgd.backtrack;
    }
    if (!accepted) break;
  }

  res.lambda = std::move(lambda);
  res.final_objective = f;
  return res;
}

Trajectory run_oracle_policy(const SystemParams& truth, const MatrixSignal& design,
                             Eigen::Index T, double sigma_w, std::uint64_t seed) {
  const Eigen::Index du = truth.du();
  if (T % (du * design.k) != 0)
    throw std::invalid_argument("run_oracle_policy: T must be divisible by d_u * k");
  TimeSignal ts = construct_time_input(design, T / du, design.k);
  NoisePolicy policy = NoisePolicy::zero(du);
  policy.mean_signal = ts.samples;
  policy.periodic_extension = true;
  return simulate(truth, policy, T, sigma_w, seed);
}

Trajectory run_oracle_policy(const SystemParams& truth, const Eigen::MatrixXd& lambda,
                             Eigen::Index T, double sigma_w, std::uint64_t seed) {
  NoisePolicy policy;
  policy.covariance = lambda;
  return simulate(truth, policy, T, sigma_w, seed);
}

}  // namespace taskexplore
