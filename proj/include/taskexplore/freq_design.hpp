#pragma once

#include <Eigen/Core>
#include <vector>

#include "taskexplore/lin_sys.hpp"
#include "taskexplore/lqr.hpp"

namespace taskexplore {

/// Length-k sequence of Hermitian PSD d_u x d_u matrices (U_l)_{l=1..k} with
/// conjugate symmetry U_l = conj(U_{k-l}) and trace budget
/// sum_l tr(U_l) <= k^2 gamma_sq. entries[i] holds U_{i+1}.
struct MatrixSignal {
  Eigen::Index k = 0;
  double gamma_sq = 0.0;
  std::vector<Eigen::MatrixXcd> entries;

  Eigen::Index du() const { return entries.empty() ? 0 : entries.front().rows(); }
  double total_trace() const;
  /// Isotropic feasible point U_l = (k gamma_sq / du) I, saturating the budget.
  static MatrixSignal isotropic(Eigen::Index k, Eigen::Index du, double gamma_sq);
};

/// Checks the MatrixSignal invariants; throws std::invalid_argument naming the
/// violated one.
void validate_signal(const MatrixSignal& signal, double tol = 1e-9);

/// Gamma^freq_k = (1/k) sum_l R_l U_l R_l^H with R_l = (e^{i 2 pi l / k} I - A)^{-1} B.
/// Raises if the imaginary residue exceeds 1e-10 of the result norm.
Eigen::MatrixXd gamma_freq(const Eigen::Ref<const Eigen::MatrixXd>& A,
                           const Eigen::Ref<const Eigen::MatrixXd>& B,
                           const MatrixSignal& signal);
Eigen::MatrixXd gamma_freq(const LiftedSystem& sys, const MatrixSignal& signal);

/// Gamma^noise_t = sum_{s<t} A^s (Lambda_w + B Lambda_u B^T) (A^s)^T with
/// Lambda_w = sigma_w^2 I on the state block.
Eigen::MatrixXd gamma_noise(const Eigen::Ref<const Eigen::MatrixXd>& A,
                            const Eigen::Ref<const Eigen::MatrixXd>& B,
                            const Eigen::Ref<const Eigen::MatrixXd>& lambda_u,
                            const Eigen::Ref<const Eigen::MatrixXd>& lambda_w,
                            Eigen::Index t);
/// Lifted-system convention: process noise sigma_w^2 I enters the state block
/// only, the input block picks up Lambda_u from the s = 0 term.
Eigen::MatrixXd gamma_noise(const LiftedSystem& sys,
                            const Eigen::Ref<const Eigen::MatrixXd>& lambda_u, double sigma_w,
                            Eigen::Index t);

/// (1/T) sum_{t=1..T} Gamma^noise_t, evaluated exactly by doubling.
Eigen::MatrixXd gamma_noise_average(const Eigen::Ref<const Eigen::MatrixXd>& A,
                                    const Eigen::Ref<const Eigen::MatrixXd>& Q,
                                    Eigen::Index T);

struct GammaSS {
  Eigen::MatrixXd value;
  bool regularized = false;
};

/// Gamma^ss_{T,k} = (1/k) Gamma^freq + (1/T) sum_t Gamma^noise_t on the lifted
/// system. With sigma_u = 0 an eps*I regularizer keeps the inverse defined.
GammaSS gamma_ss(const LiftedSystem& sys, const MatrixSignal& signal, double sigma_u,
                 double sigma_w, Eigen::Index T, Eigen::Index k);

double design_objective(const TaskHessian& H, const Eigen::Ref<const Eigen::MatrixXd>& gamma);

/// Precomputed quantities for repeated objective/gradient evaluation at fixed
/// (theta, T, k): the per-frequency lifted resolvents and the noise-average
/// covariance contribution.
struct FreqDesignContext {
  FreqDesignContext(const SystemParams& theta, Eigen::Index T, Eigen::Index k, double sigma_u,
                    double sigma_w);

  Eigen::Index k;
  Eigen::Index dim;                     // d_x + d_u
  std::vector<Eigen::MatrixXcd> resolvents;  // R_l, l = 1..k
  Eigen::MatrixXd noise_part;           // (1/T) sum_t Gamma^noise_t
  bool regularize = false;              // sigma_u == 0

  Eigen::MatrixXd gamma(const MatrixSignal& signal) const;
  double objective(const TaskHessian& H, const MatrixSignal& signal) const;
  /// G_l = -(1/k^2) R_l^H S R_l, S = sum_i Gamma^{-1} H_i Gamma^{-1}.
  std::vector<Eigen::MatrixXcd> gradient(const TaskHessian& H,
                                         const MatrixSignal& signal) const;
};

/// Projection onto U_{gamma_sq,k}: Hermitian-symmetrize, average conjugate
/// pairs, clip eigenvalues to the PSD cone, uniformly scale traces into the
/// budget. Idempotent.
MatrixSignal project(const std::vector<Eigen::MatrixXcd>& raw, double gamma_sq,
                     Eigen::Index k);
MatrixSignal project(const MatrixSignal& signal);

struct PGDConfig {
  int max_iter = 2000;
  double rel_tol = 1e-8;
  double init_step = 1.0;
  double backtrack = 0.5;
  double armijo = 1e-4;
};

struct DesignResult {
  MatrixSignal signal;
  std::vector<double> objective_trace;
  double final_objective = 0.0;
  double predicted_phi = 0.0;  // final objective normalized by the horizon
};

/// Projected gradient descent for min_U tr(H Gamma^ss(U)^{-1}) over
/// U_{gamma_sq/2,k} with exploration noise sigma_u = gamma/sqrt(2 d_u).
DesignResult steady_state_design(const SystemParams& theta_hat, const TaskHessian& H,
                                 Eigen::Index t, Eigen::Index k, double gamma_sq,
                                 double sigma_w, const PGDConfig& pgd = {});

/// PGD over an arbitrary feasible set/context; used by the baselines too.
DesignResult pgd_minimize(const FreqDesignContext& ctx, const TaskHessian& H,
                          double budget_sq, Eigen::Index t, const PGDConfig& pgd);

}  // namespace taskexplore
