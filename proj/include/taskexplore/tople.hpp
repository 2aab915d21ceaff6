#pragma once

#include <optional>
#include <vector>

#include "taskexplore/freq_design.hpp"
#include "taskexplore/lqr.hpp"
#include "taskexplore/sysid.hpp"

namespace taskexplore {

struct TopleConfig {
  double gamma_sq = 1.0;
  int c_init = 8;       // T_0 = c_init * d_u, k_0 = c_init
  int num_epochs = 6;   // epochs 0 .. num_epochs-1; epoch 0 is pure noise
  double sigma_w = 1.0;
  std::uint64_t seed = 0;
  PGDConfig pgd;
  double hessian_step = 1e-5;
  // Test hook / oracle variant: design every epoch on the true system instead
  // of the running estimate (H(truth) is computed once and reused).
  bool use_truth = false;

  /// Smallest num_epochs whose cumulative horizon reaches total_T.
  static int epochs_for_horizon(Eigen::Index total_T, int c_init, Eigen::Index du);
};

struct EpochRecord {
  int epoch = 0;
  Eigen::Index epoch_T = 0;
  Eigen::Index cumulative_T = 0;
  Eigen::Index k = 0;
  SystemParams theta_hat;
  std::optional<DesignResult> design;  // absent for epoch 0 and fallback epochs
  bool fallback = false;               // isotropic-noise fallback was used
  Eigen::MatrixXd controller;          // K_opt(theta_hat); empty when DARE failed
  double excess_risk = 0.0;            // +inf when no stabilizing controller
  double det_power = 0.0;              // sum_t ||u_mean_t||^2 over the epoch
  double noise_cov_trace = 0.0;        // tr(Lambda) of the exploratory noise
  double budget_used = 0.0;            // empirical sum_t u_t' u_t
};

std::vector<EpochRecord> run_tople(const SystemParams& truth, const CostParams& costs,
                                   const TopleConfig& config);

struct BudgetAuditRow {
  int epoch;
  double expected_power;  // det_power + T_i * tr(Lambda)
  double allowed;         // T_i * gamma_sq
  bool ok;
};

struct BudgetAuditReport {
  std::vector<BudgetAuditRow> rows;
  bool ok = true;
};

/// Recomputes the expected per-epoch input power and checks it against the
/// per-epoch allowance T_i * gamma_sq. Throws std::runtime_error naming the
/// first offending epoch when hard_fail is set.
BudgetAuditReport budget_audit(const std::vector<EpochRecord>& records, double gamma_sq,
                               bool hard_fail = true);

}  // namespace taskexplore
