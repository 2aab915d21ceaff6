#include "taskexplore/tople.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "taskexplore/rng.hpp"
#include "taskexplore/signal_synth.hpp"

namespace taskexplore {

int TopleConfig::epochs_for_horizon(Eigen::Index total_T, int c_init, Eigen::Index du) {
  const Eigen::Index T0 = static_cast<Eigen::Index>(c_init) * du;
  Eigen::Index cum = 0;
  int epochs = 0;
  while (cum < total_T) {
    cum += T0 << epochs;
    ++epochs;
  }
  return epochs;
}

namespace {

struct ControllerEval {
  Eigen::MatrixXd K;
  double risk = std::numeric_limits<double>::infinity();
};

ControllerEval evaluate_estimate(const SystemParams& theta_hat, const SystemParams& truth,
                                 const CostParams& costs) {
  ControllerEval ev;
  try {
    RiccatiSolution sol = solve_dare(theta_hat, costs);
    ev.K = sol.K;
    ev.risk = excess_risk(sol.K, truth, costs);
  } catch (const std::exception&) {
    // unstabilizable estimate: +inf sentinel
  }
  return ev;
}

}  // namespace

std::vector<EpochRecord> run_tople(const SystemParams& truth, const CostParams& costs,
                                   const TopleConfig& config) {
  if (config.gamma_sq <= 0.0) throw std::invalid_argument("run_tople: budget must be positive");
  if (config.c_init < 1) throw std::invalid_argument("run_tople: c_init must be >= 1");
  if (spectral_radius(truth.A) >= 1.0)
    throw std::invalid_argument("run_tople: unstable true system");
  const Eigen::Index du = truth.du();
  const Eigen::Index T0 = static_cast<Eigen::Index>(config.c_init) * du;
  const Eigen::Index k0 = config.c_init;

  GaussianSource gen(config.seed);
  std::vector<EpochRecord> records;
  records.reserve(config.num_epochs);

  std::optional<TaskHessian> truth_hessian;  // cached for use_truth runs

  Trajectory all;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(truth.dx());
  for (int i = 0; i < config.num_epochs; ++i) {
    const Eigen::Index Ti = T0 << i;
    const Eigen::Index ki = k0 << (i / 4);
    if (ki < 1 || (Ti % du) != 0 || ((Ti / du) % ki) != 0)
      throw std::logic_error("run_tople: infeasible epoch schedule");

    EpochRecord rec;
    rec.epoch = i;
    rec.epoch_T = Ti;
    rec.k = ki;

    NoisePolicy policy = NoisePolicy::isotropic(du, config.gamma_sq / du);
    if (i > 0) {
      // Certainty-equivalent design at the running estimate (or the truth for
      // the oracle variant), played on top of gamma^2/(2 d_u) exploratory noise.
      const SystemParams& design_point = config.use_truth ? truth : records.back().theta_hat;
      try {
        if (spectral_radius(design_point.A) >= 1.0)
          throw std::runtime_error("unstable design point");
        TaskHessian H;
        if (config.use_truth) {
          if (!truth_hessian)
            truth_hessian = task_hessian_fd(design_point, costs, config.hessian_step);
          H = *truth_hessian;
        } else {
          H = task_hessian_fd(design_point, costs, config.hessian_step);
        }
        DesignResult des = steady_state_design(design_point, H, Ti, ki, config.gamma_sq,
                                               config.sigma_w, config.pgd);
        TimeSignal ts = construct_time_input(des.signal, Ti / du, ki);
        policy = NoisePolicy::isotropic(du, config.gamma_sq / (2.0 * du));
        policy.mean_signal = ts.samples;
        policy.periodic_extension = true;
        rec.design = std::move(des);
      } catch (const std::exception&) {
        rec.fallback = true;  // isotropic noise for this epoch
        policy = NoisePolicy::isotropic(du, config.gamma_sq / du);
      }
    }

    Trajectory epoch_traj =
        simulate_with_source(truth, policy, Ti, config.sigma_w, gen, x);
    x = epoch_traj.states.back();

    for (const auto& u : epoch_traj.inputs) rec.budget_used += u.squaredNorm();
    if (!policy.mean_signal.empty()) {
      for (Eigen::Index t = 0; t < Ti; ++t)
        rec.det_power +=
            policy.mean_signal[static_cast<std::size_t>(t) % policy.mean_signal.size()]
                .squaredNorm();
    }
    rec.noise_cov_trace = policy.covariance.trace();

    all.append(epoch_traj);
    rec.cumulative_T = all.horizon();

    // Least squares over all data collected so far.
    try {
      rec.theta_hat = least_squares(all);
    } catch (const RankDeficientCovariance&) {
      rec.theta_hat = SystemParams(Eigen::MatrixXd::Zero(truth.dx(), truth.dx()),
                                   Eigen::MatrixXd::Zero(truth.dx(), du));
    }
    ControllerEval ev = evaluate_estimate(rec.theta_hat, truth, costs);
    rec.controller = ev.K;
    rec.excess_risk = ev.risk;

    records.push_back(std::move(rec));
  }
  return records;
}

BudgetAuditReport budget_audit(const std::vector<EpochRecord>& records, double gamma_sq,
                               bool hard_fail) {
  BudgetAuditReport report;
  for (const auto& rec : records) {
    BudgetAuditRow row;
    row.epoch = rec.epoch;
    row.expected_power = rec.det_power + static_cast<double>(rec.epoch_T) * rec.noise_cov_trace;
    row.allowed = static_cast<double>(rec.epoch_T) * gamma_sq;
    row.ok = row.expected_power <= row.allowed * (1.0 + 1e-9) + 1e-9;
    if (!row.ok) {
      report.ok = false;
      if (hard_fail) {
        std::ostringstream os;
        os << "budget_audit: epoch " << rec.epoch << " expected power "
           << row.expected_power << " exceeds allowance " << row.allowed;
        throw std::runtime_error(os.str());
      }
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace taskexplore
