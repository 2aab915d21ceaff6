#pragma once

#include "taskexplore/freq_design.hpp"
#include "taskexplore/signal_synth.hpp"

namespace taskexplore {

/// Projected subgradient ascent on lambda_min(Gamma^ss(U)) over the same
/// feasible set as steady_state_design. Returns the best iterate.
DesignResult design_operator_norm(const SystemParams& theta, double gamma_sq, Eigen::Index T,
                                  Eigen::Index k, double sigma_w, int iters = 500);

/// steady_state_design with H = I (Frobenius-norm identification).
DesignResult design_frobenius(const SystemParams& theta, double gamma_sq, Eigen::Index T,
                              Eigen::Index k, double sigma_w, const PGDConfig& pgd = {});

struct NoiseDesignResult {
  Eigen::MatrixXd lambda;  // d_u x d_u PSD, tr <= gamma_sq
  std::vector<double> objective_trace;
  double final_objective = 0.0;
};

/// PGD over {Lambda PSD, tr(Lambda) <= gamma_sq} minimizing
/// tr(H ((1/T) sum_t Gamma^noise_t(theta, Lambda))^{-1}).
NoiseDesignResult design_noise(const SystemParams& theta, const TaskHessian& H,
                               double gamma_sq, Eigen::Index T, double sigma_w,
                               const PGDConfig& pgd = {});

/// Plays a fixed frequency-domain design (synthesized via construct_time_input
/// and tiled over the whole horizon) for T steps; no adaptation.
Trajectory run_oracle_policy(const SystemParams& truth, const MatrixSignal& design,
                             Eigen::Index T, double sigma_w, std::uint64_t seed);

/// Noise-policy variant: u_t ~ N(0, lambda).
Trajectory run_oracle_policy(const SystemParams& truth, const Eigen::MatrixXd& lambda,
                             Eigen::Index T, double sigma_w, std::uint64_t seed);

}  // namespace taskexplore
