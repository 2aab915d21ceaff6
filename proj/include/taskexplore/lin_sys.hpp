#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

namespace taskexplore {

/// Parameters (A, B) of the linear system x_{t+1} = A x_t + B u_t + w_t.
struct SystemParams {
  Eigen::MatrixXd A;  // d_x x d_x
  Eigen::MatrixXd B;  // d_x x d_u

  SystemParams() = default;
  SystemParams(Eigen::MatrixXd A_in, Eigen::MatrixXd B_in);

  Eigen::Index dx() const { return A.rows(); }
  Eigen::Index du() const { return B.cols(); }
};

/// Augmented system over z = [x; u]: A_tilde = [A B; 0 0], B_tilde = [0; I].
struct LiftedSystem {
  Eigen::MatrixXd A_tilde;
  Eigen::MatrixXd B_tilde;
};

LiftedSystem lift(const SystemParams& sys);

/// Gaussian open-loop input policy: u_t = mean_signal[t] + N(0, covariance).
/// With periodic_extension the mean signal is read modulo its length.
struct NoisePolicy {
  std::vector<Eigen::VectorXd> mean_signal;  // empty => zero mean
  Eigen::MatrixXd covariance;                // d_u x d_u PSD
  bool periodic_extension = false;

  static NoisePolicy isotropic(Eigen::Index du, double variance);
  static NoisePolicy zero(Eigen::Index du) { return isotropic(du, 0.0); }
};

struct Trajectory {
  std::vector<Eigen::VectorXd> states;  // x_0 .. x_T
  std::vector<Eigen::VectorXd> inputs;  // u_0 .. u_{T-1}
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  Eigen::Index horizon() const { return static_cast<Eigen::Index>(inputs.size()); }
  void append(const Trajectory& tail);  // continue from this trajectory's last state
};

Trajectory simulate(const SystemParams& sys, const NoisePolicy& policy, Eigen::Index horizon,
                    double noise_std, std::uint64_t seed,
                    const std::optional<Eigen::VectorXd>& x0 = std::nullopt);

/// As simulate(), but drawing from a caller-owned Gaussian source so several
/// epochs can share one stream.
class GaussianSource;
Trajectory simulate_with_source(const SystemParams& sys, const NoisePolicy& policy,
                                Eigen::Index horizon, double noise_std, GaussianSource& gen,
                                const Eigen::VectorXd& x0);

double spectral_radius(const Eigen::Ref<const Eigen::MatrixXd>& A);

/// max_w ||(e^{iw} I - A)^{-1}||_op over a uniform grid with one
/// golden-section refinement around the best grid point.
double hinf_norm(const Eigen::Ref<const Eigen::MatrixXd>& A, int grid_size = 2048);

}  // namespace taskexplore
