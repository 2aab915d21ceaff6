#include "taskexplore/lin_sys.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <complex>
#include <stdexcept>

#include "taskexplore/rng.hpp"

namespace taskexplore {

SystemParams::SystemParams(Eigen::MatrixXd A_in, Eigen::MatrixXd B_in)
    : A(std::move(A_in)), B(std::move(B_in)) {
  if (A.rows() != A.cols()) throw std::invalid_argument("SystemParams: A must be square");
  if (B.rows() != A.rows()) throw std::invalid_argument("SystemParams: B must have d_x rows");
}

LiftedSystem lift(const SystemParams& sys) {
  const Eigen::Index dx = sys.dx(), du = sys.du(), d = dx + du;
  LiftedSystem out;
  out.A_tilde = Eigen::MatrixXd::Zero(d, d);
  out.A_tilde.topLeftCorner(dx, dx) = sys.A;
  out.A_tilde.topRightCorner(dx, du) = sys.B;
  out.B_tilde = Eigen::MatrixXd::Zero(d, du);
  out.B_tilde.bottomRows(du).setIdentity();
  return out;
}

NoisePolicy NoisePolicy::isotropic(Eigen::Index du, double variance) {
  NoisePolicy p;
  p.covariance = variance * Eigen::MatrixXd::Identity(du, du);
  return p;
}

void Trajectory::append(const Trajectory& tail) {
  if (states.empty()) {
    *this = tail;
    return;
  }
  // tail.states[0] duplicates our final state.
  for (std::size_t t = 1; t < tail.states.size(); ++t) states.push_back(tail.states[t]);
  for (const auto& u : tail.inputs) inputs.push_back(u);
}

namespace {

// Symmetric PSD square root factor L with L L^T = cov. Cholesky when PD,
// eigendecomposition fallback for singular covariances.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
  if (cov.norm() == 0.0) return Eigen::MatrixXd::Zero(cov.rows(), cov.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

}  // namespace

Trajectory simulate_with_source(const SystemParams& sys, const NoisePolicy& policy,
                                Eigen::Index horizon, double noise_std, GaussianSource& gen,
                                const Eigen::VectorXd& x0) {
  const Eigen::Index dx = sys.dx(), du = sys.du();
  if (horizon < 1) throw std::invalid_argument("simulate: horizon must be >= 1");
  if (policy.covariance.rows() != du || policy.covariance.cols() != du)
    throw std::invalid_argument("simulate: covariance dimension mismatch");
  if (x0.size() != dx) throw std::invalid_argument("simulate: x0 dimension mismatch");
  if (!policy.mean_signal.empty() && !policy.periodic_extension &&
      static_cast<Eigen::Index>(policy.mean_signal.size()) < horizon)
    throw std::invalid_argument("simulate: mean_signal shorter than horizon");

  const Eigen::MatrixXd L = psd_factor(policy.covariance);
  const bool noisy_input = L.norm() > 0.0;

  Trajectory traj;
  traj.noise_std = noise_std;
  traj.states.reserve(horizon + 1);
  traj.inputs.reserve(horizon);
  traj.states.push_back(x0);

  Eigen::VectorXd x = x0;
  const std::size_t mlen = policy.mean_signal.size();
  for (Eigen::Index t = 0; t < horizon; ++t) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(du);
    if (mlen > 0) {
      const std::size_t idx = policy.periodic_extension ? static_cast<std::size_t>(t) % mlen
                                                        : static_cast<std::size_t>(t);
      if (policy.mean_signal[idx].size() != du)
        throw std::invalid_argument("simulate: mean_signal entry dimension mismatch");
      u = policy.mean_signal[idx];
    }
    if (noisy_input) u += L * gen.normal_vector(du);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(dx);
    if (noise_std > 0.0) w = noise_std * gen.normal_vector(dx);
    x = sys.A * x + sys.B * u + w;
    traj.inputs.push_back(std::move(u));
    traj.states.push_back(x);
  }
  return traj;
}

Trajectory simulate(const SystemParams& sys, const NoisePolicy& policy, Eigen::Index horizon,
                    double noise_std, std::uint64_t seed,
                    const std::optional<Eigen::VectorXd>& x0) {
  GaussianSource gen(seed);
  const Eigen::VectorXd start = x0.value_or(Eigen::VectorXd::Zero(sys.dx()));
  Trajectory traj = simulate_with_source(sys, policy, horizon, noise_std, gen, start);
  traj.seed = seed;
  return traj;
}

double spectral_radius(const Eigen::Ref<const Eigen::MatrixXd>& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("spectral_radius: non-square input");
  if (A.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

double resolvent_norm(const Eigen::MatrixXd& A, double omega) {
  const Eigen::Index d = A.rows();
  Eigen::MatrixXcd M = std::polar(1.0, omega) * Eigen::MatrixXcd::Identity(d, d) - A;
  Eigen::MatrixXcd R = M.partialPivLu().solve(Eigen::MatrixXcd::Identity(d, d));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(R);
  return svd.singularValues()(0);
}

}  // namespace

double hinf_norm(const Eigen::Ref<const Eigen::MatrixXd>& A, int grid_size) {
  if (A.rows() != A.cols()) throw std::invalid_argument("hinf_norm: non-square input");
  if (grid_size < 16) throw std::invalid_argument("hinf_norm: grid_size must be >= 16");
  if (spectral_radius(A) >= 1.0) throw std::invalid_argument("hinf_norm: unstable A");
  const Eigen::MatrixXd Amat = A;

  double best = 0.0;
  int best_i = 0;
  const double step = 2.0 * M_PI / grid_size;
  for (int i = 0; i < grid_size; ++i) {
    const double v = resolvent_norm(Amat, i * step);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  // Golden-section refinement on the bracket around the best grid point.
  double lo = (best_i - 1) * step, hi = (best_i + 1) * step;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - invphi * (hi - lo);
  double d = lo + invphi * (hi - lo);
  double fc = resolvent_norm(Amat, c), fd = resolvent_norm(Amat, d);
  for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invphi * (hi - lo);
      fc = resolvent_norm(Amat, c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invphi * (hi - lo);
      fd = resolvent_norm(Amat, d);
    }
  }
  return std::max(best, std::max(fc, fd));
}

}  // namespace taskexplore
