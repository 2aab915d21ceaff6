#include "taskexplore/freq_design.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <complex>
#include <stdexcept>

namespace taskexplore {

double MatrixSignal::total_trace() const {
  double s = 0.0;
  for (const auto& U : entries) s += U.real().trace();
  return s;
}

MatrixSignal MatrixSignal::isotropic(Eigen::Index k, Eigen::Index du, double gamma_sq) {
  MatrixSignal sig;
  sig.k = k;
  sig.gamma_sq = gamma_sq;
  sig.entries.assign(k, (k * gamma_sq / du) * Eigen::MatrixXcd::Identity(du, du));
  return sig;
}

namespace {

// entries[i] holds U_{i+1}; the conjugate partner of U_l is U_{k-l}, the DC
// entry l = k is self-paired, as is l = k/2 for even k.
Eigen::Index partner_index(Eigen::Index idx, Eigen::Index k) {
  const Eigen::Index l = idx + 1;
  return (l == k) ? idx : (k - l) - 1;
}

}  // namespace

void validate_signal(const MatrixSignal& signal, double tol) {
  if (static_cast<Eigen::Index>(signal.entries.size()) != signal.k)
    throw std::invalid_argument("MatrixSignal: entry count != k");
  const Eigen::Index du = signal.du();
  double total = 0.0;
  for (Eigen::Index i = 0; i < signal.k; ++i) {
    const auto& U = signal.entries[i];
    if (U.rows() != du || U.cols() != du)
      throw std::invalid_argument("MatrixSignal: inconsistent entry dimensions");
    if ((U - U.adjoint()).norm() > 1e-10 * std::max(1.0, U.norm()))
      throw std::invalid_argument("MatrixSignal: entry not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(U, Eigen::EigenvaluesOnly);
    const double tr = es.eigenvalues().sum();
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, tr))
      throw std::invalid_argument("MatrixSignal: entry not PSD");
    const auto& partner = signal.entries[partner_index(i, signal.k)];
    if ((U - partner.conjugate()).norm() > 1e-9 * std::max(1.0, U.norm()))
      throw std::invalid_argument("MatrixSignal: conjugate symmetry violated");
    total += tr;
  }
  const double budget = signal.k * signal.k * signal.gamma_sq;
  if (total > budget + tol * std::max(1.0, budget))
    throw std::invalid_argument("MatrixSignal: trace budget exceeded");
}

Eigen::MatrixXd gamma_freq(const Eigen::Ref<const Eigen::MatrixXd>& A,
                           const Eigen::Ref<const Eigen::MatrixXd>& B,
                           const MatrixSignal& signal) {
  if (spectral_radius(A) >= 1.0) throw std::invalid_argument("gamma_freq: unstable A");
  const Eigen::Index d = A.rows(), k = signal.k;
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
  for (Eigen::Index l = 1; l <= k; ++l) {
    const std::complex<double> z = std::polar(1.0, 2.0 * M_PI * l / k);
    Eigen::MatrixXcd R = (z * I - A).partialPivLu().solve(B.cast<std::complex<double>>());
    acc += R * signal.entries[l - 1] * R.adjoint();
  }
  acc /= static_cast<double>(k);
  const double scale = std::max(acc.real().norm(), 1e-300);
  if (acc.imag().norm() > 1e-10 * scale)
    throw std::invalid_argument("gamma_freq: signal violates conjugate symmetry");
  Eigen::MatrixXd out = acc.real();
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd gamma_freq(const LiftedSystem& sys, const MatrixSignal& signal) {
  return gamma_freq(sys.A_tilde, sys.B_tilde, signal);
}

namespace {

// Partial sums by doubling: S(T) = sum_{s<T} A^s Q (A^s)^T and the
// first-moment sum V(T) = sum_{s<T} s A^s Q (A^s)^T, exact for any T.
struct GeometricSums {
  Eigen::MatrixXd S;
  Eigen::MatrixXd V;
};

GeometricSums geometric_sums(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                             Eigen::Index T) {
  const Eigen::Index d = A.rows();
  // Block tables for lengths 2^j.
  Eigen::MatrixXd Sj = Q, Vj = Eigen::MatrixXd::Zero(d, d), Pj = A;
  Eigen::Index len = 1;

  GeometricSums out{Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d)};
  Eigen::MatrixXd Pacc = Eigen::MatrixXd::Identity(d, d);  // A^(consumed length)
  Eigen::Index consumed = 0;

  Eigen::Index rem = T;
  while (rem > 0) {
    if (rem & 1) {
      // Append a block of `len` terms starting at offset `consumed`.
      out.S += Pacc * Sj * Pacc.transpose();
      out.V += Pacc * (Vj + static_cast<double>(consumed) * Sj) * Pacc.transpose();
      Pacc = (Pacc * Pj).eval();
      consumed += len;
    }
    rem >>= 1;
    if (rem > 0) {
      Vj = (Vj + Pj * (Vj + static_cast<double>(len) * Sj) * Pj.transpose()).eval();
      Sj = (Sj + Pj * Sj * Pj.transpose()).eval();
      Pj = (Pj * Pj).eval();
      len <<= 1;
    }
  }
  out.S = 0.5 * (out.S + out.S.transpose()).eval();
  out.V = 0.5 * (out.V + out.V.transpose()).eval();
  return out;
}

}  // namespace

Eigen::MatrixXd gamma_noise(const Eigen::Ref<const Eigen::MatrixXd>& A,
                            const Eigen::Ref<const Eigen::MatrixXd>& B,
                            const Eigen::Ref<const Eigen::MatrixXd>& lambda_u,
                            const Eigen::Ref<const Eigen::MatrixXd>& lambda_w,
                            Eigen::Index t) {
  if (t < 1) throw std::invalid_argument("gamma_noise: t must be >= 1");
  if (spectral_radius(A) >= 1.0) throw std::invalid_argument("gamma_noise: unstable A");
  Eigen::MatrixXd Q = lambda_w + B * lambda_u * B.transpose();
  return geometric_sums(A, Q, t).S;
}

Eigen::MatrixXd gamma_noise(const LiftedSystem& sys,
                            const Eigen::Ref<const Eigen::MatrixXd>& lambda_u, double sigma_w,
                            Eigen::Index t) {
  const Eigen::Index d = sys.A_tilde.rows();
  const Eigen::Index du = sys.B_tilde.cols();
  Eigen::MatrixXd lambda_w = Eigen::MatrixXd::Zero(d, d);
  lambda_w.topLeftCorner(d - du, d - du) =
      sigma_w * sigma_w * Eigen::MatrixXd::Identity(d - du, d - du);
  return gamma_noise(sys.A_tilde, sys.B_tilde, lambda_u, lambda_w, t);
}

Eigen::MatrixXd gamma_noise_average(const Eigen::Ref<const Eigen::MatrixXd>& A,
                                    const Eigen::Ref<const Eigen::MatrixXd>& Q,
                                    Eigen::Index T) {
  if (T < 1) throw std::invalid_argument("gamma_noise_average: T must be >= 1");
  // (1/T) sum_{t=1..T} sum_{s<t} A^s Q A^sT = sum_{s<T} (T-s)/T A^s Q A^sT.
  GeometricSums gs = geometric_sums(A, Q, T);
  return gs.S - gs.V / static_cast<double>(T);
}

GammaSS gamma_ss(const LiftedSystem& sys, const MatrixSignal& signal, double sigma_u,
                 double sigma_w, Eigen::Index T, Eigen::Index k) {
  const Eigen::Index d = sys.A_tilde.rows();
  const Eigen::Index du = sys.B_tilde.cols();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(d, d);
  Q.topLeftCorner(d - du, d - du) =
      sigma_w * sigma_w * Eigen::MatrixXd::Identity(d - du, d - du);
  Q.bottomRightCorner(du, du) = sigma_u * sigma_u * Eigen::MatrixXd::Identity(du, du);

  GammaSS out;
  out.value = gamma_freq(sys, signal) / static_cast<double>(k) +
              gamma_noise_average(sys.A_tilde, Q, T);
  if (sigma_u == 0.0) {
    const double eps = 1e-9 * out.value.trace() / d;
    out.value += eps * Eigen::MatrixXd::Identity(d, d);
    out.regularized = true;
  }
  return out;
}

double design_objective(const TaskHessian& H, const Eigen::Ref<const Eigen::MatrixXd>& gamma) {
  return idealized_risk(H, gamma);
}

FreqDesignContext::FreqDesignContext(const SystemParams& theta, Eigen::Index T, Eigen::Index k_in,
                                     double sigma_u, double sigma_w)
    : k(k_in), dim(theta.dx() + theta.du()) {
  if (spectral_radius(theta.A) >= 1.0)
    throw std::invalid_argument("FreqDesignContext: unstable system");
  const LiftedSystem lifted = lift(theta);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(dim, dim);
  const Eigen::MatrixXcd Bc = lifted.B_tilde.cast<std::complex<double>>();
  resolvents.reserve(k);
  for (Eigen::Index l = 1; l <= k; ++l) {
    const std::complex<double> z = std::polar(1.0, 2.0 * M_PI * l / k);
    resolvents.push_back((z * I - lifted.A_tilde).partialPivLu().solve(Bc));
  }
  const Eigen::Index du = theta.du();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(dim, dim);
  Q.topLeftCorner(dim - du, dim - du) =
      sigma_w * sigma_w * Eigen::MatrixXd::Identity(dim - du, dim - du);
  Q.bottomRightCorner(du, du) = sigma_u * sigma_u * Eigen::MatrixXd::Identity(du, du);
  noise_part = gamma_noise_average(lifted.A_tilde, Q, T);
  regularize = (sigma_u == 0.0);
}

Eigen::MatrixXd FreqDesignContext::gamma(const MatrixSignal& signal) const {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < k; ++i)
    acc += resolvents[i] * signal.entries[i] * resolvents[i].adjoint();
  Eigen::MatrixXd freq = acc.real() / static_cast<double>(k * k);
  Eigen::MatrixXd g = 0.5 * (freq + freq.transpose()) + noise_part;
  if (regularize) g += (1e-9 * g.trace() / dim) * Eigen::MatrixXd::Identity(dim, dim);
  return g;
}

double FreqDesignContext::objective(const TaskHessian& H, const MatrixSignal& signal) const {
  return idealized_risk(H, gamma(signal));
}

std::vector<Eigen::MatrixXcd> FreqDesignContext::gradient(const TaskHessian& H,
                                                          const MatrixSignal& signal) const {
  const Eigen::MatrixXd g = gamma(signal);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  Eigen::MatrixXd ginv = ldlt.solve(Eigen::MatrixXd::Identity(dim, dim));
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < H.dx; ++i) S += ginv * H.block(i) * ginv;
  S = 0.5 * (S + S.transpose()).eval();

  std::vector<Eigen::MatrixXcd> grad;
  grad.reserve(k);
  const double coef = -1.0 / static_cast<double>(k * k);
  for (Eigen::Index i = 0; i < k; ++i)
    grad.push_back(coef * resolvents[i].adjoint() * S * resolvents[i]);
  return grad;
}

MatrixSignal project(const std::vector<Eigen::MatrixXcd>& raw, double gamma_sq,
                     Eigen::Index k) {
  if (static_cast<Eigen::Index>(raw.size()) != k)
    throw std::invalid_argument("project: sequence length != k");
  MatrixSignal sig;
  sig.k = k;
  sig.gamma_sq = gamma_sq;
  sig.entries.resize(k);

  // Hermitian symmetrization, then conjugate-pair averaging.
  std::vector<Eigen::MatrixXcd> herm(k);
  for (Eigen::Index i = 0; i < k; ++i) herm[i] = 0.5 * (raw[i] + raw[i].adjoint());
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index j = partner_index(i, k);
    if (j == i) {
      sig.entries[i] = herm[i].real().cast<std::complex<double>>();
    } else {
      sig.entries[i] = 0.5 * (herm[i] + herm[j].conjugate());
    }
  }

  // Joint spectral projection onto {U_l >= 0, sum_l tr(U_l) <= budget}: in
  // the per-entry eigenbases this reduces to projecting the stacked
  // eigenvalue vector onto the nonnegative orthant intersected with the
  // trace half-space, i.e. a common shift tau then a clip at zero.
  std::vector<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>> eigs;
  eigs.reserve(k);
  std::vector<double> all;
  double clipped_total = 0.0;
  for (const auto& U : sig.entries) {
    eigs.emplace_back(U);
    const Eigen::VectorXd& lam = eigs.back().eigenvalues();
    for (Eigen::Index j = 0; j < lam.size(); ++j) all.push_back(lam[j]);
    clipped_total += lam.cwiseMax(0.0).sum();
  }

  const double budget = k * k * gamma_sq;
  double tau = 0.0;
  if (clipped_total > budget) {
    // sum_j max(lam_j - tau, 0) is piecewise linear, decreasing in tau; find
    // tau by sorting.
    std::sort(all.begin(), all.end(), std::greater<double>());
    double run = 0.0;
    for (std::size_t j = 0; j < all.size(); ++j) {
      run += all[j];
      const double cand = (run - budget) / static_cast<double>(j + 1);
      if (j + 1 == all.size() || all[j + 1] <= cand) {
        tau = cand;
        break;
      }
    }
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::VectorXd lam = (eigs[i].eigenvalues().array() - tau).cwiseMax(0.0);
    sig.entries[i] =
        eigs[i].eigenvectors() * lam.asDiagonal() * eigs[i].eigenvectors().adjoint();
  }
  return sig;
}

MatrixSignal project(const MatrixSignal& signal) {
  return project(signal.entries, signal.gamma_sq, signal.k);
}

DesignResult pgd_minimize(const FreqDesignContext& ctx, const TaskHessian& H,
                          double budget_sq, Eigen::Index t, const PGDConfig& pgd) {
  const Eigen::Index k = ctx.k;
  const Eigen::Index du = ctx.resolvents.front().cols();
  MatrixSignal U = project(MatrixSignal::isotropic(k, du, budget_sq));

  DesignResult res;
  double f = ctx.objective(H, U);
  if (!std::isfinite(f)) throw std::runtime_error("pgd_minimize: non-finite objective");
  res.objective_trace.push_back(f);

  double step = pgd.init_step;
  for (int it = 0; it < pgd.max_iter; ++it) {
    std::vector<Eigen::MatrixXcd> G = ctx.gradient(H, U);
    double gnorm_sq = 0.0;
    for (const auto& g : G) gnorm_sq += g.squaredNorm();
    if (gnorm_sq == 0.0) break;

    step *= 2.0;  // allow recovery after conservative backtracks
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      std::vector<Eigen::MatrixXcd> cand(k);
      for (Eigen::Index i = 0; i < k; ++i) cand[i] = U.entries[i] - step * G[i];
      MatrixSignal V = project(cand, budget_sq, k);
      double decrease_ref = 0.0;  // <G, U - V>
      for (Eigen::Index i = 0; i < k; ++i)
        decrease_ref += (G[i].adjoint() * (U.entries[i] - V.entries[i])).trace().real();
      const double fv = ctx.objective(H, V);
      if (std::isfinite(fv) && fv <= f - pgd.armijo * decrease_ref && fv <= f) {
        const double rel_impr = (f - fv) / std::max(std::abs(f), 1e-300);
        U = std::move(V);
        f = fv;
        res.objective_trace.push_back(f);
        accepted = true;
        if (rel_impr < pgd.rel_tol) it = pgd.max_iter;  // converged
        break;
      }
      step *= pgd.backtrack;
    }
    if (!accepted) break;  // no feasible decrease direction
  }

  res.signal = std::move(U);
  res.final_objective = f;
  res.predicted_phi = f / static_cast<double>(t);
  return res;
}

DesignResult steady_state_design(const SystemParams& theta_hat, const TaskHessian& H,
                                 Eigen::Index t, Eigen::Index k, double gamma_sq,
                                 double sigma_w, const PGDConfig& pgd) {
  const double sigma_u = std::sqrt(gamma_sq / (2.0 * theta_hat.du()));
  FreqDesignContext ctx(theta_hat, t, k, sigma_u, sigma_w);
  return pgd_minimize(ctx, H, gamma_sq / 2.0, t, pgd);
}

}  // namespace taskexplore
