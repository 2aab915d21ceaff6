#include "taskexplore/signal_synth.hpp"

#include <Eigen/Eigenvalues>
#include <complex>
#include <stdexcept>

namespace taskexplore {

std::vector<Eigen::VectorXcd> dft(const std::vector<Eigen::VectorXcd>& signal) {
  const Eigen::Index k = static_cast<Eigen::Index>(signal.size());
  if (k < 1) throw std::invalid_argument("dft: empty signal");
  std::vector<Eigen::VectorXcd> out(k);
  for (Eigen::Index s = 1; s <= k; ++s) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(signal[0].size());
    for (Eigen::Index t = 1; t <= k; ++t)
      acc += signal[t - 1] * std::polar(1.0, -2.0 * M_PI * t * s / k);
    out[s - 1] = acc;
  }
  return out;
}

std::vector<Eigen::VectorXcd> idft(const std::vector<Eigen::VectorXcd>& freq) {
  const Eigen::Index k = static_cast<Eigen::Index>(freq.size());
  if (k < 1) throw std::invalid_argument("idft: empty signal");
  std::vector<Eigen::VectorXcd> out(k);
  for (Eigen::Index t = 1; t <= k; ++t) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(freq[0].size());
    for (Eigen::Index s = 1; s <= k; ++s)
      acc += freq[s - 1] * std::polar(1.0, 2.0 * M_PI * t * s / k);
    out[t - 1] = acc / static_cast<double>(k);
  }
  return out;
}

bool is_symmetric(const std::vector<Eigen::VectorXcd>& freq_signal, double tol) {
  const Eigen::Index k = static_cast<Eigen::Index>(freq_signal.size());
  if (k < 1) return false;
  double scale = 0.0;
  for (const auto& v : freq_signal) scale = std::max(scale, v.norm());
  const double thresh = tol * std::max(1.0, scale);
  if (freq_signal[k - 1].imag().norm() > thresh) return false;  // u_check_k real
  for (Eigen::Index s = 1; s < k; ++s) {
    if ((freq_signal[s - 1] - freq_signal[k - s - 1].conjugate()).norm() > thresh)
      return false;
  }
  return true;
}

TimeSignal construct_time_input(const MatrixSignal& signal, Eigen::Index T, Eigen::Index k) {
  if (T % k != 0) throw std::invalid_argument("construct_time_input: T not divisible by k");
  validate_signal(signal);
  const Eigen::Index du = signal.du();
  const Eigen::Index m = T / k;

  // Eigendecompose each U_l, eigenvalues descending, small ones zeroed.
  // Conjugate pairing of the frequency vectors is enforced explicitly: the
  // mirror entry reuses the conjugated eigenvectors so eigenvector phases
  // cannot break realness of the inverse DFT.
  std::vector<Eigen::VectorXd> lambdas(k);
  std::vector<Eigen::MatrixXcd> vectors(k);
  auto decompose = [&](Eigen::Index idx) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(signal.entries[idx]);
    Eigen::VectorXd lam = es.eigenvalues().reverse();  // descending
    Eigen::MatrixXcd vec(du, du);
    for (Eigen::Index j = 0; j < du; ++j) vec.col(j) = es.eigenvectors().col(du - 1 - j);
    const double floor = 1e-12 * std::max(lam.sum(), 0.0);
    for (Eigen::Index j = 0; j < du; ++j)
      if (lam[j] < floor) lam[j] = 0.0;
    lambdas[idx] = std::move(lam);
    vectors[idx] = std::move(vec);
  };
  for (Eigen::Index l = 1; l <= k; ++l) {
    const Eigen::Index idx = l - 1;
    const Eigen::Index mirror = (l == k) ? idx : (k - l) - 1;
    if (idx < mirror) {
      decompose(idx);
      lambdas[mirror] = lambdas[idx];
      vectors[mirror] = vectors[idx].conjugate();
    } else if (idx == mirror) {
      // Self-paired frequency: U_l is real symmetric, use real eigenvectors
      // so the frequency coefficients stay real.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(signal.entries[idx].real());
      Eigen::VectorXd lam = es.eigenvalues().reverse();
      Eigen::MatrixXcd vec(du, du);
      for (Eigen::Index j = 0; j < du; ++j)
        vec.col(j) = es.eigenvectors().col(du - 1 - j).cast<std::complex<double>>();
      const double floor = 1e-12 * std::max(lam.sum(), 0.0);
      for (Eigen::Index j = 0; j < du; ++j)
        if (lam[j] < floor) lam[j] = 0.0;
      lambdas[idx] = std::move(lam);
      vectors[idx] = std::move(vec);
    }
  }

  TimeSignal out;
  out.period = k;
  out.repetitions = m;
  out.samples.reserve(du * T);
  std::vector<Eigen::VectorXcd> freq(k);
  for (Eigen::Index j = 0; j < du; ++j) {
    for (Eigen::Index idx = 0; idx < k; ++idx)
      freq[idx] = std::sqrt(du * lambdas[idx][j]) * vectors[idx].col(j);
    std::vector<Eigen::VectorXcd> period_signal = idft(freq);
    for (const auto& u : period_signal) {
      if (u.imag().norm() > 1e-12 * std::max(1.0, u.norm()))
        throw std::runtime_error("construct_time_input: non-real time-domain sample");
    }
    for (Eigen::Index rep = 0; rep < m; ++rep)
      for (const auto& u : period_signal) out.samples.push_back(u.real());
  }

  for (const auto& u : out.samples) out.total_power += u.squaredNorm();
  return out;
}

}  // namespace taskexplore
