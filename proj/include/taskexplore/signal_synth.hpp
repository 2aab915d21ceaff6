#pragma once

#include <Eigen/Core>
#include <vector>

#include "taskexplore/freq_design.hpp"

namespace taskexplore {

/// Forward DFT, unnormalized with positive exponent:
/// out[s] = sum_{t=1..k} in[t] exp(-i 2 pi t s / k), s = 1..k.
/// Indexing is zero-based in storage: out[s-1] and in[t-1].
std::vector<Eigen::VectorXcd> dft(const std::vector<Eigen::VectorXcd>& signal);
std::vector<Eigen::VectorXcd> idft(const std::vector<Eigen::VectorXcd>& freq);

/// True iff u_check_s = conj(u_check_{k-s}) for s < k and u_check_k is real,
/// equivalently iff the inverse DFT is real.
bool is_symmetric(const std::vector<Eigen::VectorXcd>& freq_signal, double tol = 1e-10);

struct TimeSignal {
  std::vector<Eigen::VectorXd> samples;
  Eigen::Index period = 0;       // k
  Eigen::Index repetitions = 0;  // tilings per channel
  double total_power = 0.0;      // sum_t u_t' u_t

  Eigen::Index length() const { return static_cast<Eigen::Index>(samples.size()); }
};

/// Per-channel eigendecomposition + inverse DFT realization of a matrix
/// signal: channel j plays sqrt(d_u lambda_{l,j}) v_{l,j} for T steps (T/k
/// tilings), channels are concatenated into a length d_u*T real signal.
/// Eigenvalues are sorted descending per frequency.
TimeSignal construct_time_input(const MatrixSignal& signal, Eigen::Index T, Eigen::Index k);

}  // namespace taskexplore
