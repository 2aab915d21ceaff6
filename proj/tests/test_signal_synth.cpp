#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "taskexplore/freq_design.hpp"
#include "taskexplore/instances.hpp"
#include "taskexplore/rng.hpp"
#include "taskexplore/signal_synth.hpp"

using namespace taskexplore;

namespace {

std::vector<Eigen::VectorXcd> random_complex_signal(Eigen::Index k, Eigen::Index d,
                                                    GaussianSource& gen) {
  std::vector<Eigen::VectorXcd> out(static_cast<std::size_t>(k));
  for (auto& v : out) {
    v.resize(d);
    for (Eigen::Index i = 0; i < d; ++i)
      v[i] = std::complex<double>(gen.normal(), gen.normal());
  }
  return out;
}

MatrixSignal synth_random_signal(Eigen::Index k, Eigen::Index du, double gamma_sq,
                                 GaussianSource& gen) {
  std::vector<Eigen::MatrixXcd> raw(static_cast<std::size_t>(k));
  for (auto& U : raw) {
    Eigen::MatrixXcd Z(du, du);
    for (Eigen::Index i = 0; i < du; ++i)
      for (Eigen::Index j = 0; j < du; ++j)
        Z(i, j) = std::complex<double>(gen.normal(), gen.normal());
    U = Z * Z.adjoint();
  }
  MatrixSignal sig = project(raw, gamma_sq, k);
  // Saturate the budget so power accounting is nontrivial.
  const double scale = k * k * gamma_sq / sig.total_trace();
  for (auto& U : sig.entries) U *= scale;
  return sig;
}

}  // namespace

TEST_CASE("dft of a constant concentrates in one bin") {
  const Eigen::Index k = 8;
  std::vector<Eigen::VectorXcd> sig(k, Eigen::VectorXcd::Constant(1, 2.0));
  std::vector<Eigen::VectorXcd> freq = dft(sig);
  // sum_t exp(i 2 pi t s / k) vanishes except at s = k.
  for (Eigen::Index s = 1; s < k; ++s) CHECK(freq[s - 1].norm() < 1e-12);
  CHECK(std::abs(freq[k - 1](0) - std::complex<double>(16.0, 0.0)) < 1e-12);
}

TEST_CASE("idft inverts dft") {
  GaussianSource gen(41);
  auto sig = random_complex_signal(16, 3, gen);
  auto back = idft(dft(sig));
  for (std::size_t t = 0; t < sig.size(); ++t) CHECK((back[t] - sig[t]).norm() < 1e-12);
}

TEST_CASE("Parseval under the unnormalized convention") {
  GaussianSource gen(42);
  auto sig = random_complex_signal(12, 2, gen);
  auto freq = dft(sig);
  double time_energy = 0.0, freq_energy = 0.0;
  for (const auto& u : sig) time_energy += u.squaredNorm();
  for (const auto& v : freq) freq_energy += v.squaredNorm();
  CHECK(freq_energy == doctest::Approx(12.0 * time_energy).epsilon(1e-10));
}

TEST_CASE("is_symmetric detects conjugate pairing") {
  GaussianSource gen(43);
  SUBCASE("dft of a real signal is symmetric") {
    std::vector<Eigen::VectorXcd> sig(10);
    for (auto& v : sig) v = gen.normal_vector(2).cast<std::complex<double>>();
    CHECK(is_symmetric(dft(sig)));
  }
  SUBCASE("single unpaired bin is not symmetric") {
    std::vector<Eigen::VectorXcd> freq(8, Eigen::VectorXcd::Zero(2));
    freq[2] = Eigen::VectorXcd::Constant(2, std::complex<double>(1.0, 1.0));
    CHECK_FALSE(is_symmetric(freq));
  }
  SUBCASE("symmetry iff real idft, over mutated random signals") {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Eigen::VectorXcd> sig(8);
      for (auto& v : sig) v = gen.normal_vector(2).cast<std::complex<double>>();
      auto freq = dft(sig);
      if (trial % 2 == 1) freq[trial % 7](0) += std::complex<double>(0.0, 0.5);
      double max_imag = 0.0;
      for (const auto& u : idft(freq))
        max_imag = std::max(max_imag, u.imag().cwiseAbs().maxCoeff());
      CHECK(is_symmetric(freq) == (max_imag <= 1e-10));
    }
  }
}

TEST_CASE("construct_time_input: k=1 scalar gives a constant of amplitude gamma") {
  MatrixSignal sig;
  sig.k = 1;
  sig.gamma_sq = 4.0;
  sig.entries = {Eigen::MatrixXcd::Constant(1, 1, 4.0)};  // k^2 gamma^2 = 4
  TimeSignal out = construct_time_input(sig, 16, 1);
  REQUIRE(out.length() == 16);  // d_u * T
  for (const auto& u : out.samples) CHECK(std::abs(std::abs(u(0)) - 2.0) < 1e-12);
}

TEST_CASE("construct_time_input power accounting is exact") {
  GaussianSource gen(44);
  const Eigen::Index k = 8, du = 2, T = 64;
  MatrixSignal sig = synth_random_signal(k, du, 1.5, gen);
  TimeSignal out = construct_time_input(sig, T, k);
  CHECK(out.length() == du * T);
  const double m = static_cast<double>(T / k);
  // total power = (m d_u / k) sum_l tr(U_l); at a saturated budget
  // (sum tr = k^2 gamma^2) this meets the bound d_u m k gamma^2 exactly.
  const double expected = m * du / static_cast<double>(k) * sig.total_trace();
  CHECK(out.total_power == doctest::Approx(expected).epsilon(1e-9));
  CHECK(out.total_power <= du * m * k * sig.gamma_sq + 1e-9);
  double direct = 0.0;
  for (const auto& u : out.samples) direct += u.squaredNorm();
  CHECK(direct == doctest::Approx(out.total_power).epsilon(1e-12));
}

TEST_CASE("rank-one sinusoid signal reproduces the sinusoid covariance") {
  const Eigen::Index k = 8;
  // Real sinusoid u_t = cos(2 pi t / k) e1 in 2 channels; its DFT loads bins
  // l = 1 and k-1 with k/2 each.
  std::vector<Eigen::VectorXcd> time(static_cast<std::size_t>(k));
  for (Eigen::Index t = 1; t <= k; ++t) {
    time[t - 1] = Eigen::VectorXcd::Zero(2);
    time[t - 1](0) = std::cos(2.0 * M_PI * t / k);
  }
  auto freq = dft(time);
  MatrixSignal sig;
  sig.k = k;
  sig.gamma_sq = 100.0;
  for (const auto& v : freq) sig.entries.push_back(v * v.adjoint() / 2.0);  // d_u = 2
  validate_signal(sig);
  TimeSignal out = construct_time_input(sig, 4 * k, k);
  // Compare empirical covariances over one period.
  Eigen::MatrixXd cov_ref = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd cov_out = Eigen::MatrixXd::Zero(2, 2);
  for (Eigen::Index t = 0; t < k; ++t)
    cov_ref += time[t].real() * time[t].real().transpose();
  // Only channel 0 carries the sinusoid (the rank-one U has a single
  // eigen-channel), so the sum over the whole output is m tilings of one
  // period of the sinusoid.
  for (Eigen::Index t = 0; t < out.length(); ++t)
    cov_out += out.samples[t] * out.samples[t].transpose();
  cov_out *= static_cast<double>(2 * k) / static_cast<double>(out.length());
  CHECK((cov_out - cov_ref).norm() <= 1e-8 * cov_ref.norm());
}

TEST_CASE("noiseless rollout covariance matches (1/k) gamma_freq") {
  GaussianSource gen(45);
  const Eigen::Index k = 8, du = 3;
  SystemParams sys(random_stable(3, gen, 0.5), random_pd(3, gen));
  MatrixSignal sig = synth_random_signal(k, du, 1.0, gen);
  const LiftedSystem lifted = lift(sys);
  const Eigen::MatrixXd target = gamma_freq(lifted, sig) / static_cast<double>(k);

  auto rollout_gap = [&](Eigen::Index m) {
    TimeSignal ts = construct_time_input(sig, m * k, k);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(du + 3, du + 3);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    for (Eigen::Index t = 0; t < ts.length(); ++t) {
      Eigen::VectorXd z(3 + du);
      z << x, ts.samples[t];
      cov += z * z.transpose();
      x = sys.A * x + sys.B * ts.samples[t];
    }
    cov /= static_cast<double>(ts.length());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cov - target);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_t(target);
    return svd.singularValues()(0) / svd_t.singularValues()(0);
  };
  CHECK(rollout_gap(64) < 0.05);
}

TEST_CASE("construct_time_input rejects non-divisible horizons") {
  MatrixSignal sig = MatrixSignal::isotropic(4, 2, 1.0);
  CHECK_THROWS_AS((void)construct_time_input(sig, 10, 4), std::invalid_argument);
}
