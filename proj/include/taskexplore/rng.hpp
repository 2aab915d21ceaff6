#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>

namespace taskexplore {

// Seeded Gaussian source. The engine is std::mt19937_64 (fully specified by
// the standard, so streams are identical across platforms) and normals are
// produced by the Box-Muller transform rather than std::normal_distribution,
// whose output is implementation-defined.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  // One standard normal draw. Each Box-Muller invocation consumes two
  // uniforms and yields two normals; the spare is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0,1], avoids log(0).
    const double u1 =
        (static_cast<double>(engine_()) + 1.0) / (static_cast<double>(engine_.max()) + 2.0);
    const double u2 =
        static_cast<double>(engine_()) / (static_cast<double>(engine_.max()) + 1.0);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * M_PI * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace taskexplore
