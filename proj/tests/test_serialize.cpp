#include <doctest.h>

#include <sstream>

#include "taskexplore/instances.hpp"
#include "taskexplore/serialize.hpp"

using namespace taskexplore;

TEST_CASE("system JSON round trip") {
  Instance inst = make_jordan(0.8, 3, 2, 7);
  SystemParams back = system_from_json(system_to_json(inst.system));
  CHECK((back.A - inst.system.A).norm() == 0.0);
  CHECK((back.B - inst.system.B).norm() == 0.0);
}

TEST_CASE("signal JSON round trip preserves complex entries") {
  MatrixSignal sig = MatrixSignal::isotropic(4, 2, 1.5);
  sig.entries[0](0, 1) = std::complex<double>(0.25, -0.125);
  sig.entries[0](1, 0) = std::complex<double>(0.25, 0.125);
  sig.entries[2] = sig.entries[0].conjugate();
  MatrixSignal back = signal_from_json(signal_to_json(sig));
  CHECK(back.k == sig.k);
  CHECK(back.gamma_sq == sig.gamma_sq);
  for (std::size_t i = 0; i < sig.entries.size(); ++i)
    CHECK((back.entries[i] - sig.entries[i]).norm() == 0.0);
}

TEST_CASE("trajectory CSV has the documented header and row count") {
  Instance inst = make_lqrex1(0.9, 2);
  Trajectory traj = simulate(inst.system, NoisePolicy::isotropic(2, 1.0), 5, 0.1, 1);
  std::ostringstream os;
  trajectory_to_csv(traj, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,x_1,x_2,u_1,u_2");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("config hash is stable and input-sensitive") {
  const std::string h1 = config_hash("instance=lqrex1;T=100;");
  CHECK(h1 == config_hash("instance=lqrex1;T=100;"));
  CHECK(h1 != config_hash("instance=lqrex1;T=101;"));
  CHECK(h1.size() == 16);
}
