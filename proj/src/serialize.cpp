#include "taskexplore/serialize.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace taskexplore {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  if (nr == 0) return Eigen::MatrixXd(0, 0);
  const Eigen::Index nc = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd M(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != nc)
      throw std::invalid_argument("matrix_from_json: ragged rows");
    for (Eigen::Index j = 0; j < nc; ++j) M(i, j) = rows[i][j].get<double>();
  }
  return M;
}

}  // namespace

std::string system_to_json(const SystemParams& sys) {
  json doc;
  doc["A"] = matrix_to_json(sys.A);
  doc["B"] = matrix_to_json(sys.B);
  return doc.dump(2);
}

SystemParams system_from_json(const std::string& text) {
  json doc = json::parse(text);
  return SystemParams(matrix_from_json(doc.at("A")), matrix_from_json(doc.at("B")));
}

SystemParams system_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open system file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return system_from_json(ss.str());
}

std::string signal_to_json(const MatrixSignal& signal) {
  json doc;
  doc["k"] = signal.k;
  doc["gamma_sq"] = signal.gamma_sq;
  json entries = json::array();
  for (const auto& U : signal.entries) {
    json mat = json::array();
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < U.cols(); ++j)
        row.push_back(json::array({U(i, j).real(), U(i, j).imag()}));
      mat.push_back(std::move(row));
    }
    entries.push_back(std::move(mat));
  }
  doc["entries"] = std::move(entries);
  return doc.dump(2);
}

MatrixSignal signal_from_json(const std::string& text) {
  json doc = json::parse(text);
  MatrixSignal sig;
  sig.k = doc.at("k").get<Eigen::Index>();
  sig.gamma_sq = doc.at("gamma_sq").get<double>();
  for (const auto& mat : doc.at("entries")) {
    const Eigen::Index n = static_cast<Eigen::Index>(mat.size());
    Eigen::MatrixXcd U(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        U(i, j) = std::complex<double>(mat[i][j][0].get<double>(), mat[i][j][1].get<double>());
    sig.entries.push_back(std::move(U));
  }
  return sig;
}

std::string hessian_to_json(const TaskHessian& H) {
  json doc;
  doc["dx"] = H.dx;
  doc["du"] = H.du;
  doc["H"] = matrix_to_json(H.H);
  return doc.dump(2);
}

std::string epoch_record_to_json(const EpochRecord& rec) {
  json doc;
  doc["epoch"] = rec.epoch;
  doc["epoch_T"] = rec.epoch_T;
  doc["cumulative_T"] = rec.cumulative_T;
  doc["k"] = rec.k;
  doc["excess_risk"] = std::isfinite(rec.excess_risk) ? json(rec.excess_risk) : json("inf");
  doc["fallback"] = rec.fallback;
  doc["det_power"] = rec.det_power;
  doc["noise_cov_trace"] = rec.noise_cov_trace;
  doc["budget_used"] = rec.budget_used;
  doc["theta_hat"] = {{"A", matrix_to_json(rec.theta_hat.A)},
                      {"B", matrix_to_json(rec.theta_hat.B)}};
  if (rec.design) {
    doc["design_objective"] = rec.design->final_objective;
    doc["design_iterations"] = rec.design->objective_trace.size();
    doc["predicted_phi"] = rec.design->predicted_phi;
  }
  return doc.dump();
}

void trajectory_to_csv(const Trajectory& traj, std::ostream& os) {
  const Eigen::Index dx = traj.states.empty() ? 0 : traj.states[0].size();
  const Eigen::Index du = traj.inputs.empty() ? 0 : traj.inputs[0].size();
  os << "t";
  for (Eigen::Index i = 1; i <= dx; ++i) os << ",x_" << i;
  for (Eigen::Index i = 1; i <= du; ++i) os << ",u_" << i;
  os << "\n";
  os << std::setprecision(17);
  for (Eigen::Index t = 0; t < traj.horizon(); ++t) {
    os << t;
    for (Eigen::Index i = 0; i < dx; ++i) os << "," << traj.states[t][i];
    for (Eigen::Index i = 0; i < du; ++i) os << "," << traj.inputs[t][i];
    os << "\n";
  }
}

void time_signal_to_csv(const TimeSignal& signal, std::ostream& os) {
  const Eigen::Index du = signal.samples.empty() ? 0 : signal.samples[0].size();
  os << "t";
  for (Eigen::Index i = 1; i <= du; ++i) os << ",u_" << i;
  os << "\n";
  os << std::setprecision(17);
  for (Eigen::Index t = 0; t < signal.length(); ++t) {
    os << t;
    for (Eigen::Index i = 0; i < du; ++i) os << "," << signal.samples[t][i];
    os << "\n";
  }
}

std::string config_hash(const std::string& canonical_config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical_config) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace taskexplore
