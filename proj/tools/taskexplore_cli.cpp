// Command-line harness: experiment orchestration around the taskexplore
// library.  Subcommands: design, simulate, tople, baseline, sweep, hessian,
// phi.  All tabular output is CSV with a fixed schema; single objects are
// dumped as JSON.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <Eigen/Eigenvalues>

#include "taskexplore/baselines.hpp"
#include "taskexplore/freq_design.hpp"
#include "taskexplore/instances.hpp"
#include "taskexplore/lqr.hpp"
#include "taskexplore/serialize.hpp"
#include "taskexplore/signal_synth.hpp"
#include "taskexplore/sysid.hpp"
#include "taskexplore/tople.hpp"

namespace te = taskexplore;

namespace {

struct InstanceOpts {
  std::string name = "lqrex1";
  double rho = 0.9;
  Eigen::Index dx = 3;
  Eigen::Index du = 0;  // 0 => dx (jordan only; the lqrex families force du = dx)
  std::uint64_t instance_seed = 0;
  std::string system_file;

  void attach(CLI::App* cmd) {
    cmd->add_option("--instance", name, "lqrex1 | lqrex2 | jordan | custom")
        ->check(CLI::IsMember({"lqrex1", "lqrex2", "jordan", "custom"}));
    cmd->add_option("--rho", rho, "stable mode magnitude, in (0,1)");
    cmd->add_option("--dx", dx, "state dimension");
    cmd->add_option("--du", du, "input dimension (jordan only; defaults to dx)");
    cmd->add_option("--instance-seed", instance_seed, "seed for randomized instances");
    cmd->add_option("--system-file", system_file, "JSON {A,B} for --instance custom");
  }
};

te::Instance build_instance(const InstanceOpts& opts) {
  if (opts.name == "lqrex1") return te::make_lqrex1(opts.rho, opts.dx);
  if (opts.name == "lqrex2") return te::make_lqrex2(opts.rho, opts.dx);
  if (opts.name == "jordan") {
    const Eigen::Index du = opts.du > 0 ? opts.du : opts.dx;
    return te::make_jordan(opts.rho, opts.dx, du, opts.instance_seed);
  }
  if (opts.name == "custom") {
    if (opts.system_file.empty())
      throw std::invalid_argument("--instance custom requires --system-file");
    te::SystemParams sys = te::system_from_json_file(opts.system_file);
    te::CostParams costs{Eigen::MatrixXd::Identity(sys.dx(), sys.dx()),
                         Eigen::MatrixXd::Identity(sys.du(), sys.du())};
    return te::Instance{"custom", std::move(sys), std::move(costs)};
  }
  throw std::invalid_argument("unknown instance: " + opts.name);
}

int thread_budget() {
  if (const char* env = std::getenv("TASKEXPLORE_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 4;
}

/// Runs fn(i) for i in [0, n) on up to thread_budget() workers.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  const int workers = std::min(thread_budget(), std::max(n, 1));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct Summary {
  int count = 0;
  double median = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

Summary aggregate(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate: empty results");
  Summary s;
  s.count = static_cast<int>(values.size());
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  s.median = (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  if (n > 1 && std::isfinite(s.mean)) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  }
  return s;
}

void write_csv_header(std::ostream& os) {
  os << "instance,strategy,param_name,param_value,seed_count,median_risk,mean_risk,"
        "stderr,phi_predicted,config_hash\n";
}

void write_csv_row(std::ostream& os, const std::string& instance, const std::string& strategy,
                   const std::string& param_name, const std::string& param_value,
                   const Summary& s, double phi_predicted, const std::string& hash) {
  os << instance << ',' << strategy << ',' << param_name << ',' << param_value << ','
     << s.count << ',' << s.median << ',' << s.mean << ',' << s.stderr_ << ','
     << phi_predicted << ',' << hash << '\n';
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  return file;
}

/// Largest horizon <= T playable by a period-k, d_u-channel synthesized input.
Eigen::Index playable_horizon(Eigen::Index T, Eigen::Index k, Eigen::Index du) {
  const Eigen::Index block = du * k;
  const Eigen::Index T_eff = (T / block) * block;
  if (T_eff <= 0) throw std::invalid_argument("horizon too short for the requested period");
  return T_eff;
}

double controller_risk(const te::SystemParams& theta_hat, const te::Instance& inst) {
  try {
    const te::RiccatiSolution sol = te::solve_dare(theta_hat, inst.costs);
    return te::excess_risk(sol.K, inst.system, inst.costs);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
}

/// One simulated identification run under a fixed exploration strategy:
/// excess risk of the certainty-equivalence controller after T steps.
double run_strategy_seed(const te::Instance& inst, const std::string& strategy,
                         const std::optional<te::MatrixSignal>& freq_design,
                         const std::optional<Eigen::MatrixXd>& noise_design, Eigen::Index T,
                         Eigen::Index k, double gamma_sq, double sigma_w,
                         std::uint64_t seed) {
  const Eigen::Index du = inst.system.du();
  if (strategy == "tople" || strategy == "tople_oracle") {
    te::TopleConfig cfg;
    cfg.gamma_sq = gamma_sq;
    cfg.sigma_w = sigma_w;
    cfg.seed = seed;
    cfg.use_truth = (strategy == "tople_oracle");
    cfg.num_epochs = te::TopleConfig::epochs_for_horizon(T, cfg.c_init, du);
    const auto records = te::run_tople(inst.system, inst.costs, cfg);
    return records.back().excess_risk;
  }
  te::Trajectory traj;
  if (strategy == "op") {
    const Eigen::Index T_eff = playable_horizon(T, k, du);
    traj = te::run_oracle_policy(inst.system, *freq_design, T_eff, sigma_w, seed);
  } else if (strategy == "fro" || strategy == "task") {
    // These designs assume the half-budget split: play the deterministic part
    // plus exploration noise N(0, (gamma^2 / 2 d_u) I).
    const Eigen::Index T_eff = playable_horizon(T, k, du);
    te::TimeSignal ts = te::construct_time_input(*freq_design, T_eff / du, k);
    te::NoisePolicy policy;
    policy.covariance = (gamma_sq / (2.0 * static_cast<double>(du))) *
                        Eigen::MatrixXd::Identity(du, du);
    policy.mean_signal = ts.samples;
    policy.periodic_extension = true;
    traj = te::simulate(inst.system, policy, T_eff, sigma_w, seed);
  } else if (strategy == "noise") {
    traj = te::run_oracle_policy(inst.system, *noise_design, T, sigma_w, seed);
  } else if (strategy == "iso") {
    const Eigen::MatrixXd iso =
        (gamma_sq / static_cast<double>(du)) * Eigen::MatrixXd::Identity(du, du);
    traj = te::run_oracle_policy(inst.system, iso, T, sigma_w, seed);
  } else {
    throw std::invalid_argument("unknown strategy: " + strategy);
  }
  try {
    return controller_risk(te::least_squares(traj), inst);
  } catch (const te::RankDeficientCovariance&) {
    return std::numeric_limits<double>::infinity();
  }
}

struct StrategyDesigns {
  std::optional<te::MatrixSignal> freq;
  std::optional<Eigen::MatrixXd> noise;
  double phi_predicted = 0.0;
};

/// Precomputes the (deterministic, seed-independent) design a strategy plays,
/// plus its idealized-risk prediction under H(truth).
StrategyDesigns prepare_strategy(const te::Instance& inst, const std::string& strategy,
                                 const te::TaskHessian& H, Eigen::Index T, Eigen::Index k,
                                 double gamma_sq, double sigma_w) {
  StrategyDesigns out;
  const Eigen::Index du = inst.system.du();
  const te::LiftedSystem lifted = te::lift(inst.system);
  const double sigma_u_sq = gamma_sq / (2.0 * static_cast<double>(du));
  auto phi_of_signal = [&](const te::MatrixSignal& sig, double sigma_u) {
    const te::GammaSS gss = te::gamma_ss(lifted, sig, sigma_u, sigma_w, T, k);
    return te::design_objective(H, gss.value) / static_cast<double>(T);
  };
  if (strategy == "task" || strategy == "tople" || strategy == "tople_oracle") {
    te::DesignResult res = te::steady_state_design(inst.system, H, T, k, gamma_sq, sigma_w);
    out.phi_predicted = res.final_objective / static_cast<double>(T);
    if (strategy == "task") out.freq = std::move(res.signal);
  } else if (strategy == "op") {
    // Full-budget deterministic design, played without exploration noise.
    te::DesignResult res = te::design_operator_norm(inst.system, gamma_sq, T, k, sigma_w);
    out.phi_predicted = phi_of_signal(res.signal, 0.0);
    out.freq = std::move(res.signal);
  } else if (strategy == "fro") {
    te::DesignResult res = te::design_frobenius(inst.system, gamma_sq, T, k, sigma_w);
    out.phi_predicted = phi_of_signal(res.signal, std::sqrt(sigma_u_sq));
    out.freq = std::move(res.signal);
  } else if (strategy == "noise") {
    te::NoiseDesignResult res = te::design_noise(inst.system, H, gamma_sq, T, sigma_w);
    const Eigen::Index d = inst.system.dx() + du;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(d, d);
    Q.topLeftCorner(inst.system.dx(), inst.system.dx()) =
        sigma_w * sigma_w * Eigen::MatrixXd::Identity(inst.system.dx(), inst.system.dx());
    Q += lifted.B_tilde * res.lambda * lifted.B_tilde.transpose();
    const Eigen::MatrixXd gamma_bar = te::gamma_noise_average(lifted.A_tilde, Q, T);
    out.phi_predicted = te::design_objective(H, gamma_bar) / static_cast<double>(T);
    out.noise = res.lambda;
  } else if (strategy == "iso") {
    const Eigen::MatrixXd iso =
        (gamma_sq / static_cast<double>(du)) * Eigen::MatrixXd::Identity(du, du);
    const Eigen::Index d = inst.system.dx() + du;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(d, d);
    Q.topLeftCorner(inst.system.dx(), inst.system.dx()) =
        sigma_w * sigma_w * Eigen::MatrixXd::Identity(inst.system.dx(), inst.system.dx());
    Q += lifted.B_tilde * iso * lifted.B_tilde.transpose();
    const Eigen::MatrixXd gamma_bar = te::gamma_noise_average(lifted.A_tilde, Q, T);
    out.phi_predicted = te::design_objective(H, gamma_bar) / static_cast<double>(T);
    out.noise = iso;
  } else {
    throw std::invalid_argument("unknown strategy: " + strategy);
  }
  return out;
}

/// Idealized risk per strategy under a single shared convention (full budget,
/// sigma_u = 0) so the designs optimize over the same feasible set and the
/// Phi values are directly comparable.
double phi_common(const te::Instance& inst, const std::string& strategy,
                  const te::TaskHessian& H, Eigen::Index T, Eigen::Index k,
                  double gamma_sq, double sigma_w) {
  const Eigen::Index du = inst.system.du();
  const te::LiftedSystem lifted = te::lift(inst.system);
  auto phi_of_signal = [&](const te::MatrixSignal& sig) {
    const te::GammaSS gss = te::gamma_ss(lifted, sig, 0.0, sigma_w, T, k);
    return te::design_objective(H, gss.value) / static_cast<double>(T);
  };
  if (strategy == "task" || strategy == "tople" || strategy == "tople_oracle") {
    te::FreqDesignContext ctx(inst.system, T, k, 0.0, sigma_w);
    te::DesignResult res = te::pgd_minimize(ctx, H, gamma_sq, T, te::PGDConfig{});
    return res.final_objective / static_cast<double>(T);
  }
  if (strategy == "fro") {
    te::FreqDesignContext ctx(inst.system, T, k, 0.0, sigma_w);
    te::DesignResult res = te::pgd_minimize(
        ctx, te::TaskHessian::identity(inst.system.dx(), du), gamma_sq, T, te::PGDConfig{});
    return phi_of_signal(res.signal);
  }
  if (strategy == "op") {
    te::DesignResult res = te::design_operator_norm(inst.system, gamma_sq, T, k, sigma_w);
    return phi_of_signal(res.signal);
  }
  const Eigen::Index d = inst.system.dx() + du;
  Eigen::MatrixXd lam;
  if (strategy == "noise") {
    lam = te::design_noise(inst.system, H, gamma_sq, T, sigma_w).lambda;
  } else if (strategy == "iso") {
    lam = (gamma_sq / static_cast<double>(du)) * Eigen::MatrixXd::Identity(du, du);
  } else {
    throw std::invalid_argument("unknown strategy: " + strategy);
  }
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(d, d);
  Q.topLeftCorner(inst.system.dx(), inst.system.dx()) =
      sigma_w * sigma_w * Eigen::MatrixXd::Identity(inst.system.dx(), inst.system.dx());
  Q += lifted.B_tilde * lam * lifted.B_tilde.transpose();
  const Eigen::MatrixXd gamma_bar = te::gamma_noise_average(lifted.A_tilde, Q, T);
  return te::design_objective(H, gamma_bar) / static_cast<double>(T);
}

std::string canonical_config(const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ostringstream os;
  for (const auto& [key, val] : kv) os << key << '=' << val << ';';
  return os.str();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"task-optimal experiment design for linear system identification"};
  app.require_subcommand(1);

  // ---- design ----
  auto* design_cmd = app.add_subcommand("design", "run one steady-state design, dump the signal");
  InstanceOpts design_inst;
  design_inst.attach(design_cmd);
  Eigen::Index design_T = 4096, design_k = 32;
  double design_gamma_sq = 1.0, design_sigma_w = 0.1;
  std::string design_out, design_hessian = "fd";
  design_cmd->add_option("--T", design_T, "design horizon");
  design_cmd->add_option("--k", design_k, "signal period");
  design_cmd->add_option("--gamma-sq", design_gamma_sq, "average power budget");
  design_cmd->add_option("--sigma-w", design_sigma_w, "process noise std");
  design_cmd->add_option("--hessian", design_hessian, "fd | closed-form")
      ->check(CLI::IsMember({"fd", "closed-form"}));
  design_cmd->add_option("-o,--out", design_out, "output file (default stdout)");

  // ---- simulate ----
  auto* sim_cmd = app.add_subcommand("simulate", "roll out the system under isotropic inputs");
  InstanceOpts sim_inst;
  sim_inst.attach(sim_cmd);
  Eigen::Index sim_T = 1024;
  double sim_gamma_sq = 1.0, sim_sigma_w = 0.1;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  sim_cmd->add_option("--T", sim_T, "horizon");
  sim_cmd->add_option("--gamma-sq", sim_gamma_sq, "input power budget (isotropic)");
  sim_cmd->add_option("--sigma-w", sim_sigma_w, "process noise std");
  sim_cmd->add_option("--seed", sim_seed, "RNG seed");
  sim_cmd->add_option("-o,--out", sim_out, "output file (default stdout)");

  // ---- tople ----
  auto* tople_cmd = app.add_subcommand("tople", "run the adaptive algorithm, one JSON line per epoch");
  InstanceOpts tople_inst;
  tople_inst.attach(tople_cmd);
  int tople_epochs = 6, tople_c_init = 8;
  double tople_gamma_sq = 1.0, tople_sigma_w = 0.1;
  std::uint64_t tople_seed = 0;
  bool tople_oracle = false;
  std::string tople_out;
  tople_cmd->add_option("--epochs", tople_epochs, "number of epochs");
  tople_cmd->add_option("--c-init", tople_c_init, "initial epoch scale");
  tople_cmd->add_option("--gamma-sq", tople_gamma_sq, "average power budget");
  tople_cmd->add_option("--sigma-w", tople_sigma_w, "process noise std");
  tople_cmd->add_option("--seed", tople_seed, "RNG seed");
  tople_cmd->add_flag("--oracle", tople_oracle, "design on the true system every epoch");
  tople_cmd->add_option("-o,--out", tople_out, "output file (default stdout)");

  // ---- baseline ----
  auto* base_cmd = app.add_subcommand("baseline", "run a fixed-design baseline over seeds");
  InstanceOpts base_inst;
  base_inst.attach(base_cmd);
  std::string base_strategy = "iso";
  Eigen::Index base_T = 4096, base_k = 32;
  double base_gamma_sq = 1.0, base_sigma_w = 0.1;
  int base_seeds = 10;
  std::string base_out;
  base_cmd->add_option("--strategy", base_strategy, "task | op | fro | noise | iso")
      ->check(CLI::IsMember({"task", "op", "fro", "noise", "iso"}));
  base_cmd->add_option("--T", base_T, "horizon");
  base_cmd->add_option("--k", base_k, "signal period");
  base_cmd->add_option("--gamma-sq", base_gamma_sq, "average power budget");
  base_cmd->add_option("--sigma-w", base_sigma_w, "process noise std");
  base_cmd->add_option("--seeds", base_seeds, "number of seeds");
  base_cmd->add_option("-o,--out", base_out, "output file (default stdout)");

  // ---- sweep ----
  auto* sweep_cmd = app.add_subcommand("sweep", "multi-seed grid over rho, dx, or T");
  InstanceOpts sweep_inst;
  sweep_inst.attach(sweep_cmd);
  std::string sweep_rho, sweep_dx, sweep_T_list;
  Eigen::Index sweep_T = 20000, sweep_k = 32;
  double sweep_gamma_sq = 1.0, sweep_sigma_w = 0.1;
  int sweep_seeds = 50;
  std::string sweep_strategies = "tople,tople_oracle,op,fro,noise,iso";
  std::string sweep_out;
  sweep_cmd->add_option("--rho", sweep_rho, "comma list of rho values to sweep");
  sweep_cmd->add_option("--dx-list", sweep_dx, "comma list of dx values to sweep");
  sweep_cmd->add_option("--T-list", sweep_T_list, "comma list of horizons to sweep");
  sweep_cmd->add_option("--T", sweep_T, "horizon (fixed unless --T-list)");
  sweep_cmd->add_option("--k", sweep_k, "signal period for fixed-design baselines");
  sweep_cmd->add_option("--gamma-sq", sweep_gamma_sq, "average power budget");
  sweep_cmd->add_option("--sigma-w", sweep_sigma_w, "process noise std");
  sweep_cmd->add_option("--seeds", sweep_seeds, "seeds per point");
  sweep_cmd->add_option("--strategies", sweep_strategies, "comma list of strategies");
  sweep_cmd->add_option("-o,--out", sweep_out, "output file (default stdout)");

  // ---- hessian ----
  auto* hess_cmd = app.add_subcommand("hessian", "dump the task Hessian as JSON");
  InstanceOpts hess_inst;
  hess_inst.attach(hess_cmd);
  std::string hess_method = "fd", hess_out;
  hess_cmd->add_option("--method", hess_method, "fd | closed-form")
      ->check(CLI::IsMember({"fd", "closed-form"}));
  hess_cmd->add_option("-o,--out", hess_out, "output file (default stdout)");

  // ---- phi ----
  auto* phi_cmd = app.add_subcommand("phi", "deterministic idealized-risk table, no simulation");
  InstanceOpts phi_inst;
  phi_inst.attach(phi_cmd);
  std::string phi_dx_list, phi_rho_list;
  Eigen::Index phi_T = 20000, phi_k = 32;
  double phi_gamma_sq = 1.0, phi_sigma_w = 0.1;
  std::string phi_strategies = "task,op,fro,noise,iso";
  std::string phi_out;
  phi_cmd->add_option("--dx", phi_dx_list, "comma list of state dimensions");
  phi_cmd->add_option("--rho-list", phi_rho_list, "comma list of rho values");
  phi_cmd->add_option("--T", phi_T, "horizon entering the covariance prediction");
  phi_cmd->add_option("--k", phi_k, "signal period");
  phi_cmd->add_option("--gamma-sq", phi_gamma_sq, "average power budget");
  phi_cmd->add_option("--sigma-w", phi_sigma_w, "process noise std");
  phi_cmd->add_option("--strategies", phi_strategies, "comma list of strategies");
  phi_cmd->add_option("-o,--out", phi_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (design_cmd->parsed()) {
      const te::Instance inst = build_instance(design_inst);
      te::TaskHessian H;
      if (design_hessian == "closed-form") {
        if (design_inst.name == "lqrex1")
          H = te::task_hessian_closed_form(te::lqrex1_diagonal(design_inst.rho, design_inst.dx));
        else if (design_inst.name == "lqrex2")
          H = te::task_hessian_closed_form(te::lqrex2_diagonal(design_inst.rho, design_inst.dx));
        else
          throw std::invalid_argument("--hessian closed-form needs lqrex1 or lqrex2");
      } else {
        H = te::task_hessian_fd(inst.system, inst.costs);
      }
      const te::DesignResult res = te::steady_state_design(inst.system, H, design_T, design_k,
                                                           design_gamma_sq, design_sigma_w);
      std::ofstream file;
      std::ostream& os = open_output(design_out, file);
      os << te::signal_to_json(res.signal) << "\n";
      std::cerr << "objective=" << res.final_objective
                << " predicted_phi=" << res.predicted_phi
                << " iters=" << res.objective_trace.size() << "\n";
      return 0;
    }

    if (sim_cmd->parsed()) {
      const te::Instance inst = build_instance(sim_inst);
      const double var = sim_gamma_sq / static_cast<double>(inst.system.du());
      const te::Trajectory traj = te::simulate(
          inst.system, te::NoisePolicy::isotropic(inst.system.du(), var), sim_T, sim_sigma_w,
          sim_seed);
      std::ofstream file;
      std::ostream& os = open_output(sim_out, file);
      te::trajectory_to_csv(traj, os);
      return 0;
    }

    if (tople_cmd->parsed()) {
      const te::Instance inst = build_instance(tople_inst);
      te::TopleConfig cfg;
      cfg.gamma_sq = tople_gamma_sq;
      cfg.sigma_w = tople_sigma_w;
      cfg.seed = tople_seed;
      cfg.num_epochs = tople_epochs;
      cfg.c_init = tople_c_init;
      cfg.use_truth = tople_oracle;
      const auto records = te::run_tople(inst.system, inst.costs, cfg);
      te::budget_audit(records, cfg.gamma_sq, /*hard_fail=*/true);
      std::ofstream file;
      std::ostream& os = open_output(tople_out, file);
      for (const auto& rec : records) os << te::epoch_record_to_json(rec) << "\n";
      return 0;
    }

    if (base_cmd->parsed() || sweep_cmd->parsed()) {
      const bool is_sweep = sweep_cmd->parsed();
      const InstanceOpts& io = is_sweep ? sweep_inst : base_inst;
      const Eigen::Index k = is_sweep ? sweep_k : base_k;
      const double gamma_sq = is_sweep ? sweep_gamma_sq : base_gamma_sq;
      const double sigma_w = is_sweep ? sweep_sigma_w : base_sigma_w;
      const int seeds = is_sweep ? sweep_seeds : base_seeds;
      const std::vector<std::string> strategies =
          is_sweep ? split_list(sweep_strategies) : std::vector<std::string>{base_strategy};

      // Sweep axis: rho, dx, or T; a single fixed point otherwise.
      struct Point {
        std::string param_name, param_value;
        InstanceOpts inst_opts;
        Eigen::Index T;
      };
      std::vector<Point> points;
      if (is_sweep && !sweep_rho.empty()) {
        for (const auto& r : split_list(sweep_rho)) {
          InstanceOpts p = io;
          p.rho = std::stod(r);
          points.push_back({"rho", r, p, sweep_T});
        }
      } else if (is_sweep && !sweep_dx.empty()) {
        for (const auto& d : split_list(sweep_dx)) {
          InstanceOpts p = io;
          p.dx = std::stoll(d);
          points.push_back({"dx", d, p, sweep_T});
        }
      } else if (is_sweep && !sweep_T_list.empty()) {
        for (const auto& t : split_list(sweep_T_list))
          points.push_back({"T", t, io, std::stoll(t)});
      } else {
        const Eigen::Index T = is_sweep ? sweep_T : base_T;
        points.push_back({"T", std::to_string(T), io, T});
      }

      std::ofstream file;
      std::ostream& os = open_output(is_sweep ? sweep_out : base_out, file);
      write_csv_header(os);
      for (const auto& pt : points) {
        const te::Instance inst = build_instance(pt.inst_opts);
        const te::TaskHessian H = te::task_hessian_fd(inst.system, inst.costs);
        // Random-cost instances are normalized per realization by ||H||_op so
        // risks are comparable across draws.
        const double norm = pt.inst_opts.name == "jordan"
                                ? H.H.selfadjointView<Eigen::Lower>().operatorNorm()
                                : 1.0;
        for (const auto& strategy : strategies) {
          const StrategyDesigns designs =
              prepare_strategy(inst, strategy, H, pt.T, k, gamma_sq, sigma_w);
          std::vector<double> risks(static_cast<std::size_t>(seeds));
          std::mutex err_mutex;
          std::string first_error;
          parallel_for(seeds, [&](int i) {
            try {
              risks[static_cast<std::size_t>(i)] =
                  run_strategy_seed(inst, strategy, designs.freq, designs.noise, pt.T, k,
                                    gamma_sq, sigma_w, static_cast<std::uint64_t>(i) + 1) /
                  norm;
            } catch (const std::exception& e) {
              std::lock_guard<std::mutex> lock(err_mutex);
              if (first_error.empty()) first_error = e.what();
              risks[static_cast<std::size_t>(i)] = std::numeric_limits<double>::quiet_NaN();
            }
          });
          if (!first_error.empty()) throw std::runtime_error(first_error);
          const Summary summary = aggregate(risks);
          const std::string hash = te::config_hash(canonical_config(
              {{"instance", pt.inst_opts.name},
               {"rho", std::to_string(pt.inst_opts.rho)},
               {"dx", std::to_string(pt.inst_opts.dx)},
               {"strategy", strategy},
               {"T", std::to_string(pt.T)},
               {"k", std::to_string(k)},
               {"gamma_sq", std::to_string(gamma_sq)},
               {"sigma_w", std::to_string(sigma_w)},
               {"seeds", std::to_string(seeds)}}));
          write_csv_row(os, pt.inst_opts.name, strategy, pt.param_name, pt.param_value,
                        summary, designs.phi_predicted / norm, hash);
        }
      }
      return 0;
    }

    if (hess_cmd->parsed()) {
      const te::Instance inst = build_instance(hess_inst);
      te::TaskHessian H;
      if (hess_method == "closed-form") {
        if (hess_inst.name == "lqrex1")
          H = te::task_hessian_closed_form(te::lqrex1_diagonal(hess_inst.rho, hess_inst.dx));
        else if (hess_inst.name == "lqrex2")
          H = te::task_hessian_closed_form(te::lqrex2_diagonal(hess_inst.rho, hess_inst.dx));
        else
          throw std::invalid_argument("--method closed-form needs lqrex1 or lqrex2");
      } else {
        H = te::task_hessian_fd(inst.system, inst.costs);
      }
      std::ofstream file;
      std::ostream& os = open_output(hess_out, file);
      os << te::hessian_to_json(H) << "\n";
      return 0;
    }

    if (phi_cmd->parsed()) {
      std::vector<InstanceOpts> variants;
      if (!phi_dx_list.empty()) {
        for (const auto& d : split_list(phi_dx_list)) {
          InstanceOpts p = phi_inst;
          p.dx = std::stoll(d);
          variants.push_back(p);
        }
      } else if (!phi_rho_list.empty()) {
        for (const auto& r : split_list(phi_rho_list)) {
          InstanceOpts p = phi_inst;
          p.rho = std::stod(r);
          variants.push_back(p);
        }
      } else {
        variants.push_back(phi_inst);
      }
      std::ofstream file;
      std::ostream& os = open_output(phi_out, file);
      write_csv_header(os);
      for (const auto& vo : variants) {
        const te::Instance inst = build_instance(vo);
        const te::TaskHessian H = te::task_hessian_fd(inst.system, inst.costs);
        const std::string param_name = !phi_dx_list.empty() ? "dx" : "rho";
        const std::string param_value = !phi_dx_list.empty() ? std::to_string(vo.dx)
                                                             : std::to_string(vo.rho);
        for (const auto& strategy : split_list(phi_strategies)) {
          const double phi_value =
              phi_common(inst, strategy, H, phi_T, phi_k, phi_gamma_sq, phi_sigma_w);
          Summary s;
          s.count = 0;
          const std::string hash = te::config_hash(canonical_config(
              {{"instance", vo.name},
               {"rho", std::to_string(vo.rho)},
               {"dx", std::to_string(vo.dx)},
               {"strategy", strategy},
               {"T", std::to_string(phi_T)},
               {"k", std::to_string(phi_k)},
               {"gamma_sq", std::to_string(phi_gamma_sq)},
               {"sigma_w", std::to_string(phi_sigma_w)}}));
          write_csv_row(os, vo.name, strategy, param_name, param_value, s, phi_value,
                        hash);
        }
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
