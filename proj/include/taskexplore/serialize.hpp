#pragma once

#include <iosfwd>
#include <string>

#include "taskexplore/freq_design.hpp"
#include "taskexplore/lin_sys.hpp"
#include "taskexplore/lqr.hpp"
#include "taskexplore/signal_synth.hpp"
#include "taskexplore/tople.hpp"

namespace taskexplore {

// JSON documents
std::string system_to_json(const SystemParams& sys);
SystemParams system_from_json(const std::string& text);
SystemParams system_from_json_file(const std::string& path);

std::string signal_to_json(const MatrixSignal& signal);
MatrixSignal signal_from_json(const std::string& text);

std::string hessian_to_json(const TaskHessian& H);  // dense row-major

std::string epoch_record_to_json(const EpochRecord& rec);  // one JSON-lines row

// CSV exports
void trajectory_to_csv(const Trajectory& traj, std::ostream& os);
void time_signal_to_csv(const TimeSignal& signal, std::ostream& os);

// FNV-1a hash of a canonical config string, hex-encoded; emitted with every
// result row so runs can be reproduced exactly.
std::string config_hash(const std::string& canonical_config);

}  // namespace taskexplore
