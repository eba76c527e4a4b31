#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cusplab/sim.hpp"

namespace cusplab {

/// One file written by a command, with its git blob SHA-1.
struct OutputFile {
  std::string name;  ///< relative to the output directory
  std::string digest;
  std::string describes;  ///< what figure or table the data reproduces
};

/// Writes `content` to dir/name and returns its entry.
OutputFile write_output(const std::filesystem::path& dir, const std::string& name,
                        const std::string& content, const std::string& describes);

InitialDataSpec spec_from_json(const nlohmann::json& j);
RunOptions options_from_json(const nlohmann::json& j);

std::string snapshots_csv(const RunResult& r);     ///< snapshot,t,label,origin,x,u,g,inserted
std::string modulation_csv(const RunResult& r);    ///< t,s,tau,kappa,xi,g_min,d3u_at_min
std::string conservation_csv(const RunResult& r);  ///< t,dt,energy,energy_x,...
nlohmann::ordered_json run_summary(const RunResult& r);

/// snapshots.csv, modulation.csv, conservation.csv, initial_data.json and run.json.
std::vector<OutputFile> write_run(const RunResult& r, const std::filesystem::path& dir);

/// Reads a directory written by write_run. Snapshot frames are recomputed with
/// track_modulation; the label Jacobians are not stored.
RunResult read_run(const std::filesystem::path& dir);

/// Command manifest: resolved configuration, outputs with digests, pass/fail.
struct Manifest {
  std::string command;
  nlohmann::ordered_json config;
  std::vector<OutputFile> outputs;
  std::vector<std::pair<std::string, std::string>> inputs;  ///< path, digest
  std::string started, finished;
  nlohmann::ordered_json summary;
  bool passed = true;
};

nlohmann::ordered_json to_json(const Manifest& m);
std::string utc_timestamp();

}  // namespace cusplab
