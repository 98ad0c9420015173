#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chq/experiments.hpp"

namespace chq {

/// Bad configuration: unknown or duplicate key, wrong type, or values outside
/// the admissible windows. The message names the line or the key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class OutputFormat { Csv, Jsonl };

struct RunConfig {
  int dim = 1;
  double alpha = 0.5;
  /// Unset means p = (N+alpha+2)/N.
  std::optional<double> p;
  int grid_M = 1024;
  double grid_L = 20.0;
  RieszScheme scheme = RieszScheme::FreeSpace;
  std::vector<Well> wells;
  std::uint64_t seed = 0;
  int jobs = 0;  // 0: number of schedule points capped at hardware threads

  PetviashviliOptions groundstate;
  FlowOptions flow;
  double init_width = 1.0;

  /// Mass for `minimize`.
  double mass = 1.0;
  /// Masses for `sweep` and `concentrate`; multiples of c* when relative.
  std::vector<double> schedule;
  bool schedule_relative = true;
  bool continuation = true;
  std::vector<double> s_list;

  std::vector<double> trichotomy_c;
  std::vector<double> trichotomy_p;

  std::string out_dir = ".";
  OutputFormat format = OutputFormat::Csv;

  ChoquardParams params() const;
  std::optional<PotentialSpec> potential() const;
  Grid grid() const;
};

/// Parse `key = value` lines with `#` comments. Keys not present keep the
/// defaults above; every value is validated before returning.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(write_config(c)) reproduces c.
std::string write_config(const RunConfig& c);
/// Checks windows shared with ChoquardParams and PotentialSpec.
void validate(const RunConfig& c);
/// FNV-1a of the canonical text, with output.dir left out.
std::uint64_t config_hash(const RunConfig& c);
std::string hash_hex(std::uint64_t h);

/// Help text listing every key with its default.
std::string config_reference();

}  // namespace chq
