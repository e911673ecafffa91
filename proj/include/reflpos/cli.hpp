#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "reflpos/rp_verify.hpp"

namespace reflpos::cli {

inline constexpr const char* kToolName = "reflpos";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kPass = 0, kVerifiedFailure = 1, kUsageError = 2 };

struct ExperimentConfig {
  int time_extent = 1;
  std::vector<int> spatial_extents;

  std::string covariance_kind = "free_field";  // free_field | explicit
  double mass = 1.0;
  Eigen::MatrixXd explicit_matrix;
  std::string matrix_file;

  std::optional<nlohmann::json> density;  // Potential serialization or {"kind": "phi4", "lambda": x}

  std::string test_function_kind = "random";  // random | explicit
  Index test_function_count = 4;
  std::optional<std::uint64_t> test_function_seed;  // falls back to mc.seed
  bool include_zero = true;
  std::vector<std::vector<double>> test_function_vectors;

  McParams mc{.n_samples = 200000};
  Index convolution_samples = 100000;

  double psd_tol = kDefaultPsdTolerance;
  double invariance_tol = kDefaultInvarianceTolerance;
};

/// Parses a config object; relative matrix_file paths resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
/// Fully resolved config, including any matrix read from file.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> csv_dir;
  bool quiet = true;
  std::ostream* log = nullptr;  ///< human-readable summary sink
};

struct RunResult {
  nlohmann::json report;
  int exit_code = kUsageError;
};

RunResult cmd_check_gaussian(ExperimentConfig cfg, const CommandOptions& opts);
RunResult cmd_check_density(ExperimentConfig cfg, const CommandOptions& opts);
RunResult cmd_verify_rp(ExperimentConfig cfg, const CommandOptions& opts);
/// Built-in oracle suite; every tolerance is multiplied by tolerance_scale.
RunResult cmd_selftest(double tolerance_scale, const CommandOptions& opts);

/// Entry point behind the executable; returns the process exit code.
int run(int argc, char** argv);

}  // namespace reflpos::cli
