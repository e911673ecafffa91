#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "reflpos/density.hpp"
#include "reflpos/gaussian.hpp"
#include "reflpos/lattice.hpp"
#include "reflpos/rp_verify.hpp"

namespace reflpos {

/// Malformed configuration or unreadable input; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json site_to_json(const Lattice& lattice, Index site);
Index site_from_json(const Lattice& lattice, const nlohmann::json& j);

/// {"constant": c, "terms": [{"coefficient": a, "factors": [{"site": [t, x...], "power": p}]}]}
nlohmann::json potential_to_json(const Lattice& lattice, const Potential& p);
Potential potential_from_json(const Lattice& lattice, const nlohmann::json& j);

nlohmann::json split_result_to_json(const Lattice& lattice, const SplitResult& r);

nlohmann::json gram_report_to_json(const GramReport& r);
nlohmann::json psd_report_to_json(const PsdReport& r);
nlohmann::json invariance_report_to_json(const InvarianceReport& r);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

/// Row-major CSV, 17 significant digits.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Formats with 17 significant digits.
std::string format_double(double x);

}  // namespace reflpos
