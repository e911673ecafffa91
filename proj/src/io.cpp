#include "reflpos/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace reflpos {

using nlohmann::json;

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json site_to_json(const Lattice& lattice, Index site) {
  const SiteCoord c = lattice.coord_of(site);
  json out = json::array({c.t});
  for (int x : c.x) out.push_back(x);
  return out;
}

Index site_from_json(const Lattice& lattice, const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("site must be an array [t, x1, ..., xd]");
  SiteCoord c;
  try {
    c.t = j.at(0).get<int>();
    for (std::size_t i = 1; i < j.size(); ++i) c.x.push_back(j.at(i).get<int>());
    return lattice.index_of(c);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad site coordinate: ") + e.what());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad site coordinate ") + j.dump() + ": " + e.what());
  }
}

json potential_to_json(const Lattice& lattice, const Potential& p) {
  json terms = json::array();
  for (const auto& t : p.terms) {
    json factors = json::array();
    for (const auto& f : t.factors) {
      factors.push_back({{"site", site_to_json(lattice, f.site)}, {"power", f.power}});
    }
    terms.push_back({{"coefficient", t.coefficient}, {"factors", std::move(factors)}});
  }
  return {{"constant", p.constant}, {"terms", std::move(terms)}};
}

Potential potential_from_json(const Lattice& lattice, const json& j) {
  if (!j.is_object()) throw ConfigError("potential must be a JSON object");
  Potential p;
  try {
    p.constant = j.value("constant", 0.0);
    for (const auto& t : j.value("terms", json::array())) {
      Term term;
      term.coefficient = t.at("coefficient").get<double>();
      for (const auto& f : t.at("factors")) {
        const int power = f.value("power", 1);
        if (power < 1) throw ConfigError("factor powers must be positive integers");
        term.factors.push_back({site_from_json(lattice, f.at("site")), power});
      }
      p.terms.push_back(std::move(term));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed potential: ") + e.what());
  }
  return canonicalize(p);
}

json split_result_to_json(const Lattice& lattice, const SplitResult& r) {
  json violations = json::array();
  for (const auto& v : r.violations) {
    Potential single;
    single.terms.push_back(v.term);
    violations.push_back({{"reason", std::string(to_string(v.kind))},
                          {"term", potential_to_json(lattice, single)["terms"][0]}});
  }
  json out = {{"is_splitting", r.is_splitting}, {"violations", std::move(violations)}};
  out["witness_g"] = r.witness_g ? potential_to_json(lattice, *r.witness_g) : json(nullptr);
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(number_or_null(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("matrix must be an array of rows");
  const auto rows = static_cast<Index>(j.size());
  Eigen::MatrixXd m(rows, rows);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != rows) {
      throw ConfigError("matrix must be square");
    }
    for (Index k = 0; k < rows; ++k) {
      if (!row[static_cast<std::size_t>(k)].is_number()) throw ConfigError("matrix entries must be numbers");
      m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
  }
  return m;
}

json psd_report_to_json(const PsdReport& r) {
  return {{"passed", r.passed},
          {"min_eigenvalue", number_or_null(r.min_eigenvalue)},
          {"spectral_norm", number_or_null(r.spectral_norm)},
          {"tolerance", r.tolerance}};
}

json invariance_report_to_json(const InvarianceReport& r) {
  return {{"passed", r.passed},
          {"deviation", number_or_null(r.deviation)},
          {"scale", r.scale},
          {"tolerance", r.tolerance}};
}

json gram_report_to_json(const GramReport& r) {
  json out;
  out["matrix_re"] = matrix_to_json(r.matrix.real());
  out["matrix_im"] = matrix_to_json(r.matrix.imag());
  out["stderr"] = matrix_to_json(r.std_error);
  out["min_eigenvalue"] = number_or_null(r.min_eigenvalue);
  out["eig_error_bound"] = r.eig_error_bound;
  out["verdict"] = std::string(to_string(r.verdict));
  out["n_samples"] = r.n_samples;
  out["seed"] = r.seed;
  out["estimator_kind"] = std::string(to_string(r.estimator_kind));
  out["effective_sample_size"] = r.effective_sample_size;
  out["tolerance"] = r.tolerance;
  out["hermitian_defect"] = r.hermitian_defect;
  out["bootstrap_fail_fraction"] = r.bootstrap_fail_fraction;
  out["ill_conditioned_weights"] = r.ill_conditioned_weights;
  out["n_outer"] = r.n_outer;
  out["n_inner"] = r.n_inner;
  out["note"] = "verified for " + std::to_string(r.n_test_functions) + " test functions";
  return out;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
  if (!os) throw ConfigError("failed writing " + path.string());
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read matrix file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError("bad number '" + cell + "' in " + path.string());
      }
    }
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Index i = 0; i < n; ++i) {
    if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
      throw ConfigError("matrix in " + path.string() + " is not square");
    }
    for (Index j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

}  // namespace reflpos
