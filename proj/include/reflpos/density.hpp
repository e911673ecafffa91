#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "reflpos/lattice.hpp"

namespace reflpos {

struct Factor {
  Index site = 0;
  int power = 1;

  friend auto operator<=>(const Factor&, const Factor&) = default;
};

/// coefficient * prod_i phi[site_i]^power_i
struct Term {
  double coefficient = 0.0;
  std::vector<Factor> factors;

  friend bool operator==(const Term&, const Term&) = default;
};

/**
 * Polynomial in the field values: sum of terms plus a constant.
 *
 * Canonical form: factors sorted by site with distinct sites and positive
 * powers, no term with an empty factor list (constants live in `constant`),
 * no two terms with the same factor list, terms sorted by factor list and no
 * zero coefficients.
 */
struct Potential {
  std::vector<Term> terms;
  double constant = 0.0;

  friend bool operator==(const Potential&, const Potential&) = default;
};

Potential canonicalize(const Potential& p);
bool is_canonical(const Potential& p);

Potential operator+(const Potential& a, const Potential& b);
Potential operator-(const Potential& a, const Potential& b);
Potential operator*(double s, const Potential& p);

/// sum_terms coeff * prod config[site]^power + constant
double eval_potential(const Potential& p, const SiteVector& config);

/// Substitutes site -> theta(site) in every factor.
Potential reflect_potential(const Lattice& lattice, const Potential& p);

/// -lambda * sum_x phi_x^4 over every site.
Potential phi4(const Lattice& lattice, double lambda);

enum class ViolationKind { mixed_support, unmatched_mirror };
std::string_view to_string(ViolationKind kind);

struct Violation {
  Term term;
  ViolationKind kind;
};

struct SplitResult {
  bool is_splitting = false;
  /// G over positive-time sites with f = G o pi+ + G o pi+ o theta; present iff is_splitting.
  std::optional<Potential> witness_g;
  std::vector<Violation> violations;
};

/**
 * Decides whether f = G(pi+ T) + G(pi+ theta T) for some polynomial G.
 *
 * Terms touching both halves make this impossible. Otherwise the
 * positive-half part must coincide with the mirror image of the negative-half
 * part; the constant is split evenly between the two copies of G. The
 * returned witness is checked symbolically before returning.
 */
SplitResult split_check(const Lattice& lattice, const Potential& f);

/**
 * Flattened potential for repeated evaluation on full or half vectors.
 */
class PotentialEvaluator {
 public:
  PotentialEvaluator() = default;
  /// Evaluates on full site vectors.
  explicit PotentialEvaluator(const Potential& p);
  /// Evaluates on half vectors; every site of p must be on the positive half.
  PotentialEvaluator(const Lattice& lattice, const Potential& p);

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& v) const;
  bool empty() const { return coefficients_.empty() && constant_ == 0.0; }

 private:
  std::vector<double> coefficients_;
  std::vector<std::size_t> offsets_;  // factor range per term
  std::vector<Index> slots_;
  std::vector<int> powers_;
  double constant_ = 0.0;
};

}  // namespace reflpos
