#include "reflpos/density.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace reflpos {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

std::vector<Factor> normalize_factors(std::vector<Factor> factors) {
  std::sort(factors.begin(), factors.end());
  std::vector<Factor> out;
  for (const auto& f : factors) {
    if (f.power < 0) throw std::invalid_argument("negative power in potential term");
    if (f.power == 0) continue;
    if (!out.empty() && out.back().site == f.site) {
      out.back().power += f.power;
    } else {
      out.push_back(f);
    }
  }
  return out;
}

bool factor_less(const std::vector<Factor>& a, const std::vector<Factor>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

Potential canonicalize(const Potential& p) {
  // Coefficients of identical monomials are summed in input order.
  std::vector<std::pair<std::vector<Factor>, double>> merged;
  std::map<std::vector<Factor>, std::size_t> slot;
  double constant = p.constant;
  for (const auto& t : p.terms) {
    auto factors = normalize_factors(t.factors);
    if (factors.empty()) {
      constant += t.coefficient;
      continue;
    }
    auto [it, inserted] = slot.try_emplace(factors, merged.size());
    if (inserted) {
      merged.emplace_back(std::move(factors), t.coefficient);
    } else {
      merged[it->second].second += t.coefficient;
    }
  }
  Potential out;
  out.constant = constant;
  for (auto& [factors, coeff] : merged) {
    if (coeff != 0.0) out.terms.push_back(Term{coeff, std::move(factors)});
  }
  std::sort(out.terms.begin(), out.terms.end(),
            [](const Term& a, const Term& b) { return factor_less(a.factors, b.factors); });
  return out;
}

bool is_canonical(const Potential& p) {
  for (std::size_t i = 0; i < p.terms.size(); ++i) {
    const Term& t = p.terms[i];
    if (t.coefficient == 0.0 || t.factors.empty()) return false;
    for (std::size_t k = 0; k < t.factors.size(); ++k) {
      if (t.factors[k].power <= 0) return false;
      if (k > 0 && !(t.factors[k - 1].site < t.factors[k].site)) return false;
    }
    if (i > 0 && !factor_less(p.terms[i - 1].factors, t.factors)) return false;
  }
  return true;
}

Potential operator+(const Potential& a, const Potential& b) {
  Potential sum = a;
  sum.terms.insert(sum.terms.end(), b.terms.begin(), b.terms.end());
  sum.constant = a.constant + b.constant;
  return canonicalize(sum);
}

Potential operator*(double s, const Potential& p) {
  Potential out = p;
  for (auto& t : out.terms) t.coefficient *= s;
  out.constant *= s;
  return canonicalize(out);
}

Potential operator-(const Potential& a, const Potential& b) { return a + (-1.0) * b; }

double eval_potential(const Potential& p, const SiteVector& config) {
  double sum = 0.0;
  for (const auto& t : p.terms) {
    double prod = t.coefficient;
    for (const auto& f : t.factors) {
      if (f.site < 0 || f.site >= config.size()) {
        throw std::out_of_range("potential references site " + std::to_string(f.site) +
                                " outside configuration of length " +
                                std::to_string(config.size()));
      }
      prod *= ipow(config[f.site], f.power);
    }
    sum += prod;
  }
  return sum + p.constant;
}

Potential reflect_potential(const Lattice& lattice, const Potential& p) {
  Potential out = p;
  for (auto& t : out.terms) {
    for (auto& f : t.factors) {
      if (f.site < 0 || f.site >= lattice.site_count()) {
        throw std::out_of_range("potential references site " + std::to_string(f.site) +
                                " outside lattice");
      }
      f.site = lattice.theta(f.site);
    }
  }
  return canonicalize(out);
}

Potential phi4(const Lattice& lattice, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("phi4 coupling must be positive, got " + std::to_string(lambda));
  }
  Potential p;
  for (Index x = 0; x < lattice.site_count(); ++x) p.terms.push_back(Term{-lambda, {{x, 4}}});
  return canonicalize(p);
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::mixed_support: return "mixed-support";
    case ViolationKind::unmatched_mirror: return "unmatched-mirror";
  }
  return "unknown";
}

SplitResult split_check(const Lattice& lattice, const Potential& f_in) {
  const Potential f = canonicalize(f_in);
  SplitResult result;
  Potential plus, minus;
  for (const auto& t : f.terms) {
    bool any_plus = false, any_minus = false;
    for (const auto& fac : t.factors) {
      if (fac.site < 0 || fac.site >= lattice.site_count()) {
        throw std::out_of_range("potential references site " + std::to_string(fac.site) +
                                " outside lattice");
      }
      (lattice.is_plus(fac.site) ? any_plus : any_minus) = true;
    }
    if (any_plus && any_minus) {
      result.violations.push_back({t, ViolationKind::mixed_support});
    } else {
      (any_plus ? plus : minus).terms.push_back(t);
    }
  }
  if (!result.violations.empty()) return result;

  const Potential mirror = reflect_potential(lattice, minus);
  const Potential mismatch = plus - mirror;
  for (const auto& t : mismatch.terms) {
    const auto same = [&](const Term& u) { return u.factors == t.factors; };
    if (auto it = std::find_if(plus.terms.begin(), plus.terms.end(), same); it != plus.terms.end()) {
      result.violations.push_back({*it, ViolationKind::unmatched_mirror});
    }
    if (auto it = std::find_if(mirror.terms.begin(), mirror.terms.end(), same);
        it != mirror.terms.end()) {
      Term original = *it;
      for (auto& fac : original.factors) fac.site = lattice.theta(fac.site);
      std::sort(original.factors.begin(), original.factors.end());
      result.violations.push_back({std::move(original), ViolationKind::unmatched_mirror});
    }
  }
  if (!result.violations.empty()) return result;

  Potential g = canonicalize(plus);
  g.constant = 0.5 * f.constant;
  const Potential rebuilt = g + reflect_potential(lattice, g);
  if (!(rebuilt == f)) throw std::logic_error("split_check: witness does not reproduce f");
  result.is_splitting = true;
  result.witness_g = std::move(g);
  return result;
}

PotentialEvaluator::PotentialEvaluator(const Potential& p) : constant_(p.constant) {
  for (const auto& t : p.terms) {
    coefficients_.push_back(t.coefficient);
    offsets_.push_back(slots_.size());
    for (const auto& f : t.factors) {
      slots_.push_back(f.site);
      powers_.push_back(f.power);
    }
  }
  offsets_.push_back(slots_.size());
}

PotentialEvaluator::PotentialEvaluator(const Lattice& lattice, const Potential& p)
    : PotentialEvaluator(p) {
  for (auto& s : slots_) {
    if (s < 0 || s >= lattice.site_count() || !lattice.is_plus(s)) {
      throw std::invalid_argument("half-lattice potential references site " + std::to_string(s) +
                                  " outside the positive-time half");
    }
    s = lattice.plus_position(s);
  }
}

double PotentialEvaluator::operator()(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  double sum = 0.0;
  for (std::size_t t = 0; t < coefficients_.size(); ++t) {
    double prod = coefficients_[t];
    for (std::size_t k = offsets_[t]; k < offsets_[t + 1]; ++k) {
      if (slots_[k] >= v.size()) throw std::out_of_range("potential site outside configuration");
      prod *= ipow(v[slots_[k]], powers_[k]);
    }
    sum += prod;
  }
  return sum + constant_;
}

}  // namespace reflpos
