#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "conecover/graph.hpp"

namespace conecover {

// Procedural base-graph description: a registered generator name plus a
// numeric parameter map (scalars or small lists). Generators are pure
// functions of (vertex, parameters); rwdcre is additionally keyed by "seed".
struct GeneratorSpec {
  std::string name;
  std::map<std::string, std::vector<double>> params;

  double scalar(const std::string& key, double fallback) const;
  double require_scalar(const std::string& key) const;
  std::vector<double> list(const std::string& key) const;
  bool has(const std::string& key) const { return params.count(key) > 0; }
  std::string canonical() const;  // stable "name{k=v,...}" form
};

// Known generator names: halfline_critical, two_sided_line, homesick,
// oscillating_growth, rwdcre, homogeneous_tree.
std::unique_ptr<BaseGraph> build_generator(const GeneratorSpec& spec);

bool is_known_generator(const std::string& name);

// Direct builders (also used by tests).
std::unique_ptr<FiniteGraph> make_homogeneous_tree(int d, double beta);
std::unique_ptr<FiniteGraph> make_homesick(int d, double lambda);
std::unique_ptr<BaseGraph> make_halfline_critical();
std::unique_ptr<BaseGraph> make_two_sided_line(double p, double q, double c1, double c2);
std::unique_ptr<BaseGraph> make_oscillating_growth();
std::unique_ptr<BaseGraph> make_rwdcre(std::uint64_t seed, std::vector<double> omega_values,
                                       std::vector<double> omega_probs,
                                       std::vector<double> nu_values,
                                       std::vector<double> nu_probs);

// A known test function certifying a lower bound on the Collatz-Wielandt
// number of a generator's M (or A) matrix, when the literature provides one.
struct CertificateHint {
  std::function<double(const BaseGraph&, Vid)> f;
  double lambda;
  bool on_adjacency;  // certify A instead of M
  std::string description;
};
std::optional<CertificateHint> certificate_hint(const std::string& generator_name);

}  // namespace conecover
