#pragma once

#include <memory>
#include <string>
#include <vector>

#include "conecover/generators.hpp"
#include "conecover/graph.hpp"

namespace conecover {

// Result of spec validation: the graph plus non-fatal findings.
struct ValidatedSpec {
  std::unique_ptr<BaseGraph> graph;
  std::vector<std::string> warnings;
  bool is_generator = false;
  std::string spec_hash;  // fnv1a of the raw text (finite) or canonical generator string
};

// Parses and validates a JSON spec document. Accepts either the finite form
//   { "epsilon": 1e-6, "root": "i0", "vertices": [...], "kernel": "pg"|"tree",
//     "edges": [{"from":..,"to":..,"pg"|"p":..}, ...], "backward": {...} }
// or a generator form { "generator": "name", "params": {...} }.
// strict: unreachable vertices become errors instead of warnings.
ValidatedSpec validate_spec(const std::string& raw_text, bool strict = false);

// Replaces parallel edges by fresh clone vertices so the directed cover is
// preserved up to relabelling. Identity on simple specs; generator specs are
// rejected. Returns the rewritten JSON document text.
std::string expand_multiedges(const std::string& raw_text);

// 64-bit FNV-1a, hex-encoded; the "spec hash" embedded in every report.
std::string fnv1a_hex(const std::string& bytes);

// Parses {"generator":...,"params":{...}} into a GeneratorSpec.
GeneratorSpec parse_generator_json(const std::string& raw_text);

}  // namespace conecover
