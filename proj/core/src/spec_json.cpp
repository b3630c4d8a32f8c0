#include "conecover/spec_json.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace conecover {

using nlohmann::json;

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

json parse_json(const std::string& raw) {
  json doc = json::parse(raw, nullptr, false);
  if (doc.is_discarded()) throw ParseError("spec is not valid JSON");
  return doc;
}

GeneratorSpec generator_from_json(const json& doc) {
  GeneratorSpec spec;
  spec.name = doc.at("generator").get<std::string>();
  if (!is_known_generator(spec.name)) throw BadGeneratorSpec("unknown generator '" + spec.name + "'");
  if (doc.contains("params")) {
    const json& params = doc.at("params");
    if (!params.is_object()) throw ParseError("\"params\" must be an object");
    for (auto it = params.begin(); it != params.end(); ++it) {
      std::vector<double> vals;
      if (it.value().is_number()) {
        vals.push_back(it.value().get<double>());
      } else if (it.value().is_array()) {
        for (const json& x : it.value()) {
          if (!x.is_number()) throw ParseError("parameter '" + it.key() + "' must be numeric");
          vals.push_back(x.get<double>());
        }
      } else {
        throw ParseError("parameter '" + it.key() + "' must be a number or array of numbers");
      }
      spec.params[it.key()] = std::move(vals);
    }
  }
  return spec;
}

struct RawEdge {
  std::string from, to;
  double value;
};

struct RawFiniteSpec {
  double epsilon = 1e-6;
  std::string root;
  std::vector<std::string> vertices;
  std::vector<RawEdge> edges;
  std::map<std::string, double> backward;
  bool tree_kernel = false;
};

RawFiniteSpec read_finite(const json& doc) {
  RawFiniteSpec s;
  if (doc.contains("epsilon")) s.epsilon = doc.at("epsilon").get<double>();
  if (!(s.epsilon > 0.0 && s.epsilon < 1.0)) throw ParseError("epsilon must lie in (0,1)");
  s.root = doc.at("root").get<std::string>();
  for (const json& v : doc.at("vertices")) s.vertices.push_back(v.get<std::string>());
  if (s.vertices.empty()) throw ParseError("vertex list is empty");
  std::string kernel = doc.value("kernel", std::string("pg"));
  if (kernel != "pg" && kernel != "tree") throw ParseError("kernel must be \"pg\" or \"tree\"");
  s.tree_kernel = kernel == "tree";
  const char* prob_key = s.tree_kernel ? "p" : "pg";
  for (const json& e : doc.at("edges")) {
    RawEdge edge;
    edge.from = e.at("from").get<std::string>();
    edge.to = e.at("to").get<std::string>();
    if (!e.contains(prob_key))
      throw ParseError("edge " + edge.from + "->" + edge.to + " missing \"" + prob_key +
                       "\" (declared kernel convention is \"" + kernel + "\")");
    edge.value = e.at(prob_key).get<double>();
    s.edges.push_back(std::move(edge));
  }
  if (!doc.contains("backward") || !doc.at("backward").is_object())
    throw ParseError("missing \"backward\" object");
  for (auto it = doc.at("backward").begin(); it != doc.at("backward").end(); ++it)
    s.backward[it.key()] = it.value().get<double>();
  return s;
}

}  // namespace

GeneratorSpec parse_generator_json(const std::string& raw_text) {
  json doc = parse_json(raw_text);
  if (!doc.contains("generator")) throw ParseError("not a generator spec");
  return generator_from_json(doc);
}

ValidatedSpec validate_spec(const std::string& raw_text, bool strict) {
  json doc = parse_json(raw_text);
  ValidatedSpec out;

  if (doc.contains("generator")) {
    GeneratorSpec gs = generator_from_json(doc);
    out.graph = build_generator(gs);
    out.is_generator = true;
    out.spec_hash = fnv1a_hex(out.graph->describe());
    return out;
  }

  RawFiniteSpec raw = read_finite(doc);

  std::unordered_map<std::string, Vid> index;
  for (std::size_t i = 0; i < raw.vertices.size(); ++i) {
    if (!index.emplace(raw.vertices[i], static_cast<Vid>(i)).second)
      throw ParseError("duplicate vertex '" + raw.vertices[i] + "'");
  }
  auto lookup = [&](const std::string& name) -> Vid {
    auto it = index.find(name);
    if (it == index.end()) throw UnknownVertex(name);
    return it->second;
  };
  const Vid root = lookup(raw.root);

  std::vector<FiniteGraph::Row> rows(raw.vertices.size());
  for (std::size_t i = 0; i < raw.vertices.size(); ++i) {
    rows[i].name = raw.vertices[i];
    auto it = raw.backward.find(raw.vertices[i]);
    if (it == raw.backward.end())
      throw ParseError("missing backward probability for '" + raw.vertices[i] + "'");
    rows[i].p_back = it->second;
    if (!(rows[i].p_back > raw.epsilon && rows[i].p_back < 1.0 - raw.epsilon))
      throw BackwardProbOutOfRange(raw.vertices[i], rows[i].p_back, raw.epsilon);
  }
  for (const auto& [name, value] : raw.backward) {
    (void)value;
    if (index.find(name) == index.end()) throw UnknownVertex(name);
  }

  std::set<std::pair<Vid, Vid>> seen;
  std::vector<double> raw_sum(rows.size(), 0.0);
  for (const RawEdge& e : raw.edges) {
    const Vid from = lookup(e.from);
    const Vid to = lookup(e.to);
    if (!seen.emplace(from, to).second) throw MultiEdgeDetected(e.from, e.to);
    if (!(e.value > 0.0) || e.value > 1.0) throw InvalidEdgeProbability(e.from, e.to, e.value);
    const double p_back = rows[static_cast<std::size_t>(from)].p_back;
    const double p = raw.tree_kernel ? e.value : (1.0 - p_back) * e.value;
    rows[static_cast<std::size_t>(from)].edges.push_back({to, p});
    raw_sum[static_cast<std::size_t>(from)] += e.value;
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].edges.empty()) throw NoOutEdges(rows[i].name);
    const double sum = raw.tree_kernel ? rows[i].p_back + raw_sum[i] : raw_sum[i];
    if (std::fabs(sum - 1.0) > 1e-12) throw RowNotStochastic(rows[i].name, sum);
  }

  // reachability from the root
  std::vector<char> reached(rows.size(), 0);
  std::deque<Vid> queue{root};
  reached[static_cast<std::size_t>(root)] = 1;
  while (!queue.empty()) {
    Vid v = queue.front();
    queue.pop_front();
    for (const OutEdge& e : rows[static_cast<std::size_t>(v)].edges) {
      if (!reached[static_cast<std::size_t>(e.to)]) {
        reached[static_cast<std::size_t>(e.to)] = 1;
        queue.push_back(e.to);
      }
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!reached[i]) {
      if (strict) throw UnreachableVertex(rows[i].name);
      out.warnings.push_back("vertex '" + rows[i].name + "' not reachable from root");
    }
  }

  out.spec_hash = fnv1a_hex(raw_text);
  out.graph = std::make_unique<FiniteGraph>(std::move(rows), root, raw.epsilon,
                                            "file:" + out.spec_hash);
  return out;
}

std::string expand_multiedges(const std::string& raw_text) {
  json doc = parse_json(raw_text);
  if (doc.contains("generator"))
    throw ParseError("expand_multiedges applies to finite specs only");

  {
    // simple specs pass through untouched
    std::set<std::pair<std::string, std::string>> seen;
    bool any = false;
    for (const json& e : doc.at("edges"))
      if (!seen.emplace(e.at("from").get<std::string>(), e.at("to").get<std::string>()).second)
        any = true;
    if (!any) return raw_text;
  }

  // Work on name-level structures; probabilities ride along unchanged.
  struct Edge {
    std::string to;
    json payload;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Edge>> adj;
  std::map<std::string, double> backward;

  for (const json& v : doc.at("vertices")) {
    order.push_back(v.get<std::string>());
    adj[order.back()];
  }
  for (const json& e : doc.at("edges")) {
    Edge edge;
    edge.to = e.at("to").get<std::string>();
    edge.payload = e;
    adj[e.at("from").get<std::string>()].push_back(std::move(edge));
  }
  for (auto it = doc.at("backward").begin(); it != doc.at("backward").end(); ++it)
    backward[it.key()] = it.value().get<double>();

  auto fresh_name = [&](const std::string& base, int k) {
    std::string name = base + "#" + std::to_string(k);
    while (adj.count(name)) name += "'";
    return name;
  };

  bool changed = true;
  int passes = 0;
  while (changed) {
    if (++passes > 64) throw ParseError("multi-edge expansion did not terminate");
    changed = false;
    for (auto& [from, edges] : adj) {
      std::map<std::string, int> mult;
      for (const Edge& e : edges) ++mult[e.to];
      for (const auto& [to, m] : mult) {
        if (m < 2) continue;
        changed = true;
        // keep the first parallel edge on `to`; re-target the rest to clones
        int clone_idx = 0;
        std::vector<std::string> clones;
        for (Edge& e : edges) {
          if (e.to != to) continue;
          if (clone_idx++ == 0) continue;
          std::string clone = fresh_name(to, clone_idx - 1);
          clones.push_back(clone);
          e.to = clone;
          e.payload["to"] = clone;
        }
        for (const std::string& clone : clones) {
          order.push_back(clone);
          backward[clone] = backward.at(to);
          std::vector<Edge> copy;
          for (const Edge& e : adj.at(to)) {
            Edge c = e;
            c.payload["from"] = clone;
            copy.push_back(std::move(c));
          }
          adj[clone] = std::move(copy);
        }
        break;  // container mutated; restart the scan
      }
      if (changed) break;
    }
  }

  json out = doc;
  out["vertices"] = json::array();
  for (const std::string& v : order) out["vertices"].push_back(v);
  out["edges"] = json::array();
  for (const std::string& v : order)
    for (const Edge& e : adj.at(v)) out["edges"].push_back(e.payload);
  out["backward"] = json::object();
  for (const std::string& v : order) out["backward"][v] = backward.at(v);
  return out.dump(2);
}

}  // namespace conecover
