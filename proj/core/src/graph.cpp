#include "conecover/graph.hpp"

#include <cmath>
#include <unordered_set>

namespace conecover {

void BaseGraph::check_vertex(Vid v) const {
  EdgeSet es;
  out(v, es);
  const double eps = epsilon();
  if (!(es.p_back() > eps && es.p_back() < 1.0 - eps))
    throw BackwardProbOutOfRange(label(v), es.p_back(), eps);
  if (es.size() == 0) throw NoOutEdges(label(v));
  std::unordered_set<Vid> seen;
  double total = es.p_back();
  for (int k = 0; k < es.size(); ++k) {
    if (!(es[k].p > 0.0)) throw InvalidEdgeProbability(label(v), label(es[k].to), es[k].p);
    if (!seen.insert(es[k].to).second) throw MultiEdgeDetected(label(v), label(es[k].to));
    total += es[k].p;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw RowNotStochastic(label(v), total);
}

FiniteGraph::FiniteGraph(std::vector<Row> rows, Vid root, double epsilon, std::string description)
    : rows_(std::move(rows)), root_(root), epsilon_(epsilon), description_(std::move(description)) {
  degree_bound_ = 0;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    index_.emplace(rows_[i].name, static_cast<Vid>(i));
    degree_bound_ = std::max<int>(degree_bound_, static_cast<int>(rows_[i].edges.size()));
  }
}

const FiniteGraph::Row& FiniteGraph::row(Vid v) const {
  if (v < 0 || v >= static_cast<Vid>(rows_.size())) throw UnknownVertex(std::to_string(v));
  return rows_[static_cast<std::size_t>(v)];
}

void FiniteGraph::out(Vid v, EdgeSet& es) const {
  const Row& r = row(v);
  es.reset(r.p_back);
  for (const OutEdge& e : r.edges) es.add(e.to, e.p);
}

std::string FiniteGraph::label(Vid v) const { return row(v).name; }

std::optional<Vid> FiniteGraph::resolve(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::unique_ptr<BaseGraph> FiniteGraph::clone() const {
  return std::make_unique<FiniteGraph>(*this);
}

}  // namespace conecover
