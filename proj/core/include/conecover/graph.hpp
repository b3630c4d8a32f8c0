#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "conecover/errors.hpp"

namespace conecover {

// Opaque vertex identifier. Finite graphs use dense indices 0..n-1;
// integer-labelled generators use the label itself; structured generators
// intern tokens. Only label()/resolve() cross the serialization boundary.
using Vid = std::int64_t;

struct OutEdge {
  Vid to;
  double p;  // tree-kernel probability p(i,j) = (1 - p(-i)) pG(i,j)
};

// Scratch record for one vertex: backward probability plus the ordered
// out-edge list. Inline storage covers the small degrees that dominate here;
// larger rows spill to the heap.
class EdgeSet {
 public:
  static constexpr int kInline = 8;

  void reset(double p_back) {
    p_back_ = p_back;
    n_ = 0;
    spill_.clear();
  }
  void add(Vid to, double p) {
    if (n_ < kInline) {
      inline_[static_cast<std::size_t>(n_)] = OutEdge{to, p};
    } else {
      if (n_ == kInline) spill_.assign(inline_.begin(), inline_.end());
      spill_.push_back(OutEdge{to, p});
    }
    ++n_;
  }
  double p_back() const { return p_back_; }
  int size() const { return n_; }
  const OutEdge& operator[](int k) const {
    return n_ <= kInline ? inline_[static_cast<std::size_t>(k)]
                         : spill_[static_cast<std::size_t>(k)];
  }
  double forward_mass() const {
    double s = 0;
    for (int k = 0; k < n_; ++k) s += (*this)[k].p;
    return s;
  }

 private:
  double p_back_ = 0;
  int n_ = 0;
  std::array<OutEdge, kInline> inline_{};
  std::vector<OutEdge> spill_;
};

// A base graph together with the walk parameters of its directed cover:
// out(v) exposes the tree kernel p(i,j) and the backward probability p(-i).
// Implementations are logically immutable; out() must be reentrant.
class BaseGraph {
 public:
  virtual ~BaseGraph() = default;

  virtual Vid root() const = 0;
  virtual void out(Vid v, EdgeSet& es) const = 0;
  virtual std::string label(Vid v) const = 0;
  virtual std::optional<Vid> resolve(const std::string& token) const = 0;

  virtual bool finite() const = 0;
  // Number of vertices for finite graphs; -1 otherwise.
  virtual std::int64_t vertex_count() const { return -1; }
  virtual int degree_bound() const = 0;
  // Whether the declared degree bound holds globally (generators
  // self-certify; spectral ops refuse graphs that cannot).
  virtual bool degree_bound_global() const { return true; }
  virtual double epsilon() const = 0;

  virtual std::unique_ptr<BaseGraph> clone() const = 0;
  // Stable description used for report hashes ("file:<hash>" or
  // "generator:name{params}").
  virtual std::string describe() const = 0;
  // Whether Vid values are identical across clones (false for graphs that
  // intern tokens on demand). Parallel estimators share a single instance
  // instead of cloning when this is false.
  virtual bool stable_ids() const { return true; }

  double backward(Vid v) const {
    EdgeSet es;
    out(v, es);
    return es.p_back();
  }

  // m(i,j) = p(i,j)/p(-i); zero when there is no edge.
  double m_entry(Vid i, Vid j) const {
    EdgeSet es;
    out(i, es);
    for (int k = 0; k < es.size(); ++k)
      if (es[k].to == j) return es[k].p / es.p_back();
    return 0.0;
  }

  // Checks the kernel invariants at one vertex. Used by validators and
  // property tests, not on walk hot paths.
  void check_vertex(Vid v) const;
};

// Derived view of the walk kernel (p(i,j), p(-i), m(i,j), root loop).
class WalkKernel {
 public:
  explicit WalkKernel(const BaseGraph& g) : g_(g) {}
  double p_back(Vid i) const { return g_.backward(i); }
  double p(Vid i, Vid j) const {
    EdgeSet es;
    g_.out(i, es);
    for (int k = 0; k < es.size(); ++k)
      if (es[k].to == j) return es[k].p;
    return 0.0;
  }
  double m(Vid i, Vid j) const { return g_.m_entry(i, j); }
  double root_loop() const { return g_.backward(g_.root()); }

 private:
  const BaseGraph& g_;
};

// Finite explicit graph with dense ids in declaration order.
class FiniteGraph final : public BaseGraph {
 public:
  struct Row {
    std::string name;
    double p_back = 0;
    std::vector<OutEdge> edges;
  };

  FiniteGraph(std::vector<Row> rows, Vid root, double epsilon, std::string description);

  Vid root() const override { return root_; }
  void out(Vid v, EdgeSet& es) const override;
  std::string label(Vid v) const override;
  std::optional<Vid> resolve(const std::string& token) const override;
  bool finite() const override { return true; }
  std::int64_t vertex_count() const override { return static_cast<std::int64_t>(rows_.size()); }
  int degree_bound() const override { return degree_bound_; }
  double epsilon() const override { return epsilon_; }
  std::unique_ptr<BaseGraph> clone() const override;
  std::string describe() const override { return description_; }

  const Row& row(Vid v) const;
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::vector<Row> rows_;
  std::unordered_map<std::string, Vid> index_;
  Vid root_;
  double epsilon_;
  int degree_bound_;
  std::string description_;
};

}  // namespace conecover
