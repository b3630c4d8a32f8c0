#include "conecover/generators.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>

#include "conecover/rng.hpp"

namespace conecover {

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double GeneratorSpec::scalar(const std::string& key, double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (it->second.size() != 1) throw BadGeneratorSpec("parameter '" + key + "' must be a scalar");
  return it->second[0];
}

double GeneratorSpec::require_scalar(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw BadGeneratorSpec("missing parameter '" + key + "'");
  if (it->second.size() != 1) throw BadGeneratorSpec("parameter '" + key + "' must be a scalar");
  return it->second[0];
}

std::vector<double> GeneratorSpec::list(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw BadGeneratorSpec("missing parameter '" + key + "'");
  return it->second;
}

std::string GeneratorSpec::canonical() const {
  std::ostringstream os;
  os << name << '{';
  bool first = true;
  for (const auto& [k, v] : params) {
    if (!first) os << ',';
    first = false;
    os << k << '=';
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) os << ';';
      os << fmt_num(v[i]);
    }
  }
  os << '}';
  return os.str();
}

// ---------------------------------------------------------------------------
// halfline_critical: G = N0 with edges (i,i+1), (i,i-1) for i >= 1 and (0,1).
// p(-0)=1/3, p(0,1)=2/3 and for i >= 1
//   p(-i) = 1/(1 + (1+1/i)^2 + 3^-i),
//   p(i,i+1) = p(-i)(1+1/i)^2,  p(i,i-1) = p(-i) 3^-i,
// so that m(i,i+1) = (1+1/i)^2 and m(i,i-1) = 3^-i.

class HalflineCritical final : public BaseGraph {
 public:
  Vid root() const override { return 0; }

  void out(Vid v, EdgeSet& es) const override {
    if (v < 0) throw UnknownVertex(std::to_string(v));
    if (v == 0) {
      es.reset(1.0 / 3.0);
      es.add(1, 2.0 / 3.0);
      return;
    }
    const double i = static_cast<double>(v);
    const double up = (1.0 + 1.0 / i) * (1.0 + 1.0 / i);
    const double down = std::pow(3.0, -i);
    const double pb = 1.0 / (1.0 + up + down);
    es.reset(pb);
    es.add(v - 1, pb * down);
    es.add(v + 1, pb * up);
  }

  std::string label(Vid v) const override { return std::to_string(v); }
  std::optional<Vid> resolve(const std::string& token) const override {
    try {
      std::size_t pos = 0;
      long long z = std::stoll(token, &pos);
      if (pos != token.size() || z < 0) return std::nullopt;
      return static_cast<Vid>(z);
    } catch (...) {
      return std::nullopt;
    }
  }
  bool finite() const override { return false; }
  int degree_bound() const override { return 2; }
  double epsilon() const override { return 0.15; }  // inf p(-i) = p(-1) = 3/16
  std::unique_ptr<BaseGraph> clone() const override { return std::make_unique<HalflineCritical>(*this); }
  std::string describe() const override { return "generator:halfline_critical{}"; }
};

// ---------------------------------------------------------------------------
// two_sided_line: G = Z, pG(0,+-1)=1/2; pG(i,i+1)=p, pG(i,i-1)=1-p for i>=1;
// pG(i,i+1)=1-q, pG(i,i-1)=q for i<=-1. Backward c1 on i>=0, c2 on i<0.

class TwoSidedLine final : public BaseGraph {
 public:
  TwoSidedLine(double p, double q, double c1, double c2) : p_(p), q_(q), c1_(c1), c2_(c2) {
    if (!(p > 0.5 && p < 1.0 && q > 0.5 && q < 1.0))
      throw BadGeneratorSpec("two_sided_line requires p,q in (1/2,1)");
    if (p == q) throw BadGeneratorSpec("two_sided_line requires p != q");
    const double cmax = std::min(1.0 - 1.0 / (2.0 * p), 1.0 - 1.0 / (2.0 * q));
    if (!(0.0 < c1 && c1 < c2 && c2 < cmax))
      throw BadGeneratorSpec("two_sided_line requires 0 < c1 < c2 < min(1-1/2p, 1-1/2q)");
  }

  Vid root() const override { return 0; }

  void out(Vid v, EdgeSet& es) const override {
    const double pb = v >= 0 ? c1_ : c2_;
    double right;
    if (v == 0) right = 0.5;
    else if (v > 0) right = p_;
    else right = 1.0 - q_;
    es.reset(pb);
    es.add(v - 1, (1.0 - pb) * (1.0 - right));
    es.add(v + 1, (1.0 - pb) * right);
  }

  std::string label(Vid v) const override { return std::to_string(v); }
  std::optional<Vid> resolve(const std::string& token) const override {
    try {
      std::size_t pos = 0;
      long long z = std::stoll(token, &pos);
      if (pos != token.size()) return std::nullopt;
      return static_cast<Vid>(z);
    } catch (...) {
      return std::nullopt;
    }
  }
  bool finite() const override { return false; }
  int degree_bound() const override { return 2; }
  double epsilon() const override { return 0.5 * std::min(c1_, 1.0 - c2_); }
  std::unique_ptr<BaseGraph> clone() const override { return std::make_unique<TwoSidedLine>(*this); }
  std::string describe() const override {
    return "generator:two_sided_line{c1=" + fmt_num(c1_) + ",c2=" + fmt_num(c2_) +
           ",p=" + fmt_num(p_) + ",q=" + fmt_num(q_) + "}";
  }

 private:
  double p_, q_, c1_, c2_;
};

// ---------------------------------------------------------------------------
// rwdcre: G = Z; environment omega+(z) ~ theta, nu(z) ~ theta~ drawn lazily
// per site from finitely supported marginals with a counter RNG keyed by
// (seed, site), so the infinite environment is reproducible and pure.

class Rwdcre final : public BaseGraph {
 public:
  Rwdcre(std::uint64_t seed, std::vector<double> ov, std::vector<double> op,
         std::vector<double> nv, std::vector<double> np)
      : seed_(seed), ov_(std::move(ov)), op_(std::move(op)), nv_(std::move(nv)), np_(std::move(np)) {
    check_marginal(ov_, op_, "omega");
    check_marginal(nv_, np_, "nu");
    for (double w : ov_)
      if (!(w > 0.0 && w < 1.0)) throw BadGeneratorSpec("omega support must lie in (0,1)");
    double lo = 1.0;
    for (double v : nv_) lo = std::min({lo, v, 1.0 - v});
    if (!(lo > 0.0)) throw BadGeneratorSpec("nu support must lie in (0,1)");
    eps_ = 0.5 * lo;
  }

  double omega_plus(Vid z) const { return draw(ov_, op_, z, 0); }
  double nu(Vid z) const { return draw(nv_, np_, z, 1); }

  Vid root() const override { return 0; }

  void out(Vid v, EdgeSet& es) const override {
    const double w = omega_plus(v);
    const double pb = nu(v);
    es.reset(pb);
    es.add(v - 1, (1.0 - pb) * (1.0 - w));
    es.add(v + 1, (1.0 - pb) * w);
  }

  std::string label(Vid v) const override { return std::to_string(v); }
  std::optional<Vid> resolve(const std::string& token) const override {
    try {
      std::size_t pos = 0;
      long long z = std::stoll(token, &pos);
      if (pos != token.size()) return std::nullopt;
      return static_cast<Vid>(z);
    } catch (...) {
      return std::nullopt;
    }
  }
  bool finite() const override { return false; }
  int degree_bound() const override { return 2; }
  double epsilon() const override { return eps_; }
  std::unique_ptr<BaseGraph> clone() const override { return std::make_unique<Rwdcre>(*this); }
  std::string describe() const override {
    std::ostringstream os;
    os << "generator:rwdcre{seed=" << seed_ << ",omega=";
    join(os, ov_);
    os << '@';
    join(os, op_);
    os << ",nu=";
    join(os, nv_);
    os << '@';
    join(os, np_);
    os << '}';
    return os.str();
  }

 private:
  static void check_marginal(const std::vector<double>& vals, const std::vector<double>& probs,
                             const char* which) {
    if (vals.empty() || vals.size() != probs.size())
      throw BadGeneratorSpec(std::string(which) + " marginal needs matching values/probs");
    double s = 0;
    for (double p : probs) {
      if (!(p > 0)) throw BadGeneratorSpec(std::string(which) + " marginal probs must be positive");
      s += p;
    }
    if (std::fabs(s - 1.0) > 1e-9)
      throw BadGeneratorSpec(std::string(which) + " marginal probs must sum to 1");
  }

  double draw(const std::vector<double>& vals, const std::vector<double>& probs, Vid z,
              std::uint64_t tag) const {
    const double u = CounterRng::u01_from(CounterRng::at(seed_, CounterRng::zigzag(z) * 2 + tag, 0));
    double acc = 0;
    for (std::size_t k = 0; k < vals.size(); ++k) {
      acc += probs[k];
      if (u < acc) return vals[k];
    }
    return vals.back();
  }

  static void join(std::ostringstream& os, const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) os << ';';
      os << fmt_num(v[i]);
    }
  }

  std::uint64_t seed_;
  std::vector<double> ov_, op_, nv_, np_;
  double eps_;
};

// ---------------------------------------------------------------------------
// oscillating_growth: the inductive gluing of circles G_n (n odd) and binary
// trees with connecting paths (n even), with k_1 = 2 and k_{n+1} = 3 sum k_j.
// Walk parameters are the uniform forward kernel with p(-i) = 1/2; the
// generator exists for its level growth, which oscillates between the
// tree-dominated and path-dominated depth ranges.
//
// Token grammar (canonical forms only; glued vertices use one spelling):
//   c:<n>:<addr>:<pos>        circle vertex, n odd, pos in 2..k_n, plus the
//                             root c:1::1; pos == k_n is also o_{n+1}
//   t:<n>:<addr>:<d>:<idx>    binary-tree vertex of even G_n
//   p:<n>:<addr>:<leaf>:<pos> inter-leaf path vertex of even G_n
// addr is the dot-joined list of leaf indices selecting the instance.

class OscillatingGrowth final : public BaseGraph {
 public:
  OscillatingGrowth() {
    ks_.push_back(2);
    std::int64_t sum = 2;
    while (ks_.size() < 14) {
      ks_.push_back(3 * sum);
      sum += ks_.back();
    }
  }

  OscillatingGrowth(const OscillatingGrowth& other) : ks_(other.ks_) {}

  Vid root() const override { return const_cast<OscillatingGrowth*>(this)->intern("c:1::1"); }

  void out(Vid v, EdgeSet& es) const override {
    auto* self = const_cast<OscillatingGrowth*>(this);
    const std::string tok = label(v);
    std::vector<std::string> targets = out_tokens(tok);
    es.reset(0.5);
    const double p = 0.5 / static_cast<double>(targets.size());
    for (const std::string& t : targets) es.add(self->intern(t), p);
  }

  std::string label(Vid v) const override {
    std::lock_guard<std::mutex> lock(mu_);
    if (v < 0 || v >= static_cast<Vid>(tokens_.size())) throw UnknownVertex(std::to_string(v));
    return tokens_[static_cast<std::size_t>(v)];
  }

  std::optional<Vid> resolve(const std::string& token) const override {
    Parsed ps;
    if (!parse(token, ps)) return std::nullopt;
    return const_cast<OscillatingGrowth*>(this)->intern(token);
  }

  bool finite() const override { return false; }
  int degree_bound() const override { return 2; }
  double epsilon() const override { return 0.25; }
  std::unique_ptr<BaseGraph> clone() const override { return std::make_unique<OscillatingGrowth>(*this); }
  std::string describe() const override { return "generator:oscillating_growth{}"; }
  bool stable_ids() const override { return false; }

 private:
  struct Parsed {
    char kind;  // 'c', 't', 'p'
    int n;
    std::vector<std::int64_t> addr;
    std::int64_t a, b;  // c: pos,- ; t: depth,idx ; p: leaf,pos
  };

  std::int64_t k(int n) const {
    if (n < 1 || n > static_cast<int>(ks_.size()))
      throw GeneratorFailure("oscillating_growth: level index out of the supported range");
    return ks_[static_cast<std::size_t>(n - 1)];
  }

  static std::string addr_str(const std::vector<std::int64_t>& addr) {
    std::string s;
    for (std::size_t i = 0; i < addr.size(); ++i) {
      if (i) s += '.';
      s += std::to_string(addr[i]);
    }
    return s;
  }

  std::vector<std::string> out_tokens(const std::string& tok) const {
    Parsed v;
    if (!parse(tok, v)) throw UnknownVertex(tok);
    std::vector<std::string> out;
    const std::string as = addr_str(v.addr);
    if (v.kind == 'c') {
      const std::int64_t kn = k(v.n);
      if (v.a < kn) {
        if (v.n == 1 && v.a == 1) {
          out.push_back("c:1::2");
        } else {
          out.push_back("c:" + std::to_string(v.n) + ":" + as + ":" + std::to_string(v.a + 1));
        }
      } else {
        // circle closes to its starting point...
        if (v.n == 1) {
          out.push_back("c:1::1");
        } else {
          std::vector<std::int64_t> parent(v.addr.begin(), v.addr.end() - 1);
          out.push_back("t:" + std::to_string(v.n - 1) + ":" + addr_str(parent) + ":" +
                        std::to_string(k(v.n - 1) - 1) + ":" + std::to_string(v.addr.back()));
        }
        // ...and doubles as o_{n+1}, rooting the next even component
        out.push_back("t:" + std::to_string(v.n + 1) + ":" + as + ":0:1");
      }
    } else if (v.kind == 't') {
      const std::int64_t kn = k(v.n);
      if (v.a < kn - 1) {
        if (v.a >= 62) throw GeneratorFailure("oscillating_growth: tree index overflow");
        out.push_back("t:" + std::to_string(v.n) + ":" + as + ":" + std::to_string(v.a + 1) + ":" +
                      std::to_string(2 * v.b - 1));
        out.push_back("t:" + std::to_string(v.n) + ":" + as + ":" + std::to_string(v.a + 1) + ":" +
                      std::to_string(2 * v.b));
      } else {
        // leaf: connecting path onward, and its glued circle G_{n+1}
        out.push_back("p:" + std::to_string(v.n) + ":" + as + ":" + std::to_string(v.b) + ":1");
        std::vector<std::int64_t> sub = v.addr;
        sub.push_back(v.b);
        out.push_back("c:" + std::to_string(v.n + 1) + ":" + addr_str(sub) + ":2");
      }
    } else {
      const std::int64_t plen = k(v.n + 1);
      if (v.b < plen - 1) {
        out.push_back("p:" + std::to_string(v.n) + ":" + as + ":" + std::to_string(v.a) + ":" +
                      std::to_string(v.b + 1));
      } else {
        const std::int64_t kn = k(v.n);
        const bool last_leaf = kn - 1 >= 63 ? false : v.a >= (std::int64_t{1} << (kn - 1));
        if (!last_leaf) {
          out.push_back("t:" + std::to_string(v.n) + ":" + as + ":" + std::to_string(kn - 1) + ":" +
                        std::to_string(v.a + 1));
        } else if (v.n == 2) {
          out.push_back("c:1::2");
        } else {
          out.push_back("c:" + std::to_string(v.n - 1) + ":" + as + ":" + std::to_string(k(v.n - 1)));
        }
      }
    }
    return out;
  }

  static bool split(const std::string& s, std::vector<std::string>& parts) {
    parts.clear();
    std::size_t start = 0;
    while (true) {
      std::size_t pos = s.find(':', start);
      if (pos == std::string::npos) {
        parts.push_back(s.substr(start));
        return true;
      }
      parts.push_back(s.substr(start, pos - start));
      start = pos + 1;
    }
  }

  static bool to_i64(const std::string& s, std::int64_t& v) {
    if (s.empty()) return false;
    try {
      std::size_t pos = 0;
      v = std::stoll(s, &pos);
      return pos == s.size();
    } catch (...) {
      return false;
    }
  }

  bool parse(const std::string& tok, Parsed& p) const {
    std::vector<std::string> parts;
    split(tok, parts);
    if (parts.size() != 4 && parts.size() != 5) return false;
    if (parts[0].size() != 1) return false;
    p.kind = parts[0][0];
    std::int64_t n;
    if (!to_i64(parts[1], n) || n < 1 || n > static_cast<std::int64_t>(ks_.size())) return false;
    p.n = static_cast<int>(n);
    p.addr.clear();
    if (!parts[2].empty()) {
      std::size_t start = 0;
      const std::string& a = parts[2];
      while (start <= a.size()) {
        std::size_t pos = a.find('.', start);
        std::string piece = pos == std::string::npos ? a.substr(start) : a.substr(start, pos - start);
        std::int64_t x;
        if (!to_i64(piece, x) || x < 1) return false;
        p.addr.push_back(x);
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
    }
    if (p.kind == 'c') {
      if (parts.size() != 4) return false;
      if (!to_i64(parts[3], p.a)) return false;
      p.b = 0;
      if (p.n % 2 == 0) return false;
      const std::int64_t lo = p.n == 1 ? 1 : 2;
      if (p.a < lo || p.a > k(p.n)) return false;
      const std::size_t want = static_cast<std::size_t>(p.n / 2);
      return p.addr.size() == want;
    }
    if (parts.size() != 5) return false;
    if (!to_i64(parts[3], p.a) || !to_i64(parts[4], p.b)) return false;
    if (p.n % 2 != 0) return false;
    const std::size_t want = static_cast<std::size_t>(p.n / 2 - 1);
    if (p.addr.size() != want) return false;
    if (p.kind == 't') return p.a >= 0 && p.a <= k(p.n) - 1 && p.b >= 1;
    if (p.kind == 'p') return p.a >= 1 && p.b >= 1 && p.b <= k(p.n + 1) - 1;
    return false;
  }

  Vid intern(const std::string& tok) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = ids_.find(tok);
    if (it != ids_.end()) return it->second;
    Vid id = static_cast<Vid>(tokens_.size());
    tokens_.push_back(tok);
    ids_.emplace(tok, id);
    return id;
  }

  std::vector<std::int64_t> ks_;
  mutable std::mutex mu_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, Vid> ids_;
};

// ---------------------------------------------------------------------------

std::unique_ptr<FiniteGraph> make_homogeneous_tree(int d, double beta) {
  if (d < 1) throw BadGeneratorSpec("homogeneous_tree requires d >= 1");
  if (!(beta > 0.0 && beta < 1.0)) throw BadGeneratorSpec("homogeneous_tree requires beta in (0,1)");
  std::vector<FiniteGraph::Row> rows(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    rows[static_cast<std::size_t>(i)].name = "v" + std::to_string(i);
    rows[static_cast<std::size_t>(i)].p_back = beta;
    for (int j = 0; j < d; ++j)
      rows[static_cast<std::size_t>(i)].edges.push_back({j, (1.0 - beta) / d});
  }
  return std::make_unique<FiniteGraph>(std::move(rows), 0, 0.5 * std::min(beta, 1.0 - beta),
                                       "generator:homogeneous_tree{beta=" + fmt_num(beta) +
                                           ",d=" + std::to_string(d) + "}");
}

std::unique_ptr<FiniteGraph> make_homesick(int d, double lambda) {
  if (d < 1) throw BadGeneratorSpec("homesick requires d >= 1");
  if (!(lambda > 0.0)) throw BadGeneratorSpec("homesick requires lambda > 0");
  const double pb = lambda / (lambda + d);
  std::vector<FiniteGraph::Row> rows(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    rows[static_cast<std::size_t>(i)].name = "v" + std::to_string(i);
    rows[static_cast<std::size_t>(i)].p_back = pb;
    for (int j = 0; j < d; ++j)
      rows[static_cast<std::size_t>(i)].edges.push_back({j, 1.0 / (lambda + d)});
  }
  return std::make_unique<FiniteGraph>(std::move(rows), 0, 0.5 * std::min(pb, 1.0 - pb),
                                       "generator:homesick{d=" + std::to_string(d) +
                                           ",lambda=" + fmt_num(lambda) + "}");
}

std::unique_ptr<BaseGraph> make_halfline_critical() { return std::make_unique<HalflineCritical>(); }

std::unique_ptr<BaseGraph> make_two_sided_line(double p, double q, double c1, double c2) {
  return std::make_unique<TwoSidedLine>(p, q, c1, c2);
}

std::unique_ptr<BaseGraph> make_oscillating_growth() { return std::make_unique<OscillatingGrowth>(); }

std::unique_ptr<BaseGraph> make_rwdcre(std::uint64_t seed, std::vector<double> ov,
                                       std::vector<double> op, std::vector<double> nv,
                                       std::vector<double> np) {
  return std::make_unique<Rwdcre>(seed, std::move(ov), std::move(op), std::move(nv), std::move(np));
}

bool is_known_generator(const std::string& name) {
  return name == "halfline_critical" || name == "two_sided_line" || name == "homesick" ||
         name == "oscillating_growth" || name == "rwdcre" || name == "homogeneous_tree";
}

std::unique_ptr<BaseGraph> build_generator(const GeneratorSpec& spec) {
  if (spec.name == "halfline_critical") return make_halfline_critical();
  if (spec.name == "two_sided_line")
    return make_two_sided_line(spec.scalar("p", 0.7), spec.scalar("q", 0.8), spec.scalar("c1", 0.1),
                               spec.scalar("c2", 0.2));
  if (spec.name == "homesick")
    return make_homesick(static_cast<int>(spec.scalar("d", 2)), spec.require_scalar("lambda"));
  if (spec.name == "homogeneous_tree")
    return make_homogeneous_tree(static_cast<int>(spec.scalar("d", 2)), spec.require_scalar("beta"));
  if (spec.name == "oscillating_growth") return make_oscillating_growth();
  if (spec.name == "rwdcre") {
    const double s = spec.scalar("seed", 0);
    if (!(s >= 0) || s != std::floor(s)) throw BadGeneratorSpec("rwdcre seed must be a non-negative integer");
    return make_rwdcre(static_cast<std::uint64_t>(s), spec.list("omega_values"), spec.list("omega_probs"),
                       spec.list("nu_values"), spec.list("nu_probs"));
  }
  throw BadGeneratorSpec("unknown generator '" + spec.name + "'");
}

std::optional<CertificateHint> certificate_hint(const std::string& generator_name) {
  if (generator_name == "halfline_critical") {
    CertificateHint hint;
    hint.f = [](const BaseGraph&, Vid v) {
      return v == 0 ? 1.0 : static_cast<double>(v) / static_cast<double>(v + 1);
    };
    hint.lambda = 1.0;
    hint.on_adjacency = false;
    hint.description = "g(0)=1, g(i)=i/(i+1)";
    return hint;
  }
  if (generator_name == "two_sided_line") {
    CertificateHint hint;
    hint.f = [](const BaseGraph&, Vid) { return 1.0; };
    hint.lambda = 2.0;
    hint.on_adjacency = true;
    hint.description = "constant 1";
    return hint;
  }
  return std::nullopt;
}

}  // namespace conecover
