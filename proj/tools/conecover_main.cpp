// conecover: directed covers of base graphs, random-walk classification,
// rate of escape / entropy, and the coupled branching process.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "conecover/report.hpp"
#include "conecover/spec_json.hpp"
#include "conecover/version.hpp"

namespace cc = conecover;

namespace {

struct GraphArgs {
  std::string spec_path;
  std::string generator;
  std::vector<std::string> params;
  bool strict = false;
};

void add_graph_options(CLI::App* cmd, GraphArgs& args, bool generator_only = false) {
  if (!generator_only)
    cmd->add_option("--spec", args.spec_path, "path to a JSON spec file");
  cmd->add_option("--generator", args.generator, "generator name");
  cmd->add_option("--params", args.params, "generator parameter k=v (lists comma separated)");
  cmd->add_flag("--strict", args.strict, "treat validation warnings as errors");
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t pos = text.find(',', start);
    const std::string piece =
        pos == std::string::npos ? text.substr(start) : text.substr(start, pos - start);
    if (piece.empty()) throw cc::UsageError("empty number in list '" + text + "'");
    char* end = nullptr;
    const double v = std::strtod(piece.c_str(), &end);
    if (end != piece.c_str() + piece.size())
      throw cc::UsageError("cannot parse number '" + piece + "'");
    out.push_back(v);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

cc::GeneratorSpec parse_generator_args(const std::string& name,
                                       const std::vector<std::string>& params) {
  cc::GeneratorSpec spec;
  spec.name = name;
  for (const std::string& item : params) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) throw cc::UsageError("--params expects k=v, got '" + item + "'");
    spec.params[item.substr(0, eq)] = parse_number_list(item.substr(eq + 1));
  }
  return spec;
}

struct LoadedGraph {
  std::unique_ptr<cc::BaseGraph> graph;
  std::string spec_hash;
  std::string generator_name;  // empty for file specs
  std::vector<std::string> warnings;
};

LoadedGraph load_graph(const GraphArgs& args) {
  LoadedGraph out;
  if (!args.spec_path.empty() && !args.generator.empty())
    throw cc::UsageError("--spec and --generator are mutually exclusive");
  if (!args.spec_path.empty()) {
    std::ifstream in(args.spec_path);
    if (!in) throw cc::UsageError("cannot open spec file '" + args.spec_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    cc::ValidatedSpec vs = cc::validate_spec(buf.str(), args.strict);
    out.graph = std::move(vs.graph);
    out.spec_hash = vs.spec_hash;
    out.warnings = std::move(vs.warnings);
    if (vs.is_generator) {
      // keep the generator name for certificate hints
      const std::string desc = out.graph->describe();
      const auto colon = desc.find(':');
      const auto brace = desc.find('{');
      if (colon != std::string::npos && brace != std::string::npos)
        out.generator_name = desc.substr(colon + 1, brace - colon - 1);
    }
    return out;
  }
  if (args.generator.empty()) throw cc::UsageError("one of --spec or --generator is required");
  cc::GeneratorSpec spec = parse_generator_args(args.generator, args.params);
  out.graph = cc::build_generator(spec);
  out.spec_hash = cc::fnv1a_hex(out.graph->describe());
  out.generator_name = args.generator;
  return out;
}

void emit(const cc::Json& doc) { std::fputs(cc::dump_json(doc).c_str(), stdout); }

int run_validate(const GraphArgs& gargs, const std::string& format, bool expand) {
  if (expand) {
    if (gargs.spec_path.empty()) throw cc::UsageError("--expand requires --spec");
    std::ifstream in(gargs.spec_path);
    if (!in) throw cc::UsageError("cannot open spec file '" + gargs.spec_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string expanded = cc::expand_multiedges(buf.str());
    std::fputs(expanded.c_str(), stdout);
    std::fputc('\n', stdout);
    return 0;
  }
  LoadedGraph lg = load_graph(gargs);
  cc::Json tol = cc::Json::object();
  tol["row_sum"] = 1e-12;
  tol["epsilon"] = lg.graph->epsilon();
  cc::Json doc = cc::report_envelope("validate", lg.spec_hash, 0, tol);
  cc::Json res = cc::Json::object();
  res["valid"] = true;
  res["finite"] = lg.graph->finite();
  if (lg.graph->finite()) res["vertices"] = lg.graph->vertex_count();
  res["degree_bound"] = lg.graph->degree_bound();
  res["root"] = lg.graph->label(lg.graph->root());
  cc::Json warn = cc::Json::array();
  for (const std::string& w : lg.warnings) warn.push_back(w);
  res["warnings"] = warn;
  doc["result"] = res;
  (void)format;
  emit(doc);
  return 0;
}

int run_growth(const GraphArgs& gargs, double levels, double budget, const std::string& format) {
  LoadedGraph lg = load_graph(gargs);
  cc::LevelCounts lc =
      cc::count_levels(*lg.graph, static_cast<int>(levels), static_cast<std::int64_t>(budget));
  if (format == "tsv") {
    std::fputs(cc::levels_tsv(lc).c_str(), stdout);
    return 0;
  }
  cc::Json doc = cc::report_envelope("growth", lg.spec_hash, 0, cc::Json::object());
  doc["result"] = cc::to_json(lc);
  emit(doc);
  return 0;
}

int run_classify(const GraphArgs& gargs, double radius, double runs, double horizon,
                 std::uint64_t seed, double tol, double powers) {
  LoadedGraph lg = load_graph(gargs);
  const cc::BaseGraph& g = *lg.graph;
  const int rad = g.finite() ? static_cast<int>(g.vertex_count()) + 1 : static_cast<int>(radius);

  cc::Json tolerances = cc::Json::object();
  tolerances["pf_tol"] = tol;
  tolerances["radius"] = rad;
  cc::Json doc = cc::report_envelope("classify", lg.spec_hash, seed, tolerances);
  cc::Json res = cc::Json::object();

  cc::SpectralReport sr = cc::spectral_report(g, cc::MatrixKind::MeanOffspring, rad,
                                              static_cast<int>(powers), tol);
  res["spectral"] = cc::to_json(sr);

  if (!lg.generator_name.empty()) {
    if (auto hint = cc::certificate_hint(lg.generator_name)) {
      cc::CwCertificate cert =
          cc::cw_certify(g, hint->f, hint->lambda, std::max(rad, 200),
                         hint->on_adjacency ? cc::MatrixKind::Adjacency
                                            : cc::MatrixKind::MeanOffspring);
      cc::Json c = cc::to_json(cert);
      c["test_function"] = hint->description;
      c["matrix"] = hint->on_adjacency ? "A" : "M";
      res["cw_certificate"] = c;
    }
  }

  res["ergodicity"] = cc::to_json(cc::ergodicity_verdict(g, rad, static_cast<int>(powers)));

  if (g.finite()) {
    cc::GfSolution sol = cc::analyze(g, cc::AnalyzeOptions{});
    res["analytic"] = cc::to_json(sol);
    const double lam = sol.spectral_attachment;
    std::string cls;
    if (lam > 1.0 + 1e-9)
      cls = "transient";
    else if (lam < 1.0 - 1e-9)
      cls = "positive_recurrent";
    else
      cls = "null_recurrent";
    res["finite_classification"] = cls;
  } else {
    res["analytic"] = "infinite base graph: run analyze with --radius for truncation brackets";
  }

  if (runs > 0) {
    res["empirical"] = cc::to_json(cc::empirical_recurrence(g, static_cast<std::int64_t>(horizon),
                                                            static_cast<std::int64_t>(runs), seed));
  }
  doc["result"] = res;
  emit(doc);
  return 0;
}

int run_simulate(const GraphArgs& gargs, double horizon, std::uint64_t seed,
                 const std::string& dump_path) {
  LoadedGraph lg = load_graph(gargs);
  cc::SimulateOptions opt;
  opt.n_steps = static_cast<std::int64_t>(horizon);
  opt.seed = seed;
  opt.weights.push_back(cc::unit_weight());
  opt.record_trajectory = !dump_path.empty();
  cc::WalkRun run = cc::simulate(*lg.graph, opt);

  if (!dump_path.empty()) {
    std::ofstream out(dump_path);
    if (!out) throw cc::UsageError("cannot open '" + dump_path + "' for writing");
    out << "step\theight\tlabel\tloop\n";
    for (std::size_t t = 0; t < run.trajectory.size(); ++t)
      out << (t + 1) << '\t' << run.trajectory[t].height << '\t'
          << lg.graph->label(run.trajectory[t].label) << '\t' << (run.trajectory[t].loop ? 1 : 0)
          << '\n';
  }

  cc::Json tolerances = cc::Json::object();
  tolerances["margin"] = "10k+100";
  cc::Json doc = cc::report_envelope("simulate", lg.spec_hash, seed, tolerances);
  cc::Json res = cc::to_json(run);
  cc::Json exits = cc::Json::array();
  for (const cc::ExitRecord& r : cc::extract_exits(run, cc::MarginPolicy{})) {
    cc::Json e = cc::Json::object();
    e["k"] = r.k;
    e["e_k"] = r.e_k;
    e["label"] = lg.graph->label(r.label);
    exits.push_back(e);
  }
  res["exits"] = exits;
  res["final_label"] = lg.graph->label(run.final_label);
  doc["result"] = res;
  emit(doc);
  return 0;
}

int run_couple(const GraphArgs& gargs, double trials, double cap, double horizon,
               std::uint64_t seed) {
  LoadedGraph lg = load_graph(gargs);
  cc::CoupleReport rep = cc::couple_check(*lg.graph, static_cast<std::int64_t>(trials),
                                          static_cast<std::int64_t>(cap),
                                          static_cast<std::int64_t>(horizon), seed);
  cc::Json tolerances = cc::Json::object();
  tolerances["band"] = "3 combined stderr + bias allowance";
  cc::Json doc = cc::report_envelope("couple", lg.spec_hash, seed, tolerances);
  cc::Json res = cc::to_json(rep);
  if (lg.graph->finite()) {
    cc::GfSolution sol = cc::analyze(*lg.graph, cc::AnalyzeOptions{});
    const double q_loop = cc::analytic_loop_probability(sol, *lg.graph);
    res["q_loop_analytic"] = q_loop;
    const double band = 3.0 * std::sqrt(rep.q_gw_se * rep.q_gw_se + rep.q_walk_se * rep.q_walk_se) +
                        rep.bias_allowance;
    res["analytic_compatible"] = std::fabs(rep.q_gw_hat - q_loop) <= band &&
                                 std::fabs(rep.q_walk_hat - q_loop) <= band;
  }
  doc["result"] = res;
  emit(doc);
  return 0;
}

int run_analyze(const GraphArgs& gargs, double radius, double tol, const std::string& format,
                bool structural) {
  LoadedGraph lg = load_graph(gargs);
  cc::AnalyzeOptions opt;
  opt.tol = tol;
  opt.weights.push_back(cc::unit_weight());
  opt.structural_check = structural;

  cc::Json tolerances = cc::Json::object();
  tolerances["f_tol"] = tol;
  cc::Json doc = cc::report_envelope("analyze", lg.spec_hash, 0, tolerances);
  if (lg.graph->finite()) {
    cc::GfSolution sol = cc::analyze(*lg.graph, opt);
    if (format == "tsv") {
      std::fputs(cc::gf_tsv_header().c_str(), stdout);
      std::fputs(cc::gf_tsv_row(lg.spec_hash, sol).c_str(), stdout);
      return 0;
    }
    doc["result"] = cc::to_json(sol);
  } else {
    if (radius <= 0) throw cc::TruncationRequired();
    cc::GfBracket bracket = cc::analyze_truncated(*lg.graph, static_cast<int>(radius), opt);
    tolerances["truncation_radius"] = static_cast<int>(radius);
    doc["tolerances"] = tolerances;
    doc["result"] = cc::to_json(bracket);
  }
  emit(doc);
  return 0;
}

int run_rwdcre(const std::vector<std::string>& params, double n, double trials,
               std::uint64_t seed) {
  cc::GeneratorSpec spec = parse_generator_args("rwdcre", params);
  cc::FiniteMarginal omega{spec.list("omega_values"), spec.list("omega_probs")};
  cc::FiniteMarginal nu{spec.list("nu_values"), spec.list("nu_probs")};
  cc::RwdcreReport rep =
      cc::classify_rwdcre(omega, nu, static_cast<int>(n), static_cast<int>(trials), seed);
  cc::Json tolerances = cc::Json::object();
  tolerances["decision_band"] = "3 stderr";
  cc::Json doc = cc::report_envelope("rwdcre", cc::fnv1a_hex(spec.canonical()), seed, tolerances);
  doc["result"] = cc::to_json(rep);
  emit(doc);
  return 0;
}

struct GridAxis {
  std::string name;
  double lo = 0, hi = 0, step = 1;
};

GridAxis parse_axis(const std::string& text) {
  GridAxis axis;
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos) throw cc::UsageError("--grid expects name=lo:hi:step");
  axis.name = text.substr(0, eq);
  const std::string rest = text.substr(eq + 1);
  const std::size_t c1 = rest.find(':');
  const std::size_t c2 = rest.find(':', c1 == std::string::npos ? 0 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw cc::UsageError("--grid expects name=lo:hi:step");
  axis.lo = std::strtod(rest.substr(0, c1).c_str(), nullptr);
  axis.hi = std::strtod(rest.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr);
  axis.step = std::strtod(rest.substr(c2 + 1).c_str(), nullptr);
  if (!(axis.step > 0)) throw cc::UsageError("grid step must be positive");
  return axis;
}

std::vector<double> axis_values(const GridAxis& a) {
  std::vector<double> out;
  for (double v = a.lo; v <= a.hi + 1e-12 * std::max(1.0, std::fabs(a.hi)); v += a.step)
    out.push_back(v);
  return out;
}

int run_sweep(const std::string& generator, const std::vector<std::string>& params,
              const std::vector<std::string>& grid_specs) {
  if (generator.empty()) throw cc::UsageError("sweep requires --generator");
  if (grid_specs.empty() || grid_specs.size() > 2)
    throw cc::UsageError("sweep requires one or two --grid axes");
  std::vector<GridAxis> axes;
  for (const std::string& gs : grid_specs) axes.push_back(parse_axis(gs));

  std::vector<std::vector<double>> points;
  for (double v0 : axis_values(axes[0])) {
    if (axes.size() == 1) {
      points.push_back({v0});
    } else {
      for (double v1 : axis_values(axes[1])) points.push_back({v0, v1});
    }
  }

  std::ostringstream os;
  for (const GridAxis& a : axes) os << a.name << '\t';
  os << "verdict\tlambda_M\tell0\th\ttransition\n";
  std::string prev_verdict;
  bool transition_marked = false;
  for (const std::vector<double>& pt : points) {
    cc::GeneratorSpec spec = parse_generator_args(generator, params);
    for (std::size_t a = 0; a < axes.size(); ++a) spec.params[axes[a].name] = {pt[a]};
    char buf[40];
    for (std::size_t a = 0; a < axes.size(); ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", pt[a]);
      os << buf << '\t';
    }
    std::string verdict;
    double lambda_m = 0, ell0 = 0, h = 0;
    bool have_h = false;
    try {
      std::unique_ptr<cc::BaseGraph> g = cc::build_generator(spec);
      if (!g->finite()) throw cc::TruncationRequired();
      cc::GfSolution sol = cc::analyze(*g, cc::AnalyzeOptions{});
      verdict = sol.verdict == cc::AnalyticClass::transient ? "transient" : "recurrent_or_critical";
      lambda_m = sol.spectral_attachment;
      ell0 = sol.ell0;
      if (sol.verdict == cc::AnalyticClass::transient && sol.lambda_finite) {
        h = sol.h;
        have_h = true;
      }
    } catch (const cc::Error& e) {
      verdict = std::string("error:") + e.code();
    }
    os << verdict << '\t';
    std::snprintf(buf, sizeof buf, "%.17g", lambda_m);
    os << buf << '\t';
    std::snprintf(buf, sizeof buf, "%.17g", ell0);
    os << buf << '\t';
    if (have_h) {
      std::snprintf(buf, sizeof buf, "%.17g", h);
      os << buf;
    } else {
      os << '-';
    }
    const bool flip = !prev_verdict.empty() && verdict != prev_verdict && !transition_marked;
    os << '\t' << (flip ? "*" : "-") << '\n';
    if (flip) transition_marked = true;
    prev_verdict = verdict;
  }
  std::fputs(os.str().c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"directed covers: classification, rate of escape, entropy"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cc::kToolName) + " " + cc::kVersion);

  GraphArgs gargs;
  std::string format = "json";
  std::uint64_t seed = 0;
  double horizon = 100000, runs = 0, trials = 10000, cap = 100000;
  double radius = 50, levels = 32, budget = 2000000, tol = 1e-12, powers = 60, n_lyap = 2000;
  std::string dump_path;
  bool structural = false;

  CLI::App* validate = app.add_subcommand("validate", "parse and validate a spec");
  add_graph_options(validate, gargs);
  validate->add_option("--format", format, "json");
  bool expand = false;
  validate->add_flag("--expand", expand, "rewrite parallel edges into clone vertices and print the spec");

  CLI::App* classify = app.add_subcommand("classify", "spectral + analytic + empirical verdicts");
  add_graph_options(classify, gargs);
  classify->add_option("--radius", radius, "truncation radius for infinite graphs");
  classify->add_option("--runs", runs, "Monte Carlo runs (0 disables)");
  classify->add_option("--horizon", horizon, "steps per run");
  classify->add_option("--seed", seed, "RNG seed");
  classify->add_option("--tol", tol, "power-iteration tolerance");
  classify->add_option("--powers", powers, "matrix powers for the r_inf proxy");

  CLI::App* growth = app.add_subcommand("growth", "level counts |T_n| of the cover");
  add_graph_options(growth, gargs);
  growth->add_option("--levels", levels, "maximum level N");
  growth->add_option("--budget", budget, "distinct-label budget");
  std::string growth_format = "tsv";
  growth->add_option("--format", growth_format, "tsv|json");

  CLI::App* simulate = app.add_subcommand("simulate", "one seeded walk on the cover");
  add_graph_options(simulate, gargs);
  simulate->add_option("--horizon", horizon, "number of steps");
  simulate->add_option("--seed", seed, "RNG seed");
  simulate->add_option("--dump-trajectory", dump_path, "write full trajectory TSV here");

  CLI::App* couple = app.add_subcommand("couple", "branching-process coupling check");
  add_graph_options(couple, gargs);
  couple->add_option("--trials", trials, "trials per side");
  couple->add_option("--cap", cap, "population cap (survival proxy)");
  couple->add_option("--horizon", horizon, "walk horizon");
  couple->add_option("--seed", seed, "RNG seed");

  CLI::App* analyze = app.add_subcommand("analyze", "generating-function pipeline");
  add_graph_options(analyze, gargs);
  analyze->add_option("--radius", radius, "truncation radius for infinite graphs")
      ->default_val(0.0);
  analyze->add_option("--tol", tol, "fixed-point tolerance");
  analyze->add_option("--format", format, "json|tsv");
  analyze->add_flag("--structural-check", structural,
                    "check the equal-depth backward-probability condition");

  CLI::App* rwdcre = app.add_subcommand("rwdcre", "random environment classification on Z");
  std::vector<std::string> rw_params;
  rwdcre->add_option("--params", rw_params,
                     "omega_values=..., omega_probs=..., nu_values=..., nu_probs=...");
  rwdcre->add_option("--n", n_lyap, "Lyapunov product length");
  rwdcre->add_option("--trials", trials, "Lyapunov trials");
  rwdcre->add_option("--seed", seed, "RNG seed");

  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep, one TSV row per grid point");
  std::vector<std::string> grid_specs;
  sweep->add_option("--generator", gargs.generator, "generator name");
  sweep->add_option("--params", gargs.params, "fixed generator parameters k=v");
  sweep->add_option("--grid", grid_specs, "axis spec name=lo:hi:step (max 2)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) return run_validate(gargs, format, expand);
    if (app.got_subcommand(classify))
      return run_classify(gargs, radius, runs, horizon, seed, tol, powers);
    if (app.got_subcommand(growth)) return run_growth(gargs, levels, budget, growth_format);
    if (app.got_subcommand(simulate)) return run_simulate(gargs, horizon, seed, dump_path);
    if (app.got_subcommand(couple)) return run_couple(gargs, trials, cap, horizon, seed);
    if (app.got_subcommand(analyze)) return run_analyze(gargs, radius, tol, format, structural);
    if (app.got_subcommand(rwdcre)) return run_rwdcre(rw_params, n_lyap, trials, seed);
    if (app.got_subcommand(sweep)) return run_sweep(gargs.generator, gargs.params, grid_specs);
  } catch (const cc::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const cc::Error& e) {
    emit(cc::error_report(e));
    std::fprintf(stderr, "error [%s]: %s\n", e.code().c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
