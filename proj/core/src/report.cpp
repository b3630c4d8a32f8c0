#include "conecover/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "conecover/version.hpp"

namespace conecover {

namespace {

void format_double(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "null";
    return;
  }
  if (std::isinf(v)) {
    out += v > 0 ? "\"inf\"" : "\"-inf\"";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void escape_string(std::string& out, const std::string& s) {
  out += '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

void dump_rec(std::string& out, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        escape_string(out, it.key());
        out += ": ";
        dump_rec(out, it.value(), indent, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        dump_rec(out, v, indent, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case Json::value_t::string: escape_string(out, j.get_ref<const std::string&>()); return;
    case Json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; return;
    case Json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      return;
    case Json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      return;
    case Json::value_t::number_float: format_double(out, j.get<double>()); return;
    default: out += "null"; return;
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json double_array(const std::vector<double>& v) {
  Json arr = Json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

Json labelled_map(const std::vector<std::string>& labels, const std::vector<double>& values) {
  Json obj = Json::object();
  for (std::size_t i = 0; i < values.size() && i < labels.size(); ++i) obj[labels[i]] = values[i];
  return obj;
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump_rec(out, j, indent, 0);
  out += '\n';
  return out;
}

Json report_envelope(const std::string& subcommand, const std::string& spec_hash,
                     std::uint64_t seed, const Json& tolerances) {
  Json env = Json::object();
  env["tool"] = kToolName;
  env["version"] = kVersion;
  env["subcommand"] = subcommand;
  env["spec_hash"] = spec_hash;
  env["seed"] = seed;
  env["tolerances"] = tolerances;
  return env;
}

Json to_json(const GfSolution& sol) {
  Json j = Json::object();
  j["verdict"] = sol.verdict == AnalyticClass::transient ? "transient" : "recurrent_or_critical";
  j["U_root"] = sol.U_root;
  j["spectral_attachment_lambda_M"] = sol.spectral_attachment;
  j["F"] = labelled_map(sol.labels, sol.F);
  if (sol.verdict == AnalyticClass::transient) {
    j["lambda_finite"] = sol.lambda_finite;
    if (sol.lambda_finite) {
      j["Fprime"] = labelled_map(sol.labels, sol.Fp);
      j["Gbar"] = labelled_map(sol.labels, sol.Gbar);
      Json q = Json::object();
      for (std::size_t i = 0; i < sol.Q.size(); ++i) q[sol.labels[i]] = double_array(sol.Q[i]);
      j["Q"] = q;
      j["nu"] = labelled_map(sol.labels, sol.nu);
      j["Lambda"] = sol.Lambda;
      j["ell0"] = sol.ell0;
      Json ellw = Json::object();
      for (const WeightRate& w : sol.ell_w) ellw[w.name] = w.value;
      j["ell_w"] = ellw;
      j["h"] = sol.h;
      j["h_Q"] = sol.hq;
      j["dim_lower"] = sol.dim_lower;
      j["dim_point"] = sol.dim_point;
      j["dim_upper"] = sol.dim_upper;
      j["dim_point_caveat"] = GfSolution::kDimPointCaveat;
      j["eps0"] = sol.eps0;
    } else {
      j["ell0"] = 0.0;
      j["note"] = "Lambda = infinity: liminf l(X_n)/n = 0, no entropy computed";
    }
  } else {
    j["ell0"] = 0.0;
  }
  Json conv = Json::object();
  conv["f_iterations"] = sol.f_iterations;
  conv["f_residual"] = sol.f_residual;
  conv["f_converged"] = sol.f_converged;
  conv["fprime_dense_solve"] = sol.fp_dense;
  if (sol.fp_iterations > 0) conv["fprime_iterations"] = sol.fp_iterations;
  conv["stationary_residual"] = sol.stationary_residual;
  if (sol.truncation_radius) conv["truncation_radius"] = *sol.truncation_radius;
  j["convergence"] = conv;
  return j;
}

Json to_json(const GfBracket& bracket) {
  Json j = Json::object();
  j["agree"] = bracket.agree;
  j["max_F_gap"] = bracket.max_gap;
  j["positive_recurrence_of_Q"] = "assumption unverified on a truncation";
  if (bracket.structural_check_passed)
    j["structural_check_passed"] = *bracket.structural_check_passed;
  j["lower"] = to_json(bracket.lower);
  j["upper"] = to_json(bracket.upper);
  return j;
}

Json to_json(const CwCertificate& cert) {
  Json j = Json::object();
  j["certified"] = cert.certified;
  j["lambda"] = cert.lambda;
  j["radius"] = cert.radius;
  j["margin"] = cert.margin;
  j["worst_vertex"] = cert.worst_vertex;
  if (!cert.certified) j["deficit"] = cert.deficit;
  j["note"] = cert.note;
  return j;
}

Json to_json(const SpectralReport& rep) {
  Json j = Json::object();
  j["matrix"] = rep.kind == MatrixKind::Adjacency ? "A" : "M";
  j["rho_lower"] = rep.rho_lower;
  j["radius"] = rep.radius;
  if (rep.cw) j["cw_certificate"] = to_json(*rep.cw);
  if (!rep.r_inf_estimate.empty()) j["r_inf_estimate"] = double_array(rep.r_inf_estimate);
  j["note"] = rep.note;
  return j;
}

Json to_json(const ErgodicityReport& rep) {
  Json j = Json::object();
  switch (rep.verdict) {
    case ErgodicVerdict::ergodic: j["verdict"] = "ergodic"; break;
    case ErgodicVerdict::non_ergodic: j["verdict"] = "non_ergodic"; break;
    default: j["verdict"] = "inconclusive";
  }
  j["lambda_lower"] = rep.lambda_lower;
  j["radius"] = rep.radius;
  j["r_inf_proxy"] = double_array(rep.r_inf_proxy);
  j["reason"] = rep.reason;
  return j;
}

Json to_json(const LevelCounts& lc) {
  Json j = Json::object();
  j["complete"] = lc.complete;
  j["n_reached"] = lc.n_reached;
  Json counts = Json::array();
  for (const BigInt& c : lc.counts) counts.push_back(c.str());
  j["counts"] = counts;
  j["roots"] = double_array(lc.roots());
  return j;
}

Json to_json(const WalkRun& run) {
  Json j = Json::object();
  j["seed"] = run.seed;
  j["n_steps"] = run.n_steps;
  j["final_height"] = run.final_height;
  j["max_height"] = run.max_height;
  j["returns_to_root"] = run.returns_to_root;
  j["loop_traversals"] = run.loop_traversals;
  j["visited_loop"] = run.visited_loop;
  Json l = Json::object();
  for (std::size_t i = 0; i < run.l_final.size(); ++i) l[run.weight_names[i]] = run.l_final[i];
  j["l_final"] = l;
  return j;
}

Json to_json(const RecurrenceEvidence& ev) {
  Json j = Json::object();
  j["horizon"] = ev.horizon;
  j["runs"] = ev.runs;
  j["seed"] = ev.seed;
  j["returns_mean"] = ev.returns_mean;
  j["returns_max"] = ev.returns_max;
  j["escape_quarter_fraction"] = ev.escape_quarter_fraction;
  j["no_return_fraction"] = ev.no_return_fraction;
  j["q_walk_hat"] = ev.q_walk_hat;
  j["q_walk_se"] = ev.q_walk_se;
  j["note"] = ev.note;
  return j;
}

Json to_json(const EntropySpeedEstimate& est) {
  Json j = Json::object();
  j["horizon"] = est.horizon;
  j["runs"] = est.runs;
  j["seed"] = est.seed;
  j["escape_fraction"] = est.escape_fraction;
  j["ell0_hat"] = est.ell0_hat;
  j["ell0_se"] = est.ell0_se;
  j["lambda_hat"] = est.lambda_hat;
  j["lambda_se"] = est.lambda_se;
  j["h_hat"] = est.h_hat;
  j["h_se"] = est.h_se;
  j["hq_hat"] = est.hq_hat;
  Json ellw = Json::object();
  for (std::size_t i = 0; i < est.ellw_hat.size(); ++i) {
    Json w = Json::object();
    w["value"] = est.ellw_hat[i];
    w["se"] = est.ellw_se[i];
    ellw[est.weight_names[i]] = w;
  }
  j["ell_w"] = ellw;
  j["exits_used"] = est.exits_used;
  j["runs_with_exits"] = est.runs_with_exits;
  j["q_source"] = est.q_source;
  j["exit_margin"] = est.exit_margin;
  j["burn_exits"] = est.burn_exits;
  return j;
}

Json to_json(const CoupleReport& rep) {
  Json j = Json::object();
  j["trials"] = rep.trials;
  j["cap"] = rep.cap;
  j["horizon"] = rep.horizon;
  j["seed"] = rep.seed;
  j["q_gw_hat"] = rep.q_gw_hat;
  j["q_gw_se"] = rep.q_gw_se;
  j["q_walk_hat"] = rep.q_walk_hat;
  j["q_walk_se"] = rep.q_walk_se;
  j["bias_allowance"] = rep.bias_allowance;
  j["compatible"] = rep.compatible;
  j["note"] = rep.note;
  return j;
}

Json to_json(const RwdcreReport& rep) {
  Json j = Json::object();
  switch (rep.verdict) {
    case RwdcreClass::transient: j["verdict"] = "transient"; break;
    case RwdcreClass::recurrent: j["verdict"] = "recurrent"; break;
    default: j["verdict"] = "inconclusive";
  }
  j["lambda_case"] = rep.lambda_case;
  if (rep.lambda_case != 1) {
    j["lambda_lo"] = rep.lambda_lo;
    j["lambda_hi"] = rep.lambda_hi;
    j["gamma"] = rep.gamma;
    j["gamma_se"] = rep.gamma_se;
    j["threshold"] = rep.threshold;
    j["monte_carlo"] = rep.monte_carlo;
    j["n"] = rep.n;
    j["trials"] = rep.trials;
  }
  if (!rep.note.empty()) j["note"] = rep.note;
  return j;
}

Json error_report(const Error& err) {
  Json j = Json::object();
  Json e = Json::object();
  e["code"] = err.code();
  e["message"] = err.what();
  j["error"] = e;
  return j;
}

std::string levels_tsv(const LevelCounts& lc) {
  std::ostringstream os;
  os << "n\tcount\troot\n";
  const std::vector<double> roots = lc.roots();
  for (std::size_t n = 0; n < lc.counts.size(); ++n) {
    os << n << '\t' << lc.counts[n].str() << '\t';
    if (n == 0)
      os << '-';
    else
      os << fmt17(roots[n - 1]);
    os << '\n';
  }
  return os.str();
}

std::string gf_tsv_header() {
  return "spec_id\tverdict\tell0\th\tdim_lower\tdim_point\tdim_upper\n";
}

std::string gf_tsv_row(const std::string& spec_id, const GfSolution& sol) {
  std::ostringstream os;
  os << spec_id << '\t'
     << (sol.verdict == AnalyticClass::transient ? "transient" : "recurrent_or_critical") << '\t'
     << fmt17(sol.ell0) << '\t';
  if (sol.verdict == AnalyticClass::transient && sol.lambda_finite)
    os << fmt17(sol.h) << '\t' << fmt17(sol.dim_lower) << '\t' << fmt17(sol.dim_point) << '\t'
       << fmt17(sol.dim_upper);
  else
    os << "-\t-\t-\t-";
  os << '\n';
  return os.str();
}

}  // namespace conecover
