#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jetcalc/curvature.hpp"
#include "jetcalc/errors.hpp"
#include "jetcalc/jetpoly.hpp"
#include "jetcalc/morse.hpp"
#include "jetcalc/reparam.hpp"
#include "jetcalc/serialize.hpp"

#ifndef JETCALC_VERSION
#define JETCALC_VERSION "0.0.0"
#endif

namespace jetcalc::cli {

/// Bad command line: unknown subcommand or flag, missing or repeated flag.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// --help was given; carries the help text.
struct HelpRequested {
  std::string text;
};

struct CommandOptions {
  std::optional<int> k, r, m, n, l, kmax, times, max_order, p;
  std::optional<std::uint64_t> samples, seed;
  std::optional<std::string> input, left, right, curvature, variant, config;
  std::vector<double> eps;  // empty when not given
};

struct CommandRequest {
  std::string subcommand;  // dim, delta, invariant-check, gen, sym-coeffs, integrate, scaling-report
  std::string generator;   // wronskian, bracket, qk, coords when subcommand == gen
  CommandOptions options;
  std::vector<std::string> echo;  // arguments minus --threads and --output
  std::optional<std::string> output;
  std::optional<unsigned> threads;
};

struct ReportDocument {
  std::vector<std::string> command;
  Json payload;
  std::string table;

  Json document() const {
    Json d;
    d["tool"] = "jetcalc";
    d["version"] = JETCALC_VERSION;
    d["command"] = command;
    d["payload"] = payload;
    return d;
  }
};

namespace detail {

inline std::vector<std::string> strip_runtime_flags(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a == "--threads" || a == "--output") {
      ++i;
      continue;
    }
    if (a.starts_with("--threads=") || a.starts_with("--output=")) continue;
    out.push_back(a);
  }
  return out;
}

}  // namespace detail

/// Validates the argument list (program name excluded) into a request.
inline CommandRequest parse_request(const std::vector<std::string>& args) {
  CommandRequest req;
  CommandOptions& o = req.options;
  CLI::App app{"jetcalc: jet differentials, reparametrization invariants and Morse curvature integrals", "jetcalc"};
  app.require_subcommand(1, 1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::Throw);

  std::optional<std::string> output;
  std::optional<unsigned> threads;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--output", output, "write the JSON report to FILE");
    sub->add_option("--threads", threads, "worker threads (performance only)")->check(CLI::PositiveNumber);
  };
  auto file_opt = [](CLI::App* sub, const char* name, std::optional<std::string>& target, const char* help) {
    return sub->add_option(name, target, help)->check(CLI::ExistingFile);
  };
  auto metric_opts = [&](CLI::App* sub) {
    sub->add_option("--p", o.p, "metric exponent (default 2 lcm(1..k))");
    sub->add_option("--eps", o.eps, "level weights eps_1,eps_2,... (default 0.2^s)")->delimiter(',');
    file_opt(sub, "--config", o.config, "JSON file with \"p\" and \"eps\"");
  };

  auto* dim = app.add_subcommand("dim", "dimension of the weighted-degree m fiber");
  dim->add_option("--k", o.k)->required();
  dim->add_option("--r", o.r)->required();
  dim->add_option("--m", o.m)->required();

  auto* del = app.add_subcommand("delta", "formal derivative of a polynomial");
  file_opt(del, "--input", o.input, "polynomial file")->required();
  del->add_option("--times", o.times, "number of derivatives (default 1)")->check(CLI::NonNegativeNumber);

  auto* inv = app.add_subcommand("invariant-check", "reparametrization invariance of a polynomial");
  file_opt(inv, "--input", o.input, "polynomial file")->required();

  auto* gen = app.add_subcommand("gen", "invariant generators");
  gen->require_subcommand(1, 1);
  auto* wr = gen->add_subcommand("wronskian", "Wronskian of a list of polynomials");
  file_opt(wr, "--input", o.input, "JSON list of polynomials")->required();
  wr->add_option("--max-order", o.max_order, "order budget");
  auto* br = gen->add_subcommand("bracket", "bracket of two homogeneous polynomials");
  file_opt(br, "--left", o.left, "polynomial file")->required();
  file_opt(br, "--right", o.right, "polynomial file")->required();
  auto* qk = gen->add_subcommand("qk", "level-k bracket family");
  qk->add_option("--k", o.k)->required();
  qk->add_option("--r", o.r)->required();
  auto* co = gen->add_subcommand("coords", "invariant coordinate numerators");
  co->add_option("--k", o.k)->required();
  co->add_option("--r", o.r)->required();

  auto* sym = app.add_subcommand("sym-coeffs", "curvature coefficients on a symmetric power");
  file_opt(sym, "--curvature", o.curvature, "curvature file")->required();
  sym->add_option("--l", o.l)->required();

  auto* integ = app.add_subcommand("integrate", "Monte Carlo curvature integrals per Morse index");
  integ->add_option("--variant", o.variant)->required()->check(CLI::IsMember({"gg", "inv"}));
  integ->add_option("--k", o.k)->required();
  integ->add_option("--n", o.n)->required();
  integ->add_option("--r", o.r)->required();
  file_opt(integ, "--curvature", o.curvature, "curvature file")->required();
  integ->add_option("--samples", o.samples)->required();
  integ->add_option("--seed", o.seed)->required();
  metric_opts(integ);

  auto* scal = app.add_subcommand("scaling-report", "invariant-variant estimates for k = 1..kmax");
  scal->add_option("--kmax", o.kmax)->required();
  scal->add_option("--n", o.n)->required();
  scal->add_option("--r", o.r)->required();
  file_opt(scal, "--curvature", o.curvature, "curvature file")->required();
  scal->add_option("--samples", o.samples)->required();
  scal->add_option("--seed", o.seed)->required();
  metric_opts(scal);

  for (auto* sub : {dim, del, inv, wr, br, qk, co, sym, integ, scal}) common(sub);

  if (!args.empty() && !args.front().starts_with("-") && !app.get_subcommand_no_throw(args.front()))
    throw UsageError("unknown subcommand " + args.front());
  std::vector<std::string> reversed(args.rbegin(), args.rend());  // CLI11 consumes from the back
  try {
    app.parse(reversed);
  } catch (const CLI::RequiredError& e) {
    // Name every missing flag of the selected subcommand, not just the first.
    const CLI::App* active = &app;
    while (!active->get_subcommands().empty()) active = active->get_subcommands().front();
    std::string missing;
    for (const CLI::Option* opt : active->get_options())
      if (opt->get_required() && opt->count() == 0) missing += (missing.empty() ? "" : ", ") + opt->get_name();
    throw UsageError(missing.empty() ? std::string(e.what()) : "missing " + missing);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* s : app.get_subcommands())
      target = s->get_subcommands().empty() ? s : s->get_subcommands().front();
    throw HelpRequested{target->help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  req.subcommand = app.get_subcommands().front()->get_name();
  if (req.subcommand == "gen") req.generator = gen->get_subcommands().front()->get_name();
  req.echo = detail::strip_runtime_flags(args);
  req.output = output;
  req.threads = threads;
  return req;
}

namespace detail {

inline std::string coeff_string(const GaussianRational& c) {
  std::ostringstream os;
  os << c;
  return os.str();
}

inline JetPolynomial read_polynomial(const std::string& path) { return polynomial_from_json(read_json_file(path)); }

inline MetricParams metric_params(const CommandOptions& o, int k) {
  MetricParams m = MetricParams::defaults(k);
  if (o.config) {
    const Json cfg = read_json_file(*o.config);
    if (cfg.contains("p")) m.p = jetcalc::detail::small_int(cfg.at("p"), "p");
    if (cfg.contains("eps")) {
      if (!cfg.at("eps").is_array()) throw InputError("config \"eps\" must be a list");
      m.eps.clear();
      for (const auto& e : cfg.at("eps")) {
        if (!e.is_number()) throw InputError("config \"eps\" entries must be numbers");
        m.eps.push_back(e.get<double>());
      }
    }
  }
  if (o.p) m.p = *o.p;
  if (!o.eps.empty()) m.eps = o.eps;
  m.validate(k);
  return m;
}

inline CurvatureTensor read_curvature(const CommandOptions& o, bool check_shape) {
  CurvatureTensor c = curvature_from_json(read_json_file(*o.curvature));
  if (check_shape && (c.n() != *o.n || c.r() != *o.r))
    throw InputError("curvature file has n = " + std::to_string(c.n()) + ", r = " + std::to_string(c.r()) +
                     " but --n " + std::to_string(*o.n) + " --r " + std::to_string(*o.r) + " was given");
  return c;
}

inline unsigned resolve_threads(const CommandRequest& req) {
  if (req.threads) return *req.threads;
  if (const char* env = std::getenv("JETCALC_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 4096) return static_cast<unsigned>(v);
    throw UsageError("JETCALC_THREADS must be a positive integer");
  }
  return 0;
}

inline std::string fixed(double x, int precision = 10) {
  if (!std::isfinite(x)) return "n/a";
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

// Left-aligned columns separated by two spaces.
inline std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) w[c] = header[c].size();
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size() && c < w.size(); ++c) w[c] = std::max(w[c], row[c].size());
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::string cell = cells[c];
      if (c + 1 < cells.size()) cell.resize(w[c], ' ');
      out += (c ? "  " : "") + cell;
    }
    os << out << '\n';
  };
  line(header);
  std::vector<std::string> rule;
  for (auto width : w) rule.push_back(std::string(width, '-'));
  line(rule);
  for (const auto& row : rows) line(row);
  return os.str();
}

inline std::string family_table(const Json& family) {
  std::vector<std::vector<std::string>> rows;
  int i = 1;
  for (const auto& m : family) {
    const JetPolynomial p = polynomial_from_json(m);
    rows.push_back({std::to_string(i++), m.at("weight").is_null() ? "-" : m.at("weight").dump(), p.to_string()});
  }
  return table({"#", "weight", "polynomial"}, rows);
}

inline std::string estimate_table(const IntegralEstimate& e) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& q : e.index)
    rows.push_back({std::to_string(q.q), fixed(q.value), fixed(q.std_error), std::to_string(q.count)});
  std::ostringstream os;
  os << table({"q", "I_q", "stderr", "count"}, rows);
  os << "alternating sum  " << fixed(e.alternating) << " +- " << fixed(e.alternating_std_error) << '\n';
  os << "degenerate       " << e.degenerate << '\n';
  os << "prefactor        " << fixed(e.prefactor) << '\n';
  os << "samples / seed   " << e.samples << " / " << e.seed << '\n';
  os << "measure          standard complex Gaussian per jet level\n";
  return os.str();
}

inline Json weight_json(const JetPolynomial& p) {
  const auto d = homogeneous_degree(p);
  return d ? Json(*d) : Json(nullptr);
}

inline ReportDocument run_generator(const CommandRequest& req) {
  const auto& o = req.options;
  ReportDocument doc;
  Json family = Json::array();
  Json payload;
  payload["generator"] = req.generator;
  if (req.generator == "wronskian") {
    const Json in = read_json_file(*o.input);
    const Json& list = in.is_object() && in.contains("polynomials") ? in.at("polynomials") : in;
    if (!list.is_array()) throw InputError("wronskian input must be a list of polynomials");
    std::vector<JetPolynomial> polys;
    for (const auto& p : list) polys.push_back(polynomial_from_json(p));
    const JetPolynomial w = wronskian(polys, o.max_order);
    Json m = to_json(w);
    m["weight"] = weight_json(w);
    family.push_back(std::move(m));
  } else if (req.generator == "bracket") {
    const JetPolynomial b = bracket(read_polynomial(*o.left), read_polynomial(*o.right));
    Json m = to_json(b);
    m["weight"] = weight_json(b);
    family.push_back(std::move(m));
  } else if (req.generator == "qk") {
    const GeneratorFamily fam = qk_family(*o.k, *o.r);
    payload["level"] = fam.level;
    payload["rank"] = fam.rank;
    for (const auto& m : fam.members) family.push_back(to_json(m));
    if (fam.members.empty()) payload["empty_reason"] = fam.empty_reason;
  } else {
    for (const auto& c : invariant_coords(*o.k, *o.r)) family.push_back(to_json(c));
  }
  doc.table = family_table(family);
  if (payload.contains("empty_reason")) doc.table += "empty family: " + payload["empty_reason"].get<std::string>() + "\n";
  payload["family"] = std::move(family);
  doc.payload = std::move(payload);
  return doc;
}

inline ReportDocument dispatch(const CommandRequest& req) {
  const auto& o = req.options;
  ReportDocument doc;
  const std::string& sub = req.subcommand;
  if (sub == "dim") {
    const std::uint64_t d = dim_fiber(*o.k, *o.r, *o.m);
    doc.payload["dim"] = d;
    doc.table = table({"k", "r", "m", "dim"},
                      {{std::to_string(*o.k), std::to_string(*o.r), std::to_string(*o.m), std::to_string(d)}});
  } else if (sub == "delta") {
    const JetPolynomial p = delta(read_polynomial(*o.input), o.times.value_or(1));
    doc.payload["polynomial"] = to_json(p);
    doc.table = "delta^" + std::to_string(o.times.value_or(1)) + " = " + p.to_string() + "\n";
  } else if (sub == "invariant-check") {
    const JetPolynomial p = read_polynomial(*o.input);
    const InvarianceReport rep = invariance_weight(p);
    doc.payload["invariant"] = rep.invariant;
    doc.payload["weight"] = rep.weight ? Json(*rep.weight) : Json(nullptr);
    std::ostringstream os;
    os << "invariant  " << (rep.invariant ? "yes" : "no") << '\n';
    if (rep.weight) os << "weight     " << *rep.weight << '\n';
    if (rep.witness) {
      const auto& w = *rep.witness;
      Json point = Json::array();
      for (const auto& [v, val] : w.point) {
        Json e;
        e["order"] = v.order;
        e["component"] = v.component;
        e["value"] = to_json(val);
        point.push_back(std::move(e));
      }
      Json wj;
      wj["phi"] = to_json(w.phi);
      wj["point"] = std::move(point);
      wj["pulled_back"] = to_json(w.pulled_back);
      wj["expected"] = to_json(w.expected);
      wj["reference_weight"] = w.reference_weight;
      doc.payload["witness"] = std::move(wj);
      os << "witness    pullback = " << coeff_string(w.pulled_back) << ", a_1^" << w.reference_weight
         << " P = " << coeff_string(w.expected) << '\n';
    }
    doc.table = os.str();
  } else if (sub == "gen") {
    doc = run_generator(req);
  } else if (sub == "sym-coeffs") {
    const CurvatureTensor c = read_curvature(o, false);
    const SymPowerCoeffs s = sym_power_metric_coeffs(c, *o.l);
    doc.payload = to_json(s);
    doc.payload["tensor"] = to_json(c);
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : doc.payload["C"])
      rows.push_back({e[0].dump(), e[1].dump(), e[2].dump(), e[3].dump(), fixed(e[4].get<double>()),
                      fixed(e[5].get<double>())});
    std::ostringstream os;
    os << "basis size " << s.dim() << '\n' << table({"i", "j", "alpha", "beta", "re", "im"}, rows);
    doc.table = os.str();
  } else if (sub == "integrate") {
    const CurvatureTensor c = read_curvature(o, true);
    const MetricParams params = metric_params(o, *o.k);
    const Variant v = *o.variant == "gg" ? Variant::gg : Variant::invariant;
    const IntegralEstimate e = mc_integrate(c, *o.k, params, v, *o.samples, *o.seed, resolve_threads(req));
    doc.payload = to_json(e);
    doc.payload["params"] = to_json(params);
    doc.table = estimate_table(e);
  } else if (sub == "scaling-report") {
    const CurvatureTensor c = read_curvature(o, true);
    const MetricParams params = metric_params(o, *o.kmax);
    const auto rows = scaling_report(c, *o.kmax, params, *o.samples, *o.seed, resolve_threads(req));
    Json jr = Json::array();
    std::vector<std::vector<std::string>> trows;
    for (const auto& row : rows) {
      Json j;
      j["k"] = row.k;
      j["total"] = jetcalc::detail::real(row.total);
      j["stderr"] = jetcalc::detail::real(row.total_std_error);
      j["ratio"] = row.ratio ? jetcalc::detail::real(*row.ratio) : Json(nullptr);
      j["ratio_stderr"] = row.ratio_std_error ? jetcalc::detail::real(*row.ratio_std_error) : Json(nullptr);
      j["estimate"] = to_json(row.estimate);
      jr.push_back(std::move(j));
      trows.push_back({std::to_string(row.k), fixed(row.total), fixed(row.total_std_error),
                       row.ratio ? fixed(*row.ratio) : "-", row.ratio_std_error ? fixed(*row.ratio_std_error) : "-"});
    }
    doc.payload["kmax"] = *o.kmax;
    doc.payload["n"] = c.n();
    doc.payload["r"] = c.r();
    doc.payload["params"] = to_json(params);
    doc.payload["seed"] = *o.seed;
    doc.payload["samples"] = *o.samples;
    doc.payload["rows"] = std::move(jr);
    doc.table = table({"k", "I(k)", "stderr", "ratio", "ratio stderr"}, trows) +
                "ratio = I(k) n! (k!)^r / (log k)^n; diagnostic only\n";
  } else {
    throw UsageError("unknown subcommand " + sub);
  }
  return doc;
}

}  // namespace detail

/// Executes a validated request; module errors are rethrown with the
/// subcommand prepended, keeping their category.
inline ReportDocument run(const CommandRequest& req) {
  const std::string where = req.generator.empty() ? req.subcommand : req.subcommand + " " + req.generator;
  ReportDocument doc;
  try {
    doc = detail::dispatch(req);
  } catch (const UsageError&) {
    throw;
  } catch (const InputError& e) {
    throw InputError(where + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(where + ": " + e.what());
  }
  doc.command = req.echo;
  return doc;
}

enum ExitCode : int { kSuccess = 0, kUsage = 2, kInput = 3, kDomain = 4, kInternal = 5 };

namespace detail {

inline int report_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  Json e;
  e["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  err << e.dump() << '\n';
  return code;
}

}  // namespace detail

/// Full command-line behavior. Without --output the JSON report is written to
/// `out` before the table; with --output it goes to the file and `out` gets the table.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    const CommandRequest req = parse_request(args);
    const ReportDocument doc = run(req);
    const std::string json = doc.document().dump(2) + "\n";
    if (req.output) {
      std::ofstream f(*req.output, std::ios::binary);
      if (!f) throw InputError("cannot write " + *req.output);
      f << json;
      if (!f) throw InputError("cannot write " + *req.output);
    } else {
      out << json << '\n';
    }
    out << doc.table;
    return kSuccess;
  } catch (const HelpRequested& h) {
    out << h.text;
    return kSuccess;
  } catch (const UsageError& e) {
    return detail::report_error(err, "usage", e.what(), kUsage);
  } catch (const InputError& e) {
    return detail::report_error(err, "input", e.what(), kInput);
  } catch (const DomainError& e) {
    return detail::report_error(err, "domain", e.what(), kDomain);
  } catch (const std::exception& e) {
    return detail::report_error(err, "internal", e.what(), kInternal);
  }
}

}  // namespace jetcalc::cli
