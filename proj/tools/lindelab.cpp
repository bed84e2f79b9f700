// lindelab: exact convergence-rate diagnostics for sums of independent
// discrete random variables. Subcommands: fraction, delta, verify, constants,
// search, profile.
//
// Exit codes: 0 success, 2 input parse error, 3 configuration error (bad
// g-spec, unavailable constant), 4 resource limit, 5 verification failure.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lindelab/corpus.hpp"
#include "lindelab/report_io.hpp"
#include "lindelab/verify.hpp"

namespace {

using namespace lindelab;

constexpr int kExitParse = 2;
constexpr int kExitConfig = 3;
constexpr int kExitResource = 4;
constexpr int kExitVerification = 5;

SumContext load_context(const std::vector<std::string>& dist_paths, int n) {
  if (dist_paths.empty()) throw DistributionError("at least one --dist file is required");
  std::vector<DiscreteDistribution> summands;
  for (int r = 0; r < n; ++r)
    for (const auto& path : dist_paths) summands.push_back(load_distribution(path));
  return SumContext::make(std::move(summands));
}

double parse_eps(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw GSpecError("cannot parse eps value: " + s);
  }
}

void write_or_print(const std::optional<std::string>& out_path, const std::string& content) {
  if (out_path) {
    std::ofstream out(*out_path);
    if (!out) throw GSpecError("cannot open output file: " + *out_path);
    out << content;
  } else {
    std::cout << content;
  }
}

struct FractionOptions {
  std::string kind = "esseen";
  std::string g_spec = "identity";
  std::string eps = "1";
  double gamma = 1.0;
  std::vector<std::string> dists;
  int n = 1;
  bool json = false;
};

int cmd_fraction(const FractionOptions& opt) {
  SumContext ctx = load_context(opt.dists, opt.n);
  GFunction g = parse_gfunction(opt.g_spec, ctx.bn());
  FractionParams params{g, parse_eps(opt.eps), opt.gamma};
  FractionValue v;
  if (opt.kind == "esseen")
    v = esseen_fraction(ctx, params);
  else if (opt.kind == "rozovskii")
    v = rozovskii_fraction(ctx, params);
  else
    throw GSpecError("--kind must be esseen or rozovskii");
  if (opt.json) {
    nlohmann::json j{{"kind", opt.kind},
                     {"value", v.value},
                     {"m_term", v.m_term},
                     {"sup_term", v.sup_term},
                     {"witness", {{"z", v.sup.z}, {"approach", to_string(v.sup.approach)}}},
                     {"bn", ctx.bn()},
                     {"ctx", ctx.describe()}};
    std::cout << j.dump(2) << "\n";
  } else {
    // one-sided limits print as z- / z+ (e.g. "eps-" for the right endpoint)
    const char* side = v.sup.approach == SupApproach::from_left
                           ? "-"
                           : (v.sup.approach == SupApproach::from_right ? "+" : "");
    std::printf("kind      %s\n", opt.kind.c_str());
    std::printf("ctx       %s  (B_n = %.17g)\n", ctx.describe().c_str(), ctx.bn());
    std::printf("value     %.17g\n", v.value);
    std::printf("m_term    %.17g\n", v.m_term);
    std::printf("sup_term  %.17g\n", v.sup_term);
    std::printf("witness   z* = %.17g%s (%s)\n", v.sup.z, side,
                std::string(to_string(v.sup.approach)).c_str());
  }
  return 0;
}

struct DeltaOptions {
  std::vector<std::string> dists;
  int n = 1;
  double prune = 0.0;
  bool json = false;
};

int cmd_delta(const DeltaOptions& opt) {
  SumContext ctx = load_context(opt.dists, opt.n);
  SumDistribution s = convolve(ctx, opt.prune);
  double delta = kolmogorov_delta(s);
  if (opt.json) {
    nlohmann::json j{{"delta", delta},
                     {"dropped_mass", s.dropped_mass},
                     {"atoms", s.atoms.size()},
                     {"bn", ctx.bn()},
                     {"ctx", ctx.describe()}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("delta        %.17g\n", delta);
    std::printf("droppedMass  %.17g\n", s.dropped_mass);
    std::printf("atoms        %zu\n", s.atoms.size());
  }
  return 0;
}

struct VerifyOptions {
  std::string corpus_path;
  std::string only = "all";
  std::optional<std::string> out_path;
  std::string format = "json";
  int threads = 0;
};

int cmd_verify(const VerifyOptions& opt) {
  CorpusSpec spec = opt.corpus_path.empty() ? default_corpus() : load_corpus_spec(opt.corpus_path);
  bool failed = false;
  nlohmann::json out = nlohmann::json::object();
  std::string csv;

  if (opt.only == "all" || opt.only == "inequalities") {
    CorpusResult result = run_corpus(spec, all_inequalities(), opt.threads);
    std::printf("inequalities: %zu checks, %zu failures\n", result.summary.total,
                result.summary.failures);
    for (const auto& [id, ratio] : result.summary.max_ratio)
      std::printf("  %-18s max ratio %.6f\n", id.c_str(), ratio);
    size_t shown = 0;
    for (const auto& r : result.reports) {
      if (r.pass || shown >= 10) break;
      std::printf("  FAIL %s ctx=%s delta=%.6g > %.6g * %.6g\n", r.inequality.c_str(),
                  r.ctx.c_str(), r.delta_n, r.constant_used, r.fraction_value);
      ++shown;
    }
    failed |= result.summary.failures > 0;
    out["inequalities"] = corpus_result_to_json(result);
    csv = reports_to_csv(result.reports);
  }
  if (opt.only == "all" || opt.only == "theorem2") {
    CorpusSpec dense = opt.corpus_path.empty() ? identity_suite_corpus() : spec;
    auto ctxs = build_contexts(dense);
    std::vector<double> eps_grid{0.25, 0.5, 1.0, 2.0, 4.0};
    std::vector<double> gamma_grid{0.25, 1.0, 4.0};
    SuiteResult t2 = run_theorem2_suite(ctxs, eps_grid, gamma_grid, opt.threads);
    std::printf("theorem2: %zu checks over %zu contexts, %zu failures\n", t2.checks,
                ctxs.size(), t2.failures.size());
    for (size_t i = 0; i < t2.failures.size() && i < 10; ++i)
      std::printf("  FAIL %s\n", t2.failures[i].c_str());
    failed |= !t2.ok();
    out["theorem2"] = {{"checks", t2.checks}, {"failures", t2.failures}};
  }
  if (opt.only == "all" || opt.only == "properties") {
    CorpusSpec dense = opt.corpus_path.empty() ? identity_suite_corpus() : spec;
    auto ctxs = build_contexts(dense);
    SuiteResult props = run_property_suite(ctxs, opt.threads);
    std::printf("properties: %zu checks over %zu contexts, %zu failures\n", props.checks,
                ctxs.size(), props.failures.size());
    for (size_t i = 0; i < props.failures.size() && i < 10; ++i)
      std::printf("  FAIL %s\n", props.failures[i].c_str());
    failed |= !props.ok();
    out["properties"] = {{"checks", props.checks}, {"failures", props.failures}};
  }

  if (opt.out_path) {
    if (opt.format == "csv")
      write_or_print(opt.out_path, csv);
    else
      write_or_print(opt.out_path, out.dump(2) + "\n");
  }
  return failed ? kExitVerification : 0;
}

int cmd_constants(bool json) {
  GammaStarConstants gs = gamma_star_constants();
  A1LowerBound lb = a1_lower_bound();
  if (json) {
    nlohmann::json j{{"x0", gs.x0},
                     {"kappa", gs.kappa},
                     {"gamma_star", gs.gamma_star},
                     {"a1_lower", lb.value},
                     {"a1_lower_argmax", lb.x_star}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("x0          %.17g\n", gs.x0);
    std::printf("kappa       %.17g\n", gs.kappa);
    std::printf("gamma_star  %.17g\n", gs.gamma_star);
    std::printf("A1_lower    %.17g  (argmax x = %.17g)\n", lb.value, lb.x_star);
  }
  return 0;
}

struct SearchOptions {
  std::string id = "kp";
  std::string family = "two-point";
  int n = 1;
  long budget = 10000;
  std::string g_spec = "clip-above:B";
  std::string eps = "1";
  double gamma = 1.0;
  bool json = false;
};

int cmd_search(const SearchOptions& opt) {
  auto id = inequality_from_string(opt.id);
  if (!id) throw GSpecError("unknown inequality id: " + opt.id);
  FamilySearchSpec spec;
  spec.family = opt.family;
  spec.n = opt.n;
  spec.g_spec = opt.g_spec;
  spec.eps = parse_eps(opt.eps);
  spec.gamma = opt.gamma;
  SearchResult r = lower_bound_search(*id, spec, opt.budget);
  if (opt.json) {
    nlohmann::json j{{"id", opt.id},
                     {"best_ratio", r.best_ratio},
                     {"best_ctx", r.best_ctx},
                     {"best_params", r.best_params},
                     {"evals", r.evals}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("best_ratio  %.17g\n", r.best_ratio);
    std::printf("best_ctx    %s\n", r.best_ctx.c_str());
    std::printf("evals       %ld\n", r.evals);
  }
  return 0;
}

struct ProfileOptions {
  std::vector<std::string> dists;
  int n = 1;
  std::string g_spec = "identity";
  std::string eps = "2";
  double gamma = 1.0;
  int points = 400;
  std::optional<std::string> out_path;
};

// Plot-ready data: z, L_n(z), z L_n(z), and the weighted objective on a
// geometric grid over (0, eps).
int cmd_profile(const ProfileOptions& opt) {
  SumContext ctx = load_context(opt.dists, opt.n);
  GFunction g = parse_gfunction(opt.g_spec, ctx.bn());
  double eps = parse_eps(opt.eps);
  if (!std::isfinite(eps)) throw GSpecError("profile needs a finite --eps");
  std::ostringstream os;
  os.precision(17);
  os << "z,lindeberg,zL,objective\n";
  double gb = g.eval(ctx.bn());
  for (int i = 0; i < opt.points; ++i) {
    double t = (i + 1.0) / opt.points;
    double z = eps * 1e-4 * std::pow(1e4, t) * (1.0 - 1e-12);
    double L = lindeberg_fraction(ctx, z);
    double m = third_moment_fraction(ctx, z);
    double u = g.eval(z * ctx.bn()) / gb;
    double obj = u / z * (opt.gamma * std::fabs(m) + z * L);
    os << z << ',' << L << ',' << z * L << ',' << obj << '\n';
  }
  write_or_print(opt.out_path, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact convergence-rate fractions and Kolmogorov distances for sums of "
               "independent discrete random variables"};
  app.require_subcommand(1);

  FractionOptions fo;
  auto* fraction = app.add_subcommand("fraction", "evaluate a weighted fraction");
  fraction->add_option("--kind", fo.kind, "esseen or rozovskii");
  fraction->add_option("--g", fo.g_spec, "weight function spec");
  fraction->add_option("--eps", fo.eps, "range parameter (number or 'inf')");
  fraction->add_option("--gamma", fo.gamma, "balance parameter");
  fraction->add_option("--dist", fo.dists, "distribution JSON file (repeatable)");
  fraction->add_option("--n", fo.n, "replicate the listed summands n times");
  fraction->add_flag("--json", fo.json, "JSON output");

  DeltaOptions delta_opts;
  auto* delta = app.add_subcommand("delta", "exact Kolmogorov distance of the normalized sum");
  delta->add_option("--dist", delta_opts.dists, "distribution JSON file (repeatable)");
  delta->add_option("--n", delta_opts.n, "replicate the listed summands n times");
  delta->add_option("--prune", delta_opts.prune, "drop atoms below this probability");
  delta->add_flag("--json", delta_opts.json, "JSON output");

  VerifyOptions vo;
  auto* verify = app.add_subcommand("verify", "run the inequality/identity corpus");
  verify->add_option("--corpus", vo.corpus_path, "corpus spec JSON (default: built-in)");
  verify->add_option("--only", vo.only, "all | inequalities | theorem2 | properties");
  std::string out_path;
  auto* out_opt = verify->add_option("--out", out_path, "write the report here");
  verify->add_option("--format", vo.format, "json | csv");
  verify->add_option("--threads", vo.threads, "worker cap (default: env/hardware)");

  bool constants_json = false;
  auto* consts = app.add_subcommand("constants", "reproduce the derived constants");
  consts->add_flag("--json", constants_json, "JSON output");

  SearchOptions so;
  auto* search = app.add_subcommand("search", "search a family for worst-case ratios");
  search->add_option("--id", so.id, "inequality id");
  search->add_option("--family", so.family, "two-point or three-point");
  search->add_option("--n", so.n, "i.i.d. copies per context");
  search->add_option("--budget", so.budget, "objective evaluation budget");
  search->add_option("--g", so.g_spec, "weight spec for weighted inequalities");
  search->add_option("--eps", so.eps, "eps for parametrized inequalities");
  search->add_option("--gamma", so.gamma, "gamma for parametrized inequalities");
  search->add_flag("--json", so.json, "JSON output");

  ProfileOptions po;
  auto* profile = app.add_subcommand("profile", "emit plot-ready fraction profiles as CSV");
  profile->add_option("--dist", po.dists, "distribution JSON file (repeatable)");
  profile->add_option("--n", po.n, "replicate the listed summands n times");
  profile->add_option("--g", po.g_spec, "weight function spec");
  profile->add_option("--eps", po.eps, "upper end of the z range");
  profile->add_option("--gamma", po.gamma, "balance parameter");
  profile->add_option("--points", po.points, "grid size");
  std::string profile_out;
  auto* profile_out_opt = profile->add_option("--out", profile_out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*out_opt) vo.out_path = out_path;
  if (*profile_out_opt) po.out_path = profile_out;

  try {
    if (*fraction) return cmd_fraction(fo);
    if (*delta) return cmd_delta(delta_opts);
    if (*verify) return cmd_verify(vo);
    if (*consts) return cmd_constants(constants_json);
    if (*search) return cmd_search(so);
    if (*profile) return cmd_profile(po);
  } catch (const SupportTooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitResource;
  } catch (const NoConstantAvailable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const GSpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DistributionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
