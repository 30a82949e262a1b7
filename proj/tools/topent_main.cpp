// topent: dimensional topological entropies of finite dynamical systems and
// shifts of finite type, plus a machine-checked inequality suite.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topent/topent.hpp"

namespace {

using topent::Json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct RunConfig {
  std::string system;
  std::string subset = "all";
  std::vector<double> epsilons;
  std::optional<int> n_min, n_max;
  double s_lo = 0.0, s_hi = 8.0;
  double tol = 1e-9;
  int threads = 0;
  std::uint64_t seed = 1;
  std::string format = "nats";
  std::string out;
  std::string csv;
  std::string decomp = "auto";  // auto | trivial
  int trunc_depth = 8;

  void add_common(CLI::App* cmd, bool with_subset = true) {
    cmd->add_option("--system", system, "built-in name or JSON file")->required();
    if (with_subset) cmd->add_option("--subset", subset, "subset name (default: all)");
    cmd->add_option("--eps", epsilons, "radii, strictly decreasing");
    cmd->add_option("--n-min", n_min, "minimal ball order N");
    cmd->add_option("--n-max", n_max, "maximal ball order");
    cmd->add_option("--s-lo", s_lo, "exponent search lower bound");
    cmd->add_option("--s-hi", s_hi, "exponent search upper bound");
    cmd->add_option("--tol", tol, "bisection tolerance");
    cmd->add_option("--threads", threads, "worker threads (0 = auto)");
    cmd->add_option("--seed", seed, "run seed (recorded in outputs)");
    cmd->add_option("--format", format, "nats or bits")
        ->check(CLI::IsMember({"nats", "bits"}));
    cmd->add_option("--out", out, "output JSON path");
    cmd->add_option("--trunc-depth", trunc_depth, "shift truncation depth for extensions");
  }

  topent::ScaleSchedule schedule(bool symbolic) const {
    topent::ScaleSchedule s;
    s.n_min = n_min.value_or(symbolic ? 8 : 2);
    s.n_max = n_max.value_or(symbolic ? 40 : 8);
    s.epsilons = epsilons.empty() ? std::vector<double>{0.5, 0.25} : epsilons;
    s.s_lo = s_lo;
    s.s_hi = s_hi;
    s.tol = tol;
    s.validate();
    return s;
  }
};

double unit_scale(const std::string& format) {
  return format == "bits" ? 1.0 / std::log(2.0) : 1.0;
}

void scale_estimate_units(topent::EntropyEstimate& est, double u) {
  if (u == 1.0) return;
  est.value *= u;
  est.lower *= u;
  est.upper *= u;
  for (auto& [eps, e] : est.per_epsilon) e *= u;
  for (auto& [k, v] : est.stats)
    if (k != "power_iterations") v *= u;
  for (auto& c : est.crossings) c.s_critical *= u;
}

void write_with_sidecar(const std::string& path, const Json& j, double elapsed_s) {
  topent::write_json_file(path, j);
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  Json meta;
  meta["timestamp_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  meta["elapsed_seconds"] = elapsed_s;
  topent::write_json_file(path + ".meta.json", meta);
}

void emit(const std::string& out, const Json& j, double elapsed_s) {
  if (out.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_with_sidecar(out, j, elapsed_s);
}

std::string capacity_csv(const topent::EntropyEstimate& est) {
  std::ostringstream os;
  os << "n,epsilon,r_lower,r_upper,exact_flag,spanning_count\n";
  for (const auto& p : est.scale_points)
    os << p.order << "," << fmt(p.epsilon) << "," << fmt(p.count_lower) << ","
       << fmt(p.count_upper) << "," << (p.exact ? 1 : 0) << "," << fmt(p.spanning_count) << "\n";
  return os.str();
}

std::string crossing_csv(const topent::EntropyEstimate& est) {
  std::ostringstream os;
  os << "epsilon,N,s_critical,value_at_crossing,optimal_flag\n";
  for (const auto& c : est.crossings)
    os << fmt(c.epsilon) << "," << c.order << "," << fmt(c.s_critical) << ","
       << fmt(c.value_at_crossing) << "," << (c.optimal ? 1 : 0) << "\n";
  return os.str();
}

Json estimate_document(const RunConfig& cfg, const std::string& kind, const std::string& track,
                       const topent::EntropyEstimate& est) {
  Json j;
  j["schema"] = "topent.entropy.v1";
  j["kind"] = kind;
  j["system"] = cfg.system;
  j["subset"] = cfg.subset;
  j["track"] = track;
  j["units"] = cfg.format;
  j["seed"] = cfg.seed;
  Json body = topent::estimate_to_json(est);
  for (auto& [k, v] : body.items()) j[k] = std::move(v);
  j["schedule"] = topent::schedule_to_json(cfg.schedule(track == "symbolic"));
  return j;
}

int cmd_entropy(const RunConfig& cfg, const std::string& kind) {
  using namespace topent;
  const auto t0 = std::chrono::steady_clock::now();
  BuiltinOptions opt;
  opt.truncation_depth = cfg.trunc_depth;
  const SystemSource src = load_system(cfg.system, opt);
  const bool symbolic = src.symbolic();
  const ScaleSchedule sched = cfg.schedule(symbolic);

  EntropyEstimate est;
  if (symbolic) {
    const SymbolicSubset z = resolve_symbolic_subset(src, cfg.subset);
    if (kind == "capacity") {
      est = capacity_entropy_estimate(*src.sft, z, sched);
      if (z.full) {
        // Exact track for the invariant compact full space: stabilized word
        // ratios cross-checked against the dominant growth rate.
        const EntropyEstimate exact = sft_entropy_exact(*src.sft, sched.n_max);
        est.value = exact.value;
        est.lower = std::min(est.lower, exact.lower);
        est.upper = std::max(est.upper, exact.upper);
        for (const auto& [k, v] : exact.stats) est.stats[k] = v;
        for (const auto& n : exact.notes) est.note(n);
      }
    } else if (kind == "bowen") {
      est = bowen_entropy_estimate(*src.sft, z, sched);
    } else {
      std::vector<SymbolicDecomposition> decomps;
      if (cfg.decomp == "auto") decomps.push_back(first_symbol_decomposition(*src.sft, z));
      est = packing_entropy_estimate(*src.sft, z, sched, std::move(decomps));
    }
  } else {
    const SubsetRef z = resolve_finite_subset(src, cfg.subset);
    if (kind == "capacity") {
      est = capacity_entropy_estimate(z, sched);
    } else if (kind == "bowen") {
      est = bowen_entropy_estimate(z, sched);
    } else {
      std::vector<Decomposition> decomps;
      if (cfg.decomp == "auto") decomps.push_back(orbit_decomposition(z));
      est = packing_entropy_estimate(z, sched, std::move(decomps));
    }
  }
  scale_estimate_units(est, unit_scale(cfg.format));

  if (!cfg.csv.empty())
    write_text_file(cfg.csv, kind == "capacity" ? capacity_csv(est) : crossing_csv(est));
  const auto t1 = std::chrono::steady_clock::now();
  emit(cfg.out, estimate_document(cfg, kind, symbolic ? "symbolic" : "finite", est),
       std::chrono::duration<double>(t1 - t0).count());
  return 0;
}

// The per-(n, epsilon) separated/spanning table, as CSV.
int cmd_capacity_table(const RunConfig& cfg) {
  using namespace topent;
  BuiltinOptions opt;
  opt.truncation_depth = cfg.trunc_depth;
  const SystemSource src = load_system(cfg.system, opt);
  const ScaleSchedule sched = cfg.schedule(src.symbolic());
  EntropyEstimate est;
  if (src.symbolic())
    est = capacity_entropy_estimate(*src.sft, resolve_symbolic_subset(src, cfg.subset), sched);
  else
    est = capacity_entropy_estimate(resolve_finite_subset(src, cfg.subset), sched);
  const std::string csv = capacity_csv(est);
  if (cfg.out.empty())
    std::cout << csv;
  else
    write_text_file(cfg.out, csv);
  return 0;
}

int cmd_crossing_table(const RunConfig& cfg, const std::string& kind,
                       const std::string& emit_path) {
  using namespace topent;
  BuiltinOptions opt;
  opt.truncation_depth = cfg.trunc_depth;
  const SystemSource src = load_system(cfg.system, opt);
  const bool symbolic = src.symbolic();
  const ScaleSchedule sched = cfg.schedule(symbolic);

  EntropyEstimate est;
  Json audit;
  if (symbolic) {
    const SymbolicSubset z = resolve_symbolic_subset(src, cfg.subset);
    est = kind == "bowen" ? bowen_entropy_estimate(*src.sft, z, sched)
                          : packing_entropy_estimate(*src.sft, z, sched);
  } else {
    const SubsetRef z = resolve_finite_subset(src, cfg.subset);
    est = kind == "bowen" ? bowen_entropy_estimate(z, sched)
                          : packing_entropy_estimate(z, sched);
    if (!emit_path.empty()) {
      // Certified ball family at the deepest crossing, for audit.
      const double eps = sched.epsilons.back();
      const double s = est.crossings.empty() ? 0.0 : est.crossings.back().s_critical;
      if (kind == "bowen")
        audit = cover_solution_to_json(z.system(), bowen_outer_measure(z, s, eps, sched));
      else
        audit = packing_solution_to_json(z.system(), packing_premeasure(z, s, eps, sched));
    }
  }
  if (!emit_path.empty()) {
    if (symbolic)
      throw config_error("ball-family dumps are available on the finite track only");
    write_json_file(emit_path, audit);
  }
  const std::string csv = crossing_csv(est);
  if (cfg.out.empty())
    std::cout << csv;
  else
    write_text_file(cfg.out, csv);
  return 0;
}

topent::ScaleSchedule theorem_schedule() {
  topent::ScaleSchedule s;
  s.n_min = 4;
  s.n_max = 20;
  s.epsilons = {0.5, 0.25};
  s.s_hi = 8.0;
  return s;
}

std::vector<std::pair<std::string, topent::TheoremProductsInstance>> theorem_battery() {
  using namespace topent;
  const SftSpec full2 = SftSpec::full_shift(2);
  const SftSpec full3 = SftSpec::full_shift(3);
  const SftSpec gm = SftSpec::from_forbidden({"0", "1"}, {{1, 1}});
  const ScaleSchedule sched = theorem_schedule();
  std::vector<std::pair<std::string, TheoremProductsInstance>> out;
  out.emplace_back("full2 x full3",
                   TheoremProductsInstance{full2, full3, SymbolicSubset::whole(),
                                           SymbolicSubset::whole(), sched});
  out.emplace_back("goldenmean x full2",
                   TheoremProductsInstance{gm, full2, SymbolicSubset::whole(),
                                           SymbolicSubset::whole(), sched});
  out.emplace_back("goldenmean x goldenmean",
                   TheoremProductsInstance{gm, gm, SymbolicSubset::whole(),
                                           SymbolicSubset::whole(), sched});
  out.emplace_back("full2[0] x full3",
                   TheoremProductsInstance{full2, full3,
                                           SymbolicSubset::cylinders(full2, {{0}}),
                                           SymbolicSubset::whole(), sched});
  out.emplace_back("goldenmean[0] x full2[1]",
                   TheoremProductsInstance{gm, full2, SymbolicSubset::cylinders(gm, {{0}}),
                                           SymbolicSubset::cylinders(full2, {{1}}), sched});
  return out;
}

int cmd_verify_all(std::uint64_t seed, int count, int max_points, int max_order, int threads,
                   const std::string& out) {
  using namespace topent;
  const auto t0 = std::chrono::steady_clock::now();
  FuzzParams params;
  params.seed = seed;
  params.count = count;
  params.max_points = max_points;
  params.max_order = max_order;
  params.threads = threads;
  std::vector<CheckReport> reports = fuzz(params);
  for (const auto& [name, instance] : theorem_battery())
    reports.push_back(check_theorem_products(instance, name));
  std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
    return a.check != b.check ? a.check < b.check : a.instance < b.instance;
  });

  std::map<std::string, std::pair<int, int>> tally;  // check -> (pass, fail)
  double worst_slack = std::numeric_limits<double>::infinity();
  for (const auto& r : reports) {
    auto& t = tally[r.check];
    (r.pass ? t.first : t.second) += 1;
    worst_slack = std::min(worst_slack, r.slack);
  }
  int failures = 0;
  for (const auto& [check, t] : tally) {
    std::cout << (t.second == 0 ? "PASS " : "FAIL ") << check << ": " << t.first << " passed, "
              << t.second << " failed\n";
    failures += t.second;
  }
  std::cout << (failures == 0 ? "PASS" : "FAIL") << " verify: " << reports.size()
            << " checks, " << failures << " failures\n";

  Json j;
  j["schema"] = "topent.verify.v1";
  j["seed"] = seed;
  j["count"] = count;
  j["failures"] = failures;
  Json arr = Json::array();
  for (const auto& r : reports) {
    Json e;
    e["check"] = r.check;
    e["instance"] = r.instance;
    e["pass"] = r.pass;
    e["slack"] = r.slack;
    if (!r.pass) e["witness"] = r.witness;
    arr.push_back(std::move(e));
  }
  j["reports"] = std::move(arr);
  const auto t1 = std::chrono::steady_clock::now();
  if (!out.empty()) write_with_sidecar(out, j, std::chrono::duration<double>(t1 - t0).count());
  return failures == 0 ? 0 : 1;
}

int cmd_verify_replay(const std::string& path) {
  using namespace topent;
  const Json j = detail_io::read_json_file(path);
  std::vector<Json> witnesses;
  if (j.contains("reports")) {
    for (const auto& r : j.at("reports"))
      if (r.contains("witness")) witnesses.push_back(r.at("witness"));
  } else {
    witnesses.push_back(j);
  }
  if (witnesses.empty()) {
    std::cout << "no witnesses to replay\n";
    return 0;
  }
  int failures = 0;
  for (const auto& w : witnesses) {
    const CheckReport rep = replay_witness(w);
    std::cout << (rep.pass ? "PASS " : "FAIL ") << rep.check << " slack=" << fmt(rep.slack)
              << "\n";
    if (!rep.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

int cmd_report(const std::vector<std::string>& paths, const std::string& out) {
  using namespace topent;
  std::ostringstream os;
  os << "run_id,series,epsilon,n,value\n";
  for (const std::string& path : paths) {
    const Json j = detail_io::read_json_file(path);
    if (!j.contains("schema") || j.at("schema") != "topent.entropy.v1")
      throw config_error("not an entropy run document: " + path);
    const std::string run_id = std::filesystem::path(path).stem().string();
    for (const auto& p : j.at("scale_points"))
      os << run_id << ",log_r," << fmt(p.at("epsilon").get<double>()) << ","
         << p.at("n").get<int>() << "," << fmt(p.at("log_r_lower").get<double>()) << "\n";
    for (const auto& c : j.at("crossings"))
      os << run_id << ",s_critical," << fmt(c.at("epsilon").get<double>()) << ","
         << c.at("N").get<int>() << "," << fmt(c.at("s_critical").get<double>()) << "\n";
    for (const auto& pe : j.at("per_epsilon"))
      os << run_id << ",exponent," << fmt(pe.at("epsilon").get<double>()) << ",,"
         << fmt(pe.at("exponent").get<double>()) << "\n";
  }
  if (out.empty())
    std::cout << os.str();
  else
    write_text_file(out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dimensional topological entropies of finite systems and shifts of finite type"};
  app.require_subcommand(1);

  RunConfig entropy_cfg;
  CLI::App* entropy = app.add_subcommand("entropy", "estimate an entropy and write JSON/CSV");
  entropy->require_subcommand(1);
  std::string entropy_kind;
  for (const char* kind : {"capacity", "bowen", "packing"}) {
    CLI::App* sub = entropy->add_subcommand(kind);
    entropy_cfg.add_common(sub);
    sub->add_option("--csv", entropy_cfg.csv, "also write the per-scale CSV here");
    sub->add_option("--decomp", entropy_cfg.decomp, "packing decompositions: auto or trivial")
        ->check(CLI::IsMember({"auto", "trivial"}));
    sub->callback([&entropy_kind, kind] { entropy_kind = kind; });
  }

  RunConfig capacity_cfg;
  CLI::App* capacity = app.add_subcommand("capacity", "per-(n, epsilon) separated-count CSV");
  capacity_cfg.add_common(capacity);

  RunConfig bowen_cfg;
  std::string emit_cover;
  CLI::App* bowen = app.add_subcommand("bowen", "outer-measure critical exponents, CSV");
  bowen_cfg.add_common(bowen);
  bowen->add_option("--emit-cover", emit_cover, "dump the certified cover family as JSON");

  RunConfig packing_cfg;
  std::string emit_packing;
  CLI::App* packing = app.add_subcommand("packing", "packing-premeasure critical exponents, CSV");
  packing_cfg.add_common(packing);
  packing->add_option("--emit-packing", emit_packing,
                      "dump the certified packing family as JSON");

  CLI::App* verify = app.add_subcommand("verify", "run the inequality suite");
  verify->require_subcommand(1);
  std::uint64_t v_seed = 1;
  int v_count = 100, v_max_points = 12, v_max_order = 4, v_threads = 0;
  std::string v_out;
  CLI::App* verify_all = verify->add_subcommand("all", "fuzzed fixed-scale checks + theorem suite");
  verify_all->add_option("--seed", v_seed, "fuzz seed");
  verify_all->add_option("--count", v_count, "number of fuzz instances");
  verify_all->add_option("--max-points", v_max_points, "max points per random system");
  verify_all->add_option("--max-order", v_max_order, "max Bowen order");
  verify_all->add_option("--threads", v_threads, "worker threads (0 = auto)");
  verify_all->add_option("--out", v_out, "write the JSON report here");
  std::string replay_path;
  CLI::App* verify_replay = verify->add_subcommand("replay", "replay a stored witness or report");
  verify_replay->add_option("file", replay_path, "witness or report JSON")->required();

  std::vector<std::string> report_paths;
  std::string report_out;
  CLI::App* report = app.add_subcommand("report", "merge entropy run JSONs into one CSV");
  report->add_option("runs", report_paths, "entropy run JSON files")->required();
  report->add_option("--out", report_out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "topent: config-error: " << e.what() << "\n";
    return static_cast<int>(topent::ExitCode::config);
  }

  try {
    if (entropy->parsed()) return cmd_entropy(entropy_cfg, entropy_kind);
    if (capacity->parsed()) return cmd_capacity_table(capacity_cfg);
    if (bowen->parsed()) return cmd_crossing_table(bowen_cfg, "bowen", emit_cover);
    if (packing->parsed()) return cmd_crossing_table(packing_cfg, "packing", emit_packing);
    if (verify->parsed()) {
      if (verify_all->parsed())
        return cmd_verify_all(v_seed, v_count, v_max_points, v_max_order, v_threads, v_out);
      return cmd_verify_replay(replay_path);
    }
    if (report->parsed()) return cmd_report(report_paths, report_out);
  } catch (const topent::resource_error& e) {
    std::cerr << "topent: resource-error: " << e.what() << "\n";
    return static_cast<int>(topent::ExitCode::resource);
  } catch (const topent::config_error& e) {
    std::cerr << "topent: config-error: " << e.what() << "\n";
    return static_cast<int>(topent::ExitCode::config);
  } catch (const std::invalid_argument& e) {
    std::cerr << "topent: config-error: " << e.what() << "\n";
    return static_cast<int>(topent::ExitCode::config);
  } catch (const std::exception& e) {
    std::cerr << "topent: error: " << e.what() << "\n";
    return static_cast<int>(topent::ExitCode::config);
  }
  return 0;
}
