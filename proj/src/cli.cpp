#include "hybrid/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "hybrid/bits.hpp"
#include "hybrid/errors.hpp"
#include "hybrid/graph.hpp"
#include "hybrid/lower_bound.hpp"
#include "hybrid/nq.hpp"
#include "hybrid/rng.hpp"
#include "hybrid/routing.hpp"
#include "hybrid/ruling.hpp"
#include "hybrid/sim.hpp"
#include "hybrid/sp_pipeline.hpp"

namespace hybrid::cli {

using graph::NodeId;
using nlohmann::json;

namespace {

// Raised for audit failures detected by the CLI itself (exit code 2).
class AuditFailure : public Error {
 public:
  using Error::Error;
};

json rat(const Rational& q) { return json::array({q.num(), q.den()}); }

struct Common {
  std::string graph_path;
  std::uint64_t seed = 1;
  std::uint64_t gamma = 1;
  double c = 2.0;
  std::string policy = "audit_fail";
  std::string out_dir;
  bool trace = false;
};

void add_common(CLI::App* cmd, Common& o, bool needs_graph) {
  auto* g = cmd->add_option("-g,--graph", o.graph_path, "edge-list file");
  if (needs_graph) g->required();
  cmd->add_option("--seed", o.seed, "64-bit seed");
  cmd->add_option("--gamma", o.gamma, "global capacity in units of O(log^2 n) bits")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--c", o.c, "w.h.p. exponent constant")->check(CLI::PositiveNumber);
  cmd->add_option("--policy", o.policy, "audit_fail | adversarial_drop")
      ->check(CLI::IsMember({"audit_fail", "adversarial_drop"}));
  cmd->add_option("--out", o.out_dir, "directory for report.json / sweep.csv");
  cmd->add_flag("--trace", o.trace, "embed the execution trace in the report");
}

sim::SimConfig make_config(const Common& o, std::size_t n) {
  sim::SimConfig cfg;
  cfg.gamma_bits = sim::capacity_bits(o.gamma, n);
  cfg.seed = o.seed;
  cfg.c = o.c;
  cfg.policy = o.policy == "adversarial_drop" ? sim::ViolationPolicy::adversarial_drop
                                              : sim::ViolationPolicy::audit_fail;
  return cfg;
}

std::vector<NodeId> to_nodes(const std::vector<std::uint64_t>& ids, std::size_t n,
                             const char* what) {
  std::vector<NodeId> out;
  for (const auto id : ids) {
    if (id < 1 || id > n) {
      throw ValidationError(std::string(what) + " ID " + std::to_string(id) + " outside 1.." +
                            std::to_string(n));
    }
    out.push_back(static_cast<NodeId>(id - 1));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// k distinct nodes, uniform, ascending.
std::vector<NodeId> sample_nodes(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k > n) throw ValidationError("k must lie in 1.." + std::to_string(n));
  std::vector<NodeId> all(n);
  std::iota(all.begin(), all.end(), 0);
  Rng rng(derive_seed(seed, "sources"));
  for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + rng.uniform(n - i)]);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

Rational parse_rational(const std::string& s) {
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      const auto dot = s.find('.');
      if (dot == std::string::npos) return Rational(std::stoll(s));
      const std::string frac = s.substr(dot + 1);
      std::int64_t den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      const std::int64_t whole = dot == 0 ? 0 : std::stoll(s.substr(0, dot));
      return Rational(whole * den + (frac.empty() ? 0 : std::stoll(frac)), den);
    }
    return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  } catch (const std::logic_error&) {
    throw ValidationError("cannot parse '" + s + "' as a rational");
  }
}

json envelope(const std::string& command, const std::vector<std::string>& args,
              std::uint64_t seed, json result) {
  return {{"tool", kToolName},   {"version", kVersion}, {"command", command},
          {"argv", args},        {"seed", seed},        {"result", std::move(result)}};
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + name + " under " + dir);
  f << text;
}

void emit(const json& report, const Common& o, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (!o.out_dir.empty()) write_file(o.out_dir, "report.json", text);
  out << text;
}

// Targets from --targets (fixed) or --ell (i.i.d. uniform).
struct TargetChoice {
  std::vector<std::uint64_t> ids;
  std::size_t ell = 0;
};

void add_targets(CLI::App* cmd, TargetChoice& t) {
  auto* fixed = cmd->add_option("--targets", t.ids, "target IDs (fixed targets)")->delimiter(',');
  auto* iid = cmd->add_option("--ell", t.ell, "number of i.i.d. uniform targets");
  fixed->excludes(iid);
}

std::pair<std::vector<NodeId>, routing::TargetMode> resolve_targets(const TargetChoice& t,
                                                                     std::size_t n,
                                                                     std::uint64_t seed) {
  if (!t.ids.empty()) return {to_nodes(t.ids, n, "target"), routing::TargetMode::fixed};
  if (t.ell == 0) throw ValidationError("give --targets or --ell");
  return {ruling::sample_iid_targets(n, t.ell, seed), routing::TargetMode::iid};
}

struct SourceChoice {
  std::vector<std::uint64_t> ids;
  std::size_t k = 0;
};

void add_sources(CLI::App* cmd, SourceChoice& s) {
  auto* ids = cmd->add_option("--sources", s.ids, "source IDs")->delimiter(',');
  auto* k = cmd->add_option("-k", s.k, "number of uniformly chosen sources (default: all)");
  ids->excludes(k);
}

std::vector<NodeId> resolve_sources(const SourceChoice& s, std::size_t n, std::uint64_t seed) {
  if (!s.ids.empty()) return to_nodes(s.ids, n, "source");
  return sample_nodes(n, s.k == 0 ? n : s.k, seed);
}

json ids_json(const std::vector<NodeId>& nodes) {
  json a = json::array();
  for (const auto v : nodes) a.push_back(graph::external_id(v));
  return a;
}

// ---- gen ----

struct GenOptions {
  std::string kind;
  graph::GenParams params;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_gen(const GenOptions& o, std::ostream& out) {
  const auto kind = graph::parse_graph_kind(o.kind);
  if (!kind) throw ValidationError("unknown graph kind '" + o.kind + "'");
  const auto g = graph::generate(*kind, o.params, o.seed);
  if (o.output.empty()) {
    out << graph::format_edge_list(g);
  } else {
    graph::write_edge_list_file(g, o.output);
  }
  return kExitOk;
}

// ---- nq ----

int cmd_nq(const Common& o, std::size_t k, const std::vector<std::string>& args,
           std::ostream& out) {
  const auto g = graph::read_edge_list_file(o.graph_path);
  sim::ExecutionTrace trace;
  const auto rep = nq::nq_distributed(g, k, o.gamma, make_config(o, g.node_count()), &trace);
  const auto oracle = nq::nq_oracle(g, k, o.gamma);
  json result = nq::to_json(rep);
  result["oracle_agrees"] = oracle.value == rep.value && oracle.d_star == rep.d_star;
  if (o.trace) result["trace"] = trace.to_json();
  emit(envelope("nq", args, o.seed, std::move(result)), o, out);
  return kExitOk;
}

// ---- helpers ----

int cmd_helpers(const Common& o, std::size_t k, const TargetChoice& tc,
                const std::vector<std::string>& args, std::ostream& out) {
  const auto g = graph::read_edge_list_file(o.graph_path);
  const std::size_t n = g.node_count();
  const auto [targets, mode] = resolve_targets(tc, n, o.seed);
  sim::ExecutionTrace trace;
  sim::Network net(g, make_config(o, n), &trace);
  const auto rep = nq::nq_distributed(net, k, o.gamma);
  ruling::HelperParams params{k, o.gamma, o.c};
  const auto family = ruling::build_helper_sets(net, targets, params, rep.value);
  const auto check = ruling::verify_helpers(g, family, params);
  json result{{"nq_num", rep.value.num()},
              {"nq_den", rep.value.den()},
              {"helpers", ruling::to_json(family)},
              {"check",
               {{"size_ok", check.size_ok},
                {"locality_ok", check.locality_ok},
                {"load_ok", check.load_ok},
                {"max_memberships", check.max_memberships},
                {"max_hops", check.max_hops},
                {"detail", check.detail}}},
              {"rounds_total", net.rounds_executed()}};
  if (o.trace) result["trace"] = trace.to_json();
  emit(envelope("helpers", args, o.seed, std::move(result)), o, out);
  return check.locality_ok ? kExitOk : kExitAudit;
}

// ---- route ----

int cmd_route(const Common& o, const SourceChoice& sc, const TargetChoice& tc,
              const std::vector<std::string>& args, std::ostream& out) {
  const auto g = graph::read_edge_list_file(o.graph_path);
  const std::size_t n = g.node_count();
  routing::RouteRequest req;
  req.sources = resolve_sources(sc, n, o.seed);
  std::tie(req.targets, req.mode) = resolve_targets(tc, n, o.seed);
  req.gamma = o.gamma;
  req.c = o.c;
  const std::uint32_t f = field_bits(n);
  for (const auto s : req.sources) {
    for (const auto t : req.targets) {
      const std::uint64_t payload = derive_seed(o.seed, "payload", s, t);
      req.tokens.push_back({s, t, f >= 64 ? payload : payload & ((std::uint64_t{1} << f) - 1)});
    }
  }
  sim::ExecutionTrace trace;
  sim::Network net(g, make_config(o, n), &trace);
  const auto run = routing::run_routing(net, req);
  json result{{"sources", ids_json(req.sources)},
              {"targets", ids_json(req.targets)},
              {"mode", req.mode == routing::TargetMode::fixed ? "fixed" : "iid"},
              {"nq_num", run.nq.value.num()},
              {"nq_den", run.nq.value.den()},
              {"delivery", routing::to_json(run.report)}};
  if (o.trace) result["trace"] = trace.to_json();
  emit(envelope("route", args, o.seed, std::move(result)), o, out);
  return kExitOk;
}

// ---- ksp ----

struct KspOptions {
  std::string mode = "exact";
  double x = 4.0;
  std::string eps = "1/10";
};

int cmd_ksp(const Common& o, const SourceChoice& sc, const TargetChoice& tc,
            const KspOptions& ko, const std::vector<std::string>& args, std::ostream& out) {
  const auto g = graph::read_edge_list_file(o.graph_path);
  const std::size_t n = g.node_count();
  sp::SPInstance inst;
  inst.sources = resolve_sources(sc, n, o.seed);
  std::tie(inst.targets, inst.mode) = resolve_targets(tc, n, o.seed);
  inst.eps = parse_rational(ko.eps);
  sp::SPOptions opt;
  opt.gamma = o.gamma;
  opt.mode = ko.mode == "skeleton" ? sp::DistanceMode::skeleton : sp::DistanceMode::exact;
  opt.skeleton_x = ko.x;
  sim::ExecutionTrace ta;
  sim::ExecutionTrace tb;
  const auto res = sp::solve_k_ell_sp(g, inst, opt, make_config(o, n), &ta, &tb);
  json result = sp::to_json(res);
  result["mode"] = ko.mode;
  result["eps"] = rat(inst.eps);
  result["stretch_within_eps"] = res.stretch <= Rational(1) + inst.eps;
  if (o.trace) result["trace"] = {{"phaseA", ta.to_json()}, {"phaseB", tb.to_json()}};
  emit(envelope("ksp", args, o.seed, std::move(result)), o, out);
  return kExitOk;
}

// ---- hard / audit ----

struct HardOptions {
  std::size_t k = 0;
  std::uint64_t p_coefficient = 1;
  unsigned p_exponent = 1;
  std::size_t runs = 100;
};

json lb_json(const lower_bound::LowerBoundValue& lb) {
  return {{"v", graph::external_id(lb.v)},
          {"d_v", lb.d_v},
          {"ball", lb.ball},
          {"volume_term", rat(lb.volume_term)},
          {"distance_term", rat(lb.distance_term)},
          {"value", rat(lb.value)},
          {"chain", rat(lb.chain)},
          {"trivial", lb.trivial}};
}

int cmd_hard(const Common& o, const HardOptions& h, const std::vector<std::string>& args,
             std::ostream& out) {
  const auto g = graph::read_edge_list_file(o.graph_path);
  const auto inst =
      lower_bound::build_hard_instance(g, h.k, o.gamma, {h.p_coefficient, h.p_exponent});
  json result{{"instance", lower_bound::sidecar_json(inst)},
              {"lb_value", lb_json(lower_bound::lb_value(g, h.k, o.gamma))}};
  if (!o.out_dir.empty()) write_file(o.out_dir, "hard.el", graph::format_edge_list(inst.graph));
  emit(envelope("hard", args, o.seed, std::move(result)), o, out);
  return kExitOk;
}

int cmd_audit(const Common& o, const HardOptions& h, const std::vector<std::string>& args,
              std::ostream& out) {
  const auto g = graph::read_edge_list_file(o.graph_path);
  const auto inst =
      lower_bound::build_hard_instance(g, h.k, o.gamma, {h.p_coefficient, h.p_exponent});
  const auto exp =
      lower_bound::run_decode_experiment(inst, h.runs, o.gamma, make_config(o, g.node_count()));
  std::size_t failures = 0;
  for (const auto& t : exp.trials) failures += t.success ? 0 : 1;
  json result{{"instance", lower_bound::sidecar_json(inst)},
              {"audit", lower_bound::to_json(exp.audit)},
              {"decode_failures", failures}};
  emit(envelope("audit", args, o.seed, std::move(result)), o, out);
  if (failures > 0 || !exp.audit.holds) throw AuditFailure("information-flow audit failed");
  return kExitOk;
}

// ---- bench ----

struct BenchOptions {
  std::vector<std::string> kinds;
  std::vector<std::size_t> sizes;
  std::vector<std::string> ks{"n"};
  std::vector<std::uint64_t> gammas{1};
  std::vector<std::string> graphs;
  std::size_t ell = 1;
  double edge_probability = 0.0;
};

struct Cell {
  std::string graph;  // kind or file name
  std::optional<graph::GraphKind> kind;
  std::size_t n = 0;
  std::string k_spec;
  std::uint64_t gamma = 1;
};

struct CellResult {
  std::vector<std::string> csv;
  json row;
};

std::size_t resolve_k(const std::string& spec, std::size_t n) {
  if (spec == "n") return n;
  if (spec == "n/2") return std::max<std::size_t>(1, n / 2);
  if (spec == "sqrt") {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
  }
  try {
    std::size_t pos = 0;
    const auto k = std::stoull(spec, &pos);
    if (pos == spec.size()) return k;
  } catch (const std::logic_error&) {
  }
  throw ValidationError("cannot parse k '" + spec + "' (integer, n, n/2 or sqrt)");
}

graph::WeightedGraph bench_graph(const Cell& cell, const BenchOptions& b, std::uint64_t seed) {
  if (!cell.kind) return graph::read_edge_list_file(cell.graph);
  graph::GenParams p;
  p.n = cell.n;
  const auto side = static_cast<std::size_t>(std::sqrt(static_cast<double>(cell.n)));
  p.rows = side;
  p.cols = side == 0 ? 0 : cell.n / side;
  p.clique = cell.n / 2;
  if (*cell.kind == graph::GraphKind::barbell) p.clique = cell.n / 3;
  p.edge_probability = b.edge_probability > 0.0
                           ? b.edge_probability
                           : std::min(1.0, 4.0 * std::log(std::max<double>(2, cell.n)) /
                                               std::max<double>(1, cell.n));
  return graph::generate(*cell.kind, p, derive_seed(seed, "bench_graph", cell.n));
}

const std::vector<std::string> kSweepColumns{
    "graph",        "n",           "k",          "gamma",        "nq_num",
    "nq_den",       "d_star",      "sqrt_bound", "nq_within_bound", "nq_rounds",
    "phaseA_rounds", "phaseB_rounds", "max_rx_bits", "gamma_bits", "stretch_num",
    "stretch_den",  "status"};

CellResult run_cell(const Cell& cell, const BenchOptions& b, const Common& o) {
  CellResult r;
  std::vector<std::string> v(kSweepColumns.size());
  v[0] = cell.graph;
  v[3] = std::to_string(cell.gamma);
  try {
    const auto g = bench_graph(cell, b, o.seed);
    const std::size_t n = g.node_count();
    const std::size_t k = resolve_k(cell.k_spec, n);
    if (k < 1 || k > n) throw ValidationError("k = " + std::to_string(k) + " outside 1..n");
    v[1] = std::to_string(n);
    v[2] = std::to_string(k);
    Common co = o;
    co.gamma = cell.gamma;
    const auto cfg = make_config(co, n);
    const auto rep = nq::nq_distributed(g, k, cell.gamma, cfg);
    const Rational ratio(static_cast<std::int64_t>(k), static_cast<std::int64_t>(cell.gamma));
    std::ostringstream bound;
    bound << std::fixed << std::setprecision(6) << std::sqrt(ratio.to_double()) + 1.0;
    const bool within =
        rep.value >= Rational(1) && sqrt_at_most(rep.value - Rational(1), ratio);
    v[4] = std::to_string(rep.value.num());
    v[5] = std::to_string(rep.value.den());
    v[6] = std::to_string(rep.d_star);
    v[7] = bound.str();
    v[8] = within ? "true" : "false";
    v[9] = std::to_string(rep.rounds_total);
    sp::SPInstance inst;
    inst.sources = sample_nodes(n, k, derive_seed(o.seed, "bench_sources", n, k));
    inst.targets = sample_nodes(n, std::min(b.ell, n), derive_seed(o.seed, "bench_targets", n, k));
    inst.mode = routing::TargetMode::fixed;
    sp::SPOptions opt;
    opt.gamma = cell.gamma;
    const auto res = sp::solve_k_ell_sp(g, inst, opt, cfg);
    v[10] = std::to_string(res.rounds_phase_a);
    v[11] = std::to_string(res.rounds_phase_b);
    v[12] = std::to_string(res.delivery.max_rx_bits);
    v[13] = std::to_string(cfg.gamma_bits);
    v[14] = std::to_string(res.stretch.num());
    v[15] = std::to_string(res.stretch.den());
    v[16] = "ok";
    r.row = {{"nq", nq::to_json(rep)}, {"ksp", sp::to_json(res)}};
  } catch (const std::exception& e) {
    v[16] = std::string("error: ") + e.what();
  }
  r.row["cells"] = json::object();
  for (std::size_t i = 0; i < kSweepColumns.size(); ++i) r.row["cells"][kSweepColumns[i]] = v[i];
  r.csv = std::move(v);
  return r;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (const char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

int cmd_bench(const Common& o, const BenchOptions& b, const std::vector<std::string>& args,
              std::ostream& out) {
  std::vector<Cell> cells;
  for (const auto& kind_name : b.kinds) {
    const auto kind = graph::parse_graph_kind(kind_name);
    if (!kind) throw ValidationError("unknown graph kind '" + kind_name + "'");
    for (const auto n : b.sizes) {
      for (const auto& k : b.ks) {
        for (const auto gamma : b.gammas) {
          cells.push_back({std::string(graph::to_string(*kind)), kind, n, k, gamma});
        }
      }
    }
  }
  for (const auto& file : b.graphs) {
    for (const auto& k : b.ks) {
      for (const auto gamma : b.gammas) cells.push_back({file, std::nullopt, 0, k, gamma});
    }
  }
  if (cells.empty()) throw ValidationError("empty sweep grid");

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) results[i] = run_cell(cells[i], b, o);
  };
  const std::size_t workers = std::max<std::size_t>(
      1, std::min<std::size_t>(cells.size(), std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  for (std::size_t i = 0; i < kSweepColumns.size(); ++i) csv << (i ? "," : "") << kSweepColumns[i];
  csv << "\n";
  json rows = json::array();
  for (auto& r : results) {
    for (std::size_t i = 0; i < r.csv.size(); ++i) csv << (i ? "," : "") << csv_escape(r.csv[i]);
    csv << "\n";
    rows.push_back(std::move(r.row));
  }
  if (!o.out_dir.empty()) write_file(o.out_dir, "sweep.csv", csv.str());
  emit(envelope("bench", args, o.seed, {{"rows", std::move(rows)}}), o, out);
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator and experiments for shortest paths in hybrid networks", kToolName};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a graph as an edge list");
  gen_cmd->add_option("--kind", gen.kind, "path|cycle|star|grid|complete|er|barbell|lollipop|binary_tree|random_tree")
      ->required();
  gen_cmd->add_option("--n", gen.params.n, "node count");
  gen_cmd->add_option("--rows", gen.params.rows, "grid rows");
  gen_cmd->add_option("--cols", gen.params.cols, "grid columns");
  gen_cmd->add_option("--clique", gen.params.clique, "clique size (barbell, lollipop)");
  gen_cmd->add_option("--p", gen.params.edge_probability, "edge probability (er)");
  gen_cmd->add_option("--max-edge-weight", gen.params.max_edge_weight, "uniform weights in [1, w]");
  gen_cmd->add_option("--seed", gen.seed, "64-bit seed");
  gen_cmd->add_option("-o,--output", gen.output, "edge-list file (default: stdout)");

  Common common;
  std::size_t k = 0;
  TargetChoice targets;
  SourceChoice sources;
  KspOptions ksp;
  HardOptions hard;
  BenchOptions bench;

  auto* nq_cmd = app.add_subcommand("nq", "compute NQ(G, k, gamma) in the simulator");
  add_common(nq_cmd, common, true);
  nq_cmd->add_option("-k", k, "number of sources")->required()->check(CLI::PositiveNumber);

  auto* helpers_cmd = app.add_subcommand("helpers", "build adaptive helper sets");
  add_common(helpers_cmd, common, true);
  helpers_cmd->add_option("-k", k, "number of sources")->required()->check(CLI::PositiveNumber);
  add_targets(helpers_cmd, targets);

  auto* route_cmd = app.add_subcommand("route", "route one token per (source, target)");
  add_common(route_cmd, common, true);
  add_sources(route_cmd, sources);
  add_targets(route_cmd, targets);

  auto* ksp_cmd = app.add_subcommand("ksp", "solve (k, ell)-shortest paths");
  add_common(ksp_cmd, common, true);
  add_sources(ksp_cmd, sources);
  add_targets(ksp_cmd, targets);
  ksp_cmd->add_option("--mode", ksp.mode, "exact | skeleton")
      ->check(CLI::IsMember({"exact", "skeleton"}));
  ksp_cmd->add_option("--x", ksp.x, "skeleton sampling parameter");
  ksp_cmd->add_option("--eps", ksp.eps, "stretch slack, e.g. 1/10");

  auto* hard_cmd = app.add_subcommand("hard", "build a lower-bound instance");
  add_common(hard_cmd, common, true);
  hard_cmd->add_option("-k", hard.k, "number of sources")->required()->check(CLI::PositiveNumber);
  hard_cmd->add_option("--p-coef", hard.p_coefficient, "p(n) = coef * n^exp");
  hard_cmd->add_option("--p-exp", hard.p_exponent, "p(n) = coef * n^exp");

  auto* audit_cmd = app.add_subcommand("audit", "decode experiment and information-flow audit");
  add_common(audit_cmd, common, true);
  audit_cmd->add_option("-k", hard.k, "number of sources")->required()->check(CLI::PositiveNumber);
  audit_cmd->add_option("--p-coef", hard.p_coefficient, "p(n) = coef * n^exp");
  audit_cmd->add_option("--p-exp", hard.p_exponent, "p(n) = coef * n^exp");
  audit_cmd->add_option("--runs", hard.runs, "Monte Carlo runs")->check(CLI::PositiveNumber);

  auto* bench_cmd = app.add_subcommand("bench", "sweep a (graph, k, gamma) grid");
  add_common(bench_cmd, common, false);
  bench_cmd->remove_option(bench_cmd->get_option("--graph"));
  bench_cmd->remove_option(bench_cmd->get_option("--gamma"));
  bench_cmd->add_option("--kind", bench.kinds, "graph kinds")->delimiter(',');
  bench_cmd->add_option("--n", bench.sizes, "node counts")->delimiter(',');
  bench_cmd->add_option("-k", bench.ks, "k values: integer, n, n/2 or sqrt")->delimiter(',');
  bench_cmd->add_option("--gamma", bench.gammas, "gamma values")->delimiter(',');
  bench_cmd->add_option("-g,--graph", bench.graphs, "edge-list files")->delimiter(',');
  bench_cmd->add_option("--ell", bench.ell, "fixed targets per cell");
  bench_cmd->add_option("--p", bench.edge_probability, "edge probability for er");

  std::vector<std::string> argv_store{kToolName};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, out);
    if (*nq_cmd) return cmd_nq(common, k, args, out);
    if (*helpers_cmd) return cmd_helpers(common, k, targets, args, out);
    if (*route_cmd) return cmd_route(common, sources, targets, args, out);
    if (*ksp_cmd) return cmd_ksp(common, sources, targets, ksp, args, out);
    if (*hard_cmd) return cmd_hard(common, hard, args, out);
    if (*audit_cmd) return cmd_audit(common, hard, args, out);
    if (*bench_cmd) return cmd_bench(common, bench, args, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitAudit;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace hybrid::cli
