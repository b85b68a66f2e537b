#include "vbal/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "vbal/coloring.hpp"
#include "vbal/core.hpp"
#include "vbal/instances.hpp"
#include "vbal/io.hpp"
#include "vbal/measure.hpp"

namespace vbal {

namespace {

using json = nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Exponent exponent_flag(const std::string& flag, const std::string& text) {
  try {
    return Exponent::parse(text);
  } catch (const Error& e) {
    throw UsageError("--" + flag + ": " + e.what());
  }
}

// Metadata that `gen` leaves in comment lines ("# family hadamard seed 3",
// "# p inf q inf").
struct Provenance {
  std::string family = "file";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> p;
  std::optional<std::string> q;
};

Provenance read_provenance(const std::string& text) {
  Provenance out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto pos = line.find_first_not_of(" \t");
    if (pos == std::string::npos || line[pos] != '#') continue;
    std::istringstream words(line.substr(pos + 1));
    std::vector<std::string> w;
    for (std::string t; words >> t;) w.push_back(t);
    for (std::size_t i = 0; i + 1 < w.size(); i += 2) {
      if (w[i] == "family") out.family = w[i + 1];
      if (w[i] == "seed") out.seed = std::stoull(w[i + 1]);
      if (w[i] == "p") out.p = w[i + 1];
      if (w[i] == "q") out.q = w[i + 1];
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// ---------------------------------------------------------------------------

struct ExponentArgs {
  std::string p;
  std::string q;

  void add_to(CLI::App* cmd, bool need_p = true) {
    if (need_p) cmd->add_option("--p", p, "Column norm exponent (decimal >= 1 or inf)");
    cmd->add_option("--q", q, "Target norm exponent (decimal >= 1 or inf)");
  }
  Exponent p_or(const Provenance& prov, std::optional<Exponent> fallback = std::nullopt) const {
    if (!p.empty()) return exponent_flag("p", p);
    if (prov.p) return exponent_flag("p", *prov.p);
    if (fallback) return *fallback;
    throw UsageError("--p is required (the input file does not record it)");
  }
  Exponent q_or(const Provenance& prov) const {
    if (!q.empty()) return exponent_flag("q", q);
    if (prov.q) return exponent_flag("q", *prov.q);
    throw UsageError("--q is required (the input file does not record it)");
  }
};

struct ConfigArgs {
  SolverConfig cfg;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--epsilon", cfg.epsilon, "Cube half-width per round")->capture_default_str();
    cmd->add_option("--radius-constant", cfg.radius_constant, "Constant C in the bound formulas")
        ->capture_default_str();
    cmd->add_option("--retry-budget", cfg.retry_budget, "Fresh Gaussians per round")
        ->capture_default_str();
    cmd->add_option("--proj-tol", cfg.proj_tol, "Projection residual tolerance")
        ->capture_default_str();
    cmd->add_option("--freeze-tol", cfg.freeze_tol, "Boundary snapping tolerance")
        ->capture_default_str();
    cmd->add_option("--target-fraction", cfg.target_fraction,
                    "Frozen fraction required from a partial coloring")
        ->capture_default_str();
  }
};

json config_json(const SolverConfig& c) {
  return {{"epsilon", c.epsilon},
          {"proj_tol", c.proj_tol},
          {"proj_max_iter", c.proj_max_iter},
          {"freeze_tol", c.freeze_tol},
          {"retry_budget", c.retry_budget},
          {"target_fraction", c.target_fraction},
          {"radius_constant", c.radius_constant},
          {"seed", c.seed},
          {"min_round_fraction", c.min_round_fraction},
          {"max_epsilon_halvings", c.max_epsilon_halvings}};
}

json round_json(const RoundReport& r) {
  return {{"newly_frozen", r.newly_frozen},
          {"disc_increment", r.disc_increment},
          {"projection_iters", r.projection_iters},
          {"retries_used", r.retries_used},
          {"radius", r.radius},
          {"slack", r.slack},
          {"epsilon", r.epsilon},
          {"active_before", r.active_before},
          {"fallback", r.fallback}};
}

std::size_t count_frozen(const Vector& x) {
  std::size_t k = 0;
  for (double v : x) k += std::abs(v) == 1.0;
  return k;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string family;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t t = 0;
  std::uint64_t seed = 0;
  bool binomial = false;
  ExponentArgs exps;
  std::string out;
};

int cmd_gen(const GenArgs& g, std::ostream& out) {
  const bool has_p = !g.exps.p.empty();
  const bool has_q = !g.exps.q.empty();
  auto p_or = [&](Exponent d) { return has_p ? exponent_flag("p", g.exps.p) : d; };
  auto q_or = [&](Exponent d) { return has_q ? exponent_flag("q", g.exps.q) : d; };
  const std::size_t m = g.m ? g.m : g.n;
  std::optional<Instance> inst;
  if (g.family == "hadamard") {
    if (g.m && g.m != g.n) throw UsageError("--m must equal --n for hadamard");
    inst = hadamard(g.n, p_or(Exponent::infinity()), q_or(Exponent::infinity()));
  } else if (g.family == "identity") {
    if (g.m && g.m != g.n) throw UsageError("--m must equal --n for identity");
    inst = identity_instance(g.n, p_or(Exponent(1.0)), q_or(Exponent::infinity()));
  } else if (g.family == "random") {
    const Exponent p = p_or(Exponent(2.0));
    inst = random_ball_instance(g.n, m, p, g.seed, q_or(p));
  } else {
    if (g.t == 0) throw UsageError("--t is required for beckfiala");
    inst = beck_fiala_instance(g.n, m, g.t, g.seed, g.binomial);
  }
  const std::string text =
      "# family " + g.family + " seed " + std::to_string(g.seed) + "\n" + serialize_instance(*inst);
  if (g.out.empty() || g.out == "-") {
    out << text;
  } else {
    write_text_file(g.out, text);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ColorArgs {
  std::string in;
  std::string mode = "full";
  std::string report;
  std::string coloring_out;
  int t = 0;
  ExponentArgs exps;
  ConfigArgs config;
};

int cmd_color(const ColorArgs& c, std::ostream& out) {
  const std::string text = read_text_file(c.in);
  const Provenance prov = read_provenance(text);
  const SolverConfig& cfg = c.config.cfg;
  cfg.validate();
  const bool bf = c.mode == "beckfiala";
  const Exponent q = bf && c.exps.q.empty() && !prov.q ? Exponent::infinity() : c.exps.q_or(prov);
  const Exponent p = c.exps.p_or(prov, bf ? std::optional<Exponent>(q) : std::nullopt);
  std::optional<int> t;
  if (c.t > 0) t = c.t;
  const Instance inst = parse_instance(text, p, q, t);
  const std::size_t n = inst.cols();
  const std::size_t m = inst.rows();

  const auto start = std::chrono::steady_clock::now();
  json report;
  Vector x;
  double disc = 0.0;
  double bound = 0.0;
  std::vector<RoundReport> rounds;
  if (c.mode == "partial") {
    bound = partial_bound(n, m, p, q, cfg.radius_constant);
    const PartialColoring pc = partial_coloring(inst, Vector::Zero(static_cast<Eigen::Index>(n)),
                                                std::nullopt, cfg, bound);
    x = pc.state.x;
    disc = discrepancy(inst, x, q);
    rounds = pc.rounds;
  } else if (c.mode == "full") {
    bound = full_bound(n, m, p, q, cfg.radius_constant);
    const FullColoring fc = full_coloring(inst, cfg);
    x = fc.signs;
    disc = fc.discrepancy;
    rounds = fc.rounds;
    report["phases"] = fc.phases;
    report["fallbacks"] = fc.fallbacks;
    report["radius_sum"] = fc.radius_sum;
    report["slack_sum"] = fc.slack_sum;
  } else {
    const BeckFialaColoring res = beck_fiala_color(inst, cfg);
    x = res.coloring.signs;
    disc = res.discrepancy;
    bound = cfg.radius_constant * res.reference;
    rounds = res.coloring.rounds;
    report["beck_fiala"] = {{"p", res.p}, {"t", res.t}, {"reference", res.reference}};
    report["phases"] = res.coloring.phases;
    report["fallbacks"] = res.coloring.fallbacks;
  }
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  const double ratio = disc / bound;
  const std::size_t frozen = count_frozen(x);

  report["schema"] = 1;
  report["mode"] = c.mode;
  report["instance"] = {{"n", n},
                        {"m", m},
                        {"p", p.to_string()},
                        {"q", q.to_string()},
                        {"family", prov.family},
                        {"seed", prov.seed ? json(*prov.seed) : json(nullptr)}};
  report["coloring"] = {{"x", std::vector<double>(x.data(), x.data() + x.size())},
                        {"frozen", frozen}};
  report["discrepancy"] = disc;
  report["bound"] = bound;
  report["ratio"] = ratio;
  report["rounds"] = json::array();
  for (const auto& r : rounds) report["rounds"].push_back(round_json(r));
  report["wall_ms"] = ms;
  report["config"] = config_json(cfg);

  if (!c.report.empty()) write_text_file(c.report, report.dump(2) + "\n");
  if (!c.coloring_out.empty()) write_text_file(c.coloring_out, serialize_coloring(x));
  out << "discrepancy " << fmt(disc) << " bound " << fmt(bound) << " ratio " << fmt(ratio)
      << " frozen " << frozen << "/" << n << " rounds " << rounds.size() << "\n";
  if (c.report.empty() && c.coloring_out.empty()) out << serialize_coloring(x);
  return 0;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string in;
  std::string coloring;
  ExponentArgs exps;
  double radius_constant = 1.0;
};

int cmd_verify(const VerifyArgs& v, std::ostream& out) {
  const std::string text = read_text_file(v.in);
  const Provenance prov = read_provenance(text);
  const Exponent q = v.exps.q_or(prov);
  const Exponent p = v.exps.p_or(prov, q);
  const Instance inst = parse_instance(text, p, q);
  const Vector x = parse_coloring(read_text_file(v.coloring));
  const double disc = discrepancy(inst, x, q);
  const std::size_t n = inst.cols();
  const std::size_t m = inst.rows();
  const bool full = count_frozen(x) == n;
  std::string kind = full ? "full" : "partial";
  double bound = 0.0;
  if (full && bound_exponent(p, q) > 0.0) {
    bound = full_bound(n, m, p, q, v.radius_constant);
  } else {
    kind = "partial";
    bound = partial_bound(n, m, p, q, v.radius_constant);
  }
  for (double xi : x) {
    if (std::abs(xi) > 1.0 + 1e-9) throw Error(ErrorCode::InvalidArgument, "coloring leaves [-1,1]");
  }
  out << "discrepancy " << fmt(disc) << "\n"
      << "bound " << fmt(bound) << " (" << kind << ")\n"
      << "ratio " << fmt(disc / bound) << "\n"
      << "frozen " << count_frozen(x) << "/" << n << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct BruteArgs {
  std::string in;
  std::string coloring_out;
  ExponentArgs exps;
};

int cmd_bruteforce(const BruteArgs& b, std::ostream& out) {
  const std::string text = read_text_file(b.in);
  const Provenance prov = read_provenance(text);
  const Exponent q = b.exps.q_or(prov);
  const Exponent p = b.exps.p_or(prov, q);
  const Instance inst = parse_instance(text, p, q);
  const BruteForceResult r = brute_force_signs(inst, q);
  out << "value " << fmt(r.value) << "\n" << "signs " << serialize_coloring(r.signs);
  if (!b.coloring_out.empty()) write_text_file(b.coloring_out, serialize_coloring(r.signs));
  return 0;
}

// ---------------------------------------------------------------------------

struct MeasureArgs {
  std::string kind = "body";
  std::string in;
  ExponentArgs exps;
  double radius = 0.0;
  double radius_constant = 1.0;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double eps = 0.05;
};

json estimate_json(const MeasureEstimate& e) {
  return {{"estimate", e.estimate},
          {"samples", e.samples},
          {"ci_half_width", e.ci_half_width},
          {"seed", e.seed}};
}

int cmd_measure(const MeasureArgs& a, std::ostream& out) {
  json j;
  j["kind"] = a.kind;
  if (a.kind == "cube") {
    if (a.n == 0) throw UsageError("--n is required for --kind cube");
    const CubeDistanceEstimate c = mc_distance_to_cube(a.n, a.eps, a.samples, a.seed);
    j["n"] = a.n;
    j["eps"] = a.eps;
    j["threshold"] = c.threshold;
    j["mean_distance"] = estimate_json(c.mean_distance);
    j["fraction_below"] = estimate_json(c.fraction_below);
    j["fraction_at_least"] = 1.0 - c.fraction_below.estimate;
  } else {
    if (a.in.empty()) throw UsageError("--in is required for --kind " + a.kind);
    const std::string text = read_text_file(a.in);
    const Provenance prov = read_provenance(text);
    const Exponent q = a.exps.q_or(prov);
    const Exponent p = a.exps.p_or(prov, q);
    const Instance inst = parse_instance(text, p, q);
    j["n"] = inst.cols();
    j["m"] = inst.rows();
    j["p"] = p.to_string();
    j["q"] = q.to_string();
    if (a.kind == "norm") {
      const MeasureEstimate e = mc_expected_lq_norm(inst, q, a.samples, a.seed);
      const double n = static_cast<double>(inst.cols());
      const double scale = std::sqrt(p.is_infinite() ? std::log(2.0 * inst.rows()) : p.value()) *
                           std::pow(n, std::max(0.5, p.reciprocal()));
      j["expected_norm"] = estimate_json(e);
      j["normalized"] = e.estimate / scale;
    } else if (a.radius > 0.0) {
      const MeasureEstimate e = mc_gaussian_measure(DiscrepancyBody(inst, a.radius), a.samples, a.seed);
      j["radius"] = a.radius;
      j["measure"] = estimate_json(e);
      j["log2_per_n"] = e.estimate > 0.0 ? json(std::log2(e.estimate) / static_cast<double>(inst.cols()))
                                         : json(nullptr);
      if (q.is_infinite()) j["sidak"] = sidak_product_bound(inst, a.radius);
    } else {
      const MeasureBoundReport r = measure_bound_check(inst, a.samples, a.seed, a.radius_constant);
      j["radius"] = r.radius;
      j["measure"] = estimate_json(r.measure);
      j["log2_per_n"] = std::isfinite(r.log2_per_n) ? json(r.log2_per_n) : json(nullptr);
      if (r.sidak) j["sidak"] = *r.sidak;
    }
  }
  out << j.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string family = "random";
  std::vector<std::size_t> ns;
  std::vector<std::size_t> ms;
  std::vector<std::string> ps{"2"};
  std::vector<std::string> qs;
  std::vector<std::uint64_t> seeds{0};
  std::string out;
  ConfigArgs config;
};

struct BenchCell {
  std::size_t n, m;
  Exponent p, q;
  std::uint64_t seed;
};

struct BenchRow {
  BenchCell cell;
  double disc = 0.0, bound = 0.0, ratio = 0.0, ms = 0.0;
  std::size_t frozen = 0, rounds = 0;
};

int cmd_bench(const BenchArgs& b, std::ostream& out) {
  if (b.ns.empty()) throw UsageError("--n needs at least one value");
  if (b.family != "random" && b.family != "hadamard" && b.family != "identity") {
    throw UsageError("--family must be random, hadamard or identity");
  }
  b.config.cfg.validate();
  std::vector<BenchCell> cells;
  for (std::size_t n : b.ns) {
    std::vector<std::size_t> ms = b.ms.empty() ? std::vector<std::size_t>{n} : b.ms;
    for (std::size_t m : ms) {
      if (n > m) continue;
      if (b.family != "random" && m != n) continue;
      for (const auto& ps : b.ps) {
        const Exponent p = exponent_flag("p", ps);
        std::vector<Exponent> qs;
        if (b.qs.empty()) {
          qs.push_back(p);
        } else {
          for (const auto& s : b.qs) qs.push_back(exponent_flag("q", s));
        }
        for (const Exponent& q : qs) {
          if (!(p <= q)) continue;
          if (bound_exponent(p, q) <= 0.0) {
            throw Error(ErrorCode::UnsupportedRegime,
                        "full coloring needs max(0,1/2-1/p)+1/q > 0 (p=" + p.to_string() +
                            ", q=" + q.to_string() + ")");
          }
          for (auto seed : b.seeds) cells.push_back({n, m, p, q, seed});
        }
      }
    }
  }

  std::vector<BenchRow> rows;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const BenchCell& c = cells[i];
      try {
        Instance inst = b.family == "hadamard"   ? hadamard(c.n, c.p, c.q)
                        : b.family == "identity" ? identity_instance(c.n, c.p, c.q)
                                                 : random_ball_instance(c.n, c.m, c.p, c.seed, c.q);
        SolverConfig cfg = b.config.cfg;
        cfg.seed = c.seed;
        const auto start = std::chrono::steady_clock::now();
        const FullColoring fc = full_coloring(inst, cfg);
        BenchRow row{c};
        row.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                     .count();
        row.disc = fc.discrepancy;
        row.bound = full_bound(c.n, c.m, c.p, c.q, cfg.radius_constant);
        row.ratio = row.disc / row.bound;
        row.frozen = count_frozen(fc.signs);
        row.rounds = fc.rounds.size();
        std::lock_guard lock(mu);
        rows.push_back(row);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned workers =
      std::max(1U, std::min<unsigned>(thread_count(), static_cast<unsigned>(cells.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  auto key = [](const BenchRow& r) {
    return std::make_tuple(r.cell.n, r.cell.m, r.cell.p.value(), r.cell.q.value(), r.cell.seed);
  };
  std::sort(rows.begin(), rows.end(), [&](const BenchRow& a, const BenchRow& c) { return key(a) < key(c); });
  std::string csv = "n,m,p,q,seed,disc,bound,ratio,frozen,rounds,ms\n";
  for (const auto& r : rows) {
    csv += std::to_string(r.cell.n) + "," + std::to_string(r.cell.m) + "," + r.cell.p.to_string() +
           "," + r.cell.q.to_string() + "," + std::to_string(r.cell.seed) + "," + fmt(r.disc) + "," +
           fmt(r.bound) + "," + fmt(r.ratio) + "," + std::to_string(r.frozen) + "," +
           std::to_string(r.rounds) + "," + fmt(r.ms) + "\n";
  }
  if (b.out.empty() || b.out == "-") {
    out << csv;
  } else {
    write_text_file(b.out, csv);
  }
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional partial colorings and full +-1 colorings for lp -> lq vector balancing",
               "vbal"};
  app.footer(
      "All logarithms in bound formulas are natural (base e). Exponent flags accept a decimal "
      ">= 1 or 'inf'.\nExit codes: 0 success, 1 domain error, 2 usage error.");
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate an instance file");
  g->add_option("--family", gen.family, "hadamard | identity | random | beckfiala")
      ->required()
      ->check(CLI::IsMember({"hadamard", "identity", "random", "beckfiala"}));
  g->add_option("--n", gen.n, "Number of columns")->required()->check(CLI::PositiveNumber);
  g->add_option("--m", gen.m, "Number of rows (default n)");
  g->add_option("--t", gen.t, "Ones per column (beckfiala)");
  g->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
  g->add_flag("--binomial", gen.binomial, "Binomial(m, t/m) ones per column, capped at t");
  gen.exps.add_to(g);
  g->add_option("--out", gen.out, "Output file (default stdout)");

  ColorArgs color;
  auto* c = app.add_subcommand("color", "Compute a partial, full or Beck-Fiala coloring");
  c->add_option("--in", color.in, "Instance file")->required();
  c->add_option("--mode", color.mode, "partial | full | beckfiala")
      ->check(CLI::IsMember({"partial", "full", "beckfiala"}))
      ->capture_default_str();
  c->add_option("--t", color.t, "Column sparsity for beckfiala (default: densest column)");
  c->add_option("--report", color.report, "Write a JSON run report");
  c->add_option("--out", color.coloring_out, "Write the coloring vector");
  color.exps.add_to(c);
  color.config.add_to(c);

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Recompute the discrepancy of a coloring");
  v->add_option("--in", verify.in, "Instance file")->required();
  v->add_option("--coloring", verify.coloring, "Coloring file")->required();
  v->add_option("--radius-constant", verify.radius_constant, "Constant C")->capture_default_str();
  verify.exps.add_to(v);

  BruteArgs brute;
  auto* bf = app.add_subcommand("bruteforce", "Exact minimum over all sign vectors (n <= 22)");
  bf->add_option("--in", brute.in, "Instance file")->required();
  bf->add_option("--out", brute.coloring_out, "Write the optimal sign vector");
  brute.exps.add_to(bf);

  MeasureArgs meas;
  auto* me = app.add_subcommand("measure", "Gaussian measure estimates");
  me->add_option("--kind", meas.kind,
                 "body: measure of {||Ax||_q <= r}; norm: E||Ag||_q; cube: distance to the cube")
      ->check(CLI::IsMember({"body", "norm", "cube"}))
      ->capture_default_str();
  me->add_option("--in", meas.in, "Instance file (body, norm)");
  me->add_option("--radius", meas.radius, "Body radius (default: the partial-coloring radius)");
  me->add_option("--radius-constant", meas.radius_constant, "Constant C")->capture_default_str();
  me->add_option("--samples", meas.samples, "Monte Carlo samples")->capture_default_str();
  me->add_option("--seed", meas.seed, "RNG seed")->capture_default_str();
  me->add_option("--n", meas.n, "Dimension (cube)");
  me->add_option("--eps", meas.eps, "Cube half-width (cube)")->capture_default_str();
  meas.exps.add_to(me);

  BenchArgs bench;
  auto* be = app.add_subcommand("bench", "Sweep full colorings over a grid and write CSV");
  be->add_option("--family", bench.family, "random | hadamard | identity")->capture_default_str();
  be->add_option("--n", bench.ns, "Column counts")->required()->delimiter(',');
  be->add_option("--m", bench.ms, "Row counts (default m = n)")->delimiter(',');
  be->add_option("--p", bench.ps, "Column norm exponents")->delimiter(',');
  be->add_option("--q", bench.qs, "Target exponents (default q = p)")->delimiter(',');
  be->add_option("--seeds", bench.seeds, "Seeds")->delimiter(',');
  be->add_option("--out", bench.out, "CSV output (default stdout)");
  bench.config.add_to(be);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (c->parsed()) return cmd_color(color, out);
    if (v->parsed()) return cmd_verify(verify, out);
    if (bf->parsed()) return cmd_bruteforce(brute, out);
    if (me->parsed()) return cmd_measure(meas, out);
    return cmd_bench(bench, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_command(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_command(args, std::cout, std::cerr);
}

}  // namespace vbal
