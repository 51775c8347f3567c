// greenchain: loads a chain or tree spec and runs the Green's-function
// routes against it. Subcommands: ratio, green, check, classify, embed.
//
// Exit codes: 0 success, 1 verification failure (check found a pair over
// tolerance), 2 input error (bad JSON or inconsistent spec), 3 domain
// error (invalid pair, unusable route, singular system).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "greenchain/chain.hpp"
#include "greenchain/embedding.hpp"
#include "greenchain/errors.hpp"
#include "greenchain/green_exact.hpp"
#include "greenchain/io.hpp"
#include "greenchain/json_out.hpp"
#include "greenchain/mc.hpp"
#include "greenchain/network.hpp"
#include "greenchain/numeric.hpp"
#include "greenchain/rng.hpp"
#include "greenchain/tree.hpp"

namespace gc = greenchain;

namespace {

unsigned thread_budget() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GREENCHAIN_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0' || cap == 0) {
      throw gc::spec_error(
          "GREENCHAIN_THREADS must be a positive integer, got \"" +
          std::string(env) + "\"");
    }
    n = std::min<unsigned long>(n, cap);
  }
  return n;
}

// One cross-route comparison row. Routes that cannot run carry a reason
// instead of a value.
struct RouteEntry {
  std::optional<double> value;
  std::string skipped;  // set iff value is absent
};

struct McBand {
  double ratio = 0.0;
  double std_error = 0.0;
  double z_score = 0.0;
};

struct PairRecord {
  std::int64_t j = 0;
  std::int64_t k = 0;
  RouteEntry closed_form;
  RouteEntry exact;
  RouteEntry voltage;
  RouteEntry local_time;
  std::optional<McBand> mc_band;
  std::string mc_skipped;
  double max_rel_dev = 0.0;
  bool pass = true;
};

gc::JsonValue route_json(const RouteEntry& e) {
  if (e.value) return gc::JsonValue::number(*e.value);
  return gc::JsonValue::string("skipped: " + e.skipped);
}

gc::JsonValue record_json(const PairRecord& rec) {
  gc::JsonValue o = gc::JsonValue::object();
  o.set("j", gc::JsonValue::integer(rec.j));
  o.set("k", gc::JsonValue::integer(rec.k));
  o.set("ratio_closed_form", route_json(rec.closed_form));
  o.set("ratio_exact", route_json(rec.exact));
  o.set("ratio_voltage", route_json(rec.voltage));
  o.set("ratio_local_time", route_json(rec.local_time));
  if (rec.mc_band) {
    gc::JsonValue band = gc::JsonValue::object();
    band.set("ratio", gc::JsonValue::number(rec.mc_band->ratio));
    band.set("std_error", gc::JsonValue::number(rec.mc_band->std_error));
    band.set("z_score", gc::JsonValue::number(rec.mc_band->z_score));
    o.set("mc_band", band);
  } else {
    o.set("mc_band", gc::JsonValue::string("skipped: " + rec.mc_skipped));
  }
  o.set("max_rel_dev", gc::JsonValue::number(rec.max_rel_dev));
  return o;
}

void finish_record(PairRecord& rec, double tolerance) {
  std::vector<double> vals;
  for (const RouteEntry* e :
       {&rec.closed_form, &rec.exact, &rec.voltage, &rec.local_time}) {
    if (e->value) vals.push_back(*e->value);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    for (std::size_t j = i + 1; j < vals.size(); ++j) {
      worst = std::max(worst, gc::rel_dev(vals[i], vals[j]));
    }
  }
  rec.max_rel_dev = worst;
  rec.pass = worst <= tolerance;
  if (rec.mc_band && !(rec.mc_band->z_score <= 4.0)) rec.pass = false;
}

std::string format_value(double v) { return gc::format_double_17(v); }

void print_green_result(const gc::GreenResult& g) {
  std::printf("G = %s   [%s]\n", format_value(g.value).c_str(),
              gc::route_name(g.route));
  if (g.std_error) {
    std::printf("std_error = %s\n", format_value(*g.std_error).c_str());
  }
  if (g.residual) {
    std::printf("residual = %s\n", format_value(*g.residual).c_str());
  }
  if (g.flagged) {
    std::printf("flagged: result exceeded its quality threshold\n");
  }
}

gc::JsonValue green_json(const gc::LoadedSpec& spec, std::int64_t x,
                         std::int64_t y, const gc::GreenResult& g) {
  gc::JsonValue o = gc::JsonValue::object();
  o.set("digest", gc::JsonValue::string(spec.digest));
  o.set("x", gc::JsonValue::integer(x));
  o.set("y", gc::JsonValue::integer(y));
  o.set("route", gc::JsonValue::string(gc::route_name(g.route)));
  o.set("value", gc::JsonValue::number(g.value));
  o.set("std_error", g.std_error ? gc::JsonValue::number(*g.std_error)
                                 : gc::JsonValue::null());
  o.set("residual", g.residual ? gc::JsonValue::number(*g.residual)
                               : gc::JsonValue::null());
  o.set("flagged", gc::JsonValue::boolean(g.flagged));
  return o;
}

// Green's function on a tree through the electric route: ground the
// leaves, inject at x, convert the voltage at y with C(y).
gc::GreenResult tree_green_via_voltage(const gc::TreeChain& tc,
                                       gc::Vertex x, gc::Vertex y) {
  if (tc.leaves().empty()) {
    throw std::domain_error(
        "voltage route needs absorbing leaves; this tree has none");
  }
  if (!tc.is_interior(x) || !tc.is_interior(y)) {
    throw std::domain_error("green is defined for interior vertices only");
  }
  const gc::ConductanceNetwork net =
      gc::assign_conductances(tc, tc.vertices().front(), 1.0);
  const gc::VoltageSolution sol = gc::solve_voltages(net, x, tc.leaves());
  gc::GreenResult out;
  out.value = net.total_conductance(y) * sol.voltages.at(y);
  out.route = gc::Route::Voltage;
  out.residual = sol.kcl_residual;
  out.flagged = sol.kcl_residual > 1e-8;
  return out;
}

gc::GreenResult from_estimate(const gc::VisitEstimate& est) {
  gc::GreenResult out;
  out.value = est.mean;
  out.route = gc::Route::MonteCarlo;
  out.std_error = est.std_error;
  out.flagged = est.flagged;
  return out;
}

// ---------------------------------------------------------------- ratio

int cmd_ratio(const std::string& path, std::int64_t j, std::int64_t k,
              bool json) {
  const gc::LoadedSpec spec = gc::load_spec_file(path);
  gc::RatioValue rv;
  if (spec.kind == "line") {
    rv = gc::symmetry_ratio(spec.chain(), j, k);
  } else if (spec.kind == "tree") {
    rv = gc::path_ratio(spec.tree(), j, k);
  } else {
    throw gc::spec_error("ratio needs a \"line\" or \"tree\" spec, got \"" +
                         spec.kind + "\"");
  }
  if (json) {
    PairRecord rec;
    rec.j = j;
    rec.k = k;
    rec.closed_form.value = rv.value;
    rec.exact.skipped = "not requested";
    rec.voltage.skipped = "not requested";
    rec.local_time.skipped = "not requested";
    rec.mc_skipped = "not requested";
    finish_record(rec, 0.0);
    gc::JsonValue o = record_json(rec);
    o.set("digest", gc::JsonValue::string(spec.digest));
    std::printf("%s\n", o.dump().c_str());
  } else {
    std::printf("G(%lld,%lld)/G(%lld,%lld) = %s\n",
                static_cast<long long>(j), static_cast<long long>(k),
                static_cast<long long>(k), static_cast<long long>(j),
                format_value(rv.value).c_str());
    std::printf("log ratio = %s\n", format_value(rv.log).c_str());
  }
  return 0;
}

// ---------------------------------------------------------------- green

int cmd_green(const std::string& path, std::int64_t x, std::int64_t y,
              const std::string& route, std::uint64_t trials,
              std::uint64_t seed, std::uint64_t max_steps, bool json) {
  const gc::LoadedSpec spec = gc::load_spec_file(path);
  gc::SimConfig cfg;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.max_steps = max_steps;
  cfg.threads = thread_budget();

  gc::GreenResult g;
  if (spec.kind == "line") {
    const gc::BirthDeathChain& chain = spec.chain();
    if (route == "exact") {
      g = gc::green(chain, x, y);
    } else if (route == "voltage") {
      g = gc::green_via_voltage(chain, x, y);
    } else if (route == "localtime") {
      g = gc::green_via_local_time(chain, x, y);
    } else {
      g = from_estimate(gc::simulate_line(chain, x, y, cfg));
    }
  } else if (spec.kind == "tree") {
    const gc::TreeChain& tc = spec.tree();
    if (route == "exact") {
      g = gc::green_tree(tc, x, y);
    } else if (route == "voltage") {
      g = tree_green_via_voltage(tc, x, y);
    } else if (route == "localtime") {
      throw std::domain_error(
          "the local-time route runs on line chains only; the Brownian "
          "embedding is one-dimensional");
    } else {
      g = from_estimate(gc::simulate_tree(tc, x, y, cfg));
    }
  } else {
    throw gc::spec_error("green needs a \"line\" or \"tree\" spec, got \"" +
                         spec.kind + "\"");
  }

  if (json) {
    std::printf("%s\n", green_json(spec, x, y, g).dump().c_str());
  } else {
    print_green_result(g);
  }
  return 0;
}

// ---------------------------------------------------------------- check

struct CheckOptions {
  double tolerance = 1e-9;
  std::int64_t sample_pairs = 0;  // 0: all pairs
  std::uint64_t sample_seed = 0;
  std::uint64_t mc_trials = 0;  // 0: Monte Carlo skipped
  std::uint64_t mc_seed = 0;
};

std::vector<std::pair<std::int64_t, std::int64_t>> sample_pairs(
    std::vector<std::pair<std::int64_t, std::int64_t>> all,
    std::int64_t want, std::uint64_t seed) {
  if (want <= 0 || static_cast<std::size_t>(want) >= all.size()) return all;
  // Partial Fisher-Yates, then restore (j,k) ordering for output.
  gc::SplitMix64 rng(seed);
  for (std::size_t i = 0; i < static_cast<std::size_t>(want); ++i) {
    const std::size_t pick = i + static_cast<std::size_t>(rng.below(
                                     static_cast<std::uint64_t>(all.size() - i)));
    std::swap(all[i], all[pick]);
  }
  all.resize(static_cast<std::size_t>(want));
  std::sort(all.begin(), all.end());
  return all;
}

void run_indexed(std::size_t count, unsigned threads,
                 const std::function<void(std::size_t)>& work) {
  threads = std::min<unsigned>(threads, std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count;
           i = next.fetch_add(1)) {
        work(i);
      }
    });
  }
  for (std::thread& th : pool) th.join();
}

McBand mc_ratio_band(const gc::VisitEstimate& fwd,
                     const gc::VisitEstimate& bwd, double reference) {
  McBand band;
  band.ratio = fwd.mean / bwd.mean;
  // First-order error propagation for the quotient of two independent
  // sample means.
  const double rel_f = fwd.std_error / fwd.mean;
  const double rel_b = bwd.std_error / bwd.mean;
  band.std_error = std::abs(band.ratio) * std::hypot(rel_f, rel_b);
  band.z_score = band.std_error > 0.0
                     ? std::abs(band.ratio - reference) / band.std_error
                     : (band.ratio == reference ? 0.0 : HUGE_VAL);
  return band;
}

std::vector<PairRecord> check_line(const gc::BirthDeathChain& chain,
                                   const CheckOptions& opt) {
  if (!chain.both_ends_absorbing()) {
    throw std::domain_error(
        "check needs both window endpoints absorbing; visit counts are "
        "finite only for an absorbed chain");
  }
  const gc::State a = chain.first_usable();
  const gc::State b = chain.last_usable();

  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  for (gc::State j = a; j <= b; ++j) {
    for (gc::State k = j + 1; k <= b; ++k) pairs.emplace_back(j, k);
  }
  pairs = sample_pairs(std::move(pairs), opt.sample_pairs, opt.sample_seed);

  const gc::GreenMatrix matrix = gc::green_matrix(chain);

  // One voltage solve per distinct start covers every pair through
  // G(x,y) = C(y) V_y.
  const gc::ConductanceNetwork net = gc::line_conductances(chain);
  const std::set<gc::Vertex> grounds{chain.lo(), chain.hi()};
  std::set<gc::State> starts;
  for (const auto& [j, k] : pairs) {
    starts.insert(j);
    starts.insert(k);
  }
  std::map<gc::State, std::map<gc::Vertex, double>> volt;
  for (const gc::State s : starts) {
    volt[s] = gc::solve_voltages(net, s, grounds).voltages;
  }

  std::vector<PairRecord> records(pairs.size());
  const unsigned threads = thread_budget();
  run_indexed(pairs.size(), threads, [&](std::size_t i) {
    const auto [j, k] = pairs[i];
    PairRecord& rec = records[i];
    rec.j = j;
    rec.k = k;
    rec.closed_form.value = gc::symmetry_ratio(chain, j, k).value;
    rec.exact.value = matrix.at(j, k) / matrix.at(k, j);
    const double cj = net.total_conductance(j);
    const double ck = net.total_conductance(k);
    rec.voltage.value = (ck * volt.at(j).at(k)) / (cj * volt.at(k).at(j));
    rec.local_time.value = gc::green_via_local_time(chain, j, k).value /
                           gc::green_via_local_time(chain, k, j).value;
    if (opt.mc_trials > 0) {
      gc::SimConfig cfg;
      cfg.trials = opt.mc_trials;
      cfg.seed = opt.mc_seed;
      cfg.threads = 1;  // pairs already run in parallel
      const auto fwd = gc::simulate_line(chain, j, k, cfg);
      const auto bwd = gc::simulate_line(chain, k, j, cfg);
      rec.mc_band = mc_ratio_band(fwd, bwd, *rec.exact.value);
    } else {
      rec.mc_skipped = "pass --mc-trials to enable";
    }
    finish_record(rec, opt.tolerance);
  });
  return records;
}

std::vector<PairRecord> check_tree(const gc::TreeChain& tc,
                                   const CheckOptions& opt) {
  if (tc.leaves().empty()) {
    throw std::domain_error(
        "check needs a tree with absorbing leaves; visit counts are finite "
        "only for an absorbed chain");
  }
  const std::vector<gc::Vertex> interior = tc.interior();

  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  for (std::size_t i = 0; i < interior.size(); ++i) {
    for (std::size_t j = i + 1; j < interior.size(); ++j) {
      pairs.emplace_back(interior[i], interior[j]);
    }
  }
  pairs = sample_pairs(std::move(pairs), opt.sample_pairs, opt.sample_seed);

  const gc::ConductanceNetwork net =
      gc::assign_conductances(tc, tc.vertices().front(), 1.0);
  std::set<gc::State> starts;
  for (const auto& [j, k] : pairs) {
    starts.insert(j);
    starts.insert(k);
  }
  std::map<gc::Vertex, std::map<gc::Vertex, double>> volt;
  for (const gc::Vertex s : starts) {
    volt[s] = gc::solve_voltages(net, s, tc.leaves()).voltages;
  }

  std::vector<PairRecord> records(pairs.size());
  const unsigned threads = thread_budget();
  run_indexed(pairs.size(), threads, [&](std::size_t i) {
    const auto [j, k] = pairs[i];
    PairRecord& rec = records[i];
    rec.j = j;
    rec.k = k;
    rec.closed_form.value = gc::path_ratio(tc, j, k).value;
    rec.exact.value =
        gc::green_tree(tc, j, k).value / gc::green_tree(tc, k, j).value;
    const double cj = net.total_conductance(j);
    const double ck = net.total_conductance(k);
    rec.voltage.value = (ck * volt.at(j).at(k)) / (cj * volt.at(k).at(j));
    rec.local_time.skipped = "embedding route is line-only";
    if (opt.mc_trials > 0) {
      gc::SimConfig cfg;
      cfg.trials = opt.mc_trials;
      cfg.seed = opt.mc_seed;
      cfg.threads = 1;
      const auto fwd = gc::simulate_tree(tc, j, k, cfg);
      const auto bwd = gc::simulate_tree(tc, k, j, cfg);
      rec.mc_band = mc_ratio_band(fwd, bwd, *rec.exact.value);
    } else {
      rec.mc_skipped = "pass --mc-trials to enable";
    }
    finish_record(rec, opt.tolerance);
  });
  return records;
}

int cmd_check(const std::string& path, const CheckOptions& opt, bool json) {
  const gc::LoadedSpec spec = gc::load_spec_file(path);
  std::vector<PairRecord> records;
  if (spec.kind == "line") {
    records = check_line(spec.chain(), opt);
  } else if (spec.kind == "tree") {
    records = check_tree(spec.tree(), opt);
  } else {
    throw gc::spec_error("check needs a \"line\" or \"tree\" spec, got \"" +
                         spec.kind + "\"");
  }

  double worst = 0.0;
  const PairRecord* first_fail = nullptr;
  for (const PairRecord& rec : records) {
    worst = std::max(worst, rec.max_rel_dev);
    if (!rec.pass && first_fail == nullptr) first_fail = &rec;
  }
  const bool pass = first_fail == nullptr;

  if (json) {
    gc::JsonValue report = gc::JsonValue::object();
    report.set("digest", gc::JsonValue::string(spec.digest));
    report.set("kind", gc::JsonValue::string(spec.kind));
    report.set("tolerance", gc::JsonValue::number(opt.tolerance));
    gc::JsonValue arr = gc::JsonValue::array();
    for (const PairRecord& rec : records) arr.push_back(record_json(rec));
    report.set("records", arr);
    report.set("max_rel_dev", gc::JsonValue::number(worst));
    report.set("verdict", gc::JsonValue::string(pass ? "pass" : "fail"));
    std::printf("%s\n", report.dump().c_str());
  } else {
    std::printf("%6s %6s  %-22s %-22s %-22s %-22s %-12s\n", "j", "k",
                "closed_form", "exact", "voltage", "local_time",
                "max_rel_dev");
    for (const PairRecord& rec : records) {
      const auto cell = [](const RouteEntry& e) {
        return e.value ? format_value(*e.value) : "-";
      };
      std::printf("%6lld %6lld  %-22s %-22s %-22s %-22s %-12.3e%s\n",
                  static_cast<long long>(rec.j),
                  static_cast<long long>(rec.k),
                  cell(rec.closed_form).c_str(), cell(rec.exact).c_str(),
                  cell(rec.voltage).c_str(), cell(rec.local_time).c_str(),
                  rec.max_rel_dev, rec.pass ? "" : "  FAIL");
      if (rec.mc_band) {
        std::printf("%6s %6s  mc ratio %s +- %s (z = %.2f)\n", "", "",
                    format_value(rec.mc_band->ratio).c_str(),
                    format_value(rec.mc_band->std_error).c_str(),
                    rec.mc_band->z_score);
      }
    }
    std::printf("checked %zu pairs, max_rel_dev = %.3e, verdict: %s\n",
                records.size(), worst, pass ? "pass" : "fail");
  }

  if (!pass) {
    std::fprintf(stderr,
                 "check failed at pair (%lld,%lld): max_rel_dev = %.3e%s\n",
                 static_cast<long long>(first_fail->j),
                 static_cast<long long>(first_fail->k),
                 first_fail->max_rel_dev,
                 first_fail->mc_band &&
                         !(first_fail->mc_band->z_score <= 4.0)
                     ? " (Monte Carlo band exceeded)"
                     : "");
    return 1;
  }
  return 0;
}

// ------------------------------------------------------------- classify

const char* recurrence_name(gc::Recurrence r) {
  switch (r) {
    case gc::Recurrence::Recurrent:
      return "recurrent";
    case gc::Recurrence::Transient:
      return "transient";
    default:
      return "inconclusive";
  }
}

const char* status_name(gc::SeriesStatus s) {
  switch (s) {
    case gc::SeriesStatus::Converged:
      return "converged";
    case gc::SeriesStatus::Diverged:
      return "diverged";
    default:
      return "undetermined";
  }
}

int cmd_classify(const std::string& path, const gc::ClassifyOptions& opt,
                 bool json) {
  const gc::LoadedSpec spec = gc::load_spec_file(path);
  if (spec.kind != "formula") {
    throw gc::spec_error(
        "classify needs a \"formula\" spec (a rule for all n), got \"" +
        spec.kind + "\"");
  }
  const gc::RecurrenceVerdict v =
      gc::classify(spec.formula().coefficients(), opt);

  if (json) {
    const auto side = [](const gc::SideSum& s) {
      gc::JsonValue o = gc::JsonValue::object();
      o.set("sum", gc::JsonValue::number(s.sum));
      o.set("status", gc::JsonValue::string(status_name(s.status)));
      return o;
    };
    gc::JsonValue o = gc::JsonValue::object();
    o.set("digest", gc::JsonValue::string(spec.digest));
    o.set("horizon", gc::JsonValue::integer(opt.horizon));
    o.set("verdict", gc::JsonValue::string(recurrence_name(v.kind)));
    o.set("left", side(v.left_sum));
    o.set("right", side(v.right_sum));
    std::printf("%s\n", o.dump().c_str());
  } else {
    std::printf("verdict: %s\n", recurrence_name(v.kind));
    std::printf("left  spacing series: sum %s (%s)\n",
                format_value(v.left_sum.sum).c_str(),
                status_name(v.left_sum.status));
    std::printf("right spacing series: sum %s (%s)\n",
                format_value(v.right_sum.sum).c_str(),
                status_name(v.right_sum.status));
  }
  return 0;
}

// ---------------------------------------------------------------- embed

int cmd_embed(const std::string& path, bool json) {
  const gc::LoadedSpec spec = gc::load_spec_file(path);
  if (spec.kind != "line") {
    throw gc::spec_error("embed needs a \"line\" spec, got \"" + spec.kind +
                         "\"");
  }
  // The embedding is defined for lazy-free chains; removing laziness is
  // exact (bit-for-bit) when there is none to remove.
  const gc::BirthDeathChain clean = gc::remove_laziness(spec.chain());
  const gc::EmbeddingData emb = gc::build_embedding(clean);

  if (json) {
    gc::JsonValue rows = gc::JsonValue::array();
    for (const auto& [n, xn] : emb.x) {
      gc::JsonValue row = gc::JsonValue::object();
      row.set("n", gc::JsonValue::integer(n));
      const auto it = emb.t.find(n);
      row.set("t", it != emb.t.end() ? gc::JsonValue::number(it->second)
                                     : gc::JsonValue::null());
      row.set("x", gc::JsonValue::number(xn));
      rows.push_back(row);
    }
    gc::JsonValue o = gc::JsonValue::object();
    o.set("digest", gc::JsonValue::string(spec.digest));
    o.set("anchor", gc::JsonValue::integer(emb.anchor));
    o.set("rows", rows);
    o.set("x_limit_lo", emb.x_minus_inf.finite
                            ? gc::JsonValue::number(emb.x_minus_inf.value)
                            : gc::JsonValue::null());
    o.set("x_limit_hi", emb.x_plus_inf.finite
                            ? gc::JsonValue::number(emb.x_plus_inf.value)
                            : gc::JsonValue::null());
    std::printf("%s\n", o.dump().c_str());
  } else {
    std::printf("anchor = %lld (x_anchor = 0)\n",
                static_cast<long long>(emb.anchor));
    std::printf("%6s %-24s %-24s\n", "n", "t_n", "x_n");
    for (const auto& [n, xn] : emb.x) {
      const auto it = emb.t.find(n);
      std::printf("%6lld %-24s %-24s\n", static_cast<long long>(n),
                  it != emb.t.end() ? format_value(it->second).c_str() : "-",
                  format_value(xn).c_str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Green's functions of birth-death chains on lines and trees: exact "
      "solve, Brownian-embedding local times, electric networks, Monte "
      "Carlo, and the closed-form visit-count ratios that tie them "
      "together."};
  app.require_subcommand(1);

  std::function<int()> run;

  // ratio
  {
    auto* c = app.add_subcommand(
        "ratio", "Closed-form visit-count ratio G(j,k)/G(k,j)");
    auto path = std::make_shared<std::string>();
    auto j = std::make_shared<std::int64_t>(0);
    auto k = std::make_shared<std::int64_t>(0);
    auto json = std::make_shared<bool>(false);
    c->add_option("spec", *path, "chain or tree spec file")->required();
    c->add_option("-j", *j, "start state / vertex")->required();
    c->add_option("-k", *k, "target state / vertex")->required();
    c->add_flag("--json", *json, "machine-readable output");
    c->callback([=, &run] {
      run = [=] { return cmd_ratio(*path, *j, *k, *json); };
    });
  }

  // green
  {
    auto* c = app.add_subcommand(
        "green", "Expected visits G(x,y) by one route");
    auto path = std::make_shared<std::string>();
    auto x = std::make_shared<std::int64_t>(0);
    auto y = std::make_shared<std::int64_t>(0);
    auto route = std::make_shared<std::string>("exact");
    auto trials = std::make_shared<std::uint64_t>(100000);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto max_steps = std::make_shared<std::uint64_t>(1000000);
    auto json = std::make_shared<bool>(false);
    c->add_option("spec", *path, "chain or tree spec file")->required();
    c->add_option("-x", *x, "start state / vertex")->required();
    c->add_option("-y", *y, "target state / vertex")->required();
    c->add_option("--route", *route, "exact | voltage | localtime | mc")
        ->check(CLI::IsMember({"exact", "voltage", "localtime", "mc"}));
    c->add_option("--trials", *trials, "Monte Carlo trials");
    c->add_option("--seed", *seed, "Monte Carlo seed");
    c->add_option("--max-steps", *max_steps, "per-trial step cap");
    c->add_flag("--json", *json, "machine-readable output");
    c->callback([=, &run] {
      run = [=] {
        return cmd_green(*path, *x, *y, *route, *trials, *seed, *max_steps,
                         *json);
      };
    });
  }

  // check
  {
    auto* c = app.add_subcommand(
        "check", "Cross-route verification of the ratio identity");
    auto path = std::make_shared<std::string>();
    auto opt = std::make_shared<CheckOptions>();
    auto json = std::make_shared<bool>(false);
    c->add_option("spec", *path, "chain or tree spec file")->required();
    c->add_option("--tolerance", opt->tolerance,
                  "max allowed relative deviation between routes")
        ->capture_default_str();
    c->add_option("--pairs", opt->sample_pairs,
                  "check a sampled subset of this many pairs (0 = all)");
    c->add_option("--seed", opt->sample_seed, "pair-sampling seed");
    c->add_option("--mc-trials", opt->mc_trials,
                  "also run Monte Carlo with this many trials per direction");
    c->add_option("--mc-seed", opt->mc_seed, "Monte Carlo seed");
    c->add_flag("--json", *json, "machine-readable report");
    c->callback([=, &run] {
      run = [=] { return cmd_check(*path, *opt, *json); };
    });
  }

  // classify
  {
    auto* c = app.add_subcommand(
        "classify", "Recurrence/transience of a coefficient-formula chain");
    auto path = std::make_shared<std::string>();
    auto opt = std::make_shared<gc::ClassifyOptions>();
    auto json = std::make_shared<bool>(false);
    c->add_option("spec", *path, "formula spec file")->required();
    c->add_option("--horizon", opt->horizon, "states examined per side")
        ->capture_default_str();
    c->add_option("--divergence-threshold", opt->divergence_threshold,
                  "partial sum above this is divergent")
        ->capture_default_str();
    c->add_option("--convergence-tolerance", opt->convergence_tolerance,
                  "ratio gap below 1 required to call convergence")
        ->capture_default_str();
    c->add_flag("--json", *json, "machine-readable output");
    c->callback([=, &run] {
      run = [=] { return cmd_classify(*path, *opt, *json); };
    });
  }

  // embed
  {
    auto* c = app.add_subcommand(
        "embed", "Brownian-embedding grid (t_n, x_n) of a line chain");
    auto path = std::make_shared<std::string>();
    auto json = std::make_shared<bool>(false);
    c->add_option("spec", *path, "line spec file")->required();
    c->add_flag("--json", *json, "machine-readable output");
    c->callback([=, &run] {
      run = [=] { return cmd_embed(*path, *json); };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    return run();
  } catch (const gc::spec_error& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const gc::solver_error& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return 3;
  }
}
