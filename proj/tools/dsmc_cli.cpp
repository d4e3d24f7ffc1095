// dsmc: analytic tables, crossing counts and simulation runs.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "dsmc/analytic.hpp"
#include "dsmc/config.hpp"
#include "dsmc/embedding.hpp"
#include "dsmc/engine.hpp"
#include "dsmc/experiments.hpp"
#include "dsmc/report.hpp"

using namespace dsmc;

namespace {

struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file.open(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    os = &file;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

RunConfig load(const std::string& path, const std::optional<std::uint64_t>& seed) {
  RunConfig c = load_config(path);
  if (seed) c.policy.rng_seed = *seed;
  if (c.label.empty()) c.label = path;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, path + ": " + e.what());
  }
  return c;
}

int cmd_analyze(int n, int k, const std::vector<double>& pas, int r_max, const std::string& csv,
                const std::string& svg) {
  if (n < 1 || k < 1) throw CLI::ValidationError("--n/--k", "must be >= 1");
  if (r_max < 1 || r_max > 64) throw CLI::ValidationError("--r-max", "must be in 1..64");
  for (double pa : pas) {
    if (!(pa >= 0.0 && pa <= 1.0)) throw CLI::ValidationError("--pa", "must be in [0, 1]");
  }
  Output out(csv);
  write_csv_row(*out.os, {"n", "k", "r", "p_a", "E", "E_B", "U_B", "U_flat", "port_util"});
  Plot plot{"Bank utilization, n=" + std::to_string(n) + " k=" + std::to_string(k), "speed-up r", "utilization", {}};
  for (double pa : pas) {
    Series ub{"U_B p_a=" + fmt(pa, 2), {}}, uf{"U_flat p_a=" + fmt(pa, 2), {}};
    for (int r = 1; r <= r_max; ++r) {
      const analytic::ContentionParams p{n, k, r, pa};
      const double e = analytic::expected_slave_utilization(p);
      const double b = analytic::bank_utilization_dsmc(p);
      const double f = analytic::bank_utilization_flat(p);
      write_csv_row(*out.os, {std::to_string(n), std::to_string(k), std::to_string(r), fmt(pa, 4), fmt(e),
                              fmt(analytic::bank_utilization_single(p)), fmt(b), fmt(f),
                              fmt(e * k / static_cast<double>(n))});
      ub.points.emplace_back(r, b);
      uf.points.emplace_back(r, f);
    }
    plot.series.push_back(std::move(ub));
    plot.series.push_back(std::move(uf));
  }
  // Large-n limit of the flat crossbar at full load.
  const analytic::ContentionParams big{1000000, 1000000, 1, 1.0};
  write_csv_row(*out.os, {"1000000", "1000000", "1", fmt(1.0, 4), "NA", "NA", "NA",
                          fmt(analytic::bank_utilization_flat(big)), "NA"});
  if (!svg.empty()) write_text(svg, render_svg(plot));
  return 0;
}

int cmd_crossings(int n, const std::string& csv) {
  if (!analytic::is_power_of_two(n) || n < 8) throw CLI::ValidationError("--n", "must be a power of two >= 8");
  Output out(csv);
  auto row = [&](const std::string& key, const std::string& v) { write_csv_row(*out.os, {key, v}); };
  const std::int64_t flat_n = analytic::crossings_flat(n, n);
  const std::int64_t flat_2n = analytic::crossings_flat(2 * n, 2 * n);
  row("quantity", "value");
  row("n", std::to_string(n));
  row("flat_n_by_n", std::to_string(flat_n));
  row("flat_2n_by_2n", std::to_string(flat_2n));
  const auto wires_n = full_bipartite_wires(n, n);
  const auto wires_2n = full_bipartite_wires(2 * n, 2 * n);
  const std::int64_t geo_n = count_crossings_geometric(canonical_embedding(wires_n, natural_order(n), natural_order(n)));
  const std::int64_t geo_2n =
      count_crossings_geometric(canonical_embedding(wires_2n, natural_order(2 * n), natural_order(2 * n)));
  row("flat_n_by_n_geometric", std::to_string(geo_n));
  row("flat_2n_by_2n_geometric", std::to_string(geo_2n));
  row("geometric_check", geo_n == flat_n && geo_2n == flat_2n ? "ok" : "MISMATCH");
  row("crossings_2ary", std::to_string(analytic::crossings_2ary(n)));
  row("crossings_2ary_speedup", fmt(analytic::crossings_2ary_speedup(n), 2));
  row("crossings_between_blocks", fmt(analytic::crossings_between_blocks(n), 2));
  const double ratio = analytic::crossing_reduction_ratio(n);
  row("reduction_ratio", fmt(ratio, 4));
  row("reduction_ratio_from_counts", fmt(analytic::crossing_reduction_ratio_from_counts(n), 4));
  // Each logical wire is a bus of roughly 200 physical wires.
  row("physical_reduction_200_wire_bus", fmt(ratio * 200.0 * 200.0, 0));
  return 0;
}

int cmd_simulate(const std::string& path, const std::optional<std::uint64_t>& seed, const std::string& csv,
                 const std::string& svg, const std::string& trace) {
  RunConfig c = load(path, seed);
  SimStats s;
  if (!trace.empty()) {
    std::ofstream tf(trace);
    if (!tf) throw std::runtime_error("cannot write '" + trace + "'");
    Simulation sim(c.network, c.policy, c.traffic, c.warmup);
    sim.set_trace(&tf);
    sim.run_cycles(c.warmup + c.cycles);
    s = sim.finish();
  } else {
    s = run_config(c);
  }
  Output out(!csv.empty() ? csv : c.csv_path);
  write_csv_row(*out.os, run_csv_header());
  write_csv_row(*out.os, run_csv_row(c, s));
  const std::string svg_path = !svg.empty() ? svg : c.svg_path;
  if (!svg_path.empty()) {
    Plot plot{"Transaction latency distribution", "latency (cycles)", "transactions", {}};
    for (AccessKind kind : {AccessKind::Read, AccessKind::Write}) {
      Series sr{to_string(kind), {}};
      const Histogram h = latency_histogram(s, kind);
      for (const auto& [v, count] : h.bins()) {
        sr.points.emplace_back(static_cast<double>(v), static_cast<double>(count));
      }
      if (!sr.points.empty()) plot.series.push_back(std::move(sr));
    }
    write_text(svg_path, render_svg(plot));
  }
  return 0;
}

int cmd_sweep(const std::vector<std::string>& paths, const std::optional<std::uint64_t>& seed,
              const std::vector<double>& rates, const std::string& csv, const std::string& svg, int threads) {
  std::vector<RunConfig> runs;
  std::vector<std::size_t> per_config;
  std::string csv_path = csv, svg_path = svg;
  for (const auto& p : paths) {
    RunConfig c = load(p, seed);
    if (!rates.empty()) c.rates = rates;
    if (c.rates.empty()) throw ConfigError(0, p + ": sweep needs at least one rate ([sweep] rates or --rates)");
    if (csv_path.empty()) csv_path = c.csv_path;
    if (svg_path.empty()) svg_path = c.svg_path;
    if (threads == 0) threads = c.threads;
    auto expanded = expand_sweep(c);
    per_config.push_back(expanded.size());
    runs.insert(runs.end(), expanded.begin(), expanded.end());
  }
  const auto stats = run_all(runs, threads);
  Output out(csv_path);
  write_csv_row(*out.os, run_csv_header());
  for (std::size_t i = 0; i < runs.size(); ++i) write_csv_row(*out.os, run_csv_row(runs[i], stats[i]));
  if (!svg_path.empty()) {
    Plot plot{"Mean transaction latency vs injection rate", "injection rate", "mean latency (cycles)", {}};
    std::size_t i = 0;
    for (std::size_t c = 0; c < per_config.size(); ++c) {
      Series s{runs[i].label, {}};
      for (std::size_t j = 0; j < per_config[c]; ++j, ++i) {
        const Histogram h = latency_histogram(stats[i]);
        s.points.emplace_back(runs[i].traffic.injection_rate, h.empty() ? NAN : h.mean());
      }
      plot.series.push_back(std::move(s));
    }
    write_text(svg_path, render_svg(plot));
  }
  return 0;
}

int cmd_compare(const std::string& pa, const std::string& pb, const std::optional<std::uint64_t>& seed,
                const std::string& csv, const std::string& svg, int threads) {
  const RunConfig a = load(pa, seed);
  const RunConfig b = load(pb, seed);
  const auto table = compare_patterns(a, b, threads);
  Output out(csv);
  bool first = true;
  for (const auto& pc : table) {
    write_comparison(*out.os, to_string(pc.pattern), pc.table, first);
    first = false;
  }
  if (!svg.empty()) {
    Plot plot{"Combined throughput by burst pattern", "burst length (mixed plotted at 32)", "read + write throughput",
              {}};
    Series sa{a.label, {}}, sb{b.label, {}};
    for (const auto& pc : table) {
      const double x = pc.pattern == BurstKind::Mixed ? 32.0 : burst_length(pc.pattern);
      for (const auto& r : pc.table.rows) {
        if (r.metric != "combined_throughput") continue;
        sa.points.emplace_back(x, r.value_a);
        sb.points.emplace_back(x, r.value_b);
      }
    }
    plot.series = {sa, sb};
    write_text(svg, render_svg(plot));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed shared memory controller: analysis and simulation"};
  app.require_subcommand(1);

  std::string csv, svg, trace;
  std::optional<std::uint64_t> seed;
  int threads = 0;

  auto* analyze = app.add_subcommand("analyze", "Closed-form utilization table over the speed-up r");
  int an_n = 16, an_k = 16, an_r = 8;
  std::vector<double> an_pa{1.0};
  analyze->add_option("--n", an_n, "master ports")->capture_default_str();
  analyze->add_option("--k", an_k, "slave ports")->capture_default_str();
  analyze->add_option("--pa", an_pa, "injection probabilities")->delimiter(',')->capture_default_str();
  analyze->add_option("--r-max", an_r, "largest speed-up")->capture_default_str();
  analyze->add_option("--csv", csv, "output CSV (default stdout)");
  analyze->add_option("--svg", svg, "output SVG plot");

  auto* crossings = app.add_subcommand("crossings", "Wire crossing counts and the reduction ratio");
  int cr_n = 16;
  crossings->add_option("--n", cr_n, "ports per building block")->capture_default_str();
  crossings->add_option("--csv", csv, "output CSV (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "Run one configuration");
  std::string cfg_a, cfg_b;
  simulate->add_option("config", cfg_a, "config file")->required();
  simulate->add_option("--seed", seed, "override the config seed");
  simulate->add_option("--csv", csv, "output CSV (default: config, else stdout)");
  simulate->add_option("--svg", svg, "latency distribution plot");
  simulate->add_option("--trace", trace, "per-event trace file");

  auto* sweep = app.add_subcommand("sweep", "Injection-rate sweep of one or more configurations");
  std::vector<std::string> sweep_cfgs;
  std::vector<double> rates;
  sweep->add_option("configs", sweep_cfgs, "config files")->required();
  sweep->add_option("--rates", rates, "injection rates (overrides [sweep] rates)")->delimiter(',');
  sweep->add_option("--seed", seed, "override the config seed");
  sweep->add_option("--csv", csv, "output CSV");
  sweep->add_option("--svg", svg, "latency vs rate plot");
  sweep->add_option("--threads", threads, "worker threads (0: all cores)");

  auto* compare = app.add_subcommand("compare", "Compare two configurations over all burst patterns");
  compare->add_option("config_a", cfg_a, "first config")->required();
  compare->add_option("config_b", cfg_b, "baseline config")->required();
  compare->add_option("--seed", seed, "override both config seeds");
  compare->add_option("--csv", csv, "output CSV");
  compare->add_option("--svg", svg, "combined throughput plot");
  compare->add_option("--threads", threads, "worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*analyze) return cmd_analyze(an_n, an_k, an_pa, an_r, csv, svg);
    if (*crossings) return cmd_crossings(cr_n, csv);
    if (*simulate) return cmd_simulate(cfg_a, seed, csv, svg, trace);
    if (*sweep) return cmd_sweep(sweep_cfgs, seed, rates, csv, svg, threads);
    if (*compare) return cmd_compare(cfg_a, cfg_b, seed, csv, svg, threads);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
