// transship: command-line driver for the analytic bounds, sweeps,
// tessellations and the discrete grid experiments.
//
// Exit codes: 0 ok, 2 usage, 3 verification failure, 4 I/O, 1 anything else.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "transship/bounds.hpp"
#include "transship/discrete.hpp"
#include "transship/tessellation.hpp"

namespace {

using namespace transship;

constexpr int kExitUsage = 2;
constexpr int kExitVerify = 3;
constexpr int kExitIo = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Costs {
  double f = 1.0, c = 1.0, lambda = 1.0, C = 0.0;

  SystemParams params() const { return SystemParams{f, c, lambda, C}; }
};

void add_cost_flags(CLI::App* sub, Costs& costs, bool require_f) {
  auto* f = sub->add_option("--f", costs.f, "facility cost per unit time")->check(CLI::PositiveNumber);
  if (require_f) f->required();
  sub->add_option("--c", costs.c, "outbound cost per unit distance per unit demand")->check(CLI::PositiveNumber);
  sub->add_option("--lambda", costs.lambda, "demand density")->check(CLI::PositiveNumber);
  sub->add_option("--C", costs.C, "inbound cost per unit distance")->check(CLI::NonNegativeNumber);
}

Metric metric_of(const std::string& s) {
  try {
    return parse_metric(s);
  } catch (const std::invalid_argument&) {
    throw UsageError("--metric must be euclid or l1, got '" + s + "'");
  }
}

// Resolved configuration of a subcommand: every option with its effective value.
Metadata resolved_config(const CLI::App* sub) {
  Metadata meta;
  meta.add("tool", "transship " + std::string(kToolVersion));
  meta.add("command", sub->get_name());
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    std::string value;
    if (opt->count() > 0 || !opt->results().empty()) {
      for (const auto& v : opt->results()) value += (value.empty() ? "" : ",") + v;
    } else {
      value = opt->get_default_str();
    }
    if (opt->get_expected_min() == 0 && value.empty()) value = opt->count() ? "true" : "false";
    meta.add(name, value);
  }
  return meta;
}

void write_text(const std::string& path, const std::string& content) { transship::detail::write_file(path, content); }

std::string fmt(double v, int digits = 6) { return format_number(v, digits); }

// ---------------------------------------------------------------------------

struct BoundsArgs {
  Costs costs;
  std::string metric = "euclid";
  std::string json;
};

nlohmann::json density_json(const DensityResult& d) {
  return {{"cost", d.cost.total},
          {"facility", d.cost.facility},
          {"outbound", d.cost.outbound},
          {"inbound", d.cost.inbound},
          {"g", d.g_value},
          {"area_per_facility", d.area_per_facility}};
}

int run_bounds(const BoundsArgs& a, const CLI::App* sub) {
  const SystemParams p = a.costs.params();
  const Metric m = metric_of(a.metric);
  const Metadata meta = resolved_config(sub);
  nlohmann::json out;
  for (const auto& [k, v] : meta.entries) out["meta"][k] = v;
  std::cout << "kappa = " << fmt(p.kappa()) << ", r = " << fmt(p.r()) << "\n";
  if (m == Metric::euclid) {
    const auto ub = euclidean_upper_bound(p);
    const auto lb = euclidean_lower_bound(p);
    const double gap = ub.density.cost.total / lb.density.cost.total - 1.0;
    std::cout << "upper bound (cyclic hexagon): cost " << fmt(ub.density.cost.total, 10) << ", alpha "
              << fmt(to_degrees(ub.shape.alpha)) << " deg, alpha_bar " << fmt(to_degrees(ub.shape.alpha_bar))
              << " deg, A/N " << fmt(ub.density.area_per_facility, 10) << "\n";
    std::cout << "lower bound (n -> infinity): cost " << fmt(lb.density.cost.total, 10) << ", alpha "
              << fmt(to_degrees(lb.shape.alpha)) << " deg, A/N " << fmt(lb.density.area_per_facility, 10) << "\n";
    std::cout << "gap " << fmt(100.0 * gap, 4) << " %\n";
    out["upper_bound"] = density_json(ub.density);
    out["upper_bound"]["alpha_deg"] = to_degrees(ub.shape.alpha);
    out["upper_bound"]["alpha_bar_deg"] = to_degrees(ub.shape.alpha_bar);
    out["lower_bound"] = density_json(lb.density);
    out["lower_bound"]["alpha_deg"] = to_degrees(lb.shape.alpha);
    out["gap"] = gap;
  } else {
    const auto opt = l1_optimum(p);
    std::cout << "L1 optimum (" << (p.r() == 0.0 ? "square" : "elongated hexagon")
              << "): cost " << fmt(opt.density.cost.total, 10) << ", alpha " << fmt(to_degrees(opt.alpha))
              << " deg, alpha_bar " << fmt(to_degrees(opt.alpha_bar)) << " deg, A/N "
              << fmt(opt.density.area_per_facility, 10) << "\n";
    out["l1_optimum"] = density_json(opt.density);
    out["l1_optimum"]["alpha_deg"] = to_degrees(opt.alpha);
    out["l1_optimum"]["alpha_bar_deg"] = to_degrees(opt.alpha_bar);
  }
  if (!a.json.empty()) write_text(a.json, out.dump(1) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  Costs costs;
  double r_min = 0.0, r_max = 20.0;
  int steps = 200;
  bool raw = false;
  std::string quantity = "cost";
  std::string out, plot;
};

int run_sweep(const SweepArgs& a, const CLI::App* sub) {
  if (!(a.r_min < a.r_max)) throw UsageError("--r-min must be below --r-max");
  if (a.steps < 2) throw UsageError("--steps must be at least 2");
  if (a.quantity != "cost" && a.quantity != "alpha") throw UsageError("--plot-quantity must be cost or alpha");
  const auto rows = sensitivity_sweep(a.costs.params(), a.r_min, a.r_max, a.steps, !a.raw);
  const Metadata meta = resolved_config(sub);
  std::ostringstream csv;
  write_sweep_csv(csv, rows, meta);
  if (a.out.empty())
    std::cout << csv.str();
  else
    write_text(a.out, csv.str());
  if (!a.plot.empty()) {
    std::ostringstream svg;
    write_sweep_svg(svg, rows, a.quantity == "cost" ? PlotQuantity::cost : PlotQuantity::alpha, meta);
    write_text(a.plot, svg.str());
  }
  if (!a.out.empty()) std::cerr << rows.size() << " rows written to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TessellateArgs {
  Costs costs;
  std::string metric = "euclid";
  double r = 1.0;
  int rows = 6, cols = 6;
  std::string out_svg, out_json;
  std::uint64_t verify_samples = 0;
  std::uint64_t seed = 1;
  double tolerance = 0.005;
};

int run_tessellate(const TessellateArgs& a, const CLI::App* sub) {
  const Metric m = metric_of(a.metric);
  SystemParams p = a.costs.params();
  p.inbound_rate_C = a.r * p.outbound_rate_c * p.demand_density_lambda;
  const Tessellation t = build_tessellation(m, p, a.rows, a.cols);
  const Metadata meta = resolved_config(sub);
  if (!a.out_svg.empty()) export_geometry(t, GeometryFormat::svg, a.out_svg, meta);
  if (!a.out_json.empty()) export_geometry(t, GeometryFormat::json, a.out_json, meta);
  std::cout << t.size() << " regions, alpha " << fmt(to_degrees(t.alpha)) << " deg, alpha_bar "
            << fmt(to_degrees(t.alpha_bar)) << " deg, A/N " << fmt(t.area_per_facility, 10) << "\n";
  if (a.verify_samples == 0) return 0;
  if (t.interior_indices().empty()) {
    std::cout << "no interior regions; verification skipped\n";
    return 0;
  }
  bool ok = true;
  const auto part = validate_partition(t, a.verify_samples, a.seed);
  std::cout << "partition: " << part.samples_used << " samples, " << part.uncovered << " uncovered, "
            << part.overlapping << " overlapping, " << part.wrong_owner << " wrong owner\n";
  ok = ok && part.valid();
  const auto mc = monte_carlo_cost(t, p, std::max<std::uint64_t>(a.verify_samples, 10000), a.seed);
  const double analytic =
      m == Metric::euclid ? euclidean_upper_bound(p).density.cost.total : l1_optimum(p).density.cost.total;
  const double rel = mc.cost.total / analytic - 1.0;
  std::cout << "cost: monte carlo " << fmt(mc.cost.total, 8) << " (outbound stderr " << fmt(mc.outbound_stderr, 3)
            << "), analytic " << fmt(analytic, 8) << ", relative difference " << fmt(100.0 * rel, 3) << " %\n";
  ok = ok && std::abs(rel) <= a.tolerance;
  std::cout << (ok ? "verification passed" : "verification FAILED") << "\n";
  return ok ? 0 : kExitVerify;
}

// ---------------------------------------------------------------------------

struct GridArgs {
  int m = 10;
  double f = 10.0, c = 1.0, C = 1.0;
  std::string metric = "euclid";
  int depot = 0;

  grid::GridInstance instance() const {
    grid::GridInstance inst{m, f, c, C, metric_of(metric), depot};
    try {
      inst.validate();
    } catch (const std::domain_error& e) {
      throw UsageError(e.what());
    }
    return inst;
  }
};

void add_grid_flags(CLI::App* sub, GridArgs& g) {
  sub->add_option("--m", g.m, "grid dimension (m x m points)")->check(CLI::Range(2, 1000));
  sub->add_option("--f", g.f, "facility cost per candidate")->check(CLI::PositiveNumber);
  sub->add_option("--c", g.c, "outbound cost per unit distance")->check(CLI::PositiveNumber);
  sub->add_option("--C", g.C, "inbound cost per unit distance")->check(CLI::PositiveNumber);
  sub->add_option("--metric", g.metric, "euclid or l1");
  sub->add_option("--depot", g.depot, "depot grid index")->check(CLI::NonNegativeNumber);
}

struct SolveArgs {
  GridArgs grid;
  std::uint64_t seed = 1;
  int runs = 1;
  grid::AnnealingSchedule schedule;
  bool oracle = false;
  std::string out, trace;
};

int run_solve_grid(const SolveArgs& a, const CLI::App* sub) {
  const auto inst = a.grid.instance();
  if (a.runs < 1) throw UsageError("--runs must be at least 1");
  try {
    a.schedule.validate();
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < a.runs; ++k) seeds.push_back(a.seed + static_cast<std::uint64_t>(k));
  const auto runs = grid::anneal_runs(inst, a.schedule, seeds);
  for (const auto& r : runs)
    std::cout << "seed " << r.seed << ": objective " << fmt(r.best.objective.total, 10) << ", "
              << r.best.facilities.size() << " facilities\n";
  const auto& best = grid::best_run(runs);
  const auto& sol = best.best;
  std::cout << "best: objective " << fmt(sol.objective.total, 10) << " (facility " << fmt(sol.objective.facility)
            << ", outbound " << fmt(sol.objective.outbound) << ", inbound " << fmt(sol.objective.inbound) << "), "
            << sol.facilities.size() << " facilities\n";
  const Metadata meta = resolved_config(sub);
  if (!a.out.empty()) write_text(a.out, grid::solution_to_json(inst, sol, meta).dump(1) + "\n");
  if (!a.trace.empty()) {
    std::ostringstream os;
    meta.write_comment_block(os, "# ");
    os << "step,best_objective\n";
    for (std::size_t k = 0; k < best.best_trace.size(); ++k) os << k << ',' << format_number(best.best_trace[k]) << '\n';
    write_text(a.trace, os.str());
  }
  if (a.oracle) {
    const auto ex = grid::exhaustive_optimum(inst);
    const double rel = std::abs(sol.objective.total - ex.objective.total) / ex.objective.total;
    std::cout << "exhaustive optimum " << fmt(ex.objective.total, 10) << (rel <= 1e-9 ? " (matched)" : " (MISMATCH)")
              << "\n";
    if (rel > 1e-9) return kExitVerify;
  }
  return 0;
}

struct AnglesArgs {
  std::string solution, out;
};

int run_measure_angles(const AnglesArgs& a, const CLI::App* sub) {
  std::ifstream in(a.solution);
  if (!in) throw IoError("cannot open '" + a.solution + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse '" + a.solution + "': " + e.what());
  }
  const auto [inst, sol] = grid::solution_from_json(j);
  const auto report = grid::measure_basic_angles(inst, sol);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  std::size_t hexagonal = 0;
  for (const auto& c : report.cells) hexagonal += c.n_edges == 6;
  std::cout << report.cells.size() << " interior facilities (" << hexagonal << " hexagonal): alpha "
            << fmt(report.mean_alpha_deg, 4) << " +- " << fmt(report.std_alpha_deg, 3) << " deg, alpha_bar "
            << fmt(report.mean_alpha_bar_deg, 4) << " +- " << fmt(report.std_alpha_bar_deg, 3) << " deg\n";
  const auto& ref = inst.metric == Metric::euclid ? grid::kReferenceEuclideanFixture : grid::kReferenceL1Fixture;
  std::cout << "reference run (m=" << ref.m << ", f=" << ref.facility_cost << ", C=" << ref.inbound_rate
            << "): measured alpha " << ref.measured_alpha_deg << ", theoretical alpha " << ref.theoretical_alpha_deg;
  if (inst.metric == Metric::euclid)
    std::cout << "; measured alpha_bar " << ref.measured_alpha_bar_deg << ", theoretical alpha_bar "
              << ref.theoretical_alpha_bar_deg << ", facilities ~" << ref.theoretical_facilities;
  std::cout << " (for comparison only)\n";
  std::ostringstream csv;
  grid::write_angle_csv(csv, report, resolved_config(sub));
  if (a.out.empty())
    std::cout << csv.str();
  else
    write_text(a.out, csv.str());
  return 0;
}

struct MipArgs {
  GridArgs grid;
  std::string out;
};

int run_export_mip(const MipArgs& a, const CLI::App* sub) {
  const auto inst = a.grid.instance();
  const auto c = grid::export_mip(inst, a.out, resolved_config(sub));
  std::cout << "variables: " << c.x_vars << " X, " << c.y_vars << " Y, " << c.z_vars << " Z, " << c.u_vars << " u\n";
  std::cout << "constraints: " << c.assign_rows << " assignment, " << c.link_rows << " linking, " << c.in_degree_rows
            << " in-degree, " << c.out_degree_rows << " out-degree, " << c.mtz_rows << " subtour\n";
  return 0;
}

struct InventoryArgs {
  Costs costs;
  std::vector<double> b{1.0}, h{1.0};
  std::vector<double> r{0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
  std::string out;
};

int run_inventory(const InventoryArgs& a, const CLI::App* sub) {
  std::vector<InventoryParams> inv;
  for (double b : a.b)
    for (double h : a.h) inv.push_back({b, h});
  for (double r : a.r)
    if (!(r >= 0.0)) throw UsageError("--r values must be non-negative");
  const auto rows = inventory_comparison(a.costs.params(), inv, a.r);
  std::ostringstream csv;
  write_inventory_csv(csv, rows, resolved_config(sub));
  if (a.out.empty())
    std::cout << csv.str();
  else
    write_text(a.out, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transshipment facility layout: bounds, tessellations and grid experiments", "transship"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.set_config("--config", "", "TOML/INI file whose keys match flag names; flags override it");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  BoundsArgs bounds;
  auto* c_bounds = app.add_subcommand("bounds", "analytic bounds (Euclidean) or exact optimum (L1)");
  add_cost_flags(c_bounds, bounds.costs, true);
  c_bounds->add_option("--metric", bounds.metric, "euclid or l1");
  c_bounds->add_option("--json", bounds.json, "also write the report as JSON");

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "designs over a linear r grid (CSV, optional SVG plot)");
  add_cost_flags(c_sweep, sweep.costs, false);
  c_sweep->add_option("--r-min", sweep.r_min)->check(CLI::NonNegativeNumber);
  c_sweep->add_option("--r-max", sweep.r_max)->check(CLI::NonNegativeNumber);
  c_sweep->add_option("--steps", sweep.steps);
  c_sweep->add_flag("--raw", sweep.raw, "use --f/--c/--lambda instead of kappa = f = 1");
  c_sweep->add_option("--out", sweep.out, "CSV path (stdout when empty)");
  c_sweep->add_option("--plot", sweep.plot, "SVG plot path");
  c_sweep->add_option("--plot-quantity", sweep.quantity, "cost or alpha");

  TessellateArgs tess;
  auto* c_tess = app.add_subcommand("tessellate", "build a block of optimal regions and verify it");
  add_cost_flags(c_tess, tess.costs, false);
  c_tess->remove_option(c_tess->get_option("--C"));
  c_tess->add_option("--metric", tess.metric, "euclid or l1");
  c_tess->add_option("--r", tess.r, "inbound ratio C/(c lambda)")->check(CLI::NonNegativeNumber);
  c_tess->add_option("--rows", tess.rows)->check(CLI::Range(1, 10000));
  c_tess->add_option("--cols", tess.cols)->check(CLI::Range(1, 10000));
  c_tess->add_option("--out-svg", tess.out_svg);
  c_tess->add_option("--out-json", tess.out_json);
  c_tess->add_option("--verify-samples", tess.verify_samples, "Monte Carlo samples; 0 skips verification");
  c_tess->add_option("--tolerance", tess.tolerance, "relative cost tolerance")->check(CLI::PositiveNumber);
  c_tess->add_option("--seed", tess.seed)->envname("TRANSSHIP_SEED");

  SolveArgs solve;
  auto* c_solve = app.add_subcommand("solve-grid", "simulated annealing on an m x m grid instance");
  add_grid_flags(c_solve, solve.grid);
  c_solve->add_option("--seed", solve.seed)->envname("TRANSSHIP_SEED");
  c_solve->add_option("--runs", solve.runs, "independent runs with seeds seed, seed+1, ...");
  c_solve->add_option("--t0", solve.schedule.initial_temperature, "initial temperature; <= 0 means 10% of start");
  c_solve->add_option("--cooling", solve.schedule.cooling);
  c_solve->add_option("--temperature-steps", solve.schedule.temperature_steps);
  c_solve->add_option("--moves", solve.schedule.moves_per_temperature, "moves per temperature");
  c_solve->add_option("--exact-tour-max", solve.schedule.exact_tour_max, "route sets up to this size exactly");
  c_solve->add_flag("--oracle", solve.oracle, "compare against the exhaustive optimum (m <= 4)");
  c_solve->add_option("--out", solve.out, "solution JSON path");
  c_solve->add_option("--trace", solve.trace, "best-so-far trace CSV path");

  AnglesArgs angles;
  auto* c_angles = app.add_subcommand("measure-angles", "basic angles of a grid solution's interior cells");
  c_angles->add_option("--solution", angles.solution, "solution JSON from solve-grid")->required();
  c_angles->add_option("--out", angles.out, "CSV path (stdout when empty)");

  MipArgs mip;
  auto* c_mip = app.add_subcommand("export-mip", "write the location-routing MIP in LP format");
  add_grid_flags(c_mip, mip.grid);
  c_mip->add_option("--out", mip.out, "LP file path")->required();

  InventoryArgs inv;
  auto* c_inv = app.add_subcommand("inventory", "cost increase from EOQ inventory over (b, h, r) grids");
  c_inv->set_help_flag("--help", "Print this help message and exit");
  add_cost_flags(c_inv, inv.costs, false);
  c_inv->remove_option(c_inv->get_option("--C"));
  c_inv->add_option("--b", inv.b, "order cost coefficients")->check(CLI::NonNegativeNumber);
  c_inv->add_option("--h", inv.h, "holding cost coefficients")->check(CLI::NonNegativeNumber);
  c_inv->add_option("--r", inv.r, "inbound ratios");
  c_inv->add_option("--out", inv.out, "CSV path (stdout when empty)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (c_bounds->parsed()) return run_bounds(bounds, c_bounds);
    if (c_sweep->parsed()) return run_sweep(sweep, c_sweep);
    if (c_tess->parsed()) return run_tessellate(tess, c_tess);
    if (c_solve->parsed()) return run_solve_grid(solve, c_solve);
    if (c_angles->parsed()) return run_measure_angles(angles, c_angles);
    if (c_mip->parsed()) return run_export_mip(mip, c_mip);
    if (c_inv->parsed()) return run_inventory(inv, c_inv);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::length_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
