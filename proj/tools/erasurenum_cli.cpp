// Command-line front end: validate network files, run the proportional-fair
// rate solver, sweep parameters, simulate, and cross-check against the
// enumeration/grid oracles. All outputs are plain CSV plus a manifest.txt
// echoing the effective configuration.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "erasurenum/kernel.hpp"
#include "erasurenum/model.hpp"
#include "erasurenum/num.hpp"
#include "erasurenum/oracle_sim.hpp"

namespace fs = std::filesystem;
using namespace erasurenum;

namespace {

constexpr int kExitParse = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitVerifyFailed = 4;

struct Options {
  std::string input;
  std::string out_dir = ".";
  double step = 0.0;
  int iters = 100000;
  double feas_tol = 1e-8;
  std::uint64_t seed = 1;
  std::int64_t slots = 1000000;
  std::string axis;
  std::string range;  // LO:HI:STEP
  double mesh = 0.02;
  double lambda = 0.01;
  bool corrupt_bound = false;  // negative-control hook for `verify`
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

NetworkSpec load_network(const std::string& path) { return parse_network(read_file(path)); }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

SolverConfig solver_config(const Options& opt) {
  SolverConfig cfg;
  cfg.step_size = opt.step;
  cfg.max_iters = opt.iters;
  cfg.feas_tol = opt.feas_tol;
  return cfg;
}

void write_manifest(const Options& opt, const std::string& command) {
  std::ostringstream m;
  m.precision(17);
  m << "command=" << command << "\ninput=" << opt.input << "\nout=" << opt.out_dir
    << "\nstep=" << opt.step << "\niters=" << opt.iters << "\nfeas_tol=" << opt.feas_tol
    << "\nseed=" << opt.seed << "\nslots=" << opt.slots << "\nmesh=" << opt.mesh;
  if (!opt.axis.empty()) m << "\naxis=" << opt.axis << "\nrange=" << opt.range
                           << "\nlambda=" << opt.lambda;
  m << "\n";
  write_file(fs::path(opt.out_dir) / "manifest.txt", m.str());
}

const char* boundary_name(Boundary b) {
  switch (b) {
    case Boundary::at_min: return "at_min";
    case Boundary::at_max: return "at_max";
    default: return "interior";
  }
}

int cmd_validate(const Options& opt) {
  const auto net = load_network(opt.input);
  const auto diags = validate(net);
  if (diags.empty()) {
    std::cout << "ok: " << net.cells.size() << " cells, " << net.flows.size() << " flows\n";
    return 0;
  }
  for (const auto& d : diags) std::cerr << d.code << " " << d.where << ": " << d.message << "\n";
  return kExitValidation;
}

void write_solve_outputs(const Options& opt, const NetworkSpec& net, const SolveReport& rep) {
  std::ostringstream sol;
  sol.precision(12);
  sol << "flow,rate,theta,error,throughput,boundary,lambda,integer_codeword\n";
  for (const auto& f : net.flows) {
    const auto& a = rep.allocation.at(f.id);
    sol << f.id << ',' << a.rate << ',' << a.theta << ',' << a.error << ','
        << rep.throughputs.at(f.id) << ',' << boundary_name(a.boundary) << ','
        << rep.lambdas.at(f.id) << ','
        << std::int64_t(std::ceil(double(f.packet_symbols) / a.rate)) << '\n';
  }
  write_file(fs::path(opt.out_dir) / "solution.csv", sol.str());

  std::ostringstream cells;
  cells.precision(12);
  cells << "cell,price,slack\n";
  for (const auto& c : net.cells)
    cells << c.id << ',' << rep.prices.at(c.id) << ',' << rep.slacks.at(c.id) << '\n';
  write_file(fs::path(opt.out_dir) / "cells.csv", cells.str());

  std::ostringstream tr;
  tr.precision(12);
  tr << "iter,utility,dual,max_violation\n";
  for (std::size_t i = 0; i < rep.trace.size(); ++i)
    tr << i + 1 << ',' << rep.trace[i].utility << ',' << rep.trace[i].dual << ','
       << rep.trace[i].max_violation << '\n';
  write_file(fs::path(opt.out_dir) / "trace.csv", tr.str());
}

int cmd_solve(const Options& opt) {
  const auto net = load_network(opt.input);
  const auto diags = validate(net);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << d.code << " " << d.where << ": " << d.message << "\n";
    return kExitValidation;
  }
  const auto rep = solve(net, solver_config(opt));
  write_solve_outputs(opt, net, rep);
  write_manifest(opt, "solve");
  if (!rep.converged) {
    std::cerr << "solver did not converge in " << rep.iterations << " iterations\n";
    return kExitNoConvergence;
  }
  std::cout << "converged in " << rep.iterations << " iterations, utility " << rep.utility
            << "\n";
  return 0;
}

int cmd_sweep(const Options& opt) {
  const auto net = load_network(opt.input);
  if (net.flows.empty()) throw std::runtime_error("no flows");
  const auto& f = net.flows.front();

  double lo = 0, hi = 0, step = 0;
  {
    char c1, c2;
    std::istringstream rs(opt.range);
    if (!(rs >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0 || hi < lo)
      throw std::runtime_error("bad --range, need LO:HI:STEP with STEP>0");
  }

  std::ostringstream out;
  out.precision(12);
  out << "axis,value,rate,theta,error,throughput,boundary\n";
  bool rate_nondecreasing = true, error_nondecreasing = true;
  double prev_rate = -1.0, prev_error = -1.0;
  for (double v = lo; v <= hi + 1e-12; v += step) {
    FlowProblem prob;
    prob.packet_symbols = f.packet_symbols;
    prob.deadline = f.deadline_slots;
    prob.erasure = end_to_end_erasure(f);
    prob.rate_min = f.rate_min;
    prob.rate_max = f.rate_max;
    prob.price = opt.lambda;
    if (opt.axis == "deadline")
      prob.deadline = std::max(1, int(std::lround(v)));
    else if (opt.axis == "erasure")
      prob.erasure = v;
    else if (opt.axis == "price")
      prob.price = v;
    else
      throw std::runtime_error("unknown --axis, need deadline|erasure|price");
    try {
      const auto sol = solve_flow_rate(prob);
      out << opt.axis << ',' << v << ',' << sol.rate << ',' << sol.theta << ',' << sol.error
          << ',' << double(prob.packet_symbols) * (1.0 - sol.error) << ','
          << boundary_name(sol.boundary) << '\n';
      if (prev_rate >= 0 && sol.rate < prev_rate - 1e-12) rate_nondecreasing = false;
      if (prev_error >= 0 && sol.error < prev_error - 1e-12) error_nondecreasing = false;
      prev_rate = sol.rate;
      prev_error = sol.error;
    } catch (const std::exception& e) {
      out << opt.axis << ',' << v << ",error:" << e.what() << ",,,,\n";
    }
  }
  write_file(fs::path(opt.out_dir) / "sweep.csv", out.str());
  write_manifest(opt, "sweep");
  std::cout << "monotone rate=" << (rate_nondecreasing ? "nondecreasing" : "no")
            << " error=" << (error_nondecreasing ? "nondecreasing" : "no") << "\n";
  return 0;
}

int cmd_simulate(const Options& opt) {
  const auto net = load_network(opt.input);
  const auto diags = validate(net);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << d.code << " " << d.where << ": " << d.message << "\n";
    return kExitValidation;
  }
  const auto rep = solve(net, solver_config(opt));
  if (!rep.converged) {
    std::cerr << "solver did not converge; cannot pick simulation rates\n";
    return kExitNoConvergence;
  }
  std::ostringstream out;
  out.precision(12);
  out << "flow,slots,failures,error_rate,ci,exact,bound\n";
  std::uint64_t stream = opt.seed;
  for (const auto& f : net.flows) {
    const auto& a = rep.allocation.at(f.id);
    const double beta = end_to_end_erasure(f);
    const auto phi = optimal_phi(f.deadline_slots);
    const auto [trace, sum] = simulate_flow(f.packet_symbols, phi, a.rate, beta, opt.slots,
                                            stream++);
    out << f.id << ',' << opt.slots << ',' << sum.failures << ',' << sum.error_rate << ','
        << sum.ci_halfwidth << ',';
    if (f.deadline_slots <= 24) out << exact_error_probability(phi, a.rate, beta);
    out << ',' << a.error << '\n';
  }
  write_file(fs::path(opt.out_dir) / "sim.csv", out.str());
  write_manifest(opt, "simulate");
  return 0;
}

struct Check {
  std::string name;
  std::string status;  // pass / fail / skipped
  double measured;
  double threshold;
};

int cmd_verify(const Options& opt) {
  std::vector<Check> checks;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> ub(0.01, 0.5);

  // Lemma-1 dominance over random instances.
  {
    double worst = -1e300;
    for (int i = 0; i < 200; ++i) {
      const double beta = ub(rng);
      const int d = 1 + int(rng() % 12);
      std::uniform_real_distribution<double> ur(0.05, 1.0 - beta - 0.05);
      const ChannelPoint pt{ur(rng), beta, d};
      SpreadVector phi(d);
      for (int j = 0; j < d; ++j) phi[j] = -std::log(counter_uniform(opt.seed, i * 32 + j));
      phi /= phi.sum();
      const double exact = exact_error_probability(phi, pt.rate, pt.erasure);
      const double theta_star = optimal_theta(pt);
      for (double s : {0.1, 1.0, 10.0}) {
        double bound = chernoff_bound(phi, pt, s * theta_star);
        if (opt.corrupt_bound) bound *= 0.5;
        worst = std::max(worst, exact - bound);
      }
    }
    checks.push_back({"bound_dominance", worst <= 1e-12 ? "pass" : "fail", worst, 1e-12});
  }

  // Equal-split optimality on simplex grids, D = 2..4.
  {
    double worst = 0.0;
    for (int d = 2; d <= 4; ++d) {
      const ChannelPoint pt{0.4, 0.15, d};
      const double theta = optimal_theta(pt);
      const double at_equal = chernoff_bound(optimal_phi(d), pt, theta);
      // walk the mesh-0.05 simplex grid
      std::function<void(SpreadVector&, int, int)> rec = [&](SpreadVector& cur, int pos,
                                                             int left) {
        if (pos == d - 1) {
          cur[pos] = left * 0.05;
          worst = std::max(worst, at_equal - chernoff_bound(cur, pt, theta));
          return;
        }
        for (int s = 0; s <= left; ++s) {
          cur[pos] = s * 0.05;
          rec(cur, pos + 1, left - s);
        }
      };
      SpreadVector cur(d);
      rec(cur, 0, 20);
    }
    checks.push_back({"phi_equal_split", worst <= 1e-9 ? "pass" : "fail", worst, 1e-9});
  }

  // Closed-form theta* against a log-grid scan.
  {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double beta = ub(rng);
      const int d = 1 + int(rng() % 10);
      std::uniform_real_distribution<double> ur(0.05, 1.0 - beta - 0.05);
      const ChannelPoint pt{ur(rng), beta, d};
      const double theta_star = optimal_theta(pt);
      const double at_star = chernoff_bound(optimal_phi(d), pt, theta_star);
      for (int j = 0; j <= 200; ++j) {
        const double theta = theta_star * std::pow(100.0, -1.0 + j / 100.0);
        worst = std::max(worst, at_star - chernoff_bound(optimal_phi(d), pt, theta));
      }
    }
    checks.push_back({"theta_closed_form", worst <= 1e-12 ? "pass" : "fail", worst, 1e-12});
  }

  // Simulation against enumeration on the input's flows (if given).
  if (!opt.input.empty()) {
    const auto net = load_network(opt.input);
    double worst = 0.0;
    bool any = false, skipped = false;
    std::uint64_t stream = opt.seed;
    for (const auto& f : net.flows) {
      if (f.deadline_slots > 24) {
        skipped = true;
        continue;
      }
      any = true;
      const double beta = end_to_end_erasure(f);
      const double r = 0.5 * (f.rate_min + std::min(f.rate_max, 1.0 - beta));
      const auto phi = optimal_phi(f.deadline_slots);
      const double exact = exact_error_probability(phi, r, beta);
      const auto [trace, sum] = simulate_flow(f.packet_symbols, phi, r, beta,
                                              std::min<std::int64_t>(opt.slots, 1000000),
                                              stream++);
      worst = std::max(worst, std::abs(sum.error_rate - exact) - sum.ci_halfwidth);
    }
    if (!any)
      checks.push_back({"sim_vs_exact", "skipped", 0.0, 0.0});
    else
      checks.push_back({"sim_vs_exact", worst <= 0.0 ? "pass" : "fail", worst, 0.0});
    if (skipped) checks.push_back({"sim_vs_exact_large_D", "skipped", 0.0, 0.0});

    // Joint optimality via grid search, when the instance is small enough.
    bool small = net.flows.size() <= 2;
    for (const auto& f : net.flows) small = small && f.deadline_slots <= 4;
    if (small && validate(net).empty()) {
      const auto rep = solve(net, solver_config(opt));
      const auto grid = grid_search_joint(net, std::max(opt.mesh, 0.01));
      const double gap = grid.best_utility - rep.utility;
      checks.push_back({"joint_optimality", gap <= 1e-3 ? "pass" : "fail", gap, 1e-3});
    } else {
      checks.push_back({"joint_optimality", "skipped", 0.0, 0.0});
    }
  }

  std::ostringstream out;
  out.precision(12);
  out << "check,status,measured,threshold\n";
  bool all_pass = true;
  for (const auto& c : checks) {
    out << c.name << ',' << c.status << ',' << c.measured << ',' << c.threshold << '\n';
    std::cout << c.name << ": " << c.status << "\n";
    if (c.status == "fail") all_pass = false;
  }
  write_file(fs::path(opt.out_dir) / "verify.csv", out.str());
  write_manifest(opt, "verify");
  return all_pass ? 0 : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proportional-fair coding rates for erasure-coded flows on TDMA cells"};
  app.require_subcommand(1);
  Options opt;
  if (const char* env = std::getenv("ERASURENUM_SEED")) opt.seed = std::strtoull(env, nullptr, 10);

  auto add_common = [&](CLI::App* sub, bool needs_input) {
    auto* in = sub->add_option("--input", opt.input, "network description file");
    if (needs_input) in->required();
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--step", opt.step, "subgradient step size (0 = auto)");
    sub->add_option("--iters", opt.iters, "max subgradient iterations");
    sub->add_option("--feas-tol", opt.feas_tol, "feasibility tolerance");
    sub->add_option("--seed", opt.seed, "RNG seed (ERASURENUM_SEED fallback)");
    sub->add_option("--slots", opt.slots, "simulation slots");
    sub->add_option("--mesh", opt.mesh, "grid mesh for verification");
  };

  auto* v = app.add_subcommand("validate", "parse and check a network file");
  add_common(v, true);
  auto* s = app.add_subcommand("solve", "run the NUM solver");
  add_common(s, true);
  auto* sw = app.add_subcommand("sweep", "sweep one axis of the first flow");
  add_common(sw, true);
  sw->add_option("--axis", opt.axis, "deadline|erasure|price")->required();
  sw->add_option("--range", opt.range, "LO:HI:STEP")->required();
  sw->add_option("--lambda", opt.lambda, "fixed price for deadline/erasure sweeps");
  auto* sim = app.add_subcommand("simulate", "solve then Monte Carlo the converged rates");
  add_common(sim, true);
  auto* ver = app.add_subcommand("verify", "run the oracle cross-check suite");
  add_common(ver, false);
  ver->add_flag("--corrupt-bound", opt.corrupt_bound)->group("");  // test hook, hidden

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(opt.out_dir);
    if (v->parsed()) return cmd_validate(opt);
    if (s->parsed()) return cmd_solve(opt);
    if (sw->parsed()) return cmd_sweep(opt);
    if (sim->parsed()) return cmd_simulate(opt);
    if (ver->parsed()) return cmd_verify(opt);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  return 0;
}
