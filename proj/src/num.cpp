#include "erasurenum/num.hpp"

#include <cmath>
#include <stdexcept>

#include "erasurenum/kernel.hpp"
#include "erasurenum/oracle_sim.hpp"

namespace erasurenum {

double utility_of(const std::map<std::string, FlowSolution>& allocation) {
  double u = 0.0;
  for (const auto& [id, sol] : allocation) {
    if (sol.error >= 1.0)
      throw std::domain_error("flow " + id + " has error >= 1, utility undefined");
    u += std::log1p(-sol.error);
  }
  return u;
}

double throughput_of(const FlowSpec& flow, double error) {
  if (error < 0.0 || error > 1.0) throw std::domain_error("error must be in [0,1]");
  return static_cast<double>(flow.packet_symbols) * (1.0 - error);
}

namespace {

FlowProblem make_problem(const FlowSpec& f, double lambda) {
  FlowProblem prob;
  prob.packet_symbols = f.packet_symbols;
  prob.deadline = f.deadline_slots;
  prob.erasure = end_to_end_erasure(f);
  prob.rate_min = f.rate_min;
  prob.rate_max = f.rate_max;
  prob.price = lambda;
  return prob;
}

std::map<std::string, FlowSolution> solve_all_flows(const NetworkSpec& net,
                                                    const PriceVector& prices,
                                                    std::map<std::string, double>* lambdas_out) {
  std::map<std::string, FlowSolution> rates;
  for (const auto& f : net.flows) {
    const double lambda = price_weighted_cost(prices, f);
    if (lambdas_out) (*lambdas_out)[f.id] = lambda;
    // Tighter than the default rate tolerance: the complementarity stopping
    // rule needs slack resolved to ~1e-13 even when prices are O(100).
    rates[f.id] = solve_flow_rate(make_problem(f, lambda), 1e-14);
  }
  return rates;
}

std::map<std::string, double> cell_slacks(const NetworkSpec& net,
                                          const std::map<std::string, FlowSolution>& rates) {
  std::map<std::string, double> slacks;
  for (const auto& c : net.cells) {
    double airtime = 0.0;
    for (const auto& f : net.flows)
      for (const auto& h : f.route)
        if (h.cell == c.id)
          airtime += static_cast<double>(f.packet_symbols) / (rates.at(f.id).rate * h.phy_rate);
    slacks[c.id] = c.period - airtime;
  }
  return slacks;
}

PriceVector full_prices(const NetworkSpec& net, const PriceVector& partial) {
  PriceVector p;
  for (const auto& c : net.cells) {
    auto it = partial.find(c.id);
    p[c.id] = it == partial.end() ? 0.0 : it->second;
    if (p[c.id] < 0.0) throw std::invalid_argument("negative price for cell " + c.id);
  }
  return p;
}

}  // namespace

double default_step_size(const NetworkSpec& net) {
  // Scale gamma so one update at a typical slack moves prices by a small
  // fraction of the price scale implied by the KKT balance at a mid-box rate.
  double price_scale = 0.0;
  double period_scale = 0.0;
  for (const auto& c : net.cells) period_scale = std::max(period_scale, c.period);
  for (const auto& f : net.flows) {
    const double beta = end_to_end_erasure(f);
    const double upper = std::min(f.rate_max, 1.0 - beta - 1e-6);
    const double r = 0.5 * (f.rate_min + upper);
    const ChannelPoint pt{r, beta, f.deadline_slots};
    const double e = error_at_optimum(pt);
    const double theta = optimal_theta(pt);
    const double lambda = e / (1.0 - e) * theta * r * r / static_cast<double>(f.packet_symbols);
    for (const auto& h : f.route) price_scale = std::max(price_scale, lambda * h.phy_rate);
  }
  if (!(price_scale > 0.0) || !(period_scale > 0.0)) return 1e-3;
  return 0.05 * price_scale / period_scale;
}

std::pair<PriceVector, std::map<std::string, FlowSolution>> subgradient_step(
    const NetworkSpec& net, const PriceVector& prices, const SolverConfig& config) {
  const PriceVector p = full_prices(net, prices);
  const double gamma = config.step_size > 0.0 ? config.step_size : default_step_size(net);
  auto rates = solve_all_flows(net, p, nullptr);
  auto slacks = cell_slacks(net, rates);
  PriceVector next;
  for (const auto& [cell, price] : p)
    next[cell] = std::max(0.0, price - gamma * slacks.at(cell));
  return {std::move(next), std::move(rates)};
}

double dual_value(const NetworkSpec& net, const PriceVector& prices) {
  const PriceVector p = full_prices(net, prices);
  auto rates = solve_all_flows(net, p, nullptr);
  auto slacks = cell_slacks(net, rates);
  double d = utility_of(rates);
  for (const auto& [cell, price] : p) d += price * slacks.at(cell);
  return d;
}

SolveReport solve(const NetworkSpec& net, const SolverConfig& config) {
  {
    auto diags = validate(net);
    if (!diags.empty())
      throw std::invalid_argument("instance fails validation: " + diags.front().message);
  }
  const double gamma0 = config.step_size > 0.0 ? config.step_size : default_step_size(net);
  const double price_tol =
      config.price_tol > 0.0 ? config.price_tol : gamma0 * config.feas_tol;

  SolveReport rep;
  PriceVector p = full_prices(net, config.initial_prices);
  // Adaptive step control around the base gamma: a sign change in a priced
  // cell's slack means the iterate crossed its fixed point, so halve the
  // step to collapse the oscillation; a long run without any crossing means
  // the approach is crawling, so double it. Both branches are deterministic.
  double damp = 1.0;
  int noflip = 0;
  std::map<std::string, int> prev_sign;
  for (int i = 1; i <= config.max_iters; ++i) {
    rep.lambdas.clear();
    auto rates = solve_all_flows(net, p, &rep.lambdas);
    auto slacks = cell_slacks(net, rates);
    // Transient iterates can sit at the recovery-region edge where e rounds
    // to exactly 1; cap it so an overshoot yields a very poor finite utility
    // instead of aborting the run.
    double utility = 0.0;
    for (const auto& [id, sol] : rates)
      utility += std::log1p(-std::min(sol.error, 1.0 - 1e-16));
    double dual = utility;
    double max_violation = 0.0;
    for (const auto& [cell, price] : p) {
      dual += price * slacks.at(cell);
      max_violation = std::max(max_violation, -slacks.at(cell));
    }
    rep.trace.push_back({utility, dual, max_violation});

    bool flipped = false;
    for (const auto& [cell, price] : p) {
      if (price <= 0.0) continue;
      const int sign = slacks.at(cell) < 0.0 ? -1 : 1;
      auto it = prev_sign.find(cell);
      if (it != prev_sign.end() && it->second != sign) flipped = true;
      prev_sign[cell] = sign;
    }
    if (flipped) {
      damp = std::max(damp * 0.5, 1e-12);
      noflip = 0;
    } else if (++noflip >= 20) {
      damp = std::min(damp * 2.0, 1e12);
      noflip = 0;
    }
    double gamma = config.diminishing ? gamma0 / std::sqrt(static_cast<double>(i)) : gamma0;
    gamma *= damp;
    PriceVector next;
    double movement = 0.0;
    double comp_residual = 0.0;  // complementarity p_c |slack_c|
    for (const auto& [cell, price] : p) {
      next[cell] = std::max(0.0, price - gamma * slacks.at(cell));
      movement = std::max(movement, std::abs(next[cell] - price));
      comp_residual = std::max(comp_residual, price * std::abs(slacks.at(cell)));
    }

    rep.iterations = i;
    // The complementarity requirement is stricter than feasibility alone:
    // high-price cells must land on their constraint much more precisely,
    // which keeps the primal utility from overshooting the dual bound.
    const bool comp_ok = comp_residual <= 0.01 * config.feas_tol;
    if (max_violation <= config.feas_tol && movement <= price_tol && comp_ok) {
      rep.converged = true;
      rep.allocation = std::move(rates);
      rep.prices = p;
      rep.slacks = std::move(slacks);
      rep.utility = utility;
      rep.dual_value = dual;
      break;
    }
    if (i == config.max_iters) {
      rep.allocation = std::move(rates);
      rep.prices = p;
      rep.slacks = std::move(slacks);
      rep.utility = utility;
      rep.dual_value = dual;
      break;
    }
    p = std::move(next);
  }

  rep.total_utility = rep.utility;
  for (const auto& f : net.flows) {
    rep.total_utility += std::log(static_cast<double>(f.packet_symbols));
    rep.throughputs[f.id] = throughput_of(f, rep.allocation.at(f.id).error);
  }
  return rep;
}

std::vector<Diagnostic> verify_joint_optimality(const NetworkSpec& net,
                                                const SolveReport& report, double grid_mesh) {
  std::vector<Diagnostic> diags;
  GridResult grid = grid_search_joint(net, grid_mesh);
  // One rate mesh step bounds how far the grid optimum can sit from the
  // continuous one; 1e-3 covers the examples' meshes.
  const double tol = 1e-3;
  if (grid.best_utility > report.utility + tol)
    diags.push_back({"suboptimal", "",
                     "grid search found utility " + std::to_string(grid.best_utility) +
                         " vs solver " + std::to_string(report.utility)});
  return diags;
}

}  // namespace erasurenum
