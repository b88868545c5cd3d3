#pragma once

#include <map>
#include <string>
#include <vector>

#include "erasurenum/flow_solver.hpp"
#include "erasurenum/model.hpp"

namespace erasurenum {

/// Per-cell Lagrange multipliers (shadow airtime costs), all >= 0.
using PriceVector = std::map<std::string, double>;

struct SolverConfig {
  double step_size = 0.0;    // gamma; 0 selects a scale-based default
  int max_iters = 100000;
  double feas_tol = 1e-8;
  double price_tol = 0.0;    // 0 selects step_size * feas_tol
  PriceVector initial_prices;  // cells absent here start at 0
  bool diminishing = false;    // gamma / sqrt(i) schedule
};

struct IterRecord {
  double utility;
  double dual;
  double max_violation;
};

struct SolveReport {
  std::map<std::string, FlowSolution> allocation;
  PriceVector prices;
  std::map<std::string, double> lambdas;       // aggregated per-flow prices
  std::map<std::string, double> throughputs;   // S_f = k_f (1 - e_f)
  std::map<std::string, double> slacks;        // T_c - sum_f k_f/(r_f w_{f,c})
  double utility = 0.0;        // U = sum ln(1 - e_f)
  double total_utility = 0.0;  // sum ln k_f + U
  double dual_value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterRecord> trace;
};

/// Sum of ln(1 - e_f) over an allocation. Throws if any e_f >= 1.
double utility_of(const std::map<std::string, FlowSolution>& allocation);

/// S_f = k_f (1 - e_f), information symbols per slot.
double throughput_of(const FlowSpec& flow, double error);

/// One dual-price iteration: solves every flow at `prices`, then applies
///   p_c <- [p_c - gamma (T_c - sum_{f in F_c} k_f/(r_f w_{f,c}))]+
/// Returns the updated prices and the rates used to compute them.
std::pair<PriceVector, std::map<std::string, FlowSolution>> subgradient_step(
    const NetworkSpec& net, const PriceVector& prices, const SolverConfig& config);

/// Lagrangian dual function D(p): utility at the per-flow optimal rates for
/// these prices plus the price-weighted slack.
double dual_value(const NetworkSpec& net, const PriceVector& prices);

/// Full proportional-fair solve: subgradient iteration on the cell prices
/// with per-flow KKT rate solves, equal-split spreading and closed-form
/// theta throughout. Deterministic for identical inputs.
SolveReport solve(const NetworkSpec& net, const SolverConfig& config = {});

/// The default step size the solver uses when config.step_size == 0.
double default_step_size(const NetworkSpec& net);

/// Checks the solver's utility against the exhaustive grid oracle on a
/// small instance (<= 2 flows, D <= 4). Empty result means no grid point
/// beats the solver beyond a mesh-dependent tolerance.
std::vector<Diagnostic> verify_joint_optimality(const NetworkSpec& net,
                                                const SolveReport& report,
                                                double grid_mesh);

}  // namespace erasurenum
