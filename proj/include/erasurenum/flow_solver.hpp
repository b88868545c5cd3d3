#pragma once

#include <map>
#include <string>

#include "erasurenum/model.hpp"

namespace erasurenum {

/// Per-flow rate problem at a fixed aggregated airtime price lambda_f.
struct FlowProblem {
  std::int64_t packet_symbols = 0;  // k
  int deadline = 1;                 // D
  double erasure = 0.0;             // beta in (0,1)
  double rate_min = 0.0;
  double rate_max = 0.0;
  double price = 0.0;               // lambda >= 0
};

enum class Boundary { interior, at_min, at_max };

struct FlowSolution {
  double rate = 0.0;
  double theta = 0.0;
  double error = 0.0;
  Boundary boundary = Boundary::interior;
  double kkt_residual = 0.0;
};

/// Optimal coding rate for one flow at price lambda: the unique root in
/// (0, 1-beta) of
///   D * KL(B(1-r) || B(beta)) - ln((lambda k + theta*(r) r^2) / (lambda k))
/// projected onto [rate_min, rate_max]. At lambda = 0 the utility alone is
/// maximized at rate_min. Reference method is bracketed bisection (the
/// difference function is strictly decreasing); Newton steps accelerate it
/// where they stay inside the bracket.
FlowSolution solve_flow_rate(const FlowProblem& prob, double tol = 1e-10);

/// Aggregated airtime price lambda_f = sum over route hops of p_c / w_{f,c}.
double price_weighted_cost(const std::map<std::string, double>& prices, const FlowSpec& flow);

namespace detail {
/// The monotone difference function whose root is the interior optimum;
/// exposed so tests can check it against an independent bisection.
double rate_stationarity(const FlowProblem& prob, double r);
}  // namespace detail

}  // namespace erasurenum
