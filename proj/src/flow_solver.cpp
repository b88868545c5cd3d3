#include "erasurenum/flow_solver.hpp"

#include <cmath>
#include <stdexcept>

#include "erasurenum/kernel.hpp"

namespace erasurenum {

namespace {
constexpr double kEdgeEps = 1e-9;  // numeric stand-in for the open interval (0, 1-beta)
}

namespace detail {

double rate_stationarity(const FlowProblem& prob, double r) {
  const ChannelPoint pt{r, prob.erasure, prob.deadline};
  const double theta = optimal_theta(pt);
  const double lk = prob.price * static_cast<double>(prob.packet_symbols);
  const double lhs = prob.deadline * kl_bernoulli(1.0 - r, prob.erasure);
  const double rhs = std::log1p(theta * r * r / lk);
  return lhs - rhs;
}

}  // namespace detail

FlowSolution solve_flow_rate(const FlowProblem& prob, double tol) {
  if (!(prob.packet_symbols > 0)) throw std::invalid_argument("packet_symbols must be > 0");
  if (prob.deadline < 1) throw std::invalid_argument("deadline must be >= 1");
  if (!(prob.erasure > 0.0 && prob.erasure < 1.0))
    throw std::invalid_argument("erasure must be in (0,1)");
  if (!(prob.rate_min > 0.0 && prob.rate_min <= prob.rate_max && prob.rate_max <= 1.0))
    throw std::invalid_argument("need 0 < rate_min <= rate_max <= 1");
  if (prob.price < 0.0) throw std::invalid_argument("price must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  const double upper_open = 1.0 - prob.erasure - kEdgeEps;
  if (!(prob.rate_min < 1.0 - prob.erasure))
    throw std::domain_error("no recovery region: rate_min >= 1 - beta");

  auto finish = [&](double r, Boundary b) {
    FlowSolution sol;
    sol.rate = r;
    const ChannelPoint pt{r, prob.erasure, prob.deadline};
    sol.theta = optimal_theta(pt);
    sol.error = error_at_optimum(pt);
    sol.boundary = b;
    const double lk_r2 = prob.price * static_cast<double>(prob.packet_symbols) / (r * r);
    sol.kkt_residual = std::abs(sol.error / (1.0 - sol.error) * sol.theta - lk_r2);
    return sol;
  };

  if (prob.price == 0.0) return finish(prob.rate_min, Boundary::at_min);

  // Bracket the root of the strictly decreasing stationarity function on
  // (0, 1-beta). g(0+) > 0 and g -> 0- at the upper end.
  double lo = kEdgeEps;
  double hi = upper_open;
  double glo = detail::rate_stationarity(prob, lo);
  double ghi = detail::rate_stationarity(prob, hi);
  if (glo <= 0.0) return finish(prob.rate_min, Boundary::at_min);
  // ghi should be <= 0; if roundoff leaves it positive the root is at the edge.
  if (ghi > 0.0) return finish(std::min(prob.rate_max, hi), Boundary::at_max);

  // Bisection with Newton acceleration: a Newton step is taken when it lands
  // strictly inside the current bracket, otherwise we bisect.
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double g = detail::rate_stationarity(prob, r);
    if (g > 0.0)
      lo = r;
    else
      hi = r;
    // g'(r) = -theta - (theta' r^2 + 2 theta r)/(lambda k + theta r^2),
    // theta' = -D/(r(1-r)).
    const ChannelPoint pt{r, prob.erasure, prob.deadline};
    const double theta = optimal_theta(pt);
    const double dtheta = -prob.deadline / (r * (1.0 - r));
    const double lk = prob.price * static_cast<double>(prob.packet_symbols);
    const double dg = -theta - (dtheta * r * r + 2.0 * theta * r) / (lk + theta * r * r);
    double next = r - g / dg;
    // Force a bisection step periodically so a creeping Newton sequence
    // cannot stall the bracket.
    if (!(next > lo && next < hi) || it % 3 == 2) next = 0.5 * (lo + hi);
    r = next;
  }
  if (hi - lo > 1e-6)
    throw std::runtime_error("flow rate solve did not converge");
  r = 0.5 * (lo + hi);

  if (r <= prob.rate_min) return finish(prob.rate_min, Boundary::at_min);
  if (r >= prob.rate_max) return finish(prob.rate_max, Boundary::at_max);
  return finish(r, Boundary::interior);
}

double price_weighted_cost(const std::map<std::string, double>& prices, const FlowSpec& flow) {
  double lambda = 0.0;
  for (const auto& hop : flow.route) {
    auto it = prices.find(hop.cell);
    if (it == prices.end())
      throw std::invalid_argument("no price for route cell \"" + hop.cell + "\"");
    lambda += it->second / hop.phy_rate;
  }
  return lambda;
}

}  // namespace erasurenum
