#include "erasurenum/oracle_sim.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace erasurenum {

double exact_error_probability(const SpreadVector& phi, double rate, double erasure) {
  const int d = static_cast<int>(phi.size());
  if (d < 1 || d > 24) throw std::invalid_argument("pattern enumeration supports 1 <= D <= 24");
  if (!(rate > 0.0 && rate < 1.0)) throw std::domain_error("rate must be in (0,1)");
  if (erasure < 0.0 || erasure > 1.0) throw std::domain_error("erasure must be in [0,1]");
  if (erasure == 0.0) return 0.0;

  // beta^ones (1-beta)^(D-ones) by popcount.
  std::vector<double> weight(d + 1);
  for (int ones = 0; ones <= d; ++ones)
    weight[ones] = std::pow(erasure, ones) * std::pow(1.0 - erasure, d - ones);

  // Gray-code walk: one weight flips per step, so the weighted sum is
  // maintained incrementally.
  double total = 0.0;
  double s = 0.0;
  int ones = 0;
  std::uint32_t prev_gray = 0;
  for (std::uint64_t i = 1; i < (1ULL << d); ++i) {
    const std::uint32_t gray = static_cast<std::uint32_t>(i ^ (i >> 1));
    const std::uint32_t flipped = gray ^ prev_gray;
    const int bit = std::countr_zero(flipped);
    if (gray & flipped) {
      s += phi[bit];
      ++ones;
    } else {
      s -= phi[bit];
      --ones;
    }
    prev_gray = gray;
    if (decode_fails(s, rate)) total += weight[ones];
  }
  return total;
}

namespace {

std::pair<ErasureTrace, SimSummary> run_sim(std::int64_t packet_symbols, const SpreadVector& phi,
                                            double rate, std::int64_t slots, std::uint64_t seed,
                                            const std::function<bool(std::int64_t)>& erased) {
  const int d = static_cast<int>(phi.size());
  if (slots < d) throw std::invalid_argument("need slots >= deadline");
  ErasureTrace trace;
  trace.slots = slots;
  trace.seed = seed;
  trace.erasures.resize(slots);
  for (std::int64_t i = 0; i < slots; ++i) trace.erasures[i] = erased(i) ? 1 : 0;

  const std::int64_t packets = slots - d + 1;
  trace.decodes.resize(packets);
  std::int64_t failures = 0;
  for (std::int64_t t = 0; t < packets; ++t) {
    double s = 0.0;
    for (int delta = 0; delta < d; ++delta)
      if (trace.erasures[t + delta]) s += phi[delta];
    const bool fail = decode_fails(s, rate);
    trace.decodes[t] = fail ? 0 : 1;
    if (fail) ++failures;
  }

  SimSummary sum;
  sum.packets = packets;
  sum.failures = failures;
  sum.error_rate = static_cast<double>(failures) / static_cast<double>(packets);
  sum.throughput_per_slot = static_cast<double>(packet_symbols) * (1.0 - sum.error_rate);
  // Consecutive packet outcomes share erasure slots, so the variance of the
  // mean needs the autocovariances up to lag D-1 (windows D or more apart
  // are disjoint and independent).
  const double mean = sum.error_rate;
  double var_sum = mean * (1.0 - mean);
  for (int lag = 1; lag < d && lag < packets; ++lag) {
    double cov = 0.0;
    for (std::int64_t t = 0; t + lag < packets; ++t)
      cov += (1.0 - trace.decodes[t] - mean) * (1.0 - trace.decodes[t + lag] - mean);
    var_sum += 2.0 * cov / static_cast<double>(packets - lag);
  }
  // Floor at the i.i.d. variance, and at one failure's worth so a run that
  // happens to observe zero failures still reports a usable width.
  var_sum = std::max({var_sum, mean * (1.0 - mean), 1.0 / static_cast<double>(packets)});
  sum.ci_halfwidth = 3.0 * std::sqrt(var_sum / static_cast<double>(packets));
  return {std::move(trace), sum};
}

}  // namespace

std::pair<ErasureTrace, SimSummary> simulate_flow(std::int64_t packet_symbols,
                                                  const SpreadVector& phi, double rate,
                                                  double erasure, std::int64_t slots,
                                                  std::uint64_t seed) {
  if (erasure < 0.0 || erasure > 1.0) throw std::domain_error("erasure must be in [0,1]");
  return run_sim(packet_symbols, phi, rate, slots, seed, [&](std::int64_t i) {
    return counter_uniform(seed, static_cast<std::uint64_t>(i)) < erasure;
  });
}

std::pair<ErasureTrace, SimSummary> simulate_hop_level(const FlowSpec& flow,
                                                       const SpreadVector& phi, double rate,
                                                       std::int64_t slots, std::uint64_t seed) {
  const std::size_t hops = flow.route.size();
  if (hops == 0) throw std::invalid_argument("flow has no hops");
  return run_sim(flow.packet_symbols, phi, rate, slots, seed, [&](std::int64_t i) {
    for (std::size_t h = 0; h < hops; ++h) {
      const std::uint64_t counter = static_cast<std::uint64_t>(i) * hops + h;
      if (counter_uniform(seed, counter) < flow.route[h].erasure_prob) return true;
    }
    return false;
  });
}

namespace {

// All weight vectors of length d on the simplex grid {0, mesh, 2 mesh, ...}.
void simplex_grid(int d, int steps_left, SpreadVector& current, int pos, double mesh,
                  std::vector<SpreadVector>& out) {
  if (pos == d - 1) {
    current[pos] = steps_left * mesh;
    out.push_back(current);
    return;
  }
  for (int s = 0; s <= steps_left; ++s) {
    current[pos] = s * mesh;
    simplex_grid(d, steps_left - s, current, pos + 1, mesh, out);
  }
}

struct FlowGrid {
  std::vector<double> rates;
  std::vector<GridFlowPoint> best_at_rate;  // argmax over (phi, theta) per rate
};

}  // namespace

GridResult grid_search_joint(const NetworkSpec& net, double rate_mesh, double phi_mesh,
                             int theta_points) {
  if (net.flows.size() > 2) throw std::invalid_argument("grid search limited to <= 2 flows");
  if (net.flows.empty()) throw std::invalid_argument("no flows");
  if (!(rate_mesh >= 0.01)) throw std::invalid_argument("rate_mesh must be >= 0.01");
  for (const auto& f : net.flows)
    if (f.deadline_slots > 4) throw std::invalid_argument("grid search limited to D <= 4");

  std::vector<FlowGrid> grids;
  for (const auto& f : net.flows) {
    const double beta = end_to_end_erasure(f);
    const double upper = std::min(f.rate_max, 1.0 - beta - 1e-6);
    FlowGrid g;
    for (double r = f.rate_min; r < upper - 1e-12; r += rate_mesh) g.rates.push_back(r);
    g.rates.push_back(upper);

    const int d = f.deadline_slots;
    std::vector<SpreadVector> phis;
    SpreadVector cur(d);
    const int steps = static_cast<int>(std::lround(1.0 / phi_mesh));
    simplex_grid(d, steps, cur, 0, 1.0 / steps, phis);

    for (double r : g.rates) {
      const ChannelPoint pt{r, beta, d};
      const double theta_star = optimal_theta(pt);
      GridFlowPoint best;
      best.log_one_minus_e = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < theta_points; ++j) {
        // log grid spanning [theta*/100, 100 theta*]
        const double theta =
            theta_star * std::pow(100.0, -1.0 + 2.0 * j / (theta_points - 1.0));
        for (const auto& phi : phis) {
          const double e = chernoff_bound(phi, pt, theta);
          if (e >= 1.0) continue;
          const double v = std::log1p(-e);
          if (v > best.log_one_minus_e) {
            best.log_one_minus_e = v;
            best.rate = r;
            best.theta = theta;
            best.phi = phi;
          }
        }
      }
      g.best_at_rate.push_back(best);
    }
    grids.push_back(std::move(g));
  }

  auto feasible = [&](const std::vector<double>& rates) {
    for (const auto& c : net.cells) {
      double airtime = 0.0;
      for (std::size_t fi = 0; fi < net.flows.size(); ++fi)
        for (const auto& h : net.flows[fi].route)
          if (h.cell == c.id)
            airtime += static_cast<double>(net.flows[fi].packet_symbols) /
                       (rates[fi] * h.phy_rate);
      if (airtime > c.period + 1e-12) return false;
    }
    return true;
  };

  GridResult result;
  result.best_utility = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(net.flows.size(), 0);
  while (true) {
    std::vector<double> rates;
    double utility = 0.0;
    for (std::size_t fi = 0; fi < net.flows.size(); ++fi) {
      rates.push_back(grids[fi].rates[idx[fi]]);
      utility += grids[fi].best_at_rate[idx[fi]].log_one_minus_e;
    }
    if (utility > result.best_utility && feasible(rates)) {
      result.best_utility = utility;
      result.best.clear();
      for (std::size_t fi = 0; fi < net.flows.size(); ++fi)
        result.best[net.flows[fi].id] = grids[fi].best_at_rate[idx[fi]];
    }
    // advance the mixed-radix index
    std::size_t fi = 0;
    while (fi < idx.size() && ++idx[fi] == grids[fi].rates.size()) idx[fi++] = 0;
    if (fi == idx.size()) break;
  }
  return result;
}

std::string trace_to_csv(const ErasureTrace& trace) {
  std::ostringstream out;
  out << "slot,erasure,decode\n";
  for (std::int64_t i = 0; i < trace.slots; ++i) {
    out << i << ',' << int(trace.erasures[i]) << ',';
    if (i < static_cast<std::int64_t>(trace.decodes.size())) out << int(trace.decodes[i]);
    out << '\n';
  }
  return out.str();
}

}  // namespace erasurenum
