#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "erasurenum/kernel.hpp"
#include "erasurenum/model.hpp"

namespace erasurenum {

/// Shared decode predicate: packet fails iff sum_Delta phi(Delta) E(Delta)
/// exceeds 1 - r. Ties (within a 1e-12 band) decode successfully; the
/// enumeration and the simulator must use this single comparison.
inline bool decode_fails(double weighted_erasure, double rate) {
  return weighted_erasure > (1.0 - rate) + 1e-12;
}

/// Counter-based RNG: output i of a stream is the splitmix64 finalizer
/// applied to seed + (i+1) * 0x9E3779B97F4A7C15. Any (seed, counter) pair
/// maps to the same value on every platform.
inline std::uint64_t counter_rng(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t x = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(counter_rng(seed, counter) >> 11) * 0x1.0p-53;
}

struct ErasureTrace {
  std::int64_t slots = 0;
  std::vector<std::uint8_t> erasures;  // E[i], one per slot
  std::vector<std::uint8_t> decodes;   // alpha[t], length slots - D + 1; 1 = decoded
  std::uint64_t seed = 0;
};

struct SimSummary {
  std::int64_t packets = 0;
  std::int64_t failures = 0;
  double error_rate = 0.0;
  double throughput_per_slot = 0.0;  // k (1 - error_rate)
  double ci_halfwidth = 0.0;  // 3 sigma, normal approximation; the variance
                              // includes the lag < D autocovariances that the
                              // overlapping decode windows induce
};

/// Exact decode-failure probability by enumerating all 2^D erasure
/// patterns. D is capped at 24.
double exact_error_probability(const SpreadVector& phi, double rate, double erasure);

/// Monte Carlo run of the generalized block transmission scheme over one
/// end-to-end Bernoulli(erasure) channel. Packet t's decode window is
/// slots t..t+D-1, so consecutive outcomes are correlated.
std::pair<ErasureTrace, SimSummary> simulate_flow(std::int64_t packet_symbols,
                                                  const SpreadVector& phi, double rate,
                                                  double erasure, std::int64_t slots,
                                                  std::uint64_t seed);

/// Same scheme but drawing independent per-hop erasures along the flow's
/// route; a slot is erased when any hop erases it. Cross-checks the
/// end-to-end composition beta_f = 1 - prod(1 - beta_{f,c}).
std::pair<ErasureTrace, SimSummary> simulate_hop_level(const FlowSpec& flow,
                                                       const SpreadVector& phi, double rate,
                                                       std::int64_t slots, std::uint64_t seed);

/// One flow's grid optimum and the point attaining it.
struct GridFlowPoint {
  double rate = 0.0;
  double theta = 0.0;
  SpreadVector phi;
  double log_one_minus_e = 0.0;
};

struct GridResult {
  double best_utility = 0.0;
  std::map<std::string, GridFlowPoint> best;
};

/// Brute-force maximization of sum ln(1 - e_f) over a grid: rates stepped
/// by rate_mesh inside each flow's box, spreading weights on a simplex
/// grid of mesh phi_mesh, theta on a log grid of theta_points around the
/// closed form. Capacity constraints are enforced on the rate grid.
/// Limited to <= 2 flows and D <= 4.
GridResult grid_search_joint(const NetworkSpec& net, double rate_mesh, double phi_mesh = 0.05,
                             int theta_points = 50);

/// Writes a per-slot "slot,erasure,decode" CSV (decode blank for the final
/// D-1 slots that start no packet).
std::string trace_to_csv(const ErasureTrace& trace);

}  // namespace erasurenum
