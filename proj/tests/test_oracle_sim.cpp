#include "erasurenum/oracle_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

using namespace erasurenum;

TEST_CASE("exact_error_probability small cases") {
  SpreadVector one(1);
  one << 1.0;
  CHECK(exact_error_probability(one, 0.3, 0.25) == doctest::Approx(0.25).epsilon(1e-14));
  // D=2 equal split, r=0.4: only the double erasure exceeds 0.6
  CHECK(exact_error_probability(optimal_phi(2), 0.4, 0.1) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(exact_error_probability(optimal_phi(3), 0.5, 0.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(exact_error_probability(optimal_phi(2), 1.5, 0.1), std::domain_error);
  SpreadVector big(25);
  big.setConstant(1.0 / 25);
  CHECK_THROWS_AS(exact_error_probability(big, 0.5, 0.1), std::invalid_argument);
}

TEST_CASE("exact matches a naive non-incremental enumeration") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> uni(0.05, 0.6);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + int(rng() % 8);
    SpreadVector phi = SpreadVector::Random(d).cwiseAbs();
    phi /= phi.sum();
    const double r = uni(rng), beta = uni(rng);
    double naive = 0.0;
    for (std::uint32_t m = 0; m < (1u << d); ++m) {
      double s = 0.0, prob = 1.0;
      for (int i = 0; i < d; ++i) {
        if (m & (1u << i)) {
          s += phi[i];
          prob *= beta;
        } else {
          prob *= 1.0 - beta;
        }
      }
      if (decode_fails(s, r)) naive += prob;
    }
    CHECK(exact_error_probability(phi, r, beta) == doctest::Approx(naive).epsilon(1e-12));
  }
}

TEST_CASE("Chernoff bound dominates the exact probability") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> ub(0.01, 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const double beta = ub(rng);
    const int d = 1 + int(rng() % 12);
    std::uniform_real_distribution<double> ur(0.05, 1.0 - beta - 0.05);
    const double r = ur(rng);
    SpreadVector phi = SpreadVector::Random(d).cwiseAbs();
    phi /= phi.sum();
    const ChannelPoint pt{r, beta, d};
    const double exact = exact_error_probability(phi, r, beta);
    const double theta_star = optimal_theta(pt);
    for (double scale : {0.1, 1.0, 10.0})
      CHECK(chernoff_bound(phi, pt, scale * theta_star) >= exact - 1e-12);
  }
}

TEST_CASE("simulator degenerate channels") {
  const auto phi = optimal_phi(3);
  const auto clean = simulate_flow(100, phi, 0.5, 0.0, 1000, 1);
  CHECK(clean.second.failures == 0);
  CHECK(clean.second.throughput_per_slot == doctest::Approx(100.0));
  const auto dead = simulate_flow(100, phi, 0.5, 1.0, 1000, 1);
  CHECK(dead.second.failures == dead.second.packets);
}

TEST_CASE("simulator matches exact enumeration within CI") {
  const auto phi = optimal_phi(2);
  const double exact = exact_error_probability(phi, 0.4, 0.1);
  CHECK(exact == doctest::Approx(0.01).epsilon(1e-12));
  const auto [trace, sum] = simulate_flow(100, phi, 0.4, 0.1, 1000000, 12345);
  CHECK(std::abs(sum.error_rate - exact) <= sum.ci_halfwidth);
}

TEST_CASE("seed determinism, distinct seeds differ") {
  const auto phi = optimal_phi(4);
  const auto a = simulate_flow(10, phi, 0.5, 0.3, 5000, 99);
  const auto b = simulate_flow(10, phi, 0.5, 0.3, 5000, 99);
  CHECK(a.first.erasures == b.first.erasures);
  CHECK(a.first.decodes == b.first.decodes);
  const auto c = simulate_flow(10, phi, 0.5, 0.3, 5000, 100);
  CHECK(a.first.erasures != c.first.erasures);
}

TEST_CASE("sliding-window outcomes correlate within the deadline only") {
  const int d = 2;
  const auto phi = optimal_phi(d);
  const auto [trace, sum] = simulate_flow(10, phi, 0.4, 0.3, 400000, 7);
  auto cov_at_lag = [&](int lag) {
    const std::int64_t n = std::int64_t(trace.decodes.size()) - lag;
    double mx = 0, my = 0, mxy = 0;
    for (std::int64_t t = 0; t < n; ++t) {
      const double x = 1.0 - trace.decodes[t];
      const double y = 1.0 - trace.decodes[t + lag];
      mx += x;
      my += y;
      mxy += x * y;
    }
    mx /= n;
    my /= n;
    mxy /= n;
    return mxy - mx * my;
  };
  // lag 1: shared slot, cov = beta^3 - beta^4 ~ 0.019
  CHECK(cov_at_lag(1) > 0.01);
  // lag >= D: disjoint windows
  CHECK(std::abs(cov_at_lag(d)) < 2e-3);
  CHECK(std::abs(cov_at_lag(d + 3)) < 2e-3);
}

TEST_CASE("hop-level simulator agrees with the end-to-end channel") {
  FlowSpec f;
  f.packet_symbols = 100;
  f.deadline_slots = 2;
  f.route = {{"a", 1000.0, 0.1}, {"b", 1000.0, 0.1}};
  const auto phi = optimal_phi(2);
  const auto hop = simulate_hop_level(f, phi, 0.4, 1000000, 5);
  // per-slot erasure rate near 0.19
  double rate = 0.0;
  for (auto e : hop.first.erasures) rate += e;
  rate /= double(hop.first.slots);
  CHECK(std::abs(rate - 0.19) <= 3.0 * std::sqrt(0.19 * 0.81 / 1e6));
  const auto e2e = simulate_flow(100, phi, 0.4, 0.19, 1000000, 6);
  CHECK(std::abs(hop.second.error_rate - e2e.second.error_rate) <=
        hop.second.ci_halfwidth + e2e.second.ci_halfwidth);

  FlowSpec dead = f;
  dead.route[0].erasure_prob = 1.0;
  const auto all = simulate_hop_level(dead, phi, 0.4, 1000, 5);
  for (auto e : all.first.erasures) CHECK(e == 1);
}

TEST_CASE("grid_search_joint recovers the closed-form optima") {
  const auto net = parse_network(
      "cell a period=0.25\nflow f k=100 D=2 rmin=0.05 rmax=0.9\nhop f cell=a w=1000 beta=0.1");
  const auto res = grid_search_joint(net, 0.02, 0.05, 101);
  const auto& pt = res.best.at("f");
  // capacity binds: airtime 0.1/r <= 0.25 forces r >= 0.4
  CHECK(pt.rate >= 0.4 - 1e-9);
  CHECK(pt.rate <= 0.4 + 0.02 + 1e-9);
  // equal split within one mesh step
  CHECK(std::abs(pt.phi[0] - 0.5) <= 0.05 + 1e-12);
  // theta near the closed form at the chosen rate
  const double theta_star = optimal_theta({pt.rate, 0.1, 2});
  CHECK(std::abs(pt.theta - theta_star) / theta_star < 0.05);
}

TEST_CASE("grid_search_joint slack instance sits at rate_min") {
  const auto net = parse_network(
      "cell a period=100\nflow f k=100 D=2 rmin=0.3 rmax=0.9\nhop f cell=a w=1000 beta=0.1");
  const auto res = grid_search_joint(net, 0.02);
  CHECK(res.best.at("f").rate == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("grid_search_joint rejects big instances") {
  const auto net = parse_network(
      "cell a period=10\nflow f k=100 D=9 rmin=0.3 rmax=0.9\nhop f cell=a w=1000 beta=0.1");
  CHECK_THROWS_AS(grid_search_joint(net, 0.02), std::invalid_argument);
}

TEST_CASE("trace CSV shape") {
  const auto [trace, sum] = simulate_flow(10, optimal_phi(2), 0.4, 0.5, 6, 3);
  const auto csv = trace_to_csv(trace);
  CHECK(csv.substr(0, 19) == "slot,erasure,decode");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);  // header + 6 slots
}
