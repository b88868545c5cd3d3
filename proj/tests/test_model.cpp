#include "erasurenum/model.hpp"

#include <algorithm>
#include <random>

#include "doctest.h"

using namespace erasurenum;

namespace {

// The two-cell parking-lot instance used throughout: f1 in cell b,
// f3 in cell a, f2 crossing both.
const char* kParkingLot =
    "cell a period=0.3\n"
    "cell b period=0.3\n"
    "flow f1 k=100 D=4 rmin=0.5 rmax=0.95\n"
    "flow f2 k=100 D=4 rmin=0.5 rmax=0.95\n"
    "flow f3 k=100 D=4 rmin=0.5 rmax=0.95\n"
    "hop f2 cell=a w=1000 beta=0.001\n"
    "hop f2 cell=b w=1000 beta=0.001\n"
    "hop f1 cell=b w=1000 beta=0.001\n"
    "hop f3 cell=a w=1000 beta=0.001\n";

}  // namespace

TEST_CASE("parse_network on a minimal document") {
  const auto net = parse_network(
      "cell a period=1.0\nflow f1 k=100 D=4 rmin=0.05 rmax=0.95\nhop f1 cell=a w=1000 beta=0.1");
  REQUIRE(net.cells.size() == 1);
  REQUIRE(net.flows.size() == 1);
  REQUIRE(net.flows[0].route.size() == 1);
  CHECK(net.flows[0].packet_symbols == 100);
  CHECK(net.flows[0].deadline_slots == 4);
  CHECK(net.flows[0].route[0].phy_rate == doctest::Approx(1000.0));
}

TEST_CASE("parse_network rejects bad input with line numbers") {
  CHECK_THROWS_WITH_AS(
      parse_network("cell a period=1.0\nflow f1 k=100 D=4 rmin=0.1 rmax=0.9\n"
                    "hop f1 cell=z w=1000 beta=0.1"),
      doctest::Contains("line 3"), ParseError);
  // two hops through the same cell
  CHECK_THROWS_WITH_AS(
      parse_network("cell a period=1.0\nflow f1 k=100 D=4 rmin=0.1 rmax=0.9\n"
                    "hop f1 cell=a w=1000 beta=0.1\nhop f1 cell=a w=1000 beta=0.1"),
      doctest::Contains("twice"), ParseError);
  CHECK_THROWS_AS(parse_network("cell a period=1.0\ncell a period=2.0"), ParseError);
  CHECK_THROWS_AS(parse_network("cell a period=-1.0"), ParseError);
  CHECK_THROWS_AS(parse_network("bogus line here"), ParseError);
}

TEST_CASE("comments and blank lines are ignored") {
  const auto net = parse_network("# header\n\ncell a period=2.5  # trailing\n");
  REQUIRE(net.cells.size() == 1);
  CHECK(net.cells[0].period == doctest::Approx(2.5));
}

TEST_CASE("end_to_end_erasure") {
  FlowSpec f;
  f.route = {{"a", 1.0, 0.0}, {"b", 1.0, 0.0}};
  CHECK(end_to_end_erasure(f) == doctest::Approx(0.0));
  f.route = {{"a", 1.0, 0.1}, {"b", 1.0, 0.1}};
  CHECK(end_to_end_erasure(f) == doctest::Approx(0.19).epsilon(1e-12));
  f.route = {{"a", 1.0, 1.0}, {"b", 1.0, 0.3}};
  CHECK(end_to_end_erasure(f) == doctest::Approx(1.0));
}

TEST_CASE("end_to_end_erasure is permutation-invariant and hop-monotone") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> uni(0.0, 0.6);
  for (int i = 0; i < 100; ++i) {
    FlowSpec f;
    const int hops = 1 + int(rng() % 5);
    for (int h = 0; h < hops; ++h) f.route.push_back({"c" + std::to_string(h), 1.0, uni(rng)});
    const double base = end_to_end_erasure(f);
    auto shuffled = f;
    std::shuffle(shuffled.route.begin(), shuffled.route.end(), rng);
    CHECK(end_to_end_erasure(shuffled) == doctest::Approx(base).epsilon(1e-12));
    auto bumped = f;
    bumped.route[rng() % hops].erasure_prob += 0.01;
    CHECK(end_to_end_erasure(bumped) >= base);
    if (hops == 1) CHECK(base == doctest::Approx(f.route[0].erasure_prob));
  }
}

TEST_CASE("flows_in_cell on the parking-lot instance") {
  const auto net = parse_network(kParkingLot);
  auto in_b = flows_in_cell(net, "b");
  std::sort(in_b.begin(), in_b.end());
  CHECK(in_b == std::vector<std::string>{"f1", "f2"});
  auto in_a = flows_in_cell(net, "a");
  std::sort(in_a.begin(), in_a.end());
  CHECK(in_a == std::vector<std::string>{"f2", "f3"});
  CHECK_THROWS_AS(flows_in_cell(net, "nope"), std::invalid_argument);
}

TEST_CASE("flows_in_cell empty cell") {
  const auto net = parse_network("cell a period=1\ncell empty period=1\n"
                                 "flow f k=10 D=2 rmin=0.5 rmax=0.9\nhop f cell=a w=100 beta=0.1");
  CHECK(flows_in_cell(net, "empty").empty());
}

TEST_CASE("validate capacity check") {
  const char* base = "flow f1 k=100 D=4 rmin=0.1 rmax=0.5\nhop f1 cell=a w=1000 beta=0.1\n";
  // airtime at rmax: 100/(0.5*1000) = 0.2
  auto ok = validate(parse_network(std::string("cell a period=1.0\n") + base));
  CHECK(ok.empty());
  auto bad = validate(parse_network(std::string("cell a period=0.1\n") + base));
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].code == "capacity");
  CHECK(bad[0].where == "a");
}

TEST_CASE("validate recovery region check") {
  // beta_f = 0.6, rate_min = 0.5 >= 1 - 0.6
  auto diags = validate(parse_network(
      "cell a period=10\nflow f1 k=100 D=4 rmin=0.5 rmax=0.9\nhop f1 cell=a w=1000 beta=0.6"));
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].code == "no-recovery-region");
}

TEST_CASE("validate reports all violations, idempotently") {
  const auto net = parse_network(
      "cell a period=0.001\ncell b period=0.001\n"
      "flow f1 k=100 D=4 rmin=0.5 rmax=0.9\nflow f2 k=100 D=4 rmin=0.5 rmax=0.9\n"
      "hop f1 cell=a w=1000 beta=0.6\nhop f2 cell=b w=1000 beta=0.1");
  const auto d1 = validate(net);
  CHECK(d1.size() == 3);  // two capacity, one recovery-region
  const auto d2 = validate(net);
  CHECK(d2.size() == d1.size());
}

TEST_CASE("serialize round-trip") {
  const auto net = parse_network(kParkingLot);
  const auto again = parse_network(serialize_network(net));
  CHECK(serialize_network(again) == serialize_network(net));
  REQUIRE(again.flows.size() == net.flows.size());
  CHECK(again.flows[1].route.size() == 2);
  CHECK(again.flows[1].route[0].cell == "a");  // route order preserved
}
