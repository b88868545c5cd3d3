#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace erasurenum {

/// TDMA interference domain with schedule period T_c.
struct CellSpec {
  std::string id;
  double period = 0.0;
};

/// One hop of a flow's route: the cell it crosses, the PHY rate w_{f,c}
/// and the per-hop packet erasure probability beta_{f,c}.
struct HopSpec {
  std::string cell;
  double phy_rate = 0.0;
  double erasure_prob = 0.0;
};

struct FlowSpec {
  std::string id;
  std::int64_t packet_symbols = 0;   // k_f
  int deadline_slots = 0;            // D_f
  std::vector<HopSpec> route;        // in route order
  double rate_min = 0.0;
  double rate_max = 0.0;
};

struct NetworkSpec {
  std::vector<CellSpec> cells;
  std::vector<FlowSpec> flows;

  const CellSpec* find_cell(const std::string& id) const;
  const FlowSpec* find_flow(const std::string& id) const;
};

/// A single validation finding. `where` names the offending cell/flow.
struct Diagnostic {
  std::string code;     // e.g. "capacity", "no-recovery-region"
  std::string where;
  std::string message;
};

/// Thrown by parse_network on malformed input; line is 1-based.
struct ParseError : std::exception {
  int line;
  std::string message;
  ParseError(int line_, std::string msg);
  const char* what() const noexcept override { return message.c_str(); }
};

/// Parses the line-oriented network description format:
///   cell <id> period=<float>
///   flow <id> k=<int> D=<int> rmin=<float> rmax=<float>
///   hop <flow-id> cell=<cell-id> w=<float> beta=<float>
/// "#" starts a comment; hops attach to flows in declared order.
NetworkSpec parse_network(const std::string& text);

/// Inverse of parse_network; parse(serialize(net)) == net.
std::string serialize_network(const NetworkSpec& net);

/// End-to-end erasure beta_f = 1 - prod_hops (1 - beta_{f,c}).
double end_to_end_erasure(const FlowSpec& flow);

/// Flow ids routed through `cell` (the set F_c), in declaration order.
std::vector<std::string> flows_in_cell(const NetworkSpec& net, const std::string& cell);

/// Structural and feasibility checks. Empty result means the instance is
/// admissible: type invariants hold, every cell admits the rate_max airtimes
/// within its period, and every flow has rate_min < 1 - beta_f.
/// Collects all violations; never stops at the first.
std::vector<Diagnostic> validate(const NetworkSpec& net);

}  // namespace erasurenum
