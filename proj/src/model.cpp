#include "erasurenum/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace erasurenum {

ParseError::ParseError(int line_, std::string msg)
    : line(line_), message("line " + std::to_string(line_) + ": " + std::move(msg)) {}

const CellSpec* NetworkSpec::find_cell(const std::string& id) const {
  for (const auto& c : cells)
    if (c.id == id) return &c;
  return nullptr;
}

const FlowSpec* NetworkSpec::find_flow(const std::string& id) const {
  for (const auto& f : flows)
    if (f.id == id) return &f;
  return nullptr;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream in(line);
  std::string t;
  while (in >> t) {
    if (t[0] == '#') break;
    toks.push_back(t);
  }
  return toks;
}

// Splits "key=value", checking the key.
std::string expect_kv(const std::string& tok, const std::string& key, int line) {
  auto eq = tok.find('=');
  if (eq == std::string::npos || tok.substr(0, eq) != key)
    throw ParseError(line, "expected " + key + "=<value>, got \"" + tok + "\"");
  return tok.substr(eq + 1);
}

double parse_float(const std::string& s, const std::string& key, int line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "bad numeric value for " + key + ": \"" + s + "\"");
  }
}

std::int64_t parse_int(const std::string& s, const std::string& key, int line) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParseError(line, "bad integer value for " + key + ": \"" + s + "\"");
  return v;
}

}  // namespace

NetworkSpec parse_network(const std::string& text) {
  NetworkSpec net;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string& kind = toks[0];
    if (kind == "cell") {
      if (toks.size() != 3) throw ParseError(lineno, "cell needs: cell <id> period=<float>");
      CellSpec c;
      c.id = toks[1];
      if (net.find_cell(c.id)) throw ParseError(lineno, "duplicate cell id \"" + c.id + "\"");
      c.period = parse_float(expect_kv(toks[2], "period", lineno), "period", lineno);
      if (!(c.period > 0)) throw ParseError(lineno, "period must be > 0");
      net.cells.push_back(std::move(c));
    } else if (kind == "flow") {
      if (toks.size() != 6)
        throw ParseError(lineno, "flow needs: flow <id> k=<int> D=<int> rmin=<float> rmax=<float>");
      FlowSpec f;
      f.id = toks[1];
      if (net.find_flow(f.id)) throw ParseError(lineno, "duplicate flow id \"" + f.id + "\"");
      f.packet_symbols = parse_int(expect_kv(toks[2], "k", lineno), "k", lineno);
      f.deadline_slots = static_cast<int>(parse_int(expect_kv(toks[3], "D", lineno), "D", lineno));
      f.rate_min = parse_float(expect_kv(toks[4], "rmin", lineno), "rmin", lineno);
      f.rate_max = parse_float(expect_kv(toks[5], "rmax", lineno), "rmax", lineno);
      if (f.packet_symbols <= 0) throw ParseError(lineno, "k must be > 0");
      if (f.deadline_slots <= 0) throw ParseError(lineno, "D must be > 0");
      if (!(f.rate_min > 0 && f.rate_min <= f.rate_max && f.rate_max <= 1.0))
        throw ParseError(lineno, "need 0 < rmin <= rmax <= 1");
      net.flows.push_back(std::move(f));
    } else if (kind == "hop") {
      if (toks.size() != 5)
        throw ParseError(lineno, "hop needs: hop <flow-id> cell=<cell-id> w=<float> beta=<float>");
      auto* flow = const_cast<FlowSpec*>(net.find_flow(toks[1]));
      if (!flow) throw ParseError(lineno, "hop references unknown flow \"" + toks[1] + "\"");
      HopSpec h;
      h.cell = expect_kv(toks[2], "cell", lineno);
      if (!net.find_cell(h.cell))
        throw ParseError(lineno, "hop references unknown cell \"" + h.cell + "\"");
      h.phy_rate = parse_float(expect_kv(toks[3], "w", lineno), "w", lineno);
      h.erasure_prob = parse_float(expect_kv(toks[4], "beta", lineno), "beta", lineno);
      if (!(h.phy_rate > 0)) throw ParseError(lineno, "w must be > 0");
      if (h.erasure_prob < 0 || h.erasure_prob > 1)
        throw ParseError(lineno, "beta must be in [0,1]");
      for (const auto& prev : flow->route)
        if (prev.cell == h.cell)
          throw ParseError(lineno, "flow \"" + flow->id + "\" routed twice through cell \"" +
                                       h.cell + "\"");
      flow->route.push_back(std::move(h));
    } else {
      throw ParseError(lineno, "unknown directive \"" + kind + "\"");
    }
  }
  return net;
}

std::string serialize_network(const NetworkSpec& net) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& c : net.cells) out << "cell " << c.id << " period=" << c.period << "\n";
  for (const auto& f : net.flows)
    out << "flow " << f.id << " k=" << f.packet_symbols << " D=" << f.deadline_slots
        << " rmin=" << f.rate_min << " rmax=" << f.rate_max << "\n";
  for (const auto& f : net.flows)
    for (const auto& h : f.route)
      out << "hop " << f.id << " cell=" << h.cell << " w=" << h.phy_rate
          << " beta=" << h.erasure_prob << "\n";
  return out.str();
}

double end_to_end_erasure(const FlowSpec& flow) {
  double survive = 1.0;
  for (const auto& h : flow.route) survive *= 1.0 - h.erasure_prob;
  return 1.0 - survive;
}

std::vector<std::string> flows_in_cell(const NetworkSpec& net, const std::string& cell) {
  if (!net.find_cell(cell)) throw std::invalid_argument("unknown cell \"" + cell + "\"");
  std::vector<std::string> out;
  for (const auto& f : net.flows)
    for (const auto& h : f.route)
      if (h.cell == cell) {
        out.push_back(f.id);
        break;
      }
  return out;
}

std::vector<Diagnostic> validate(const NetworkSpec& net) {
  std::vector<Diagnostic> diags;
  if (net.flows.empty()) diags.push_back({"empty", "", "network declares no flows"});
  for (const auto& f : net.flows) {
    if (f.route.empty()) {
      diags.push_back({"empty-route", f.id, "flow " + f.id + " has no hops"});
      continue;
    }
    const double beta = end_to_end_erasure(f);
    if (!(f.rate_min < 1.0 - beta))
      diags.push_back({"no-recovery-region", f.id,
                       "flow " + f.id + ": rmin=" + std::to_string(f.rate_min) +
                           " >= 1-beta_f=" + std::to_string(1.0 - beta) +
                           ", no coding rate can recover"});
  }
  // Schedulability at the least-demanding rates: if even the rate_max
  // airtimes exceed T_c the instance admits no feasible rate vector.
  for (const auto& c : net.cells) {
    double airtime = 0.0;
    for (const auto& f : net.flows)
      for (const auto& h : f.route)
        if (h.cell == c.id)
          airtime += static_cast<double>(f.packet_symbols) / (f.rate_max * h.phy_rate);
    if (airtime > c.period)
      diags.push_back({"capacity", c.id,
                       "cell " + c.id + ": minimum airtime " + std::to_string(airtime) +
                           " exceeds period " + std::to_string(c.period)});
  }
  return diags;
}

}  // namespace erasurenum
