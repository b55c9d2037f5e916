#include "qhed/circuit.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "qhed/error.hpp"

namespace qhed {

namespace {

constexpr std::pair<GateKind, std::string_view> kKindNames[] = {
    {GateKind::H, "h"},         {GateKind::X, "x"},     {GateKind::RY, "ry"},
    {GateKind::Phase, "phase"}, {GateKind::CX, "cx"},   {GateKind::CZ, "cz"},
    {GateKind::CPhase, "cphase"}, {GateKind::Toffoli, "toffoli"},
    {GateKind::MCX, "mcx"},     {GateKind::SWAP, "swap"},
};

struct Shape {
  std::size_t controls;
  std::size_t targets;
};

Shape expected_shape(GateKind k) {
  switch (k) {
    case GateKind::H:
    case GateKind::X:
    case GateKind::RY:
    case GateKind::Phase:
      return {0, 1};
    case GateKind::CX:
    case GateKind::CZ:
    case GateKind::CPhase:
      return {1, 1};
    case GateKind::Toffoli:
      return {2, 1};
    case GateKind::MCX:
      return {3, 1};  // minimum controls
    case GateKind::SWAP:
      return {0, 2};
  }
  return {0, 0};
}

std::string join_wires(const std::vector<Wire>& ws) {
  std::string out;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ws[i]);
  }
  return out;
}

std::vector<Wire> parse_wires(std::string_view s, std::size_t line_no) {
  std::vector<Wire> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string_view::npos) end = s.size();
    const std::string tok(s.substr(pos, end - pos));
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("circuit line " + std::to_string(line_no) + ": bad wire '" + tok + "'");
    }
    pos = end + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(GateKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "?";
}

GateKind gate_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  throw ParseError("unknown gate kind '" + std::string(name) + "'");
}

Gate Gate::h(Wire t) { return {GateKind::H, {}, {t}, 0.0}; }
Gate Gate::x(Wire t) { return {GateKind::X, {}, {t}, 0.0}; }
Gate Gate::ry(Wire t, double theta) { return {GateKind::RY, {}, {t}, theta}; }
Gate Gate::phase(Wire t, double lambda) { return {GateKind::Phase, {}, {t}, lambda}; }
Gate Gate::cx(Wire c, Wire t) { return {GateKind::CX, {c}, {t}, 0.0}; }
Gate Gate::cz(Wire a, Wire b) { return {GateKind::CZ, {a}, {b}, 0.0}; }
Gate Gate::cphase(Wire c, Wire t, double lambda) {
  return {GateKind::CPhase, {c}, {t}, lambda};
}
Gate Gate::toffoli(Wire c1, Wire c2, Wire t) { return {GateKind::Toffoli, {c1, c2}, {t}, 0.0}; }
Gate Gate::swap(Wire a, Wire b) { return {GateKind::SWAP, {}, {a, b}, 0.0}; }

Gate Gate::mcx(std::vector<Wire> controls, Wire t) {
  switch (controls.size()) {
    case 0:
      return x(t);
    case 1:
      return cx(controls[0], t);
    case 2:
      return toffoli(controls[0], controls[1], t);
    default:
      return {GateKind::MCX, std::move(controls), {t}, 0.0};
  }
}

std::vector<Wire> Gate::wires() const {
  std::vector<Wire> out = controls;
  out.insert(out.end(), targets.begin(), targets.end());
  return out;
}

bool Gate::is_rotation() const {
  return kind == GateKind::RY || kind == GateKind::Phase || kind == GateKind::CPhase;
}

bool Gate::is_diagonal() const {
  return kind == GateKind::Phase || kind == GateKind::CZ || kind == GateKind::CPhase;
}

void Gate::validate() const {
  const Shape shape = expected_shape(kind);
  const bool controls_ok = kind == GateKind::MCX ? controls.size() >= shape.controls
                                                 : controls.size() == shape.controls;
  if (!controls_ok || targets.size() != shape.targets)
    throw CircuitError("gate " + std::string(to_string(kind)) + " has wrong operand count");
  std::vector<Wire> ws = wires();
  for (Wire w : ws)
    if (w < 0) throw CircuitError("negative wire index");
  std::sort(ws.begin(), ws.end());
  if (std::adjacent_find(ws.begin(), ws.end()) != ws.end())
    throw CircuitError("gate " + std::string(to_string(kind)) + " has a wire collision");
}

Circuit::Circuit(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 0) throw CircuitError("negative circuit width");
}

Circuit& Circuit::add(Gate g) {
  g.validate();
  for (Wire w : g.wires())
    if (w >= n_qubits_)
      throw CircuitError("wire " + std::to_string(w) + " outside a " +
                         std::to_string(n_qubits_) + "-qubit circuit");
  gates_.push_back(std::move(g));
  return *this;
}

Circuit& Circuit::append(const Circuit& other, const std::vector<Wire>& wire_map) {
  if (wire_map.size() < static_cast<std::size_t>(other.n_qubits()))
    throw CircuitError("append: wire map shorter than appended circuit");
  for (Gate g : other.gates()) {
    for (Wire& w : g.controls) w = wire_map[w];
    for (Wire& w : g.targets) w = wire_map[w];
    add(std::move(g));
  }
  return *this;
}

Circuit& Circuit::append(const Circuit& other) {
  std::vector<Wire> identity(other.n_qubits());
  for (int i = 0; i < other.n_qubits(); ++i) identity[i] = i;
  return append(other, identity);
}

Circuit Circuit::inverse() const {
  Circuit out(n_qubits_);
  out.metadata_ = metadata_;
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
    Gate g = *it;
    if (g.is_rotation()) g.angle = -g.angle;
    out.gates_.push_back(std::move(g));
  }
  return out;
}

std::vector<Wire> RegisterLayout::register_wires() const {
  std::vector<Wire> out{lsb_wire};
  out.insert(out.end(), data_wires.begin(), data_wires.end());
  return out;
}

std::string serialize(const Circuit& c) {
  std::ostringstream os;
  os << "QUBITS " << c.n_qubits() << '\n';
  char angle[64];
  for (const Gate& g : c.gates()) {
    std::snprintf(angle, sizeof angle, "%.17g", g.angle);
    os << "GATE " << to_string(g.kind) << ' ' << join_wires(g.controls) << ';'
       << join_wires(g.targets) << ';' << angle << '\n';
  }
  return os.str();
}

Circuit deserialize(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  Circuit out;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "QUBITS") {
      int n = -1;
      if (!(ls >> n) || n < 0 || have_header)
        throw ParseError("circuit line " + std::to_string(line_no) + ": bad QUBITS header");
      out = Circuit(n);
      have_header = true;
    } else if (tag == "GATE") {
      if (!have_header) throw ParseError("circuit: GATE before QUBITS header");
      std::string kind, rest;
      ls >> kind >> rest;
      const auto s1 = rest.find(';');
      const auto s2 = rest.find(';', s1 == std::string::npos ? s1 : s1 + 1);
      if (s1 == std::string::npos || s2 == std::string::npos)
        throw ParseError("circuit line " + std::to_string(line_no) + ": expected controls;targets;angle");
      Gate g;
      g.kind = gate_kind_from_string(kind);
      g.controls = parse_wires(std::string_view(rest).substr(0, s1), line_no);
      g.targets = parse_wires(std::string_view(rest).substr(s1 + 1, s2 - s1 - 1), line_no);
      try {
        g.angle = std::stod(rest.substr(s2 + 1));
      } catch (const std::exception&) {
        throw ParseError("circuit line " + std::to_string(line_no) + ": bad angle");
      }
      out.add(std::move(g));
    } else {
      throw ParseError("circuit line " + std::to_string(line_no) + ": unknown record '" + tag + "'");
    }
  }
  if (!have_header) throw ParseError("circuit: missing QUBITS header");
  return out;
}

}  // namespace qhed
