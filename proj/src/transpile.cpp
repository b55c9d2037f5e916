#include "qhed/transpile.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>

#include "qhed/error.hpp"

namespace qhed {

namespace {

constexpr double kPi = std::numbers::pi;

Circuit empty_like(const Circuit& c) {
  Circuit out(c.n_qubits());
  out.metadata() = c.metadata();
  return out;
}

void add_toffoli_network(Circuit& out, Wire c1, Wire c2, Wire t) {
  const double q = kPi / 4;
  out.add(Gate::h(t));
  out.add(Gate::cx(c2, t));
  out.add(Gate::phase(t, -q));
  out.add(Gate::cx(c1, t));
  out.add(Gate::phase(t, q));
  out.add(Gate::cx(c2, t));
  out.add(Gate::phase(t, -q));
  out.add(Gate::cx(c1, t));
  out.add(Gate::phase(c2, q));
  out.add(Gate::phase(t, q));
  out.add(Gate::h(t));
  out.add(Gate::cx(c1, c2));
  out.add(Gate::phase(c1, q));
  out.add(Gate::phase(c2, -q));
  out.add(Gate::cx(c1, c2));
}

/// Toffoli up to a diagonal phase on its three wires.
Circuit relative_phase_toffoli(int n, Wire c1, Wire c2, Wire t) {
  const double q = kPi / 4;
  Circuit c(n);
  c.add(Gate::h(t));
  c.add(Gate::phase(t, q));
  c.add(Gate::cx(c2, t));
  c.add(Gate::phase(t, -q));
  c.add(Gate::cx(c1, t));
  c.add(Gate::phase(t, q));
  c.add(Gate::cx(c2, t));
  c.add(Gate::phase(t, -q));
  c.add(Gate::h(t));
  return c;
}

void add_gray_code_mcx(Circuit& out, const std::vector<Wire>& ctrl, Wire t) {
  const int k = static_cast<int>(ctrl.size());
  const double lambda = kPi / static_cast<double>(std::size_t{1} << (k - 1));
  out.add(Gate::h(t));
  std::size_t last = 0;
  for (std::size_t i = 1; i < (std::size_t{1} << k); ++i) {
    const std::size_t g = i ^ (i >> 1);
    const int high = std::bit_width(g) - 1;
    if (last != 0) {
      const std::size_t changed = g ^ last;
      const int p = std::countr_zero(changed);
      if (p != high) {
        out.add(Gate::cx(ctrl[p], ctrl[high]));
      } else {
        // a new highest bit: fold every other set bit into it
        for (int b = 0; b < high; ++b)
          if ((g >> b) & 1u) out.add(Gate::cx(ctrl[b], ctrl[high]));
      }
    }
    const double sign = std::popcount(g) % 2 ? 1.0 : -1.0;
    out.add(Gate::cphase(ctrl[high], t, sign * lambda));
    last = g;
  }
  out.add(Gate::h(t));
}

std::vector<Wire> free_ancillas(const Circuit& c) {
  std::vector<Wire> out;
  const auto it = c.metadata().find("free_ancillas");
  if (it == c.metadata().end()) return out;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

bool same_operands(const Gate& a, const Gate& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case GateKind::CZ:
    case GateKind::CPhase:
    case GateKind::SWAP: {
      auto wa = a.wires(), wb = b.wires();
      std::sort(wa.begin(), wa.end());
      std::sort(wb.begin(), wb.end());
      return wa == wb;
    }
    case GateKind::Toffoli:
    case GateKind::MCX: {
      auto ca = a.controls, cb = b.controls;
      std::sort(ca.begin(), ca.end());
      std::sort(cb.begin(), cb.end());
      return ca == cb && a.targets == b.targets;
    }
    default:
      return a.controls == b.controls && a.targets == b.targets;
  }
}

bool vanishes(GateKind kind, double angle) {
  const double period = kind == GateKind::RY ? 4 * kPi : 2 * kPi;
  return std::abs(std::remainder(angle, period)) <= 1e-12;
}

Circuit peephole_pass(const Circuit& in) {
  std::vector<std::optional<Gate>> out;
  std::vector<std::vector<std::size_t>> top(in.n_qubits());

  for (const Gate& g : in.gates()) {
    if (g.is_rotation() && vanishes(g.kind, g.angle)) continue;
    const auto ws = g.wires();
    std::optional<std::size_t> cand;
    bool aligned = true;
    for (Wire w : ws) {
      if (top[w].empty()) {
        aligned = false;
        break;
      }
      if (!cand) cand = top[w].back();
      else if (*cand != top[w].back()) aligned = false;
    }
    if (aligned && cand && out[*cand]->arity() == ws.size() && same_operands(*out[*cand], g)) {
      Gate& prev = *out[*cand];
      bool remove = true;
      if (g.is_rotation()) {
        prev.angle += g.angle;
        remove = vanishes(prev.kind, prev.angle);
      }
      if (remove) {
        for (Wire w : prev.wires()) top[w].pop_back();
        out[*cand].reset();
      }
      continue;
    }
    for (Wire w : ws) top[w].push_back(out.size());
    out.push_back(g);
  }

  Circuit result = empty_like(in);
  for (auto& g : out)
    if (g) result.add(std::move(*g));
  return result;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

Circuit lower_toffoli(const Circuit& circuit) {
  Circuit out = empty_like(circuit);
  for (const Gate& g : circuit.gates()) {
    if (g.kind == GateKind::Toffoli) add_toffoli_network(out, g.controls[0], g.controls[1], g.targets[0]);
    else out.add(g);
  }
  return out;
}

Circuit lower_mcx(const Circuit& circuit, McxStrategy strategy) {
  Circuit out = empty_like(circuit);
  const std::vector<Wire> spare = free_ancillas(circuit);
  for (const Gate& g : circuit.gates()) {
    if (g.kind != GateKind::MCX) {
      out.add(g);
      continue;
    }
    const std::vector<Wire>& ctrl = g.controls;
    const Wire t = g.targets[0];
    if (strategy == McxStrategy::GrayCode) {
      add_gray_code_mcx(out, ctrl, t);
      continue;
    }
    const std::size_t k = ctrl.size();
    std::vector<Wire> anc;
    for (Wire w : spare)
      if (std::find(ctrl.begin(), ctrl.end(), w) == ctrl.end() && w != t) anc.push_back(w);
    if (anc.size() < k - 2)
      throw ResourceError("v-chain MCX with " + std::to_string(k) + " controls needs " +
                          std::to_string(k - 2) + " free ancillas, circuit declares " +
                          std::to_string(anc.size()));
    std::vector<Gate> ladder;
    ladder.push_back(Gate::toffoli(ctrl[0], ctrl[1], anc[0]));
    for (std::size_t i = 1; i + 2 < k; ++i) ladder.push_back(Gate::toffoli(ctrl[i + 1], anc[i - 1], anc[i]));
    for (const Gate& l : ladder) out.add(l);
    out.add(Gate::toffoli(ctrl[k - 1], anc[k - 3], t));
    for (auto it = ladder.rbegin(); it != ladder.rend(); ++it) out.add(*it);
  }
  return out;
}

Circuit pair_relative_phase_toffolis(const Circuit& circuit) {
  const auto& gates = circuit.gates();
  // partner[i] = j for a matched pair (i < j)
  std::vector<std::optional<std::size_t>> partner(gates.size());
  std::vector<bool> matched(gates.size(), false);
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (gates[i].kind != GateKind::Toffoli || matched[i]) continue;
    const auto ws = gates[i].wires();
    for (std::size_t j = i + 1; j < gates.size(); ++j) {
      const Gate& g = gates[j];
      if (g.kind == GateKind::Toffoli && !matched[j] && same_operands(g, gates[i])) {
        partner[i] = j;
        matched[i] = matched[j] = true;
        break;
      }
      if (g.is_diagonal()) continue;
      const bool hits = std::any_of(g.targets.begin(), g.targets.end(), [&](Wire w) {
        return std::find(ws.begin(), ws.end(), w) != ws.end();
      });
      if (hits) break;
    }
  }

  Circuit out = empty_like(circuit);
  std::vector<std::optional<Circuit>> closing(gates.size());
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const Gate& g = gates[i];
    if (partner[i]) {
      const Circuit r = relative_phase_toffoli(circuit.n_qubits(), g.controls[0], g.controls[1], g.targets[0]);
      out.append(r);
      closing[*partner[i]] = r.inverse();
    } else if (closing[i]) {
      out.append(*closing[i]);
    } else {
      out.add(g);
    }
  }
  return out;
}

Circuit lower_two_qubit(const Circuit& circuit) {
  Circuit out = empty_like(circuit);
  for (const Gate& g : circuit.gates()) {
    switch (g.kind) {
      case GateKind::CZ:
        out.add(Gate::h(g.targets[0]));
        out.add(Gate::cx(g.controls[0], g.targets[0]));
        out.add(Gate::h(g.targets[0]));
        break;
      case GateKind::CPhase: {
        const Wire c = g.controls[0], t = g.targets[0];
        out.add(Gate::phase(c, g.angle / 2));
        out.add(Gate::cx(c, t));
        out.add(Gate::phase(t, -g.angle / 2));
        out.add(Gate::cx(c, t));
        out.add(Gate::phase(t, g.angle / 2));
        break;
      }
      case GateKind::SWAP: {
        const Wire a = g.targets[0], b = g.targets[1];
        out.add(Gate::cx(a, b));
        out.add(Gate::cx(b, a));
        out.add(Gate::cx(a, b));
        break;
      }
      default:
        out.add(g);
    }
  }
  return out;
}

Circuit peephole_optimize(const Circuit& circuit) {
  Circuit cur = peephole_pass(circuit);
  for (;;) {
    Circuit next = peephole_pass(cur);
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

Circuit transpile(const Circuit& circuit, const TranspileOptions& options) {
  Circuit c = lower_mcx(circuit, options.mcx);
  if (options.relative_phase) c = pair_relative_phase_toffolis(c);
  c = lower_two_qubit(lower_toffoli(c));
  if (options.optimize) c = peephole_optimize(c);
  return c;
}

CircuitMetrics compute_metrics(const Circuit& circuit) {
  CircuitMetrics m;
  std::vector<int> level(circuit.n_qubits(), 0);
  for (const Gate& g : circuit.gates()) {
    if (g.arity() > 2)
      throw PreconditionError("compute_metrics needs a lowered circuit; found " +
                              std::string(to_string(g.kind)));
    int t = 0;
    for (Wire w : g.wires()) t = std::max(t, level[w]);
    ++t;
    for (Wire w : g.wires()) level[w] = t;
    m.depth = std::max(m.depth, t);
    if (g.arity() == 2) ++m.cx_count;
    ++m.gate_count;
  }
  return m;
}

std::string to_csv_row(const MetricsRecord& r) {
  std::string row = r.variant + ',' + std::to_string(r.n_encode) + ',' + (r.cut ? "true" : "false") +
                    ',' + std::to_string(r.seed) + ',' + std::to_string(r.depth) + ',' +
                    std::to_string(r.cx_count) + ',' + std::to_string(r.gate_count) + ',';
  if (r.fidelity) row += format_double(*r.fidelity);
  return row;
}

std::string to_csv(const std::vector<MetricsRecord>& rows) {
  std::string out = std::string(kMetricsCsvHeader) + '\n';
  for (const auto& r : rows) out += to_csv_row(r) + '\n';
  return out;
}

}  // namespace qhed
