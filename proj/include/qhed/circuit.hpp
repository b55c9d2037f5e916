#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace qhed {

/// Wire index. Wire 0 (q0) is the least significant bit of every basis index.
using Wire = int;

enum class GateKind { H, X, RY, Phase, CX, CZ, CPhase, Toffoli, MCX, SWAP };

std::string_view to_string(GateKind kind);
GateKind gate_kind_from_string(std::string_view name);

/// One gate of the circuit IR. Controls and targets are disjoint, and no wire
/// appears twice. `angle` is meaningful for RY, Phase and CPhase only.
struct Gate {
  GateKind kind = GateKind::H;
  std::vector<Wire> controls;
  std::vector<Wire> targets;
  double angle = 0.0;

  static Gate h(Wire t);
  static Gate x(Wire t);
  static Gate ry(Wire t, double theta);
  static Gate phase(Wire t, double lambda);
  static Gate cx(Wire c, Wire t);
  static Gate cz(Wire a, Wire b);
  static Gate cphase(Wire c, Wire t, double lambda);
  static Gate toffoli(Wire c1, Wire c2, Wire t);
  /// Multi-controlled X. Fewer than three controls normalize to X/CX/Toffoli.
  static Gate mcx(std::vector<Wire> controls, Wire t);
  static Gate swap(Wire a, Wire b);

  /// Controls followed by targets.
  std::vector<Wire> wires() const;
  std::size_t arity() const { return controls.size() + targets.size(); }
  bool is_rotation() const;
  /// Diagonal in the computational basis (Phase, CZ, CPhase).
  bool is_diagonal() const;

  /// Checks the structural invariants; throws CircuitError.
  void validate() const;

  friend bool operator==(const Gate&, const Gate&) = default;
};

class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  /// Appends after validating wire bounds; throws CircuitError.
  Circuit& add(Gate g);

  /// Appends `other` with its wire i mapped to `wire_map[i]`.
  Circuit& append(const Circuit& other, const std::vector<Wire>& wire_map);
  Circuit& append(const Circuit& other);

  /// Conjugate transpose: reversed gate order with negated angles.
  Circuit inverse() const;

  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  friend bool operator==(const Circuit& a, const Circuit& b) {
    return a.n_qubits_ == b.n_qubits_ && a.gates_ == b.gates_;
  }

 private:
  int n_qubits_ = 0;
  std::vector<Gate> gates_;
  std::map<std::string, std::string> metadata_;
};

/// Wire roles of a QHED register.
struct RegisterLayout {
  Wire lsb_wire = 0;
  std::vector<Wire> data_wires;     // q1..qn, holding |f>
  std::vector<Wire> ancilla_wires;  // |0...0> workspace

  /// q0 followed by the data wires: the measured register.
  std::vector<Wire> register_wires() const;
};

/// Text form: a `QUBITS n` header, then one `GATE kind controls;targets;angle`
/// line per gate, wires comma-separated, angle printed with 17 significant
/// digits.
std::string serialize(const Circuit& c);
Circuit deserialize(std::string_view text);

}  // namespace qhed
