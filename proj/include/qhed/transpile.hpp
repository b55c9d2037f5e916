#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qhed/circuit.hpp"

namespace qhed {

enum class McxStrategy { GrayCode, VchainAncilla };

/// Exact 6-CX network (H, T, T^dagger) for every Toffoli.
Circuit lower_toffoli(const Circuit& circuit);

/// Lowers every MCX. GrayCode emits a controlled-phase Gray-code walk
/// (2^k - 1 controlled phases, 3*2^k - 4 CX once lowered). VchainAncilla
/// uses 2k - 3 Toffolis and needs k - 2 clean wires listed in the circuit
/// metadata key "free_ancillas" (comma-separated).
Circuit lower_mcx(const Circuit& circuit, McxStrategy strategy);

/// Replaces each Toffoli compute/uncompute pair with a relative-phase Toffoli
/// (3 CX) and its inverse. A pair qualifies when every gate between them is
/// diagonal or targets none of the Toffoli's wires, so the phase error
/// cancels exactly. Unpaired Toffolis are left alone.
Circuit pair_relative_phase_toffolis(const Circuit& circuit);

/// CZ, CPhase and SWAP in terms of CX and 1-qubit gates.
Circuit lower_two_qubit(const Circuit& circuit);

/// Cancels adjacent inverse pairs and merges adjacent rotations on the same
/// operands, repeated to a fixpoint. Phase angles vanish at 0 mod 2pi; RY only
/// at 0 mod 4pi because RY(2pi) = -I.
Circuit peephole_optimize(const Circuit& circuit);

struct TranspileOptions {
  McxStrategy mcx = McxStrategy::GrayCode;
  bool relative_phase = true;
  bool optimize = true;
};

/// Full lowering to {CX, H, X, RY, Phase}.
Circuit transpile(const Circuit& circuit, const TranspileOptions& options = {});

struct CircuitMetrics {
  int depth = 0;
  int cx_count = 0;
  int gate_count = 0;
};

/// Greedy ASAP depth, 2-qubit gate count and total count. Throws
/// PreconditionError if any gate acts on more than two wires.
CircuitMetrics compute_metrics(const Circuit& circuit);

struct MetricsRecord {
  std::string variant;  // "original" or "modified"
  int n_encode = 0;
  bool cut = false;
  std::uint64_t seed = 0;
  int depth = 0;
  int cx_count = 0;
  int gate_count = 0;
  std::optional<double> fidelity;  // blank in CSV when absent
};

inline constexpr const char* kMetricsCsvHeader =
    "variant,n_encode,cut,seed,depth,cx_count,gate_count,fidelity";

std::string to_csv_row(const MetricsRecord& r);
/// Header plus one LF-terminated row per record.
std::string to_csv(const std::vector<MetricsRecord>& rows);

}  // namespace qhed
