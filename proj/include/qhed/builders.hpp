#pragma once

#include <span>

#include "qhed/circuit.hpp"
#include "qhed/linalg.hpp"

namespace qhed {

enum class DecrementVariant { Mcx, Ancilla };

/// Uniformly controlled RY tree mapping |0...0> to the normalized `amplitudes`.
/// Gate count is 2^{m+1} - 3 for m qubits.
Circuit build_encoding_circuit(std::span<const double> amplitudes);

/// |i> -> |i-1 mod 2^n> as X, CX, Toffoli, then MCX gates of growing width.
Circuit build_decrement_mcx(int n_data);

/// Same permutation on wires 0..n-1 using n-2 clean ancillas (wires n..2n-3)
/// and only X, CX and Toffoli. Falls back to build_decrement_mcx for n < 3.
Circuit build_decrement_ancilla(int n_data);

struct QhedCircuit {
  Circuit circuit;
  RegisterLayout layout;
};

/// H(q0) . Decrement(q0..qn) . H(q0). Wire 0 is q0, data wires are 1..n_data;
/// the ancilla variant adds n_data - 1 ancillas after them.
QhedCircuit build_qhed(int n_data, DecrementVariant variant);

/// QFT with unitary (1/sqrt N) w^{jk}, w = exp(2 pi i / N); `inverse` gives the
/// conjugate transpose. Without swaps the output index is bit-reversed.
Circuit build_qft(int n, bool inverse, bool with_swaps = true);

/// Full unitary built from basis-state runs; at most 10 wires.
ComplexMatrix circuit_unitary(const Circuit& circuit);

std::string_view to_string(DecrementVariant v);

}  // namespace qhed
