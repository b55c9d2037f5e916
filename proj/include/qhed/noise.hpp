#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qhed/circuit.hpp"
#include "qhed/state.hpp"

namespace qhed {

/// Depolarizing error after every lowered gate, by arity, plus a classical
/// bit flip per qubit at readout.
struct NoiseModel {
  double p1 = 3e-4;
  double p2 = 1e-2;
  double p_readout = 2e-2;

  static NoiseModel ideal() { return {0.0, 0.0, 0.0}; }
  bool is_ideal() const { return p1 == 0.0 && p2 == 0.0 && p_readout == 0.0; }
  /// Throws DomainError unless every probability is in [0, 1].
  void validate() const;
};

/// `key=value` lines (p1, p2, p_readout); '#' starts a comment. Keys left out
/// keep their defaults.
NoiseModel parse_noise_config(const std::string& text);
NoiseModel load_noise_config(const std::string& path);

/// rho <- (1-p) rho + p/(4^k - 1) * sum of the non-identity Paulis on `wires`.
DensityMatrix apply_depolarizing(const DensityMatrix& rho, const std::vector<Wire>& wires, double p);

/// Independent bit flip with probability p on every qubit.
DensityMatrix apply_readout_error(const DensityMatrix& rho, double p);

/// Runs a lowered circuit (no gate on more than two wires) from `input`,
/// depolarizing after every gate and applying readout flips at the end.
DensityMatrix run_noisy(const Circuit& circuit, const NoiseModel& noise, const Statevector& input);

struct Ensemble {
  std::vector<std::pair<double, Statevector>> entries;
};

/// sum_j p_j |psi_j><psi_j|; probabilities must sum to 1 within 1e-10.
DensityMatrix ensemble_to_density(const Ensemble& e);

/// Ensemble of basis states weighted by empirical frequencies.
Ensemble ensemble_from_counts(const std::map<std::uint64_t, std::uint64_t>& counts, int n_qubits);

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

}  // namespace qhed
