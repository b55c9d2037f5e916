#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "qhed/circuit.hpp"
#include "qhed/linalg.hpp"

namespace qhed {

inline constexpr int kMaxStatevectorQubits = 22;
inline constexpr int kMaxDensityQubits = 12;

/// Pure state of n qubits. Basis index k has wire q as bit q (q0 is the LSB).
class Statevector {
 public:
  Statevector() = default;
  /// Takes amplitudes as given; the caller guarantees unit norm.
  Statevector(int n_qubits, std::vector<cplx> amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amplitudes_.size(); }
  const std::vector<cplx>& amplitudes() const { return amplitudes_; }
  const cplx& operator[](std::size_t i) const { return amplitudes_[i]; }

  double norm() const;

 private:
  friend Statevector apply_gate(const Statevector&, const Gate&);
  friend Statevector run_circuit(const Statevector&, const Circuit&);
  int n_qubits_ = 0;
  std::vector<cplx> amplitudes_;
};

/// Mixed state, stored row-major.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  DensityMatrix(int n_qubits, std::vector<cplx> entries);

  static DensityMatrix from_pure(const Statevector& psi);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return std::size_t{1} << n_qubits_; }
  cplx operator()(std::size_t r, std::size_t c) const { return entries_[r * dim() + c]; }
  const std::vector<cplx>& entries() const { return entries_; }
  std::vector<cplx>& mutable_entries() { return entries_; }

  ComplexMatrix matrix() const;
  double trace() const;
  double purity() const;

 private:
  int n_qubits_ = 0;
  std::vector<cplx> entries_;
};

Statevector prepare_basis_state(int n_qubits, std::uint64_t index);

/// Normalizes `values`; length must be a power of two >= 2 and not all zero.
Statevector prepare_from_amplitudes(std::span<const cplx> values);
Statevector prepare_from_amplitudes(std::span<const double> values);

Statevector apply_gate(const Statevector& state, const Gate& gate);
DensityMatrix apply_gate(const DensityMatrix& state, const Gate& gate);

/// The circuit may be narrower than the state; its wires map onto the state's
/// low wires.
Statevector run_circuit(const Statevector& state, const Circuit& circuit);
DensityMatrix run_circuit(const DensityMatrix& state, const Circuit& circuit);

std::vector<double> z_probabilities(const Statevector& state);
std::vector<double> z_probabilities(const DensityMatrix& state);

/// Multinomial draw from `probabilities` using SplitMix64 seeded with `seed`:
/// one uniform per shot, located by binary search in the cumulative sum.
std::map<std::uint64_t, std::uint64_t> sample_counts(std::span<const double> probabilities,
                                                     std::uint64_t shots, std::uint64_t seed);
std::map<std::uint64_t, std::uint64_t> sample_counts(const Statevector& state,
                                                     std::uint64_t shots, std::uint64_t seed);
std::map<std::uint64_t, std::uint64_t> sample_counts(const DensityMatrix& state,
                                                     std::uint64_t shots, std::uint64_t seed);

/// Empirical distribution of `counts` over `dim` outcomes.
std::vector<double> counts_to_distribution(const std::map<std::uint64_t, std::uint64_t>& counts,
                                           std::size_t dim);

double expectation_diagonal(const Statevector& state, std::span<const double> observable);
double expectation_diagonal(const DensityMatrix& state, std::span<const double> observable);

/// Marginal distribution over `keep` (keep[i] becomes bit i of the result).
std::vector<double> marginalize(std::span<const double> probabilities, int n_qubits,
                                const std::vector<Wire>& keep);

/// Reduced state on `keep` (keep[i] becomes wire i of the result).
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<Wire>& keep);

}  // namespace qhed
