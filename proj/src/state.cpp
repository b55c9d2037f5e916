#include "qhed/state.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "kernels.hpp"
#include "qhed/error.hpp"
#include "qhed/rng.hpp"

namespace qhed {

namespace {

bool is_power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

int log2_exact(std::size_t n) { return std::countr_zero(n); }

void check_gate_fits(const Gate& g, int n_qubits) {
  g.validate();
  for (Wire w : g.wires())
    if (w >= n_qubits)
      throw CircuitError("gate wire " + std::to_string(w) + " outside a " +
                         std::to_string(n_qubits) + "-qubit state");
}

void check_circuit_fits(const Circuit& c, int n_qubits) {
  if (c.n_qubits() > n_qubits)
    throw CircuitError("circuit width " + std::to_string(c.n_qubits()) +
                       " exceeds state width " + std::to_string(n_qubits));
}

void evolve_density(std::vector<cplx>& entries, int n, const Gate& g) {
  // rho -> U rho U^dagger: U on the row bits, conj(U) on the column bits.
  detail::apply_gate_bits(entries, g, n, false);
  detail::apply_gate_bits(entries, g, 0, true);
}

}  // namespace

Statevector::Statevector(int n_qubits, std::vector<cplx> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
  if (n_qubits < 1 || n_qubits > kMaxStatevectorQubits)
    throw ResourceError("statevector width " + std::to_string(n_qubits) + " outside [1, " +
                        std::to_string(kMaxStatevectorQubits) + "]");
  if (amplitudes_.size() != (std::size_t{1} << n_qubits))
    throw ShapeError("statevector length does not match 2^n_qubits");
}

double Statevector::norm() const {
  double s = 0.0;
  for (const cplx& a : amplitudes_) s += std::norm(a);
  return std::sqrt(s);
}

DensityMatrix::DensityMatrix(int n_qubits, std::vector<cplx> entries)
    : n_qubits_(n_qubits), entries_(std::move(entries)) {
  if (n_qubits < 1 || n_qubits > kMaxDensityQubits)
    throw ResourceError("density-matrix width " + std::to_string(n_qubits) +
                        " outside [1, " + std::to_string(kMaxDensityQubits) +
                        "]; decompose or cut the circuit");
  if (entries_.size() != dim() * dim()) throw ShapeError("density matrix has wrong entry count");
}

DensityMatrix DensityMatrix::from_pure(const Statevector& psi) {
  const std::size_t d = psi.dim();
  std::vector<cplx> e(d * d);
  const auto& a = psi.amplitudes();
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) e[r * d + c] = a[r] * std::conj(a[c]);
  return DensityMatrix(psi.n_qubits(), std::move(e));
}

ComplexMatrix DensityMatrix::matrix() const {
  ComplexMatrix m(dim(), dim());
  m.data() = entries_;
  return m;
}

double DensityMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) t += entries_[i * dim() + i].real();
  return t;
}

double DensityMatrix::purity() const {
  // tr(rho^2) = sum |rho_rc|^2 for Hermitian rho
  double s = 0.0;
  for (const cplx& x : entries_) s += std::norm(x);
  return s;
}

Statevector prepare_basis_state(int n_qubits, std::uint64_t index) {
  if (n_qubits < 1 || n_qubits > kMaxStatevectorQubits)
    throw ResourceError("statevector width out of range");
  const std::size_t dim = std::size_t{1} << n_qubits;
  if (index >= dim)
    throw DomainError("basis index " + std::to_string(index) + " outside [0, " +
                      std::to_string(dim) + ")");
  std::vector<cplx> a(dim);
  a[index] = 1.0;
  return Statevector(n_qubits, std::move(a));
}

Statevector prepare_from_amplitudes(std::span<const cplx> values) {
  if (values.size() < 2 || !is_power_of_two(values.size()))
    throw ShapeError("amplitude count " + std::to_string(values.size()) +
                     " is not a power of two >= 2");
  double s = 0.0;
  for (const cplx& v : values) s += std::norm(v);
  if (!(s > 0.0) || !std::isfinite(s)) throw NormalizationError("cannot normalize a zero vector");
  const double inv = 1.0 / std::sqrt(s);
  std::vector<cplx> a(values.begin(), values.end());
  for (cplx& x : a) x *= inv;
  return Statevector(log2_exact(values.size()), std::move(a));
}

Statevector prepare_from_amplitudes(std::span<const double> values) {
  std::vector<cplx> c(values.begin(), values.end());
  return prepare_from_amplitudes(std::span<const cplx>(c));
}

Statevector apply_gate(const Statevector& state, const Gate& gate) {
  check_gate_fits(gate, state.n_qubits());
  Statevector out = state;
  detail::apply_gate_bits(out.amplitudes_, gate, 0, false);
  return out;
}

DensityMatrix apply_gate(const DensityMatrix& state, const Gate& gate) {
  check_gate_fits(gate, state.n_qubits());
  DensityMatrix out = state;
  evolve_density(out.mutable_entries(), out.n_qubits(), gate);
  return out;
}

Statevector run_circuit(const Statevector& state, const Circuit& circuit) {
  check_circuit_fits(circuit, state.n_qubits());
  Statevector out = state;
  for (const Gate& g : circuit.gates()) detail::apply_gate_bits(out.amplitudes_, g, 0, false);
  return out;
}

DensityMatrix run_circuit(const DensityMatrix& state, const Circuit& circuit) {
  check_circuit_fits(circuit, state.n_qubits());
  DensityMatrix out = state;
  for (const Gate& g : circuit.gates()) evolve_density(out.mutable_entries(), out.n_qubits(), g);
  return out;
}

std::vector<double> z_probabilities(const Statevector& state) {
  std::vector<double> p(state.dim());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(state[i]);
  return p;
}

std::vector<double> z_probabilities(const DensityMatrix& state) {
  std::vector<double> p(state.dim());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::max(0.0, state(i, i).real());
  return p;
}

std::map<std::uint64_t, std::uint64_t> sample_counts(std::span<const double> probabilities,
                                                     std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) throw DomainError("sample_counts needs at least one shot");
  if (probabilities.empty()) throw ShapeError("sample_counts: empty distribution");
  std::vector<double> cumulative(probabilities.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += std::max(0.0, probabilities[i]);
    cumulative[i] = acc;
  }
  if (!(acc > 0.0)) throw NormalizationError("sample_counts: distribution has zero mass");

  std::map<std::uint64_t, std::uint64_t> counts;
  SplitMix64 rng(seed);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    // skip zero-probability outcomes sharing the same cumulative value
    std::size_t k = static_cast<std::size_t>(it - cumulative.begin());
    while (probabilities[k] <= 0.0 && k + 1 < cumulative.size()) ++k;
    ++counts[k];
  }
  return counts;
}

std::map<std::uint64_t, std::uint64_t> sample_counts(const Statevector& state,
                                                     std::uint64_t shots, std::uint64_t seed) {
  const auto p = z_probabilities(state);
  return sample_counts(std::span<const double>(p), shots, seed);
}

std::map<std::uint64_t, std::uint64_t> sample_counts(const DensityMatrix& state,
                                                     std::uint64_t shots, std::uint64_t seed) {
  const auto p = z_probabilities(state);
  return sample_counts(std::span<const double>(p), shots, seed);
}

std::vector<double> counts_to_distribution(const std::map<std::uint64_t, std::uint64_t>& counts,
                                           std::size_t dim) {
  std::vector<double> p(dim, 0.0);
  std::uint64_t total = 0;
  for (const auto& [k, n] : counts) {
    if (k >= dim) throw ShapeError("count outcome outside distribution");
    p[k] += static_cast<double>(n);
    total += n;
  }
  if (total == 0) throw NormalizationError("no counts");
  for (double& x : p) x /= static_cast<double>(total);
  return p;
}

double expectation_diagonal(const Statevector& state, std::span<const double> observable) {
  if (observable.size() != state.dim()) throw ShapeError("observable length differs from state dimension");
  double e = 0.0;
  for (std::size_t i = 0; i < observable.size(); ++i) e += std::norm(state[i]) * observable[i];
  return e;
}

double expectation_diagonal(const DensityMatrix& state, std::span<const double> observable) {
  if (observable.size() != state.dim()) throw ShapeError("observable length differs from state dimension");
  double e = 0.0;
  for (std::size_t i = 0; i < observable.size(); ++i) e += state(i, i).real() * observable[i];
  return e;
}

std::vector<double> marginalize(std::span<const double> probabilities, int n_qubits,
                                const std::vector<Wire>& keep) {
  if (probabilities.size() != (std::size_t{1} << n_qubits))
    throw ShapeError("marginalize: distribution length does not match width");
  for (Wire w : keep)
    if (w < 0 || w >= n_qubits) throw ShapeError("marginalize: wire out of range");
  std::vector<double> out(std::size_t{1} << keep.size(), 0.0);
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    std::size_t j = 0;
    for (std::size_t b = 0; b < keep.size(); ++b) j |= ((i >> keep[b]) & 1u) << b;
    out[j] += probabilities[i];
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<Wire>& keep) {
  const int n = rho.n_qubits();
  for (Wire w : keep)
    if (w < 0 || w >= n) throw ShapeError("partial_trace: wire out of range");
  std::vector<Wire> traced;
  for (Wire w = 0; w < n; ++w)
    if (std::find(keep.begin(), keep.end(), w) == keep.end()) traced.push_back(w);

  const std::size_t kd = std::size_t{1} << keep.size();
  const std::size_t td = std::size_t{1} << traced.size();
  auto deposit = [](std::size_t value, const std::vector<Wire>& wires) {
    std::size_t out = 0;
    for (std::size_t b = 0; b < wires.size(); ++b) out |= ((value >> b) & 1u) << wires[b];
    return out;
  };
  std::vector<std::size_t> kidx(kd), tidx(td);
  for (std::size_t i = 0; i < kd; ++i) kidx[i] = deposit(i, keep);
  for (std::size_t i = 0; i < td; ++i) tidx[i] = deposit(i, traced);

  std::vector<cplx> out(kd * kd);
  for (std::size_t r = 0; r < kd; ++r)
    for (std::size_t c = 0; c < kd; ++c) {
      cplx s{};
      for (std::size_t t = 0; t < td; ++t) s += rho(kidx[r] | tidx[t], kidx[c] | tidx[t]);
      out[r * kd + c] = s;
    }
  return DensityMatrix(static_cast<int>(keep.size()), std::move(out));
}

}  // namespace qhed
