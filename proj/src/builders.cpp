#include "qhed/builders.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "qhed/error.hpp"
#include "qhed/state.hpp"

namespace qhed {

namespace {

constexpr int kMaxUnitaryQubits = 10;

std::size_t gray(std::size_t i) { return i ^ (i >> 1); }

/// Uniformly controlled RY on `target`; control bit b of `thetas` index is
/// wire target + 1 + b.
void add_uniform_ry(Circuit& c, Wire target, int k, const std::vector<double>& thetas) {
  if (k == 0) {
    c.add(Gate::ry(target, thetas[0]));
    return;
  }
  const std::size_t count = std::size_t{1} << k;
  for (std::size_t i = 0; i < count; ++i) {
    double phi = 0.0;
    for (std::size_t j = 0; j < count; ++j)
      phi += (std::popcount(j & gray(i)) % 2 ? -1.0 : 1.0) * thetas[j];
    c.add(Gate::ry(target, phi / static_cast<double>(count)));
    const std::size_t changed = gray(i) ^ gray((i + 1) % count);
    c.add(Gate::cx(target + 1 + std::countr_zero(changed), target));
  }
}

}  // namespace

std::string_view to_string(DecrementVariant v) {
  return v == DecrementVariant::Mcx ? "original" : "modified";
}

Circuit build_encoding_circuit(std::span<const double> amplitudes) {
  const std::size_t len = amplitudes.size();
  if (len < 2 || (len & (len - 1)) != 0)
    throw ShapeError("encoding needs a power-of-two length >= 2, got " + std::to_string(len));
  double total = 0.0;
  for (double v : amplitudes) {
    if (v < 0.0 || !std::isfinite(v)) throw DomainError("encoding needs finite nonnegative values");
    total += v * v;
  }
  if (!(total > 0.0)) throw NormalizationError("cannot encode an all-zero vector");

  const int m = std::countr_zero(len);
  // tree[d][j]: squared norm of the block of basis states whose top d bits equal j
  std::vector<std::vector<double>> tree(m + 1);
  tree[m].resize(len);
  for (std::size_t i = 0; i < len; ++i) tree[m][i] = amplitudes[i] * amplitudes[i];
  for (int d = m - 1; d >= 0; --d) {
    tree[d].resize(std::size_t{1} << d);
    for (std::size_t j = 0; j < tree[d].size(); ++j)
      tree[d][j] = tree[d + 1][2 * j] + tree[d + 1][2 * j + 1];
  }

  Circuit c(m);
  for (int d = 0; d < m; ++d) {
    // level d splits on bit m-1-d, controlled by the d bits above it
    const Wire target = m - 1 - d;
    std::vector<double> thetas(std::size_t{1} << d);
    // j is the value of the wires above the target, so its bit b is wire target+1+b
    for (std::size_t j = 0; j < thetas.size(); ++j) {
      const double left = tree[d + 1][2 * j];
      const double right = tree[d + 1][2 * j + 1];
      thetas[j] = 2.0 * std::atan2(std::sqrt(right), std::sqrt(left));
    }
    add_uniform_ry(c, target, d, thetas);
  }
  return c;
}

Circuit build_decrement_mcx(int n_data) {
  if (n_data < 1) throw DomainError("decrement needs at least one wire");
  Circuit c(n_data);
  std::vector<Wire> controls;
  for (Wire t = 0; t < n_data; ++t) {
    c.add(Gate::mcx(controls, t));
    controls.push_back(t);
  }
  return c;
}

Circuit build_decrement_ancilla(int n) {
  if (n < 3) return build_decrement_mcx(n);
  Circuit c(2 * n - 2);
  auto anc = [n](int j) { return n + j; };

  for (Wire r = 0; r <= n - 2; ++r) c.add(Gate::x(r));
  // a_j = 1 iff wires 0..j+1 all held 0
  c.add(Gate::toffoli(0, 1, anc(0)));
  for (int j = 1; j <= n - 3; ++j) c.add(Gate::toffoli(anc(j - 1), j + 1, anc(j)));
  c.add(Gate::cx(anc(n - 3), n - 1));
  for (int j = n - 3; j >= 1; --j) {
    c.add(Gate::toffoli(anc(j - 1), j + 1, anc(j)));
    c.add(Gate::cx(anc(j - 1), j + 1));
  }
  c.add(Gate::toffoli(0, 1, anc(0)));
  c.add(Gate::cx(0, 1));
  for (Wire r = 1; r <= n - 2; ++r) c.add(Gate::x(r));
  return c;
}

QhedCircuit build_qhed(int n_data, DecrementVariant variant) {
  if (n_data < 1) throw DomainError("QHED needs at least one data qubit");
  const int reg = n_data + 1;
  const Circuit dec = variant == DecrementVariant::Ancilla ? build_decrement_ancilla(reg)
                                                           : build_decrement_mcx(reg);
  QhedCircuit out{Circuit(dec.n_qubits()), {}};
  out.layout.lsb_wire = 0;
  for (Wire w = 1; w < reg; ++w) out.layout.data_wires.push_back(w);
  for (Wire w = reg; w < dec.n_qubits(); ++w) out.layout.ancilla_wires.push_back(w);

  out.circuit.add(Gate::h(0));
  out.circuit.append(dec);
  out.circuit.add(Gate::h(0));
  out.circuit.metadata()["variant"] = std::string(to_string(variant));
  out.circuit.metadata()["n_encode"] = std::to_string(n_data);
  return out;
}

Circuit build_qft(int n, bool inverse, bool with_swaps) {
  if (n < 1) throw DomainError("QFT needs at least one qubit");
  Circuit c(n);
  for (Wire j = n - 1; j >= 0; --j) {
    c.add(Gate::h(j));
    for (Wire k = j - 1; k >= 0; --k)
      c.add(Gate::cphase(k, j, std::numbers::pi / static_cast<double>(1u << (j - k))));
  }
  if (with_swaps)
    for (Wire i = 0; i < n / 2; ++i) c.add(Gate::swap(i, n - 1 - i));
  return inverse ? c.inverse() : c;
}

ComplexMatrix circuit_unitary(const Circuit& circuit) {
  const int n = circuit.n_qubits();
  if (n > kMaxUnitaryQubits)
    throw ResourceError("circuit_unitary supports at most " + std::to_string(kMaxUnitaryQubits) +
                        " wires, got " + std::to_string(n));
  if (n == 0) return ComplexMatrix::identity(1);
  const std::size_t dim = std::size_t{1} << n;
  ComplexMatrix u(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    const Statevector out = run_circuit(prepare_basis_state(n, col), circuit);
    for (std::size_t row = 0; row < dim; ++row) u(row, col) = out[row];
  }
  return u;
}

}  // namespace qhed
