#include "qhed/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kernels.hpp"
#include "qhed/error.hpp"

namespace qhed {

namespace {

constexpr double kHermitianTol = 1e-8;
constexpr double kTraceTol = 1e-8;
constexpr double kNegativeTol = 1e-9;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Scatters the low bits of `value` onto the bit positions in `bits`.
std::size_t deposit(std::size_t value, const std::vector<int>& bits) {
  std::size_t out = 0;
  for (std::size_t b = 0; b < bits.size(); ++b) out |= ((value >> b) & 1u) << bits[b];
  return out;
}

void check_density(const DensityMatrix& rho, const char* name) {
  const std::size_t d = rho.dim();
  double tr = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    tr += rho(r, r).real();
    if (std::abs(rho(r, r).imag()) > kHermitianTol)
      throw DomainError(std::string(name) + " has a complex diagonal entry");
    for (std::size_t c = r + 1; c < d; ++c)
      if (std::abs(rho(r, c) - std::conj(rho(c, r))) > kHermitianTol)
        throw DomainError(std::string(name) + " is not Hermitian");
  }
  if (std::abs(tr - 1.0) > kTraceTol)
    throw DomainError(std::string(name) + " has trace " + std::to_string(tr));
}

bool is_diagonal(const DensityMatrix& rho) {
  const std::size_t d = rho.dim();
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      if (r != c && std::abs(rho(r, c)) > 1e-14) return false;
  return true;
}

double checked_sqrt(double x, const char* what) {
  if (x < -kNegativeTol)
    throw DomainError(std::string(what) + " has eigenvalue " + std::to_string(x) + " below zero");
  return std::sqrt(std::max(x, 0.0));
}

}  // namespace

void NoiseModel::validate() const {
  for (double p : {p1, p2, p_readout})
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("noise probability outside [0, 1]");
}

NoiseModel parse_noise_config(const std::string& text) {
  NoiseModel m;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("noise config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
      throw ParseError("noise config line " + std::to_string(line_no) + ": bad number '" + val + "'");
    }
    if (key == "p1") m.p1 = v;
    else if (key == "p2") m.p2 = v;
    else if (key == "p_readout") m.p_readout = v;
    else throw ParseError("noise config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  try {
    m.validate();
  } catch (const DomainError& e) {
    throw ParseError(std::string("noise config: ") + e.what());
  }
  return m;
}

NoiseModel load_noise_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read noise config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_noise_config(ss.str());
}

namespace {

void depolarize_in_place(std::vector<cplx>& e, int n, const std::vector<Wire>& wires, double p) {
  // rho' = a rho + b (I_W (x) Tr_W rho), from summing the Pauli twirl
  const double four_k = std::pow(4.0, static_cast<double>(wires.size()));
  const double two_k = std::pow(2.0, static_cast<double>(wires.size()));
  const double a = 1.0 - p * four_k / (four_k - 1.0);
  const double b = p * two_k / (four_k - 1.0);

  std::vector<int> row_bits, col_bits;
  for (Wire w : wires) {
    row_bits.push_back(w + n);
    col_bits.push_back(w);
  }
  std::size_t mask = 0;
  for (int bit : row_bits) mask |= std::size_t{1} << bit;
  for (int bit : col_bits) mask |= std::size_t{1} << bit;
  const std::size_t sub = std::size_t{1} << wires.size();
  std::vector<std::size_t> row_off(sub), col_off(sub);
  for (std::size_t v = 0; v < sub; ++v) {
    row_off[v] = deposit(v, row_bits);
    col_off[v] = deposit(v, col_bits);
  }

  for (std::size_t base = 0; base < e.size(); ++base) {
    if (base & mask) continue;
    cplx s{};
    for (std::size_t v = 0; v < sub; ++v) s += e[base | row_off[v] | col_off[v]];
    for (std::size_t r = 0; r < sub; ++r)
      for (std::size_t c = 0; c < sub; ++c) {
        cplx& x = e[base | row_off[r] | col_off[c]];
        x = a * x + (r == c ? b * s : cplx{});
      }
  }
}

}  // namespace

DensityMatrix apply_depolarizing(const DensityMatrix& rho, const std::vector<Wire>& wires, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("depolarizing probability outside [0, 1]");
  for (Wire w : wires)
    if (w < 0 || w >= rho.n_qubits()) throw CircuitError("depolarizing wire out of range");
  if (p == 0.0 || wires.empty()) return rho;
  DensityMatrix out = rho;
  depolarize_in_place(out.mutable_entries(), out.n_qubits(), wires, p);
  return out;
}

DensityMatrix apply_readout_error(const DensityMatrix& rho, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("readout probability outside [0, 1]");
  if (p == 0.0) return rho;
  const int n = rho.n_qubits();
  DensityMatrix out = rho;
  auto& e = out.mutable_entries();
  for (int w = 0; w < n; ++w) {
    const std::size_t rb = std::size_t{1} << (w + n), cb = std::size_t{1} << w;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (i & (rb | cb)) continue;
      // X rho X swaps (r, c) with (r^1, c^1) on this wire
      cplx& e00 = e[i];
      cplx& e01 = e[i | cb];
      cplx& e10 = e[i | rb];
      cplx& e11 = e[i | rb | cb];
      const cplx a00 = e00, a01 = e01, a10 = e10, a11 = e11;
      e00 = (1 - p) * a00 + p * a11;
      e11 = (1 - p) * a11 + p * a00;
      e01 = (1 - p) * a01 + p * a10;
      e10 = (1 - p) * a10 + p * a01;
    }
  }
  return out;
}

DensityMatrix run_noisy(const Circuit& circuit, const NoiseModel& noise, const Statevector& input) {
  noise.validate();
  if (input.n_qubits() > kMaxDensityQubits)
    throw ResourceError("noisy simulation of " + std::to_string(input.n_qubits()) +
                        " wires exceeds the " + std::to_string(kMaxDensityQubits) +
                        "-wire density-matrix limit; cut or decompose the circuit");
  if (circuit.n_qubits() > input.n_qubits())
    throw CircuitError("circuit is wider than its input state");
  for (const Gate& g : circuit.gates())
    if (g.arity() > 2)
      throw PreconditionError("run_noisy needs a lowered circuit; found " + std::string(to_string(g.kind)));

  DensityMatrix rho = DensityMatrix::from_pure(input);
  const int n = rho.n_qubits();
  for (const Gate& g : circuit.gates()) {
    detail::apply_gate_bits(rho.mutable_entries(), g, n, false);
    detail::apply_gate_bits(rho.mutable_entries(), g, 0, true);
    const double p = g.arity() == 1 ? noise.p1 : noise.p2;
    if (p > 0.0) depolarize_in_place(rho.mutable_entries(), n, g.wires(), p);
  }
  return apply_readout_error(rho, noise.p_readout);
}

DensityMatrix ensemble_to_density(const Ensemble& e) {
  if (e.entries.empty()) throw DomainError("empty ensemble");
  const int n = e.entries.front().second.n_qubits();
  double total = 0.0;
  for (const auto& [p, psi] : e.entries) {
    if (p < 0.0) throw DomainError("negative ensemble probability");
    if (psi.n_qubits() != n) throw ShapeError("ensemble states differ in width");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) throw DomainError("ensemble probabilities sum to " + std::to_string(total));

  const std::size_t d = std::size_t{1} << n;
  std::vector<cplx> m(d * d);
  for (const auto& [p, psi] : e.entries) {
    if (p == 0.0) continue;
    const auto& a = psi.amplitudes();
    for (std::size_t r = 0; r < d; ++r) {
      if (a[r] == cplx{}) continue;
      for (std::size_t c = 0; c < d; ++c) m[r * d + c] += p * a[r] * std::conj(a[c]);
    }
  }
  return DensityMatrix(n, std::move(m));
}

Ensemble ensemble_from_counts(const std::map<std::uint64_t, std::uint64_t>& counts, int n_qubits) {
  std::uint64_t total = 0;
  for (const auto& kv : counts) total += kv.second;
  if (total == 0) throw DomainError("no counts to build an ensemble from");
  Ensemble e;
  for (const auto& [k, c] : counts)
    e.entries.emplace_back(static_cast<double>(c) / static_cast<double>(total),
                           prepare_basis_state(n_qubits, k));
  return e;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.n_qubits() != sigma.n_qubits()) throw ShapeError("fidelity: dimensions differ");
  check_density(rho, "rho");
  check_density(sigma, "sigma");
  const std::size_t d = rho.dim();

  if (is_diagonal(rho) && is_diagonal(sigma)) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      s += checked_sqrt(rho(i, i).real(), "rho") * checked_sqrt(sigma(i, i).real(), "sigma");
    return std::clamp(s * s, 0.0, 1.0);
  }

  // a trace-one PSD matrix has purity at most 1
  for (const DensityMatrix* m : {&rho, &sigma})
    if (m->purity() > 1.0 + 1e-9) throw DomainError("density matrix is not positive semidefinite");

  // pure fast path: F = <psi|other|psi>
  for (int pass = 0; pass < 2; ++pass) {
    const DensityMatrix& pure = pass == 0 ? rho : sigma;
    const DensityMatrix& other = pass == 0 ? sigma : rho;
    if (pure.purity() < 1.0 - 1e-10) continue;
    std::size_t j = 0;
    for (std::size_t i = 1; i < d; ++i)
      if (pure(i, i).real() > pure(j, j).real()) j = i;
    const double scale = 1.0 / std::sqrt(pure(j, j).real());
    std::vector<cplx> psi(d);
    for (std::size_t i = 0; i < d; ++i) psi[i] = pure(i, j) * scale;
    for (std::size_t i = 0; i < d; ++i)
      if (other(i, i).real() < -kNegativeTol) throw DomainError("density matrix has a negative diagonal");
    cplx f{};
    for (std::size_t r = 0; r < d; ++r) {
      cplx row{};
      for (std::size_t c = 0; c < d; ++c) row += other(r, c) * psi[c];
      f += std::conj(psi[r]) * row;
    }
    return std::clamp(f.real(), 0.0, 1.0);
  }

  // Eigenvalues within rounding of zero are zeroed before the square root,
  // which would otherwise magnify them to ~1e-8.
  const double floor = 1e-15 * static_cast<double>(d);
  const HermitianEigen er = hermitian_eigen(rho.matrix());
  ComplexMatrix root(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    const double s = er.values[k] < floor ? checked_sqrt(std::min(er.values[k], 0.0), "rho")
                                          : std::sqrt(er.values[k]);
    if (s == 0.0) continue;
    for (std::size_t r = 0; r < d; ++r) {
      const cplx vr = er.vectors(r, k) * s;
      for (std::size_t c = 0; c < d; ++c) root(r, c) += vr * std::conj(er.vectors(c, k));
    }
  }
  const ComplexMatrix m = root * sigma.matrix() * root;
  const HermitianEigen em = hermitian_eigen(m);
  double t = 0.0;
  for (double v : em.values) t += v < floor ? checked_sqrt(std::min(v, 0.0), "sigma") : std::sqrt(v);
  return std::clamp(t * t, 0.0, 1.0);
}

}  // namespace qhed
