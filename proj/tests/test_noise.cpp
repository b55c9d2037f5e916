#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qhed/builders.hpp"
#include "qhed/error.hpp"
#include "qhed/noise.hpp"
#include "qhed/transpile.hpp"

using namespace qhed;

namespace {

DensityMatrix from_matrix(const ComplexMatrix& m) {
  int n = 0;
  while ((std::size_t{1} << n) < m.rows()) ++n;
  return DensityMatrix(n, m.data());
}

double max_diff(const DensityMatrix& a, const ComplexMatrix& b) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i) w = std::max(w, std::abs(a.entries()[i] - b.data()[i]));
  return w;
}

Statevector plus() { return apply_gate(prepare_basis_state(1, 0), Gate::h(0)); }

}  // namespace

TEST(Depolarizing, ZeroIsIdentity) {
  std::mt19937_64 rng(1);
  const auto rho = from_matrix(oracle::random_density(4, 2, rng));
  EXPECT_EQ(apply_depolarizing(rho, {0, 1}, 0.0).entries(), rho.entries());
}

TEST(Depolarizing, FullStrengthOnZero) {
  // Kraus oracle: (X|0><0|X + Y|0><0|Y + Z|0><0|Z)/3 = diag(1/3, 2/3)
  ComplexMatrix zero(2, 2);
  zero(0, 0) = 1.0;
  const auto expect = oracle::depolarize_1q_kraus(zero, 1.0);
  EXPECT_NEAR(expect(0, 0).real(), 1.0 / 3, 1e-15);
  EXPECT_NEAR(expect(1, 1).real(), 2.0 / 3, 1e-15);
  const auto got = apply_depolarizing(from_matrix(zero), {0}, 1.0);
  EXPECT_LT(max_diff(got, expect), 1e-14);
}

TEST(Depolarizing, MatchesKrausOracle) {
  std::mt19937_64 rng(2);
  for (double p : {0.01, 0.3, 0.9}) {
    const auto rho2 = oracle::random_density(4, 3, rng);
    EXPECT_LT(max_diff(apply_depolarizing(from_matrix(rho2), {0, 1}, p), oracle::depolarize_2q_kraus(rho2, p)),
              1e-13);
    // single wire of a 2-qubit state: I (x) channel on wire 0
    const auto rho = oracle::random_density(4, 2, rng);
    ComplexMatrix expect(4, 4);
    for (int a = 0; a < 4; ++a) {
      const double w = a == 0 ? 1 - p : p / 3;
      const auto P = oracle::kron(oracle::pauli(0), oracle::pauli(a));
      const auto t = P * rho * P.adjoint();
      for (std::size_t i = 0; i < 16; ++i) expect.data()[i] += w * t.data()[i];
    }
    const auto got = apply_depolarizing(from_matrix(rho), {0}, p);
    EXPECT_LT(max_diff(got, expect), 1e-13);
    EXPECT_NEAR(got.trace(), 1.0, 1e-12);
  }
}

TEST(RunNoisy, IdealIsPure) {
  const auto q = build_qhed(3, DecrementVariant::Ancilla);
  const Circuit t = transpile(q.circuit);
  const auto in = prepare_basis_state(t.n_qubits(), 6);
  const auto rho = run_noisy(t, NoiseModel::ideal(), in);
  const auto expect = DensityMatrix::from_pure(run_circuit(in, t));
  double w = 0.0;
  for (std::size_t i = 0; i < rho.entries().size(); ++i) w = std::max(w, std::abs(rho.entries()[i] - expect.entries()[i]));
  EXPECT_LT(w, 1e-12);
}

TEST(RunNoisy, SingleHadamardClosedForm) {
  // H|0><0|H = |+><+|; depolarizing shrinks off-diagonals by 1 - 4p/3
  const double p = 0.12;
  Circuit c(1);
  c.add(Gate::h(0));
  const auto rho = run_noisy(c, {p, 0.0, 0.0}, prepare_basis_state(1, 0));
  EXPECT_NEAR(rho(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(rho(0, 1).real(), 0.5 * (1 - 4 * p / 3), 1e-15);
  const double r = 0.05;
  const auto ro = run_noisy(Circuit(1), {0.0, 0.0, r}, prepare_basis_state(1, 0));
  EXPECT_NEAR(ro(1, 1).real(), r, 1e-15);
}

TEST(RunNoisy, Guards) {
  Circuit wide(13);
  EXPECT_THROW(run_noisy(wide, NoiseModel{}, prepare_basis_state(13, 0)), ResourceError);
  Circuit raw(3);
  raw.add(Gate::toffoli(0, 1, 2));
  EXPECT_THROW(run_noisy(raw, NoiseModel{}, prepare_basis_state(3, 0)), PreconditionError);
}

TEST(RunNoisy, QhedLosesFidelity) {
  const auto q = build_qhed(3, DecrementVariant::Mcx);
  const Circuit t = transpile(q.circuit);
  const auto in = prepare_basis_state(t.n_qubits(), 0);
  const auto ideal = DensityMatrix::from_pure(run_circuit(in, t));
  EXPECT_LT(fidelity(run_noisy(t, {0.0, 0.01, 0.0}, in), ideal), 1.0 - 1e-3);
}

TEST(Ensemble, ToDensity) {
  const auto one = ensemble_to_density({{{1.0, plus()}}});
  EXPECT_NEAR(one(0, 1).real(), 0.5, 1e-15);
  const auto mix = ensemble_to_density({{{0.5, prepare_basis_state(1, 0)}, {0.5, prepare_basis_state(1, 1)}}});
  EXPECT_NEAR(mix(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(mix(0, 1)), 0.0, 1e-15);
  EXPECT_THROW(ensemble_to_density({{{0.7, plus()}}}), DomainError);

  std::mt19937_64 rng(5);
  Ensemble e;
  const double w[] = {0.2, 0.5, 0.3};
  for (double p : w) e.entries.emplace_back(p, Statevector(2, oracle::random_state(4, rng)));
  const auto rho = ensemble_to_density(e);
  EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
  const auto eig = hermitian_eigen(rho.matrix());
  for (double v : eig.values) EXPECT_GE(v, -1e-12);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(std::abs(rho(r, c) - std::conj(rho(c, r))), 0.0, 1e-15);
}

TEST(Fidelity, Identities) {
  std::mt19937_64 rng(7);
  for (std::size_t d : {2u, 4u, 8u, 16u}) {
    const auto rho = from_matrix(oracle::random_density(d, 3, rng));
    const auto sigma = from_matrix(oracle::random_density(d, 2, rng));
    EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-9);
    EXPECT_NEAR(fidelity(rho, sigma), fidelity(sigma, rho), 1e-9);
    const auto f = fidelity(rho, sigma);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);

    const auto a = oracle::random_state(d, rng), b = oracle::random_state(d, rng);
    cplx ip{};
    for (std::size_t i = 0; i < d; ++i) ip += std::conj(a[i]) * b[i];
    const int n = std::countr_zero(d);
    const auto pa = DensityMatrix::from_pure(Statevector(n, a));
    const auto pb = DensityMatrix::from_pure(Statevector(n, b));
    EXPECT_NEAR(fidelity(pa, pb), std::norm(ip), 1e-9);

    ComplexMatrix mixed = ComplexMatrix::identity(d);
    for (auto& x : mixed.data()) x /= static_cast<double>(d);
    EXPECT_NEAR(fidelity(pa, from_matrix(mixed)), 1.0 / static_cast<double>(d), 1e-9);
  }
}

TEST(Fidelity, ClosedForms) {
  ComplexMatrix half = ComplexMatrix::identity(2);
  for (auto& x : half.data()) x /= 2.0;
  EXPECT_NEAR(fidelity(DensityMatrix::from_pure(plus()), from_matrix(half)), 0.5, 1e-12);
  EXPECT_NEAR(fidelity(DensityMatrix::from_pure(prepare_basis_state(1, 0)),
                       DensityMatrix::from_pure(prepare_basis_state(1, 1))),
              0.0, 1e-12);
}

TEST(Fidelity, MixedGeneralPathMatchesCommutingCase) {
  // two commuting mixed states: F = (sum sqrt(p_i q_i))^2 in their shared eigenbasis
  std::mt19937_64 rng(9);
  const std::size_t d = 8;
  ComplexMatrix u(d, d);
  {
    // unitary from a random circuit
    Circuit c(3);
    c.add(Gate::h(0)).add(Gate::ry(1, 0.4)).add(Gate::cx(0, 2)).add(Gate::phase(2, 0.9)).add(Gate::h(1));
    u = circuit_unitary(c);
  }
  std::vector<double> p{0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05}, q{0.05, 0.05, 0.2, 0.2, 0.1, 0.1, 0.2, 0.1};
  ComplexMatrix dp(d, d), dq(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    dp(i, i) = p[i];
    dq(i, i) = q[i];
  }
  const auto rho = from_matrix(u * dp * u.adjoint());
  const auto sigma = from_matrix(u * dq * u.adjoint());
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += std::sqrt(p[i] * q[i]);
  EXPECT_NEAR(fidelity(rho, sigma), s * s, 1e-9);
}

TEST(Fidelity, Errors) {
  EXPECT_THROW(fidelity(DensityMatrix::from_pure(plus()), DensityMatrix::from_pure(prepare_basis_state(2, 0))),
               ShapeError);
  ComplexMatrix bad(2, 2);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  EXPECT_THROW(fidelity(from_matrix(bad), DensityMatrix::from_pure(plus())), DomainError);
}

TEST(NoiseConfig, Parse) {
  const auto m = parse_noise_config("# device\np1=0.001\np2 = 0.02\n\np_readout=0.03\n");
  EXPECT_DOUBLE_EQ(m.p1, 0.001);
  EXPECT_DOUBLE_EQ(m.p2, 0.02);
  EXPECT_DOUBLE_EQ(m.p_readout, 0.03);
  const auto d = parse_noise_config("");
  EXPECT_DOUBLE_EQ(d.p2, 1e-2);
  EXPECT_THROW(parse_noise_config("p3=0.1\n"), ParseError);
  EXPECT_THROW(parse_noise_config("p1=abc\n"), ParseError);
  EXPECT_THROW(parse_noise_config("p1=1.5\n"), ParseError);
}
