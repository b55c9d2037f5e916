#pragma once

// Internal amplitude kernels shared by the statevector and density-matrix
// engines. A density matrix of n qubits is handled as a 2n-bit vector whose
// high n bits index rows and low n bits index columns.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include "qhed/circuit.hpp"
#include "qhed/linalg.hpp"

namespace qhed::detail {

struct Mat2 {
  cplx m00, m01, m10, m11;

  Mat2 conj() const { return {std::conj(m00), std::conj(m01), std::conj(m10), std::conj(m11)}; }
  bool diagonal() const { return m01 == cplx{} && m10 == cplx{}; }
  bool is_x() const {
    return m00 == cplx{} && m11 == cplx{} && m01 == cplx{1.0} && m10 == cplx{1.0};
  }
};

inline Mat2 mat_h() {
  const double s = 1.0 / std::numbers::sqrt2;
  return {s, s, s, -s};
}
inline Mat2 mat_x() { return {0.0, 1.0, 1.0, 0.0}; }
inline Mat2 mat_ry(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  return {c, -s, s, c};
}
inline Mat2 mat_phase(double lambda) { return {1.0, 0.0, 0.0, std::polar(1.0, lambda)}; }

/// Applies u to `target` on the subspace where every bit of `ctrl_mask` is 1.
inline void apply_1q(std::span<cplx> amps, int target, std::uint64_t ctrl_mask, const Mat2& u) {
  const std::uint64_t half = amps.size() >> 1;
  const std::uint64_t tbit = std::uint64_t{1} << target;
  const std::uint64_t low = tbit - 1;
  if (u.is_x()) {
    for (std::uint64_t i = 0; i < half; ++i) {
      const std::uint64_t i0 = ((i & ~low) << 1) | (i & low);
      if ((i0 & ctrl_mask) != ctrl_mask) continue;
      std::swap(amps[i0], amps[i0 | tbit]);
    }
  } else if (u.diagonal()) {
    const bool touch0 = u.m00 != cplx{1.0};
    for (std::uint64_t i = 0; i < half; ++i) {
      const std::uint64_t i0 = ((i & ~low) << 1) | (i & low);
      if ((i0 & ctrl_mask) != ctrl_mask) continue;
      if (touch0) amps[i0] *= u.m00;
      amps[i0 | tbit] *= u.m11;
    }
  } else {
    for (std::uint64_t i = 0; i < half; ++i) {
      const std::uint64_t i0 = ((i & ~low) << 1) | (i & low);
      if ((i0 & ctrl_mask) != ctrl_mask) continue;
      const std::uint64_t i1 = i0 | tbit;
      const cplx a0 = amps[i0], a1 = amps[i1];
      amps[i0] = u.m00 * a0 + u.m01 * a1;
      amps[i1] = u.m10 * a0 + u.m11 * a1;
    }
  }
}

inline void apply_swap(std::span<cplx> amps, int a, int b) {
  const std::uint64_t ba = std::uint64_t{1} << a, bb = std::uint64_t{1} << b;
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    // visit each (a=1, b=0) index once and swap with its (a=0, b=1) partner
    if ((i & ba) && !(i & bb)) std::swap(amps[i], amps[(i & ~ba) | bb]);
  }
}

inline std::uint64_t mask_of(const std::vector<Wire>& ws, int shift) {
  std::uint64_t m = 0;
  for (Wire w : ws) m |= std::uint64_t{1} << (w + shift);
  return m;
}

/// Single-target matrix of a gate (everything except SWAP).
inline Mat2 target_matrix(const Gate& g) {
  switch (g.kind) {
    case GateKind::H: return mat_h();
    case GateKind::RY: return mat_ry(g.angle);
    case GateKind::Phase:
    case GateKind::CPhase: return mat_phase(g.angle);
    case GateKind::CZ: return mat_phase(std::numbers::pi);
    case GateKind::X:
    case GateKind::CX:
    case GateKind::Toffoli:
    case GateKind::MCX:
    case GateKind::SWAP: return mat_x();
  }
  return mat_x();
}

/// Applies g (or its complex conjugate) with every wire shifted by `shift` bits.
inline void apply_gate_bits(std::span<cplx> amps, const Gate& g, int shift, bool conjugate) {
  if (g.kind == GateKind::SWAP) {
    apply_swap(amps, g.targets[0] + shift, g.targets[1] + shift);
    return;
  }
  Mat2 u = target_matrix(g);
  if (conjugate) u = u.conj();
  apply_1q(amps, g.targets[0] + shift, mask_of(g.controls, shift), u);
}

}  // namespace qhed::detail
