#pragma once

#include <cstdint>
#include <vector>

#include "qhed/builders.hpp"
#include "qhed/noise.hpp"
#include "qhed/transpile.hpp"

namespace qhed {

struct BenchmarkSweep {
  int min_n = 2;
  int max_n = 8;
  int seeds = 100;
  std::vector<DecrementVariant> variants{DecrementVariant::Mcx, DecrementVariant::Ancilla};
  bool cut = false;
  int max_width = 5;
  NoiseModel noise;
  std::uint64_t shots = 4096;
  std::uint64_t base_seed = 0;

  /// Throws DomainError on an empty or inverted range.
  void validate() const;
};

/// One row per (variant, n_encode, seed), in that order. Each point is built,
/// lowered and optimized once; its noisy register distribution is simulated
/// once from |0...0>, and every seed draws `shots` samples from it. Fidelity
/// compares the sampled ensemble with the ideal register distribution (both
/// diagonal). Cut rows report the widest fragment's metrics and knit the
/// sampled fragment distributions. Fidelity is blank when the density matrix
/// would exceed its wire limit or the cut plan needs too many cuts.
std::vector<MetricsRecord> run_benchmark(const BenchmarkSweep& sweep);

}  // namespace qhed
