#include "qhed/benchmark.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "qhed/cutting.hpp"
#include "qhed/error.hpp"
#include "qhed/rng.hpp"
#include "qhed/state.hpp"

namespace qhed {
namespace {

DensityMatrix diagonal_density(const std::vector<double>& p) {
  int n = 0;
  while ((std::size_t{1} << n) < p.size()) ++n;
  std::vector<cplx> e(p.size() * p.size());
  for (std::size_t i = 0; i < p.size(); ++i) e[i * p.size() + i] = p[i];
  return DensityMatrix(n, std::move(e));
}

/// Noisy fragment distributions for every distinct experiment of a plan, and
/// the experiment each (term, fragment) uses.
struct CutExperiments {
  std::vector<std::vector<double>> noisy;
  std::vector<std::size_t> index;  // [term * fragments + fragment]
};

CutExperiments simulate_fragments(const CutPlan& plan, const NoiseModel& noise) {
  CutExperiments out;
  const auto terms = enumerate_terms(plan);
  const std::size_t F = plan.fragments.size();
  out.index.resize(terms.size() * F);
  for (std::size_t f = 0; f < F; ++f) {
    std::map<std::string, std::size_t> seen;
    for (const auto& t : terms) {
      const std::string key = experiment_key(plan, t, f);
      auto it = seen.find(key);
      if (it == seen.end()) {
        const Circuit c = instantiate_fragment(plan, t, f);
        out.noisy.push_back(z_probabilities(run_noisy(c, noise, prepare_basis_state(c.n_qubits(), 0))));
        it = seen.emplace(key, out.noisy.size() - 1).first;
      }
      out.index[t.index * F + f] = it->second;
    }
  }
  return out;
}

}  // namespace

void BenchmarkSweep::validate() const {
  if (min_n < 1 || max_n < min_n) throw DomainError("benchmark needs 1 <= min_n <= max_n");
  if (seeds < 1) throw DomainError("benchmark needs at least one seed");
  if (variants.empty()) throw DomainError("benchmark needs at least one variant");
  if (shots == 0) throw DomainError("shots must be positive");
  if (max_width < 1) throw DomainError("max_width must be positive");
  noise.validate();
}

std::vector<MetricsRecord> run_benchmark(const BenchmarkSweep& sweep) {
  sweep.validate();
  std::vector<MetricsRecord> rows;
  for (DecrementVariant v : sweep.variants) {
    const auto vkey = static_cast<std::uint64_t>(v);
    for (int n = sweep.min_n; n <= sweep.max_n; ++n) {
      const QhedCircuit q = build_qhed(n, v);
      const Circuit t = transpile(q.circuit);
      const std::vector<Wire> reg = q.layout.register_wires();
      const int width = t.n_qubits();

      MetricsRecord base;
      base.variant = std::string(to_string(v));
      base.n_encode = n;
      base.cut = sweep.cut;

      // sampler(seed) -> fidelity, or nothing when the point is out of reach
      std::function<std::optional<double>(std::uint64_t)> sampler = [](std::uint64_t) { return std::nullopt; };
      std::optional<std::vector<double>> ideal;
      std::optional<DensityMatrix> ideal_rho;
      auto ideal_density = [&]() -> const DensityMatrix& {
        if (!ideal_rho) {
          ideal = marginalize(z_probabilities(run_circuit(prepare_basis_state(width, 0), t)), width, reg);
          ideal_rho = diagonal_density(*ideal);
        }
        return *ideal_rho;
      };

      std::optional<std::vector<double>> noisy;
      std::optional<CutPlan> plan;
      std::optional<CutExperiments> experiments;
      if (!sweep.cut) {
        const auto m = compute_metrics(t);
        base.depth = m.depth;
        base.cx_count = m.cx_count;
        base.gate_count = m.gate_count;
        if (width <= kMaxDensityQubits) {
          noisy = marginalize(z_probabilities(run_noisy(t, sweep.noise, prepare_basis_state(width, 0))), width, reg);
          sampler = [&](std::uint64_t seed) -> std::optional<double> {
            const auto counts = sample_counts(*noisy, sweep.shots, derive_seed(seed, vkey, n, 0));
            return fidelity(ensemble_to_density(ensemble_from_counts(counts, static_cast<int>(reg.size()))),
                            ideal_density());
          };
        }
      } else {
        plan = plan_cuts(t, sweep.max_width);
        CircuitMetrics m{};
        for (std::size_t f = 0; f < plan->fragments.size(); ++f) {
          CutTerm plain;
          plain.choices.assign(plan->cuts.size(), cut_choices().front());
          const auto fm = compute_metrics(instantiate_fragment(*plan, plain, f));
          m.depth = std::max(m.depth, fm.depth);
          m.cx_count = std::max(m.cx_count, fm.cx_count);
          m.gate_count = std::max(m.gate_count, fm.gate_count);
        }
        base.depth = m.depth;
        base.cx_count = m.cx_count;
        base.gate_count = m.gate_count;
        if (plan->cuts.size() <= kMaxCuts && plan->max_fragment_width() <= kMaxDensityQubits) {
          experiments = simulate_fragments(*plan, sweep.noise);
          sampler = [&](std::uint64_t seed) -> std::optional<double> {
            std::vector<std::vector<double>> sampled(experiments->noisy.size());
            for (std::size_t e = 0; e < sampled.size(); ++e) {
              const auto& p = experiments->noisy[e];
              sampled[e] = counts_to_distribution(sample_counts(p, sweep.shots, derive_seed(seed, vkey, n, e + 1)),
                                                  p.size());
            }
            const std::size_t F = plan->fragments.size();
            const auto knit = knit_z_distribution(
                *plan, [&](std::size_t term, std::size_t f) { return &sampled[experiments->index[term * F + f]]; },
                reg);
            return fidelity(diagonal_density(knit.clamped), ideal_density());
          };
        }
      }

      for (int s = 0; s < sweep.seeds; ++s) {
        MetricsRecord row = base;
        row.seed = sweep.base_seed + static_cast<std::uint64_t>(s);
        row.fidelity = sampler(row.seed);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace qhed
