#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qhed/circuit.hpp"

namespace qhed {

/// Cut `wire` between gates position-1 and position.
struct CutPoint {
  Wire wire = 0;
  std::size_t position = 0;
  friend bool operator==(const CutPoint&, const CutPoint&) = default;
  friend auto operator<=>(const CutPoint&, const CutPoint&) = default;
};

enum class Basis { X, Y, Z };
enum class PrepState { Zero, One, Plus, Minus, PlusI, MinusI };

/// One of the eight measure-and-prepare pairs of the identity channel
/// rho = 1/2 sum_O tr(O rho) O, O in {I, X, Y, Z}.
struct CutChoice {
  Basis basis;
  bool weighted;  // multiply by the +-1 eigenvalue of the measured outcome
  PrepState prep;
  double coefficient;
};

/// The eight pairs in a fixed order; term digits index into this table.
const std::vector<CutChoice>& cut_choices();

struct CutTerm {
  std::size_t index = 0;  // base-8 digits, cut i is digit i
  double coefficient = 1.0;
  std::vector<CutChoice> choices;  // one per cut
};

/// A connected piece of the cut circuit. Local wire i holds segment
/// `segments[i]` of original wire `wires[i]`; a wire cut k times has k+1
/// segments, and one fragment may own several segments of the same wire.
struct Fragment {
  std::vector<Wire> wires;
  std::vector<int> segments;
  std::vector<std::size_t> gate_ids;                 // original gate indices, in order
  std::vector<std::pair<std::size_t, int>> incoming;  // (cut id, local wire) prepared
  std::vector<std::pair<std::size_t, int>> outgoing;  // (cut id, local wire) measured
  std::vector<std::pair<Wire, int>> outputs;         // original wire -> local wire of its last segment

  int width() const { return static_cast<int>(wires.size()); }
};

struct CutPlan {
  Circuit circuit;
  std::vector<CutPoint> cuts;  // sorted
  std::vector<Fragment> fragments;
  int max_width = 0;

  std::size_t term_count() const;
  double one_norm() const;
  int max_fragment_width() const;
};

inline constexpr std::size_t kMaxCuts = 6;

/// With `manual` cuts, validates them (each cut wire must carry a gate on both
/// sides; no duplicates) and checks every fragment fits max_width. Otherwise
/// searches for the fewest cuts that fit: exhaustive over small cut counts,
/// then a greedy join-or-cut scan. Throws PlanningError when no plan exists.
CutPlan plan_cuts(const Circuit& circuit, int max_width,
                  const std::optional<std::vector<CutPoint>>& manual = std::nullopt);

/// Builds a plan from explicit cuts without the width check.
CutPlan make_plan(const Circuit& circuit, std::vector<CutPoint> cuts, int max_width);

/// All 8^cuts terms; throws ResourceError above kMaxCuts cuts.
std::vector<CutTerm> enumerate_terms(const CutPlan& plan);
CutTerm term_at(const CutPlan& plan, std::size_t index);

/// Fragment circuit for `term`: preparations on incoming stubs first, then the
/// fragment's gates, then basis rotations on outgoing stubs before Z readout.
Circuit instantiate_fragment(const CutPlan& plan, const CutTerm& term, std::size_t fragment_id);

/// Key identifying which distinct circuit a (term, fragment) pair needs: the
/// prepared states on incoming stubs and the bases on outgoing stubs. Terms
/// sharing a key share one fragment run.
std::string experiment_key(const CutPlan& plan, const CutTerm& term, std::size_t fragment_id);

/// Z distribution of a fragment (over its local wires) for a term.
using FragmentDistribution =
    std::function<const std::vector<double>*(std::size_t term_index, std::size_t fragment_id)>;
/// Expectation of a fragment for a term, including stub weights.
using FragmentExpectation =
    std::function<std::optional<double>(std::size_t term_index, std::size_t fragment_id)>;

struct KnitResult {
  double value = 0.0;                // expectation mode
  std::vector<double> distribution;  // raw quasi-distribution
  std::vector<double> clamped;       // negatives zeroed, renormalized
  std::size_t term_count = 0;
  double one_norm = 1.0;
};

/// Per-wire diagonal factor of a product observable (value for bit 0, bit 1).
using WireFactor = std::array<double, 2>;

/// Fragment expectation from its Z distribution: product of the observable
/// factors on its output wires times the +-1 weights of weighted stubs.
double fragment_expectation(const CutPlan& plan, const CutTerm& term, std::size_t fragment_id,
                            const std::vector<double>& distribution,
                            const std::map<Wire, WireFactor>& observable);

/// sum_t c_t prod_f E(t, f), summed in ascending term order.
KnitResult knit_expectation(const CutPlan& plan, const FragmentExpectation& expectations);

/// Reconstructed distribution over `keep` (keep[i] is bit i; default: every
/// wire in order).
KnitResult knit_z_distribution(const CutPlan& plan, const FragmentDistribution& distributions,
                               const std::vector<Wire>& keep = {});

/// Exact (statevector) fragment distributions for every distinct experiment.
class ExactFragmentRunner {
 public:
  explicit ExactFragmentRunner(const CutPlan& plan);
  const std::vector<double>* operator()(std::size_t term_index, std::size_t fragment_id);

 private:
  const CutPlan& plan_;
  std::map<std::pair<std::size_t, std::string>, std::vector<double>> cache_;
};

/// `CUT wire position` lines.
std::string write_cut_manifest(const std::vector<CutPoint>& cuts);
std::vector<CutPoint> parse_cut_manifest(const std::string& text);

}  // namespace qhed
