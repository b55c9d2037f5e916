#include "qhed/cutting.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qhed/error.hpp"
#include "qhed/state.hpp"

namespace qhed {
namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

/// Cut positions per wire, ascending.
std::vector<std::vector<std::size_t>> cuts_by_wire(int n_qubits, const std::vector<CutPoint>& cuts) {
  std::vector<std::vector<std::size_t>> by(n_qubits);
  for (const auto& c : cuts) by[c.wire].push_back(c.position);
  for (auto& v : by) std::sort(v.begin(), v.end());
  return by;
}

int segment_of(const std::vector<std::size_t>& positions, std::size_t gate) {
  return static_cast<int>(std::upper_bound(positions.begin(), positions.end(), gate) - positions.begin());
}

std::vector<int> segment_offsets(const std::vector<std::vector<std::size_t>>& by) {
  std::vector<int> off(by.size() + 1, 0);
  for (std::size_t w = 0; w < by.size(); ++w) off[w + 1] = off[w] + static_cast<int>(by[w].size()) + 1;
  return off;
}

void validate_cuts(const Circuit& circuit, std::vector<CutPoint>& cuts) {
  std::sort(cuts.begin(), cuts.end());
  if (std::adjacent_find(cuts.begin(), cuts.end()) != cuts.end()) throw PlanningError("duplicate cut point");
  std::vector<std::vector<std::size_t>> uses(circuit.n_qubits());
  for (std::size_t g = 0; g < circuit.size(); ++g)
    for (Wire w : circuit.gates()[g].wires()) uses[w].push_back(g);
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const auto& c = cuts[i];
    if (c.wire < 0 || c.wire >= circuit.n_qubits())
      throw PlanningError("cut on wire " + std::to_string(c.wire) + " outside the circuit");
    const auto& u = uses[c.wire];
    const bool before = !u.empty() && u.front() < c.position;
    const bool after = !u.empty() && u.back() >= c.position;
    if (!before || !after)
      throw PlanningError("cut (" + std::to_string(c.wire) + ", " + std::to_string(c.position) +
                          ") needs a gate on the wire on both sides");
    // the segment between two cuts on one wire must not be empty
    if (i + 1 < cuts.size() && cuts[i + 1].wire == c.wire) {
      const auto it = std::lower_bound(u.begin(), u.end(), c.position);
      if (it == u.end() || *it >= cuts[i + 1].position)
        throw PlanningError("no gate between cuts on wire " + std::to_string(c.wire));
    }
  }
}

/// Widest fragment for a cut set, without building the plan.
int widest_fragment(const Circuit& circuit, const std::vector<CutPoint>& cuts) {
  const auto by = cuts_by_wire(circuit.n_qubits(), cuts);
  const auto off = segment_offsets(by);
  UnionFind uf(off.back());
  for (std::size_t g = 0; g < circuit.size(); ++g) {
    const Gate& gate = circuit.gates()[g];
    int first = -1;
    for (Wire w : gate.wires()) {
      const int s = off[w] + segment_of(by[w], g);
      if (first < 0)
        first = s;
      else
        uf.unite(first, s);
    }
  }
  std::vector<int> size(off.back(), 0);
  int best = 0;
  for (int s = 0; s < off.back(); ++s) best = std::max(best, ++size[uf.find(s)]);
  return best;
}

/// Iterative-deepening search for the fewest cuts. Multi-qubit gates are
/// assigned to bins of at most max_width wire segments; a wire moving to a
/// different bin costs one cut and opens a new segment there. Single-qubit
/// gates follow their wire. Gives up after a node budget.
class BinSearch {
 public:
  BinSearch(const Circuit& c, int max_width) : circuit_(c), width_(max_width), label_(c.n_qubits(), -1) {
    for (std::size_t g = 0; g < c.size(); ++g)
      if (c.gates()[g].arity() > 1) gates_.push_back(g);
  }

  std::optional<std::vector<CutPoint>> run() {
    for (std::size_t budget = 1; budget <= kMaxCuts; ++budget)
      if (dfs(0, static_cast<int>(budget))) {
        std::sort(cuts_.begin(), cuts_.end());
        return cuts_;
      } else if (nodes_ > kNodeBudget) {
        return std::nullopt;
      }
    return std::nullopt;
  }

 private:
  static constexpr long kNodeBudget = 4'000'000;

  bool dfs(std::size_t i, int budget) {
    if (i == gates_.size()) return true;
    if (++nodes_ > kNodeBudget) return false;
    const std::size_t g = gates_[i];
    const auto wires = circuit_.gates()[g].wires();
    const int n_labels = static_cast<int>(bins_.size());
    // options ordered by cost, then label
    std::vector<std::pair<int, int>> options;
    for (int l = 0; l <= n_labels; ++l) {
      int cost = 0, fresh = 0;
      for (Wire w : wires) {
        if (label_[w] == l) continue;
        (label_[w] < 0 ? fresh : cost) += 1;
      }
      const int used = l < n_labels ? bins_[l] : 0;
      if (cost > budget || used + cost + fresh > width_) continue;
      options.emplace_back(cost, l);
    }
    std::sort(options.begin(), options.end());
    for (const auto& [cost, l] : options) {
      if (l == n_labels) bins_.push_back(0);
      std::vector<std::pair<Wire, int>> saved;
      for (Wire w : wires) {
        if (label_[w] == l) continue;
        saved.emplace_back(w, label_[w]);
        if (label_[w] >= 0) cuts_.push_back({w, g});
        label_[w] = l;
        ++bins_[l];
      }
      if (dfs(i + 1, budget - cost)) return true;
      for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
        if (it->second >= 0) cuts_.pop_back();
        label_[it->first] = it->second;
        --bins_[l];
      }
      if (l == n_labels) bins_.pop_back();
      if (nodes_ > kNodeBudget) return false;
    }
    return false;
  }

  const Circuit& circuit_;
  int width_;
  std::vector<std::size_t> gates_;
  std::vector<int> label_;
  std::vector<int> bins_;
  std::vector<CutPoint> cuts_;
  long nodes_ = 0;
};

/// Scans gates in order, merging the fragments a gate touches; when the merge
/// would be too wide, cuts the fewest touched wires that make it fit.
std::vector<CutPoint> greedy_cuts(const Circuit& circuit, int max_width) {
  const int n = circuit.n_qubits();
  std::vector<int> node(n), width;
  std::vector<bool> used(n, false);
  std::vector<int> parent;
  auto make = [&] {
    parent.push_back(static_cast<int>(parent.size()));
    width.push_back(1);
    return static_cast<int>(parent.size()) - 1;
  };
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int w = 0; w < n; ++w) node[w] = make();

  std::vector<CutPoint> cuts;
  for (std::size_t g = 0; g < circuit.size(); ++g) {
    const auto wires = circuit.gates()[g].wires();
    const std::size_t a = wires.size();
    // merged width if the wires in `mask` are cut first
    auto merged = [&](unsigned mask) {
      std::vector<int> roots;
      int total = 0;
      for (std::size_t i = 0; i < a; ++i) {
        if (mask >> i & 1u) {
          ++total;
          continue;
        }
        const int r = find(node[wires[i]]);
        if (std::find(roots.begin(), roots.end(), r) == roots.end()) {
          roots.push_back(r);
          total += width[r];
        }
      }
      return total;
    };
    unsigned chosen = 0;
    if (merged(0) > max_width) {
      int best_count = 1 << 30, best_width = 1 << 30;
      for (unsigned mask = 1; mask < (1u << a); ++mask) {
        bool ok = true;
        for (std::size_t i = 0; i < a; ++i) ok = ok && (!(mask >> i & 1u) || used[wires[i]]);
        if (!ok) continue;
        const int cnt = std::popcount(mask), wd = merged(mask);
        if (wd > max_width) continue;
        if (cnt < best_count || (cnt == best_count && wd < best_width)) {
          best_count = cnt;
          best_width = wd;
          chosen = mask;
        }
      }
      if (chosen == 0) throw PlanningError("no wire cut fits gate " + std::to_string(g) + " into the width limit");
    }
    for (std::size_t i = 0; i < a; ++i) {
      if (chosen >> i & 1u) {
        cuts.push_back({wires[i], g});
        node[wires[i]] = make();
      }
    }
    const int r0 = find(node[wires[0]]);
    for (std::size_t i = 1; i < a; ++i) {
      const int r = find(node[wires[i]]);
      if (r != r0) {
        parent[r] = r0;
        width[r0] += width[r];
      }
    }
    for (Wire w : wires) used[w] = true;
  }
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

std::size_t checked_term_count(const CutPlan& plan) {
  if (plan.cuts.size() > kMaxCuts)
    throw ResourceError(std::to_string(plan.cuts.size()) + " cuts exceed the limit of " + std::to_string(kMaxCuts));
  return plan.term_count();
}

}  // namespace

const std::vector<CutChoice>& cut_choices() {
  static const std::vector<CutChoice> table{
      {Basis::Z, false, PrepState::Zero, 0.5},  {Basis::Z, false, PrepState::One, 0.5},
      {Basis::Z, true, PrepState::Zero, 0.5},   {Basis::Z, true, PrepState::One, -0.5},
      {Basis::X, true, PrepState::Plus, 0.5},   {Basis::X, true, PrepState::Minus, -0.5},
      {Basis::Y, true, PrepState::PlusI, 0.5},  {Basis::Y, true, PrepState::MinusI, -0.5},
  };
  return table;
}

std::size_t CutPlan::term_count() const { return std::size_t{1} << (3 * cuts.size()); }

double CutPlan::one_norm() const { return std::ldexp(1.0, 2 * static_cast<int>(cuts.size())); }

int CutPlan::max_fragment_width() const {
  int w = 0;
  for (const auto& f : fragments) w = std::max(w, f.width());
  return w;
}

CutPlan make_plan(const Circuit& circuit, std::vector<CutPoint> cuts, int max_width) {
  validate_cuts(circuit, cuts);
  const int n = circuit.n_qubits();
  const auto by = cuts_by_wire(n, cuts);
  const auto off = segment_offsets(by);
  const int n_seg = off.back();

  UnionFind uf(n_seg);
  for (std::size_t g = 0; g < circuit.size(); ++g) {
    const auto wires = circuit.gates()[g].wires();
    for (std::size_t i = 1; i < wires.size(); ++i)
      uf.unite(off[wires[0]] + segment_of(by[wires[0]], g), off[wires[i]] + segment_of(by[wires[i]], g));
  }

  // fragments ordered by their first gate; gate-less wires go last
  std::vector<std::size_t> first(n_seg, circuit.size());
  for (std::size_t g = circuit.size(); g-- > 0;) {
    const Wire w = circuit.gates()[g].wires()[0];
    const int r = uf.find(off[w] + segment_of(by[w], g));
    first[r] = g;
  }
  std::vector<int> roots;
  for (int s = 0; s < n_seg; ++s)
    if (uf.find(s) == s) roots.push_back(s);
  std::stable_sort(roots.begin(), roots.end(), [&](int a, int b) { return first[a] < first[b]; });

  CutPlan plan;
  plan.circuit = circuit;
  plan.cuts = cuts;
  plan.max_width = max_width;
  plan.fragments.resize(roots.size());
  std::vector<int> frag_of_root(n_seg, -1), seg_frag(n_seg), seg_local(n_seg);
  for (std::size_t f = 0; f < roots.size(); ++f) frag_of_root[roots[f]] = static_cast<int>(f);
  for (Wire w = 0; w < n; ++w) {
    for (int s = 0; s <= static_cast<int>(by[w].size()); ++s) {
      const int id = off[w] + s;
      const int f = frag_of_root[uf.find(id)];
      auto& frag = plan.fragments[f];
      seg_frag[id] = f;
      seg_local[id] = frag.width();
      frag.wires.push_back(w);
      frag.segments.push_back(s);
    }
    const int last = off[w] + static_cast<int>(by[w].size());
    plan.fragments[seg_frag[last]].outputs.emplace_back(w, seg_local[last]);
  }
  for (std::size_t g = 0; g < circuit.size(); ++g) {
    const Wire w = circuit.gates()[g].wires()[0];
    plan.fragments[seg_frag[off[w] + segment_of(by[w], g)]].gate_ids.push_back(g);
  }
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    const Wire w = cuts[c].wire;
    const int k = static_cast<int>(std::lower_bound(by[w].begin(), by[w].end(), cuts[c].position) - by[w].begin());
    const int up = off[w] + k, down = up + 1;
    plan.fragments[seg_frag[up]].outgoing.emplace_back(c, seg_local[up]);
    plan.fragments[seg_frag[down]].incoming.emplace_back(c, seg_local[down]);
  }
  return plan;
}

CutPlan plan_cuts(const Circuit& circuit, int max_width, const std::optional<std::vector<CutPoint>>& manual) {
  if (max_width < 1) throw PlanningError("max_width must be positive");
  for (const Gate& g : circuit.gates())
    if (static_cast<int>(g.arity()) > max_width)
      throw PlanningError(std::string(to_string(g.kind)) + " gate is wider than max_width " + std::to_string(max_width));

  if (manual) {
    CutPlan plan = make_plan(circuit, *manual, max_width);
    if (plan.max_fragment_width() > max_width)
      throw PlanningError("manual cuts leave a fragment of width " + std::to_string(plan.max_fragment_width()) +
                          " > " + std::to_string(max_width));
    return plan;
  }
  if (widest_fragment(circuit, {}) <= max_width) return make_plan(circuit, {}, max_width);
  auto cuts = BinSearch(circuit, max_width).run();
  if (!cuts) cuts = greedy_cuts(circuit, max_width);
  CutPlan plan = make_plan(circuit, *cuts, max_width);
  if (plan.max_fragment_width() > max_width) throw PlanningError("cut search did not reach the width limit");
  return plan;
}

CutTerm term_at(const CutPlan& plan, std::size_t index) {
  if (index >= checked_term_count(plan)) throw DomainError("term index out of range");
  CutTerm t;
  t.index = index;
  for (std::size_t c = 0; c < plan.cuts.size(); ++c) {
    const CutChoice& ch = cut_choices()[(index >> (3 * c)) & 7u];
    t.choices.push_back(ch);
    t.coefficient *= ch.coefficient;
  }
  return t;
}

std::vector<CutTerm> enumerate_terms(const CutPlan& plan) {
  const std::size_t n = checked_term_count(plan);
  std::vector<CutTerm> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(term_at(plan, i));
  return out;
}

Circuit instantiate_fragment(const CutPlan& plan, const CutTerm& term, std::size_t fragment_id) {
  if (fragment_id >= plan.fragments.size()) throw DomainError("fragment id out of range");
  if (term.choices.size() != plan.cuts.size()) throw ShapeError("term does not match the plan's cuts");
  const Fragment& frag = plan.fragments[fragment_id];
  const auto by = cuts_by_wire(plan.circuit.n_qubits(), plan.cuts);
  std::map<std::pair<Wire, int>, Wire> local;
  for (int i = 0; i < frag.width(); ++i) local[{frag.wires[i], frag.segments[i]}] = i;

  Circuit out(frag.width());
  constexpr double half_pi = std::numbers::pi / 2;
  for (const auto& [cut, l] : frag.incoming) {
    switch (term.choices[cut].prep) {
      case PrepState::Zero: break;
      case PrepState::One: out.add(Gate::x(l)); break;
      case PrepState::Plus: out.add(Gate::h(l)); break;
      case PrepState::Minus: out.add(Gate::x(l)).add(Gate::h(l)); break;
      case PrepState::PlusI: out.add(Gate::h(l)).add(Gate::phase(l, half_pi)); break;
      case PrepState::MinusI: out.add(Gate::h(l)).add(Gate::phase(l, -half_pi)); break;
    }
  }
  for (std::size_t g : frag.gate_ids) {
    Gate gate = plan.circuit.gates()[g];
    for (Wire& w : gate.controls) w = local.at({w, segment_of(by[w], g)});
    for (Wire& w : gate.targets) w = local.at({w, segment_of(by[w], g)});
    out.add(std::move(gate));
  }
  for (const auto& [cut, l] : frag.outgoing) {
    switch (term.choices[cut].basis) {
      case Basis::Z: break;
      case Basis::X: out.add(Gate::h(l)); break;
      case Basis::Y: out.add(Gate::phase(l, -half_pi)).add(Gate::h(l)); break;
    }
  }
  return out;
}

std::string experiment_key(const CutPlan& plan, const CutTerm& term, std::size_t fragment_id) {
  const Fragment& frag = plan.fragments.at(fragment_id);
  std::string key;
  for (const auto& [cut, l] : frag.incoming)
    key += "p" + std::to_string(cut) + "=" + std::to_string(static_cast<int>(term.choices[cut].prep)) + ";";
  for (const auto& [cut, l] : frag.outgoing)
    key += "m" + std::to_string(cut) + "=" + std::to_string(static_cast<int>(term.choices[cut].basis)) + ";";
  return key;
}

double fragment_expectation(const CutPlan& plan, const CutTerm& term, std::size_t fragment_id,
                            const std::vector<double>& distribution, const std::map<Wire, WireFactor>& observable) {
  const Fragment& frag = plan.fragments.at(fragment_id);
  if (distribution.size() != (std::size_t{1} << frag.width())) throw ShapeError("fragment distribution has wrong size");
  std::vector<std::pair<int, const WireFactor*>> factors;
  for (const auto& [w, l] : frag.outputs) {
    const auto it = observable.find(w);
    if (it != observable.end()) factors.emplace_back(l, &it->second);
  }
  std::uint64_t sign_mask = 0;
  for (const auto& [cut, l] : frag.outgoing)
    if (term.choices[cut].weighted) sign_mask |= std::uint64_t{1} << l;

  double sum = 0.0;
  for (std::size_t x = 0; x < distribution.size(); ++x) {
    if (distribution[x] == 0.0) continue;
    double v = std::popcount(x & sign_mask) & 1 ? -distribution[x] : distribution[x];
    for (const auto& [l, f] : factors) v *= (*f)[(x >> l) & 1u];
    sum += v;
  }
  return sum;
}

KnitResult knit_expectation(const CutPlan& plan, const FragmentExpectation& expectations) {
  KnitResult r;
  r.term_count = checked_term_count(plan);
  r.one_norm = plan.one_norm();
  for (std::size_t t = 0; t < r.term_count; ++t) {
    double prod = term_at(plan, t).coefficient;
    for (std::size_t f = 0; f < plan.fragments.size(); ++f) {
      const auto e = expectations(t, f);
      if (!e) throw AggregationError("missing expectation for term " + std::to_string(t) + ", fragment " + std::to_string(f));
      prod *= *e;
    }
    r.value += prod;
  }
  return r;
}

KnitResult knit_z_distribution(const CutPlan& plan, const FragmentDistribution& distributions,
                               const std::vector<Wire>& keep_in) {
  const int n = plan.circuit.n_qubits();
  std::vector<Wire> keep = keep_in;
  if (keep.empty()) {
    keep.resize(n);
    std::iota(keep.begin(), keep.end(), 0);
  }
  std::vector<int> bit_of(n, -1);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] < 0 || keep[i] >= n || bit_of[keep[i]] >= 0) throw ShapeError("bad wire list for knitting");
    bit_of[keep[i]] = static_cast<int>(i);
  }
  const std::size_t K = keep.size();
  if (K > 30) throw ResourceError("too many kept wires to knit");
  const std::size_t dim = std::size_t{1} << K;
  const std::size_t F = plan.fragments.size();

  // per fragment: (local wire, result bit) of kept outputs, and the index
  // into the fragment's marginal for each result outcome
  std::vector<std::vector<std::pair<int, int>>> kept(F);
  std::vector<std::vector<std::uint32_t>> gather(F, std::vector<std::uint32_t>(dim, 0));
  for (std::size_t f = 0; f < F; ++f) {
    for (const auto& [w, l] : plan.fragments[f].outputs)
      if (bit_of[w] >= 0) kept[f].emplace_back(l, bit_of[w]);
    for (std::size_t z = 0; z < dim; ++z)
      for (std::size_t j = 0; j < kept[f].size(); ++j) gather[f][z] |= static_cast<std::uint32_t>((z >> kept[f][j].second) & 1u) << j;
  }

  KnitResult r;
  r.term_count = checked_term_count(plan);
  r.one_norm = plan.one_norm();
  r.distribution.assign(dim, 0.0);
  std::vector<std::vector<double>> q(F);
  for (std::size_t t = 0; t < r.term_count; ++t) {
    const CutTerm term = term_at(plan, t);
    for (std::size_t f = 0; f < F; ++f) {
      const Fragment& frag = plan.fragments[f];
      const std::vector<double>* p = distributions(t, f);
      if (!p) throw AggregationError("missing distribution for term " + std::to_string(t) + ", fragment " + std::to_string(f));
      if (p->size() != (std::size_t{1} << frag.width())) throw ShapeError("fragment distribution has wrong size");
      std::uint64_t sign_mask = 0;
      for (const auto& [cut, l] : frag.outgoing)
        if (term.choices[cut].weighted) sign_mask |= std::uint64_t{1} << l;
      q[f].assign(std::size_t{1} << kept[f].size(), 0.0);
      for (std::size_t x = 0; x < p->size(); ++x) {
        const double v = (*p)[x];
        if (v == 0.0) continue;
        std::size_t y = 0;
        for (std::size_t j = 0; j < kept[f].size(); ++j) y |= ((x >> kept[f][j].first) & 1u) << j;
        q[f][y] += std::popcount(x & sign_mask) & 1 ? -v : v;
      }
    }
    for (std::size_t z = 0; z < dim; ++z) {
      double prod = term.coefficient;
      for (std::size_t f = 0; f < F && prod != 0.0; ++f) prod *= q[f][gather[f][z]];
      r.distribution[z] += prod;
    }
  }

  r.clamped = r.distribution;
  double total = 0.0;
  for (double& v : r.clamped) total += v = std::max(v, 0.0);
  if (!(total > 0.0)) throw NumericalError("knitted distribution has no positive mass");
  for (double& v : r.clamped) v /= total;
  return r;
}

ExactFragmentRunner::ExactFragmentRunner(const CutPlan& plan) : plan_(plan) {}

const std::vector<double>* ExactFragmentRunner::operator()(std::size_t term_index, std::size_t fragment_id) {
  const CutTerm term = term_at(plan_, term_index);
  auto key = std::make_pair(fragment_id, experiment_key(plan_, term, fragment_id));
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    const Circuit c = instantiate_fragment(plan_, term, fragment_id);
    it = cache_.emplace(std::move(key), z_probabilities(run_circuit(prepare_basis_state(c.n_qubits(), 0), c))).first;
  }
  return &it->second;
}

std::string write_cut_manifest(const std::vector<CutPoint>& cuts) {
  std::string out;
  for (const auto& c : cuts) out += "CUT " + std::to_string(c.wire) + " " + std::to_string(c.position) + "\n";
  return out;
}

std::vector<CutPoint> parse_cut_manifest(const std::string& text) {
  std::vector<CutPoint> cuts;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    long long w = -1, p = -1;
    std::string extra;
    if (tag != "CUT" || !(ls >> w >> p) || (ls >> extra) || w < 0 || p < 0)
      throw ParseError("cut manifest line " + std::to_string(line_no) + ": expected `CUT wire position`");
    cuts.push_back({static_cast<Wire>(w), static_cast<std::size_t>(p)});
  }
  return cuts;
}

}  // namespace qhed
