#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "qhed/builders.hpp"
#include "qhed/cutting.hpp"
#include "qhed/error.hpp"
#include "qhed/rng.hpp"
#include "qhed/state.hpp"
#include "qhed/transpile.hpp"

using namespace qhed;

namespace {

std::vector<double> uncut_probabilities(const Circuit& c) {
  return z_probabilities(run_circuit(prepare_basis_state(c.n_qubits(), 0), c));
}

/// Density matrix of a prepared stub state, written out by hand.
ComplexMatrix prep_matrix(PrepState s) {
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<cplx> v;
  switch (s) {
    case PrepState::Zero: v = {1.0, 0.0}; break;
    case PrepState::One: v = {0.0, 1.0}; break;
    case PrepState::Plus: v = {r, r}; break;
    case PrepState::Minus: v = {r, -r}; break;
    case PrepState::PlusI: v = {r, cplx(0, r)}; break;
    case PrepState::MinusI: v = {r, cplx(0, -r)}; break;
  }
  ComplexMatrix m(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) m(a, b) = v[a] * std::conj(v[b]);
  return m;
}

/// Projectors onto the +1 / -1 eigenvectors of the measured Pauli.
ComplexMatrix basis_projector(Basis b, int outcome) {
  const PrepState s = b == Basis::Z ? (outcome ? PrepState::One : PrepState::Zero)
                      : b == Basis::X ? (outcome ? PrepState::Minus : PrepState::Plus)
                                      : (outcome ? PrepState::MinusI : PrepState::PlusI);
  return prep_matrix(s);
}

Circuit ghz3() {
  Circuit c(3);
  c.add(Gate::h(0)).add(Gate::cx(0, 1)).add(Gate::cx(1, 2));
  return c;
}

Circuit bell() {
  Circuit c(2);
  c.add(Gate::h(0)).add(Gate::cx(0, 1));
  return c;
}

/// Knits the expectation of a product observable with exact fragments.
double knit_exact(const CutPlan& plan, const std::map<Wire, WireFactor>& obs) {
  ExactFragmentRunner run(plan);
  return knit_expectation(plan, [&](std::size_t t, std::size_t f) -> std::optional<double> {
           return fragment_expectation(plan, term_at(plan, t), f, *run(t, f), obs);
         })
      .value;
}

}  // namespace

TEST(CutChoices, ReproduceIdentityChannel) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    const ComplexMatrix rho = oracle::random_density(2, 2, rng);
    ComplexMatrix sum(2, 2);
    for (const CutChoice& ch : cut_choices()) {
      double e = 0.0;
      for (int m = 0; m < 2; ++m) {
        const ComplexMatrix proj = basis_projector(ch.basis, m);
        double p = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) p += (proj(a, b) * rho(b, a)).real();
        e += (ch.weighted && m ? -1.0 : 1.0) * p;
      }
      const ComplexMatrix out = prep_matrix(ch.prep);
      for (std::size_t i = 0; i < 4; ++i) sum.data()[i] += ch.coefficient * e * out.data()[i];
    }
    EXPECT_LT(max_abs_diff(sum, rho), 1e-14);
  }
}

TEST(Terms, CountsAndOneNorm) {
  const Circuit c = ghz3();
  const auto none = make_plan(c, {}, 5);
  const auto t0 = enumerate_terms(none);
  ASSERT_EQ(t0.size(), 1u);
  EXPECT_EQ(t0[0].coefficient, 1.0);
  const auto one = make_plan(c, {{1, 2}}, 5);
  const auto two = make_plan(c, {{0, 1}, {1, 2}}, 5);
  for (const auto* plan : {&one, &two}) {
    double norm = 0.0;
    const auto terms = enumerate_terms(*plan);
    for (const auto& t : terms) norm += std::abs(t.coefficient);
    EXPECT_EQ(terms.size(), plan->term_count());
    EXPECT_EQ(norm, plan->one_norm());
    EXPECT_EQ(norm, std::pow(4.0, static_cast<double>(plan->cuts.size())));
  }
  EXPECT_EQ(enumerate_terms(two).size(), 64u);
}

TEST(Terms, TooManyCutsIsResourceError) {
  Circuit line(1);
  for (int i = 0; i < 8; ++i) line.add(Gate::h(0));
  std::vector<CutPoint> cuts;
  for (std::size_t p = 1; p <= 7; ++p) cuts.push_back({0, p});
  const auto plan = make_plan(line, cuts, 1);
  EXPECT_THROW(enumerate_terms(plan), ResourceError);
  EXPECT_THROW(knit_z_distribution(plan, [](std::size_t, std::size_t) { return nullptr; }), ResourceError);
}

TEST(Plan, NarrowCircuitNeedsNoCuts) {
  const Circuit c = ghz3();
  const auto plan = plan_cuts(c, 5);
  EXPECT_TRUE(plan.cuts.empty());
  ASSERT_EQ(plan.fragments.size(), 1u);
  EXPECT_EQ(instantiate_fragment(plan, term_at(plan, 0), 0), c);
}

TEST(Plan, ManualValidation) {
  const Circuit c = ghz3();
  EXPECT_THROW(plan_cuts(c, 5, std::vector<CutPoint>{{0, 0}}), PlanningError);   // nothing before
  EXPECT_THROW(plan_cuts(c, 5, std::vector<CutPoint>{{2, 3}}), PlanningError);   // nothing after
  EXPECT_THROW(plan_cuts(c, 5, std::vector<CutPoint>{{7, 1}}), PlanningError);   // no such wire
  EXPECT_THROW(plan_cuts(c, 5, std::vector<CutPoint>{{1, 2}, {1, 2}}), PlanningError);
  EXPECT_THROW(plan_cuts(c, 2, std::vector<CutPoint>{{0, 1}}), PlanningError);   // still 3 wide
  const auto ok = plan_cuts(c, 2, std::vector<CutPoint>{{1, 2}});
  EXPECT_EQ(ok.max_fragment_width(), 2);
  Circuit wide(3);
  wide.add(Gate::toffoli(0, 1, 2));
  EXPECT_THROW(plan_cuts(wide, 2), PlanningError);
}

TEST(Plan, FragmentsPartitionSegments) {
  for (int n = 3; n <= 5; ++n) {
    const Circuit t = transpile(build_qhed(n, DecrementVariant::Ancilla).circuit);
    const auto plan = plan_cuts(t, 5);
    EXPECT_GE(plan.cuts.size(), 1u);
    EXPECT_LE(plan.cuts.size(), kMaxCuts);
    EXPECT_LE(plan.max_fragment_width(), 5);
    int segs = 0;
    std::size_t gates = 0, stubs_in = 0, stubs_out = 0;
    std::set<std::pair<Wire, int>> seen;
    for (const auto& f : plan.fragments) {
      segs += f.width();
      gates += f.gate_ids.size();
      stubs_in += f.incoming.size();
      stubs_out += f.outgoing.size();
      for (int i = 0; i < f.width(); ++i) EXPECT_TRUE(seen.insert({f.wires[i], f.segments[i]}).second);
    }
    EXPECT_EQ(segs, t.n_qubits() + static_cast<int>(plan.cuts.size()));
    EXPECT_EQ(gates, t.size());
    EXPECT_EQ(stubs_in, plan.cuts.size());
    EXPECT_EQ(stubs_out, plan.cuts.size());
  }
}

TEST(Plan, AutomaticPlansAreDeterministic) {
  const Circuit t = transpile(build_qhed(4, DecrementVariant::Ancilla).circuit);
  EXPECT_EQ(plan_cuts(t, 5).cuts, plan_cuts(t, 5).cuts);
}

TEST(Knit, GhzDistribution) {
  const Circuit c = ghz3();
  const auto plan = plan_cuts(c, 2, std::vector<CutPoint>{{1, 2}});
  ExactFragmentRunner run(plan);
  const auto r = knit_z_distribution(plan, std::ref(run));
  ASSERT_EQ(r.distribution.size(), 8u);
  for (std::size_t x = 0; x < 8; ++x) EXPECT_NEAR(r.distribution[x], (x == 0 || x == 7) ? 0.5 : 0.0, 1e-9) << x;
  EXPECT_EQ(r.term_count, 8u);
  EXPECT_EQ(r.one_norm, 4.0);
}

TEST(Knit, BellZZExact) {
  const auto plan = plan_cuts(bell(), 2, std::vector<CutPoint>{{0, 1}});
  EXPECT_EQ(plan.fragments.size(), 2u);
  EXPECT_NEAR(knit_exact(plan, {{0, {1.0, -1.0}}, {1, {1.0, -1.0}}}), 1.0, 1e-9);
}

TEST(Knit, UncutPlanIsFragmentValue) {
  const Circuit c = ghz3();
  const auto plan = make_plan(c, {}, 5);
  const auto p = uncut_probabilities(c);
  ExactFragmentRunner run(plan);
  EXPECT_EQ(knit_z_distribution(plan, std::ref(run)).distribution, p);
  EXPECT_NEAR(knit_exact(plan, {{0, {1.0, -1.0}}}), p[0] + p[2] + p[4] + p[6] - p[1] - p[3] - p[5] - p[7], 1e-15);
}

TEST(Knit, QhedOddProjector) {
  const Circuit t = transpile(build_qhed(3, DecrementVariant::Ancilla).circuit);
  const auto plan = plan_cuts(t, 5);
  ASSERT_GE(plan.cuts.size(), 1u);
  const auto p = uncut_probabilities(t);
  double odd = 0.0;
  for (std::size_t x = 1; x < p.size(); x += 2) odd += p[x];
  EXPECT_NEAR(knit_exact(plan, {{0, {0.0, 1.0}}}), odd, 1e-9);
}

TEST(Knit, RandomCircuitsMatchUncut) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 2 + rep % 5;
    const Circuit c = oracle::random_circuit(n, 6 * n, rng);
    const auto cuts = oracle::random_cuts(c, 1 + rep % 2, rng);
    const auto plan = make_plan(c, cuts, n);
    const auto p = uncut_probabilities(c);

    std::map<Wire, WireFactor> obs;
    for (Wire w = 0; w < n; ++w) obs[w] = {u(rng), u(rng)};
    double expect = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) {
      double v = p[x];
      for (const auto& [w, f] : obs) v *= f[(x >> w) & 1u];
      expect += v;
    }
    EXPECT_NEAR(knit_exact(plan, obs), expect, 1e-9) << rep;

    ExactFragmentRunner run(plan);
    const auto r = knit_z_distribution(plan, std::ref(run));
    double worst = 0.0, total = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) {
      worst = std::max(worst, std::abs(r.distribution[x] - p[x]));
      total += r.distribution[x];
    }
    EXPECT_LT(worst, 1e-9) << rep;
    EXPECT_NEAR(total, 1.0, 1e-9);

    // marginal over a subset of wires
    const std::vector<Wire> keep{n - 1, 0};
    const auto m = knit_z_distribution(plan, std::ref(run), keep).distribution;
    const auto want = marginalize(p, n, keep);
    for (std::size_t x = 0; x < want.size(); ++x) EXPECT_NEAR(m[x], want[x], 1e-9);
  }
}

TEST(Knit, BellSamplingWithinFourSigma) {
  const auto plan = plan_cuts(bell(), 2, std::vector<CutPoint>{{0, 1}});
  const std::uint64_t shots = 4096;
  const double sigma = plan.one_norm() / std::sqrt(static_cast<double>(shots * plan.term_count() * plan.fragments.size()));
  ExactFragmentRunner exact(plan);
  int excursions = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto r = knit_expectation(plan, [&](std::size_t t, std::size_t f) -> std::optional<double> {
      const auto counts = sample_counts(*exact(t, f), shots, derive_seed(seed, t, f));
      const auto dist = counts_to_distribution(counts, exact(t, f)->size());
      return fragment_expectation(plan, term_at(plan, t), f, dist, {{0, {1.0, -1.0}}, {1, {1.0, -1.0}}});
    });
    excursions += std::abs(r.value - 1.0) > 4 * sigma;
  }
  EXPECT_LE(excursions, 1);
}

TEST(Knit, MissingInputsAreAggregationErrors) {
  const auto plan = plan_cuts(bell(), 2, std::vector<CutPoint>{{0, 1}});
  EXPECT_THROW(knit_expectation(plan, [](std::size_t t, std::size_t) -> std::optional<double> {
                 if (t == 5) return std::nullopt;
                 return 1.0;
               }),
               AggregationError);
  EXPECT_THROW(knit_z_distribution(plan, [](std::size_t, std::size_t) { return nullptr; }), AggregationError);
}

TEST(Knit, ExperimentsAreShared) {
  const auto plan = plan_cuts(ghz3(), 2, std::vector<CutPoint>{{1, 2}});
  std::set<std::pair<std::size_t, std::string>> keys;
  for (const auto& t : enumerate_terms(plan))
    for (std::size_t f = 0; f < plan.fragments.size(); ++f) keys.insert({f, experiment_key(plan, t, f)});
  // upstream: 3 bases, downstream: 6 preparations
  EXPECT_EQ(keys.size(), 9u);
}

TEST(Manifest, RoundTripAndErrors) {
  const std::vector<CutPoint> cuts{{1, 4}, {3, 9}};
  EXPECT_EQ(parse_cut_manifest(write_cut_manifest(cuts)), cuts);
  EXPECT_EQ(parse_cut_manifest("# comment\n\nCUT 2 5  # trailing\n"), (std::vector<CutPoint>{{2, 5}}));
  EXPECT_THROW(parse_cut_manifest("CUT 1\n"), ParseError);
  EXPECT_THROW(parse_cut_manifest("SPLIT 1 2\n"), ParseError);
  EXPECT_THROW(parse_cut_manifest("CUT -1 2\n"), ParseError);
  EXPECT_THROW(parse_cut_manifest("CUT 1 2 3\n"), ParseError);
}
