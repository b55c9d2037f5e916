#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qhed/builders.hpp"
#include "qhed/error.hpp"
#include "qhed/imaging.hpp"
#include "qhed/state.hpp"

using namespace qhed;

namespace {

ImageVolume row(const std::vector<double>& v) { return make_volume(static_cast<int>(v.size()), 1, 1, v); }

/// QHED statevector run on one window; returns the raw output amplitudes.
std::vector<cplx> qhed_amplitudes(const std::vector<double>& unit) {
  const int n = std::countr_zero(unit.size());
  std::vector<cplx> in(2 * unit.size());
  for (std::size_t k = 0; k < unit.size(); ++k) in[2 * k] = unit[k];
  return run_circuit(Statevector(n + 1, in), build_qhed(n, DecrementVariant::Mcx).circuit).amplitudes();
}

std::vector<std::vector<double>> run_windows(const SubdomainPlan& plan, bool sampled_form) {
  std::vector<std::vector<double>> edges;
  for (std::size_t id = 0; id < plan.windows.size(); ++id) {
    const auto amps = qhed_amplitudes(encode_window(plan, id));
    if (sampled_form) {
      std::vector<double> p(amps.size());
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(amps[i]);
      edges.push_back(window_edges_from_probabilities(p, plan.windows[id].norm));
    } else {
      edges.push_back(window_edges_from_amplitudes(amps, plan.windows[id].norm));
    }
  }
  return edges;
}

std::vector<double> random_line(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 255.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Pgm, ParsePlainAndBinary) {
  const auto a = parse_pgm("P2\n# c\n2 2\n255\n0 255\n255 0\n");
  EXPECT_EQ(a.width, 2);
  EXPECT_EQ(a.values, (std::vector<double>{0, 255, 255, 0}));
  const std::string p5 = std::string("P5 3 1 255\n") + '\x00' + '\x80' + '\xff';
  EXPECT_EQ(parse_pgm(p5).values, (std::vector<double>{0, 128, 255}));
  const std::string p16 = std::string("P5 1 1 1000\n") + '\x03' + '\xe8';
  EXPECT_EQ(parse_pgm(p16).values, (std::vector<double>{1000}));
  const auto round = parse_pgm(encode_pgm(make_volume(2, 1, 1, {0.0, 1.0})));
  EXPECT_EQ(round.values, (std::vector<double>{0, 255}));
}

TEST(Pgm, Errors) {
  EXPECT_THROW(parse_pgm("P6 1 1 255\n"), ParseError);
  EXPECT_THROW(parse_pgm("P2 2 2 255\n0 1 2\n"), ParseError);
  EXPECT_THROW(parse_pgm("P2 1 1 10\n11\n"), ParseError);
  EXPECT_THROW(parse_pgm(std::string("P5 4 1 255\n") + "ab"), ParseError);
  try {
    parse_pgm("P2 2 x 255");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("byte 5"), std::string::npos) << e.what();
  }
}

TEST(RawVol, RoundTripAndTruncation) {
  std::vector<double> v(32);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.25 * static_cast<double>(i);
  const auto vol = make_volume(4, 4, 2, v);
  const std::string bytes = encode_rawvol(vol);
  EXPECT_EQ(bytes.size(), 16u + 32 * 8);
  EXPECT_EQ(bytes.substr(0, 4), "QVOL");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 4);  // little-endian width
  EXPECT_EQ(parse_rawvol(bytes), vol);
  EXPECT_THROW(parse_rawvol(bytes.substr(0, bytes.size() - 1)), ParseError);
  EXPECT_THROW(parse_rawvol(bytes.substr(0, 10)), ParseError);
  EXPECT_THROW(parse_rawvol("XVOL" + bytes.substr(4)), ParseError);
}

TEST(Volume, ValidationAndLines) {
  EXPECT_THROW(make_volume(2, 2, 1, {1, 2, 3}), ShapeError);
  EXPECT_THROW(make_volume(1, 1, 1, {-1}), DomainError);
  std::vector<double> v(2 * 3 * 4);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  const auto vol = make_volume(2, 3, 4, v);
  EXPECT_EQ(line_count(vol, Axis::Row), 12u);
  EXPECT_EQ(line_count(vol, Axis::Column), 8u);
  EXPECT_EQ(line_count(vol, Axis::Depth), 6u);
  EXPECT_EQ(extract_line(vol, Axis::Row, 4), (std::vector<double>{8, 9}));        // y=1, z=1
  EXPECT_EQ(extract_line(vol, Axis::Column, 3), (std::vector<double>{7, 9, 11}));  // x=1, z=1
  EXPECT_EQ(extract_line(vol, Axis::Depth, 5), (std::vector<double>{5, 11, 17, 23}));
}

TEST(Decomposition, WindowOffsets) {
  EXPECT_EQ(window_offsets(6, 2), (std::vector<std::size_t>{0, 2, 4}));
  const auto big = window_offsets(1024, 5);
  EXPECT_EQ(big.size(), static_cast<std::size_t>(std::ceil((1026.0 - 32) / 30)) + 1);
  EXPECT_EQ(big.back(), 1026u - 32);
  for (std::size_t i = 1; i + 1 < big.size(); ++i) EXPECT_EQ(big[i] - big[i - 1], 30u);
  EXPECT_EQ(window_offsets(3, 4), (std::vector<std::size_t>{0}));
  EXPECT_THROW(window_offsets(1, 3), PlanningError);
  EXPECT_THROW(window_offsets(8, 1), DomainError);
}

TEST(Decomposition, EveryPairKeptOnce) {
  for (int n = 2; n <= 5; ++n) {
    for (int L = 2; L <= 140; L += 3) {
      const auto plan = plan_decomposition(row(std::vector<double>(L, 1.0)), Axis::Row, n);
      std::vector<int> hits(L - 1, 0);
      for (std::size_t slot = 0; slot < plan.offsets.size(); ++slot)
        for (const auto& [k, b] : plan.kept[slot]) {
          ++hits[b];
          EXPECT_LT(k, plan.window_size - 1);  // the wrap pair is never kept
          EXPECT_EQ(b, static_cast<int>(plan.offsets[slot]) + k - 1);
        }
      for (int h : hits) EXPECT_EQ(h, 1) << "L=" << L << " n=" << n;
      for (std::size_t i = 1; i < plan.offsets.size(); ++i)
        EXPECT_GE(plan.offsets[i - 1] + plan.window_size, plan.offsets[i] + 2);  // overlap >= 2 pixels
    }
  }
}

TEST(Decomposition, EncodeWindow) {
  const auto plan = plan_decomposition(row({0, 3, 4, 0, 0, 0}), Axis::Row, 2);
  ASSERT_EQ(plan.windows.size(), 3u);
  EXPECT_EQ(plan.windows[0].pixels, (std::vector<double>{0, 0, 3, 4}));
  EXPECT_DOUBLE_EQ(plan.windows[0].norm, 5.0);
  const auto e = encode_window(plan, 0);
  EXPECT_DOUBLE_EQ(e[2], 0.6);
  EXPECT_DOUBLE_EQ(e[3], 0.8);
  EXPECT_TRUE(plan.windows[2].flat);
  EXPECT_DOUBLE_EQ(encode_window(plan, 2)[1], 0.5);
  // matches the state preparation's normalization
  const auto sv = prepare_from_amplitudes(std::span<const double>(plan.windows[1].pixels));
  const auto e1 = encode_window(plan, 1);
  for (std::size_t i = 0; i < e1.size(); ++i) EXPECT_NEAR(sv[i].real(), e1[i], 1e-15);
}

TEST(WindowEdges, MatchClassicalDifferences) {
  std::mt19937_64 rng(11);
  for (int n = 2; n <= 5; ++n) {
    const auto raw = random_line(1 << n, rng);
    const auto unit = oracle::normalized(raw);
    double norm = 0.0;
    for (double x : raw) norm += x * x;
    norm = std::sqrt(norm);
    const auto amps = qhed_amplitudes(unit);
    const auto signed_e = window_edges_from_amplitudes(amps, norm);
    const auto diff = oracle::wrapped_differences(raw);
    std::vector<double> p(amps.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(amps[i]);
    const auto mag = window_edges_from_probabilities(p, norm);
    for (std::size_t k = 0; k < diff.size(); ++k) {
      EXPECT_NEAR(signed_e[k], diff[k], 1e-9);
      EXPECT_NEAR(mag[k], std::abs(diff[k]), 1e-9);
    }
  }
  const auto step = window_edges_from_amplitudes(qhed_amplitudes(oracle::normalized({1, 1, 0, 0})), std::sqrt(2.0));
  EXPECT_NEAR(step[0], 0.0, 1e-12);
  EXPECT_NEAR(step[1], 1.0, 1e-12);
  EXPECT_NEAR(step[2], 0.0, 1e-12);
  EXPECT_NEAR(step[3], -1.0, 1e-12);  // wrap
}

TEST(Reassemble, MatchesWholeLineDifferences) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 24; ++rep) {
    const int L = 8 + static_cast<int>(rng() % 121);
    const int n = 2 + rep % 4;
    const auto line = random_line(L, rng);
    const auto plan = plan_decomposition(row(line), Axis::Row, n);
    const auto diff = oracle::adjacent_differences(line);
    for (bool sampled : {false, true}) {
      const auto e = reassemble(plan, run_windows(plan, sampled));
      for (int b = 0; b + 1 < L; ++b) EXPECT_NEAR(e.values[b], std::abs(diff[b]), 1e-9) << L << " " << n;
      EXPECT_EQ(e.values[L - 1], 0.0);
    }
  }
}

TEST(Reassemble, ConstantAndStepLines) {
  for (int n = 2; n <= 4; ++n) {
    const auto plan = plan_decomposition(row(std::vector<double>(37, 9.0)), Axis::Row, n);
    for (double v : reassemble(plan, run_windows(plan, false)).values) EXPECT_NEAR(v, 0.0, 1e-12);
    const auto zero = plan_decomposition(row(std::vector<double>(20, 0.0)), Axis::Row, n);
    for (double v : reassemble(zero, run_windows(zero, true)).values) EXPECT_EQ(v, 0.0);
  }
  for (int j = 0; j < 29; ++j) {
    std::vector<double> line(30, 1.0);
    for (int i = j + 1; i < 30; ++i) line[i] = 5.0;
    const auto plan = plan_decomposition(row(line), Axis::Row, 3);
    const auto e = reassemble(plan, run_windows(plan, false));
    for (int b = 0; b < 30; ++b) EXPECT_NEAR(e.values[b], b == j ? 4.0 : 0.0, 1e-9) << j;
  }
}

TEST(Reassemble, KeptMagnitudeSumIndependentOfWindowSize) {
  std::mt19937_64 rng(13);
  const auto line = random_line(100, rng);
  double first = -1.0;
  for (int n = 2; n <= 5; ++n) {
    const auto plan = plan_decomposition(row(line), Axis::Row, n);
    double s = 0.0;
    for (double v : reassemble(plan, run_windows(plan, false)).values) s += v;
    if (first < 0) first = s;
    EXPECT_NEAR(s, first, 1e-9);
  }
}

TEST(Reassemble, MissingWindow) {
  const auto plan = plan_decomposition(row(std::vector<double>(10, 1.0)), Axis::Row, 2);
  auto edges = run_windows(plan, false);
  edges[1].clear();
  EXPECT_THROW(reassemble(plan, edges), AggregationError);
  edges.pop_back();
  EXPECT_THROW(reassemble(plan, edges), AggregationError);
}

TEST(Combine, StripesAndThreshold) {
  // vertical stripes: only the row axis sees edges
  ImageVolume img = make_volume(8, 8, 1, std::vector<double>(64, 0.0));
  for (int y = 0; y < 8; ++y)
    for (int x = 4; x < 8; ++x) img.at(x, y) = 10.0;
  std::vector<EdgeMap> maps;
  for (Axis a : {Axis::Row, Axis::Column}) {
    const auto plan = plan_decomposition(img, a, 2);
    maps.push_back(reassemble(plan, run_windows(plan, false)));
  }
  for (double v : maps[1].values) EXPECT_NEAR(v, 0.0, 1e-12);
  const auto combined = combine_axes(maps);
  const auto row_only = combine_axes({maps[0]});
  for (std::size_t i = 0; i < combined.size(); ++i) EXPECT_NEAR(combined.values[i], row_only.values[i], 1e-12);
  for (int y = 0; y < 8; ++y) EXPECT_NEAR(combined.at(3, y), 1.0, 1e-12);
  EXPECT_EQ(combine_axes({combined, combined}), combined);
  EXPECT_THROW(combine_axes({combined, make_volume(1, 1, 1, {0})}), ShapeError);

  const auto all = threshold(combined, 0.0);
  for (double v : all.values) EXPECT_EQ(v, 1.0);
  const auto top = threshold(combined, 1.0);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) EXPECT_EQ(top.at(x, y), combined.at(x, y) >= 1.0 ? 1.0 : 0.0);
  EXPECT_THROW(threshold(combined, 1.5), DomainError);
}

TEST(Combine, SquareOutline) {
  ImageVolume img = make_volume(16, 16, 1, std::vector<double>(256, 0.0));
  for (int y = 4; y < 12; ++y)
    for (int x = 4; x < 12; ++x) img.at(x, y) = 200.0;
  std::vector<EdgeMap> maps;
  for (Axis a : {Axis::Row, Axis::Column}) {
    const auto plan = plan_decomposition(img, a, 3);
    maps.push_back(reassemble(plan, run_windows(plan, true)));
  }
  const auto bin = threshold(combine_axes(maps), 0.5);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      const bool vertical = (x == 3 || x == 11) && y >= 4 && y < 12;
      const bool horizontal = (y == 3 || y == 11) && x >= 4 && x < 12;
      EXPECT_EQ(bin.at(x, y), vertical || horizontal ? 1.0 : 0.0) << x << "," << y;
    }
}
