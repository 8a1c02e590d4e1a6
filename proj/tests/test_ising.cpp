#include <gtest/gtest.h>

#include <cstdint>
#include <random>
#include <vector>

#include "dsb/ising.hpp"
#include "dsb/rng.hpp"
#include "oracles.hpp"

namespace dsb {
namespace {

TEST(Philox, KnownAnswerZeroKeyZeroCounter) {
  // Random123 kat_vectors: philox4x32 10 rounds, all-zero input.
  const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                     {0xa4093822, 0x299f31d0});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(CounterStream, StreamsDependOnlyOnTheirKey) {
  CounterStream a(42, 7, Purpose::initial_positions);
  CounterStream other(42, 8, Purpose::initial_positions);
  for (int k = 0; k < 10; ++k) other.next_u32();
  CounterStream b(42, 7, Purpose::initial_positions);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(a.next_u32(), b.next_u32());
  CounterStream c(42, 7, Purpose::time_step);
  CounterStream d(42, 7, Purpose::initial_positions);
  int same = 0;
  for (int k = 0; k < 100; ++k) same += c.next_u32() == d.next_u32();
  EXPECT_LT(same, 3);
}

TEST(CounterStream, BelowStaysInRangeAndUniformStaysInUnitInterval) {
  CounterStream s(1, 2, Purpose::bootstrap);
  std::vector<int> hist(7, 0);
  for (int k = 0; k < 70000; ++k) ++hist[s.below(7)];
  for (const int h : hist) EXPECT_NEAR(h, 10000, 400);
  for (int k = 0; k < 10000; ++k) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Energy, SingleAlignedPair) {
  const IsingModel m(2, {{0, 1, 1.0}});
  EXPECT_DOUBLE_EQ(energy(m, SpinConfig{1, 1}), -1.0);
  EXPECT_DOUBLE_EQ(energy(m, SpinConfig{1, -1}), 1.0);
}

TEST(Energy, FieldsEnterWithNegativeSign) {
  const IsingModel m(3, {}, {0.5, -1.0, 2.0});
  EXPECT_DOUBLE_EQ(energy(m, SpinConfig{1, 1, 1}), -1.5);
}

TEST(Energy, DimensionMismatchThrows) {
  const IsingModel m(3, {{0, 2, 1.0}});
  EXPECT_THROW(energy(m, SpinConfig{1, 1}), std::invalid_argument);
}

TEST(Energy, GlobalFlipSymmetryWithoutFields) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = testing::random_model(25, 0.3, false, seed);
    const auto s = testing::random_spins(25, seed + 1000);
    EXPECT_DOUBLE_EQ(energy(m, s), energy(m, s.flipped()));
  }
}

TEST(Energy, MatchesDenseEvaluation) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = testing::random_model(30, 0.2, true, seed);
    const auto s = testing::random_spins(30, seed);
    const auto J = testing::dense_couplings(m);
    const std::vector<double> h(m.fields().begin(), m.fields().end());
    const std::vector<int> si(s.values().begin(), s.values().end());
    EXPECT_NEAR(energy(m, s), testing::dense_energy(J, h, si), 1e-10);
  }
}

TEST(IsingModel, RejectsInvalidStructure) {
  EXPECT_THROW(IsingModel(0, {}), std::invalid_argument);
  EXPECT_THROW(IsingModel(2, {{0, 0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(IsingModel(2, {{0, 2, 1.0}}), std::out_of_range);
  EXPECT_THROW(IsingModel(3, {{0, 1, 1.0}, {1, 0, 2.0}}), std::invalid_argument);
  EXPECT_THROW(IsingModel(3, {}, {1.0}), std::invalid_argument);
}

TEST(IsingModel, StoresPairsOnceAndAdjacencyBothWays) {
  const IsingModel m(4, {{2, 0, 0.5}, {1, 3, -1.0}, {0, 1, 2.0}});
  ASSERT_EQ(m.couplings().size(), 3u);
  for (const auto& c : m.couplings()) EXPECT_LT(c.i, c.j);
  EXPECT_DOUBLE_EQ(m.coupling(0, 2), 0.5);
  EXPECT_DOUBLE_EQ(m.coupling(2, 0), 0.5);
  EXPECT_DOUBLE_EQ(m.coupling(3, 1), -1.0);
  EXPECT_DOUBLE_EQ(m.coupling(2, 3), 0.0);
  const auto csr = m.adjacency();
  EXPECT_EQ(csr.row_offsets.back(), 6u);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = csr.row_offsets[i] + 1; k < csr.row_offsets[i + 1]; ++k)
      EXPECT_LT(csr.columns[k - 1], csr.columns[k]);
  EXPECT_EQ(m.max_degree(), 2u);
}

TEST(SpinConfig, RejectsNonSpinValues) {
  EXPECT_THROW(SpinConfig({1, 0}), std::invalid_argument);
  SpinConfig s(3);
  EXPECT_THROW(s.set(0, 2), std::invalid_argument);
}

std::vector<std::uint8_t> bits(std::uint64_t code, std::size_t n) {
  std::vector<std::uint8_t> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (code >> i) & 1u;
  return x;
}

SpinConfig spins_of(const std::vector<std::uint8_t>& x) {
  std::vector<Spin> s;
  for (const auto v : x) s.push_back(v ? 1 : -1);
  return SpinConfig(std::move(s));
}

TEST(QuboToIsing, ZeroMapGivesZeroModel) {
  QuboProblem q{3, {{0, 0, 0.0}, {0, 1, 0.0}}};
  const auto conv = qubo_to_ising(q);
  EXPECT_TRUE(conv.model.couplings().empty());
  for (const double h : conv.model.fields()) EXPECT_EQ(h, 0.0);
  EXPECT_EQ(conv.offset, 0.0);
}

TEST(QuboToIsing, SingleVariable) {
  QuboProblem q{1, {{0, 0, 1.0}}};
  const auto conv = qubo_to_ising(q);
  EXPECT_DOUBLE_EQ(energy(conv.model, SpinConfig{-1}) + conv.offset, 0.0);
  EXPECT_DOUBLE_EQ(energy(conv.model, SpinConfig{1}) + conv.offset, 1.0);
}

QuboProblem random_qubo(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  QuboProblem q{n, {}};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      if (rng() % 3 != 0) q.terms.push_back({i, j, u(rng)});
  return q;
}

TEST(QuboToIsing, ObjectiveEqualsEnergyPlusOffsetExhaustively) {
  for (std::size_t n = 1; n <= 10; ++n) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto q = random_qubo(n, seed * 31 + n);
      const auto conv = qubo_to_ising(q);
      for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
        const auto x = bits(code, n);
        ASSERT_NEAR(q.objective(x), energy(conv.model, spins_of(x)) + conv.offset, 1e-10)
            << "n=" << n << " code=" << code;
      }
    }
  }
}

TEST(QuboToIsing, RejectsMalformedTerms) {
  EXPECT_THROW(qubo_to_ising({2, {{1, 0, 1.0}}}), std::invalid_argument);
  EXPECT_THROW(qubo_to_ising({2, {{0, 2, 1.0}}}), std::out_of_range);
  EXPECT_THROW(qubo_to_ising({2, {{0, 1, 1.0}, {0, 1, 1.0}}}), std::invalid_argument);
}

}  // namespace
}  // namespace dsb
