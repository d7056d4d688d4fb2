#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "cantor/generators.hpp"
#include "cantor/madic.hpp"
#include "cantor/serialize.hpp"

using namespace cantor;

TEST(CubeIndex, ChildrenInOneDimension) {
  auto kids = cube_children(CubeIndex{0, {0, 0}}, 2, 1);
  ASSERT_EQ(kids.size(), 2u);
  EXPECT_EQ(kids[0].level, 1u);
  EXPECT_EQ(kids[0].coords[0], 0u);
  EXPECT_EQ(kids[1].coords[0], 1u);
}

TEST(CubeIndex, ChildrenInTwoDimensions) {
  auto kids = cube_children(CubeIndex{1, {1, 0}}, 2, 2);
  ASSERT_EQ(kids.size(), 4u);
  std::set<std::pair<std::uint64_t, std::uint64_t>> got;
  for (auto& k : kids) {
    EXPECT_EQ(k.level, 2u);
    got.insert({k.coords[0], k.coords[1]});
    const auto p = parent_of(k, 2);
    EXPECT_EQ(p.coords, (std::array<std::uint64_t, 2>{1, 0}));
  }
  EXPECT_EQ(got, (std::set<std::pair<std::uint64_t, std::uint64_t>>{{2, 0}, {2, 1}, {3, 0}, {3, 1}}));
}

TEST(CubeIndex, KeyRoundTripAndChildCount) {
  for (unsigned M : {2u, 3u, 5u})
    for (unsigned d : {1u, 2u}) {
      const CubeIndex q{3, {M * M - 1, d == 2 ? 2u : 0u}};
      ASSERT_TRUE(valid_cube(q, M, d));
      const auto key = encode_key(q, M, d);
      const auto back = decode_key(3, key, M, d);
      EXPECT_EQ(back.coords, q.coords);
      const auto kids = cube_children(q, M, d);
      EXPECT_EQ(kids.size(), ipow(M, d));
      for (auto& k : kids) {
        // children of key k occupy [k M^d, (k+1) M^d)
        const auto ck = encode_key(k, M, d);
        EXPECT_GE(ck, key * ipow(M, d));
        EXPECT_LT(ck, (key + 1) * ipow(M, d));
      }
    }
}

TEST(BetaSchedule, CapacityInvariants) {
  for (double s : {0.25, 0.5, 0.75})
    for (unsigned d : {1u, 2u}) {
      const double ss = s * d;
      const auto b = BetaSchedule::capacity(2, d, ss);
      const double C = std::pow(2.0, d);
      EXPECT_EQ(b.log_beta(0), 0.0);
      for (unsigned n = 0; n < 40; ++n) {
        const double r = b.beta(n + 1) / b.beta(n);
        EXPECT_TRUE(std::abs(r - 1.0) < 1e-9 || std::abs(r - C) < 1e-9);
        const double target = std::pow(2.0, n * (d - ss));
        EXPECT_LE(b.beta(n), C * target * (1 + 1e-9));
        EXPECT_GE(b.beta(n), target / C * (1 - 1e-9));
      }
    }
}

TEST(ModelParams, RejectsBadSchedules) {
  EXPECT_THROW(make_params(2, 1, BetaSchedule::table({1.0, 3.0}), 0, 1), InvalidParameter);
  EXPECT_THROW(BetaSchedule::table({1.0, 1.5, 1.2}), InvalidParameter);
  EXPECT_THROW(make_params(2, 3, BetaSchedule::constant(), 0, 0), InvalidParameter);
  EXPECT_THROW(make_params(2, 1, BetaSchedule::constant(), 0.5, 0.2), InvalidParameter);
}

TEST(MeasureOfCube, FullOccupationIsLebesgue) {
  const auto r = generate(params_for(Percolation{1.0}, 3, 2), Percolation{1.0}, 4, 1);
  for (unsigned m = 0; m <= 4; ++m) {
    const CubeIndex q{m, {0, ipow(3, m) - 1}};
    EXPECT_NEAR(measure_of_cube(r, q, 4), std::pow(3.0, -2.0 * m), 1e-15);
  }
  EXPECT_NEAR(measure_of_cube(r, CubeIndex{0, {0, 0}}, 4), r.mass(4), 1e-15);
}

TEST(MeasureOfCube, CapacitySurvivorsKeepMass) {
  const CapacityExact law{0.5};
  const auto p = params_for(law, 2, 1);
  const auto r = generate(p, law, 12, 9);
  for (unsigned n : {3u, 6u}) {
    const auto key = r.level(n)[0];
    const auto q = decode_key(n, key, 2, 1);
    for (unsigned m = n; m <= 12; ++m) EXPECT_NEAR(measure_of_cube(r, q, m), 1.0 / static_cast<double>(r.count(n)), 1e-12);
  }
}

TEST(MeasureOfCube, EmptyRealizationIsZero) {
  std::vector<std::vector<Key>> levels{{0}, {}, {}};
  const Realization r(params_for(Percolation{0.5}, 2, 1), levels, 0, GeneratorTag::percolation);
  EXPECT_EQ(measure_of_cube(r, CubeIndex{0, {0, 0}}, 2), 0.0);
  EXPECT_EQ(measure_of_cube(r, CubeIndex{1, {1, 0}}, 2), 0.0);
  EXPECT_THROW(measure_of_cube(r, CubeIndex{0, {0, 0}}, 3), LevelOutOfRange);
}

TEST(TwoPoint, Formulas) {
  const auto p = params_for(Percolation{0.7}, 2, 1);
  const MadicPoint x{3, {1, 0}}, y{3, {5, 0}};  // differ in the first binary digit
  EXPECT_DOUBLE_EQ(two_point_probability(p, x, x, 3), std::pow(0.7, 3));
  EXPECT_DOUBLE_EQ(two_point_probability(p, x, y, 0), 1.0);
  const MadicPoint a{3, {1, 0}}, b{3, {3, 0}};  // separation level 1
  EXPECT_EQ(separation_level(a, b, 2, 1), 1u);
  EXPECT_NEAR(two_point_probability(p, a, b, 3), std::pow(0.7, 5), 1e-15);
  EXPECT_THROW(two_point_probability(p, MadicPoint{2, {4, 0}}, x, 1), DomainError);
}

TEST(SecondMoment, ClosedForms) {
  const auto full = params_for(Percolation{1.0}, 2, 2);
  for (unsigned n = 0; n < 6; ++n) EXPECT_DOUBLE_EQ(second_moment(full, n), 1.0);
  const auto p = params_for(Percolation{0.7}, 2, 1);
  EXPECT_DOUBLE_EQ(second_moment(p, 0), 1.0);
  // pairs split at level 0 with mass 1/2 get beta_0 = 1; the rest get beta_1 = 1/p
  EXPECT_NEAR(second_moment(p, 1), 0.5 + 0.5 / 0.7, 1e-14);
  double prev = 1.0;
  for (unsigned n = 1; n < 10; ++n) {
    const double m = second_moment(p, n);
    EXPECT_GE(m, prev);
    EXPECT_LE(survival_lower_bound(p, n), 1.0);
    prev = m;
  }
}

TEST(Realization, RejectsBadLevels) {
  const auto p = params_for(Percolation{0.5}, 2, 1);
  EXPECT_THROW(Realization(p, {{1}}, 0, GeneratorTag::percolation), InvalidParameter);
  EXPECT_THROW(Realization(p, {{0}, {1, 0}}, 0, GeneratorTag::percolation), InvalidParameter);
}

TEST(Serialize, RoundTripPreservesLevels) {
  for (const char* spec : {"perc:M=3,d=2,p=0.6", "cap:M=2,d=1,s=0.4", "behrend:M=10,eps=0.5"}) {
    const auto r = generate(parse_generator_spec(spec), 7, 42);
    std::stringstream buf;
    write_realization(buf, r);
    const auto back = read_realization(buf);
    ASSERT_EQ(back.depth(), r.depth());
    EXPECT_EQ(back.seed(), r.seed());
    EXPECT_EQ(back.tag(), r.tag());
    EXPECT_EQ(back.generator_spec(), r.generator_spec());
    for (unsigned n = 0; n <= r.depth(); ++n) {
      EXPECT_TRUE(std::ranges::equal(back.level(n), r.level(n)));
      EXPECT_DOUBLE_EQ(back.mass(n), r.mass(n));
    }
    const auto meta = realization_metadata(r);
    EXPECT_EQ(meta["depth"].get<unsigned>(), 7u);
  }
}

TEST(Serialize, RejectsGarbage) {
  std::stringstream buf("not a realization");
  EXPECT_ANY_THROW(read_realization(buf));
}
