#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "fkpp/branching.hpp"
#include "fkpp/normal.hpp"
#include "fkpp/rng.hpp"

namespace {

using namespace fkpp;

const LevyModel kBm = LevyModel::brownian();

BatchOptions batch(std::size_t runs, std::uint64_t seed) {
  BatchOptions opts;
  opts.n_runs = runs;
  opts.seed = seed;
  opts.threads = 1;
  return opts;
}

double binomial_se(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

TEST(Simulate, SingleLineageFollowsLevyLaw) {
  BranchingConfig config{kBm, OffspringLaw::from_pairs({{1, 1.0}})};
  const std::size_t n = 50'000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_stream(1, i);
    const auto out = simulate(config, 2.0, rng);
    ASSERT_EQ(out.status, RunStatus::alive);
    ASSERT_EQ(out.n_particles, 1u);
    ASSERT_EQ(out.positions.size(), 1u);
    sum += out.positions[0];
    sum_sq += out.positions[0] * out.positions[0];
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 3.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(sum_sq / n - mean * mean, 2.0, 0.05);
}

TEST(Simulate, PureDeathMatchesExponentialClock) {
  BranchingConfig config{kBm, OffspringLaw::from_pairs({{0, 1.0}})};
  const auto runs = simulate_many(config, 1.0, batch(100'000, 2));
  const double dead = static_cast<double>(std::count_if(runs.begin(), runs.end(), [](const auto& r) {
                        return r.status == RunStatus::extinct;
                      })) / runs.size();
  const double p = 1.0 - std::exp(-1.0);
  EXPECT_NEAR(dead, p, 3.0 * binomial_se(p, runs.size()));
}

TEST(Simulate, ExtinctRunConvention) {
  BranchingConfig config{kBm, OffspringLaw::from_pairs({{0, 1.0}})};
  Rng rng = make_stream(3, 0);
  for (int i = 0; i < 50; ++i) {
    const auto out = simulate(config, 20.0, rng);
    ASSERT_EQ(out.status, RunStatus::extinct);
    EXPECT_TRUE(out.positions.empty());
    EXPECT_EQ(out.n_particles, 0u);
    EXPECT_EQ(out.rightmost, -INFINITY);
  }
}

TEST(Simulate, AliveRunInvariants) {
  BranchingConfig config{kBm, OffspringLaw::from_pairs({{0, 0.2}, {3, 0.8}})};
  Rng rng = make_stream(4, 0);
  for (int i = 0; i < 200; ++i) {
    const auto out = simulate(config, 1.5, rng);
    if (out.status != RunStatus::alive) continue;
    EXPECT_GE(out.n_particles, 1u);
    EXPECT_EQ(out.positions.size(), out.n_particles);
    EXPECT_EQ(out.rightmost, *std::max_element(out.positions.begin(), out.positions.end()));
  }
}

TEST(Simulate, YuleMeanGrowth) {
  BranchingConfig config{kBm, OffspringLaw::dyadic()};
  for (double t : {0.5, 1.0, 2.0}) {
    const auto runs = simulate_many(config, t, batch(t < 2.0 ? 100'000 : 40'000, 5));
    std::vector<double> counts;
    for (const auto& r : runs) counts.push_back(static_cast<double>(r.n_particles));
    const auto est = summarize(counts);
    EXPECT_NEAR(est.mean, std::exp(t), 3.0 * est.std_error) << "t=" << t;
  }
}

TEST(Simulate, CapIsAStatus) {
  BranchingConfig config{kBm, OffspringLaw::dyadic()};
  config.cap = 10;
  Rng rng = make_stream(6, 0);
  const auto out = simulate(config, 8.0, rng);
  EXPECT_EQ(out.status, RunStatus::cap_exceeded);
  EXPECT_TRUE(out.positions.empty());
}

TEST(Simulate, ZeroHorizon) {
  BranchingConfig config{kBm, OffspringLaw::dyadic()};
  config.start = 1.25;
  Rng rng = make_stream(7, 0);
  const auto out = simulate(config, 0.0, rng);
  EXPECT_EQ(out.n_particles, 1u);
  EXPECT_EQ(out.rightmost, 1.25);
  EXPECT_THROW(simulate(config, -1.0, rng), std::domain_error);
}

TEST(Simulate, SeedAndThreadDeterminism) {
  BranchingConfig config{kBm, OffspringLaw::from_pairs({{0, 0.25}, {2, 0.75}})};
  auto opts = batch(500, 8);
  const auto a = simulate_many(config, 2.0, opts);
  opts.threads = 3;
  const auto b = simulate_many(config, 2.0, opts);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].status, b[i].status);
    EXPECT_EQ(a[i].n_particles, b[i].n_particles);
    EXPECT_EQ(a[i].rightmost, b[i].rightmost);
  }
}

TEST(Simulate, StatusNames) {
  EXPECT_STREQ(to_string(RunStatus::alive), "ALIVE");
  EXPECT_STREQ(to_string(RunStatus::extinct), "EXTINCT");
  EXPECT_STREQ(to_string(RunStatus::cap_exceeded), "CAP_EXCEEDED");
}

TEST(McKean, ConstantOneIsExact) {
  BranchingConfig config{kBm, OffspringLaw::dyadic()};
  const auto est = mckean_check(config, GridFn::constant(GridSpec{}, 1.0), 1.0, 0.0, batch(1000, 9));
  EXPECT_EQ(est.value.mean, 1.0);
  EXPECT_EQ(est.value.std_error, 0.0);
}

TEST(McKean, ConstantZeroIsExtinctionByT) {
  const auto zero = GridFn::constant(GridSpec{}, 0.0);
  BranchingConfig dyadic{kBm, OffspringLaw::dyadic()};
  EXPECT_EQ(mckean_check(dyadic, zero, 1.0, 0.0, batch(1000, 10)).value.mean, 0.0);

  BranchingConfig quarter{kBm, OffspringLaw::from_pairs({{0, 0.25}, {2, 0.75}})};
  const auto est = mckean_check(quarter, zero, 1.0, 0.0, batch(50'000, 11));
  EXPECT_GT(est.value.mean, 0.0);
  // Probability of extinction by t solves q' = G(q) - q with q(0) = 0.
  const ReactionFn rf(quarter.law);
  const double exact = reaction_semigroup(rf, 0.0, 1.0);
  EXPECT_NEAR(est.value.mean, exact, 3.0 * est.value.std_error);
}

TEST(McKean, EqualsRightmostDistribution) {
  BranchingConfig config{kBm, OffspringLaw::dyadic()};
  const auto u0 = GridFn::heaviside(GridSpec{});
  const auto runs = simulate_many(config, 1.0, batch(50'000, 12));
  for (double x : {-1.0, 0.0, 1.0}) {
    const double ecdf = static_cast<double>(std::count_if(runs.begin(), runs.end(), [x](const auto& r) {
                          return r.rightmost <= x;
                        })) / runs.size();
    const auto est = mckean_check(config, u0, 1.0, x, batch(50'000, 13));
    const double se = std::hypot(binomial_se(ecdf, runs.size()), est.value.std_error);
    EXPECT_NEAR(ecdf, est.value.mean, 3.0 * se) << "x=" << x;
  }
}

TEST(McKean, FlagsHeavyCapping) {
  BranchingConfig config{kBm, OffspringLaw::dyadic()};
  config.cap = 2;
  const auto est = mckean_check(config, GridFn::heaviside(GridSpec{}), 3.0, 0.0, batch(500, 14));
  EXPECT_TRUE(est.flagged);
  EXPECT_GT(est.capped, 5u);
}

TEST(Extinction, Examples) {
  BranchingConfig dyadic{kBm, OffspringLaw::dyadic()};
  EXPECT_EQ(extinction_estimate(dyadic, 30.0, batch(2000, 15)).probability, 0.0);
  BranchingConfig death{kBm, OffspringLaw::from_pairs({{0, 1.0}})};
  EXPECT_EQ(extinction_estimate(death, 30.0, batch(2000, 16)).probability, 1.0);
  BranchingConfig quarter{kBm, OffspringLaw::from_pairs({{0, 0.25}, {2, 0.75}})};
  const auto est = extinction_estimate(quarter, 30.0, batch(100'000, 17));
  const double third = (4.0 - 2.0) / 6.0;
  EXPECT_NEAR(est.probability, third, 3.0 * binomial_se(third, 100'000));
}

TEST(Extinction, AgreesWithFullSimulation) {
  BranchingConfig quarter{kBm, OffspringLaw::from_pairs({{0, 0.25}, {2, 0.75}})};
  const auto runs = simulate_many(quarter, 3.0, batch(20'000, 18));
  const double dead = static_cast<double>(std::count_if(runs.begin(), runs.end(), [](const auto& r) {
                        return r.status == RunStatus::extinct;
                      })) / runs.size();
  const auto est = extinction_estimate(quarter, 3.0, batch(20'000, 19));
  const double se = std::hypot(binomial_se(dead, runs.size()), est.std_error);
  EXPECT_NEAR(dead, est.probability, 3.0 * se);
}

TEST(SpeedExperiment, DriftOnlyRightmostMovesAtDrift) {
  BranchingConfig config{LevyModel::drift_only(0.7), OffspringLaw::dyadic()};
  const auto rows = speed_experiment(config, {1.0, 3.0, 5.0}, batch(200, 20));
  for (const auto& row : rows) {
    EXPECT_NEAR(row.median_speed, 0.7, 1e-14);
    EXPECT_NEAR(row.q10, 0.7, 1e-14);
    EXPECT_NEAR(row.q90, 0.7, 1e-14);
    EXPECT_EQ(row.extinct_frac, 0.0);
  }
}

TEST(SpeedExperiment, EnforcesCapHorizon) {
  BranchingConfig config{kBm, OffspringLaw::dyadic()};
  config.cap = 1000;  // log(1000) ~ 6.9
  EXPECT_THROW(speed_experiment(config, {2.0, 8.0}, batch(10, 21)), std::domain_error);
  EXPECT_THROW(speed_experiment(config, {3.0, 2.0}, batch(10, 21)), std::domain_error);
}

TEST(SpeedExperiment, ExcludesExtinctRuns) {
  BranchingConfig config{kBm, OffspringLaw::from_pairs({{0, 0.25}, {2, 0.75}})};
  const auto rows = speed_experiment(config, {2.0}, batch(5'000, 22));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_GT(rows[0].extinct_frac, 0.0);
  EXPECT_EQ(rows[0].n_alive + static_cast<std::size_t>(std::lround(rows[0].extinct_frac * 5'000)),
            5'000u);
  EXPECT_LE(rows[0].q10, rows[0].median_speed);
  EXPECT_LE(rows[0].median_speed, rows[0].q90);
}

TEST(EmpiricalQuantile, GeneralisedInverse) {
  const std::vector<double> sorted{1.0, 2.0, 3.0, 4.0};
  EXPECT_EQ(empirical_quantile(sorted, 0.25), 1.0);
  EXPECT_EQ(empirical_quantile(sorted, 0.26), 2.0);
  EXPECT_EQ(empirical_quantile(sorted, 0.5), 2.0);
  EXPECT_EQ(empirical_quantile(sorted, 1.0), 4.0);
  EXPECT_THROW(empirical_quantile({}, 0.5), std::domain_error);
}

}  // namespace
