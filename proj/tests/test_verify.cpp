#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "imub/checks.hpp"
#include "imub/verify.hpp"

using namespace imub;
using cd = std::complex<double>;

TEST(McEstimate, ConstantSamplerPassesAgainstItself) {
  const cd k(0.3, -1.7);
  const auto r = mc_estimate([k](Stream&, std::uint64_t) { return k; }, 500, k);
  EXPECT_EQ(*r.estimate, k);
  EXPECT_EQ(r.std_error->real(), 0.0);
  EXPECT_EQ(r.std_error->imag(), 0.0);
  EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(McEstimate, NoReferenceIsInconclusive) {
  const auto r = mc_estimate([](Stream& rng, std::uint64_t) { return cd(rng.uniform(), 0); }, 200, std::nullopt);
  EXPECT_EQ(r.verdict, Verdict::Inconclusive);
}

TEST(McEstimate, RejectsTooFewSamples) {
  EXPECT_THROW(mc_estimate([](Stream&, std::uint64_t) { return cd(1, 0); }, 99, cd(1, 0)), InsufficientSamples);
}

TEST(McEstimate, FairCoinCalibration) {
  int passes = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto r = mc_estimate([](Stream& rng, std::uint64_t) { return cd(rng.uniform() < 0.5 ? 1.0 : 0.0, 0); },
                               2000, cd(0.5, 0), 4.0, seed);
    passes += r.passed();
  }
  EXPECT_GE(passes, 99);
  const auto biased = mc_estimate([](Stream& rng, std::uint64_t) { return cd(rng.uniform() < 0.55 ? 1.0 : 0.0, 0); },
                                  100000, cd(0.5, 0), 4.0, 1);
  EXPECT_EQ(biased.verdict, Verdict::Fail);
}

TEST(McEstimate, BothComponentsMustPass) {
  const auto r = mc_estimate([](Stream& rng, std::uint64_t) { return cd(rng.normal(), 1.0 + 0.01 * rng.normal()); },
                             10000, cd(0, 0));
  EXPECT_EQ(r.verdict, Verdict::Fail);
}

TEST(McEstimate, WorkerCountDoesNotChangeResult) {
  const auto sampler = [](Stream& rng, std::uint64_t i) { return cd(rng.normal() + 1e-3 * i, rng.uniform()); };
  const auto a = mc_estimate(sampler, 5000, cd(0, 0), 4, 9, 1);
  const auto b = mc_estimate(sampler, 5000, cd(0, 0), 4, 9, 3);
  EXPECT_EQ(*a.estimate, *b.estimate);
  EXPECT_EQ(*a.std_error, *b.std_error);
}

TEST(ParallelMap, SurfacesLowestFailingIndex) {
  try {
    parallel_map<int>(1000, 4, [](std::size_t i) -> int {
      if (i == 700 || i == 300) throw DomainError(std::to_string(i));
      return 0;
    });
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_STREQ(e.what(), "300");
  }
}

TEST(KsAgainstQ, ExactSamplesPass) {
  constexpr int n = 100000;
  std::vector<BoundaryPoint> xs;
  Stream rng(3, 0);
  for (int i = 0; i < n; ++i) xs.push_back(q_sample(QMeasureParams(1, 2), rng));
  EXPECT_TRUE(ks_against_q(xs, {1, 2}, 1.63 / std::sqrt(double(n))).passed());
  const auto wrong = ks_against_q(xs, {2, 1}, 1.63 / std::sqrt(double(n)));
  EXPECT_EQ(wrong.verdict, Verdict::Fail);
  EXPECT_GT(*wrong.statistic, 0.4);
}

TEST(KsAgainstQ, SinglePointFails) {
  const std::vector<BoundaryPoint> xs(1000, BoundaryPoint::axis1(1));
  const auto r = ks_against_q(xs, {1, 2}, 0.01);
  EXPECT_EQ(r.verdict, Verdict::Fail);
  EXPECT_GE(*r.statistic, q_branch_mass({1, 2}).mass2);
}

TEST(KsAgainstQ, DegenerateParamsRejected) {
  EXPECT_THROW(ks_against_q({BoundaryPoint::axis1(1)}, {1, 0}, 0.01), DegenerateStart);
}

TEST(Martingale, NoDriftIsExact) {
  const ImubParams p(0, {1, 1});
  const auto r = martingale_residual(p, BoundaryPoint::axis1(1), BoundaryPoint::axis2(2), 1.0, 0.1, 200);
  EXPECT_NEAR(std::abs(*r.estimate - kernel_F(BoundaryPoint::axis1(1), BoundaryPoint::axis2(2))), 0.0, 1e-15);
  EXPECT_LE(r.std_error->real(), 1e-16);
  EXPECT_TRUE(r.passed());
}

TEST(Martingale, TimeZeroIsExact) {
  const ImubParams p(1, {1, 1});
  Stream rng(1, 0);
  const auto x0 = BoundaryPoint::axis1(1), z = BoundaryPoint::axis1(1);
  // (1,0) <> (1,0) = -1 + i.
  EXPECT_NEAR(std::abs(martingale_value(p, x0, z, 0.0, 0.1, rng) - std::exp(cd(-1.0, 1.0))), 0.0, 1e-16);
}

TEST(Martingale, SchemesAgreeOnOnePath) {
  const ImubParams p(1, {2, 0.5});
  const auto x0 = BoundaryPoint::axis2(1), z = BoundaryPoint::axis1(0.7);
  Stream a(5, 0), b(5, 0);
  const cd exact = martingale_value(p, x0, z, 1.0, 0.05, a, IntegralScheme::Exact);
  const cd trap = martingale_value(p, x0, z, 1.0, 0.05, b, IntegralScheme::Trapezoid, 64);
  EXPECT_NEAR(std::abs(exact - trap), 0.0, 1e-6);
}

TEST(Martingale, ResidualPassesAtModerateSize) {
  const ImubParams p(1, {1, 1});
  const auto r = martingale_residual(p, BoundaryPoint::axis1(1), BoundaryPoint::axis1(1), 1.0, 1e-2, 20000, 4);
  EXPECT_NEAR(std::abs(*r.reference), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(std::arg(*r.reference), 1.0, 1e-15);
  EXPECT_TRUE(r.passed());
  EXPECT_THROW(martingale_residual(p, BoundaryPoint::axis1(1), BoundaryPoint::axis1(1), 0.5, 1.0, 200),
               DomainError);
}

TEST(Duality, ReferenceValue) {
  const auto ref = duality_reference(ImubParams(1, {1, 1}), BoundaryPoint::axis2(1), BoundaryPoint::axis1(1),
                                     std::log(2.0));
  EXPECT_NEAR(ref.real(), std::exp(-1.5) * std::cos(0.5), 1e-15);
  EXPECT_NEAR(ref.imag(), -std::exp(-1.5) * std::sin(0.5), 1e-15);
}

TEST(ConvergenceSweep, EmptyAndDegenerate) {
  const ImubParams p(1, {1, 1});
  EXPECT_TRUE(convergence_sweep(p, BoundaryPoint::axis1(1), 1.0, {}, 100).empty());
  // gamma = 0 follows the drift flow into the open quadrant, far from the law on E.
  const auto r = convergence_sweep(p, BoundaryPoint::axis1(1), 1.0, {0.0}, 200);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].verdict, Verdict::Fail);
  // Co-axial theta and x0: both sides sit at one point of axis 1.
  const auto co = convergence_sweep(ImubParams(1, {2, 0}), BoundaryPoint::axis1(1), 1.0, {0.0}, 200);
  EXPECT_EQ(co[0].verdict, Verdict::Pass);
  EXPECT_THROW(convergence_sweep(p, BoundaryPoint::axis1(1), 1.0, {10, 1}, 100), DomainError);
}

TEST(ConvergenceSweep, LargeGammaIsClose) {
  const auto r = convergence_sweep(ImubParams(1, {1, 1}), BoundaryPoint::axis1(1), 1.0, {1, 100}, 4000, 2);
  EXPECT_GT(*r[0].statistic, *r[1].statistic);
  EXPECT_LE(*r[1].statistic, 0.05);
  EXPECT_EQ(r[1].params["projection"], "w = y1 - y2");
}

TEST(ReportJson, Shape) {
  const auto r = mc_estimate([](Stream&, std::uint64_t) { return cd(1, 2); }, 100, cd(1, 2), 4, 3);
  const json j = r.to_json();
  for (const char* key : {"check", "params", "n", "estimate", "std_error", "reference", "statistic", "threshold",
                          "verdict", "seed", "wall_time_ms"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["estimate"]["im"], 2.0);
  EXPECT_TRUE(j["statistic"].is_null());
  EXPECT_EQ(j["verdict"], "pass");
}

TEST(Suite, DeterministicChecksAcrossWorkers) {
  SuiteOptions a, b;
  a.workers = 1;
  b.workers = 3;
  a.only = b.only = {1, 2, 13};
  auto ra = run_all_checks(a), rb = run_all_checks(b);
  ASSERT_EQ(ra.size(), rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    auto ja = ra[i].to_json(), jb = rb[i].to_json();
    ja.erase("wall_time_ms");
    jb.erase("wall_time_ms");
    EXPECT_EQ(ja.dump(), jb.dump());
    EXPECT_TRUE(ra[i].passed()) << ja.dump();
  }
  EXPECT_TRUE(criterion_passed(ra, 1));
  EXPECT_TRUE(criterion_passed(ra, 13));
  EXPECT_FALSE(criterion_passed(ra, 5));
}
