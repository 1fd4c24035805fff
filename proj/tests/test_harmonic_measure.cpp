#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "imub/dual_kernels.hpp"
#include "imub/harmonic_measure.hpp"

using namespace imub;
constexpr double kPi = std::numbers::pi;

namespace {

// Independent oracle: the density typed straight from its definition and
// integrated with Boost's double-exponential rules.
double raw_density(double u, double v, double m) {
  return 4.0 / kPi * u * v * m / (4 * u * u * v * v + std::pow(m * m + v * v - u * u, 2));
}

double oracle_mass(double u, double v, double lo, double hi) {
  if (std::isinf(hi)) {
    boost::math::quadrature::exp_sinh<double> es;
    const double tail = es.integrate([&](double m) { return raw_density(u, v, m); }, lo, hi);
    return tail;
  }
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double m) { return raw_density(u, v, m); }, lo, hi);
}

double oracle_branch1(double u, double v) {
  const double peak = std::sqrt(std::max(u * u - v * v, 0.0)) + std::sqrt(u * v);
  return oracle_mass(u, v, 0.0, peak) + oracle_mass(u, v, peak, std::numeric_limits<double>::infinity());
}

double ks_signed(std::vector<double> w, const QMeasureParams& p) {
  std::sort(w.begin(), w.end());
  const double n = static_cast<double>(w.size());
  double d = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double c = q_signed_cdf(p, w[i]);
    d = std::max({d, (i + 1) / n - c, c - i / n});
  }
  return d;
}

}  // namespace

TEST(QDensity, Examples) {
  EXPECT_NEAR(q_density({1, 1}, BoundaryPoint::axis1(1)), 4 / (5 * kPi), 1e-15);
  EXPECT_NEAR(4 / (5 * kPi), 0.254648, 1e-6);
  for (double m : {0.1, 1.0, 3.0})
    EXPECT_DOUBLE_EQ(q_density({1, 1}, BoundaryPoint::axis1(m)), q_density({1, 1}, BoundaryPoint::axis2(m)));
  EXPECT_EQ(q_density({1, 2}, BoundaryPoint::origin()), 0.0);
  EXPECT_THROW(q_density({0, 2}, BoundaryPoint::axis1(1)), DegenerateStart);
  EXPECT_THROW(q_branch_mass({1, 0}), DegenerateStart);
  EXPECT_THROW(q_cdf({1, 0}, BoundaryPoint::axis1(1)), DegenerateStart);
}

TEST(QDensity, NormalizationGrid) {
  const double us[] = {0.15, 0.6, 1.2, 2.1, 3.0};
  const double vs[] = {0.3, 1.0, 1.7, 2.9};
  for (double u : us)
    for (double v : vs) {
      const auto r = q_expect(QMeasureParams(u, v), [](const BoundaryPoint&) { return 1.0; });
      EXPECT_NEAR(r.value, 1.0, 1e-8) << u << "," << v;
      EXPECT_TRUE(r.converged);
    }
}

TEST(QBranchMass, ClosedFormAgainstOracle) {
  EXPECT_NEAR(q_branch_mass({1, 1}).mass1, 0.5, 1e-15);
  EXPECT_NEAR(q_branch_mass({1, 2}).mass1, 0.295167, 1e-6);
  EXPECT_NEAR(q_branch_mass({2, 1}).mass1, 0.704833, 1e-6);
  for (auto [u, v] : {std::pair{1.0, 2.0}, {2.0, 1.0}, {0.1, 3.0}, {5.0, 0.2}}) {
    EXPECT_NEAR(q_branch_mass({u, v}).mass1, oracle_branch1(u, v), 1e-10);
  }
  // Frozen oracle value for (1,2).
  EXPECT_NEAR(oracle_branch1(1, 2), 0.2951672353, 1e-9);
}

TEST(QCdf, AgainstOracle) {
  EXPECT_NEAR(q_cdf({1, 1}, BoundaryPoint::axis1(1)), std::atan(0.5) / kPi, 1e-15);
  EXPECT_NEAR(q_cdf({1, 1}, BoundaryPoint::axis1(1)), 0.147584, 1e-6);
  EXPECT_EQ(q_cdf({1, 2}, BoundaryPoint::origin()), 0.0);
  EXPECT_NEAR(q_cdf({1, 1}, BoundaryPoint::axis1(1e9)), 0.5, 1e-12);
  for (auto [u, v] : {std::pair{1.0, 1.0}, {1.0, 2.0}, {3.0, 0.5}})
    for (double m : {0.3, 1.0, 2.5, 10.0}) {
      EXPECT_NEAR(q_cdf({u, v}, BoundaryPoint::axis1(m)), oracle_mass(u, v, 0, m), 1e-11);
      EXPECT_NEAR(q_cdf({u, v}, BoundaryPoint::axis2(m)), oracle_mass(v, u, 0, m), 1e-11);
    }
}

TEST(QQuantile, RoundTrip) {
  for (auto [u, v] : {std::pair{1.0, 1.0}, {1.0, 2.0}, {3.0, 0.5}}) {
    const QMeasureParams p(u, v);
    const auto mass = q_branch_mass(p);
    for (double f : {1e-6, 0.01, 0.2, 0.5, 0.8, 0.99, 0.999999}) {
      const double m1 = q_quantile(p, Branch::Axis1, f * mass.mass1);
      EXPECT_NEAR(q_cdf(p, BoundaryPoint::axis1(m1)), f * mass.mass1, 1e-10);
      const double m2 = q_quantile(p, Branch::Axis2, f * mass.mass2);
      EXPECT_NEAR(q_cdf(p, BoundaryPoint::axis2(m2)), f * mass.mass2, 1e-10);
    }
  }
}

TEST(QSample, DegenerateStartIsAtom) {
  Stream rng(1, 0);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(q_sample(QMeasureParams(3, 0), rng), BoundaryPoint::axis1(3));
  EXPECT_EQ(rng.draws(), 0u);
  EXPECT_EQ(q_sample(QMeasureParams(0, 0), rng), BoundaryPoint::origin());
}

TEST(QSample, ConsumesTwoUniforms) {
  Stream rng(5, 3);
  q_sample(QMeasureParams(1, 1), rng);
  EXPECT_EQ(rng.draws(), 2u);
}

TEST(QSample, MeanAndBranchFraction) {
  constexpr int n = 100000;
  Stream rng(11, 0);
  double sum1 = 0, sum1sq = 0;
  int on_axis1 = 0;
  for (int i = 0; i < n; ++i) {
    const auto b = q_sample(QMeasureParams(1, 2), rng);
    on_axis1 += b.branch() == Branch::Axis1;
  }
  const double frac = static_cast<double>(on_axis1) / n;
  const double p = q_branch_mass({1, 2}).mass1;
  EXPECT_NEAR(frac, 0.2952, 4 * std::sqrt(p * (1 - p) / n));

  // The x1 mean has infinite variance; a 4 standard-error band from the
  // sample is still a usable band and is loose enough here.
  Stream rng2(12, 0);
  for (int i = 0; i < n; ++i) {
    const double x = q_sample(QMeasureParams(1, 1), rng2).to_quadrant().x1;
    sum1 += x;
    sum1sq += x * x;
  }
  const double mean = sum1 / n;
  const double se = std::sqrt((sum1sq / n - mean * mean) / n);
  EXPECT_NEAR(mean, 1.0, 4 * se);
}

TEST(QSample, KsAgainstExactCdf) {
  constexpr int n = 100000;
  Stream rng(2, 0);
  std::vector<double> w(n);
  for (auto& x : w) x = q_sample(QMeasureParams(1, 1), rng).signed_coordinate();
  EXPECT_LE(ks_signed(w, {1, 1}), 1.63 / std::sqrt(double(n)));
  EXPECT_GT(ks_signed(w, {2, 1}), 0.1);
}

TEST(QProperties, Scaling) {
  constexpr int n = 100000;
  for (double r : {0.5, 2.0}) {
    Stream rng(3, static_cast<std::uint64_t>(r * 10));
    std::vector<double> w(n);
    for (auto& x : w) x = r * q_sample(QMeasureParams(1.0, 0.7), rng).signed_coordinate();
    EXPECT_LE(ks_signed(w, {r * 1.0, r * 0.7}), 0.01);
  }
}

TEST(QProperties, Composition) {
  // z ~ Q_(1,1), then Q_{0.5 z + (1,0)}, against Q_{(1.5, 0.5)}.
  constexpr int n = 100000;
  Stream rng(4, 0);
  std::vector<double> w(n);
  for (auto& x : w) {
    const auto z = q_sample(QMeasureParams(1, 1), rng).to_quadrant();
    x = q_sample(0.5 * z + QuadrantPoint{1, 0}, rng).signed_coordinate();
  }
  EXPECT_LE(ks_signed(w, {1.5, 0.5}), 0.01);
}

TEST(QProperties, HarmonicMeasureDuality) {
  const QuadrantPoint x{1, 1}, y{2, 1};
  const auto lhs = q_expect(QMeasureParams(x), [&](const BoundaryPoint& z) { return kernel_F(z, y); });
  const auto rhs = q_expect(QMeasureParams(y), [&](const BoundaryPoint& z) { return kernel_F(x, z); });
  EXPECT_LE(std::abs(lhs.value - rhs.value), 1e-6 * std::abs(rhs.value));
}

TEST(QMoment, MeanIdentityAndBound) {
  EXPECT_NEAR(q_moment({1, 1}, 1, 1.0), 1.0, 1e-7);
  EXPECT_NEAR(q_moment_bound({1, 1}, 1.0), 2.0, 1e-14);
  EXPECT_NEAR(q_moment_bound({1, 1}, 1.5), std::pow(2, 0.75) / std::cos(3 * kPi / 8), 1e-12);
  EXPECT_NEAR(q_moment_bound({1, 1}, 1.5), 4.39474, 1e-5);
  EXPECT_DOUBLE_EQ(q_moment({2.5, 0}, 1, 1.5), std::pow(2.5, 1.5));
  for (double u : {0.2, 1.0, 2.5})
    for (double v : {0.5, 1.0, 3.0}) {
      EXPECT_NEAR(q_moment({u, v}, 1, 1.0), u, 1e-7);
      EXPECT_NEAR(q_moment({u, v}, 2, 1.0), v, 1e-7);
      for (double p : {1.0, 1.25, 1.5, 1.75, 1.9}) {
        EXPECT_LE(q_moment({u, v}, 1, p), q_moment_bound({u, v}, p));
        EXPECT_LE(q_moment({u, v}, 2, p), q_moment_bound({v, u}, p));
      }
    }
}

TEST(QMoment, AgainstOracle) {
  boost::math::quadrature::exp_sinh<double> es;
  for (double p : {1.0, 1.5, 1.9}) {
    const double want = es.integrate([&](double m) { return std::pow(m, p) * raw_density(1, 1, m); }, 0.0,
                                     std::numeric_limits<double>::infinity());
    EXPECT_NEAR(q_moment({1, 1}, 1, p), want, 1e-7 * want);
  }
}

TEST(QMoment, RejectsExponent) {
  EXPECT_THROW(q_moment({1, 1}, 1, 2.0), InvalidExponent);
  EXPECT_THROW(q_moment({1, 1}, 1, 0.5), InvalidExponent);
}

TEST(QBounds, ExitTime) {
  EXPECT_NEAR(exit_time_moment_bound({1, 1}, 1.0), 2 * std::sqrt(2 / kPi), 1e-14);
  EXPECT_NEAR(exit_time_moment_bound({1, 1}, 1.0), 1.5958, 1e-4);
}

TEST(Nu, Density) {
  EXPECT_NEAR(nu_density(BoundaryPoint::axis2(1)), 1 / kPi, 1e-15);
  EXPECT_NEAR(nu_density(BoundaryPoint::axis1(2)), 8 / (9 * kPi), 1e-15);
  EXPECT_NEAR(8 / (9 * kPi), 0.282942, 1e-6);
  EXPECT_EQ(nu_density(BoundaryPoint::origin()), 0.0);
  EXPECT_THROW(nu_density(BoundaryPoint::axis1(1)), SingularPoint);
}

TEST(Nu, SecondAxisFirstMoment) {
  NuIntegrand<double> g;
  g.value = [](const BoundaryPoint& y) { return y.to_quadrant().x2; };
  g.slope_at_one = 0.0;
  const auto r = nu_integrate(g);
  EXPECT_NEAR(r.value, 1.0, 1e-8);
}

TEST(Nu, ConstantCompensates) {
  NuIntegrand<double> g;
  g.value = [](const BoundaryPoint&) { return 3.5; };
  EXPECT_NEAR(nu_integrate(g).value, 0.0, 1e-14);
}

TEST(Nu, RejectsWrongSlope) {
  NuIntegrand<double> g;
  g.value = [](const BoundaryPoint& y) { return std::sin(y.to_quadrant().x1); };
  g.slope_at_one = 0.0;  // true slope is cos(1)
  EXPECT_THROW(nu_integrate(g), NonIntegrable);
}

TEST(Nu, RejectsSuperlinearGrowth) {
  NuIntegrand<double> g;
  g.value = [](const BoundaryPoint& y) { return y.magnitude() * y.magnitude(); };
  g.slope_at_one = 2.0;
  EXPECT_THROW(nu_integrate(g), NonIntegrable);
}
