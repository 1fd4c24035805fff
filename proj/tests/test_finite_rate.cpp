#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "imub/dual_kernels.hpp"
#include "imub/finite_rate.hpp"
#include "imub/harmonic_measure.hpp"
#include "imub/stats.hpp"

using namespace imub;

namespace {

SdeConfig config(double gamma, double c, QuadrantPoint theta, double step, std::uint64_t seed,
                 SdeScheme scheme = SdeScheme::EulerTruncated) {
  SdeConfig cfg;
  cfg.gamma = gamma;
  cfg.c = c;
  cfg.theta = theta;
  cfg.step = step;
  cfg.seed = seed;
  cfg.scheme = scheme;
  return cfg;
}

struct Moments {
  double mean = 0, se = 0;
};

Moments moments(const std::vector<double>& v) {
  double s = 0, s2 = 0;
  for (double x : v) {
    s += x;
    s2 += x * x;
  }
  const double n = static_cast<double>(v.size());
  const double m = s / n;
  return {m, std::sqrt(std::max(s2 / n - m * m, 0.0) / n)};
}

}  // namespace

TEST(SimulateY, NoNoiseFollowsDriftFlow) {
  for (auto scheme : {SdeScheme::EulerTruncated, SdeScheme::SplitCir}) {
    const auto p = simulate_Y(config(0, 1, {1, 2}, 1e-4, 1, scheme), {3, 0.5}, {0.5, 1.0});
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double e = std::exp(-p.times[i]);
      EXPECT_NEAR(p.states[i].x1, 1 + e * 2, 1e-3 * (1 + e * 2));
      EXPECT_NEAR(p.states[i].x2, 2 - e * 1.5, 1e-3 * (2 - e * 1.5));
    }
  }
}

TEST(SimulateY, CoAxialMeanStaysOnAxis) {
  for (auto scheme : {SdeScheme::EulerTruncated, SdeScheme::SplitCir}) {
    const auto p = simulate_Y(config(50, 1, {2, 0}, 1e-3, 2, scheme), {0.5, 0}, {0.1, 0.7, 2.0});
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_EQ(p.states[i].x2, 0.0);
      EXPECT_TRUE(p.in_E[i]);
    }
  }
}

TEST(SimulateY, RecordsRequestedTimes) {
  const std::vector<double> times{0.0, 0.00015, 0.3, 1.0};
  const auto p = simulate_Y(config(1, 1, {1, 1}, 1e-4, 3), {1, 1}, times);
  EXPECT_EQ(p.times, times);
  EXPECT_EQ(p.states[0], (QuadrantPoint{1, 1}));
  EXPECT_EQ(p.provenance.scheme, "euler-truncated");
  EXPECT_THROW(simulate_Y(config(1, 1, {1, 1}, 1e-4, 3), {1, 1}, {0.5, 0.2}), DomainError);
  EXPECT_THROW(simulate_Y(config(1, 1, {1, 1}, 0, 3), {1, 1}, {1}), DomainError);
}

TEST(SimulateY, Deterministic) {
  auto cfg = config(5, 1, {1, 1}, 1e-3, 4);
  cfg.path_index = 17;
  EXPECT_EQ(simulate_Y(cfg, {1, 1}, {1}).states[0], simulate_Y(cfg, {1, 1}, {1}).states[0]);
}

TEST(SimulateY, Nonnegative) {
  for (auto scheme : {SdeScheme::EulerTruncated, SdeScheme::SplitCir})
    for (double gamma : {1.0, 100.0, 1e4})
      for (int i = 0; i < 50; ++i) {
        auto cfg = config(gamma, 1, {1, 0.5}, 1e-3, 5, scheme);
        cfg.path_index = i;
        std::vector<double> times;
        for (int k = 1; k <= 50; ++k) times.push_back(0.02 * k);
        for (const auto& s : simulate_Y(cfg, {1, 1}, times).states) {
          EXPECT_GE(s.x1, 0.0);
          EXPECT_GE(s.x2, 0.0);
        }
      }
}

TEST(SimulateY, BlowupCap) {
  auto cfg = config(1e4, 0, {}, 0.5, 6);
  cfg.magnitude_cap = 2.0;
  EXPECT_THROW(
      {
        for (int i = 0; i < 100; ++i) {
          cfg.path_index = i;
          simulate_Y(cfg, {1, 1}, {100.0});
        }
      },
      NumericalBlowup);
}

TEST(SimulateY, DriftlessCoordinatesAreMartingales) {
  constexpr int n = 20000;
  std::vector<double> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    auto cfg = config(1, 0, {}, 1e-4, 7);
    cfg.path_index = i;
    const auto s = simulate_Y(cfg, {1, 1}, {1.0}).states[0];
    a[i] = s.x1;
    b[i] = s.x2;
  }
  const auto ma = moments(a), mb = moments(b);
  EXPECT_NEAR(ma.mean, 1.0, 4 * ma.se);
  EXPECT_NEAR(mb.mean, 1.0, 4 * mb.se);
}

TEST(SimulateY, SchemesAgreeAtModerateRate) {
  constexpr int n = 20000;
  std::vector<double> e(n), s(n);
  for (int i = 0; i < n; ++i) {
    auto ce = config(1, 1, {1, 1}, 1e-3, 8);
    auto cs = config(1, 1, {1, 1}, 1e-3, 9, SdeScheme::SplitCir);
    ce.path_index = cs.path_index = i;
    const auto ye = simulate_Y(ce, {1, 0}, {1.0}).states[0];
    const auto ys = simulate_Y(cs, {1, 0}, {1.0}).states[0];
    e[i] = ye.x1 - ye.x2;
    s[i] = ys.x1 - ys.x2;
  }
  EXPECT_LE(stats::ks_two_sample(e, s), 0.02);
}

TEST(CirStep, ExactMoments) {
  // Mean and variance of the square-root diffusion transition.
  const double x = 0.3, k = 2.0, mu = 0.5, var = 4.0, dt = 0.1;
  Stream rng(10, 0);
  constexpr int n = 200000;
  std::vector<double> v(n);
  for (auto& y : v) y = detail::cir_step(x, k, mu, var, dt, rng);
  const auto m = moments(v);
  const double e = std::exp(-k * dt);
  const double mean = mu + (x - mu) * e;
  const double variance = x * var * e * (1 - e) / k + mu * var * (1 - e) * (1 - e) / (2 * k);
  EXPECT_NEAR(m.mean, mean, 4 * m.se);
  double s2 = 0;
  for (double y : v) s2 += (y - m.mean) * (y - m.mean);
  EXPECT_NEAR(s2 / n, variance, 0.02 * variance);

  // Zero drift: Feller diffusion with an atom at zero, P(0) = exp(-2x/(var dt)).
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += detail::cir_step(0.1, 0, 0, 1.0, 0.1, rng) == 0.0;
  const double p0 = std::exp(-2 * 0.1 / 0.1);
  EXPECT_NEAR(static_cast<double>(zeros) / n, p0, 4 * std::sqrt(p0 * (1 - p0) / n));
}

TEST(SimulateZ, BoundaryStartIsConstant) {
  const auto p = simulate_Z(3, {0, 2}, 1e-4, 1, {0.5, 10});
  for (const auto& s : p.states) EXPECT_EQ(s, (QuadrantPoint{0, 2}));
}

TEST(SimulateZ, LongTimeLawIsHarmonicMeasure) {
  constexpr int n = 20000;
  std::vector<double> w(n);
  int off = 0;
  for (int i = 0; i < n; ++i) {
    const auto p = simulate_Z(1, {1, 1}, 1e-4, 11, {50.0}, i);
    w[i] = p.states[0].x1 - p.states[0].x2;
    off += !p.in_E[0];
  }
  EXPECT_EQ(off, 0);
  EXPECT_LE(stats::ks_one_sample(w, [](double v) { return q_signed_cdf({1, 1}, v); }), 0.02);
}

TEST(SimulateZ, BrownianScaling) {
  constexpr int n = 20000;
  std::vector<double> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    const auto p = simulate_Z(4, {1, 1}, 1e-4, 12, {0.25}, i).states[0];
    const auto q = simulate_Z(1, {1, 1}, 1e-4, 13, {1.0}, i).states[0];
    a[i] = p.x1 - p.x2;
    b[i] = q.x1 - q.x2;
  }
  EXPECT_LE(stats::ks_two_sample(a, b), 0.02);
}

TEST(DualFlow, Examples) {
  const DualState s{BoundaryPoint::axis1(1), {0, 0}};
  EXPECT_EQ(dual_flow(s, 1, 0), s);
  EXPECT_EQ(dual_flow(s, 0, 5), s);
  const auto r = dual_flow(s, 1, std::log(2.0));
  EXPECT_NEAR(r.y1.magnitude(), 0.5, 1e-15);
  EXPECT_EQ(r.y1.branch(), Branch::Axis1);
  EXPECT_NEAR(r.y2.x1, 0.5, 1e-15);
  EXPECT_EQ(r.y2.x2, 0.0);
}

TEST(DualFlow, Semigroup) {
  const DualState s{BoundaryPoint::axis2(2.5), {0.3, 1.1}};
  const auto a = dual_flow(dual_flow(s, 0.7, 0.4), 0.7, 1.3);
  const auto b = dual_flow(s, 0.7, 1.7);
  EXPECT_NEAR(a.y1.magnitude(), b.y1.magnitude(), 1e-14);
  EXPECT_NEAR(a.y2.x1, b.y2.x1, 1e-14);
  EXPECT_NEAR(a.y2.x2, b.y2.x2, 1e-14);
  EXPECT_THROW(dual_flow(s, 1, -1), DomainError);
}

// E_y[F(Y_t, z)] against E_z[F(y, e^{-ct} Z_t) F(theta, int_0^t c e^{-cr} Z_r dr)].
TEST(FiniteDuality, BothSidesAgree) {
  constexpr int n = 20000;
  const double c = 1, t = 0.5, h = 1e-4;
  const QuadrantPoint y{1, 1}, z{1, 0}, theta{1, 1};
  std::vector<double> lre(n), lim(n), rre(n), rim(n);
  std::vector<double> grid;
  for (int k = 1; k <= 5000; ++k) grid.push_back(k * h);
  for (int i = 0; i < n; ++i) {
    auto cfg = config(1, c, theta, h, 14);
    cfg.path_index = i;
    const auto f = kernel_F(simulate_Y(cfg, y, {t}).states[0], z);
    lre[i] = f.real();
    lim[i] = f.imag();

    const auto zp = simulate_Z(1, z, h, 15, grid, i);
    double i1 = 0.5 * c * z.x1, i2 = 0.5 * c * z.x2;  // r = 0 endpoint
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double wgt = (k + 1 == grid.size() ? 0.5 : 1.0) * c * std::exp(-c * grid[k]);
      i1 += wgt * zp.states[k].x1;
      i2 += wgt * zp.states[k].x2;
    }
    const double e = std::exp(-c * t);
    const auto g = kernel_F(y, e * zp.states.back()) * kernel_F(theta, QuadrantPoint{i1 * h, i2 * h});
    rre[i] = g.real();
    rim[i] = g.imag();
  }
  const auto a = moments(lre), b = moments(rre), ai = moments(lim), bi = moments(rim);
  EXPECT_LE(std::abs(a.mean - b.mean), 4 * std::hypot(a.se, b.se) + 1e-6);
  EXPECT_LE(std::abs(ai.mean - bi.mean), 4 * std::hypot(ai.se, bi.se) + 1e-6);
}

TEST(FiniteRate, MomentDomination) {
  constexpr int n = 10000;
  const double c = 1, t = 1;
  const QuadrantPoint theta{1, 1};
  const double e = std::exp(-c * t);
  const QMeasureParams arg(e * 1 + (1 - e) * theta.x1, (1 - e) * theta.x2);
  for (double gamma : {1.0, 10.0, 100.0}) {
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      auto cfg = config(gamma, c, theta, std::min(1e-3, 0.1 / gamma), 16, SdeScheme::SplitCir);
      cfg.path_index = i;
      const auto s = simulate_Y(cfg, {1, 0}, {t}).states[0];
      a[i] = s.x1;
      b[i] = s.x2;
    }
    const auto ma = moments(a), mb = moments(b);
    EXPECT_LE(ma.mean, q_moment(arg, 1, 1.0) + 3 * ma.se) << gamma;
    EXPECT_LE(mb.mean, q_moment(arg, 2, 1.0) + 3 * mb.se) << gamma;
  }
}
