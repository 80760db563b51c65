#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "properties.hpp"
#include "tvws/core/synthetic.hpp"
#include "tvws/shape/demod.hpp"
#include "tvws/shape/nodes.hpp"
#include "tvws/shape/order.hpp"
#include "tvws/shape/warm_start.hpp"

using namespace tvws;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> linear_phase(std::size_t n, double fs, double f) {
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) phi[i] = f * static_cast<double>(i) / fs;
  return phi;
}

RealSignal from_phase(const std::vector<double>& phi, double fs, const std::vector<std::pair<double, double>>& ab) {
  RealSignal x(std::vector<double>(phi.size()), fs);
  for (std::size_t n = 0; n < phi.size(); ++n)
    for (std::size_t l = 0; l < ab.size(); ++l) {
      const double arg = kTwoPi * static_cast<double>(l + 1) * phi[n];
      x[n] += ab[l].first * std::cos(arg) + ab[l].second * std::sin(arg);
    }
  return x;
}

// Exactly demodulated record of the reconstruction signal and its phase.
std::pair<RealSignal, std::vector<double>> demodulated_truth() {
  const auto [x, gt] = generate(SyntheticSpec{});
  const auto& c = gt.components[0];
  const auto s = synthesize(c);
  RealSignal xd(std::vector<double>(s.size()), x.fs);
  for (std::size_t n = 0; n < s.size(); ++n) xd[n] = s[n] / c.B1[n];
  return {xd, c.phi1};
}

std::vector<cplx> envelope_signal(const std::function<double(double)>& env, double fs = 2000.0, std::size_t n = 2000) {
  std::vector<cplx> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    y[i] = std::polar(env(t), kTwoPi * 40.0 * t);
  }
  return y;
}

}  // namespace

TEST(Pchip, ReproducesLines) {
  const std::vector<double> t{0.0, 0.3, 0.35, 0.9, 2.0}, a{1.0, 1.6, 1.7, 2.8, 5.0};
  const Pchip p(t, a);
  for (int q = 0; q <= 200; ++q) {
    const double x = 2.0 * q / 200.0;
    ASSERT_NEAR(p(x), 1.0 + 2.0 * x, 1e-12);
  }
}

TEST(Pchip, InterpolatesNodes) {
  const std::vector<double> t{0.0, 0.5, 1.0}, a{0.0, 1.0, 0.0};
  EXPECT_DOUBLE_EQ(Pchip(t, a)(0.5), 1.0);
  const std::vector<double> q{0.0, 0.5, 1.0};
  EXPECT_EQ(pchip_eval(t, a, q), a);
}

TEST(Pchip, MonotoneDataGivesMonotoneInterpolant) {
  const std::vector<double> t{0.0, 0.1, 0.5, 0.55, 1.0}, a{0.0, 0.01, 0.9, 0.95, 3.0};
  const Pchip p(t, a);
  double prev = p(0.0);
  for (int q = 1; q <= 10000; ++q) {
    const double v = p(q / 10000.0);
    ASSERT_GE(v, prev - 1e-15);
    prev = v;
  }
}

TEST(Pchip, ShapePreservationProperty) {
  const auto o = props::pchip_shape_preservation();
  EXPECT_TRUE(o.pass) << o.detail;
}

TEST(Pchip, SlopeJacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rep % 7;
    std::vector<double> t(n), a(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += 0.1 + u(rng);
      t[i] = acc;
      a[i] = u(rng);
    }
    const auto J = pchip_slope_jacobian(t, a);
    for (std::size_t j = 0; j < n; ++j) {
      auto up = a, dn = a;
      up[j] += 1e-7;
      dn[j] -= 1e-7;
      const auto su = pchip_slopes(t, up), sd = pchip_slopes(t, dn);
      for (std::size_t k = 0; k < n; ++k) {
        const double fd = (su[k] - sd[k]) / 2e-7;
        ASSERT_NEAR(J[k * n + j], fd, 1e-5 * (1.0 + std::abs(fd))) << "k=" << k << " j=" << j;
      }
    }
  }
}

TEST(Pchip, RejectsBadNodes) {
  const std::vector<double> t{0.0, 0.0, 1.0}, a{1.0, 2.0, 3.0};
  EXPECT_THROW(Pchip(t, a), InvalidArgument);
  const std::vector<double> t1{0.0}, a1{1.0};
  EXPECT_THROW(Pchip(t1, a1), InvalidArgument);
}

TEST(NodeCount, ThreeHertzEnvelopeGivesSevenNodes) {
  const auto o = props::node_count_example();
  EXPECT_TRUE(o.pass) << o.detail;
}

TEST(NodeCount, ConstantEnvelopeClampsToTwo) {
  EXPECT_EQ(estimate_node_count(envelope_signal([](double) { return 0.7; }), 2000.0), 2u);
}

TEST(NodeCount, GrowsWithTransitionSteepness) {
  std::size_t prev = 0;
  for (double kappa : {10.0, 50.0, 200.0}) {
    const auto y = envelope_signal([kappa](double t) { return 0.4 + 0.5 * std::tanh(kappa * (t - 0.5)) + 0.6; });
    const std::size_t I = estimate_node_count(y, 2000.0, 0.99);
    EXPECT_GE(I, prev) << "kappa " << kappa;
    prev = I;
  }
  EXPECT_GT(prev, 2u);
}

TEST(NodeCount, CapAndValidation) {
  const auto y = envelope_signal([](double t) { return 1.0 + 0.5 * std::cos(kTwoPi * 20.0 * t); });
  EXPECT_EQ(estimate_node_count(y, 2000.0, 0.99, 5), 5u);
  EXPECT_THROW(estimate_node_count(y, 2000.0, 1.5), InvalidArgument);
  EXPECT_THROW(estimate_node_count(std::vector<cplx>(16), 2000.0), InvalidArgument);
}

TEST(Order, ReconstructionSignalHasThreeHarmonics) {
  const auto [xd, phi] = demodulated_truth();
  EXPECT_EQ(estimate_order(xd, phi, 10), 3);
}

TEST(Order, PureCosineIsFirstOrder) {
  const auto phi = linear_phase(2000, 2000.0, 40.0);
  EXPECT_EQ(estimate_order(from_phase(phi, 2000.0, {{1.0, 0.0}}), phi, 10), 1);
}

TEST(Order, SixHarmonicSurrogate) {
  const auto phi = linear_phase(4000, 1000.0, 1.2);
  auto x = from_phase(phi, 1000.0, {{1.0, 0.0}, {0.5, 0.1}, {0.4, -0.2}, {0.3, 0.05}, {0.25, 0.0}, {0.2, 0.1}});
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 0.02);
  for (double& v : x.samples) v += g(rng);
  EXPECT_EQ(estimate_order(x, phi, 10), 6);
}

TEST(Order, ScaleInvariantAndNyquistLimited) {
  const auto [xd, phi] = demodulated_truth();
  RealSignal y = xd;
  for (double& v : y.samples) v *= 1e3;
  EXPECT_EQ(estimate_order(y, phi, 10), estimate_order(xd, phi, 10));
  const auto sel = select_order(xd, phi, 100);
  EXPECT_LE(sel.r_max_used, nyquist_order_limit(phi, xd.fs));
  EXPECT_FALSE(sel.warnings.empty());
}

TEST(WarmStart, RecoversRegressionCoefficients) {
  const auto phi = linear_phase(2000, 2000.0, 40.0);
  const auto x = from_phase(phi, 2000.0, {{1.0, 0.0}, {0.5, 0.2}});
  const std::vector<std::size_t> counts{4};
  const auto ws = warm_start_with_fit(x, phi, 2, counts);
  ASSERT_EQ(ws.model.harmonics.size(), 1u);
  const auto& h = ws.model.harmonics[0];
  EXPECT_NEAR(ws.lr.a[0], 0.5, 1e-9);
  EXPECT_NEAR(ws.lr.b[0], 0.2, 1e-9);
  EXPECT_NEAR(h.c, 0.4, 1e-9);
  EXPECT_EQ(h.e, 2.0);
  EXPECT_EQ(h.nodes.size(), 4u);
  for (double a : h.nodes.amps) EXPECT_NEAR(a, 0.5, 1e-9);
}

TEST(WarmStart, PureCosineFlagsQuadrature) {
  const auto phi = linear_phase(2000, 2000.0, 40.0);
  const auto x = from_phase(phi, 2000.0, {{1.0, 0.0}});
  const std::vector<std::size_t> counts{3, 3};
  const auto m = warm_start(x, phi, 3, counts);
  for (const auto& h : m.harmonics) {
    for (double a : h.nodes.amps) EXPECT_NEAR(a, 0.0, 1e-12);
    EXPECT_TRUE(h.c_flagged);
    EXPECT_EQ(h.c, 0.0);
  }
}

TEST(WarmStart, EqualsRegressionProjection) {
  const auto o = props::warm_start_matches_lr();
  EXPECT_TRUE(o.pass) << o.detail;
}

TEST(WarmStart, ExtensionAddsPinnedEdgeNodes) {
  const auto phi = linear_phase(1200, 1000.0, 10.0);
  const auto x = from_phase(phi, 1000.0, {{1.0, 0.0}, {0.3, 0.0}});
  const std::vector<std::size_t> counts{5};
  const auto m = warm_start(x, phi, 2, counts, ExtensionMap{100, 100});
  const auto& nd = m.harmonics[0].nodes;
  EXPECT_EQ(nd.size(), 7u);
  EXPECT_EQ(nd.pinned, 2u);
  EXPECT_DOUBLE_EQ(nd.times.front(), 0.0);
  EXPECT_DOUBLE_EQ(nd.times[1], 0.1);
  EXPECT_DOUBLE_EQ(nd.times[5], 1.099);
  EXPECT_THROW(warm_start(x, phi, 2, counts, ExtensionMap{100, 0}), InvalidArgument);
}

TEST(Demodulate, UnitAndDoubledAmplitudes) {
  const RealSignal x({0.5, -1.0, 2.0}, 10.0);
  FundamentalEstimate f;
  f.B1 = {1.0, 1.0, 1.0};
  f.phi1 = {0.0, 0.1, 0.2};
  f.guard = 1e-6;
  EXPECT_EQ(demodulate(x, f).samples, x.samples);
  f.B1 = {2.0, 2.0, 2.0};
  EXPECT_EQ(remodulate(x, f).samples, (std::vector<double>{1.0, -2.0, 4.0}));
  EXPECT_EQ(remodulate(demodulate(x, f), f).samples, x.samples);
}

TEST(Demodulate, GuardBoundsOutput) {
  const RealSignal x({1.0, 1.0}, 10.0);
  FundamentalEstimate f;
  f.B1 = {1e-30, 1.0};
  f.phi1 = {0.0, 0.1};
  f.guard = 0.01;
  const auto y = demodulate(x, f);
  EXPECT_LE(std::abs(y[0]), 1.0 / 0.01 + 1e-12);
}

TEST(Demodulate, ExactFundamentalLeavesCosine) {
  const auto [x, gt] = generate(SyntheticSpec{});
  const auto& c = gt.components[0];
  FundamentalEstimate f;
  f.B1 = c.B1;
  f.phi1 = c.phi1;
  f.guard = 1e-9;
  RealSignal fundamental(std::vector<double>(x.size()), x.fs);
  for (std::size_t n = 0; n < x.size(); ++n) fundamental[n] = c.B1[n] * std::cos(kTwoPi * c.phi1[n]);
  const auto y = demodulate(fundamental, f);
  double num = 0.0, den = 0.0;
  for (std::size_t n = 200; n < 1800; ++n) {
    const double ref = std::cos(kTwoPi * c.phi1[n]);
    num += std::pow(y[n] - ref, 2);
    den += ref * ref;
  }
  EXPECT_LT(std::sqrt(num / den), 0.02);
}

TEST(Model, FirstOrderIsBareCosine) {
  WaveShapeModel m;
  m.fs = 100.0;
  const auto phi = linear_phase(300, 100.0, 3.0);
  const auto y = evaluate_model(m, phi);
  for (std::size_t n = 0; n < phi.size(); ++n) ASSERT_EQ(y[n], std::cos(kTwoPi * phi[n]));
  EXPECT_EQ(m.n_coefficients(), 0u);
}

TEST(Model, ConstantHafsGiveFourierSeries) {
  const auto phi = linear_phase(1000, 1000.0, 7.0);
  WaveShapeModel m;
  m.r = 3;
  m.fs = 1000.0;
  const NodeLayout L{0.0, 0.999, 0.0, 0.999, false};
  for (int l = 2; l <= 3; ++l) {
    HarmonicModel h;
    h.l = l;
    h.e = l;
    h.nodes = equidistant_nodes(L, 4, 0.3 / (l - 1));
    m.harmonics.push_back(h);
  }
  const auto y = evaluate_model(m, phi);
  const auto ref = from_phase(phi, 1000.0, {{1.0, 0.0}, {0.3, 0.0}, {0.15, 0.0}});
  for (std::size_t n = 0; n < phi.size(); ++n) ASSERT_NEAR(y[n], ref[n], 1e-12);
}

TEST(Model, GroundTruthParametersReproduceGenerator) {
  const auto [xd, phi] = demodulated_truth();
  SyntheticSpec spec;
  const auto [x, gt] = generate(spec);
  const auto& c = gt.components[0];
  WaveShapeModel m;
  m.r = 3;
  m.fs = x.fs;
  const NodeLayout L{0.0, x.time(x.size() - 1), 0.0, x.time(x.size() - 1), false};
  for (int l = 2; l <= 3; ++l) {
    HarmonicModel h;
    h.l = l;
    h.e = c.harmonics[static_cast<std::size_t>(l - 1)].e;
    h.nodes = equidistant_nodes(L, 201, 0.0);
    const double a0 = l == 2 ? 0.5 : 0.3, f = l == 2 ? 3.0 : 4.0;
    for (std::size_t i = 0; i < h.nodes.size(); ++i) h.nodes.amps[i] = a0 + 0.25 * std::cos(kTwoPi * f * h.nodes.times[i]);
    m.harmonics.push_back(h);
  }
  const auto y = evaluate_model(m, phi);
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < y.size(); ++n) {
    num += std::pow(y[n] - xd[n], 2);
    den += xd[n] * xd[n];
  }
  EXPECT_LT(std::sqrt(num / den), 1e-3);
}

TEST(Model, FlattenAndJsonRoundTrip) {
  std::mt19937_64 rng(8);
  const auto p = props::random_problem(rng);
  const auto g = flatten(p.truth);
  EXPECT_EQ(g.size(), p.truth.n_coefficients());
  EXPECT_EQ(flatten(unflatten(p.truth, g)), g);
  const auto back = model_from_json(to_json(p.truth));
  EXPECT_EQ(flatten(back), g);
  EXPECT_EQ(back.r, p.truth.r);
  const auto traces = haf_traces(p.truth, 0, p.x.size());
  ASSERT_EQ(traces.size(), p.truth.harmonics.size());
  EXPECT_DOUBLE_EQ(traces[0].front(), p.truth.harmonics[0].nodes.amps.front());
}
