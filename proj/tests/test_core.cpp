#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "properties.hpp"
#include "tvws/core/metrics.hpp"
#include "tvws/core/noise.hpp"
#include "tvws/core/synthetic.hpp"

using namespace tvws;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

RealSignal white_noise(std::size_t n, std::uint64_t seed, double fs = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  RealSignal x(std::vector<double>(n), fs);
  for (double& v : x.samples) v = g(rng);
  return x;
}

}  // namespace

TEST(Generate, ReconstructionSignalFirstSample) {
  const auto [x, gt] = generate(SyntheticSpec{});
  ASSERT_EQ(x.size(), 2000u);
  EXPECT_DOUBLE_EQ(x.fs, 2000.0);
  // 0.1 (1 + 0.75 + 0.55) before mean removal
  EXPECT_NEAR(x[0] + gt.mean, 0.23, 1e-12);
  EXPECT_NEAR(mean_of(x.view()), 0.0, 1e-12);
}

TEST(Generate, TruthResynthesizesTheRecord) {
  for (auto kind : {SignalKind::TvReconstruction, SignalKind::Multicomponent}) {
    SyntheticSpec s;
    s.kind = kind;
    const auto [x, gt] = generate(s);
    std::vector<double> sum(x.size(), 0.0);
    for (const auto& c : gt.components) {
      const auto y = synthesize(c);
      for (std::size_t n = 0; n < sum.size(); ++n) sum[n] += y[n];
    }
    for (std::size_t n = 0; n < x.size(); ++n) ASSERT_NEAR(sum[n] - x[n], gt.mean, 1e-12);
  }
}

TEST(Generate, MulticomponentPhaseRatios) {
  SyntheticSpec s;
  s.kind = SignalKind::Multicomponent;
  const auto [x, gt] = generate(s);
  ASSERT_EQ(gt.components.size(), 2u);
  const auto& a = gt.components[0].harmonics;
  const auto& b = gt.components[1].harmonics;
  ASSERT_EQ(a.size(), 3u);
  ASSERT_EQ(b.size(), 4u);
  EXPECT_DOUBLE_EQ(a[1].e, 2.005);
  EXPECT_DOUBLE_EQ(a[2].e, 3.003);
  EXPECT_DOUBLE_EQ(b[1].e, 2.002);
  EXPECT_DOUBLE_EQ(b[2].e, 3.002);
  EXPECT_DOUBLE_EQ(b[3].e, 3.998);
}

TEST(Generate, SharpTransitionWithoutJumpHasConstantHafs) {
  SyntheticSpec s;
  s.kind = SignalKind::SharpTransition;
  s.sharp.lambda = 0.0;
  const auto [x, gt] = generate(s);
  for (const auto& h : gt.components[0].harmonics) {
    const auto [lo, hi] = std::minmax_element(h.alpha.begin(), h.alpha.end());
    EXPECT_NEAR(*hi - *lo, 0.0, 1e-12);
  }
}

TEST(Generate, RandomizedTransitionIsDeterministicPerSeed) {
  SyntheticSpec s;
  s.kind = SignalKind::SharpTransition;
  s.randomize = true;
  const auto [x1, g1] = generate(s, 7);
  const auto [x2, g2] = generate(s, 7);
  const auto [x3, g3] = generate(s, 8);
  EXPECT_EQ(x1.samples, x2.samples);
  EXPECT_NE(x1.samples, x3.samples);
  ASSERT_TRUE(g1.transition_time);
  EXPECT_GE(*g1.transition_time, 0.1);
  EXPECT_LE(*g1.transition_time, 0.9);
}

TEST(Generate, RejectsBadSpecs) {
  SyntheticSpec s;
  s.fs = 0.0;
  EXPECT_THROW(generate(s), InvalidArgument);
  s = {};
  s.kind = SignalKind::TvDenoise;
  s.shape = 5;
  EXPECT_THROW(generate(s), InvalidArgument);
}

TEST(Noise, HitsRequestedSnrAndIsDeterministic) {
  const auto [x, gt] = generate(SyntheticSpec{});
  for (double snr : {0.0, 20.0}) {
    const auto y = add_noise(x, snr, 3);
    EXPECT_NEAR(snr_out(x, y), snr, 1e-9);
    EXPECT_EQ(y.samples, add_noise(x, snr, 3).samples);
    EXPECT_NE(y.samples, add_noise(x, snr, 4).samples);
  }
}

TEST(Noise, ConsistencyProperty) {
  const auto o = props::noise_snr_consistency();
  EXPECT_TRUE(o.pass) << o.detail;
}

TEST(Metrics, SnrOutEdgeCases) {
  const RealSignal x({1.0, -2.0, 3.0}, 1.0);
  EXPECT_EQ(snr_out(x, x), std::numeric_limits<double>::infinity());
  const RealSignal zero({0.0, 0.0, 0.0}, 1.0);
  EXPECT_NEAR(snr_out(x, zero), 0.0, 1e-12);
  const RealSignal half({0.5, -1.0, 1.5}, 1.0);
  EXPECT_NEAR(snr_out(x, half), 20.0 * std::log10(2.0), 1e-12);
}

TEST(Metrics, AutocorrelationOfWhiteNoise) {
  const auto x = white_noise(4000, 5);
  const auto acf = autocorrelation(x.view(), 200);
  EXPECT_NEAR(acf[0], 1.0, 1e-12);
  const double band = 1.96 / std::sqrt(4000.0);
  int inside = 0;
  for (std::size_t k = 1; k < acf.size(); ++k) inside += std::abs(acf[k]) <= band;
  EXPECT_GE(inside, 180);  // about 95% of 200 lags
}

TEST(Metrics, SpectralEntropy) {
  RealSignal tone(std::vector<double>(5120), 1000.0);
  for (std::size_t n = 0; n < tone.size(); ++n) tone[n] = std::sin(kTwoPi * 100.0 * tone.time(n));
  const double h_tone = spectral_entropy(tone.view());
  const double h_noise = spectral_entropy(white_noise(5120, 9).view());
  EXPECT_LT(h_tone, 2.0);
  EXPECT_NEAR(h_noise, 7.34, 0.15);
  EXPECT_LE(h_noise, std::log2(5120.0 / 16.0 / 2.0 + 1.0));
}

TEST(Metrics, PearsonAndResidualReport) {
  const auto a = white_noise(1000, 1);
  EXPECT_NEAR(pearson(a.view(), a.view()), 1.0, 1e-12);
  RealSignal b = a;
  for (double& v : b.samples) v = -2.0 * v + 1.0;
  EXPECT_NEAR(pearson(a.view(), b.view()), -1.0, 1e-12);
  const auto m = residual_metrics(white_noise(1000, 2, 100.0), white_noise(1000, 3, 100.0));
  EXPECT_FALSE(m.snr_out);
  // the reported band is one standard deviation of a white-noise lag
  EXPECT_NEAR(m.acf_band, 1.0 / std::sqrt(1000.0), 1e-15);
  EXPECT_NEAR(m.acf_inside_fraction, 0.68, 0.06);
  EXPECT_LT(std::abs(m.pcc), 0.1);
}
