// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "class_signals.hpp"
#include "properties.hpp"
#include "tvws/tvws.hpp"

using namespace tvws;

namespace {

int failures = 0;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

RealSignal white_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  RealSignal x(std::vector<double>(n), 1.0);
  for (double& v : x.samples) v = g(rng);
  return x;
}

void report(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double cell(const BenchResult& r, double snr, const std::string& method, bool use_median = false) {
  const CellStats* c = find_cell(r, snr, method);
  if (!c) return std::nan("");
  return use_median ? c->median : c->mean;
}

std::size_t failed_trials(const BenchResult& r) {
  return static_cast<std::size_t>(std::count_if(r.trials.begin(), r.trials.end(), [](const Trial& t) { return !t.error.empty(); }));
}

void denoising() {
  BenchSpec spec;
  spec.experiment = Experiment::Denoise;
  spec.shape = 1;
  spec.snr_levels = {0.0, 5.0, 10.0, 15.0, 20.0};
  spec.n_realizations = 20;
  const auto r = run_bench(spec);
  const double at20 = cell(r, 20.0, "ours");
  bool beats_lr = true;
  std::string lr;
  for (double s : {5.0, 10.0, 15.0}) {
    const double ours = cell(r, s, "ours"), base = cell(r, s, "lr");
    beats_lr = beats_lr && ours >= base;
    lr += fmt("%g dB %.2f vs %.2f; ", s, ours, base);
  }
  const double soft = cell(r, 0.0, "soft"), hard = cell(r, 0.0, "hard");
  const bool pass = std::abs(at20 - 30.0) <= 3.0 && beats_lr && soft < hard && failed_trials(r) == 0;
  report(1, pass,
         fmt("denoise s1: SNR_out at 20 dB %.2f (30 +/- 3); ours vs LR: ", at20) + lr +
             fmt("0 dB soft %.2f < hard %.2f; failed trials %zu", soft, hard, failed_trials(r)));
}

void reconstruction() {
  const auto [x, gt] = generate(SyntheticSpec{});
  bool ok = true;
  std::string detail;
  try {
    const auto d = denoise(x, preset("synthetic"));
    if (d.model.r < 3) throw Error("fitted order " + std::to_string(d.model.r) + " < 3");
    const double e2 = d.model.harmonics[0].e, e3 = d.model.harmonics[1].e;
    const auto traces = haf_traces(d.model, d.extension.n_pre, x.size());
    const std::size_t a = x.size() / 10, b = x.size() - a;
    double worst = 0.0;
    for (int l = 2; l <= 3; ++l) {
      const auto& truth = gt.components[0].harmonics[static_cast<std::size_t>(l - 1)].alpha;
      const auto& fit = traces[static_cast<std::size_t>(l - 2)];
      double ss = 0.0;
      for (std::size_t n = a; n < b; ++n) ss += (fit[n] - truth[n]) * (fit[n] - truth[n]);
      worst = std::max(worst, std::sqrt(ss / static_cast<double>(b - a)));
    }
    ok = std::abs(e2 - 2.005) <= 0.005 && std::abs(e3 - 2.995) <= 0.005 && worst < 0.05;
    detail = fmt("e2 %.5f (2.005 +/- 0.005), e3 %.5f (2.995 +/- 0.005), interior HAF RMS %.4f (< 0.05)", e2, e3, worst);
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(2, ok, "noiseless reconstruction: " + detail);
}

void multicomponent() {
  BenchSpec spec;
  spec.experiment = Experiment::Multicomponent;
  spec.snr_levels = {10.0};
  spec.n_realizations = 20;
  const auto r = run_bench(spec);
  const double c1 = cell(r, 10.0, "comp1"), l1 = cell(r, 10.0, "comp1_lr");
  const double c2 = cell(r, 10.0, "comp2"), l2 = cell(r, 10.0, "comp2_lr");
  const double sum = cell(r, 10.0, "sum");
  const bool pass = c1 >= l1 && c2 >= l2 && sum >= 10.0 && failed_trials(r) == 0;
  report(3, pass,
         fmt("two components at 10 dB: comp1 %.2f vs LR %.2f, comp2 %.2f vs LR %.2f, sum %.2f (>= 10); failed trials %zu",
                    c1, l1, c2, l2, sum, failed_trials(r)));
}

void segmentation() {
  BenchSpec spec;
  spec.experiment = Experiment::Segmentation;
  spec.snr_levels = {0.0, 10.0, 20.0};
  spec.n_realizations = 20;
  const auto r = run_bench(spec);
  const double m0 = cell(r, 0.0, "ae", true), m10 = cell(r, 10.0, "ae", true), m20 = cell(r, 20.0, "ae", true);
  const bool pass = m10 <= 0.020 && m0 > m10 && m10 > m20 && failed_trials(r) == 0;
  report(4, pass,
         fmt("median AE 0/10/20 dB = %.2f / %.2f / %.2f ms (10 dB <= 20 ms, decreasing); failed trials %zu", 1e3 * m0,
                    1e3 * m10, 1e3 * m20, failed_trials(r)));
}

void properties() {
  std::vector<std::pair<std::string, props::Outcome>> runs;
  runs.emplace_back("pchip shape preservation", props::pchip_shape_preservation(1000, 11));
  runs.emplace_back("LM RSS monotone", props::lm_rss_monotone(100, 21));
  runs.emplace_back("Jacobian agreement", props::jacobian_agreement(20, 31));
  runs.emplace_back("warm start equals LR", props::warm_start_matches_lr(20, 41));
  runs.emplace_back("extend/trim identity", props::extend_trim_identity(20, 51));
  runs.emplace_back("noise SNR", props::noise_snr_consistency());
  runs.emplace_back("node-count example", props::node_count_example());
  bool pass = true;
  std::string detail;
  for (const auto& [name, o] : runs) {
    pass = pass && o.pass;
    detail += name + (o.pass ? " ok" : " FAILED (" + o.detail + ")") + "; ";
  }
  report(5, pass, "property suite: " + detail);
}

void real_classes() {
  bool pass = true;
  std::string detail;
  for (const std::string kind : {"eeg", "ip", "ecg"}) {
    try {
      const auto x = testing::class_signal(kind, 1);
      const auto cfg = testing::class_config(kind);
      if (kind == "ip") {
        auto lo = cfg, hi = cfg;
        lo.band = Band{0.1, 0.6};
        hi.band = Band{0.9, 2.0};
        const auto d = decompose(x, {lo, hi}, 2);
        detail += fmt("ip K=2 r=%d,%d; ", d.components[0].model.r, d.components[1].model.r);
      } else {
        const auto d = denoise(x, cfg);
        const bool finite = std::all_of(d.reconstruction.samples.begin(), d.reconstruction.samples.end(),
                                        [](double v) { return std::isfinite(v); });
        pass = pass && finite;
        detail += fmt("%s r=%d%s; ", kind.c_str(), d.model.r, finite ? "" : " non-finite output");
      }
    } catch (const std::exception& e) {
      pass = false;
      detail += kind + " failed: " + e.what() + "; ";
    }
  }
  std::vector<double> h;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) h.push_back(spectral_entropy(white_noise(5120, seed).view()));
  double mean = 0.0;
  for (double v : h) mean += v / static_cast<double>(h.size());
  pass = pass && std::abs(mean - 7.34) <= 0.05;
  report(6, pass, detail + fmt("white-noise spectral entropy at N = 5120 over 50 seeds %.3f (7.34 +/- 0.05)", mean));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  denoising();
  reconstruction();
  multicomponent();
  segmentation();
  properties();
  real_classes();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d of 6 criteria failed (%.0f s)\n", failures, secs);
  return failures ? 1 : 0;
}
