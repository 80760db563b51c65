// tvws: time-varying wave-shape toolkit front end.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 no result.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tvws/tvws.hpp"

namespace fs = std::filesystem;
using namespace tvws;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;
constexpr int kNoResult = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runtime failure tagged with the stage that raised it.
struct Failure : std::runtime_error {
  Failure(const std::string& stage, const std::string& what) : std::runtime_error(stage + ": " + what) {}
};

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const Failure&) {
    throw;
  } catch (const StageError& e) {
    throw Failure(e.stage(), e.message());
  } catch (const std::exception& e) {
    throw Failure(name, e.what());
  }
}

struct CommonFlags {
  std::optional<double> fs, sigma, I_f, delta;
  std::optional<int> r_max;
  std::string preset = "synthetic";
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--fs", f.fs, "Sampling rate, Hz (required for single-column input)")->check(CLI::PositiveNumber);
  cmd->add_option("--sigma", f.sigma, "STFT window parameter: g(m) = exp(-sigma m^2)")->check(CLI::PositiveNumber);
  cmd->add_option("--If", f.I_f, "Ridge jump bound, Hz")->check(CLI::PositiveNumber);
  cmd->add_option("--delta", f.delta, "Fundamental band half-width, Hz (0 = window half-support)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--rmax", f.r_max, "Largest number of harmonics considered")->check(CLI::PositiveNumber);
  cmd->add_option("--preset", f.preset, "Parameter preset")->check(CLI::IsMember({"synthetic", "eeg", "ip", "ecg"}));
  cmd->add_option("--config", f.config_path, "JSON config with PipelineConfig field names")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--out", f.out, "Output directory (default $TVWS_OUT_DIR or .)");
}

fs::path out_dir(const CommonFlags& f) {
  fs::path p = f.out;
  if (p.empty()) {
    const char* env = std::getenv("TVWS_OUT_DIR");
    p = env && *env ? env : ".";
  }
  stage("write_output", [&] {
    fs::create_directories(p);
    return 0;
  });
  return p;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }
}

void apply_flags(PipelineConfig& c, const CommonFlags& f) {
  if (f.sigma) c.sigma = *f.sigma;
  if (f.I_f) c.I_f = *f.I_f;
  if (f.delta) c.delta = *f.delta;
  if (f.r_max) c.r_max = *f.r_max;
}

PipelineConfig checked(PipelineConfig c) {
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return c;
}

/// Preset, then config file fields, then explicit flags.
PipelineConfig build_config(const CommonFlags& f, const nlohmann::json* j = nullptr) {
  PipelineConfig c;
  try {
    c = preset(f.preset);
    if (j) c = config_from_json(*j, c);
  } catch (const std::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  apply_flags(c, f);
  return checked(c);
}

RealSignal load_input(const std::string& path, const CommonFlags& f) {
  const CsvTable t = stage("read_input", [&] { return read_csv_table(path); });
  if (t.columns.size() == 1 && !f.fs) throw UsageError(path + ": single-column input needs --fs");
  try {
    return signal_from_table(t, f.fs, path);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  } catch (const std::exception& e) {
    throw Failure("read_input", e.what());
  }
}

void write_json(const fs::path& p, const nlohmann::ordered_json& j) {
  stage("write_output", [&] {
    std::ofstream out(p);
    if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed for '" + p.string() + "'");
    return 0;
  });
}

void write_signal(const fs::path& p, const RealSignal& x, const std::string& name = "value") {
  stage("write_output", [&] {
    write_signal_csv(p.string(), x, name);
    return 0;
  });
}

void print_warnings(const std::vector<std::string>& w) {
  for (const auto& s : w) std::cerr << "warning: " << s << "\n";
}

// ---------------------------------------------------------------------------

struct DenoiseArgs {
  std::string input, reference;
};

int cmd_denoise(const DenoiseArgs& a, const CommonFlags& f) {
  const RealSignal x = load_input(a.input, f);
  std::optional<nlohmann::json> j;
  if (!f.config_path.empty()) j = read_json_file(f.config_path);
  const PipelineConfig cfg = build_config(f, j ? &*j : nullptr);
  std::optional<RealSignal> ref;
  if (!a.reference.empty()) {
    ref = load_input(a.reference, f);
    if (ref->size() != x.size()) throw UsageError("reference length differs from the input");
  }
  const fs::path dir = out_dir(f);
  const DenoiseResult d = stage("denoise", [&] { return denoise(x, cfg, ref ? &*ref : nullptr); });
  print_warnings(d.warnings);
  write_signal(dir / "denoised.csv", d.reconstruction);
  write_json(dir / "model.json", to_json(d.model));
  write_json(dir / "metrics.json", d.metrics ? to_json(*d.metrics) : nlohmann::ordered_json{});
  write_json(dir / "report.json", pipeline_report(x, cfg, d));
  std::cout << "r = " << d.model.r << ", fit " << d.diagnostics.iterations << " iterations ("
            << to_string(d.diagnostics.converged_by) << ")";
  if (d.metrics && d.metrics->snr_out) std::cout << ", SNR_out " << *d.metrics->snr_out << " dB";
  std::cout << "\nwrote " << (dir / "denoised.csv").string() << "\n";
  return kOk;
}

struct DecomposeArgs {
  std::string input;
  int K = 2;
  std::vector<std::string> bands;
};

Band parse_band(const std::string& s) {
  const auto c = s.find(':');
  if (c == std::string::npos) throw UsageError("band '" + s + "' must read lo:hi");
  try {
    return Band{std::stod(s.substr(0, c)), std::stod(s.substr(c + 1))};
  } catch (const std::exception&) {
    throw UsageError("band '" + s + "' must read lo:hi");
  }
}

int cmd_decompose(const DecomposeArgs& a, const CommonFlags& f) {
  const RealSignal x = load_input(a.input, f);
  std::vector<PipelineConfig> cfgs;
  if (!f.config_path.empty()) {
    const auto j = read_json_file(f.config_path);
    if (j.is_array()) {
      for (const auto& e : j) cfgs.push_back(build_config(f, &e));
    } else {
      cfgs.push_back(build_config(f, &j));
    }
  } else {
    cfgs.push_back(build_config(f));
  }
  if (!a.bands.empty()) {
    if (a.bands.size() != static_cast<std::size_t>(a.K)) throw UsageError("give one --band per component");
    if (cfgs.size() == 1) cfgs.assign(static_cast<std::size_t>(a.K), cfgs[0]);
    for (std::size_t k = 0; k < cfgs.size(); ++k) cfgs[k].band = parse_band(a.bands[k]);
    for (auto& c : cfgs) c = checked(c);
  }
  if (cfgs.size() != 1 && cfgs.size() != static_cast<std::size_t>(a.K))
    throw UsageError("config array must hold K entries");
  const fs::path dir = out_dir(f);
  const DecomposeResult d = stage("decompose", [&] { return decompose(x, cfgs, a.K); });
  print_warnings(d.warnings);
  for (std::size_t k = 0; k < d.components.size(); ++k) {
    const std::string stem = "component_" + std::to_string(k + 1);
    write_signal(dir / (stem + ".csv"), d.components[k].reconstruction);
    write_json(dir / (stem + "_model.json"), to_json(d.components[k].model));
    print_warnings(d.components[k].warnings);
  }
  write_signal(dir / "residual.csv", d.residual);
  write_json(dir / "report.json", pipeline_report(x, cfgs, d));
  std::cout << "wrote " << d.components.size() << " components and residual to " << dir.string() << "\n";
  return kOk;
}

struct SegmentArgs {
  std::string input;
  std::optional<double> penalty;
};

int cmd_segment(const SegmentArgs& a, const CommonFlags& f) {
  const RealSignal x = load_input(a.input, f);
  std::optional<nlohmann::json> j;
  if (!f.config_path.empty()) j = read_json_file(f.config_path);
  PipelineConfig cfg = build_config(f, j ? &*j : nullptr);
  if (!(j && j->contains("energy_fraction"))) cfg = segmentation_config(cfg);
  SegmentOptions so;
  so.penalty = a.penalty;
  const fs::path dir = out_dir(f);
  const SegmentationResult s = stage("segment", [&] { return segment(x, cfg, so); });
  print_warnings(s.fit.warnings);
  write_json(dir / "segmentation.json", pipeline_report(x, cfg, s));
  const auto t = x.times();
  for (std::size_t h = 0; h < s.haf_traces.size(); ++h) {
    const int l = s.fit.model.harmonics[h].l;
    stage("write_output", [&] {
      write_csv_columns((dir / ("haf_" + std::to_string(l) + ".csv")).string(), {"t", "alpha_" + std::to_string(l)},
                        {t, s.haf_traces[h]});
      return 0;
    });
  }
  if (!s.t_hat) {
    std::cout << "no transition detected\n";
    return kNoResult;
  }
  std::cout << "t_hat = " << *s.t_hat << " s from " << s.per_harmonic.size() << " harmonics\n";
  return kOk;
}

struct BenchArgs {
  std::string experiment = "denoise";
  int shape = 1;
  std::vector<double> snr{0, 5, 10, 15, 20};
  int realizations = 20;
  unsigned jobs = 0;
};

int cmd_bench(const BenchArgs& a, const CommonFlags& f) {
  BenchSpec spec;
  try {
    spec.experiment = experiment_from_string(a.experiment);
    spec.shape = a.shape;
    spec.snr_levels = a.snr;
    spec.n_realizations = a.realizations;
    spec.seed = f.seed;
    spec.jobs = a.jobs;
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  std::optional<nlohmann::json> j;
  if (!f.config_path.empty()) j = read_json_file(f.config_path);
  const PipelineConfig cfg = build_config(f, j ? &*j : nullptr);
  const fs::path dir = out_dir(f);
  const BenchResult r = stage("bench", [&] { return run_bench(spec, cfg); });
  const std::string stem = std::string("bench_") + to_string(spec.experiment);

  stage("write_output", [&] {
    std::ofstream out(dir / (stem + ".csv"));
    if (!out) throw IoError("cannot write the bench table");
    out << "snr_in,method,n,failures,mean,std,median\n";
    for (const auto& c : r.cells)
      out << c.snr_in << "," << c.method << "," << c.n << "," << c.failures << "," << c.mean << "," << c.stddev << ","
          << c.median << "\n";
    std::ofstream tr(dir / (stem + "_trials.csv"));
    if (!tr) throw IoError("cannot write the trial table");
    tr << "snr_in,realization,method,value\n";
    for (const auto& t : r.trials)
      for (const auto& [k, v] : t.values) tr << t.snr_in << "," << t.realization << "," << k << "," << v << "\n";
    return 0;
  });
  write_json(dir / (stem + "_summary.json"), to_json(r));
  for (const auto& c : r.cells)
    std::cout << "snr_in " << c.snr_in << "  " << c.method << ": mean " << c.mean << " median " << c.median << " (n "
              << c.n << ")\n";
  return kOk;
}

struct GenerateArgs {
  std::string kind = "denoise";
  int shape = 1;
  std::optional<double> snr;
  double duration = 1.0;
  bool randomize = false;
  SharpTransitionParams sharp{};
};

int cmd_generate(const GenerateArgs& a, const CommonFlags& f) {
  SyntheticSpec spec;
  if (a.kind == "reconstruction") spec.kind = SignalKind::TvReconstruction;
  else if (a.kind == "denoise") spec.kind = SignalKind::TvDenoise;
  else if (a.kind == "multicomponent") spec.kind = SignalKind::Multicomponent;
  else if (a.kind == "sharp") spec.kind = SignalKind::SharpTransition;
  else throw UsageError("unknown kind '" + a.kind + "'");
  spec.shape = a.shape;
  spec.duration = a.duration;
  spec.fs = f.fs.value_or(2000.0);
  spec.sharp = a.sharp;
  spec.randomize = a.randomize;
  std::pair<RealSignal, GroundTruth> g;
  try {
    g = generate(spec, f.seed);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const fs::path dir = out_dir(f);
  const RealSignal clean(g.second.clean(), g.first.fs, g.first.t0);
  const RealSignal x = a.snr ? add_noise(g.first, *a.snr, mix_seed(f.seed, 7)) : g.first;
  write_signal(dir / "signal.csv", x);
  write_signal(dir / "clean.csv", clean);
  write_json(dir / "truth.json", to_json(g.second));
  std::cout << "wrote " << x.size() << " samples to " << (dir / "signal.csv").string() << "\n";
  return kOk;
}

struct StftArgs {
  std::string input;
  std::size_t n_bins = 0;
  double f_max = 0.0;
};

int cmd_stft(const StftArgs& a, const CommonFlags& f) {
  const RealSignal x = load_input(a.input, f);
  const PipelineConfig cfg = build_config(f);
  const fs::path dir = out_dir(f);
  stage("stft", [&] {
    StftOptions so;
    so.n_bins = a.n_bins;
    so.f_max = a.f_max;
    const Spectrogram s = stft(x, cfg.sigma, so);
    export_spectrogram(s, (dir / "spectrogram.bin").string(), (dir / "spectrogram.json").string());
    return 0;
  });
  std::cout << "wrote " << (dir / "spectrogram.json").string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-varying wave-shape extraction: denoising, decomposition and segmentation"};
  app.require_subcommand(1);
  CommonFlags flags;

  DenoiseArgs dn;
  auto* c_dn = app.add_subcommand("denoise", "Fit the wave-shape model and write the reconstruction");
  c_dn->add_option("input", dn.input, "CSV with columns t,value or value")->required()->check(CLI::ExistingFile);
  c_dn->add_option("--reference", dn.reference, "Noiseless reference CSV for SNR_out")->check(CLI::ExistingFile);
  add_common(c_dn, flags);

  DecomposeArgs dc;
  auto* c_dc = app.add_subcommand("decompose", "Deflationary decomposition into K components");
  c_dc->add_option("input", dc.input, "CSV with columns t,value or value")->required()->check(CLI::ExistingFile);
  c_dc->add_option("-K,--components", dc.K, "Number of components")->check(CLI::PositiveNumber);
  c_dc->add_option("--band", dc.bands, "Fundamental search band lo:hi (Hz), one per component, in fitting order");
  add_common(c_dc, flags);

  SegmentArgs sg;
  auto* c_sg = app.add_subcommand("segment", "Locate a sharp wave-shape transition from the fitted HAFs");
  c_sg->add_option("input", sg.input, "CSV with columns t,value or value")->required()->check(CLI::ExistingFile);
  c_sg->add_option("--penalty", sg.penalty, "Change-point penalty (default 2 ln(N) var)")->check(CLI::NonNegativeNumber);
  add_common(c_sg, flags);

  BenchArgs bn;
  auto* c_bn = app.add_subcommand("bench", "Monte-Carlo experiment grid over input SNR levels");
  c_bn->add_option("--experiment", bn.experiment, "denoise, multicomponent or segmentation")
      ->check(CLI::IsMember({"denoise", "multicomponent", "segmentation"}));
  c_bn->add_option("--shape", bn.shape, "Wave-shape s1..s4 for the denoise experiment")->check(CLI::Range(1, 4));
  c_bn->add_option("--snr", bn.snr, "Input SNR levels, dB")->delimiter(',');
  c_bn->add_option("--realizations", bn.realizations, "Realizations per level")->check(CLI::PositiveNumber);
  c_bn->add_option("--jobs", bn.jobs, "Worker threads (0 = all cores)");
  add_common(c_bn, flags);

  GenerateArgs gn;
  auto* c_gn = app.add_subcommand("generate", "Write a synthetic signal, its noiseless version and the ground truth");
  c_gn->add_option("--kind", gn.kind, "reconstruction, denoise, multicomponent or sharp")
      ->check(CLI::IsMember({"reconstruction", "denoise", "multicomponent", "sharp"}));
  c_gn->add_option("--shape", gn.shape, "Wave-shape s1..s4 for kind denoise")->check(CLI::Range(1, 4));
  c_gn->add_option("--snr", gn.snr, "Add white Gaussian noise at this SNR, dB");
  c_gn->add_option("--duration", gn.duration, "Seconds")->check(CLI::PositiveNumber);
  c_gn->add_flag("--random", gn.randomize, "Sharp transition: draw parameters from the seed");
  c_gn->add_option("--tt", gn.sharp.t_t, "Sharp transition time, s");
  c_gn->add_option("--mu", gn.sharp.mu, "Sharp transition HAF level");
  c_gn->add_option("--lambda", gn.sharp.lambda, "Sharp transition HAF half-step");
  c_gn->add_option("--kappa", gn.sharp.kappa, "Sharp transition steepness");
  c_gn->add_option("--harmonics", gn.sharp.r, "Sharp transition number of harmonics")->check(CLI::Range(2, 20));
  add_common(c_gn, flags);

  StftArgs st;
  auto* c_st = app.add_subcommand("stft", "Export the magnitude spectrogram");
  c_st->add_option("input", st.input, "CSV with columns t,value or value")->required()->check(CLI::ExistingFile);
  c_st->add_option("--bins", st.n_bins, "FFT length (0 = next power of two of N)");
  c_st->add_option("--fmax", st.f_max, "Highest stored frequency, Hz (0 = fs / 2)");
  add_common(c_st, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*c_dn) return cmd_denoise(dn, flags);
    if (*c_dc) return cmd_decompose(dc, flags);
    if (*c_sg) return cmd_segment(sg, flags);
    if (*c_bn) return cmd_bench(bn, flags);
    if (*c_gn) return cmd_generate(gn, flags);
    if (*c_st) return cmd_stft(st, flags);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
