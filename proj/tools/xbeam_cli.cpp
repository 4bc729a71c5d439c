// xbeam: sub-Nyquist ultrasound line acquisition front end.
//
//   xbeam simulate  --scene s.json --out chan/ [--oversample 16] [--seed N]
//   xbeam beamform  --scene s.json --channels chan/ --out ref/ [--focus dynamic]
//   xbeam xample    --scene s.json --channels chan/ --out xs/ --L 30 --rho 2
//   xbeam cost      --L 30 --rho 1,2,3,4 --elements 16 --out cost.csv
//   xbeam compare   --scene s.json --estimates xs/estimates.csv
//                   [--reference ref/reference.pgm] [--xampled xs/xampled.pgm] --out m.csv
//
// Failures print one line "<E_CODE>: message" to stderr and exit nonzero.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xbeam/cost_model.hpp"
#include "xbeam/error.hpp"
#include "xbeam/io.hpp"
#include "xbeam/pipeline.hpp"

namespace fs = std::filesystem;
using namespace xbeam;

namespace {

std::string channel_file_name(std::size_t line) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "line_%04zu.urf", line);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot create '" + path.string() + "'");
  return out;
}

SceneFile load_scene_with_seed(const fs::path& path, std::optional<std::uint64_t> seed) {
  SceneFile scene = load_scene(path);
  if (auto env = env_seed()) scene.noise.seed = *env;
  if (seed) scene.noise.seed = *seed;
  return scene;
}

std::vector<ChannelSet> load_channels(const SceneFile& scene, const fs::path& dir) {
  std::vector<ChannelSet> out;
  for (std::size_t i = 0; i < scene.lines.size(); ++i) {
    const fs::path file = dir / channel_file_name(i);
    if (!fs::exists(file)) throw Error(ErrorCode::Io, "missing channel file '" + file.string() + "'");
    out.push_back(read_urf1(file, scene.array));
  }
  return out;
}

struct Options {
  std::string scene;
  std::string out;
  std::string channels;
  std::string estimates;
  std::string reference;
  std::string xampled;
  std::string focus = "dynamic";
  std::string method = "pencil";
  std::vector<int> rhos{2};
  int L = 30;
  int elements = 16;
  std::optional<int> eta;
  std::optional<double> sv_threshold;
  int oversample = kMinSimOversample;
  std::optional<std::uint64_t> seed;
  double dynamic_range_db = kDefaultDynamicRangeDb;
  int focal_zones = 100;
  double fft_constant = kDefaultFftConstant;
  double depth_m = 0.0788;
  std::optional<std::size_t> lines;
};

// Keeps the first --lines scene lines.
SceneFile restrict_lines(SceneFile scene, std::optional<std::size_t> lines) {
  if (lines) {
    if (*lines > scene.lines.size()) {
      throw Error(ErrorCode::Validation, "--lines exceeds the scene's " +
                                             std::to_string(scene.lines.size()) + " lines");
    }
    scene.lines.resize(*lines);
  }
  return scene;
}

void cmd_simulate(const Options& o) {
  const SceneFile scene = restrict_lines(load_scene_with_seed(o.scene, o.seed), o.lines);
  const auto channels = simulate_scene(scene, o.oversample, env_threads());
  fs::create_directories(o.out);
  for (std::size_t i = 0; i < channels.size(); ++i) {
    write_urf1(fs::path(o.out) / channel_file_name(i), channels[i]);
  }
  std::cout << "wrote " << channels.size() << " URF1 file(s) to " << o.out << "\n";
}

void cmd_beamform(const Options& o) {
  const SceneFile scene = restrict_lines(load_scene(o.scene), o.lines);
  const auto channels = load_channels(scene, o.channels);
  BeamformOptions bo;
  bo.mode = focus_mode_from_string(o.focus);
  bo.num_focal_zones = o.focal_zones;
  const auto res = run_reference(scene, channels, bo, o.dynamic_range_db, env_threads());

  const fs::path dir = o.out;
  fs::create_directories(dir);
  write_pgm(dir / "reference.pgm", res.image);
  auto csv_out = open_out(dir / "reference_lines.csv");
  CsvWriter csv(csv_out);
  csv.row({"line_index", "sample", "t_s", "envelope"});
  for (std::size_t i = 0; i < res.envelopes.size(); ++i) {
    for (std::size_t j = 0; j < res.envelopes[i].size(); ++j) {
      csv.row({std::to_string(i), std::to_string(j),
               format_double(static_cast<double>(j) * bo.out_step),
               format_double(res.envelopes[i][j])});
    }
  }
  std::cout << "focus=" << to_string(bo.mode) << " peak_amplitude=" << res.peak_amplitude
            << " peak_to_background_db=" << res.peak_to_background_db << "\n";
}

RunConfig run_config(const Options& o) {
  RunConfig cfg;
  cfg.L = o.L;
  if (o.rhos.size() != 1) throw Error(ErrorCode::Validation, "xample takes a single --rho");
  cfg.rho = o.rhos.front();
  cfg.focus_mode = focus_mode_from_string(o.focus);
  cfg.method = delay_method_from_string(o.method);
  cfg.eta = o.eta;
  if (o.sv_threshold) cfg.sv_threshold = *o.sv_threshold;
  cfg.sim_oversample = o.oversample;
  cfg.dynamic_range_db = o.dynamic_range_db;
  cfg.threads = env_threads();
  validate(cfg);
  return cfg;
}

void cmd_xample(const Options& o) {
  const RunConfig cfg = run_config(o); // config errors before any I/O or compute
  const SceneFile scene = restrict_lines(load_scene(o.scene), o.lines);
  const auto channels = load_channels(scene, o.channels);
  const auto res = run_xampled(scene, channels, cfg);

  const fs::path dir = o.out;
  fs::create_directories(dir);
  write_pgm(dir / "xampled.pgm", res.image);
  auto csv_out = open_out(dir / "estimates.csv");
  write_estimates_csv(csv_out, res.estimates);
  for (std::size_t i = 0; i < res.estimates.size(); ++i) {
    for (const auto& w : res.estimates[i].warnings) std::cerr << "warning: line " << i << ": " << w << "\n";
  }
  std::cout << "xampled " << res.estimates.size() << " line(s), focus=" << to_string(cfg.focus_mode)
            << " method=" << to_string(cfg.method) << "\n";
}

void cmd_cost(const Options& o) {
  for (int rho : o.rhos) {
    if (rho < 1) throw Error(ErrorCode::Validation, "rho must be >= 1");
  }
  const int standard = standard_samples_per_line(o.depth_m, kNyquistRateHz, 1540.0);
  const auto rows = cost_report(o.L, o.rhos, o.elements, standard, o.fft_constant);
  auto out = open_out(o.out);
  CsvWriter csv(out);
  csv.row({"image_type", "L", "rho", "K", "samples_per_element_per_line", "cost_mops",
           "reduction_factor"});
  for (const auto& r : rows) {
    csv.row({"xampled", std::to_string(r.L), std::to_string(r.rho), std::to_string(r.K),
             std::to_string(r.samples_per_element_per_line), format_double(r.xampled_ops / 1e6),
             format_double(r.reduction_factor)});
  }
  csv.row({"standard", "", "", "", std::to_string(standard),
           format_double(standard_ops(standard, o.elements, o.fft_constant) / 1e6), "1"});
  for (const auto& r : rows) {
    std::printf("rho=%d K=%d samples=%d cost=%.2f MOps reduction=%.1fx\n", r.rho, r.K,
                r.samples_per_element_per_line, r.xampled_ops / 1e6, r.reduction_factor);
  }
}

void cmd_compare(const Options& o) {
  const SceneFile scene = restrict_lines(load_scene(o.scene), o.lines);
  std::ifstream est_in(o.estimates, std::ios::binary);
  if (!est_in) throw Error(ErrorCode::Io, "cannot open '" + o.estimates + "'");
  const auto estimates = read_estimates_csv(est_in);
  std::optional<ImageGrid> ref;
  std::optional<ImageGrid> xs;
  if (!o.reference.empty()) ref = read_pgm(o.reference);
  if (!o.xampled.empty()) xs = read_pgm(o.xampled);
  const auto metrics = compare_estimates(scene, estimates, ref ? &*ref : nullptr, xs ? &*xs : nullptr);
  auto out = open_out(o.out);
  write_metrics_csv(out, metrics);
  std::cout << "compared " << metrics.size() << " line(s)\n";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-Nyquist ultrasound image-line acquisition"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "Synthesize per-element channel data (URF1)");
  sim->add_option("--scene", o.scene, "Scene JSON")->required();
  sim->add_option("--lines", o.lines, "Process only the first N scene lines");
  sim->add_option("--out", o.out, "Output directory")->required();
  sim->add_option("--oversample", o.oversample, "Simulation grid oversampling of 20 MHz (>= 16)");
  sim->add_option("--seed", o.seed, "Noise seed override");

  auto* bf = app.add_subcommand("beamform", "Nyquist-rate reference image");
  bf->add_option("--scene", o.scene, "Scene JSON")->required();
  bf->add_option("--channels", o.channels, "Directory of URF1 files")->required();
  bf->add_option("--lines", o.lines, "Process only the first N scene lines");
  bf->add_option("--out", o.out, "Output directory")->required();
  bf->add_option("--focus", o.focus, "dynamic | infinity | zoned");
  bf->add_option("--focal-zones", o.focal_zones, "Zone count for --focus zoned");
  bf->add_option("--dynamic-range-db", o.dynamic_range_db, "Display dynamic range");

  auto* xs = app.add_subcommand("xample", "Sub-Nyquist sampling and FRI recovery");
  xs->add_option("--scene", o.scene, "Scene JSON")->required();
  xs->add_option("--channels", o.channels, "Directory of URF1 files")->required();
  xs->add_option("--lines", o.lines, "Process only the first N scene lines");
  xs->add_option("--out", o.out, "Output directory")->required();
  xs->add_option("--L", o.L, "Upper bound on reflectors per line");
  xs->add_option("--rho", o.rhos, "Oversampling factor")->delimiter(',');
  xs->add_option("--focus", o.focus, "dynamic | infinity");
  xs->add_option("--method", o.method, "pencil | annihilating");
  xs->add_option("--eta", o.eta, "Pencil parameter");
  xs->add_option("--sv-threshold", o.sv_threshold, "Relative singular-value cutoff");
  xs->add_option("--oversample", o.oversample, "Simulation oversampling the channels used");
  xs->add_option("--dynamic-range-db", o.dynamic_range_db, "Display dynamic range");

  auto* cost = app.add_subcommand("cost", "Sampling-rate and operation-count table");
  cost->add_option("--L", o.L, "Upper bound on reflectors per line");
  cost->add_option("--rho", o.rhos, "Comma-separated oversampling factors")->delimiter(',');
  cost->add_option("--elements", o.elements, "Active receive elements");
  cost->add_option("--fft-constant", o.fft_constant, "Constant of the n log2 n FFT cost");
  cost->add_option("--depth-m", o.depth_m, "Imaging depth for the standard path");
  cost->add_option("--out", o.out, "Output CSV")->required();

  auto* cmp = app.add_subcommand("compare", "Ground-truth metrics for recovered lines");
  cmp->add_option("--scene", o.scene, "Scene JSON")->required();
  cmp->add_option("--estimates", o.estimates, "estimates.csv from xample")->required();
  cmp->add_option("--reference", o.reference, "Reference PGM");
  cmp->add_option("--xampled", o.xampled, "Xampled PGM");
  cmp->add_option("--lines", o.lines, "Process only the first N scene lines");
  cmp->add_option("--out", o.out, "Output metrics CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "E_USAGE: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*sim) cmd_simulate(o);
    if (*bf) cmd_beamform(o);
    if (*xs) cmd_xample(o);
    if (*cost) cmd_cost(o);
    if (*cmp) cmd_compare(o);
  } catch (const Error& e) {
    std::cerr << error_tag(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
