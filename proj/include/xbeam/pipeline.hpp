#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "xbeam/acoustic_sim.hpp"
#include "xbeam/beamform.hpp"
#include "xbeam/imaging.hpp"
#include "xbeam/io.hpp"
#include "xbeam/recovery.hpp"
#include "xbeam/xampling.hpp"

namespace xbeam {

struct RunConfig {
  int L = 30;
  int rho = 2;
  FocusMode focus_mode = FocusMode::dynamic;
  DelayMethod method = DelayMethod::pencil;
  std::optional<int> eta;
  double sv_threshold = kNoisySvThreshold;
  int sim_oversample = kMinSimOversample;
  double dynamic_range_db = kDefaultDynamicRangeDb;
  double axial_step = kDefaultOutStep;
  int threads = 1;
};

// Checks rho/L ranges and the pencil-parameter bound before any compute.
void validate(const RunConfig& cfg);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled exactly once; results must be written to per-index slots.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// Threads from XBEAM_THREADS (default 1), seed override from XBEAM_SEED.
[[nodiscard]] int env_threads();
[[nodiscard]] std::optional<std::uint64_t> env_seed();

/// Noisy channel data for every scene line. Line i uses seed + i.
[[nodiscard]] std::vector<ChannelSet> simulate_scene(const SceneFile& scene, int oversample,
                                                     int threads = 1);

[[nodiscard]] AxialGrid image_axial_grid(double tau, double step = kDefaultOutStep);

struct ReferenceResult {
  std::vector<BeamformedLine> lines;
  std::vector<std::vector<double>> envelopes; // trimmed to the axial grid
  ImageGrid image;
  double peak_amplitude = 0.0;        // max |Phi| over all lines
  double peak_to_background_db = 0.0; // envelope max over median
};

[[nodiscard]] ReferenceResult run_reference(const SceneFile& scene,
                                            const std::vector<ChannelSet>& channels,
                                            const BeamformOptions& opts,
                                            double dynamic_range_db = kDefaultDynamicRangeDb,
                                            int threads = 1);

struct XampledResult {
  std::vector<LineEstimate> estimates;
  ImageGrid image;
};

[[nodiscard]] XampledResult run_xampled(const SceneFile& scene,
                                        const std::vector<ChannelSet>& channels,
                                        const RunConfig& cfg);

struct LineMetrics {
  std::size_t line_index = 0;
  std::size_t num_true = 0;
  std::size_t num_estimated = 0;
  std::size_t num_matched = 0;
  double delay_rmse_s = 0.0;
  double amplitude_rel_error = 0.0;
  long ref_peak_row = -1;
  long xampled_peak_row = -1;
};

inline constexpr double kMatchToleranceS = 50e-9;

/// Ground-truth comparison. True delays are 2 t_n; the expected line
/// amplitude is num_elements * reflectivity. Images are optional.
[[nodiscard]] std::vector<LineMetrics>
compare_estimates(const SceneFile& scene, const std::vector<EstimateRow>& estimates,
                  const ImageGrid* reference, const ImageGrid* xampled);

void write_metrics_csv(std::ostream& os, const std::vector<LineMetrics>& metrics);

} // namespace xbeam
