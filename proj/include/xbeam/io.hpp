#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "xbeam/acoustic_sim.hpp"
#include "xbeam/imaging.hpp"
#include "xbeam/pulse_model.hpp"
#include "xbeam/recovery.hpp"

namespace xbeam {

struct SceneLine {
  double alpha = 0.0;
  std::vector<Scatterer> scatterers;
};

/// Parsed scene document.
struct SceneFile {
  double speed_of_sound = 1540.0;
  double tau = 102.4e-6;
  PulseModel pulse;
  ArrayGeometry array;
  std::vector<SceneLine> lines;
  NoiseSpec noise;

  [[nodiscard]] Scene scene(std::size_t line) const;
};

/// Strict JSON scene parsing: unknown keys are rejected, syntax errors carry
/// line/column, and the per-type invariants are checked.
[[nodiscard]] SceneFile parse_scene(const std::string& text);
[[nodiscard]] SceneFile load_scene(const std::filesystem::path& path);

// URF1: "URF1", u32 num_elements, u32 grid_len, f64 grid_step_s, f64 tau_s,
// then num_elements * grid_len f64 samples, row-major, little-endian.
void write_urf1(const std::filesystem::path& path, const ChannelSet& ch);
void write_urf1(std::ostream& os, const ChannelSet& ch);
// The file carries no geometry; `geometry` must describe the same array.
[[nodiscard]] ChannelSet read_urf1(const std::filesystem::path& path, const ArrayGeometry& geometry);
[[nodiscard]] ChannelSet read_urf1(std::istream& is, const ArrayGeometry& geometry);

// Binary PGM (P5), 8-bit, width = num_lines, height = axial_samples.
void write_pgm(const std::filesystem::path& path, const ImageGrid& img);
[[nodiscard]] ImageGrid read_pgm(const std::filesystem::path& path);

// RFC-4180 style CSV with a header row.
class CsvWriter {
public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void row(const std::vector<std::string>& fields);

private:
  std::ostream& os_;
};

[[nodiscard]] std::vector<std::vector<std::string>> read_csv(std::istream& is);
[[nodiscard]] std::string format_double(double v);

struct EstimateRow {
  std::size_t line_index = 0;
  double t_l_s = 0.0;
  double b_l = 0.0;
  double residual = 0.0;
};

// Columns: line_index, t_l_s, b_l, residual.
void write_estimates_csv(std::ostream& os, const std::vector<LineEstimate>& lines);
[[nodiscard]] std::vector<EstimateRow> read_estimates_csv(std::istream& is);

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

} // namespace xbeam
