#include "xbeam/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "xbeam/error.hpp"

namespace xbeam {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::Parse, where + " must be an object");
  }
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw Error(ErrorCode::Parse, "unknown key '" + key + "' in " + where);
    }
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::Parse, "missing key '" + key + "' in " + where);
  return *it;
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw Error(ErrorCode::Parse, what + " must be a number");
  return v.get<double>();
}

long long integer(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw Error(ErrorCode::Parse, what + " must be an integer");
  return v.get<long long>();
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <typename T> void put_le(std::ostream& os, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  auto bits = std::bit_cast<U>(value);
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf[i] = static_cast<char>(bits & 0xffu);
    bits >>= 8;
  }
  os.write(buf, sizeof(U));
}

template <typename T> T get_le(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char buf[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(U))) {
    throw Error(ErrorCode::Io, "truncated URF1 stream");
  }
  U bits = 0;
  for (std::size_t i = sizeof(U); i-- > 0;) bits = (bits << 8) | buf[i];
  return std::bit_cast<T>(bits);
}

} // namespace

Scene SceneFile::scene(std::size_t line) const {
  Scene s;
  s.scatterers = lines.at(line).scatterers;
  s.alpha = lines.at(line).alpha;
  s.tau = tau;
  s.noise = noise;
  return s;
}

SceneFile parse_scene(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, "scene JSON syntax error at " + line_col(text, e.byte));
  }
  reject_unknown_keys(doc, {"speed_of_sound_m_s", "tau_s", "pulse", "array", "lines", "noise"},
                      "scene");
  SceneFile sf;
  sf.speed_of_sound = number(require(doc, "speed_of_sound_m_s", "scene"), "speed_of_sound_m_s");
  sf.tau = number(require(doc, "tau_s", "scene"), "tau_s");

  const auto& pulse = require(doc, "pulse", "scene");
  reject_unknown_keys(pulse, {"carrier_hz", "sigma_s", "amplitude"}, "pulse");
  sf.pulse.carrier_hz = number(require(pulse, "carrier_hz", "pulse"), "pulse.carrier_hz");
  sf.pulse.envelope_sigma = number(require(pulse, "sigma_s", "pulse"), "pulse.sigma_s");
  if (pulse.contains("amplitude")) sf.pulse.amplitude = number(pulse["amplitude"], "pulse.amplitude");

  const auto& array = require(doc, "array", "scene");
  reject_unknown_keys(array, {"num_elements", "pitch_m"}, "array");
  sf.array.num_elements =
      static_cast<int>(integer(require(array, "num_elements", "array"), "array.num_elements"));
  sf.array.pitch = number(require(array, "pitch_m", "array"), "array.pitch_m");
  sf.array.speed_of_sound = sf.speed_of_sound;

  const auto& lines = require(doc, "lines", "scene");
  if (!lines.is_array()) throw Error(ErrorCode::Parse, "lines must be an array");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = "lines[" + std::to_string(i) + "]";
    const auto& ln = lines[i];
    reject_unknown_keys(ln, {"alpha_rad", "scatterers"}, where);
    SceneLine sl;
    if (ln.contains("alpha_rad")) sl.alpha = number(ln["alpha_rad"], where + ".alpha_rad");
    const auto& scat = require(ln, "scatterers", where);
    if (!scat.is_array()) throw Error(ErrorCode::Parse, where + ".scatterers must be an array");
    for (std::size_t j = 0; j < scat.size(); ++j) {
      const std::string sw = where + ".scatterers[" + std::to_string(j) + "]";
      reject_unknown_keys(scat[j], {"t_n_s", "reflectivity"}, sw);
      Scatterer s;
      s.axial_time = number(require(scat[j], "t_n_s", sw), sw + ".t_n_s");
      s.reflectivity = number(require(scat[j], "reflectivity", sw), sw + ".reflectivity");
      sl.scatterers.push_back(s);
    }
    sf.lines.push_back(std::move(sl));
  }

  if (doc.contains("noise")) {
    const auto& noise = doc["noise"];
    reject_unknown_keys(noise, {"snr_db", "speckle_count", "seed"}, "noise");
    if (noise.contains("snr_db") && !noise["snr_db"].is_null()) {
      sf.noise.snr_db = number(noise["snr_db"], "noise.snr_db");
    }
    if (noise.contains("speckle_count")) {
      sf.noise.speckle_count = static_cast<int>(integer(noise["speckle_count"], "noise.speckle_count"));
    }
    if (noise.contains("seed")) {
      const auto seed = integer(noise["seed"], "noise.seed");
      if (seed < 0) throw Error(ErrorCode::InvariantViolation, "noise.seed must be >= 0");
      sf.noise.seed = static_cast<std::uint64_t>(seed);
    }
  }

  validate(sf.pulse);
  validate(sf.array);
  for (std::size_t i = 0; i < sf.lines.size(); ++i) {
    try {
      validate(sf.scene(i));
    } catch (const Error& e) {
      throw Error(e.code(), "lines[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return sf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SceneFile load_scene(const std::filesystem::path& path) {
  return parse_scene(read_text_file(path));
}

void write_urf1(std::ostream& os, const ChannelSet& ch) {
  os.write("URF1", 4);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ch.num_elements()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ch.grid_len));
  put_le<double>(os, ch.grid_step);
  put_le<double>(os, ch.tau);
  for (double v : ch.samples) put_le<double>(os, v);
  if (!os) throw Error(ErrorCode::Io, "failed to write URF1 stream");
}

void write_urf1(const std::filesystem::path& path, const ChannelSet& ch) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot create '" + path.string() + "'");
  write_urf1(out, ch);
}

ChannelSet read_urf1(std::istream& is, const ArrayGeometry& geometry) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "URF1", 4) != 0) {
    throw Error(ErrorCode::Io, "not a URF1 stream (bad magic)");
  }
  ChannelSet ch;
  const auto n_el = get_le<std::uint32_t>(is);
  ch.grid_len = get_le<std::uint32_t>(is);
  ch.grid_step = get_le<double>(is);
  ch.tau = get_le<double>(is);
  if (static_cast<int>(n_el) != geometry.num_elements) {
    throw Error(ErrorCode::Validation, "URF1 element count " + std::to_string(n_el) +
                                           " does not match the scene array");
  }
  ch.geometry = geometry;
  ch.samples.resize(static_cast<std::size_t>(n_el) * ch.grid_len);
  for (auto& v : ch.samples) v = get_le<double>(is);
  return ch;
}

ChannelSet read_urf1(const std::filesystem::path& path, const ArrayGeometry& geometry) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return read_urf1(in, geometry);
}

void write_pgm(const std::filesystem::path& path, const ImageGrid& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot create '" + path.string() + "'");
  out << "P5\n" << img.num_lines << " " << img.axial_samples << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw Error(ErrorCode::Io, "failed to write '" + path.string() + "'");
}

ImageGrid read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::string magic;
  std::size_t w = 0;
  std::size_t h = 0;
  int maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || maxval != 255 || !in) {
    throw Error(ErrorCode::Io, "'" + path.string() + "' is not an 8-bit P5 image");
  }
  in.get();
  ImageGrid img;
  img.num_lines = w;
  img.axial_samples = h;
  img.pixels.resize(w * h);
  if (!in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(w * h))) {
    throw Error(ErrorCode::Io, "truncated image '" + path.string() + "'");
  }
  return img;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os_ << ',';
    const auto& f = fields[i];
    if (f.find_first_of(",\"\r\n") != std::string::npos) {
      os_ << '"';
      for (char ch : f) {
        if (ch == '"') os_ << '"';
        os_ << ch;
      }
      os_ << '"';
    } else {
      os_ << f;
    }
  }
  os_ << "\r\n";
}

std::vector<std::vector<std::string>> read_csv(std::istream& is) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  char ch;
  while (is.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (is.peek() == '"') {
          field += '"';
          is.get();
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_estimates_csv(std::ostream& os, const std::vector<LineEstimate>& lines) {
  CsvWriter csv(os);
  csv.row({"line_index", "t_l_s", "b_l", "residual"});
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& est = lines[i];
    for (std::size_t l = 0; l < est.delays.size(); ++l) {
      csv.row({std::to_string(i), format_double(est.delays[l]), format_double(est.amplitudes[l]),
               format_double(est.residual)});
    }
  }
}

std::vector<EstimateRow> read_estimates_csv(std::istream& is) {
  const auto rows = read_csv(is);
  if (rows.empty() || rows[0] != std::vector<std::string>{"line_index", "t_l_s", "b_l", "residual"}) {
    throw Error(ErrorCode::Parse, "estimates CSV must start with header line_index,t_l_s,b_l,residual");
  }
  std::vector<EstimateRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 4) {
      throw Error(ErrorCode::Parse, "estimates CSV row " + std::to_string(r + 1) + " must have 4 fields");
    }
    try {
      out.push_back({std::stoul(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3])});
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, "estimates CSV row " + std::to_string(r + 1) + " is not numeric");
    }
  }
  return out;
}

} // namespace xbeam
