#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "xbeam/io.hpp"

namespace fs = std::filesystem;
using namespace xbeam;

namespace {

struct Result {
  int status = -1;
  std::string output;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(XBEAM_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

const char* kScene = R"({
  "speed_of_sound_m_s": 1540,
  "tau_s": 102.4e-6,
  "pulse": {"carrier_hz": 5.142e6, "sigma_s": 1e-7},
  "array": {"num_elements": 16, "pitch_m": 0.3e-3},
  "lines": [
    {"scatterers": [{"t_n_s": 6.493506493506494e-6, "reflectivity": 1.0},
                    {"t_n_s": 1.2987012987012988e-5, "reflectivity": 0.6}]},
    {"scatterers": []}
  ]
})";

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("xbeam_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "scene.json") << kScene;
  }
  ~Workspace() { fs::remove_all(dir); }
  [[nodiscard]] std::string p(const std::string& name) const { return (dir / name).string(); }
};

std::vector<std::vector<std::string>> csv_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return read_csv(in);
}

} // namespace

TEST_CASE("full command chain") {
  Workspace ws;
  auto r = run("simulate --scene " + ws.p("scene.json") + " --out " + ws.p("chan"));
  REQUIRE(r.status == 0);
  const auto sf = load_scene(ws.p("scene.json"));
  const auto ch = read_urf1(ws.dir / "chan" / "line_0000.urf", sf.array);
  CHECK(ch.num_elements() == 16);
  CHECK(ch.tau == 102.4e-6);
  const auto empty = read_urf1(ws.dir / "chan" / "line_0001.urf", sf.array);
  CHECK(std::all_of(empty.samples.begin(), empty.samples.end(), [](double v) { return v == 0.0; }));

  r = run("beamform --scene " + ws.p("scene.json") + " --channels " + ws.p("chan") + " --out " +
          ws.p("ref"));
  REQUIRE(r.status == 0);
  const auto ref = read_pgm(ws.dir / "ref" / "reference.pgm");
  CHECK(ref.num_lines == 2);
  CHECK(ref.axial_samples == 2048);
  CHECK(fs::exists(ws.dir / "ref" / "reference_lines.csv"));

  r = run("beamform --scene " + ws.p("scene.json") + " --channels " + ws.p("chan") + " --out " +
          ws.p("ref_inf") + " --focus infinity");
  REQUIRE(r.status == 0);

  for (const char* focus : {"dynamic", "infinity"}) {
    r = run("xample --scene " + ws.p("scene.json") + " --channels " + ws.p("chan") + " --out " +
            ws.p(std::string("xs_") + focus) + " --L 30 --rho 2 --focus " + focus);
    REQUIRE(r.status == 0);
    CHECK(fs::exists(ws.dir / (std::string("xs_") + focus) / "xampled.pgm"));
  }
  const auto rows = csv_rows(ws.p("xs_dynamic/estimates.csv"));
  REQUIRE(rows.size() >= 2);
  CHECK(rows.size() - 1 <= 2 * 30);
  CHECK(rows.size() - 1 == 2);

  r = run("compare --scene " + ws.p("scene.json") + " --estimates " + ws.p("xs_dynamic/estimates.csv") +
          " --reference " + ws.p("ref/reference.pgm") + " --xampled " + ws.p("xs_dynamic/xampled.pgm") +
          " --out " + ws.p("metrics.csv"));
  REQUIRE(r.status == 0);
  const auto metrics = csv_rows(ws.p("metrics.csv"));
  REQUIRE(metrics.size() == 3);
  CHECK(metrics[0][4] == "delay_rmse_s");
  CHECK(std::stod(metrics[1][4]) <= 50e-9);

  r = run("xample --scene " + ws.p("scene.json") + " --channels " + ws.p("chan") + " --out " +
          ws.p("xs_one") + " --lines 1");
  REQUIRE(r.status == 0);
  CHECK(read_pgm(ws.dir / "xs_one" / "xampled.pgm").num_lines == 1);
}

TEST_CASE("cost table") {
  Workspace ws;
  auto r = run("cost --L 30 --rho 1,2,3,4 --elements 17 --out " + ws.p("cost.csv"));
  REQUIRE(r.status == 0);
  const auto rows = csv_rows(ws.p("cost.csv"));
  REQUIRE(rows.size() == 6);
  CHECK(rows[1][3] == "60");
  CHECK(rows[2][3] == "120");
  CHECK(rows[3][3] == "180");
  CHECK(rows[4][3] == "240");
  CHECK(rows[5][0] == "standard");

  r = run("cost --rho 2 --out " + ws.p("one.csv"));
  REQUIRE(r.status == 0);
  CHECK(csv_rows(ws.p("one.csv")).size() == 3);

  r = run("cost --rho 0 --out " + ws.p("bad.csv"));
  CHECK(r.status == 1);
  CHECK(r.output.rfind("E_VALIDATION:", 0) == 0);
}

TEST_CASE("failures are single-line coded errors") {
  Workspace ws;
  std::ofstream(ws.dir / "bad.json") << R"({"speed_of_sound": 1540})";
  auto r = run("simulate --scene " + ws.p("bad.json") + " --out " + ws.p("c"));
  CHECK(r.status == 1);
  CHECK(r.output.rfind("E_PARSE:", 0) == 0);
  CHECK(std::count(r.output.begin(), r.output.end(), '\n') == 1);

  r = run("beamform --scene " + ws.p("scene.json") + " --channels " + ws.p("missing") + " --out " +
          ws.p("r"));
  CHECK(r.status == 1);
  CHECK(r.output.rfind("E_IO:", 0) == 0);

  r = run("xample --scene " + ws.p("scene.json") + " --channels " + ws.p("missing") + " --out " +
          ws.p("x") + " --eta 5");
  CHECK(r.status == 1);
  CHECK(r.output.rfind("E_PRECONDITION:", 0) == 0);

  r = run("simulate --scene " + ws.p("scene.json") + " --out " + ws.p("c") + " --oversample 4");
  CHECK(r.status == 1);
  CHECK(r.output.rfind("E_GRID_TOO_COARSE:", 0) == 0);

  r = run("frobnicate");
  CHECK(r.status == 2);
  CHECK(r.output.rfind("E_USAGE:", 0) == 0);
}
