#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pslab/dynamics.hpp"
#include "pslab/io.hpp"

using namespace pslab;
namespace fs = std::filesystem;

namespace {

const std::string kCli = PSLAB_CLI_PATH;

struct CmdResult {
  int code;
  std::string out, err;
};

CmdResult run_cli(const std::string& args) {
  fs::path dir = fs::temp_directory_path() / "pslab_cli_io";
  fs::create_directories(dir);
  fs::path of = dir / "stdout.txt", ef = dir / "stderr.txt";
  std::string cmd = kCli + " " + args + " >" + of.string() + " 2>" + ef.string();
  int rc = std::system(cmd.c_str());
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  return {WEXITSTATUS(rc), slurp(of), slurp(ef)};
}

fs::path scratch_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("pslab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("usage errors exit 64") {
  CHECK(run_cli("").code == 64);
  CHECK(run_cli("run").code == 64);
  CHECK(run_cli("frobnicate").code == 64);
  CHECK(run_cli("run harmonic-sanity --no-such-flag").code == 64);
}

TEST_CASE("bad inputs exit 1 with diagnostics") {
  fs::path dir = scratch_dir("badinput");
  CmdResult unknown = run_cli("run no-such-bundled-scenario");
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("error") != std::string::npos);

  fs::path bad = dir / "bad.json";
  std::ofstream(bad) << R"({"check":"meanfield","model":"pendulum","hbar_lst":[0.1]})";
  CmdResult badkey = run_cli("run " + bad.string());
  CHECK(badkey.code == 1);
  CHECK(badkey.err.find("hbar_lst") != std::string::npos);

  fs::path garbled = dir / "garbled.json";
  std::ofstream(garbled) << "{not json";
  CHECK(run_cli("run " + garbled.string()).code == 1);
}

TEST_CASE("preflight-only validates and exits 0") {
  CHECK(run_cli("run harmonic-sanity --preflight-only").code == 0);
}

TEST_CASE("run writes the report bundle and exits 0 on pass") {
  fs::path dir = scratch_dir("run");
  fs::path scen = dir / "scenario.json";
  std::ofstream(scen) << R"({"name":"mini","check":"meanfield","model":"harmonic",
    "initial":"mixture","hbar_list":[0.2,0.1],"T_list":[0.5]})";
  CmdResult r = run_cli("run " + scen.string() + " --out " + dir.string() + " --timing");
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "report.csv"));
  CHECK(fs::exists(dir / "scenario.json"));
  CHECK(fs::exists(dir / "timing.csv"));
  CHECK(fs::exists(dir / "meanfield_scaling.svg"));
  CHECK(fs::exists(dir / "husimi_t0.ppm"));

  std::ifstream is(dir / "report.json");
  nlohmann::json rep = nlohmann::json::parse(is);
  CHECK(rep.at("schema") == "pslab-report-1");
  CHECK(rep.at("all_pass") == true);
  CHECK(rep.at("rows").size() == 2);

  // determinism: a second run reproduces report.json byte for byte
  fs::path dir2 = scratch_dir("run2");
  CmdResult r2 = run_cli("run " + scen.string() + " --out " + dir2.string());
  CHECK(r2.code == 0);
  std::ifstream a(dir / "report.json"), b(dir2 / "report.json");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}

TEST_CASE("tool flow matches the library") {
  CmdResult r = run_cli("tool flow --model harmonic --alpha 1,0 --T 1.5708");
  CHECK(r.code == 0);
  std::stringstream ss(r.out);
  double x, p;
  ss >> x >> p;
  PhasePoint want = flow_point(PhasePoint::of({1, 0}), harmonic_model(1), 1.5708);
  CHECK(x == doctest::Approx(want.alpha(0)).epsilon(1e-6));
  CHECK(p == doctest::Approx(want.alpha(1)).epsilon(1e-6));
}

TEST_CASE("tool husimi/sobolev/propagate round trip through state files") {
  fs::path dir = scratch_dir("tools");
  PhaseSpaceGrid g = make_grid(1, 0.1, -8, 8, 256);
  QuantumState s = coherent_state(g, PhasePoint::of({0.5, 0.3}));
  fs::path sf = dir / "state.pslb";
  save_state(sf.string(), s);

  CmdResult sob = run_cli("tool sobolev " + sf.string() + " --k 1 --alpha 0.5,0.3");
  CHECK(sob.code == 0);
  CHECK(std::stod(sob.out) == doctest::Approx(std::sqrt(0.1)).epsilon(1e-6));

  fs::path hf = dir / "husimi.pslm";
  CHECK(run_cli("tool husimi " + sf.string() + " --out " + hf.string()).code == 0);
  PhaseSpaceMeasure h = load_measure(hf.string());
  CHECK(h.total_mass() == doctest::Approx(1.0).epsilon(1e-6));

  fs::path pf = dir / "prop.pslb";
  CHECK(run_cli("tool propagate " + sf.string() + " --model free --T 1 --out " + pf.string())
            .code == 0);
  QuantumState evolved = load_state(pf.string());
  CHECK(mean_center(evolved).alpha(0) == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("tool wasserstein consumes JSON measures") {
  fs::path dir = scratch_dir("wass");
  PhaseSpaceMeasure a = dirac_measure(1, 0.1, PhasePoint::of({0, 0}).alpha);
  PhaseSpaceMeasure b = dirac_measure(1, 0.1, PhasePoint::of({1, 0}).alpha);
  fs::path fa = dir / "a.json", fb = dir / "b.json";
  std::ofstream(fa) << measure_to_json(a).dump();
  std::ofstream(fb) << measure_to_json(b).dump();
  CmdResult r = run_cli("tool wasserstein " + fa.string() + " " + fb.string() + " --p 2");
  CHECK(r.code == 0);
  CHECK(r.out.find("distance 1") != std::string::npos);
  CHECK(r.out.find("solver exact") != std::string::npos);
}

TEST_CASE("state files reject version mismatches") {
  fs::path dir = scratch_dir("version");
  PhaseSpaceGrid g = make_grid(1, 0.1, -8, 8, 128);
  fs::path sf = dir / "state.pslb";
  save_state(sf.string(), coherent_state(g, PhasePoint::zero(1)));
  // corrupt the format version field (bytes 4..7 after the magic)
  std::fstream f(sf, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(4);
  std::uint32_t v = 999;
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
  f.close();
  CHECK_THROWS(load_state(sf.string()));
}
