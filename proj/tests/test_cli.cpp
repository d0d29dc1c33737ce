#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rydkerr/cli.hpp"
#include "rydkerr/curve.hpp"
#include "rydkerr/field_map.hpp"
#include "rydkerr/manifest.hpp"
#include "test_support.hpp"

using namespace rydkerr;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rydkerr_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_path() { return test::source_path("configs/cu2o_4k.json"); }

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == exit_usage);
  CHECK(run({"dance"}).code == exit_usage);
  CHECK(run({"spectrum", "--step", "abc"}).code == exit_usage);
  CHECK(run({"extract", "--high", "a.rkf"}).code == exit_usage);
  const auto help = run({"--help"});
  CHECK(help.code == exit_ok);
  CHECK(help.out.find("spectrum") != std::string::npos);
}

TEST_CASE("configuration errors exit with 2") {
  const auto dir = fresh_dir("badconfig");
  std::ofstream(dir / "bad.json") << R"({"gap_energy": "high"})";
  const auto r = run({"--config", (dir / "bad.json").string(), "--out", dir.string(), "spectrum"});
  CHECK(r.code == exit_config);
  CHECK(r.err.find("gap_energy") != std::string::npos);
  CHECK(run({"--config", (dir / "none.json").string(), "--out", dir.string(), "spectrum"}).code == exit_config);
  CHECK(run({"--out", dir.string(), "--blockade", "magic", "spectrum"}).code == exit_usage);
  CHECK(run({"--out", dir.string(), "spectrum", "--eb-min", "-50"}).code == exit_config);
}

TEST_CASE("spectrum output is reproducible") {
  const auto dir = fresh_dir("spectrum");
  const std::vector<std::string> args = {"--config", config_path(), "--out", dir.string(),
                                         "spectrum", "--eb-min", "0", "--eb-max", "5", "--step", "10"};
  REQUIRE(run(args).code == exit_ok);
  const std::string first = slurp(dir / "spectrum.csv");
  REQUIRE(run(args).code == exit_ok);
  CHECK(slurp(dir / "spectrum.csv") == first);
  std::istringstream in(first);
  std::string line;
  std::size_t rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      CHECK(line.rfind("energy_eV,", 0) == 0);
      continue;
    }
    ++rows;
  }
  CHECK(rows == 501);

  SUBCASE("zero chi3_0 gives a vanishing third-order column") {
    REQUIRE(run({"--config", config_path(), "--out", dir.string(), "spectrum", "--eb-min", "0", "--eb-max", "5",
                 "--step", "100", "--chi3-only", "--chi3-0", "0", "--output", "chi3.csv"})
                .code == exit_ok);
    std::istringstream c(slurp(dir / "chi3.csv"));
    bool seen_header = false;
    std::size_t n = 0;
    while (std::getline(c, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!seen_header) {
        seen_header = true;
        CHECK(line == "energy_eV,re_chi3,im_chi3");
        continue;
      }
      const auto a = line.find(',');
      const auto b = line.find(',', a + 1);
      CHECK(std::stod(line.substr(a + 1, b - a - 1)) == 0.0);
      CHECK(std::stod(line.substr(b + 1)) == 0.0);
      ++n;
    }
    CHECK(n == 51);
  }
}

TEST_CASE("synth, extract and fit recover a known phase bump") {
  const auto dir = fresh_dir("chain");
  const std::string out = dir.string();
  REQUIRE(run({"--out", out, "--seed", "11", "synth", "--size", "256", "--power", "1", "--sigma", "100",
               "--kerr-peak", "0.3", "--jitter", "0"})
              .code == exit_ok);
  const auto meta = nlohmann::json::parse(slurp(dir / "synth.json"));
  CHECK(meta["seed"] == 11);
  CHECK(meta["max_kerr_phase_rad"].get<double>() == doctest::Approx(0.3 * (1.0 - 1.0 / 50.0)).epsilon(1e-6));

  const auto ex = run({"--out", out, "--seed", "11", "extract", "--high", (dir / "high.rkf").string(), "--low",
                       (dir / "low.rkf").string(), "--intensity", (dir / "intensity.rkf").string(), "--energy",
                       "2.17", "--border", "8"});
  REQUIRE_MESSAGE(ex.code == exit_ok, ex.err);
  const auto cf = read_curve_csv(dir / "curve.csv");
  REQUIRE(cf.curve.size() > 10);
  REQUIRE(find_meta(cf.meta, "seed"));
  CHECK(*find_meta(cf.meta, "seed") == "11");
  CHECK(*find_meta(cf.meta, "energy_eV") == "2.17");
  const double top = *std::max_element(cf.curve.mean_phase.begin(), cf.curve.mean_phase.end(),
                                       [](double a, double b) { return std::abs(a) < std::abs(b); });
  CHECK(std::abs(top) == doctest::Approx(0.3 * (1.0 - 1.0 / 50.0)).epsilon(0.01 / 0.294));

  const auto fit = run({"--out", out, "--seed", "11", "fit", (dir / "curve.csv").string(), "--transmission", "0.5",
                        "--wavelength", "571"});
  REQUIRE_MESSAGE(fit.code == exit_ok, fit.err);
  const auto report = nlohmann::json::parse(slurp(dir / "curve.fit.json"));
  CHECK(report["seed"] == 11);
  CHECK(report.contains("n2_mm2_per_mW"));
  CHECK(fs::exists(dir / "fit_summary.csv"));

  SUBCASE("a directory of curves is fitted file by file") {
    fs::copy_file(dir / "curve.csv", dir / "curve_b.csv");
    const auto r = run({"--out", out, "fit", out});
    CHECK(r.code == exit_ok);
    CHECK(fs::exists(dir / "curve_b.fit.json"));
    CHECK(r.out.find("fitted 2 of 2") != std::string::npos);
  }
  SUBCASE("images on different grids are rejected") {
    REQUIRE(run({"--out", (dir / "small").string(), "synth", "--size", "128", "--sigma", "50"}).code == exit_ok);
    const auto r = run({"--out", out, "extract", "--high", (dir / "high.rkf").string(), "--low",
                        (dir / "small" / "low.rkf").string(), "--intensity", (dir / "intensity.rkf").string()});
    CHECK(r.code == exit_signal);
    CHECK(r.err.find("low.rkf") != std::string::npos);
  }
  SUBCASE("a malformed curve fails with its file name") {
    std::ofstream(dir / "broken.csv") << "intensity_mW_mm2,dphi_rad,std_rad,npix\n1,x,0,1\n";
    const auto r = run({"--out", out, "fit", (dir / "broken.csv").string()});
    CHECK(r.code == exit_numeric);
    CHECK(r.err.find("broken.csv") != std::string::npos);
  }
}

TEST_CASE("synth is seeded and validates the carrier") {
  const auto a = fresh_dir("seed_a");
  const auto b = fresh_dir("seed_b");
  const auto c = fresh_dir("seed_c");
  const std::vector<std::string> tail = {"synth", "--size", "128", "--sigma", "50", "--read-noise", "0.01"};
  auto with = [&](const fs::path& d, const std::string& seed) {
    std::vector<std::string> args = {"--out", d.string(), "--seed", seed};
    args.insert(args.end(), tail.begin(), tail.end());
    return run(args).code;
  };
  REQUIRE(with(a, "3") == exit_ok);
  REQUIRE(with(b, "3") == exit_ok);
  REQUIRE(with(c, "4") == exit_ok);
  CHECK(slurp(a / "high.rkf") == slurp(b / "high.rkf"));
  CHECK(slurp(a / "high.rkf") != slurp(c / "high.rkf"));

  const auto r = run({"--out", a.string(), "synth", "--size", "64", "--fringe-period", "40"});
  CHECK(r.code == exit_signal);
  CHECK(run({"--out", a.string(), "synth", "--size", "64", "--fringe-period", "1.5"}).code == exit_signal);
  CHECK(run({"--out", a.string(), "synth", "--power", "1", "--peak-intensity", "2"}).code == exit_usage);
}

TEST_CASE("zero Kerr phase gives proportional interferograms") {
  const auto dir = fresh_dir("nokerr");
  REQUIRE(run({"--out", dir.string(), "synth", "--size", "128", "--sigma", "50", "--kerr-peak", "0", "--jitter",
               "0", "--low-ratio", "4"})
              .code == exit_ok);
  const auto high = read_rkf(dir / "high.rkf");
  const auto low = read_rkf(dir / "low.rkf");
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < high.values.size(); ++i) {
    worst = std::max(worst, std::abs(high.values[i] - 4.0 * low.values[i]));
    scale = std::max(scale, std::abs(high.values[i]));
  }
  CHECK(worst <= 1e-6 * scale);
}

TEST_CASE("pipeline reruns only stale steps") {
  const auto dir = fresh_dir("pipeline");
  fs::copy_file(config_path(), dir / "cfg.json");
  std::ofstream(dir / "run.json") << R"({
    "config": "cfg.json", "seed": 9, "output_dir": "out",
    "steps": [
      {"name": "fit", "command": "fit", "args": ["${out}/curve.csv"], "inputs": ["curve.csv"],
       "outputs": ["fit_summary.csv"]},
      {"name": "extract", "command": "extract",
       "args": ["--high", "${out}/high.rkf", "--low", "${out}/low.rkf", "--intensity", "${out}/intensity.rkf"],
       "inputs": ["high.rkf", "low.rkf", "intensity.rkf"], "outputs": ["curve.csv"]},
      {"name": "synth", "command": "synth", "args": ["--size", "128", "--sigma", "50"],
       "outputs": ["high.rkf", "low.rkf", "intensity.rkf"]}
    ]})";
  const auto first = run({"pipeline", (dir / "run.json").string()});
  REQUIRE_MESSAGE(first.code == exit_ok, first.err);
  CHECK(first.out.find("[run] synth") < first.out.find("[run] extract"));
  CHECK(first.out.find("[run] extract") < first.out.find("[run] fit"));
  const std::string summary = slurp(dir / "out" / "fit_summary.csv");
  CHECK(summary.find("# seed=9") != std::string::npos);

  const auto second = run({"pipeline", (dir / "run.json").string()});
  REQUIRE(second.code == exit_ok);
  CHECK(second.out.find("[run]") == std::string::npos);
  CHECK(second.out.find("[skip] fit") != std::string::npos);

  // A tampered output reruns its producer; the restored bytes keep the consumer fresh.
  std::ofstream(dir / "out" / "curve.csv", std::ios::app) << "\n";
  const auto third = run({"pipeline", (dir / "run.json").string()});
  REQUIRE(third.code == exit_ok);
  CHECK(third.out.find("[skip] synth") != std::string::npos);
  CHECK(third.out.find("[run] extract") != std::string::npos);
  CHECK(third.out.find("[skip] fit") != std::string::npos);

  // A new seed invalidates every step.
  std::string manifest = slurp(dir / "run.json");
  manifest.replace(manifest.find("\"seed\": 9"), 9, "\"seed\": 8");
  std::ofstream(dir / "run.json", std::ios::trunc) << manifest;
  const auto fourth = run({"pipeline", (dir / "run.json").string()});
  REQUIRE(fourth.code == exit_ok);
  CHECK(fourth.out.find("[skip]") == std::string::npos);
  CHECK(slurp(dir / "out" / "fit_summary.csv").find("# seed=8") != std::string::npos);
}
