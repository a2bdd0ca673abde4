#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Scratch space shared by the whole suite; cleaned up by the fixture of the
// last test via static destruction order (the OS temp dir is the backstop).
const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("offsetctrl-cli-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string scratch_file(const std::string& name) {
  return (scratch() / name).string();
}

const std::string& cli_bin() {
  static const std::string bin = [] {
    const char* env = std::getenv("OFFSETCTRL_BIN");
    return std::string(env ? env : "");
  }();
  return bin;
}

RunResult run_cli(const std::string& args) {
  RunResult result;
  const std::string out_path = scratch_file("stdout.txt");
  const std::string cmd =
      "\"" + cli_bin() + "\" " + args + " > \"" + out_path + "\" 2> \"" +
      scratch_file("stderr.txt") + "\"";
  const int status = std::system(cmd.c_str());
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  return result;
}

// Open-loop stable first-order plant; everything about it is fast.
std::string write_stable_plant() {
  const std::string path = scratch_file("plant.json");
  std::ofstream out(path);
  out << R"({"A": [[-1.0]], "B": [[1.0]], "h": 1.0, "label": "stable scalar"})";
  return path;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("binary path is provided") {
  REQUIRE_FALSE(cli_bin().empty());
  REQUIRE(fs::exists(cli_bin()));
}

TEST_CASE("discretize prints the sampled realization as JSON") {
  const std::string plant = write_stable_plant();
  const RunResult r = run_cli("discretize \"" + plant + "\" --delta 0.25");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("\"F\"") != std::string::npos);
  CHECK(r.out.find("\"G\"") != std::string::npos);
  CHECK(r.out.find("\"delta\"") != std::string::npos);
}

TEST_CASE("malformed input exits with the input-error code") {
  const std::string path = scratch_file("broken.json");
  {
    std::ofstream out(path);
    out << "{ this is not json";
  }
  const RunResult r = run_cli("discretize \"" + path + "\" --delta 0.1");
  CHECK(r.exit_code == 2);
}

TEST_CASE("missing required flags exit with the input-error code") {
  const std::string plant = write_stable_plant();
  const RunResult r = run_cli("discretize \"" + plant + "\"");
  CHECK(r.exit_code == 2);
}

TEST_CASE("scalar-bounds writes one row per analysis plus a header") {
  const std::string out = scratch_file("bounds.csv");
  const RunResult r = run_cli("scalar-bounds --a 1.0 --h 1.0 --out \"" + out + "\"");
  REQUIRE(r.exit_code == 0);
  const auto lines = split_lines(slurp(out));
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] ==
        "bound,theta_lo,theta_hi,delta_lo,delta_hi,delta_length,endpoints");
  bool saw_lti = false;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i]);
    REQUIRE(fields.size() == 7);
    if (fields[0] == "lti") {
      saw_lti = true;
      const double length = std::stod(fields[5]);
      const double want =
          2.0 * std::log((std::exp(1.0) + 1.0) / (std::exp(1.0) - 1.0));
      CHECK(std::abs(length - want) < 1e-3);
    }
    CHECK(fields[6] == "open");
  }
  CHECK(saw_lti);
}

TEST_CASE("synthesize, sweep and simulate chain through their file formats") {
  const std::string plant = write_stable_plant();
  const std::string ctrl = scratch_file("controller.json");

  // Degenerate interval: no robustness constraint, so the run is fast and
  // must report feasibility.
  const RunResult syn = run_cli(
      "synthesize \"" + plant + "\" --interval 0,0 --q-order 2 --grid 128 " +
      "--restarts 1 --iterations 10 --sweep-points 9 --out \"" + ctrl + "\"");
  REQUIRE(syn.exit_code == 0);
  CHECK(fs::exists(ctrl));
  CHECK(syn.out.find("\"feasible\": true") != std::string::npos);
  CHECK(syn.out.find("\"gamma\": \"inf\"") != std::string::npos);

  const std::string sweep_csv = scratch_file("sweep.csv");
  const RunResult sw = run_cli("sweep \"" + plant + "\" \"" + ctrl +
                               "\" --grid 21 --out \"" + sweep_csv + "\"");
  REQUIRE(sw.exit_code == 0);
  const auto sweep_lines = split_lines(slurp(sweep_csv));
  REQUIRE(sweep_lines.size() == 22);
  CHECK(sweep_lines[0] == "delta,spectral_radius,stable");
  CHECK(sw.out.find("stable_runs") != std::string::npos);

  const std::string traj_csv = scratch_file("traj.csv");
  const std::string fine_csv = scratch_file("fine.csv");
  const RunResult sim = run_cli("simulate \"" + plant + "\" \"" + ctrl +
                                "\" --delta 0.1 --steps 5 --out \"" + traj_csv +
                                "\" --fine-out \"" + fine_csv + "\"");
  REQUIRE(sim.exit_code == 0);
  const auto traj_lines = split_lines(slurp(traj_csv));
  REQUIRE(!traj_lines.empty());
  CHECK(traj_lines[0].rfind("t,x_1,xhat_1", 0) == 0);
  CHECK(traj_lines.size() == 7);  // header + steps + 1
  const auto fine_lines = split_lines(slurp(fine_csv));
  CHECK(fine_lines[0] == "t,x_1,xhat_1");
  CHECK(sim.out.find("\"steps\": 5") != std::string::npos);
}

TEST_CASE("figure dataset for the length-versus-period curve is generated") {
  const std::string out = scratch_file("fig4.csv");
  const RunResult r = run_cli("figure fig4 --out \"" + out + "\"");
  REQUIRE(r.exit_code == 0);
  const auto lines = split_lines(slurp(out));
  REQUIRE(lines.size() >= 100);
  CHECK(lines[0] == "h,length,clip_active");
  // The curve starts in the clipped (short-period) regime.
  const auto first = split_fields(lines[1]);
  REQUIRE(first.size() == 3);
  CHECK(first[2] == "1");
}

TEST_SUITE_END();
