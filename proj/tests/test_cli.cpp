#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hrg/cli.hpp"

using namespace hrg;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "hrg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run({"--version"}).code == kExitOk);
  CHECK(run({}).code == kExitValidation);
  const Run bad_p = run({"--p", "4", "flow"});
  CHECK(bad_p.code == kExitValidation);
  CHECK(bad_p.err.find("p: must be a prime") != std::string::npos);
  CHECK(run({"--eps", "5", "flow"}).code == kExitValidation);
  CHECK(run({"agm", "1", "-2"}).code == kExitValidation);
  CHECK(run({"conformal-check", "--word", "Q(1)"}).code == kExitValidation);
}

TEST_CASE("agm output") {
  const Run r = run({"agm", "1", "1"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("# p = 2") != std::string::npos);
  CHECK(r.out.find("1.5707963267948") != std::string::npos);
}

TEST_CASE("conformal-check reports every identity") {
  const Run r = run({"conformal-check", "--trials", "200", "--seed", "3"});
  CHECK(r.code == kExitOk);
  for (const char* name : {"cross-ratio invariance", "MMD identity", "inversion identity", "Gaussian Mobius covariance"})
    CHECK(r.out.find(name) != std::string::npos);
  CHECK(r.out.find("200/200 pass") != std::string::npos);
}

TEST_CASE("sample output is independent of the thread count") {
  const std::vector<std::string> base{"--S", "2", "--g", "0.0026", "--mu", "0.00085", "--seed", "5",
                                      "sample", "--sweeps", "400", "--burn-in", "100", "--chains", "3"};
  auto one = base, four = base;
  one.insert(one.begin(), {"--threads", "1"});
  four.insert(four.begin(), {"--threads", "4"});
  const Run a = run(one), b = run(four);
  REQUIRE(a.code == kExitOk);
  // The preamble records the thread count; the data rows must agree byte for byte.
  auto body = [](const std::string& s) { return s.substr(s.find("x,y,")); };
  CHECK(body(a.out) == body(b.out));
}

TEST_CASE("TOML configuration") {
  const auto cfg = temp_file("hrg_cli_test.toml", "p = 3\nd = 1\neps = 0.2\nS = 3\n");
  const auto pairs = temp_file("hrg_cli_pairs.txt", "0 1\n0 3\n0:[0,0,0] 0:[2,1,0]\n");
  const Run r = run({"--config", cfg.string(), "correlate", "--pairs", pairs.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("# p = 3") != std::string::npos);
  CHECK(r.out.find("# eps = 0.2") != std::string::npos);
  int rows = 0;
  std::istringstream in(r.out);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#' && line.rfind("x,", 0) != 0) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("fixpoint writes JSON") {
  const auto out = std::filesystem::temp_directory_path() / "hrg_cli_fixpoint.json";
  const Run r = run({"--out", out.string(), "fixpoint", "--rep", "poly"});
  REQUIRE(r.code == kExitOk);
  std::ifstream in(out);
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.find("\"g_star\"") != std::string::npos);
  CHECK(text.find("\"version\"") != std::string::npos);
}
