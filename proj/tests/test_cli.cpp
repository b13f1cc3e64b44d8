#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string cli_path() {
  const char* p = std::getenv("RESNTK_CLI");
  REQUIRE_MESSAGE(p != nullptr, "RESNTK_CLI must point at the CLI binary");
  return p;
}

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >/dev/null 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_twice_identical(const std::string& args, const std::string& out_a,
                           const std::string& out_b) {
  CHECK(run(args + " --out " + out_a) == 0);
  CHECK(run(args + " --out " + out_b) == 0);
  const std::string a = slurp(out_a);
  const std::string b = slurp(out_b);
  CHECK(!a.empty());
  CHECK(a == b);
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("") == 2);
  CHECK(run("nonsense") == 2);
  CHECK(run("variance --format bogus") == 2);
  CHECK(run("regress --config /nonexistent.json") == 2);
}

TEST_CASE("variance output is byte-identical across runs") {
  check_twice_identical(
      "variance --arch densenet --alpha 0.5 --width 16 --depths 2,4 "
      "--draws 300 --seed 7",
      "/tmp/resntk_v_a.csv", "/tmp/resntk_v_b.csv");
  // Thread count must not change the result.
  CHECK(run("variance --arch densenet --alpha 0.5 --width 16 --depths 2,4 "
            "--draws 300 --seed 7 --threads 1 --out /tmp/resntk_v_c.csv") ==
        0);
  CHECK(slurp("/tmp/resntk_v_a.csv") == slurp("/tmp/resntk_v_c.csv"));
}

TEST_CASE("duality output is byte-identical across runs and gates exit") {
  check_twice_identical(
      "duality --arch resnet --m 2 --alphas 0.3,0.3 --width 8 --depth 2 "
      "--k 2,1 --order 2 --draws 4000 --seed 1 --format jsonl",
      "/tmp/resntk_d_a.jsonl", "/tmp/resntk_d_b.jsonl");
}

TEST_CASE("moments output is byte-identical across runs") {
  check_twice_identical(
      "moments --recursion linear --width 16 --layers 2 --draws 4000 --seed 2",
      "/tmp/resntk_m_a.csv", "/tmp/resntk_m_b.csv");
  check_twice_identical(
      "moments --arch vanilla --width 16 --depth 2 --order 2 --draws 2000 "
      "--seed 3",
      "/tmp/resntk_m_c.csv", "/tmp/resntk_m_d.csv");
}

TEST_CASE("kernel output is byte-identical across runs") {
  check_twice_identical(
      "kernel --arch densenet --alpha 0.5 --width 32 --depth 2 --pairs 2 "
      "--T 5 --compare-empirical --tol 1.0 --seed 5",
      "/tmp/resntk_k_a.csv", "/tmp/resntk_k_b.csv");
}

TEST_CASE("regress output is byte-identical across runs") {
  std::ofstream cfg("/tmp/resntk_cfg.json");
  cfg << R"({"dataset": {"synthetic": {"classes": 2, "dim": 8, "per_class": 20,
             "separation": 1.0}},
             "archs": [{"kind": "vanilla", "input_dim": 8, "depth": 2,
                        "width": 8}],
             "kernel": "empirical", "T": 2, "repeats": 2, "seed": 6})";
  cfg.close();
  check_twice_identical("regress --config /tmp/resntk_cfg.json",
                        "/tmp/resntk_r_a.csv", "/tmp/resntk_r_b.csv");
}
