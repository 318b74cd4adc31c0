#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SSN_BENCH_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ssn_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("run subcommand writes traces and honours global flags") {
  const fs::path dir = fresh_dir("run");
  std::ofstream(dir / "cfg.json") << R"({
    "problem": {"synthetic": {"n": 50, "d": 3, "seed": 2}},
    "lambda": 0.1,
    "methods": [{"type": "newton"}],
    "seeds": [0]
  })";
  CHECK(run("run --config " + (dir / "cfg.json").string() + " --out-dir " + (dir / "out").string() +
            " --seed 9") == 0);
  CHECK(fs::exists(dir / "out" / "newton_9.csv"));
  CHECK(fs::exists(dir / "out" / "run_metadata.json"));
}

TEST_CASE("exit codes: config errors are 1, runtime failures are 2") {
  const fs::path dir = fresh_dir("codes");
  std::ofstream(dir / "bad.json") << R"({"lambda": 0.1, "methods": []})";
  CHECK(run("run --config " + (dir / "bad.json").string()) == 1);
  std::ofstream(dir / "notjson.json") << "{";
  CHECK(run("run " + (dir / "notjson.json").string()) == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("levscores --dataset " + (dir / "missing.svm").string()) == 2);
  std::ofstream(dir / "broken.svm") << "1 1:1\n1 x\n";
  CHECK(run("condnums --dataset " + (dir / "broken.svm").string()) == 2);
  CHECK(run("certify --synthetic-n 5 --synthetic-d 10") == 1);
}

TEST_CASE("levscores, certify and condnums subcommands") {
  const fs::path dir = fresh_dir("reports");
  std::ofstream(dir / "eye.svm") << "1 1:1\n-1 2:1\n1 3:1\n";
  CHECK(run("levscores --dataset " + (dir / "eye.svm").string() + " --lambda 0 --no-normalize --no-intercept" +
            " --out-dir " + dir.string()) == 0);
  CHECK(fs::exists(dir / "levscores.csv"));
  CHECK(run("levscores --dataset " + (dir / "eye.svm").string() + " --mode fast --sketch-rows 80 --out " +
            (dir / "fast.csv").string()) == 0);
  CHECK(run("certify --synthetic-n 300 --synthetic-d 4 --coherence one_heavy_row --scheme rnorm --trials 10" +
            std::string(" --out-dir ") + dir.string()) == 0);
  CHECK(fs::exists(dir / "certify.json"));
  CHECK(run("condnums --synthetic-n 300 --synthetic-d 4 --out-dir " + dir.string()) == 0);
  CHECK(fs::exists(dir / "condnums.json"));
}
