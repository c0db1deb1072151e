#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

// Drives the installed binary end to end. The test runner passes the
// binary location through ADVQ_BIN.

namespace {

namespace fs = std::filesystem;

std::string binPath() {
  const char* p = std::getenv("ADVQ_BIN");
  REQUIRE_MESSAGE(p != nullptr, "ADVQ_BIN must point at the advq binary");
  return p;
}

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() / ("advq_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void writeFile(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  f << content;
}

std::string readFile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kIdent1 =
    R"({"n": 1, "entries": [{"x": "0", "f": 0}, {"x": "1", "f": 1}]})";
const char* kOr2 =
    R"({"n": 2, "entries": [{"x": "00", "f": 0}, {"x": "01", "f": 1},
        {"x": "10", "f": 1}, {"x": "11", "f": 1}]})";

} // namespace

TEST_CASE("solve, build, verify round trip with exit code 0") {
  TempDir t;
  writeFile(t.path("f.json"), kIdent1);

  CHECK(run(binPath() + " solve --function " + t.path("f.json") + " --out " +
            t.path("d.json") + " > /dev/null") == 0);
  CHECK(fs::exists(t.path("d.json")));

  CHECK(run(binPath() + " build --function " + t.path("f.json") + " --dual " +
            t.path("d.json") + " --out " + t.path("g.json") + " > /dev/null") ==
        0);
  CHECK(fs::exists(t.path("g.json")));

  CHECK(run(binPath() + " verify --function " + t.path("f.json") + " --dual " +
            t.path("d.json") + " --all --out " + t.path("r.json") +
            " > /dev/null") == 0);
  CHECK(readFile(t.path("r.json")).find("\"overall_pass\": true") !=
        std::string::npos);
}

TEST_CASE("missing input file exits 1") {
  TempDir t;
  CHECK(run(binPath() + " verify --function " + t.path("nope.json") +
            " 2> /dev/null") == 1);
  CHECK(run(binPath() + " solve --function " + t.path("nope.json") +
            " --out " + t.path("d.json") + " 2> /dev/null") == 1);
}

TEST_CASE("corrupted dual exits 2 and names the failing invariant") {
  TempDir t;
  writeFile(t.path("f.json"), kIdent1);
  REQUIRE(run(binPath() + " solve --function " + t.path("f.json") + " --out " +
              t.path("d.json") + " > /dev/null") == 0);

  // break feasibility: scale a witness vector
  auto dual = readFile(t.path("d.json"));
  const auto pos = dual.find("\"0,1\": [");
  REQUIRE(pos != std::string::npos);
  dual.replace(pos, 8, "\"0,1\": [5.0, ");
  // 5.0 prepended to the vector would change m; instead rewrite wholesale
  writeFile(t.path("bad.json"),
            R"({"n": 1, "m": 1, "W": 1.0,
                "vectors": {"0,1": [5.0], "1,1": [1.0]}})");

  const std::string cmd = binPath() + " verify --function " + t.path("f.json") +
                          " --dual " + t.path("bad.json") + " --all 2> " +
                          t.path("err.txt") + " > /dev/null";
  CHECK(run(cmd) == 2);
  const auto err = readFile(t.path("err.txt"));
  CHECK(err.find("dual-feasibility") != std::string::npos);
}

TEST_CASE("reports are byte-identical across runs") {
  TempDir t;
  writeFile(t.path("f.json"), kOr2);
  REQUIRE(run(binPath() + " solve --function " + t.path("f.json") + " --out " +
              t.path("d.json") + " > /dev/null") == 0);

  const std::string base = binPath() + " verify --function " + t.path("f.json") +
                           " --dual " + t.path("d.json") + " --seed 7 --all ";
  REQUIRE(run(base + "--out " + t.path("r1.json") + " > /dev/null") == 0);
  REQUIRE(run(base + "--out " + t.path("r2.json") + " > /dev/null") == 0);
  const auto r1 = readFile(t.path("r1.json"));
  CHECK(!r1.empty());
  CHECK(r1 == readFile(t.path("r2.json")));

  // fan-out must not change the bytes either
  REQUIRE(run(base + "--jobs 2 --out " + t.path("r3.json") + " > /dev/null") ==
          0);
  CHECK(r1 == readFile(t.path("r3.json")));
}

TEST_CASE("simulate writes outcome rows") {
  TempDir t;
  writeFile(t.path("f.json"), kIdent1);
  REQUIRE(run(binPath() + " solve --function " + t.path("f.json") + " --out " +
              t.path("d.json") + " > /dev/null") == 0);
  CHECK(run(binPath() + " simulate --function " + t.path("f.json") +
            " --dual " + t.path("d.json") +
            " --alg 3 --all-inputs --trials 2000 --seed 11 --out " +
            t.path("sim.json") + " > /dev/null") == 0);
  const auto sim = readFile(t.path("sim.json"));
  CHECK(sim.find("\"p_one\"") != std::string::npos);
  CHECK(sim.find("\"query_count\"") != std::string::npos);
  CHECK(sim.find("\"successes\"") != std::string::npos);

  // single-lemma scope also works
  CHECK(run(binPath() + " verify --function " + t.path("f.json") + " --dual " +
            t.path("d.json") + " --lemma 3.4 --input 0 > /dev/null") == 0);
}

TEST_CASE("compose reports multiplicativity") {
  TempDir t;
  writeFile(t.path("or2.json"), kOr2);
  CHECK(run(binPath() + " compose --f " + t.path("or2.json") + " --g " +
            t.path("or2.json") + " --out " + t.path("c.json") +
            " > /dev/null") == 0);
  const auto rep = readFile(t.path("c.json"));
  CHECK(rep.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("certify evaluates an adversary matrix against the dual") {
  TempDir t;
  writeFile(t.path("f.json"), kOr2);
  writeFile(t.path("gamma.json"),
            R"({"entries": [{"x": "00", "y": "01", "v": 1.0},
                            {"x": "00", "y": "10", "v": 1.0}]})");
  REQUIRE(run(binPath() + " solve --function " + t.path("f.json") + " --out " +
              t.path("d.json") + " > /dev/null") == 0);
  CHECK(run(binPath() + " certify --function " + t.path("f.json") +
            " --gamma " + t.path("gamma.json") + " --dual " + t.path("d.json") +
            " > " + t.path("cert.txt")) == 0);
  const auto cert = readFile(t.path("cert.txt"));
  CHECK(cert.find("\"weak_duality\": true") != std::string::npos);
  CHECK(cert.find("1.4142135") != std::string::npos);
}

TEST_CASE("ADVQ_CONFIG seeds the configuration and flags override it") {
  TempDir t;
  writeFile(t.path("f.json"), kIdent1);
  writeFile(t.path("cfg.json"), R"({"kappa": 0.25, "seed": 3})");

  // kappa from the config: build succeeds (build allows any kappa)
  REQUIRE(run(binPath() + " solve --function " + t.path("f.json") + " --out " +
              t.path("d.json") + " > /dev/null") == 0);
  CHECK(run("ADVQ_CONFIG=" + t.path("cfg.json") + " " + binPath() +
            " build --function " + t.path("f.json") + " --dual " +
            t.path("d.json") + " --out " + t.path("g.json") + " > /dev/null") ==
        0);
  const auto g = readFile(t.path("g.json"));
  CHECK(g.find("\"kappa\": 0.25") != std::string::npos);

  // verify rejects non-default scaling, from config or flag
  CHECK(run("ADVQ_CONFIG=" + t.path("cfg.json") + " " + binPath() +
            " verify --function " + t.path("f.json") + " 2> /dev/null") == 1);
  // flag override restores the default
  CHECK(run("ADVQ_CONFIG=" + t.path("cfg.json") + " " + binPath() +
            " verify --function " + t.path("f.json") +
            " --kappa 0.3333333333333333 2> /dev/null > /dev/null") == 0);
}
