#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

// FIELDELIM_CLI and CONFIG_DIR come from the build.
int run(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string(FIELDELIM_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::string t = (fs::temp_directory_path() / "fe_cli_XXXXXX").string();
    REQUIRE(mkdtemp(t.data()) != nullptr);
    path = t;
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("run, compare and their exit codes") {
  TempDir tmp;
  const fs::path cfg = fs::path(CONFIG_DIR) / "scalar_static.toml";
  const auto log = tmp.path / "log.txt";
  CHECK(run("run --config " + cfg.string() + " --out " + (tmp.path / "a").string(), log) == 0);
  CHECK(fs::exists(tmp.path / "a" / "manifest.json"));

  CHECK(run("compare " + (tmp.path / "a").string() + " " + (tmp.path / "a").string() +
                " --quantity B --threshold 0",
            log) == 0);
  CHECK(slurp(log).find("max rel_diff 0.000000e+00") != std::string::npos);

  CHECK(run("compare " + (tmp.path / "a").string() + " " + (tmp.path / "a").string() +
                " --quantity nothing",
            log) == 4);
  CHECK(slurp(log).find("MissingQuantity") != std::string::npos);

  // a config error prints machine-readable JSON and exits 2
  std::ofstream(tmp.path / "bad.toml") << "engine = \"scalar\"\n[integration]\ndt = -1\n";
  CHECK(run("run --config " + (tmp.path / "bad.toml").string() + " --out " +
                (tmp.path / "b").string(),
            log) == 2);
  CHECK(slurp(log).find("\"error\":\"ConfigInvalid\"") != std::string::npos);
  CHECK(slurp(log).find("integration.dt") != std::string::npos);

  CHECK(run("verify --suite nonsense", log) == 2);
  CHECK(run("frobnicate", log) == 2);
}

TEST_CASE("verify runs a suite and reports every criterion") {
  TempDir tmp;
  const auto log = tmp.path / "log.txt";
  CHECK(run("verify --suite fock --json " + (tmp.path / "r.json").string(), log) == 0);
  const auto text = slurp(log);
  for (const char* id : {"PASS A7", "PASS A8", "PASS A9", "3/3 criteria pass"}) {
    INFO(id);
    CHECK(text.find(id) != std::string::npos);
  }
  CHECK(slurp(tmp.path / "r.json").find("\"id\": \"A8\"") != std::string::npos);
}
