// Drives the built projint executable as a subprocess.
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#ifndef PROJINT_CLI
#error "PROJINT_CLI must name the command-line executable"
#endif

namespace {

struct Result {
  int code;
  std::string out;
};

Result sh(const std::string& args) {
  const std::string cmd = std::string(PROJINT_CLI) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string temp_path(const char* name) { return std::string(PROJINT_TMP) + "/" + name; }

}  // namespace

TEST_CASE("usage errors exit 1") {
  Result r = sh("");
  CHECK(r.code == 1);
  r = sh("frobnicate");
  CHECK(r.code == 1);
  CHECK(r.out.find("Usage") != std::string::npos);
  CHECK(sh("figure no-such-figure").code == 1);
  CHECK(sh("figure err-vs-d0 --format xml").code == 1);
  CHECK(sh("stability --alpha 0.2").code == 1);
}

TEST_CASE("help exits 0") { CHECK(sh("--help").code == 0); }

TEST_CASE("stability verdicts") {
  Result r = sh("stability --alpha 0.2 --eps 1e-9 --dt-macro 1e-3 --dt-micro 0.4e-9 --M 40 --scheme PI1");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("STABLE σ=0.00133675", 0) == 0);
  r = sh("stability --alpha 0.2 --eps 1e-9 --dt-macro 1e-3 --dt-micro 0.4e-9 --M 40 --scheme PI2");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("UNSTABLE σ=36.5616", 0) == 0);
  CHECK(r.out.find("σ₂=") != std::string::npos);
  r = sh("stability --alpha 1 --eps 1e-5 --dt-macro 3e-3 --dt-micro 1e-6 --M 100 --micro-order 2");
  CHECK(r.code == 0);
  CHECK(r.out.find("extrapolated") != std::string::npos);
  CHECK(sh("stability --alpha 1 --eps 1e-5 --dt-macro 3e-3 --dt-micro 1e-6 --M 100 --scheme PI3").code == 1);
}

TEST_CASE("figure output") {
  Result r = sh("figure err-vs-d0");
  CHECK(r.code == 0);
  CHECK(r.out.find("scheme,abscissa,error,dev_max,n_macro,micro_evals\n") != std::string::npos);
  CHECK(r.out.find("# fit,PI1,slope=") != std::string::npos);

  const std::string path = temp_path("d0.json");
  r = sh("figure ERR_VS_D0 --format json --out " + path);
  CHECK(r.code == 0);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first == "{");
}

TEST_CASE("diverged points exit 2") {
  const Result r = sh("figure err-vs-dt-micro --out " + temp_path("micro.csv"));
  CHECK(r.code == 2);
  CHECK(r.out.find("diverged") != std::string::npos);
}

TEST_CASE("config runs") {
  const std::string good = temp_path("good.json");
  std::ofstream(good) << R"({"id": "err-vs-d0", "schemes": ["PI2"], "grid": [0.05, 0.1, 0.2]})";
  Result r = sh("run --config " + good);
  CHECK(r.code == 0);
  CHECK(r.out.find("PI2,0.10000000000000001,") != std::string::npos);
  CHECK(r.out.find("PI1,") == std::string::npos);

  const std::string bad = temp_path("bad.json");
  std::ofstream(bad) << R"({"id": "err-vs-d0", "epsilonn": 1e-4})";
  r = sh("run --config " + bad);
  CHECK(r.code == 1);
  CHECK(r.out.find("epsilonn") != std::string::npos);

  CHECK(sh("run --config " + temp_path("missing.json")).code == 1);
}

TEST_CASE("selftest") {
  const Result r = sh("selftest");
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS degenerate_pi_matches_rk4") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}
