#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome bench(const std::string& args) {
  const std::string cmd = std::string("\"") + MLMC_BENCH_PATH + "\" " + args + " 2>/dev/null";
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string drop_first_line(const std::string& s) { return s.substr(s.find('\n') + 1); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kGbm = "--model gbm --payoff linear --eps 2e-2 --threads 1";

}  // namespace

TEST_CASE("successful estimate writes a stamped csv to stdout") {
  const auto r = bench("estimate " + kGbm);
  CHECK(r.code == 0);
  CHECK(r.out.rfind("# mlmc-bench ", 0) == 0);
  CHECK(drop_first_line(r.out).rfind("scheme,M,eps,level,N_l,Y_l,V_l,steps,estimate,K,converged,ito\n",
                                     0) == 0);
}

TEST_CASE("configuration errors exit with 1") {
  CHECK(bench("estimate --model vasicek").code == 1);
  CHECK(bench("estimate --bogus").code == 1);
  CHECK(bench("estimate --config /nonexistent/spec.cfg").code == 1);
  CHECK(bench("estimate --eps zero").code == 1);
  CHECK(bench("plot").code == 1);
  CHECK(bench("").code == 1);
}

TEST_CASE("help and version exit with 0") {
  CHECK(bench("--help").code == 0);
  CHECK(bench("cost-scan --help").code == 0);
  const auto v = bench("--version");
  CHECK(v.code == 0);
  CHECK(v.out.rfind("mlmc-bench ", 0) == 0);
}

TEST_CASE("non-convergence exits with 2 and still writes the table") {
  const auto r = bench("estimate --scheme euler --eps 1e-3 --max-level 2 --threads 1");
  CHECK(r.code == 2);
  CHECK(r.out.find(",false,") != std::string::npos);
}

TEST_CASE("flags override the config file and --out writes a file") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto cfg = dir / "mlmc_cli.cfg";
  const auto csv = dir / "mlmc_cli.csv";
  std::filesystem::remove(csv);
  std::ofstream(cfg) << "# gbm run\nmodel=gbm\npayoff=linear\nscheme=euler\neps=0.02\n"
                        "threads=1\nout=" << csv.string() << "\n";

  const auto from_file = bench("estimate --config " + cfg.string());
  CHECK(from_file.code == 0);
  CHECK(from_file.out.empty());
  const std::string text = slurp(csv);
  CHECK(text.rfind("# mlmc-bench ", 0) == 0);
  CHECK(drop_first_line(text).find("\neuler,2,") != std::string::npos);

  const auto overridden =
      bench("estimate --config " + cfg.string() + " --scheme antithetic --refine 3 --out -");
  CHECK(overridden.code == 0);
  CHECK(overridden.out.find("\nantithetic,3,") != std::string::npos);
  CHECK(overridden.out.find("\neuler,") == std::string::npos);
  std::filesystem::remove(cfg);
  std::filesystem::remove(csv);
}

TEST_CASE("param flags reach the model") {
  const auto a = bench("estimate " + kGbm + " --param sigma=0 --scheme euler");
  CHECK(a.code == 0);
  CHECK(a.out.find(",0.0,") != std::string::npos);
  CHECK(bench("estimate " + kGbm + " --param kappa=1").code == 1);
}

TEST_CASE("cost-scan bodies do not depend on the thread count") {
  const std::string args =
      "cost-scan --model gbm --payoff linear --scheme euler --scheme antithetic "
      "--refine 2 --refine 4 --eps 2e-2 --eps 1e-2";
  const auto one = bench(args + " --threads 1");
  const auto many = bench(args + " --threads 8");
  CHECK(one.code == 0);
  CHECK(many.code == 0);
  CHECK(drop_first_line(one.out) == drop_first_line(many.out));
}

TEST_CASE("each subcommand produces its header") {
  CHECK(drop_first_line(bench("variance-scan --samples 100 --max-level 2 --threads 1").out)
            .rfind("scheme,M,level,h_l,V_l,V_l_over_h_l,N_used,ito\n", 0) == 0);
  CHECK(drop_first_line(bench("work-profile " + kGbm).out).rfind("scheme,level,", 0) == 0);
}
