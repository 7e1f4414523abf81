#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "raogeo_cli/cli.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
  json doc() const { return json::parse(out); }
};

Outcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = raogeo::cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

// Runs the installed binary so exit statuses and the environment are real.
Outcome run_binary(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + RAOGEO_CLI_PATH + " " + args + " 2>/dev/null";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) o.out.append(buf, n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("raogeo_cli_" + std::to_string(counter_++) + "_" +
                                                  std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& content = "") const {
    const fs::path p = path_ / name;
    if (!content.empty()) std::ofstream(p) << content;
    return p.string();
  }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST(Cli, FisherEnvelope) {
  const Outcome o = run_cli({"fisher", "--family", "poisson", "--theta", "4"});
  ASSERT_EQ(o.code, raogeo::cli::kExitOk) << o.err;
  const json d = o.doc();
  EXPECT_EQ(d["result"]["matrix"][0][0].get<double>(), 0.25);
  for (const char* key : {"config_echo", "result", "residuals", "versions", "wall_time_ms"})
    EXPECT_TRUE(d.contains(key)) << key;
  EXPECT_EQ(d["versions"]["schema"], raogeo::cli::kSchemaVersion);
  EXPECT_EQ(d["config_echo"]["command"], "fisher");
  EXPECT_EQ(d["config_echo"]["args"]["method"], "analytic");
}

TEST(Cli, FisherQuadratureMethods) {
  for (const char* m : {"score-outer", "neg-hessian", "sqrt-form"}) {
    const Outcome o = run_cli({"fisher", "--family", "gaussian1d", "--chart", "mu-sigma", "--theta",
                               "0", "2", "--method", m});
    ASSERT_EQ(o.code, 0) << o.err;
    const json mat = o.doc()["result"]["matrix"];
    EXPECT_NEAR(mat[0][0].get<double>(), 0.25, 1e-8) << m;
    EXPECT_NEAR(mat[1][1].get<double>(), 0.5, 1e-8) << m;
  }
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({"fisher", "--family", "poisson"}).code, raogeo::cli::kExitUsage);
  EXPECT_EQ(run_cli({"fisher", "--family", "gamma", "--theta", "1"}).code, 2);
  EXPECT_EQ(run_cli({"fisher", "--family", "poisson", "--theta", "-1"}).code, 2);
  EXPECT_EQ(run_cli({"fisher", "--family", "poisson", "--theta", "abc"}).code, 2);
  EXPECT_EQ(run_cli({"bogus"}).code, 2);
  EXPECT_EQ(run_cli({"crlb-sim", "--family", "poisson", "--theta", "3", "--estimator", "mean",
                     "--n", "10", "--replicates", "10"})
                .code,
            2);
  const Outcome o = run_cli({"fisher", "--family", "poisson"});
  EXPECT_TRUE(o.out.empty());
  EXPECT_FALSE(o.err.empty());
}

TEST(Cli, NumericFailureExitsThreeWithEnvelope) {
  const Outcome o = run_cli({"--quadrature-tol", "1e-300", "fisher", "--family", "gaussian1d",
                             "--theta", "0", "1", "--method", "score-outer"});
  ASSERT_EQ(o.code, raogeo::cli::kExitNumeric) << o.err;
  const json d = o.doc();
  EXPECT_TRUE(d.contains("error"));
  EXPECT_TRUE(d.contains("config_echo"));
}

TEST(Cli, BinaryExitCodes) {
  EXPECT_EQ(run_binary("fisher --family poisson --theta 4").code, 0);
  EXPECT_EQ(run_binary("fisher --family poisson").code, 2);
  EXPECT_EQ(run_binary("--version").code, 0);
}

TEST(Cli, SeedFromEnvironment) {
  const std::string args =
      "crlb-sim --family poisson --theta 3 --estimator mean --n 20 --replicates 500";
  const Outcome a = run_binary(args, "RAOGEO_SEED=11");
  ASSERT_EQ(a.code, 0);
  const Outcome b = run_binary(args + " --seed 11");
  ASSERT_EQ(b.code, 0);
  const json da = json::parse(a.out), db = json::parse(b.out);
  EXPECT_EQ(da["config_echo"]["seed"], 11);
  EXPECT_EQ(da["result"], db["result"]);
  EXPECT_EQ(run_binary(args, "RAOGEO_SEED=").code, 2);
}

TEST(Cli, CrlbSimDeterministicAcrossThreads) {
  auto go = [](const std::string& threads) {
    return run_cli({"--seed", "5", "crlb-sim", "--family", "gaussian1d", "--chart", "mu-sigmasq",
                    "--theta", "0", "1", "--estimator", "mean-var", "--n", "30", "--replicates",
                    "2000", "--threads", threads});
  };
  const Outcome a = go("1"), b = go("3");
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.doc()["result"], b.doc()["result"]);
}

TEST(Cli, CrlbSimReport) {
  const Outcome o = run_cli({"--seed", "1", "crlb-sim", "--family", "poisson", "--theta", "3",
                             "--estimator", "mean", "--n", "100", "--replicates", "20000"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json r = o.doc()["result"];
  EXPECT_NEAR(r["empirical_cov"][0][0].get<double>(), 0.03, 0.05 * 0.03);
  EXPECT_NEAR(r["crlb_matrix"][0][0].get<double>(), 0.03, 1e-15);
  EXPECT_TRUE(r.contains("loewner_slack"));
  EXPECT_TRUE(r.contains("bias_norm"));
}

TEST(Cli, ConfigRoundTrip) {
  TempDir dir;
  const Outcome first = run_cli({"--seed", "3", "crlb-sim", "--family", "poisson", "--theta", "2",
                                 "--estimator", "first", "--n", "5", "--replicates", "300"});
  ASSERT_EQ(first.code, 0) << first.err;
  const json echo = first.doc()["config_echo"];
  const std::string cfg = dir.file("cfg.json", echo.dump());
  const Outcome second = run_cli({"--config", cfg});
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_EQ(second.doc()["config_echo"], echo);
  EXPECT_EQ(second.doc()["result"], first.doc()["result"]);
}

TEST(Cli, ConfigFlagsOverride) {
  TempDir dir;
  const std::string cfg = dir.file(
      "cfg.json", R"({"command": "fisher", "family": "poisson", "args": {"theta": [4.0]}})");
  const Outcome a = run_cli({"--config", cfg});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.doc()["result"]["matrix"][0][0].get<double>(), 0.25);
  const Outcome b = run_cli({"--config", cfg, "fisher", "--theta", "2"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(b.doc()["result"]["matrix"][0][0].get<double>(), 0.5);
}

TEST(Cli, ConfigRejectsUnknownKeys) {
  TempDir dir;
  EXPECT_EQ(run_cli({"--config", dir.file("a.json", R"({"command": "fisher", "colour": 1})")}).code,
            2);
  EXPECT_EQ(run_cli({"--config", dir.file("b.json", R"({"command": "fisher", "family": "poisson",
      "args": {"theta": [4.0], "speed": 2}})")})
                .code,
            2);
  EXPECT_EQ(run_cli({"--config", dir.file("c.json", "{not json")}).code, 2);
  EXPECT_EQ(run_cli({"--config", dir.file("d.json", R"({"command": "fisher", "numeric":
      {"quadrature_tol": -1}})")})
                .code,
            2);
}

TEST(Cli, DivergenceKinds) {
  const Outcome kl = run_cli({"div", "--kind", "kl", "--family", "poisson", "--theta1", "2",
                              "--theta2", "3"});
  ASSERT_EQ(kl.code, 0) << kl.err;
  EXPECT_NEAR(kl.doc()["result"]["value"].get<double>(), 2.0 * std::log(2.0 / 3.0) + 1.0, 1e-12);
  const Outcome a0 = run_cli({"div", "--kind", "alpha:0", "--family", "gaussian1d", "--theta1",
                              "0", "1", "--theta2", "1", "2"});
  const Outcome h = run_cli({"div", "--kind", "hellinger", "--family", "gaussian1d", "--theta1",
                             "0", "1", "--theta2", "1", "2"});
  ASSERT_EQ(a0.code, 0);
  ASSERT_EQ(h.code, 0);
  EXPECT_NEAR(a0.doc()["result"]["value"].get<double>(),
              4.0 * h.doc()["result"]["value"].get<double>(), 1e-10);
  EXPECT_EQ(run_cli({"div", "--kind", "f:kl", "--family", "poisson", "--theta1", "2", "--theta2",
                     "3"})
                .code,
            0);
  EXPECT_EQ(run_cli({"div", "--kind", "nope", "--family", "poisson", "--theta1", "2", "--theta2",
                     "3"})
                .code,
            2);
}

TEST(Cli, DivergenceDiscreteCsv) {
  TempDir dir;
  const std::string p = dir.file("p.csv", "prob\n0.5\n0.5\n");
  const std::string q = dir.file("q.csv", "# comment\n0.25\n0.75\n");
  const Outcome o = run_cli({"div", "--kind", "kl", "--discrete", p, q});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NEAR(o.doc()["result"]["value"].get<double>(),
              0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-15);
  const std::string bad = dir.file("r.csv", "0.5\n0.6\n");
  EXPECT_EQ(run_cli({"div", "--kind", "kl", "--discrete", p, bad}).code, 2);
}

TEST(Cli, ExpfamOperations) {
  TempDir dir;
  const std::string data = dir.file("x.csv", "2\n4\n");
  const Outcome m = run_cli({"expfam", "mle", "--family", "poisson", "--data", data});
  ASSERT_EQ(m.code, 0) << m.err;
  EXPECT_EQ(m.doc()["result"]["eta"][0].get<double>(), 3.0);
  EXPECT_NEAR(m.doc()["result"]["theta"][0].get<double>(), std::log(3.0), 1e-14);

  const Outcome b = run_cli({"expfam", "bregman", "--family", "poisson", "--theta1", "0.5",
                             "--theta2", "1.0"});
  ASSERT_EQ(b.code, 0) << b.err;
  const json r = b.doc()["result"];
  EXPECT_NEAR(r["primal"].get<double>(), r["mixed"].get<double>(), 1e-8);
  EXPECT_NEAR(r["primal"].get<double>(), r["dual"].get<double>(), 1e-8);

  const Outcome n = run_cli({"expfam", "to-natural", "--family", "poisson", "--eta", "3"});
  ASSERT_EQ(n.code, 0) << n.err;
  EXPECT_NEAR(n.doc()["result"]["theta"][0].get<double>(), std::log(3.0), 1e-12);

  const std::string zeros = dir.file("z.csv", "0\n0\n");
  EXPECT_EQ(run_cli({"expfam", "mle", "--family", "poisson", "--data", zeros}).code, 2);
}

TEST(Cli, RaoMethods) {
  const Outcome ode = run_cli({"rao", "--family", "gaussian1d", "--theta1", "0", "1", "--theta2",
                               "0", "2.718281828459045"});
  ASSERT_EQ(ode.code, 0) << ode.err;
  EXPECT_NEAR(ode.doc()["result"]["distance"].get<double>(), std::sqrt(2.0), 1e-6);
  const Outcome closed = run_cli({"rao", "--family", "poisson", "--theta1", "1", "--theta2", "4",
                                  "--method", "closed"});
  ASSERT_EQ(closed.code, 0) << closed.err;
  EXPECT_NEAR(closed.doc()["result"]["distance"].get<double>(), 2.0, 1e-14);
  const Outcome neg = run_cli({"rao", "--family", "gaussian1d", "--theta1", "-3", "1", "--theta2",
                               "1", "1", "--method", "closed"});
  ASSERT_EQ(neg.code, 0) << neg.err;
}

TEST(Cli, GeodesicTrace) {
  TempDir dir;
  const std::string trace = dir.file("trace.csv");
  const Outcome o = run_cli({"--steps", "64", "geodesic", "--family", "gaussian1d", "--theta1",
                             "0", "1", "--theta2", "1", "1", "--trace", trace});
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string csv = slurp(trace);
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "t,theta_0,theta_1,speed");
  int rows = 0;
  for (std::string line; std::getline(lines, line);)
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 65);
  const Outcome c = run_cli({"--steps", "64", "--format", "csv", "geodesic", "--family",
                             "gaussian1d", "--theta1", "0", "1", "--theta2", "1", "1"});
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(c.out.rfind("t,theta_0", 0), 0u);
  EXPECT_EQ(run_cli({"--format", "csv", "fisher", "--family", "poisson", "--theta", "4"}).code, 2);
}

TEST(Cli, OutputFile) {
  TempDir dir;
  const std::string path = dir.file("out.json");
  const Outcome o = run_cli({"--out", path, "fisher", "--family", "poisson", "--theta", "4"});
  ASSERT_EQ(o.code, 0);
  EXPECT_TRUE(o.out.empty());
  EXPECT_EQ(json::parse(slurp(path))["result"]["matrix"][0][0].get<double>(), 0.25);
}

TEST(Cli, PropsSuites) {
  for (const char* suite : {"monotonicity", "invariance", "duality", "cosine", "hellinger"}) {
    const Outcome o = run_cli({"props", "--suite", suite, "--trials", "5", "--seed", "2"});
    ASSERT_EQ(o.code, 0) << suite << " " << o.err;
    EXPECT_TRUE(o.doc()["result"]["passed"].get<bool>());
  }
  const Outcome z = run_cli({"props", "--suite", "cosine", "--trials", "0"});
  ASSERT_EQ(z.code, 0);
  EXPECT_EQ(z.doc()["result"]["marker"], "0 trials");
  EXPECT_EQ(run_cli({"props", "--suite", "nope"}).code, 2);
}

TEST(Cli, ReadCsvNumbers) {
  TempDir dir;
  const std::string p = dir.file("m.csv", "a,b\n1,2\n\n# x\n3,4\n");
  EXPECT_EQ(raogeo::cli::read_csv_numbers(p, false), (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(raogeo::cli::read_csv_numbers(p, true), (std::vector<double>{1, 3}));
}
