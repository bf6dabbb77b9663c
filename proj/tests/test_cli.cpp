#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace blowuplab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result
{
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test
{
  protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("blowuplab_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    json load(const std::string& name) const { return json::parse(io::read_file(dir_ / name)); }

    fs::path dir_;
};

TEST_F(CliTest, HelpAndUsageErrors)
{
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"simulate", "--h", "-1", "--out", path("a")}).code, 1);
    EXPECT_EQ(run({"simulate", "--mode", "ode", "--out", path("a")}).code, 1);
    EXPECT_EQ(run({"simulate", "--u0", "1,2,3", "--out", path("a")}).code, 1);
    EXPECT_EQ(run({"simulate", "--dt", "abc", "--out", path("a")}).code, 1);
    EXPECT_EQ(run({"simulate"}).code, 1);
    EXPECT_EQ(run({"lambda-crit", "--u0", "-1,1"}).code, 1);
}

TEST_F(CliTest, SimulateDeterministic)
{
    auto r = run({"simulate", "--u0", "lambda*ones:0.5", "--out", path("conv")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(load("conv/outcome.json")["outcome"], "converged");
    EXPECT_TRUE(fs::exists(dir_ / "conv/path.csv"));
    EXPECT_EQ(load("conv/config.json")["command"], "simulate");

    r = run({"simulate", "--u0", "1.5,1.5", "--out", path("exp")});
    EXPECT_EQ(r.code, 0) << r.err;
    const json o = load("exp/outcome.json");
    EXPECT_EQ(o["outcome"], "exploded");
    EXPECT_GT(o["tau_hat"].get<double>(), 0.0);
    EXPECT_NE(r.out.find("tau_hat="), std::string::npos);
}

TEST_F(CliTest, SimulateUndecidedExitsWithThree)
{
    const auto r = run({"simulate", "--u0", "0.99,0.99", "--t-max", "0.01", "--out", path("u")});
    EXPECT_EQ(r.code, 3);
    EXPECT_EQ(load("u/outcome.json")["outcome"], "survived");
}

TEST_F(CliTest, SimulateSdeWithoutNoiseMatchesDeterministicVerdict)
{
    const auto r = run({"simulate", "--mode", "sde", "--eps", "0", "--u0", "lambda*ones:1.5", "--out", path("s")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(load("s/outcome.json")["outcome"], "exploded");
}

TEST_F(CliTest, ClassifyAndLambdaCrit)
{
    auto r = run({"classify", "--u0", "0,0", "--out", path("c")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(load("c/classification.json")["verdict"], "DomainOfAttraction");
    r = run({"classify", "--u0", "0.9,0.9", "--t-max", "0.001"});
    EXPECT_EQ(r.code, 3);

    r = run({"lambda-crit", "--tol", "1e-5", "--out", path("l")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(load("l/lambda_crit.json")["lambda_crit"].get<double>(), 1.0, 1e-5);
}

TEST_F(CliTest, DomainG)
{
    const auto r = run({"domain-g", "--drift", "gradient", "--n-rays", "256", "--out", path("g"), "--threads", "4"});
    EXPECT_EQ(r.code, 0) << r.err << r.out;
    const json h = load("g/domain_g.json");
    EXPECT_EQ(h["n_rays"], 256);
    EXPECT_TRUE(h["checks"]["ball_inside"].get<bool>());
    EXPECT_EQ(run({"domain-g", "--d", "3", "--out", path("g3")}).code, 1);
}

std::vector<std::string> sweep_args(const std::string& out)
{
    return {"sweep", "--h", "1", "--eps-list", "0.8,0.6,0.5", "--n", "6", "--seed", "17", "--out", out};
}

TEST_F(CliTest, SweepIsReproducibleAcrossThreadCounts)
{
    auto a = sweep_args(path("a"));
    a.insert(a.end(), {"--threads", "1"});
    auto b = sweep_args(path("b"));
    b.insert(b.end(), {"--threads", "8"});
    ASSERT_EQ(run(a).code, 0);
    ASSERT_EQ(run(b).code, 0);
    EXPECT_EQ(io::read_file(dir_ / "a/samples.csv"), io::read_file(dir_ / "b/samples.csv"));

    const auto r = run({"sweep", "--config", path("a/config.json"), "--out", path("c")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(io::read_file(dir_ / "a/samples.csv"), io::read_file(dir_ / "c/samples.csv"));
    json ca = load("a/config.json"), cc = load("c/config.json");
    ca.erase("out");
    cc.erase("out");
    EXPECT_EQ(ca, cc);
}

TEST_F(CliTest, ConfigPrecedenceAndFormats)
{
    {
        std::ofstream f(dir_ / "run.cfg");
        f << "# sweep settings\ncommand = sweep\nh = 1\neps_list = 0.8, 0.6, 0.5\nn = 4\nseed = 3\n";
    }
    auto r = run({"sweep", "--config", path("run.cfg"), "--n", "5", "--out", path("o")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json c = load("o/config.json");
    EXPECT_EQ(c["n"], 5);
    EXPECT_EQ(c["seed"], "3");
    EXPECT_EQ(c["h"], 1.0);
    EXPECT_EQ(c["p"], 2.0);
    EXPECT_EQ(c["eps_list"], json::array({0.8, 0.6, 0.5}));

    {
        std::ofstream f(dir_ / "bad.cfg");
        f << "h = 1\nbogus = 2\n";
    }
    EXPECT_EQ(run({"sweep", "--config", path("bad.cfg"), "--out", path("x")}).code, 1);
    {
        std::ofstream f(dir_ / "other.json");
        f << R"({"command": "simulate", "h": 1})";
    }
    EXPECT_EQ(run({"sweep", "--config", path("other.json"), "--out", path("x")}).code, 1);
    EXPECT_EQ(run({"sweep", "--eps-list", "0.5,0.6", "--out", path("x")}).code, 1);
}

void write_fixture(const fs::path& p, const std::vector<double>& eps, std::size_t n, bool censor_last)
{
    std::ofstream f(p);
    f << montecarlo::samples_header() << '\n';
    for (std::size_t e = 0; e < eps.size(); ++e)
        for (std::size_t i = 0; i < n; ++i)
        {
            // deterministic Exp(1) quantiles scaled by e^{0.5/eps^2}
            const double q = -std::log(1.0 - (static_cast<double>(i) + 0.5) / static_cast<double>(n));
            const double t = std::exp(0.5 / (eps[e] * eps[e])) * q;
            const bool cens = censor_last && e + 1 == eps.size() && i % 2 == 0;
            f << montecarlo::format_double(eps[e]) << ',' << i << ',' << (cens ? "survived" : "exploded") << ','
              << montecarlo::format_double(cens ? 1e-3 : t) << ",,," << 10 << '\n';
        }
}

TEST_F(CliTest, AnalyzeRecoversExponent)
{
    write_fixture(dir_ / "samples.csv", {0.5, 0.4, 0.3}, 200, false);
    const auto r = run({"analyze", "--samples", path("samples.csv"), "--bootstrap", "300"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json s = load("summary.json");
    EXPECT_NEAR(s["delta_hat"].get<double>(), 0.5, 1e-2);
    EXPECT_TRUE(fs::exists(dir_ / "beta_fit.dat"));
    EXPECT_TRUE(fs::exists(dir_ / "survival.dat"));
}

TEST_F(CliTest, AnalyzeReportsCensoring)
{
    write_fixture(dir_ / "samples.csv", {0.5, 0.4, 0.3}, 50, true);
    const auto r = run({"analyze", "--samples", path("samples.csv"), "--bootstrap", "200", "--out", path("o")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json s = load("o/summary.json");
    EXPECT_TRUE(s["per_eps"][2]["beta_hat"].is_null());
    EXPECT_EQ(s["per_eps"][2]["censored"], 25);
    EXPECT_TRUE(s["delta_hat"].is_null());
    EXPECT_TRUE(fs::exists(dir_ / "o/analyze_config.json"));
}

TEST_F(CliTest, AnalyzeRejectsBadInput)
{
    {
        std::ofstream f(dir_ / "bad.csv");
        f << "eps,tau\n0.5,1\n";
    }
    EXPECT_EQ(run({"analyze", "--samples", path("bad.csv")}).code, 1);
    EXPECT_EQ(run({"analyze", "--samples", path("missing.csv")}).code, 1);
    write_fixture(dir_ / "samples.csv", {0.5, 0.4, 0.3}, 20, false);
    EXPECT_EQ(run({"analyze", "--samples", path("samples.csv"), "--bootstrap", "10"}).code, 1);
    EXPECT_FALSE(fs::exists(dir_ / "summary.json"));
}

TEST_F(CliTest, AtomicWriteLeavesNoPartialFile)
{
    const fs::path target = dir_ / "file.txt";
    EXPECT_THROW(io::atomic_write(target,
                                  [](std::ostream& os) {
                                      os << "partial";
                                      throw std::runtime_error("boom");
                                  }),
                 std::runtime_error);
    EXPECT_FALSE(fs::exists(target));
    EXPECT_FALSE(fs::exists(dir_ / "file.txt.tmp"));
    io::atomic_write(target, "done");
    EXPECT_EQ(io::read_file(target), "done");
}

TEST(Threads, EnvironmentOverride)
{
    ::setenv("BLOWUPLAB_THREADS", "3", 1);
    EXPECT_EQ(default_worker_count(), 3u);
    ::setenv("BLOWUPLAB_THREADS", "junk", 1);
    EXPECT_GE(default_worker_count(), 1u);
    ::unsetenv("BLOWUPLAB_THREADS");
}

}  // namespace
