#include "ccslab/ccslab.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace ccslab;

namespace {

const char* kTriple = R"(
[experiment]
name = triplewell-occupation

[model]
omega = -1.0
chi = -1.0
N = 10

[sampler]
center_re = 0.2928932188134524, 0.2928932188134524
sigma_theta = 0.15707963267948966, 0.15707963267948966
sigma_phi = 0.3141592653589793, 0.3141592653589793
target_M = 5

[time]
t_final = 1
samples = 5

[run]
seed = 7
output = tw.csv
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto p = s.find(from);
  EXPECT_NE(p, std::string::npos) << from;
  return s.replace(p, from.size(), to);
}

}  // namespace

TEST(Config, ParsesWithDefaults) {
  const auto c = parse_config_string(kTriple);
  EXPECT_EQ(c.experiment, Experiment::TripleWellOccupation);
  EXPECT_EQ(c.scheme, Scheme::Unitary);
  EXPECT_EQ(c.model, ModelKind::TripleWell);
  EXPECT_EQ(c.sampler, SamplerKind::Conditioned);
  EXPECT_EQ(c.N, std::vector<int>{10});
  EXPECT_EQ(c.target_M, std::vector<int>{5});
  EXPECT_EQ(c.center.size(), 2);
  EXPECT_DOUBLE_EQ(c.tol, 1e-8);
  EXPECT_DOUBLE_EQ(c.epsilon_limit, 1e10);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.width_mode, WidthMode::StdDev);
}

TEST(Config, AngleCentre) {
  const auto c = parse_config_string(
      "[experiment]\nname = doublewell-fidelity\n[sampler]\ncenter_theta = 1.5707963267948966\ncenter_phi = 0\n");
  EXPECT_NEAR(std::abs(c.center[0] - Complex{1.0, 0.0}), 0.0, 1e-15);
  EXPECT_EQ(c.scheme, Scheme::NonUnitary);
  EXPECT_EQ(c.sampler, SamplerKind::Grid);
}

TEST(Config, Rejections) {
  const std::string base = kTriple;
  EXPECT_THROW(parse_config_string(replace(base, "N = 10", "N = 10\nbogus = 1")), ConfigError);
  EXPECT_THROW(parse_config_string(base + "[extra]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_string(replace(base, "triplewell-occupation", "quantum-magic")), ConfigError);
  EXPECT_THROW(parse_config_string(replace(base, "N = 10", "N = 1")), ConfigError);
  EXPECT_THROW(parse_config_string(replace(base, "t_final = 1", "t_final = -1")), ConfigError);
  EXPECT_THROW(parse_config_string(replace(base, "seed = 7", "seed = -3")), ConfigError);
  EXPECT_THROW(parse_config_string(replace(base, "N = 10", "N = ten")), ConfigError);
  EXPECT_THROW(parse_config_string(replace(base, "center_re = 0.2928932188134524, 0.2928932188134524",
                                           "center_re = 0.29")),
               ConfigError);
  EXPECT_THROW(parse_config_string(replace(base, "[sampler]", "[sampler]\ncenter_theta = 0.1, 0.1")),
               ConfigError);
  EXPECT_THROW(parse_config_string(replace(base, "[model]", "[model]\nkind = doublewell")), ConfigError);
  EXPECT_THROW(parse_config_string("[experiment]\nscheme = unitary\n"), ConfigError);
  EXPECT_THROW(parse_config_file("/nonexistent/ccslab.ini"), ConfigError);
}

TEST(Config, HashIsStable) {
  const auto a = parse_config_string(kTriple);
  const auto b = parse_config_string(replace(std::string("# comment\n") + kTriple, "chi = -1.0", "chi  =  -1"));
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  const auto c = parse_config_string(replace(kTriple, "chi = -1.0", "chi = -0.5"));
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Output, CsvFormat) {
  Table t;
  t.meta = {{"k", "v"}};
  t.columns = {"x", "y"};
  t.rows = {{0.5, -2.0}};
  EXPECT_EQ(to_csv(t), "# k = v\nx,y\n5.0000000000000000e-01,-2.0000000000000000e+00\n");
  EXPECT_EQ(t.values("y"), std::vector<double>{-2.0});
  EXPECT_EQ(t.meta_value("k"), "v");
  EXPECT_THROW(t.column("z"), InvalidArgument);
}

TEST(Output, AtomicWrite) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("ccslab_test_" + std::to_string(::getpid()));
  const fs::path p = dir / "sub" / "out.csv";
  write_atomic(p, "one\n");
  write_atomic(p, "two\n");
  std::ifstream in(p);
  std::string s((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(s, "two\n");
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(p.parent_path())) ++files;
  EXPECT_EQ(files, 1);
  fs::remove_all(dir);
}

TEST(Output, PathsForMultipleRuns) {
  auto c = parse_config_string(replace(replace(kTriple, "N = 10", "N = 10, 20"), "target_M = 5", "target_M = 5, 8"));
  const auto runs = expand_runs(c);
  ASSERT_EQ(runs.size(), 4u);
  EXPECT_EQ(output_path(c, runs[3], runs.size(), "out").string(), "out/tw_N20_M8.csv");
  EXPECT_EQ(output_path(c, runs[0], 1, "").string(), "tw.csv");
}

TEST(Runner, DeterministicOutput) {
  const auto c = parse_config_string(kTriple);
  const auto a = run_all(c);
  const auto b = run_all(c);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(to_csv(a[0]), to_csv(b[0]));
  EXPECT_EQ(a[0].rows.size(), 5u);
  EXPECT_EQ(a[0].meta_value("basis_size"), "5");
  EXPECT_EQ(a[0].meta_value("config_hash"), config_hash(c));
}

TEST(Runner, ZeroDurationGivesOneRow) {
  const auto c = parse_config_string(replace(kTriple, "t_final = 1", "t_final = 0"));
  const auto t = run_all(c);
  ASSERT_EQ(t[0].rows.size(), 1u);
  EXPECT_EQ(t[0].rows[0][0], 0.0);
  EXPECT_NEAR(t[0].values("Q_ccs")[0], t[0].values("Q_exact")[0], 1e-10);
}

TEST(Runner, SingleElementMatchesClassicalOrbit) {
  std::string q = replace(kTriple, "[sampler]", "[sampler]\nkind = single");
  q = replace(q, "target_M = 5\n", "");
  q = replace(q, "center_re = 0.2928932188134524, 0.2928932188134524", "center_re = 0.31, 0.27");
  const auto qt = run_all(parse_config_string(q))[0];

  std::string k = replace(q, "triplewell-occupation", "classical-single");
  k = replace(k, "[model]", "[model]\nkind = triplewell");
  const auto kt = run_all(parse_config_string(k))[0];
  ASSERT_EQ(qt.rows.size(), kt.rows.size());
  const auto qa = qt.values("Q_ccs"), qb = kt.values("Q");
  for (std::size_t i = 0; i < qa.size(); ++i) EXPECT_NEAR(qa[i], qb[i], 1e-6);
  EXPECT_GT(std::abs(qb.back()), 1e-4);
}

TEST(Runner, DoubleWellSmallRun) {
  const auto c = parse_config_string(R"(
[experiment]
name = doublewell-fidelity
[model]
chi = 0
N = 8
[sampler]
center_theta = 0.7853981633974483
spacing = 0.3
extent = 2
[time]
t_final = 2
samples = 3
)");
  const auto t = run_all(c)[0];
  ASSERT_EQ(t.rows.size(), 3u);
  // chi = 0 moves every element exactly, so the fidelity keeps its t = 0 value.
  const auto f = t.values("fidelity");
  EXPECT_GT(f[0], 0.99);
  for (double x : f) EXPECT_NEAR(x, f[0], 1e-7);
}
