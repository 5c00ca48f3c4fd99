#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bpxhd/cli.hpp"

using namespace bpxhd;
using namespace bpxhd::cli;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("bpxhd_test_" + name);
}

}  // namespace

TEST(Cli, MeshInfoCounts) {
  const Result r = call({"mesh-info", "-d", "3", "-n", "2"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("num_vertices,27"), std::string::npos);
  EXPECT_NE(r.out.find("num_elements,48"), std::string::npos);
  const Result j = call({"mesh-info", "-d", "2", "-n", "2", "--format", "json"});
  const auto parsed = nlohmann::json::parse(j.out);
  EXPECT_EQ(parsed["num_elements"], 8);
  EXPECT_EQ(parsed["boundary_vertex_ids"].size(), 8u);
}

TEST(Cli, MeshInfoWritesElementTable) {
  const auto path = temp_path("elements.csv");
  EXPECT_EQ(call({"mesh-info", "-d", "2", "-n", "2", "--elements", path.string()}).code, kExitOk);
  EXPECT_EQ(count_lines(read_file(path)), 1 + 8);
  std::filesystem::remove(path);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(call({}).code, kExitUsage);
  EXPECT_EQ(call({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(call({"mesh-info", "-d", "0"}).code, kExitUsage);
  EXPECT_EQ(call({"mesh-info", "--format", "xml"}).code, kExitUsage);
  EXPECT_EQ(call({"kappa", "-d", "1", "-J", "2", "--variant", "jacobi"}).code, kExitUsage);
  EXPECT_EQ(call({"solve", "-d", "1", "-J", "2", "--tol", "2"}).code, kExitUsage);
  EXPECT_EQ(call({"export", "--matrix", "hessian"}).code, kExitUsage);
  // 63^2 dofs exceed the dense limit.
  const Result dense = call({"kappa", "-d", "2", "-J", "6", "--method", "dense"});
  EXPECT_EQ(dense.code, kExitUsage);
  EXPECT_NE(dense.err.find("dense"), std::string::npos);
}

TEST(Cli, HelpExitsCleanly) {
  const Result r = call({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("verify"), std::string::npos);
}

TEST(Cli, BudgetExceededIsResourceError) {
  const Result r = call({"kappa", "-d", "3", "-J", "4", "--budget", "100"});
  EXPECT_EQ(r.code, kExitResource);
  EXPECT_NE(r.err.find("budget"), std::string::npos);
  EXPECT_EQ(call({"mesh-info", "-d", "4", "-n", "9", "--budget", "1000"}).code, kExitResource);
}

TEST(Cli, NonConvergenceIsNumericalFailure) {
  const Result r = call({"solve", "-d", "2", "-J", "4", "--no-precond", "--maxit", "2", "--tol", "1e-12"});
  EXPECT_EQ(r.code, kExitNumerical);
  EXPECT_NE(r.out.find(",false"), std::string::npos);
}

TEST(Cli, VerifySelectionAndWarnings) {
  const Result r = call({"verify", "--only", "inverse_ref"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(count_lines(r.out), 1 + 6);
  const Result two = call({"verify", "--only", "inverse_ref,local_mass", "--dmax", "3"});
  EXPECT_EQ(count_lines(two.out), 1 + 3 + 3);
  const Result unknown = call({"verify", "--only", "nosuch"});
  EXPECT_EQ(unknown.code, kExitOk);
  EXPECT_NE(unknown.err.find("warning"), std::string::npos);
  EXPECT_EQ(count_lines(unknown.out), 1);
}

TEST(Cli, VerifyFailureExitCode) {
  // The L2 interpolation rate on these meshes is outside the asserted window.
  const Result r = call({"verify", "--only", "interp_rates", "--dmax", "2"});
  EXPECT_EQ(r.code, kExitCheckFailed);
  EXPECT_NE(r.out.find(",fail,"), std::string::npos);
}

TEST(Cli, KappaAppendsToCsv) {
  const auto path = temp_path("kappa.csv");
  std::filesystem::remove(path);
  EXPECT_EQ(call({"kappa", "-d", "1", "-J", "3", "--out", path.string()}).code, kExitOk);
  EXPECT_EQ(call({"kappa", "-d", "1", "-J", "4", "--out", path.string()}).code, kExitOk);
  const std::string s = read_file(path);
  EXPECT_EQ(count_lines(s), 3);
  EXPECT_EQ(s.rfind("d,J,variant,lambda_min,lambda_max,kappa,method\n", 0), 0u);
  std::filesystem::remove(path);
}

TEST(Cli, KappaNoPrecondMatchesClosedForm) {
  const Result r = call({"kappa", "-d", "1", "-J", "3", "--no-precond", "--format", "json"});
  ASSERT_EQ(r.code, kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["variant"], "none");
  const double expected = 1.0 / std::pow(std::tan(std::acos(-1.0) / 16.0), 2);
  EXPECT_NEAR(j["kappa"].get<double>(), expected, 1e-9 * expected);
}

TEST(Cli, SweepCardinalityAndDeterminism) {
  const std::vector<std::string> args{"sweep", "--dims", "1,2", "--levels", "2,3", "--variants", "exact,none"};
  const Result a = call(args), b = call(args);
  EXPECT_EQ(a.code, kExitOk);
  EXPECT_EQ(count_lines(a.out), 1 + 2 * 2 * 2);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.err.find("variant,J,points,slope"), std::string::npos);

  const auto prefix = temp_path("sweep").string();
  EXPECT_EQ(call({"sweep", "--dims", "1", "--levels", "2", "--variants", "lumped", "--out", prefix}).code, kExitOk);
  for (const std::string suffix : {".csv", ".json", "_fit.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(prefix + suffix)) << suffix;
    std::filesystem::remove(prefix + suffix);
  }
}

TEST(Cli, SweepAllCellsFailing) {
  const Result r = call({"sweep", "--dims", "3", "--levels", "4", "--variants", "exact", "--budget", "10"});
  EXPECT_EQ(r.code, kExitNumerical);
}

TEST(Cli, SolveReportsConvergence) {
  const Result r = call({"solve", "-d", "2", "-J", "3", "--rhs", "random", "--seed", "4"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find(",exact_mass,2,3,true"), std::string::npos);
}

TEST(Cli, ExportRoundTrips) {
  const Result r = call({"export", "-d", "1", "-n", "4", "--matrix", "stiffness"});
  ASSERT_EQ(r.code, kExitOk);
  std::istringstream is(r.out);
  const SparseMatrix a = read_matrix_market(is);
  EXPECT_EQ(a.rows(), 3);
  EXPECT_NEAR(a.coeff(0, 0), 8.0, 1e-12);
  EXPECT_NEAR(a.coeff(0, 1), -4.0, 1e-12);
}

TEST(Cli, ConfigRoundTrip) {
  const Result r = call({"--dump-config", "solve", "-d", "3", "-J", "2", "--variant", "lumped", "--tol", "1e-6", "--seed", "9"});
  ASSERT_EQ(r.code, kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  const RunConfig c = j.get<RunConfig>();
  EXPECT_EQ(c.command, "solve");
  EXPECT_EQ(c.d, 3);
  EXPECT_EQ(c.levels, 2);
  EXPECT_EQ(c.variant, "lumped");
  EXPECT_DOUBLE_EQ(c.tol, 1e-6);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(nlohmann::json(c).get<RunConfig>(), c);
}
