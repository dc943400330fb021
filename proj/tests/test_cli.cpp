#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "modineq/cli.hpp"

using namespace modineq;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("modineq_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST(ParseDims, Valid) {
  EXPECT_EQ(cli::parse_dims("2,3,4"), SpaceDims(2, 3, 4));
  EXPECT_THROW(cli::parse_dims("2,3"), ParameterError);
  EXPECT_THROW(cli::parse_dims("2,0,2"), ParameterError);
  EXPECT_THROW(cli::parse_dims("2,x,2"), ParameterError);
  EXPECT_THROW(cli::parse_dims("2,1.5,2"), ParameterError);
}

TEST_F(CliTest, VerifySsaExample) {
  const Result r = run_cli({"verify", "--builder", "ssa", "--dims", "2,2,2", "--trials", "200", "--seed", "7",
                            "--tol", "1e-9", "--out", path("r.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  const RunManifest m = parse_manifest(read_file(path("r.json")));
  ASSERT_EQ(m.reports.size(), 1U);
  EXPECT_EQ(m.reports[0].records.size(), 200U);
  EXPECT_EQ(m.reports[0].pass_count, 200);
  EXPECT_EQ(m.exit_status, 0);
  EXPECT_EQ(m.config.seed, 7U);
  EXPECT_EQ(m.version, kVersion);
  EXPECT_NE(r.out.find("[PASS]"), std::string::npos);
}

TEST_F(CliTest, WydZeroIsUsageError) {
  const Result r = run_cli({"verify", "--builder", "wyd:0", "--out", path("r.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("t must avoid {0,1}"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("r.json")));
}

TEST_F(CliTest, UnknownIdsListValidOnes) {
  Result r = run_cli({"verify", "--builder", "nope", "--out", path("r.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("ssa_kim"), std::string::npos);
  r = run_cli({"convexity", "--g", "nope", "--out", path("r.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("neg_log"), std::string::npos);
  EXPECT_NE(r.err.find("wyd:<t>"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"verify", "--dims", "2,2"}).code, 2);
  EXPECT_EQ(run_cli({"verify", "--dims", "0,2,2"}).code, 2);
  EXPECT_EQ(run_cli({"verify", "--trials", "0"}).code, 2);
  EXPECT_EQ(run_cli({"verify", "--normalize", "maybe"}).code, 2);
  EXPECT_EQ(run_cli({"verify", "--format", "xml"}).code, 2);
  EXPECT_EQ(run_cli({"verify", "--builder", "wyd:3"}).code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST_F(CliTest, FailingVerificationExitsOne) {
  // tolerance so small that round-off in the equality check fails it
  const Result r = run_cli({"equality", "--trials", "3", "--tol-eq", "1e-30", "--out", path("r.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(parse_manifest(read_file(path("r.json"))).exit_status, 1);
  EXPECT_NE(r.out.find("[FAIL]"), std::string::npos);
}

TEST_F(CliTest, ListPrintsCatalog) {
  const Result r = run_cli({"list"});
  EXPECT_EQ(r.code, 0);
  for (const char* id : {"neg_log", "x_log_x", "wyd:<t>", "square_diff", "inv_sqrt", "bures", "general:<g-id>"})
    EXPECT_NE(r.out.find(id), std::string::npos) << id;
}

TEST_F(CliTest, ReportRoundTrip) {
  const Result r = run_cli({"counterexample", "--trials", "30", "--dims", "2,2,2", "--dims", "2,1,3", "--format",
                            "both", "--out", path("c.json")});
  EXPECT_EQ(r.code, 0) << r.out;
  const std::string text = read_file(path("c.json"));
  const RunManifest m = parse_manifest(text);
  EXPECT_EQ(m.reports.size(), 6U);
  EXPECT_EQ(to_json_text(m), text);
  EXPECT_EQ(parse_manifest(to_json_text(m)), m);
  const std::string csv = read_file(path("c.csv"));
  EXPECT_EQ(csv.rfind("report,kind,dims,builder,seed,min_eig,herm_defect,verdict\n", 0), 0U);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 1 + 6 * 30U);
}

TEST_F(CliTest, CsvOnly) {
  const Result r = run_cli({"convexity", "--g", "neg_log,bures", "--trials", "5", "--format", "csv", "--out",
                            path("v.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_FALSE(fs::exists(path("v.json")));
  EXPECT_TRUE(fs::exists(path("v.csv")));
}

TEST_F(CliTest, ByteIdenticalReruns) {
  for (const std::vector<std::string>& base :
       {std::vector<std::string>{"verify", "--builder", "mpt,wyd:0.5", "--trials", "20"},
        std::vector<std::string>{"equality", "--trials", "10", "--normalize", "off"},
        std::vector<std::string>{"convexity", "--g", "sym:neg_log", "--trials", "5"}}) {
    auto a = base, b = base;
    a.insert(a.end(), {"--format", "both", "--out", path("a.json")});
    b.insert(b.end(), {"--format", "both", "--out", path("b.json")});
    run_cli(a);
    run_cli(b);
    EXPECT_EQ(read_file(path("a.json")), read_file(path("b.json"))) << base[0];
    EXPECT_EQ(read_file(path("a.csv")), read_file(path("b.csv"))) << base[0];
    EXPECT_FALSE(read_file(path("a.json")).empty());
  }
}

TEST(Report, DoublesRoundTripExactly) {
  RunManifest m;
  VerificationReport rep;
  rep.name = "x";
  rep.dims = SpaceDims(2, 2, 2);
  TrialRecord rec;
  rec.builder = "x";
  rec.seed = 18446744073709551615ULL;
  rec.min_eig = 0.1 + 0.2;
  rec.herm_defect = 5e-324;
  rec.op_norm = 1.7976931348623157e308;
  rec.trace = -1.0 / 3.0;
  rec.identities["a"] = std::nextafter(1.0, 2.0);
  rep.records = {rec};
  rep.witness_seed = 3;
  m.reports = {rep};
  EXPECT_EQ(parse_manifest(to_json_text(m)), m);
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}
