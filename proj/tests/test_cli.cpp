#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "ptsat/models.hpp"

using namespace ptsat;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

fs::path test_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  return fs::temp_directory_path() / "ptsat_cli_test" / (std::string(info->test_suite_name()) + "." + info->name());
}

fs::path scratch() {
  const fs::path d = test_dir();
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Run cli(const std::string& args) {
  const fs::path d = test_dir().string() + ".io";
  fs::create_directories(d);
  const fs::path out = d / "stdout", err = d / "stderr";
  const std::string cmd = std::string(PTSAT_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

const std::string kLinear = "--model linear --V1 5 --a 2";

}  // namespace

TEST(Spectrum, JsonDocument) {
  const auto r = cli("spectrum " + kLinear);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["kind"], "spectrum");
  EXPECT_EQ(j["model"], "linear");
  EXPECT_EQ(j["params"]["a"], 2.0);
  EXPECT_EQ(j["source"], "characteristic");
  EXPECT_TRUE(j.contains("units"));
  EXPECT_TRUE(j["tolerances"].contains("tol_f_abs"));
  ASSERT_EQ(j["roots"].size(), 4u);
  EXPECT_EQ(j["roots"][0]["kind"], "ccpe_minus");
  EXPECT_EQ(j["roots"][0]["pair_id"], j["roots"][1]["pair_id"]);
  EXPECT_TRUE(j["roots"][2]["pair_id"].is_null());
  EXPECT_NEAR(j["roots"][3]["re"].get<double>(), 10.781386826834584, 1e-9);
  EXPECT_TRUE(j["rejected"].is_array());
  EXPECT_TRUE(j["warnings"].is_array());
}

// Every recorded residual must survive re-evaluation of the characteristic
// function at the printed energy.
TEST(Spectrum, ResidualsRevalidate) {
  const auto r = cli("spectrum --model sqwell --V0 5 --V1 2 --a 2");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  const double tol = j["tolerances"]["tol_f_abs"];
  ASSERT_FALSE(j["roots"].empty());
  for (const auto& root : j["roots"]) {
    const Complex e{root["re"].get<double>(), root["im"].get<double>()};
    const double recomputed = std::abs(char_sqwell(e, 5, 2, 2));
    EXPECT_LE(recomputed, std::max(2.0 * root["residual"].get<double>(), tol)) << e;
  }
}

TEST(Spectrum, StepIsEmpty) {
  const auto j = cli("spectrum --model step --V1 5");
  ASSERT_EQ(j.code, 0) << j.err;
  EXPECT_TRUE(json::parse(j.out)["roots"].empty());
  const auto c = cli("spectrum --model step --V1 5 --format csv");
  EXPECT_EQ(c.out, "re,im,kind,pair_id,residual\n");
}

TEST(Spectrum, RosenMorseAnalytic) {
  const auto r = cli("spectrum --model rosen-morse --s 3.2 --c 1 --analytic");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["source"], "analytic");
  const auto want = rosen_morse_levels(3.2, 1);
  ASSERT_EQ(j["roots"].size(), want.size());
  for (std::size_t k = 0; k < want.size(); ++k) {
    EXPECT_NEAR(j["roots"][k]["re"].get<double>(), want[k], 1e-12);
    EXPECT_EQ(j["roots"][k]["kind"], "real");
  }
}

TEST(Spectrum, ByteIdenticalAcrossRunsAndThreads) {
  const auto a = cli("spectrum " + kLinear + " --threads 1");
  const auto b = cli("spectrum " + kLinear + " --threads 4");
  const auto c = cli("spectrum " + kLinear + " --threads 4");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(b.out, c.out);
}

TEST(Spectrum, CsvFormat) {
  const auto r = cli("spectrum " + kLinear + " --format csv");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("re,im,kind,pair_id,residual\n", 0), 0u);
  EXPECT_EQ(r.out.find('\r'), std::string::npos);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

TEST(Spectrum, WritesToOutFile) {
  const fs::path d = scratch();
  const auto r = cli("spectrum " + kLinear + " --out " + (d / "s.json").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(json::parse(slurp(d / "s.json"))["roots"].size(), 4u);
}

TEST(Config, FlagsOverrideFile) {
  const fs::path d = scratch();
  std::ofstream(d / "run.cfg") << "# linear step\nmodel = linear\nV1 = 5\na = 3\nformat = csv\n";
  const auto r = cli("spectrum --config " + (d / "run.cfg").string() + " --a 2 --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["params"]["a"], 2.0);
  EXPECT_EQ(j["params"]["V1"], 5.0);
}

TEST(Config, RejectsUnknownAndDuplicateKeys) {
  const fs::path d = scratch();
  std::ofstream(d / "unknown.cfg") << "model = linear\nV1 = 5\na = 2\nwidth = 4\n";
  std::ofstream(d / "dup.cfg") << "model = linear\nV1 = 5\nV1 = 6\na = 2\n";
  EXPECT_EQ(cli("spectrum --config " + (d / "unknown.cfg").string()).code, 2);
  EXPECT_EQ(cli("spectrum --config " + (d / "dup.cfg").string()).code, 2);
  EXPECT_EQ(cli("spectrum --config " + (d / "missing.cfg").string()).code, 2);
}

TEST(Config, ExitTwoOnBadInput) {
  EXPECT_EQ(cli("spectrum --model linear --V1 5").code, 2);
  EXPECT_EQ(cli("spectrum " + kLinear + " --s 3").code, 2);
  EXPECT_EQ(cli("spectrum --model cubic --V1 5").code, 2);
  EXPECT_EQ(cli("spectrum " + kLinear + " --rect 1,0,-1,1").code, 2);
  EXPECT_EQ(cli("spectrum " + kLinear + " --format xml").code, 2);
  EXPECT_EQ(cli("spectrum --model linear --V1 0 --a 2").code, 2);
  EXPECT_EQ(cli("wavefunction " + kLinear).code, 2);
  EXPECT_EQ(cli("spectrum " + kLinear + " --no-such-flag").code, 2);
  EXPECT_EQ(cli("").code, 2);
}

TEST(Wavefunction, CsvAndSidecar) {
  const fs::path d = scratch();
  const fs::path out = d / "psi.csv";
  const auto r = cli("wavefunction " + kLinear + " --energy 4.2959697271541401,1.5653605165276509 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(out);
  EXPECT_EQ(csv.rfind("x,re_psi,im_psi,abs_psi,current\n", 0), 0u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2002);
  const auto meta = json::parse(slurp(out.string() + ".json"));
  EXPECT_EQ(meta["grid"]["points"], 2001);
  EXPECT_NEAR(meta["reflection"]["partner_energy"]["im"].get<double>(), -1.5653605165276509, 1e-12);
  EXPECT_LT(meta["reflection"]["max_rel_dev"].get<double>(), 1e-3);
  EXPECT_GT(meta["peak_x"].get<double>(), 0.0);
}

TEST(Wavefunction, ResidualCheck) {
  const fs::path d = scratch();
  EXPECT_EQ(cli("wavefunction " + kLinear + " --energy 6,0 --out " + (d / "a.csv").string()).code, 4);
  EXPECT_FALSE(fs::exists(d / "a.csv"));
  EXPECT_EQ(cli("wavefunction " + kLinear + " --energy 6,0 --force --out " + (d / "b.csv").string()).code, 0);
  EXPECT_TRUE(fs::exists(d / "b.csv"));
}

TEST(Contours, JsonAndCsv) {
  const auto j = cli("contours " + kLinear + " --grid 60,40");
  ASSERT_EQ(j.code, 0) << j.err;
  const auto doc = json::parse(j.out);
  EXPECT_FALSE(doc["re_zero"].empty());
  EXPECT_FALSE(doc["im_zero"].empty());
  EXPECT_TRUE(doc["re_zero"][0][0].contains("re"));
  const auto c = cli("contours " + kLinear + " --grid 60,40 --format csv");
  EXPECT_EQ(c.out.rfind("set,line,re,im\n", 0), 0u);
}

TEST(Verify, PassesAndFails) {
  const std::string small = " --rect 5.5,7.5,-1,1 --grid 40,40 --oracle-grid 20,20";
  const auto ok = cli("verify " + kLinear + small);
  ASSERT_EQ(ok.code, 0) << ok.err;
  const auto j = json::parse(ok.out);
  EXPECT_TRUE(j["pass"].get<bool>());
  ASSERT_EQ(j["roots"].size(), 1u);
  EXPECT_LT(j["roots"][0]["delta"].get<double>(), 1e-6);
  // Too few RK4 steps: the oracle misses the root.
  const auto bad = cli("verify " + kLinear + small + " --oracle-steps 40");
  EXPECT_EQ(bad.code, 5);
  EXPECT_FALSE(json::parse(bad.out)["pass"].get<bool>());
}

TEST(Cli, Version) {
  const auto r = cli("--version");
  EXPECT_EQ(r.code, 0);
  EXPECT_FALSE(r.out.empty());
}
