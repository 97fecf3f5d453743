#include <gtest/gtest.h>

#include <cstdint>
#include <fstream>
#include <sstream>

#include "charpoint/cli.hpp"

using namespace charpoint;
using cli::Json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "charpoint");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Json run_json(std::vector<std::string> args) {
  args.push_back("--format");
  args.push_back("json");
  const Result r = run(args);
  EXPECT_EQ(r.code, 0) << r.err;
  return Json::parse(r.out);
}

std::string temp_file(const std::string& name, const std::string& text) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << text;
  return path;
}

// truncated power series in int64, independent of the library
using Poly = std::vector<std::int64_t>;

Poly mul(const Poly& a, const Poly& b) {
  Poly c(a.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; i + j < a.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

// y = x(1 + p y + q y^2) by fixed-point iteration
Poly quadratic_tree(std::size_t n, std::int64_t p, std::int64_t q) {
  Poly y(n + 1, 0);
  for (std::size_t it = 0; it <= n; ++it) {
    const Poly y2 = mul(y, y);
    Poly next(n + 1, 0);
    for (std::size_t k = 0; k < n; ++k) next[k + 1] = (k == 0 ? 1 : 0) + p * y[k] + q * y2[k];
    y = next;
  }
  return y;
}

// S(A(x)) with A(0) = 0
Poly compose(const Poly& s, const Poly& a) {
  Poly out(a.size(), 0), pw(a.size(), 0);
  pw[0] = 1;
  for (std::size_t k = 0; k < s.size(); ++k) {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += s[k] * pw[i];
    pw = mul(pw, a);
  }
  return out;
}

std::vector<std::int64_t> column(const Json& j, int component) {
  std::vector<std::int64_t> c;
  for (const auto& row : j["coefficients"])
    if (row["component"] == component) {
      EXPECT_EQ(row["den"], "1");
      c.push_back(std::stoll(row["num"].get<std::string>()));
    }
  return c;
}

}  // namespace

TEST(CliSolve, CatalanPattern) {
  const Result r = run({"solve", "--registry", "ex-3.1", "-N", "9"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("9\t14\n"), std::string::npos) << r.out;
  const Json j = run_json({"solve", "--registry", "ex-3.1", "-N", "9"});
  EXPECT_EQ(column(j, 1), quadratic_tree(9, 0, 1));
  EXPECT_EQ(j["support_stride"][0], 2);
}

TEST(CliSolve, ComposedSeries) {
  const Json j = run_json({"solve", "--registry", "ex-3.6", "-N", "6"});
  // symmetric: T = S(A), S = z(1 + S + S^2), A = x(1 + 9 A^2)
  const Poly t = compose(quadratic_tree(6, 1, 1), quadratic_tree(6, 0, 9));
  EXPECT_EQ(column(j, 1), t);
  EXPECT_EQ(column(j, 2), t);
  EXPECT_EQ(t[3], 11);
}

TEST(CliSolve, InvalidInput) {
  const Result bad = run({"solve", temp_file("bad.sys", "y = x*(1 - y);\n")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find(":1:10:"), std::string::npos) << bad.err;
  // parses, but G(x, 0) = 0 breaks well-conditioning
  const Result cond = run({"solve", temp_file("cond.sys", "y = x*y^2;\n")});
  EXPECT_EQ(cond.code, 2);
  EXPECT_NE(cond.err.find("not well-conditioned"), std::string::npos) << cond.err;
  EXPECT_EQ(run({"solve", "/nonexistent/file.sys"}).code, 2);
  EXPECT_EQ(run({"solve"}).code, 2);
  EXPECT_EQ(run({"solve", "--registry", "nope"}).code, 2);
  EXPECT_EQ(run({"solve", "--registry", "ex-3.1", temp_file("ok.sys", "y = x*(1 + y^2);\n")}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"classify", "--registry", "ex-3.1", "-N", "8"}).code, 2);
  EXPECT_EQ(run({"classify", "--registry", "ex-3.1", "--starts", "0"}).code, 2);
  EXPECT_EQ(run({"classify", "--registry", "ex-3.1", "--format", "xml"}).code, 2);
  EXPECT_EQ(run({"classify", "--registry", "ex-3.1", "--box", "1,x"}).code, 2);
  EXPECT_EQ(run({"classify", "--registry", "ex-4.1", "--box", "1,2,3,4"}).code, 2);
  EXPECT_EQ(run({"classify", "--registry", "ex-3.1", "--eigentol", "-1"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliCharpoints, Examples) {
  const Json j41 = run_json({"charpoints", "--registry", "ex-4.1"});
  ASSERT_EQ(j41["points"].size(), 2u);
  EXPECT_NEAR(j41["points"][0]["a"].get<double>(), (2 * std::sqrt(2.0) - 1) / 7, 1e-9);
  EXPECT_TRUE(j41["points"][0]["is_eigenpoint"].get<bool>());
  EXPECT_FALSE(j41["points"][1]["is_eigenpoint"].get<bool>());

  const Result r54 = run({"charpoints", "--registry", "ex-5.4"});
  ASSERT_EQ(r54.code, 0);
  EXPECT_NE(r54.out.find("4 characteristic point(s)"), std::string::npos) << r54.out;
  EXPECT_NE(r54.out.find("a = 0.415319835873"), std::string::npos) << r54.out;

  EXPECT_EQ(run_json({"charpoints", "--registry", "meir-moon"})["points"].size(), 0u);
}

TEST(CliCharpoints, BoxOverride) {
  // the box places the starts; roots reached from them are kept even past x_max
  const Json j = run_json({"charpoints", "--registry", "ex-4.1", "--box", "0.25,3"});
  EXPECT_EQ(j["box"]["x_max"], 0.25);
  EXPECT_EQ(j["box"]["y_max"], Json::array({3.0, 3.0}));
  for (const auto& p : j["points"]) {
    const double a = p["a"].get<double>();
    EXPECT_TRUE(std::fabs(a - (2 * std::sqrt(2.0) - 1) / 7) < 1e-9 || std::fabs(a - (2 * std::sqrt(3.0) - 1) / 11) < 1e-9)
        << a;
  }
  const Json k = run_json({"charpoints", "--registry", "ex-4.1", "--box", "0.3,1,2"});
  EXPECT_EQ(k["box"]["y_max"], Json::array({1.0, 2.0}));
}

TEST(CliClassify, Examples) {
  const Result r31 = run({"classify", "--registry", "ex-3.1"});
  ASSERT_EQ(r31.code, 0);
  EXPECT_NE(r31.out.find("eigenpoint: rho = 0.5, tau = (1)"), std::string::npos) << r31.out;

  const Result r37 = run({"classify", "--registry", "ex-3.7"});
  ASSERT_EQ(r37.code, 0);
  EXPECT_NE(r37.out.find("no eigenpoint found; boundary-estimated rho = 0.125"), std::string::npos) << r37.out;
  EXPECT_NE(r37.out.find("Lambda(rho, tau) = 0.75 < 1"), std::string::npos) << r37.out;

  const Json j = run_json({"classify", "--registry", "ex-4.1"});
  EXPECT_EQ(j["method"], "eigenpoint");
  EXPECT_NEAR(j["rho"].get<double>(), (2 * std::sqrt(2.0) - 1) / 7, 1e-9);
  EXPECT_NEAR(j["tau"][1].get<double>(), 1 / std::sqrt(2.0), 1e-9);
  EXPECT_LT(j["cross_check"]["gap"].get<double>(), 1e-2);
}

TEST(CliClassify, MultipleEigenpointsExit4) {
  // an absurd tolerance makes both points of ex-4.1 eigenpoints
  const Result r = run({"classify", "--registry", "ex-4.1", "--eigentol", "0.5"});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("eigenpoints"), std::string::npos) << r.err;
}

TEST(CliClassify, DeterministicJson) {
  for (const char* cmd : {"classify", "charpoints"}) {
    const Result a = run({cmd, "--registry", "ex-5.4", "--format", "json", "--seed", "5"});
    const Result b = run({cmd, "--registry", "ex-5.4", "--format", "json", "--seed", "5"});
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
  }
}

TEST(CliAsympt, Examples) {
  const Json j = run_json({"asympt", "--registry", "ex-3.1"});
  ASSERT_EQ(j["components"].size(), 1u);
  EXPECT_NEAR(j["components"][0]["rho_hat"].get<double>(), 0.5, 1e-3);
  EXPECT_NEAR(j["components"][0]["exponent_hat"].get<double>(), 1.5, 0.05);
  EXPECT_EQ(j["components"][0]["stride"], 2);
  EXPECT_EQ(j["components"][0]["window"][1], 2000);

  // printed to four places
  const Json k = run_json({"asympt", "--registry", "ex-4.1"});
  for (const auto& c : k["components"]) EXPECT_NEAR(c["rho_hat"].get<double>(), 0.2612, 5e-5);

  const Result few = run({"asympt", "--registry", "ex-3.1", "-N", "100"});
  EXPECT_EQ(few.code, 2);
  EXPECT_NE(few.err.find("nonzero coefficients"), std::string::npos) << few.err;
}

TEST(CliTransform, Examples) {
  const Json sat = run_json({"transform", "--registry", "sec-4.1", "--saturate"});
  EXPECT_TRUE(sat["jacobian_zeros"].empty());
  EXPECT_GT(sat["steps"].size(), 0u);
  EXPECT_TRUE(sat["invariance"]["pass"].get<bool>());
  EXPECT_TRUE(sat["invariance"]["standard_solution_equal"].get<bool>());
  // the printed system parses back
  EXPECT_NO_THROW(parse(sat["transformed"].get<std::string>()));

  const Json one = run_json({"transform", "--registry", "ex-4.1", "--step", "i=1,j=2,occ=1,alpha=1/2"});
  EXPECT_EQ(one["steps"].size(), 1u);
  EXPECT_EQ(one["steps"][0]["alpha"]["den"], "2");
  EXPECT_EQ(one["invariance"]["points"].size(), 2u);
  EXPECT_TRUE(one["invariance"]["pass"].get<bool>());

  const Json id = run_json({"transform", "--registry", "ex-4.1", "--step", "alpha=0"});
  EXPECT_TRUE(id["invariance"]["pass"].get<bool>());
  const SystemSpec a = parse(id["transformed"].get<std::string>()), b = parse(find_registry_entry("ex-4.1")->text);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_TRUE(structurally_equal(a.equations[i], b.equations[i]));
}

TEST(CliTransform, Errors) {
  EXPECT_EQ(run({"transform", "--registry", "sec-4.1", "--saturate", "--max-steps", "1"}).code, 3);
  EXPECT_EQ(run({"transform", "--registry", "ex-4.1", "--step", "i=1,j=2,occ=2"}).code, 2);
  EXPECT_EQ(run({"transform", "--registry", "ex-4.1", "--step", "i=1,j=2,alpha=2"}).code, 2);
  EXPECT_EQ(run({"transform", "--registry", "ex-4.1"}).code, 2);
}

TEST(CliVerify, SingleEntryAndTampering) {
  const Result r = run({"verify", "--only", "ex-5.4"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out, "PASS ex-5.4\n");
  EXPECT_EQ(run({"verify", "--only", "nope"}).code, 2);

  RegistryEntry tampered = *find_registry_entry("ex-3.1");
  tampered.points[0].coords[0] = {"0.51", 0.51};
  tampered.extreme->method = "boundary-estimated";
  const auto v = cli::verify_entry(tampered, cli::RunConfig{});
  EXPECT_FALSE(v.pass);
  ASSERT_EQ(v.failures.size(), 2u);
  EXPECT_NE(v.failures[0].find("closest found (0.5, 1)"), std::string::npos) << v.failures[0];
  EXPECT_NE(v.failures[1].find("method eigenpoint, expected boundary-estimated"), std::string::npos) << v.failures[1];
}

TEST(CliVerify, FullRegistry) {
  const Json j = run_json({"verify"});
  EXPECT_TRUE(j["pass"].get<bool>()) << j.dump(2);
  EXPECT_EQ(j["entries"].size(), registry().size());
}

TEST(CliSystems, SampleFilesClassify) {
  const std::string dir = CHARPOINT_SOURCE_DIR "/systems/";
  for (const char* f : {"binary-trees.sys", "two-colors.sys", "periodic-four.sys", "rooted-trees-cut.sys"}) {
    const Json j = run_json({"classify", dir + f});
    EXPECT_EQ(j["method"], "eigenpoint") << f;
    EXPECT_NEAR(j["lambda_at_extreme"].get<double>(), 1.0, 1e-6) << f;
  }
}
