#include "dhr/cli.hpp"
#include "dhr/json_io.hpp"
#include "fixture_cache.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace dhr;
namespace tst = dhr::testing;
using io::Json;

namespace {

Mat unit_matrix(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
  Mat m = Mat::Zero(d, d);
  m(i, j) = 1.0;
  return m;
}

// Two spacelike qubits: A(a) = M_2 (x) 1, A(b) = 1 (x) M_2, plus a charge Ad(sigma_z (x) 1) at a.
io::NetSpecDocument two_qubits() {
  const CausalSite site({"a", "b"}, {{"a", "a"}, {"b", "b"}}, {{"a", "b"}, {"b", "a"}});
  std::vector<Mat> ba, bb;
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) {
      ba.push_back(kron(unit_matrix(2, i, j), identity(2)));
      bb.push_back(kron(identity(2), unit_matrix(2, i, j)));
    }
  auto net = NetModel::build(site, {ConcreteAlgebra::from_basis(4, ba), ConcreteAlgebra::from_basis(4, bb)});
  Mat z = identity(2);
  z(1, 1) = -1.0;
  const Mat u = kron(z, identity(2));
  io::NetSpecDocument doc;
  doc.name = "two_qubits";
  doc.net = net;
  const auto iota = Amplimorphism::identity(net);
  doc.objects.push_back({"iota", iota, trivial_family(iota, 0)});
  doc.objects.push_back({"rho", Amplimorphism::conjugation(net, u, 1, Region{0}, "rho"), std::nullopt});
  doc.options.tol = 1e-10;
  return doc;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "dhr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

}  // namespace

TEST(Json, MatrixRoundTripIsExact) {
  DetRng rng(12);
  const Mat m = random_unitary(5, rng);
  const Json j = io::matrix_to_json(m);
  EXPECT_EQ(j.size(), 5u);
  EXPECT_EQ(j[0][0].size(), 2u);
  EXPECT_EQ(io::matrix_from_json(Json::parse(j.dump())), m);
}

TEST(Json, MalformedMatricesAreRejected) {
  EXPECT_THROW(io::matrix_from_json(Json::parse("[]")), io::ParseError);
  EXPECT_THROW(io::matrix_from_json(Json::parse("[[[1,0]],[[1,0],[0,0]]]")), io::ParseError);
  EXPECT_THROW(io::matrix_from_json(Json::parse("[[1,2]]")), io::ParseError);
}

TEST(Json, DocumentRoundTrip) {
  const auto doc = two_qubits();
  const Json j = io::to_json(doc);
  EXPECT_EQ(j["format"], io::kNetSpecFormat);
  const auto back = io::document_from_json(Json::parse(j.dump()));
  EXPECT_EQ(back.name, doc.name);
  EXPECT_EQ(back.net->site().ids(), doc.net->site().ids());
  EXPECT_EQ(back.net->global().dim(), 16);
  ASSERT_EQ(back.objects.size(), 2u);
  EXPECT_TRUE(back.object("iota").rho.is_identity());
  EXPECT_TRUE(back.object("iota").family);
  EXPECT_FALSE(back.object("rho").family);
  const auto& r = back.object("rho").rho;
  ASSERT_TRUE(r.support());
  EXPECT_EQ(*r.support(), 0u);
  for (std::size_t k = 0; k < r.images().size(); ++k)
    EXPECT_LT(tst::distance(r.images()[k], doc.object("rho").rho.images()[k]), 1e-15);
  ASSERT_TRUE(back.options.tol);
  EXPECT_EQ(*back.options.tol, 1e-10);
  EXPECT_EQ(io::to_json(back).dump(), j.dump());
  EXPECT_THROW(back.object("sigma"), io::ParseError);
}

TEST(Json, SchemaViolationsAreParseErrors) {
  const Json good = io::to_json(two_qubits());
  auto broken = [&](auto edit) {
    Json j = good;
    edit(j);
    return j;
  };
  EXPECT_THROW(io::document_from_json(broken([](Json& j) { j["format"] = "other/1"; })), io::ParseError);
  EXPECT_THROW(io::document_from_json(broken([](Json& j) { j.erase("net"); })), io::ParseError);
  EXPECT_THROW(io::document_from_json(broken([](Json& j) { j["net"]["dim"] = 0; })), io::ParseError);
  EXPECT_THROW(io::document_from_json(broken([](Json& j) { j["site"]["leq"].push_back({"a", "zz"}); })),
               io::ParseError);
  EXPECT_THROW(io::document_from_json(broken([](Json& j) { j["objects"][1]["object"]["multiplicity"] = 0; })),
               io::ParseError);
  EXPECT_THROW(io::document_from_json(broken([](Json& j) { j["objects"][1]["object"]["images"].erase(0); })),
               io::ParseError);
  EXPECT_THROW(io::document_from_json(Json::array()), io::ParseError);
}

TEST(Json, FixtureDocumentAddsDirectSum) {
  const auto doc = io::document_from_fixture(tst::fixture("z2_2x2"));
  EXPECT_EQ(doc.objects.size(), 6u);
  const auto& sum = doc.object("sum_rho_r00c00");
  EXPECT_EQ(sum.rho.multiplicity(), 2);
  ASSERT_TRUE(sum.family);
  EXPECT_TRUE(validate_family(*sum.family).ok());
}

TEST(Cli, CheckNetExitCodes) {
  std::string text;
  EXPECT_EQ(run_cli({"check-net", "--fixture", "z2_2x2"}, &text), 0);
  EXPECT_NE(text.find("PASS"), std::string::npos);
  EXPECT_EQ(run_cli({"check-net", "--fixture", "z2f_2x2_full"}, &text), 1);
  EXPECT_EQ(run_cli({"check-net", "--fixture", "nope"}), 2);
  EXPECT_EQ(run_cli({}), 2);
  EXPECT_EQ(run_cli({"frobnicate"}), 2);
  EXPECT_EQ(run_cli({"--help"}), 0);
}

TEST(Cli, ObjectCommands) {
  EXPECT_EQ(run_cli({"analyze", "--fixture", "z2_2x2", "--object", "rho_r00c00"}), 0);
  EXPECT_EQ(run_cli({"conjugate", "--fixture", "z2_2x2", "--object", "rho_r00c00", "--candidate", "iota"}), 0);
  EXPECT_EQ(run_cli({"cocycle", "--fixture", "z2_2x2", "--object", "rho_r11c00"}), 0);
  EXPECT_EQ(run_cli({"analyze", "--fixture", "z2_2x2", "--object", "missing"}), 2);
  EXPECT_EQ(run_cli({"analyze", "--fixture", "z2_2x2"}), 2);
  EXPECT_EQ(run_cli({"conjugate", "--fixture", "z2f_2x2_full", "--object", "rho_r00c00"}), 1);
}

TEST(Cli, FilesAndMalformedInput) {
  {
    std::ofstream("malformed.json") << "{ \"format\": ";
  }
  EXPECT_EQ(run_cli({"check-net", "malformed.json"}), 2);
  EXPECT_EQ(run_cli({"check-net", "does_not_exist.json"}), 2);
  io::write_json(io::to_json(two_qubits()), "two_qubits.json");
  EXPECT_EQ(run_cli({"check-net", "two_qubits.json", "--out", "two_qubits_report.json"}), 0);
  const Json rep = Json::parse(slurp("two_qubits_report.json"));
  EXPECT_EQ(rep["format"], io::kReportFormat);
  EXPECT_EQ(rep["command"], "check-net");
  EXPECT_EQ(rep["document"], "two_qubits");
  EXPECT_EQ(rep["tolerances"]["tol"], 1e-10);
  EXPECT_EQ(run_cli({"cocycle", "two_qubits.json", "--object", "rho"}), 2);
}

TEST(Cli, EmittedFixtureLoadsAndGivesTheSameReport) {
  ASSERT_EQ(run_cli({"fixtures", "emit", "z2_2x2", "--out", "z2_emitted.json"}), 0);
  ASSERT_EQ(run_cli({"check-net", "z2_emitted.json", "--out", "from_file.json"}), 0);
  ASSERT_EQ(run_cli({"check-net", "--fixture", "z2_2x2", "--out", "from_fixture.json"}), 0);
  Json a = Json::parse(slurp("from_file.json")), b = Json::parse(slurp("from_fixture.json"));
  a.erase("input");
  b.erase("input");
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(run_cli({"fixtures", "emit", "unknown"}), 2);
}

TEST(Cli, ReportsAreByteIdenticalAcrossRuns) {
  ASSERT_EQ(run_cli({"analyze", "--fixture", "z2_2x2", "--object", "rho_r00c11", "--out", "run1.json"}), 0);
  ASSERT_EQ(run_cli({"analyze", "--fixture", "z2_2x2", "--object", "rho_r00c11", "--out", "run2.json"}), 0);
  const std::string x = slurp("run1.json"), y = slurp("run2.json");
  EXPECT_FALSE(x.empty());
  EXPECT_EQ(x, y);
}
