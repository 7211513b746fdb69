#include "ellcount/cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using ellcount::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string field(const std::string& name) { return (fs::path(ELLCOUNT_FIELDS_DIR) / name).string(); }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ellcount_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("dims for the identity field") {
  const auto dir = scratch("dims");
  auto r = call({"dims", "--field", field("identity.json"), "--d", "3", "--out", dir.string()});
  CHECK(r.code == 0);
  const auto rows = lines(dir / "dims.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[1].rfind("1,3,3", 0) == 0);
  CHECK(rows[2].rfind("2,5,5", 0) == 0);
  CHECK(rows[3].rfind("3,7,7", 0) == 0);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "checks.csv"));

  r = call({"dims", "--field", field("identity.json"), "--d", "0", "--out", dir.string()});
  CHECK(r.code == 0);
  const auto zero = lines(dir / "dims.csv");
  REQUIRE(zero.size() == 2);
  CHECK(zero[1].rfind("0,1,1", 0) == 0);
}

TEST_CASE("configuration errors exit with 2") {
  const auto dir = scratch("errors");
  fs::create_directories(dir);
  {
    std::ofstream bad(dir / "bad.json");
    bad << R"({"family":"constant-SPD","n":2,"params":{"diagonal":[1,2],"shear":3}})";
  }
  auto r = call({"dims", "--field", (dir / "bad.json").string(), "--d", "1", "--out", dir.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("params.shear") != std::string::npos);

  CHECK(call({"dims", "--field", field("identity.json"), "--d", "5", "--out", dir.string()}).code == 2);
  CHECK(call({"dims", "--field", (dir / "missing.json").string(), "--d", "1"}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({}).code == 2);
  CHECK(call({"solve", "--field", field("identity.json"), "--trace", "tan:2", "--out", dir.string()}).code == 2);
  CHECK(call({"--help"}).code == 0);
}

TEST_CASE("verify subcommands") {
  const auto dir = scratch("verify");
  auto r = call({"verify", "lemma1", "--field", field("identity.json"), "--t", "1", "--d", "1", "--out", dir.string()});
  CHECK(r.code == 0);
  const auto pos = r.out.find("margin=");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(r.out.substr(pos + 7)) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(fs::exists(dir / "lemma1.csv"));

  r = call({"verify", "eigen28", "--field", field("diag_1_2.json"), "--t", "1", "--k", "50", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(lines(dir / "eigen28.csv").size() == 51);

  r = call({"verify", "theorem2", "--field", field("identity.json"), "--d", "20", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "margins.csv"));
}

TEST_CASE("spectrum, profile and solve") {
  const auto dir = scratch("misc");
  auto r = call({"spectrum", "--field", field("identity.json"), "--t", "1", "--m", "5", "--out", dir.string()});
  CHECK(r.code == 0);
  const auto rows = lines(dir / "spectrum.csv");
  REQUIRE(rows.size() == 6);
  const double expect[] = {0, 1, 1, 4, 4};
  for (int k = 0; k < 5; ++k) {
    std::stringstream ss(rows[static_cast<std::size_t>(k + 1)]);
    std::string idx, eta;
    std::getline(ss, idx, ',');
    std::getline(ss, eta, ',');
    CHECK(std::stod(eta) == doctest::Approx(expect[k]).epsilon(1e-3).scale(1.0));
  }

  r = call({"profile", "--field", field("conic_decay.json"), "--radii", "1,2", "--out", dir.string()});
  CHECK(r.code == 0);
  const auto prof = lines(dir / "profile.csv");
  REQUIRE(prof.size() == 3);
  CHECK(prof[0] == "r,lambda_r,Lambda_r,provenance");
  CHECK(prof[1].find("analytic tail") != std::string::npos);
  CHECK(prof[1].find(",1,1.3678794411714") != std::string::npos);

  r = call({"solve", "--field", field("radial_step.json"), "--trace", "x", "--r", "1", "--h", "0.02", "--probe",
            "0.25,0", "--out", dir.string()});
  CHECK(r.code == 0);
  const auto pos = r.out.find("probe=");
  REQUIRE(pos != std::string::npos);
  CHECK(std::abs(std::stod(r.out.substr(pos + 6)) - 4.0 / 13.0) < 2e-3);
  CHECK(fs::exists(dir / "solution_vertices.csv"));
}

TEST_CASE("outputs are byte-identical across runs") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& dir : {a, b}) {
    CHECK(call({"verify", "theorem2", "--field", field("checkerboard.json"), "--d", "1", "--out", dir.string()}).code == 0);
    CHECK(call({"profile", "--field", field("random.json"), "--out", dir.string()}).code == 0);
  }
  for (const auto* name : {"report.json", "margins.csv", "det_growth.csv", "profile.csv", "profile.json"}) {
    CAPTURE(name);
    CHECK(slurp(a / name) == slurp(b / name));
    CHECK_FALSE(slurp(a / name).empty());
  }
}
