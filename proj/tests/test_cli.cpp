#include <catch2/catch_amalgamated.hpp>

#include "cli.hpp"
#include "crnkit/complex_balance.hpp"
#include "crnkit/io.hpp"
#include "support/fixtures.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace crn;
namespace fs = std::filesystem;

namespace {

const std::string kDir = CRNKIT_NETWORKS_DIR;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

Json run_json(std::vector<std::string> args, int expected_code = 0) {
  const auto r = run_cli(std::move(args));
  INFO(r.err);
  REQUIRE(r.code == expected_code);
  return Json::parse(r.out);
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("crnkit_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& contents = {}) const {
    const auto p = (path_ / name).string();
    if (!contents.empty()) std::ofstream(p) << contents;
    return p;
  }

 private:
  fs::path path_;
};

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("analyze", "[cli]") {
  const Json cubic = run_json({"analyze", "--net", kDir + "/cubic_triangle.crn"});
  CHECK(cubic["n"] == 3);
  CHECK(cubic["m"] == 4);
  CHECK(cubic["r"] == 5);
  CHECK(cubic["l"] == 1);
  CHECK(cubic["dimS"] == 2);
  CHECK(cubic["deficiency"] == 1);
  CHECK(cubic["weakly_reversible"] == true);

  const Json square = run_json({"analyze", "--net", kDir + "/square_diagonal.crn"});
  CHECK(square["deficiency"] == 1);
  CHECK(square["weakly_reversible"] == true);

  const Json bistable = run_json({"analyze", "--net", kDir + "/bistable_1d.crn"});
  CHECK(bistable["l"] == 2);
  CHECK(bistable["dimS"] == 1);
  CHECK(bistable["deficiency"] == 1);

  TempDir tmp;
  const auto empty = run_cli({"analyze", "--net", tmp.file("empty.crn", "# nothing\n")});
  CHECK(empty.code == cli::kUsage);
  CHECK_THAT(empty.err, Catch::Matchers::ContainsSubstring("empty.crn"));

  const auto bad = run_cli({"analyze", "--net", tmp.file("bad.crn", "X -> Y\nX -> \n")});
  CHECK(bad.code == cli::kUsage);
  CHECK_THAT(bad.err, Catch::Matchers::ContainsSubstring("line 2"));

  CHECK(run_cli({"analyze", "--net", tmp.file("missing.crn")}).code == cli::kUsage);

  const auto written = tmp.file("report.json");
  CHECK(run_cli({"analyze", "--net", kDir + "/cubic_triangle.crn", "--out", written}).code == 0);
  CHECK(Json::parse(read_text_file(written)) == cubic);
}

TEST_CASE("check-cb", "[cli]") {
  const Json cb = run_json({"check-cb", "--net", kDir + "/cubic_triangle.crn", "--rates", kDir + "/cubic_triangle.cb.json"});
  CHECK(cb["complex_balanced"] == true);
  const auto x = cb["steady_state"].get<std::vector<double>>();
  REQUIRE(x.size() == 3);
  CHECK_THAT(x[0], Catch::Matchers::WithinRel(2.0, 1e-8));
  CHECK_THAT(x[1], Catch::Matchers::WithinRel(std::cbrt(4.0), 1e-8));
  CHECK_THAT(x[2], Catch::Matchers::WithinRel(std::cbrt(2.0), 1e-8));
  CHECK(cb["tolerances"]["toric_threshold"] == kToricThreshold);

  const Json other = run_json(
      {"check-cb", "--net", kDir + "/cubic_triangle.crn", "--rates", kDir + "/cubic_triangle.cb.json", "--x0", "3,1,1"});
  const auto y = other["steady_state"].get<std::vector<double>>();
  CHECK_THAT(y[0] + y[1] + y[2], Catch::Matchers::WithinRel(5.0, 1e-10));

  const Json unit = run_json(
      {"check-cb", "--net", kDir + "/cubic_triangle.crn", "--rates", kDir + "/cubic_triangle.unit.json"}, cli::kNegative);
  CHECK(unit["complex_balanced"] == false);
  CHECK(unit["membership_residual"].get<double>() > kToricThreshold);

  const auto inflow = run_cli({"check-cb", "--net", kDir + "/inflow_only.crn"});
  CHECK(inflow.code == cli::kUsage);
  CHECK_THAT(inflow.err, Catch::Matchers::ContainsSubstring("weakly reversible"));

  CHECK(run_cli({"check-cb", "--net", kDir + "/cubic_triangle.crn"}).code == cli::kUsage);
}

TEST_CASE("simulate", "[cli]") {
  const auto cubic = kDir + "/cubic_triangle.crn";
  const auto rates = kDir + "/cubic_triangle.cb.json";
  SECTION("converges to the balanced state of the class") {
    const Json j = run_json({"simulate", "--net", cubic, "--rates", rates, "--x0", "3,1,1", "--t-end", "50", "--format", "json"});
    CHECK(j["converged"] == true);
    const auto limit = j["converged_to"].get<std::vector<double>>();
    const auto net = test::cubic_triangle();
    const auto oracle = solve_cb_steady_state(net, RateAssignment{1, 2, 2, 2, 1}, test::vec({3, 1, 1}));
    for (int i = 0; i < 3; ++i) CHECK_THAT(limit[static_cast<std::size_t>(i)], Catch::Matchers::WithinRel(oracle.x(i), 1e-5));
    CHECK(j["conservation_drift"].get<double>() <= 1e-6);
  }
  SECTION("csv with metadata") {
    TempDir tmp;
    const auto out = tmp.file("traj.csv");
    REQUIRE(run_cli({"simulate", "--net", cubic, "--rates", rates, "--x0", "3,1,1", "--samples", "10", "--no-convergence",
                     "--out", out})
                .code == 0);
    const auto rows = lines(read_text_file(out));
    REQUIRE(rows.size() == 12);
    CHECK(rows[0] == "t,X,Y,Z");
    CHECK(rows[1] == "0,3,1,1");
    CHECK(rows[11].rfind("10,", 0) == 0);
    const Json meta = Json::parse(read_text_file(out + ".json"));
    CHECK(meta["ok"] == true);
    CHECK(meta["integrator"]["rel_tol"] == 1e-8);
  }
  SECTION("zero horizon") {
    const auto r = run_cli({"simulate", "--net", cubic, "--rates", rates, "--x0", "3,1,1", "--t-end", "0"});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out) == std::vector<std::string>{"t,X,Y,Z", "0,3,1,1"});
  }
  SECTION("inline rates") {
    const auto r = run_cli({"simulate", "--net", kDir + "/reversible_pair.crn", "--x0", "1,1", "--t-end", "1"});
    CHECK(r.code == 0);
  }
  SECTION("bad states") {
    const auto zero = run_cli({"simulate", "--net", cubic, "--rates", rates, "--x0", "3,0,1"});
    CHECK(zero.code == cli::kUsage);
    CHECK_THAT(zero.err, Catch::Matchers::ContainsSubstring("state must be strictly positive"));
    CHECK(run_cli({"simulate", "--net", cubic, "--rates", rates, "--x0", "3,1"}).code == cli::kUsage);
    CHECK(run_cli({"simulate", "--net", cubic, "--rates", rates}).code == cli::kUsage);
    CHECK(run_cli({"simulate", "--net", cubic, "--rates", rates, "--x0", "1,1,1", "--rel-tol", "-1"}).code == cli::kUsage);
  }
  SECTION("integration failure") {
    // x' = x^2 from x = 2 blows up at t = 1/2.
    TempDir tmp;
    const auto r = run_cli({"simulate", "--net", tmp.file("blowup.crn", "2X -> 3X : 1\n"), "--x0", "2", "--t-end", "1",
                            "--format", "json"});
    CHECK(r.code == cli::kNumerical);
    const Json j = Json::parse(r.out);
    CHECK(j["ok"] == false);
    CHECK_THAT(j["t_reached"].get<double>(), Catch::Matchers::WithinAbs(0.5, 1e-6));
    CHECK(j["times"].size() > 1);
  }
}

TEST_CASE("perturb", "[cli][robustness]") {
  const std::vector<std::string> base{"perturb", "--net", kDir + "/cubic_triangle.crn", "--rates",
                                      kDir + "/cubic_triangle.cb.json", "--eps", "0.05", "--trials", "20", "--seed", "42"};
  const auto first = run_cli(base);
  INFO(first.err);
  REQUIRE(first.code == 0);
  const Json j = Json::parse(first.out);
  CHECK(j["verdict"]["all_unique"] == true);
  CHECK(j["permanence"]["margin_to_boundary"].get<double>() > 0);
  CHECK(j["verdict"]["trials"].size() == 20);
  CHECK(j["plan"]["initial_conditions"].size() == 5);

  auto with_threads = base;
  with_threads.insert(with_threads.end(), {"--threads", "3"});
  CHECK(run_cli(base).out == first.out);
  CHECK(run_cli(with_threads).out == first.out);

  auto other_seed = base;
  other_seed[10] = "43";
  CHECK(run_cli(other_seed).out != first.out);

  auto too_wide = base;
  too_wide[6] = "1.5";
  CHECK(run_cli(too_wide).code == cli::kUsage);

  const Json dflt = run_json({"perturb", "--net", kDir + "/cubic_triangle.crn", "--rates", kDir + "/cubic_triangle.cb.json",
                              "--trials", "2", "--ics", "2"});
  CHECK_THAT(dflt["plan"]["eps"].get<double>(), Catch::Matchers::WithinRel(0.05 * std::sqrt(14.0), 1e-15));

  CHECK(run_cli({"perturb", "--net", kDir + "/cubic_triangle.crn", "--rates", kDir + "/cubic_triangle.unit.json"}).code ==
        cli::kUsage);
  CHECK(run_cli({"perturb", "--net", kDir + "/inflow_only.crn"}).code == cli::kUsage);
}

TEST_CASE("bifurcate", "[cli][robustness]") {
  const Json j = run_json({"bifurcate", "--net", kDir + "/bistable_1d.crn", "--kappa1", "1", "--kappa2", "0.5:6:0.5",
                           "--format", "json"});
  REQUIRE(j["points"].size() == 12);
  for (const auto& p : j["points"]) {
    const double k2 = p["kappa2"];
    const auto roots = p["num_roots"].get<std::size_t>();
    INFO(k2);
    if (k2 <= 3) CHECK(roots == 1);
    else CHECK(roots == 3);
  }
  const auto csv = run_cli({"bifurcate", "--net", kDir + "/bistable_1d.crn", "--kappa2", "1,4"});
  REQUIRE(csv.code == 0);
  const auto rows = lines(csv.out);
  CHECK(rows.size() == 1 + 1 + 3);
  CHECK(rows[0] == "kappa1,kappa2,num_roots,root,multiplicity,eigenvalue,stability");
  CHECK(run_cli({"bifurcate", "--net", kDir + "/cubic_triangle.crn", "--kappa2", "1"}).code == cli::kUsage);
}

TEST_CASE("equiv", "[cli][equivalence]") {
  const auto a = kDir + "/square_diagonal.crn", b = kDir + "/square_diagonal_extended.crn";
  const auto ra = kDir + "/square_diagonal.json", rb = kDir + "/square_diagonal_extended.json";
  const Json pair = run_json({"equiv", a, b, "--rates", ra, "--rates2", rb});
  CHECK(pair["equivalent"] == true);
  CHECK(pair["arithmetic"] == "exact");
  CHECK(run_json({"equiv", "--net", a, "--net2", b, "--rates", ra, "--rates2", rb})["equivalent"] == true);

  TempDir tmp;
  const auto off = tmp.file("off.json", R"({"0 -> X": 1, "X -> X+Y": 2, "X+Y -> Y": 1, "Y -> 0": 1, "0 -> X+Y": 2})");
  CHECK(run_json({"equiv", a, b, "--rates", off, "--rates2", rb}, cli::kNegative)["equivalent"] == false);

  const auto renamed = tmp.file("renamed.crn", "0 -> A\nA -> A + B\nA + B -> B\nB -> 0\n0 -> A + B\n");
  const auto mismatch = run_cli({"equiv", a, renamed, "--rates", ra, "--rates2", ra});
  CHECK(mismatch.code == cli::kUsage);
  CHECK(run_cli({"equiv", a, "--rates", ra}).code == cli::kUsage);

  const Json inside = run_json({"equiv", "--a1", "1", "--a5", "1", "--kappa2", "2", "--kappa3", "1", "--kappa4", "1"});
  CHECK(inside["verdict"] == "inside");
  CHECK_THAT(inside["reparameterization"]["kappa1"].get<double>(),
             Catch::Matchers::WithinAbs((std::sqrt(17.0) - 1) / 2, 1e-12));
  const Json outside = run_json({"equiv", "--a1", "1", "--a5", "1", "--kappa2", "4", "--kappa3", "1", "--kappa4", "1"});
  CHECK(outside["verdict"] == "outside");
  CHECK(outside["reparameterization"]["feasible"] == false);

  const auto sweep = run_cli({"equiv", "--a1", "1", "--a5", "1", "--kappa2", "1", "--kappa3", "0.5,1", "--kappa4", "0.5:4:0.5"});
  REQUIRE(sweep.code == 0);
  CHECK(lines(sweep.out).size() == 1 + 2 * 8);
  CHECK(run_json({"equiv", "--a1", "1", "--a5", "1", "--kappa2", "1", "--kappa3", "0.5,1", "--kappa4", "1",
                  "--format", "json"})["points"]
            .size() == 2);
  CHECK(run_cli({"equiv", "--a1", "1", "--a5", "1"}).code == cli::kUsage);
}

TEST_CASE("usage errors", "[cli]") {
  CHECK(run_cli({}).code == cli::kUsage);
  CHECK(run_cli({"frobnicate"}).code == cli::kUsage);
  CHECK(run_cli({"analyze"}).code == cli::kUsage);
  CHECK(run_cli({"analyze", "--net", kDir + "/cubic_triangle.crn", "--bogus"}).code == cli::kUsage);
  CHECK(run_cli({"simulate", "--net", kDir + "/cubic_triangle.crn", "--x0", "1,1,1", "--format", "xml"}).code == cli::kUsage);
  const auto help = run_cli({"--help"});
  CHECK(help.code == 0);
  CHECK_THAT(help.out, Catch::Matchers::ContainsSubstring("check-cb"));
}
