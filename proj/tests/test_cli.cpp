#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "nmixprev/io.hpp"
#include "support/schema_check.hpp"
#include "support/spawn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kTool = NMIXPREV_TOOL_PATH;
const std::string kSchemaPath = NMIXPREV_SCHEMA_PATH;

json load_schema() {
  std::ifstream in(kSchemaPath);
  REQUIRE(in.good());
  return json::parse(in);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("fit on a simulated fixture") {
  const auto dir = spawn::fresh_dir("fit");
  const auto hist = (dir / "hist.csv").string();
  auto sim = spawn::run(kTool,
                        "simulate model --s 2.5 --p 0.1 --nmax 2000 "
                        "--offenders 50000 --seed 3 --out " + hist, dir);
  REQUIRE(sim.exit_code == 0);

  SUBCASE("JSON result validates against the shipped schema") {
    auto res = spawn::run(kTool,
                          "fit --input " + hist + " --nmax-ceiling 4000", dir);
    REQUIRE(res.exit_code == 0);
    const json doc = json::parse(res.out);
    const auto errors = schema_check::validate(load_schema(), doc);
    for (const auto& err : errors) MESSAGE(err);
    CHECK(errors.empty());
    CHECK(doc["fit"]["converged"].get<bool>());
    const double s_hat = doc["fit"]["s_hat"].get<double>();
    CHECK(s_hat > 2.2);
    CHECK(s_hat < 2.8);
    CHECK(doc["prevalence"]["o_hat"].get<double>() >=
          doc["prevalence"]["r"].get<double>());
    CHECK(!doc.contains("bootstrap"));  // --boot 0 is the default
    CHECK(doc["manifest"]["generator"] == "xoshiro256**");
    CHECK(doc["manifest"]["input_digest"].is_string());
  }

  SUBCASE("bootstrap section appears when requested and validates") {
    auto res = spawn::run(kTool,
                          "fit --input " + hist +
                              " --nmax-ceiling 4000 --boot 4 --seed 11", dir);
    REQUIRE(res.exit_code == 0);
    const json doc = json::parse(res.out);
    const auto errors = schema_check::validate(load_schema(), doc);
    for (const auto& err : errors) MESSAGE(err);
    CHECK(errors.empty());
    REQUIRE(doc.contains("bootstrap"));
    CHECK(doc["bootstrap"]["b"].get<int>() == 4);
    CHECK(doc["bootstrap"]["replicates"].size() == 4);
    const auto& s_iv = doc["bootstrap"]["intervals"]["s"];
    CHECK(s_iv["lo"].get<double>() <= s_iv["hi"].get<double>());
  }

  SUBCASE("bootstrap without a seed is a usage error") {
    auto res = spawn::run(kTool, "fit --input " + hist + " --boot 4", dir);
    CHECK(res.exit_code == 2);
    CHECK(!res.err.empty());
  }

  SUBCASE("result lands in --out atomically with identical content") {
    const auto out = (dir / "fit.json").string();
    auto res = spawn::run(kTool,
                          "fit --input " + hist +
                              " --nmax-ceiling 4000 --out " + out, dir);
    REQUIRE(res.exit_code == 0);
    CHECK(fs::exists(out));
    CHECK(!fs::exists(out + ".tmp"));
    const json doc = json::parse(spawn::slurp(out));
    CHECK(doc["fit"]["converged"].get<bool>());
  }

  SUBCASE("non-convergence exits 4 but still reports diagnostics") {
    auto res = spawn::run(kTool,
                          "fit --input " + hist +
                              " --nmax-ceiling 4000 --max-iters 0", dir);
    CHECK(res.exit_code == 4);
    const json doc = json::parse(res.out);
    CHECK(!doc["fit"]["converged"].get<bool>());
    CHECK(doc["prevalence"].is_null());
  }
}

TEST_CASE("fit data errors exit with the data class") {
  const auto dir = spawn::fresh_dir("fit_err");
  SUBCASE("missing file") {
    auto res = spawn::run(kTool, "fit --input " + (dir / "nope.csv").string(),
                          dir);
    CHECK(res.exit_code == 3);
    CHECK(!res.err.empty());
  }
  SUBCASE("zero reports row violates truncation") {
    const auto bad = dir / "bad.csv";
    write_text(bad, "reports,offenders\n0,5\n");
    auto res = spawn::run(kTool, "fit --input " + bad.string(), dir);
    CHECK(res.exit_code == 3);
  }
  SUBCASE("malformed row") {
    const auto bad = dir / "bad2.csv";
    write_text(bad, "reports,offenders\n1,5\nwat\n");
    auto res = spawn::run(kTool, "fit --input " + bad.string(), dir);
    CHECK(res.exit_code == 3);
    CHECK(res.err.find("line 3") != std::string::npos);
  }
  SUBCASE("empty data") {
    const auto bad = dir / "bad3.csv";
    write_text(bad, "reports,offenders\n");
    auto res = spawn::run(kTool, "fit --input " + bad.string(), dir);
    CHECK(res.exit_code == 3);
  }
  SUBCASE("grid below observed maximum") {
    const auto data = dir / "m9.csv";
    write_text(data, "reports,offenders\n1,50\n9,1\n");
    auto res = spawn::run(kTool,
                          "fit --input " + data.string() + " --nmax-grid 4",
                          dir);
    CHECK(res.exit_code == 3);
  }
}

TEST_CASE("simulate attachment") {
  const auto dir = spawn::fresh_dir("attach");
  SUBCASE("seed is mandatory") {
    auto res = spawn::run(kTool, "simulate attachment --q 0.1 --steps 100", dir);
    CHECK(res.exit_code == 2);
  }
  SUBCASE("q outside (0, 1] is a usage error") {
    auto res = spawn::run(
        kTool, "simulate attachment --q 1.5 --steps 100 --seed 1", dir);
    CHECK(res.exit_code == 2);
  }
  SUBCASE("writes histogram, log-log points, and a summary with manifest") {
    const auto hist = (dir / "h.csv").string();
    const auto points = (dir / "pts.csv").string();
    auto res = spawn::run(kTool,
                          "simulate attachment --q 0.1 --steps 20000 --seed 7 "
                          "--out " + hist + " --loglog " + points, dir);
    REQUIRE(res.exit_code == 0);
    const json summary = json::parse(res.out);
    CHECK(summary["truth"]["t_true"].get<long long>() == 20000);
    CHECK(summary["loglog"]["slope"].get<double>() < -0.5);
    CHECK(fs::exists(hist));
    CHECK(fs::exists(points));
    CHECK(fs::exists(hist + ".manifest.json"));
    const auto parsed = nmixprev::parse_histogram(fs::path(hist));
    CHECK(parsed.r() == summary["truth"]["o_true"].get<long long>());
    // writer output parses back to the identical histogram
    CHECK(nmixprev::histogram_to_csv(parsed) == spawn::slurp(hist));
  }
}

TEST_CASE("simulate model round-trips through the parser") {
  const auto dir = spawn::fresh_dir("model");
  const auto hist = (dir / "h.csv").string();
  auto res = spawn::run(kTool,
                        "simulate model --s 2 --p 0.5 --nmax 100 "
                        "--offenders 5000 --seed 9 --out " + hist, dir);
  REQUIRE(res.exit_code == 0);
  const json summary = json::parse(res.out);
  const auto parsed = nmixprev::parse_histogram(fs::path(hist));
  CHECK(parsed.r() == summary["reports"]["r"].get<long long>());
  CHECK(parsed.m() == summary["reports"]["m"].get<int>());
  CHECK(summary["reports"]["zero_count"].get<long long>() +
            summary["reports"]["r"].get<long long>() ==
        summary["truth"]["o_true"].get<long long>());
  CHECK(nmixprev::histogram_to_csv(parsed) == spawn::slurp(hist));
}

TEST_CASE("study emits the pinned CSV surface") {
  const auto dir = spawn::fresh_dir("study");
  const auto out = (dir / "study.csv").string();
  const std::string base =
      "study --s-list 2.0 --p-list 0.5,1.0 --nmax 20 --offenders 400 "
      "--replicas 2 --seed 5 --out " + out;
  auto res = spawn::run(kTool, base, dir);
  REQUIRE(res.exit_code == 0);
  const std::string csv = spawn::slurp(out);
  CHECK(csv.rfind("s_true,p_true,replica,s_hat,p_hat,nmax_hat,o_ratio,"
                  "t_ratio,converged\n",
                  0) == 0);
  // header + 2 settings x 2 replicas
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(fs::exists(out + ".manifest.json"));

  SUBCASE("table is invariant to the thread count") {
    const auto out2 = (dir / "study2.csv").string();
    auto res2 = spawn::run(kTool,
                           "study --s-list 2.0 --p-list 0.5,1.0 --nmax 20 "
                           "--offenders 400 --replicas 2 --seed 5 --threads 2 "
                           "--out " + out2, dir);
    REQUIRE(res2.exit_code == 0);
    CHECK(spawn::slurp(out2) == csv);
  }

  SUBCASE("seed is mandatory") {
    auto res3 = spawn::run(kTool,
                           "study --s-list 2.0 --p-list 0.5 --nmax 20 "
                           "--offenders 400 --replicas 2 --out " +
                               (dir / "x.csv").string(), dir);
    CHECK(res3.exit_code == 2);
  }
}

TEST_CASE("loglog command") {
  const auto dir = spawn::fresh_dir("loglog");
  SUBCASE("exact power-law input gives r_squared = 1") {
    const auto data = dir / "exact.csv";
    write_text(data, "reports,offenders\n1,256\n2,64\n4,16\n8,4\n");
    const auto points = (dir / "pts.csv").string();
    auto res = spawn::run(
        kTool, "loglog --input " + data.string() + " --out " + points, dir);
    REQUIRE(res.exit_code == 0);
    const json summary = json::parse(res.out);
    CHECK(summary["loglog"]["slope"].get<double>() ==
          doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(summary["loglog"]["r_squared"].get<double>() ==
          doctest::Approx(1.0).epsilon(1e-12));
    const std::string pts = spawn::slurp(points);
    CHECK(pts.rfind("log_value,log_count\n", 0) == 0);
    CHECK(std::count(pts.begin(), pts.end(), '\n') == 5);
  }
  SUBCASE("single bin exits with the data class") {
    const auto data = dir / "single.csv";
    write_text(data, "reports,offenders\n1,100\n");
    auto res = spawn::run(kTool, "loglog --input " + data.string(), dir);
    CHECK(res.exit_code == 3);
  }
}

TEST_CASE("identical seeded invocations are byte-identical") {
  const auto dir = spawn::fresh_dir("determinism");
  const auto out = (dir / "h.csv").string();
  const std::string cmd = "simulate model --s 2.5 --p 0.2 --nmax 500 "
                          "--offenders 2000 --seed 77 --out " + out;
  auto first = spawn::run(kTool, cmd, dir);
  REQUIRE(first.exit_code == 0);
  const std::string csv1 = spawn::slurp(out);
  const std::string manifest1 = spawn::slurp(out + ".manifest.json");
  auto second = spawn::run(kTool, cmd, dir);
  REQUIRE(second.exit_code == 0);
  CHECK(spawn::slurp(out) == csv1);
  CHECK(spawn::slurp(out + ".manifest.json") == manifest1);
  CHECK(first.out == second.out);
}
