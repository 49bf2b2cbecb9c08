#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <sstream>

#include "nmixprev/errors.hpp"
#include "nmixprev/io.hpp"

using namespace nmixprev;

namespace {
ReportHistogram parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_histogram(in);
}
}  // namespace

TEST_CASE("histogram parsing") {
  SUBCASE("well-formed input derives M and R") {
    const auto hist = parse_text("reports,offenders\n1,70\n2,20\n3,10\n");
    CHECK(hist.m() == 3);
    CHECK(hist.r() == 100);
    CHECK(hist.counts().at(2) == 20);
  }

  SUBCASE("CRLF input is tolerated") {
    const auto hist = parse_text("reports,offenders\r\n1,5\r\n");
    CHECK(hist.r() == 5);
  }

  SUBCASE("zero-offender rows are accepted and ignored") {
    const auto hist = parse_text("reports,offenders\n1,5\n2,0\n");
    CHECK(hist.m() == 1);
    CHECK(hist.counts().count(2) == 0);
  }

  SUBCASE("reports value 0 violates truncation") {
    CHECK_THROWS_AS(parse_text("reports,offenders\n0,5\n"), DomainError);
  }

  SUBCASE("empty file after header") {
    CHECK_THROWS_AS(parse_text("reports,offenders\n"),
                    InsufficientDataError);
  }

  SUBCASE("all-zero rows count as empty") {
    CHECK_THROWS_AS(parse_text("reports,offenders\n1,0\n2,0\n"),
                    InsufficientDataError);
  }

  SUBCASE("bad header") {
    CHECK_THROWS_AS(parse_text("offenders,reports\n1,5\n"), ParseError);
  }

  SUBCASE("malformed rows carry their line number") {
    try {
      parse_text("reports,offenders\n1,5\nbogus\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_text("reports,offenders\n1,x\n"), ParseError);
    CHECK_THROWS_AS(parse_text("reports,offenders\n1.5,2\n"), ParseError);
    CHECK_THROWS_AS(parse_text("reports,offenders\n1, 5\n"), ParseError);
    CHECK_THROWS_AS(parse_text("reports,offenders\n-2,5\n"), ParseError);
    CHECK_THROWS_AS(parse_text("reports,offenders\n2,-5\n"), ParseError);
  }

  SUBCASE("duplicate report values are forbidden") {
    CHECK_THROWS_AS(parse_text("reports,offenders\n1,5\n1,2\n"), ParseError);
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(parse_histogram(std::filesystem::path(
                        "/nonexistent/histogram.csv")),
                    FileError);
  }
}

TEST_CASE("histogram round-trips through CSV") {
  ReportHistogram hist;
  hist.add(1, 70);
  hist.add(2, 20);
  hist.add(9, 1);
  const std::string csv = histogram_to_csv(hist);
  CHECK(csv == "reports,offenders\n1,70\n2,20\n9,1\n");
  CHECK(parse_text(csv) == hist);
}

TEST_CASE("loglog points use natural logs") {
  ReportHistogram hist;
  hist.add(1, 100);
  hist.add(10, 10);
  const auto points = loglog_points(hist);
  REQUIRE(points.size() == 2);
  CHECK(points[0].log_value == 0.0);
  CHECK(points[1].log_value == doctest::Approx(std::log(10.0)));
  CHECK(points[0].log_count == doctest::Approx(std::log(100.0)));
  const std::string csv = loglog_points_to_csv(points);
  CHECK(csv.rfind("log_value,log_count\n", 0) == 0);
}

TEST_CASE("study table formatting") {
  StudyRow row;
  row.s_true = 2.5;
  row.p_true = 0.1;
  row.replica = 1;
  row.s_hat = 2.4375;
  row.p_hat = 0.11;
  row.n_max_hat = 2000;
  row.o_ratio = 1.01;
  row.t_ratio = 0.99;
  row.converged = true;
  StudyRow failed;
  failed.s_true = 2.5;
  failed.p_true = 0.01;
  failed.replica = 2;
  failed.s_hat = std::numeric_limits<double>::quiet_NaN();
  failed.p_hat = std::numeric_limits<double>::quiet_NaN();
  failed.o_ratio = std::numeric_limits<double>::quiet_NaN();
  failed.t_ratio = std::numeric_limits<double>::quiet_NaN();

  const std::string csv = study_to_csv({row, failed});
  CHECK(csv.rfind("s_true,p_true,replica,s_hat,p_hat,nmax_hat,o_ratio,"
                  "t_ratio,converged\n",
                  0) == 0);
  CHECK(csv.find("2.5,0.1,1,2.4375,0.11,2000,") != std::string::npos);
  CHECK(csv.find("2.5,0.01,2,nan,nan,0,nan,nan,0\n") != std::string::npos);
}

TEST_CASE("fnv1a64 known vectors") {
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a64_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("atomic writes replace the target in one step") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "nmixprev_io_test";
  fs::create_directories(dir);
  const fs::path target = dir / "out.txt";
  atomic_write_file(target, "first");
  CHECK(read_file(target) == "first");
  atomic_write_file(target, "second");
  CHECK(read_file(target) == "second");
  CHECK(!fs::exists(target.string() + ".tmp"));
  fs::remove_all(dir);
}
