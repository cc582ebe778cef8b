#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "specflow/cli.hpp"

using namespace specflow;
using Catch::Approx;
namespace cli = specflow::cli;

namespace {

const char* kFugledeSf = R"({
  "version": 1,
  "task": "sf",
  "family": {"kind": "fuglede", "horizon": 20, "n": 1, "samples": 201},
  "options": {"methods": ["phillips", "cayley", "oracle"], "guard": 1e-06, "refine": 20}
})";

const char* kDiracSf = R"({
  "version": 1,
  "task": "sf",
  "family": {"kind": "dirac1d", "k_range": 8, "m": 1, "samples": 201},
  "options": {"methods": ["phillips", "cayley", "oracle"]}
})";

const char* kFugledeMetrics = R"({
  "version": 1,
  "task": "metrics",
  "family": {"kind": "fuglede", "horizon": 20, "n": 5, "samples": 2}
})";

}  // namespace

TEST_CASE("job parsing validates the schema") {
    CHECK_THROWS_AS(cli::parse_job_text("not json"), InvalidJob);
    CHECK_THROWS_AS(cli::parse_job_text("[1,2]"), InvalidJob);
    CHECK_THROWS_AS(cli::parse_job_text(R"({"version": 2, "task": "sf"})"), InvalidJob);
    CHECK_THROWS_AS(cli::parse_job_text(R"({"version": 1, "task": "unknown"})"), InvalidJob);
    CHECK_THROWS_AS(cli::parse_job_text(R"({"version": 1, "task": "sf"})"), InvalidJob);
    // sf with an empty method list is invalid.
    CHECK_THROWS_AS(cli::parse_job_text(R"({
        "version": 1, "task": "sf",
        "family": {"kind": "fuglede", "horizon": 5, "n": 1, "samples": 11},
        "options": {"methods": []}
    })"),
                    InvalidJob);
    // family parameter validation surfaces as InvalidJob.
    CHECK_THROWS_AS(cli::parse_job_text(R"({
        "version": 1, "task": "sf",
        "family": {"kind": "fuglede", "horizon": 5, "n": 9, "samples": 11},
        "options": {"methods": ["oracle"]}
    })"),
                    InvalidJob);
    // connect needs exactly one source.
    CHECK_THROWS_AS(cli::parse_job_text(R"({
        "version": 1, "task": "connect",
        "connect": {"diag": [1.0], "phases": [3.0]}
    })"),
                    InvalidJob);

    auto job = cli::parse_job_text(kFugledeSf);
    CHECK(job.version == 1);
    CHECK(job.task == cli::Task::sf);
    CHECK(job.options.methods.size() == 3);
    CHECK(job.family.has_value());
}

TEST_CASE("sf job reproduces the Fuglede flow") {
    auto job = cli::parse_job_text(kFugledeSf);
    auto report = cli::run_job(job);
    CHECK(report.at("sf").at("phillips").get<std::int64_t>() == -1);
    CHECK(report.at("sf").at("cayley").get<std::int64_t>() == -1);
    CHECK(report.at("sf").at("oracle").get<std::int64_t>() == -1);
    CHECK(report.at("task") == "sf");
    CHECK(report.contains("partition"));
    CHECK(report.at("partition").at("segments").get<int>() >= 1);
}

TEST_CASE("sf job on the dirac family") {
    auto report = cli::run_job(cli::parse_job_text(kDiracSf));
    CHECK(report.at("sf").at("phillips").get<std::int64_t>() == 1);
    CHECK(report.at("sf").at("cayley").get<std::int64_t>() == 1);
    CHECK(report.at("sf").at("oracle").get<std::int64_t>() == 1);
}

TEST_CASE("metrics job reports the Fuglede distances") {
    auto report = cli::run_job(cli::parse_job_text(kFugledeMetrics));
    const double g = report.at("metrics").at("gamma").get<double>();
    const double r = report.at("metrics").at("riesz").get<double>();
    CHECK(g == Approx(10.0 / 26.0).epsilon(1e-13));
    CHECK(r >= 1.96116);
    CHECK(report.at("metrics").at("ratios").at("delta_tilde_over_gamma").get<double>() ==
          Approx(2.0).epsilon(1e-12));
}

TEST_CASE("reports are byte-stable") {
    for (const char* text : {kFugledeSf, kDiracSf, kFugledeMetrics}) {
        auto a = cli::render_report(cli::run_job(cli::parse_job_text(text)));
        auto b = cli::render_report(cli::run_job(cli::parse_job_text(text)));
        CHECK(a == b);
    }
}

TEST_CASE("trajectory emission") {
    auto job = cli::parse_job_text(R"({
        "version": 1, "task": "trajectory",
        "family": {"kind": "fuglede", "horizon": 8, "n": 1, "samples": 5},
        "options": {"window": 1.5}
    })");
    auto report = cli::run_job(job);
    CHECK(report.at("trajectory").at("window").get<double>() == 1.5);
    CHECK(report.at("trajectory").at("rows").get<int>() == 5);

    const auto path = build_path(*job.family);
    const std::string csv = cli::trajectory_csv(path, 1.5, 1e-6);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "t,lambda_1");
    // First data row: t = 0, single in-window eigenvalue 1 - 2t = 1.
    std::getline(lines, line);
    CHECK(line == "0,1");
}

TEST_CASE("trajectory window must certify") {
    auto job = cli::parse_job_text(R"({
        "version": 1, "task": "trajectory",
        "family": {"kind": "fuglede", "horizon": 8, "n": 1, "samples": 5},
        "options": {"window": 2.0}
    })");
    // 2.0 sits exactly on the eigenvalue at index 2.
    CHECK_THROWS_AS(cli::run_job(job), CannotCertify);
}

TEST_CASE("connect job deforms a Cayley image onto iI") {
    auto job = cli::parse_job_text(R"({
        "version": 1, "task": "connect",
        "connect": {"diag": [-2.0, 3.0]},
        "options": {"steps": 64}
    })");
    auto report = cli::run_job(job);
    CHECK(report.at("connect").at("max_unitarity_defect").get<double>() <= 1e-10);
    CHECK(report.at("connect").at("min_phase_distance").get<double>() >= 1e-8);
    CHECK(report.at("connect").at("endpoint_defect").get<double>() <= 1e-10);

    MatrixC<double> m(2, 2);
    m.setZero();
    m(0, 0) = std::polar(1.0, cayley_phase(-2.0));
    m(1, 1) = std::polar(1.0, cayley_phase(3.0));
    auto dump = cli::connect_dump(UnitaryOperator<double>(m), 64);
    // Last row ends at phases (pi/2, pi/2).
    const auto last_line_start = dump.csv.rfind('\n', dump.csv.size() - 2);
    const std::string last = dump.csv.substr(last_line_start + 1);
    CHECK(last.find("1.5707963267948966") != std::string::npos);
}

TEST_CASE("exit code mapping") {
    CHECK(cli::exit_code_for(InvalidJob("x")) == 3);
    CHECK(cli::exit_code_for(CannotCertify("x")) == 2);
    CHECK(cli::exit_code_for(UncertifiedPartition("x")) == 2);
    CHECK(cli::exit_code_for(std::runtime_error("x")) == 3);
}

TEST_CASE("fnv1a and rendering are stable") {
    CHECK(cli::fnv1a("") == 14695981039346656037ull);
    CHECK(cli::fnv1a("a") != cli::fnv1a("b"));
    CHECK(cli::format_significant(0.1) == "0.10000000000000001");
    CHECK(cli::format_significant(1.0) == "1");
}
