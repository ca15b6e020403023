#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "helpers.hpp"
#include "localvar/errors.hpp"
#include "localvar/fevd.hpp"
#include "localvar/grid.hpp"
#include "localvar/io.hpp"

using namespace localvar;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path("/tmp/localvar_test_" + name) {
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

std::string monthly_csv(int years) {
    std::string out = "date,US,DE\n";
    int year = 2003, month = 1;
    for (int i = 0; i < years * 12 + 1; ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%04d-%02d,%g,%g\n", year, month,
                      100.0 + i, 50.0 + 2.0 * i);
        out += buf;
        if (++month > 12) {
            month = 1;
            ++year;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("canonical grids come out of the geometric generator") {
    const IntervalGrid grid = IntervalGrid::default_grid();
    CHECK(grid.lengths() ==
          std::vector<Eigen::Index>{12, 15, 19, 23, 29, 37, 46});
    CHECK(grid.size() == 7);
    CHECK(grid.max_selectable() == 6);
    CHECK(grid.max_tested() == 7);
    CHECK(grid.length(1) == 12);
    CHECK(grid.length(7) == 46);

    const IntervalGrid lit = IntervalGrid::literature_grid();
    CHECK(lit.lengths() ==
          std::vector<Eigen::Index>{18, 23, 29, 36, 45, 57, 72});
}

TEST_CASE("grids must be strictly increasing and positive") {
    CHECK_THROWS_AS(IntervalGrid({12, 12, 15}), ConfigError);
    CHECK_THROWS_AS(IntervalGrid({12, 10}), ConfigError);
    CHECK_THROWS_AS(IntervalGrid({0, 5}), ConfigError);
    CHECK_THROWS_AS(IntervalGrid({12}), ConfigError);
}

TEST_CASE("monthly CSV ingestion") {
    const TempFile file("monthly.csv", monthly_csv(18));
    const TimeSeriesPanel panel = ingest_csv(file.path);
    CHECK(panel.rows() == 217);  // 2003-01 .. 2021-01 inclusive
    CHECK(panel.dim() == 2);
    CHECK(panel.names == std::vector<std::string>{"US", "DE"});
    CHECK(panel.axis.label(0) == "2003-01");
    CHECK(panel.axis.label(216) == "2021-01");
    CHECK(panel.values(0, 0) == 100.0);
    CHECK(panel.values(216, 1) == 50.0 + 2.0 * 216);
}

TEST_CASE("out-of-order rows are sorted by date") {
    const TempFile file("unsorted.csv",
                        "date,a,b\n2020-03,3,30\n2020-01,1,10\n2020-02,2,20\n");
    const TimeSeriesPanel panel = ingest_csv(file.path);
    CHECK(panel.values(0, 0) == 1.0);
    CHECK(panel.values(1, 0) == 2.0);
    CHECK(panel.values(2, 0) == 3.0);
}

TEST_CASE("gaps, duplicates and non-numeric cells are rejected") {
    const TempFile gap("gap.csv", "date,a,b\n2020-01,1,2\n2020-03,3,4\n");
    CHECK_THROWS_WITH_AS(ingest_csv(gap.path),
                         doctest::Contains("2020-02"), GapError);

    const TempFile dup("dup.csv", "date,a,b\n2020-01,1,2\n2020-01,3,4\n");
    CHECK_THROWS_AS(ingest_csv(dup.path), ParseError);

    const TempFile text("text.csv", "date,a,b\n2020-01,1,2\n2020-02,x,4\n");
    CHECK_THROWS_AS(ingest_csv(text.path), NonNumeric);

    CHECK_THROWS_AS(ingest_csv("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("column selection projects and reorders") {
    const TempFile file("five.csv",
                        "date,US,DE,FR,IT,UK\n2020-01,1,2,3,4,5\n"
                        "2020-02,6,7,8,9,10\n");
    const TimeSeriesPanel panel = ingest_csv(file.path, {"UK", "DE"});
    CHECK(panel.dim() == 2);
    CHECK(panel.names == std::vector<std::string>{"UK", "DE"});
    CHECK(panel.values(0, 0) == 5.0);
    CHECK(panel.values(0, 1) == 2.0);
    CHECK_THROWS_AS(ingest_csv(file.path, {"XX"}), ParseError);
}

TEST_CASE("integer-indexed CSV ingestion") {
    const TempFile file("indexed.csv", "t,a,b\n0,1,2\n1,3,4\n2,5,6\n");
    const TimeSeriesPanel panel = ingest_csv(file.path);
    CHECK(panel.rows() == 3);
    CHECK(panel.axis.label(2) == "2");
}

TEST_CASE("VarParams JSON round trip") {
    const VarParams params = test_helpers::table4_pre();
    const nlohmann::json j = params_to_json(params);
    CHECK(j.at("d") == 2);
    CHECK(j.at("p") == 1);
    const VarParams back = params_from_json(j);
    CHECK(back.intercept == params.intercept);
    CHECK(back.lag_coeffs[0] == params.lag_coeffs[0]);
    CHECK(back.noise_cov == params.noise_cov);

    const TempFile file("params.json", "");
    save_params(params, file.path);
    const VarParams loaded = load_params(file.path);
    CHECK(loaded.lag_coeffs[0] == params.lag_coeffs[0]);
}

TEST_CASE("malformed params JSON is rejected") {
    nlohmann::json j = params_to_json(test_helpers::table4_pre());
    j["lags"][0].erase(1);
    CHECK_THROWS_AS(params_from_json(j), ParseError);
    j = params_to_json(test_helpers::table4_pre());
    j["sigma"][0][1] = 9999.0;  // breaks symmetry
    CHECK_THROWS_AS(params_from_json(j), Error);
}

TEST_CASE("spillover table serialization") {
    const SpilloverTable table = gfevd(test_helpers::table4_pre(), 12);
    const std::string csv = spillover_table_csv(table);
    CHECK(csv.find("FROM_OTHERS") != std::string::npos);
    CHECK(csv.find("TO_OTHERS") != std::string::npos);

    const nlohmann::json j = spillover_table_json(table);
    CHECK(j.at("total") == table.total);
    CHECK(j.at("horizon") == 12);
    CHECK(j.at("normalized").size() == 2);
}
