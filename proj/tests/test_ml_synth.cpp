#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "mlq/ml/data.hpp"
#include "mlq/ml/synth.hpp"

using namespace mlq;
using namespace mlq::ml;

namespace {

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (true) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) {
                cells.push_back(line.substr(pos));
                break;
            }
            cells.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

double num(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

} // namespace

TEST_CASE("generation is a pure function of preset, seed, and row count") {
    for (const auto& preset : synthetic_presets()) {
        std::string a = gen_synthetic(preset, 10, 64);
        std::string b = gen_synthetic(preset, 10, 64);
        CHECK(a == b);
        CHECK(a != gen_synthetic(preset, 11, 64)); // the seed matters
    }
}

TEST_CASE("smarthome loads have separated OFF and ON bands") {
    auto rows = split_csv(gen_synthetic("smarthome-cluster", 10, 200));
    REQUIRE(rows.size() == 200);
    bool saw_off = false, saw_on = false;
    for (const auto& row : rows) {
        REQUIRE(row.size() == 10); // nine appliances + aggregate
        for (std::size_t c = 0; c < 9; ++c) {
            double w = num(row[c]);
            // appliances are either idling below 5 W or drawing above 400 W
            CHECK((w < 5.0 || w > 400.0));
            saw_off = saw_off || w < 5.0;
            saw_on = saw_on || w > 400.0;
        }
    }
    CHECK(saw_off);
    CHECK(saw_on);
}

TEST_CASE("the washer-dryer column dwarfs every other appliance when running") {
    auto rows = split_csv(gen_synthetic("smarthome-cluster", 10, 400));
    bool washer_ran = false;
    for (const auto& row : rows) {
        double washer = num(row[8]);
        if (washer > 400.0) {
            washer_ran = true;
            CHECK(washer >= 2200.0);
            CHECK(washer <= 2400.0);
            for (std::size_t c = 0; c < 8; ++c) CHECK(num(row[c]) < 500.0);
        }
    }
    CHECK(washer_ran);
}

TEST_CASE("the aggregate column is the sum of the appliances within one watt") {
    auto rows = split_csv(gen_synthetic("smarthome-regress", 10, 150));
    for (const auto& row : rows) {
        REQUIRE(row.size() == 11); // appliances, aggregate, target
        double sum = 0;
        for (std::size_t c = 0; c < 9; ++c) sum += num(row[c]);
        CHECK(std::abs(num(row[9]) - sum) <= 1.0 + 1e-9);
        // the regression target tracks the washer-dryer column
        CHECK(std::abs(num(row[10]) - num(row[8])) <= 1.0 + 1e-9);
    }
}

TEST_CASE("classification labels flag exactly the rows where the washer-dryer runs") {
    auto rows = split_csv(gen_synthetic("smarthome-classify", 10, 300));
    std::size_t on = 0;
    for (const auto& row : rows) {
        REQUIRE(row.size() == 11);
        bool running = num(row[8]) > 200.0;
        CHECK(row[10] == (running ? "true" : "false"));
        on += running;
    }
    // square waves keep both phases populated
    CHECK(on > 50);
    CHECK(on < 250);
}

TEST_CASE("line rows satisfy y = 2x + 1 exactly") {
    auto rows = split_csv(gen_synthetic("line", 10, 100));
    REQUIRE(rows.size() == 100);
    for (const auto& row : rows) {
        REQUIRE(row.size() == 2);
        double x = num(row[0]);
        CHECK(x >= -10.0);
        CHECK(x <= 10.0);
        // shortest round-trip rendering parses back to the generator's exact doubles,
        // so the identity holds bit for bit
        CHECK(num(row[1]) == 2 * x + 1);
    }
}

TEST_CASE("separable-2d puts opposite labels in opposite quadrants") {
    auto rows = split_csv(gen_synthetic("separable-2d", 10, 200));
    std::size_t ones = 0;
    for (const auto& row : rows) {
        REQUIRE(row.size() == 3);
        double x = num(row[0]), y = num(row[1]);
        if (row[2] == "1") {
            ++ones;
            CHECK(x > 0.5);
            CHECK(y > 0.5);
        } else {
            REQUIRE(row[2] == "0");
            CHECK(x < -0.5);
            CHECK(y < -0.5);
        }
    }
    CHECK(ones > 50); // both classes are drawn
    CHECK(ones < 150);
}

TEST_CASE("the timestamp option prepends one logical-clock stamp per row") {
    auto rows = split_csv(gen_synthetic("line", 10, 5, true));
    REQUIRE(rows.size() == 5);
    CHECK(rows[0][0] == "01-01-2024 00:00:00");
    CHECK(rows[1][0] == "01-01-2024 00:00:08");
    CHECK(rows[4][0] == "01-01-2024 00:00:32");
    for (const auto& row : rows) {
        REQUIRE(row.size() == 3);
        CHECK_NOTHROW(parse_timestamp(row[0]));
    }
}

TEST_CASE("unknown presets are rejected by name") {
    CHECK_THROWS_WITH_AS(gen_synthetic("smart-fridge", 10, 10),
                         doctest::Contains("unknown dataset preset 'smart-fridge'"), MlError);
}
