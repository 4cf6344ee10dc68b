#include <gtest/gtest.h>

#include "config.hpp"
#include "maslov/errors.hpp"

namespace {

using namespace maslov;
using maslov::cli::json;

void expect_config_error(const json& doc) {
    try {
        (void)cli::parse_config(doc);
        FAIL() << "expected Config for " << doc.dump();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
}

json diagonal_doc() {
    return json::parse(R"({
        "L": 2, "D": [1, 1], "V": {"matrix": [[9, 0], [0, 1]]},
        "bc0": "dirichlet", "bc1": "dirichlet",
        "grid": {"x_samples": 80, "scan_rows": 40},
        "tolerances": {"cross": 1e-10}
    })");
}

TEST(Config, ParsesProblem) {
    const cli::Config c = cli::parse_config(diagonal_doc());
    ASSERT_TRUE(c.problem.has_value());
    EXPECT_EQ(c.problem->L, 2.0);
    EXPECT_EQ(c.problem->n(), 2);
    EXPECT_EQ(c.problem->grid.x_samples, 80);
    EXPECT_EQ(c.problem->grid.scan_rows, 40);
    EXPECT_EQ(c.problem->tol.cross, 1e-10);
    EXPECT_TRUE(c.scan_interior);
}

TEST(Config, BoundaryVariants) {
    json doc = diagonal_doc();
    doc["bc0"] = "neumann";
    EXPECT_EQ(cli::parse_config(doc).problem->bc0.kind, BoundaryKind::Neumann);
    doc["bc0"] = json::parse(R"({"robin": [[1, 0], [0, 2]]})");
    const cli::Config robin = cli::parse_config(doc);
    EXPECT_EQ(robin.problem->bc0.kind, BoundaryKind::Robin);
    EXPECT_EQ(robin.problem->bc0.theta(1, 1), 2.0);
}

TEST(Config, SampledAndBuiltinPotentials) {
    json doc = diagonal_doc();
    doc["V"] = json::parse(R"({"samples": {"x": [0, 2], "values": [[[1, 0], [0, 1]], [[3, 0], [0, 1]]]}})");
    const cli::Config c = cli::parse_config(doc);
    EXPECT_FALSE(c.problem->V.is_constant());
    EXPECT_DOUBLE_EQ(c.problem->V(1.0)(0, 0), 2.0);
    doc["V"] = json::parse(R"({"builtin": "turing"})");
    EXPECT_EQ(cli::parse_config(doc).problem->V(0.0)(1, 0), 3.0);
}

TEST(Config, RejectsInvalidDocuments) {
    json doc = diagonal_doc();
    doc["bc1"] = "neumann";
    expect_config_error(doc);

    doc = diagonal_doc();
    doc["unexpected"] = 1;
    expect_config_error(doc);

    doc = diagonal_doc();
    doc["grid"]["nz"] = 3;
    expect_config_error(doc);

    doc = diagonal_doc();
    doc["D"] = json::array({1, -1});
    expect_config_error(doc);

    doc = diagonal_doc();
    doc.erase("V");
    expect_config_error(doc);

    doc = diagonal_doc();
    doc["V"] = json::parse(R"({"matrix": [[1, 0], [0, 1]], "builtin": "zero"})");
    expect_config_error(doc);
}

TEST(Config, TomlIsRejected) {
    try {
        (void)cli::load_config("problem.toml");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
}

TEST(Config, TuringSection) {
    const json doc = json::parse(R"({"turing": {"A": [[1, -2], [3, -4]], "d_sweep": {"from": 5, "to": 6, "step": 0.5}, "L": 10}})");
    const cli::Config c = cli::parse_config(doc);
    EXPECT_FALSE(c.problem.has_value());
    ASSERT_TRUE(c.turing.has_value());
    EXPECT_EQ(c.turing->d, (std::vector<double>{5.0, 5.5, 6.0}));
    EXPECT_EQ(c.turing->L, (std::vector<double>{10.0}));
}

TEST(Sweep, ParsesRangesAndScalars) {
    EXPECT_EQ(cli::parse_sweep("1:2:0.25").values().size(), 5u);
    EXPECT_EQ(cli::parse_sweep("3").values(), (std::vector<double>{3.0}));
    EXPECT_THROW((void)cli::parse_sweep("1:x:2"), Error);
    EXPECT_THROW((void)cli::parse_sweep("1:2"), Error);
}

TEST(Report, JsonLayout) {
    const cli::Config c = cli::parse_config(diagonal_doc());
    const BoxReport r = box_index(*c.problem);
    const json j = cli::box_report_json(c, r);
    for (const char* key : {"problem", "lambda_infinity", "delta", "conjugate_points", "eigenvalues", "sides",
                            "m_index", "m_bottom_right", "morse", "interior", "turing", "warnings"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["m_index"], 0);
    EXPECT_EQ(j["conjugate_points"].size(), 1u);
    EXPECT_TRUE(j["turing"].is_null());
    EXPECT_EQ(j["sides"]["bottom"], 1);
    EXPECT_EQ(j["genericity"]["generic"], true);
}

TEST(Report, TuringShapeDetection) {
    json doc = diagonal_doc();
    EXPECT_FALSE(cli::turing_shape(*cli::parse_config(doc).problem).has_value());
    doc["V"] = json::parse(R"({"matrix": [[1, -2], [3, -4]]})");
    doc["D"] = json::array({1, 15.5});
    const auto shape = cli::turing_shape(*cli::parse_config(doc).problem);
    ASSERT_TRUE(shape.has_value());
    EXPECT_EQ(shape->second, 15.5);
}

} // namespace
