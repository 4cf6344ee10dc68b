#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "maslov/analysis.hpp"
#include "maslov/closedform.hpp"
#include "maslov/flow.hpp"

namespace maslov::cli {

using json = nlohmann::ordered_json;

/// Inclusive arithmetic sweep from..to in steps of `step`.
struct Sweep {
    double from = 0.0;
    double to = 0.0;
    double step = 1.0;

    std::vector<double> values() const;
};

/// Turing section: reaction matrix, diffusion ratio(s) and length(s).
struct TuringSpec {
    Eigen::Matrix2d A;
    std::vector<double> d;
    std::vector<double> L;
    double lambda_min = 0.0;
};

/// Validated configuration for the analyze and curves subcommands.
struct Config {
    std::optional<Problem> problem;
    bool scan_interior = true;
    std::optional<TuringSpec> turing;
    std::optional<std::string> out;
    std::optional<std::string> csv;
    json echo;  ///< the input document, echoed into reports
};

/// Parses a config document. Unknown keys, wrong types and a non-Dirichlet
/// bc1 raise ErrorKind::Config.
Config parse_config(const json& doc);

/// Reads a JSON config file; other formats raise ErrorKind::Config.
Config load_config(const std::string& path);

/// "from:to:step" or a single number.
Sweep parse_sweep(const std::string& text);

/// Reports.
json box_report_json(const Config& config, const BoxReport& report);
json turing_json(const TuringDiagnostics& t);
json error_json(const std::string& kind, const std::string& message, std::optional<double> x = std::nullopt,
                std::optional<double> lambda = std::nullopt);

/// Turing diagnostics for the constant problem V = A, D = diag(1, d) when the
/// problem has that shape; empty otherwise.
std::optional<std::pair<Eigen::Matrix2d, double>> turing_shape(const Problem& problem);

} // namespace maslov::cli
