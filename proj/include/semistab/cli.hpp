#pragma once

#include <filesystem>

#include "semistab/applications.hpp"
#include "semistab/certificate.hpp"

namespace semistab::cli {

// Parsed run configuration; unknown keys anywhere in the document are
// rejected before any computation starts.
struct RunConfig {
    std::string kind;  // matrix-family | rd | bidomain | appendix
    nlohmann::json payload;
    std::vector<double> kappas{0.5};
    std::vector<double> alpha_grid;
    std::vector<double> t_grid;
    std::vector<double> xi_grid;
    double quadrature_tol = 1e-10;
    std::string out_dir;
    std::uint64_t seed = 0;
};

RunConfig parse_config(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& cfg);

Matrix parse_matrix(const nlohmann::json& rows);
nlohmann::json matrix_to_json(const Matrix& m);

// Problem identity: hash of the kind plus the canonical payload dump.
std::uint64_t problem_hash(const RunConfig& cfg);

// Builds the perturbation family and its nu for matrix-family, rd and
// bidomain configs.
struct BuiltProblem {
    PerturbationFamily family;
    double nu = 0.0;
    std::optional<RDProblem> rd;
    std::optional<BidomainProblem> bidomain;
};
BuiltProblem build_problem(const RunConfig& cfg);

int run(int argc, const char* const* argv);

}  // namespace semistab::cli
