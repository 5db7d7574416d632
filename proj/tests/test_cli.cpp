#include "doctest.h"

#include <fstream>

#include "semistab/cli.hpp"

using namespace semistab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("semistab_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& s) {
    std::ofstream out(p);
    out << s;
}

int run_cli(std::initializer_list<std::string> args) {
    std::vector<std::string> owned{"semistab"};
    owned.insert(owned.end(), args);
    std::vector<const char*> argv;
    for (const auto& a : owned) argv.push_back(a.c_str());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

json diagonal_config(const fs::path& dir) {
    json cfg = {
        {"kind", "matrix-family"},
        {"payload", {{"fixture", "diagonal"}, {"n", 2}}},
        {"kappas", {0.25, 0.5, 0.75}},
        {"grids",
         {{"alpha", {{"min", 1e-3}, {"max", 10.0}, {"points", 9}}},
          {"t", {{"min", 1e-2}, {"max", 30.0}, {"points", 9}}}}},
        {"out_dir", dir.string()}};
    return cfg;
}

}  // namespace

TEST_CASE("config round trip and unknown key rejection") {
    const fs::path dir = temp_dir("roundtrip");
    const json doc = diagonal_config(dir);
    const cli::RunConfig cfg = cli::parse_config(doc);
    const cli::RunConfig again = cli::parse_config(cli::config_to_json(cfg));
    CHECK(again.kind == cfg.kind);
    CHECK(again.kappas == cfg.kappas);
    CHECK(again.alpha_grid == cfg.alpha_grid);
    CHECK(again.t_grid == cfg.t_grid);
    CHECK(cli::problem_hash(again) == cli::problem_hash(cfg));

    json bad = doc;
    bad["surprise"] = 1;
    CHECK_THROWS_WITH_AS(cli::parse_config(bad), doctest::Contains("ConfigError"),
                         Error);
    json bad2 = doc;
    bad2["grids"]["sigma"] = json::object();
    CHECK_THROWS_WITH_AS(cli::parse_config(bad2), doctest::Contains("ConfigError"),
                         Error);
}

TEST_CASE("matrix payload parsing") {
    const json rows = {{{0.0, 0.0}, {1.0, 0.5}}, {{0.0, 0.0}, {-1.0, 0.0}}};
    const Matrix m = cli::parse_matrix(rows);
    CHECK(m(0, 1) == Complex(1.0, 0.5));
    CHECK(cli::matrix_to_json(m) == rows);
    CHECK_THROWS_WITH_AS(cli::parse_matrix(json::array({json::array({1.0})})),
                         doctest::Contains("ConfigError"), Error);
}

TEST_CASE("certify then validate round trip on the diagonal fixture") {
    const fs::path dir = temp_dir("certify");
    const fs::path cfg_path = dir / "config.json";
    write(cfg_path, diagonal_config(dir).dump());

    CHECK(run_cli({"certify", cfg_path.string()}) == 0);
    REQUIRE(fs::exists(dir / "certificate.json"));
    json cert;
    std::ifstream(dir / "certificate.json") >> cert;
    CHECK(cert.at("route") == "simple-eigenvalue");
    CHECK(cert.at("envelopes").size() == 3);
    CHECK(cert.at("tool_version") == kToolVersion);

    CHECK(run_cli({"validate", cfg_path.string(),
                   (dir / "certificate.json").string()}) == 0);
    REQUIRE(fs::exists(dir / "validate_kappa_0.5.csv"));
    std::ifstream csv(dir / "validate_kappa_0.5.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "alpha,t,measured_norm,envelope,ratio");

    // reruns are byte-identical
    const auto read_all = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    const std::string first = read_all(dir / "certificate.json");
    CHECK(run_cli({"certify", cfg_path.string()}) == 0);
    CHECK(read_all(dir / "certificate.json") == first);
}

TEST_CASE("validate fails with exit 3 on a corrupted certificate") {
    const fs::path dir = temp_dir("corrupt");
    const fs::path cfg_path = dir / "config.json";
    write(cfg_path, diagonal_config(dir).dump());
    REQUIRE(run_cli({"certify", cfg_path.string()}) == 0);

    json cert;
    std::ifstream(dir / "certificate.json") >> cert;
    for (auto& env : cert.at("envelopes"))
        for (auto& piece : env.at("pieces"))
            piece["log_prefactor"] = std::log(0.25);  // below the measured sup
    write(dir / "bad.json", cert.dump());
    CHECK(run_cli({"validate", cfg_path.string(), (dir / "bad.json").string()}) ==
          3);

    // mismatched problem hash is a config error, exit 2
    json other = diagonal_config(dir);
    other["payload"]["n"] = 3;
    write(dir / "other.json", other.dump());
    CHECK(run_cli({"validate", (dir / "other.json").string(),
                   (dir / "certificate.json").string()}) == 2);
}

TEST_CASE("rd config violating the D-condition exits 2") {
    const fs::path dir = temp_dir("rdbad");
    const json cfg = {
        {"kind", "rd"},
        {"payload",
         {{"a_cubic", 0.25}, {"d", 1.1}, {"L", 20.0}, {"n", 48},
          {"d_reference", 0.05}}},
        {"out_dir", dir.string()}};
    const fs::path cfg_path = dir / "config.json";
    write(cfg_path, cfg.dump());
    CHECK(run_cli({"certify", cfg_path.string()}) == 2);
}

TEST_CASE("appendix subcommand writes the destabilization report") {
    const fs::path dir = temp_dir("appendix");
    CHECK(run_cli({"--out", dir.string(), "appendix"}) == 0);
    REQUIRE(fs::exists(dir / "appendix.json"));
    json rep;
    std::ifstream(dir / "appendix.json") >> rep;
    REQUIRE(rep.at("a1").size() == 3);
    for (const auto& entry : rep.at("a1")) {
        CHECK(entry.at("destabilized_max_re").get<double>() > 0.0);
        CHECK(entry.at("w0_negdef").get<bool>());
        CHECK(entry.at("h1_h2_hold").get<bool>());
    }
    CHECK(rep.at("a2").at("essential_instability").get<bool>());
}

TEST_CASE("scan emits the sweep csv and optional plot") {
    const fs::path dir = temp_dir("scan");
    const json cfg = {
        {"kind", "rd"},
        {"payload", {{"a_cubic", 0.25}, {"d", 1.1}, {"L", 20.0}, {"n", 48}}},
        {"kappas", {0.5}},
        {"grids",
         {{"xi", {{"min", 0.1}, {"max", 2.0}, {"points", 5}}},
          {"t", {{"min", 0.01}, {"max", 20.0}, {"points", 7}}}}},
        {"out_dir", dir.string()}};
    const fs::path cfg_path = dir / "config.json";
    write(cfg_path, cfg.dump());
    CHECK(run_cli({"--plots", "scan", cfg_path.string()}) == 0);
    REQUIRE(fs::exists(dir / "scan.csv"));
    CHECK(fs::exists(dir / "scan_abscissa.svg"));
    std::ifstream csv(dir / "scan.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "xi,alpha,sup_scaled,log10_prefactor,spectral_abscissa");
}
