#include "semistab/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"

namespace semistab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw Error("ConfigError", "unknown key '" + it.key() + "' in " + where);
}

std::vector<double> parse_grid(const json& spec, double def_lo, double def_hi,
                               int def_points, bool with_zero) {
    double lo = def_lo, hi = def_hi;
    int points = def_points;
    if (!spec.is_null()) {
        reject_unknown_keys(spec, {"min", "max", "points"}, "grid spec");
        if (spec.contains("min")) lo = spec.at("min").get<double>();
        if (spec.contains("max")) hi = spec.at("max").get<double>();
        if (spec.contains("points")) points = spec.at("points").get<int>();
    }
    std::vector<double> g;
    if (with_zero) g.push_back(0.0);
    for (const double v : log_spaced(lo, hi, points)) g.push_back(v);
    return g;
}

json error_record(const Error& err) {
    return json{{"error", {{"code", err.code()}, {"message", err.what()}}}};
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("IoError", "cannot open " + path.string());
    out << content;
}

// minimal polyline chart, enough for the scan diagnostics
std::string svg_polyline(const std::vector<double>& xs,
                         const std::vector<double>& ys, const std::string& title) {
    const double w = 640, h = 400, m = 50;
    double xlo = xs.front(), xhi = xs.front(), ylo = ys.front(), yhi = ys.front();
    for (const double x : xs) { xlo = std::min(xlo, x); xhi = std::max(xhi, x); }
    for (const double y : ys) { ylo = std::min(ylo, y); yhi = std::max(yhi, y); }
    if (xhi == xlo) xhi = xlo + 1;
    if (yhi == ylo) yhi = ylo + 1;
    std::string svg =
        "<svg xmlns='http://www.w3.org/2000/svg' width='640' height='400'>\n"
        "<rect width='640' height='400' fill='white'/>\n<text x='20' y='24' "
        "font-size='14'>" + title + "</text>\n<polyline fill='none' "
        "stroke='steelblue' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double px = m + (xs[i] - xlo) / (xhi - xlo) * (w - 2 * m);
        const double py = h - m - (ys[i] - ylo) / (yhi - ylo) * (h - 2 * m);
        svg += format_double(px) + "," + format_double(py) + " ";
    }
    svg += "'/>\n</svg>\n";
    return svg;
}

}  // namespace

Matrix parse_matrix(const json& rows) {
    if (!rows.is_array() || rows.empty())
        throw Error("ConfigError", "matrix must be a nonempty array of rows");
    const auto n = static_cast<Index>(rows.size());
    Matrix m(n, static_cast<Index>(rows.at(0).size()));
    for (Index i = 0; i < n; ++i) {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        if (static_cast<Index>(row.size()) != m.cols())
            throw Error("ConfigError", "ragged matrix rows");
        for (Index j = 0; j < m.cols(); ++j) {
            const auto& cell = row.at(static_cast<std::size_t>(j));
            if (!cell.is_array() || cell.size() != 2)
                throw Error("ConfigError", "matrix entries are [re, im] pairs");
            m(i, j) = Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
        }
    }
    return m;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j)
            row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

RunConfig parse_config(const json& doc) {
    reject_unknown_keys(doc,
                        {"kind", "payload", "kappas", "grids", "tolerances",
                         "out_dir", "seed"},
                        "config");
    RunConfig cfg;
    cfg.kind = doc.at("kind").get<std::string>();
    if (cfg.kind != "matrix-family" && cfg.kind != "rd" && cfg.kind != "bidomain" &&
        cfg.kind != "appendix")
        throw Error("ConfigError", "unknown problem kind '" + cfg.kind + "'");
    cfg.payload = doc.value("payload", json::object());
    if (doc.contains("kappas")) {
        cfg.kappas.clear();
        for (const auto& k : doc.at("kappas")) cfg.kappas.push_back(k.get<double>());
    }
    json grids = doc.value("grids", json::object());
    reject_unknown_keys(grids, {"alpha", "t", "xi"}, "grids");
    cfg.alpha_grid = parse_grid(grids.value("alpha", json()), 1e-4, 1e2, 64, true);
    cfg.t_grid = parse_grid(grids.value("t", json()), 1e-3, 1e2, 64, true);
    cfg.xi_grid = parse_grid(grids.value("xi", json()), 1e-2, 5.0, 17, true);
    json tol = doc.value("tolerances", json::object());
    reject_unknown_keys(tol, {"quadrature"}, "tolerances");
    cfg.quadrature_tol = tol.value("quadrature", 1e-10);
    cfg.out_dir = doc.value("out_dir", std::string());
    cfg.seed = doc.value("seed", std::uint64_t{0});
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    json grids;
    auto grid_json = [](const std::vector<double>& g) {
        // grids serialize through their log-spaced parameters
        double lo = g.size() > 1 ? g[1] : 1.0;
        return json{{"min", lo}, {"max", g.back()},
                    {"points", g.size() > 1 ? g.size() - 1 : g.size()}};
    };
    grids["alpha"] = grid_json(cfg.alpha_grid);
    grids["t"] = grid_json(cfg.t_grid);
    grids["xi"] = grid_json(cfg.xi_grid);
    return json{{"kind", cfg.kind},
                {"payload", cfg.payload},
                {"kappas", cfg.kappas},
                {"grids", grids},
                {"tolerances", {{"quadrature", cfg.quadrature_tol}}},
                {"out_dir", cfg.out_dir},
                {"seed", cfg.seed}};
}

std::uint64_t problem_hash(const RunConfig& cfg) {
    return fnv1a_hash(cfg.kind + "\n" + cfg.payload.dump());
}

BuiltProblem build_problem(const RunConfig& cfg) {
    BuiltProblem built;
    if (cfg.kind == "matrix-family") {
        reject_unknown_keys(cfg.payload,
                            {"base", "perturbation", "q1", "nu", "m1", "r_coeff",
                             "fixture", "n"},
                            "matrix-family payload");
        GeneratorModel base;
        Matrix direction;
        double q1 = 0.0;
        if (cfg.payload.contains("fixture")) {
            const auto name = cfg.payload.at("fixture").get<std::string>();
            const int n = cfg.payload.value("n", 2);
            if (name == "diagonal") {
                Matrix a = Matrix::Zero(n, n);
                for (int i = 1; i < n; ++i) a(i, i) = Complex(-double(i), 0);
                base = make_generator(std::move(a), "diagonal fixture");
                direction = -Matrix::Identity(n, n);
                q1 = 1.0;
            } else {
                throw Error("ConfigError", "unknown fixture '" + name + "'");
            }
        } else {
            base = make_generator(parse_matrix(cfg.payload.at("base")), "config");
            direction = parse_matrix(cfg.payload.at("perturbation"));
            q1 = cfg.payload.at("q1").get<double>();
        }
        built.family = make_linear_family(std::move(base), std::move(direction), q1,
                                          "matrix-family");
        if (cfg.payload.contains("m1"))
            built.family.resolvent_const = cfg.payload.at("m1").get<double>();
        if (cfg.payload.contains("r_coeff")) {
            const double c = cfg.payload.at("r_coeff").get<double>();
            built.family.modulus = [c](double a) { return c * a; };
        }
        built.nu = cfg.payload.contains("nu")
                       ? cfg.payload.at("nu").get<double>()
                       : fixture_gap_nu(built.family.base);
    } else if (cfg.kind == "rd") {
        reject_unknown_keys(cfg.payload, {"a_cubic", "d", "L", "n", "d_reference"},
                            "rd payload");
        RDProblem prob = make_nagumo_rd(cfg.payload.value("a_cubic", 0.25),
                                        cfg.payload.value("d", 1.1),
                                        cfg.payload.value("L", 30.0),
                                        cfg.payload.value("n", 128));
        if (cfg.payload.contains("d_reference")) {
            prob.d = cfg.payload.at("d_reference").get<double>();
            prob.delta0 = rd_delta0(prob).delta0;  // may throw DConditionViolated
        }
        built.nu = prob.nu;
        built.family = rd_family(prob);
        built.rd = std::move(prob);
    } else if (cfg.kind == "bidomain") {
        reject_unknown_keys(
            cfg.payload,
            {"nu1", "nu2", "gamma", "a_cubic", "period", "window", "n", "branch"},
            "bidomain payload");
        BidomainProblem prob = make_bistable_bidomain(
            cfg.payload.value("nu1", 0.3), cfg.payload.value("nu2", 0.15),
            cfg.payload.value("gamma", 0.0), cfg.payload.value("a_cubic", 0.25),
            cfg.payload.value("period", 60.0), cfg.payload.value("window", 22.0),
            cfg.payload.value("n", 128));
        built.nu = prob.nu;
        built.family = bidomain_family(
            prob, cfg.payload.value("branch", std::string("+")).at(0));
        built.bidomain = std::move(prob);
    } else {
        throw Error("ConfigError", "kind '" + cfg.kind + "' is not a family");
    }
    return built;
}

namespace {

fs::path resolve_out_dir(const RunConfig& cfg, const std::string& flag_out) {
    std::string dir = flag_out;
    if (dir.empty()) dir = cfg.out_dir;
    if (dir.empty())
        if (const char* env = std::getenv("SEMISTAB_OUT")) dir = env;
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    return dir;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("ConfigError", "cannot read config " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error("ConfigError", std::string("config parse: ") + e.what());
    }
    return parse_config(doc);
}

int cmd_certify(const RunConfig& cfg, const fs::path& out_dir) {
    const BuiltProblem built = build_problem(cfg);
    CertifyOptions opts;
    opts.kappas = cfg.kappas;
    opts.quadrature_tol = cfg.quadrature_tol;
    const CertifiedFamily cert = certify_family(built.family, built.nu, opts);
    json doc = certificate_to_json(cert, problem_hash(cfg));
    doc["config"] = config_to_json(cfg);
    write_file(out_dir / "certificate.json", doc.dump(2) + "\n");
    std::cout << "certified " << cfg.kind << " via " << cert.route << ", nu = "
              << format_double(cert.nu) << ", log10 prefactors:";
    for (const auto& env : cert.envelopes)
        std::cout << " " << format_double(env.log_prefactor() / std::log(10.0));
    std::cout << "\n";
    return 0;
}

int cmd_validate(const RunConfig& cfg, const std::string& cert_path,
                 const fs::path& out_dir) {
    std::ifstream in(cert_path);
    if (!in) throw Error("ConfigError", "cannot read certificate " + cert_path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error("ConfigError", std::string("certificate parse: ") + e.what());
    }
    if (doc.at("problem_hash").get<std::uint64_t>() != problem_hash(cfg))
        throw Error("HashMismatch",
                    "certificate does not match the config's problem");
    const BuiltProblem built = build_problem(cfg);
    const auto envelopes = envelopes_from_json(doc);
    bool all_pass = true;
    ValidationRow witness;
    for (const auto& env : envelopes) {
        const ValidationReport rep =
            validate_envelope(built.family, env, cfg.alpha_grid, cfg.t_grid);
        write_file(out_dir / ("validate_kappa_" + format_double(env.kappa) + ".csv"),
                   report_to_csv(rep));
        std::cout << "kappa " << format_double(env.kappa) << ": max ratio "
                  << format_double(rep.max_ratio) << " over " << rep.grids
                  << (rep.pass ? " PASS" : " FAIL") << "\n";
        if (!rep.pass) {
            all_pass = false;
            witness = rep.rows[rep.argmax];
        }
    }
    if (!all_pass) {
        std::cout << "witness alpha=" << format_double(witness.alpha)
                  << " t=" << format_double(witness.t)
                  << " measured=" << format_double(witness.measured)
                  << " envelope=" << format_double(witness.envelope) << "\n";
        return 3;
    }
    return 0;
}

int cmd_scan(const RunConfig& cfg, const fs::path& out_dir, bool plots) {
    if (cfg.kind != "rd" && cfg.kind != "bidomain")
        throw Error("ConfigError", "scan needs an rd or bidomain config");
    const BuiltProblem built = build_problem(cfg);
    CertifyOptions opts;
    opts.kappas = {cfg.kappas.front()};
    opts.quadrature_tol = cfg.quadrature_tol;
    const CertifiedFamily cert = certify_family(built.family, built.nu, opts);
    const DecayEnvelope& env = cert.envelopes.front();

    std::string csv = "xi,alpha,sup_scaled,log10_prefactor,spectral_abscissa\n";
    std::vector<double> xs, ys;
    double worst = 0.0;
    for (const double xi : cfg.xi_grid) {
        const double alpha = xi * xi;
        const GeneratorModel gen = built.rd ? rd_operator(*built.rd, alpha)
                                            : bidomain_operator(*built.bidomain, xi);
        const double rate = env.pieces.front().rate(alpha);
        double sup = 0.0;
        for (const double t : cfg.t_grid)
            sup = std::max(sup, std::exp(rate * t) *
                                    operator_norm(semigroup_direct(gen, t).mat));
        const double abscissa = spectral_abscissa(gen);
        csv += format_double(xi) + "," + format_double(alpha) + "," +
               format_double(sup) + "," +
               format_double(env.log_prefactor() / std::log(10.0)) + "," +
               format_double(abscissa) + "\n";
        xs.push_back(xi);
        ys.push_back(abscissa);
        worst = std::max(worst, sup);
    }
    write_file(out_dir / "scan.csv", csv);
    if (plots)
        write_file(out_dir / "scan_abscissa.svg",
                   svg_polyline(xs, ys, "spectral abscissa vs xi"));
    const bool pass = std::log(worst) <= env.log_prefactor() + 1e-9;
    std::cout << "scan " << cfg.kind << ": sup_xi sup_t e^{kq t}||T|| = "
              << format_double(worst) << ", log10 prefactor "
              << format_double(env.log_prefactor() / std::log(10.0))
              << (pass ? " PASS" : " FAIL") << "\n";
    return pass ? 0 : 3;
}

int cmd_appendix(const RunConfig& cfg, const fs::path& out_dir) {
    std::vector<double> b0s{-0.45, -0.3, -0.25};
    int s_samples = 33;
    if (!cfg.payload.is_null() && !cfg.payload.empty()) {
        reject_unknown_keys(cfg.payload, {"b0_list", "s_samples"},
                            "appendix payload");
        if (cfg.payload.contains("b0_list")) {
            b0s.clear();
            for (const auto& b : cfg.payload.at("b0_list"))
                b0s.push_back(b.get<double>());
        }
        s_samples = cfg.payload.value("s_samples", 33);
    }
    json report;
    report["tool_version"] = kToolVersion;
    report["a1"] = json::array();
    for (const double b0 : b0s) {
        const AppendixA1Report rep = appendix_a1(b0);
        report["a1"].push_back(
            {{"b0", rep.b0},
             {"z0_posdef", rep.z0_posdef},
             {"m0", rep.m0},
             {"lambda_star", rep.lambda_star},
             {"mu_star", rep.mu_star},
             {"b1", rep.b1},
             {"h1_h2_hold", rep.h1_h2_hold},
             {"w0_negdef", rep.w0_negdef},
             {"w0_max_eig", rep.w0_max_eig},
             {"destabilized_max_re", rep.destabilized_max_re}});
    }
    const AppendixA2Report a2 = appendix_a2(-0.3, s_samples);
    report["a2"] = {{"b0", a2.b0},
                    {"s_samples", a2.s_samples},
                    {"neg_hull", {a2.neg_hull_lo, a2.neg_hull_hi}},
                    {"pos_hull", {a2.pos_hull_lo, a2.pos_hull_hi}},
                    {"stable_hull", {a2.stable_hull_lo, a2.stable_hull_hi}},
                    {"essential_instability", a2.essential_instability}};
    write_file(out_dir / "appendix.json", report.dump(2) + "\n");
    bool destabilized = true;
    for (const auto& r : report["a1"])
        destabilized = destabilized && r.at("destabilized_max_re").get<double>() > 0;
    std::cout << "appendix: " << b0s.size()
              << " A.1 reports, destabilization reproduced = "
              << (destabilized ? "yes" : "no") << ", A.2 positive hull ["
              << format_double(a2.pos_hull_lo) << ", "
              << format_double(a2.pos_hull_hi) << "]\n";
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"uniform decay envelopes for families of analytic semigroups"};
    app.require_subcommand(1);
    std::string config_path, cert_path, out_flag;
    bool plots = false;
    unsigned threads = 0;
    double tol = 0.0;
    app.add_option("--out", out_flag, "output directory");
    app.add_flag("--plots", plots, "emit static plot files");
    app.add_option("--threads", threads, "worker thread count");
    app.add_option("--tol", tol, "quadrature tolerance override");

    auto* certify = app.add_subcommand("certify", "compute an envelope certificate");
    certify->add_option("config", config_path)->required();
    auto* validate = app.add_subcommand("validate", "check measured norms");
    validate->add_option("config", config_path)->required();
    validate->add_option("certificate", cert_path)->required();
    auto* scan = app.add_subcommand("scan", "sweep xi diagnostics");
    scan->add_option("config", config_path)->required();
    auto* appendix = app.add_subcommand("appendix", "reproduce the counterexamples");
    (void)appendix;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    if (threads > 0) set_default_thread_count(threads);

    try {
        RunConfig cfg;
        if (app.got_subcommand("appendix")) {
            cfg.kind = "appendix";
        } else {
            cfg = load_config(config_path);
        }
        if (tol > 0.0) cfg.quadrature_tol = tol;
        const fs::path out_dir = resolve_out_dir(cfg, out_flag);
        if (app.got_subcommand("certify")) return cmd_certify(cfg, out_dir);
        if (app.got_subcommand("validate"))
            return cmd_validate(cfg, cert_path, out_dir);
        if (app.got_subcommand("scan")) return cmd_scan(cfg, out_dir, plots);
        return cmd_appendix(cfg, out_dir);
    } catch (const Error& err) {
        std::cout << error_record(err).dump() << "\n";
        std::cerr << err.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cout << error_record(Error("Internal", e.what())).dump() << "\n";
        std::cerr << e.what() << "\n";
        return 2;
    }
}

}  // namespace semistab::cli
