#include "semistab/certificate.hpp"

#include <charconv>
#include <cmath>

namespace semistab {

using nlohmann::json;

CertifiedFamily certify_family(const PerturbationFamily& fam, double nu,
                               const CertifyOptions& opts) {
    validate_family(fam);
    CertifiedFamily out;
    out.nu = nu;
    out.gap_structure = verify_semisimple_gap(fam.base, nu);
    if (!out.gap_structure.gap_ok)
        throw Error("GapViolated", "base spectrum reaches right of -nu");
    if (!out.gap_structure.semisimple)
        throw Error("NoIsolatedZero", "zero eigenvalue is not semisimple");

    const double n0 = estimate_halfplane_bound(fam.base, opts.halfplane_vertex);
    out.base_cert = halfplane_to_sector(opts.halfplane_vertex, n0);

    PerturbationFamily work = fam;
    if (!(work.resolvent_const > 0.0))
        work.resolvent_const = resolvent_family_bound_check(
            work, std::vector<double>{0.0, 1e-3, 1e-2, 0.1, 0.3, 1.0, 3.0, 10.0});

    const Alpha0Estimate a0 = locate_alpha0(work);
    EnvelopeIngredients ing;
    ing.fcert = uniform_family_sector(work, out.base_cert, a0.alpha0, a0.sup_e_small);
    ing.m1 = work.resolvent_const;
    ing.nu = nu;
    ing.m2 = m2_constant(work.base, nu);
    ing.sup_e0 = sup_e0(work);
    const ThresholdPair eps = thresholds(nu, ing.m2, ing.sup_e0);
    ing.eps0 = eps.eps0;
    ing.eps1 = eps.eps1;
    ing.m3 = m3_constant(ing.fcert, nu, ing.m2);
    ing.q1 = work.q_slope;
    ing.q2 = work.q_knee;
    ing.q = work.q;
    ing.modulus = work.modulus;

    const Matrix p0 =
        riesz_projection(work.base, CirclePath{Complex(0, 0), nu / 2.0},
                         opts.quadrature_tol *
                             std::max(1.0, operator_norm(work.base.entries)))
            .mat;
    const ProjectionSplit split = split_projection(p0);
    ing.rank_p0 = split.rank;
    ing.leading_block =
        Matrix(split.im_basis.adjoint() * (p0 * work.e0_at_zero()) * split.im_basis);
    out.ingredients = ing;

    std::string route = opts.route;
    if (route == "auto") route = ing.rank_p0 == 1 ? "simple-eigenvalue" : "semisimple";
    out.route = route;
    for (const double kappa : opts.kappas)
        out.envelopes.push_back(route == "simple-eigenvalue"
                                    ? simple_eigenvalue_envelope(ing, kappa)
                                    : semisimple_family_envelope(ing, kappa));
    return out;
}

namespace {

json evidence_to_json(const EvidenceGrid& ev) {
    return json{{"description", ev.description},
                {"samples", ev.samples},
                {"max_observed", ev.max_observed},
                {"safety", ev.safety}};
}

json envelope_to_json(const DecayEnvelope& env) {
    json pieces = json::array();
    for (const auto& piece : env.pieces)
        pieces.push_back(json{{"log_prefactor", piece.log_prefactor},
                              {"alpha_max", std::isfinite(piece.alpha_max)
                                                ? json(piece.alpha_max)
                                                : json()},
                              {"rate_at_1", piece.rate(1.0)}});
    return json{{"kappa", env.kappa},
                {"tag", env.tag},
                {"pieces", pieces},
                {"ledger", env.ledger}};
}

}  // namespace

json certificate_to_json(const CertifiedFamily& cert, std::uint64_t problem_hash) {
    const EnvelopeIngredients& ing = cert.ingredients;
    json doc;
    doc["tool_version"] = kToolVersion;
    doc["problem_hash"] = problem_hash;
    doc["route"] = cert.route;
    doc["nu"] = cert.nu;
    doc["gap_structure"] = {{"semisimple", cert.gap_structure.semisimple},
                 {"gap_ok", cert.gap_structure.gap_ok},
                 {"kernel_dim", cert.gap_structure.kernel_dim},
                 {"gap", cert.gap_structure.gap}};
    doc["sector_cert"] = {{"vertex", cert.base_cert.vertex},
                          {"angle", cert.base_cert.angle},
                          {"bound", cert.base_cert.bound},
                          {"evidence", evidence_to_json(cert.base_cert.evidence)}};
    doc["family_cert"] = {{"vertex", ing.fcert.vertex},
                          {"angle", ing.fcert.angle},
                          {"bound", ing.fcert.bound},
                          {"a1", ing.fcert.a1},
                          {"n_tilde", ing.fcert.n_tilde},
                          {"m1", ing.fcert.m1},
                          {"ell", ing.fcert.ell},
                          {"alpha0", ing.fcert.alpha0},
                          {"evidence", evidence_to_json(ing.fcert.evidence)}};
    doc["constants"] = {{"M1", ing.m1},   {"M2", ing.m2},     {"M3", ing.m3},
                        {"q1", ing.q1},
                        {"q2", std::isfinite(ing.q2) ? json(ing.q2) : json()},
                        {"sup_E0", ing.sup_e0},
                        {"eps0", ing.eps0}, {"eps1", ing.eps1},
                        {"rank_P0", ing.rank_p0}};
    doc["envelopes"] = json::array();
    for (const auto& env : cert.envelopes)
        doc["envelopes"].push_back(envelope_to_json(env));
    return doc;
}

std::vector<DecayEnvelope> envelopes_from_json(const json& doc) {
    std::vector<DecayEnvelope> out;
    const double q1 = doc.at("constants").at("q1").get<double>();
    for (const auto& e : doc.at("envelopes")) {
        DecayEnvelope env;
        env.kappa = e.at("kappa").get<double>();
        env.tag = e.at("tag").get<std::string>();
        for (const auto& p : e.at("pieces")) {
            EnvelopePiece piece;
            piece.log_prefactor = p.at("log_prefactor").get<double>();
            piece.alpha_max = p.at("alpha_max").is_null()
                                  ? std::numeric_limits<double>::infinity()
                                  : p.at("alpha_max").get<double>();
            const double rate1 = p.at("rate_at_1").get<double>();
            // rates in certificates are linear in alpha: rate(a) = rate(1) * a
            piece.rate = [rate1](double alpha) { return rate1 * alpha; };
            env.pieces.push_back(std::move(piece));
        }
        for (auto it = e.at("ledger").begin(); it != e.at("ledger").end(); ++it)
            env.ledger[it.key()] = it.value().get<double>();
        (void)q1;
        out.push_back(std::move(env));
    }
    return out;
}

std::uint64_t fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string report_to_csv(const ValidationReport& rep) {
    std::string out = "alpha,t,measured_norm,envelope,ratio\n";
    for (const auto& row : rep.rows) {
        out += format_double(row.alpha);
        out += ',';
        out += format_double(row.t);
        out += ',';
        out += format_double(row.measured);
        out += ',';
        out += format_double(row.envelope);
        out += ',';
        out += format_double(row.ratio);
        out += '\n';
    }
    return out;
}

}  // namespace semistab
