#include "semistab/envelope.hpp"

#include <cmath>

#include "semistab/decomposition.hpp"

namespace semistab {

namespace {

double sec(double x) { return 1.0 / std::cos(x); }

// the away and Ker-block bounds fix phi = theta~/2 + pi/4
double proof_angle(const FamilyCert& fc) { return fc.angle / 2.0 + pi() / 4.0; }

// short-time branch coefficient M~ (e(2 theta~ + pi) - 4 sec phi)/4
double short_time_coeff(const FamilyCert& fc) {
    const double phi = proof_angle(fc);
    return fc.bound * (std::exp(1.0) * (2.0 * fc.angle + pi()) - 4.0 * sec(phi)) /
           4.0;
}

}  // namespace

double DecayEnvelope::value(double alpha, double t) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& piece : pieces)
        if (alpha <= piece.alpha_max) best = std::min(best, piece.value(alpha, t));
    return best;
}

DecayEnvelope vertex_bound(const SectorCert& cert, double phi) {
    if (!(phi > pi() / 2.0 && phi < cert.angle))
        throw Error("BadAngle", "phi must lie in (pi/2, theta)");
    DecayEnvelope env;
    env.tag = "vertex";
    const double prefactor =
        cert.bound * (std::exp(1.0) * phi - sec(phi)) / pi();
    const double a = cert.vertex;
    env.pieces.push_back({std::log(prefactor), [a](double) { return -a; },
                          std::numeric_limits<double>::infinity()});
    env.ledger = {{"M0", cert.bound}, {"phi", phi}, {"a", a},
                  {"prefactor", prefactor}};
    return env;
}

double ShiftedBound::operator()(double t) const {
    if (!(t > 0.0)) throw Error("BadArgument", "shifted bound needs t > 0");
    return m0 * std::exp(mu * t) / (pi() * (a - mu) * t) +
           std::exp(mu * t) * sup_v / (2.0 * pi());
}

DecayEnvelope ShiftedBound::as_envelope(double t0) const {
    DecayEnvelope env;
    env.tag = "shifted";
    const double prefactor = m0 / (pi() * (a - mu) * t0) + sup_v / (2.0 * pi());
    const double rate = -mu;
    env.pieces.push_back({std::log(prefactor), [rate](double) { return rate; },
                          std::numeric_limits<double>::infinity()});
    env.ledger = {{"M0", m0}, {"a", a}, {"mu", mu}, {"supV", sup_v}, {"t0", t0},
                  {"prefactor", prefactor}};
    return env;
}

ShiftedBound shifted_bound(const SectorCert& cert, double mu, double phi,
                           double sup_v) {
    if (!(mu < cert.vertex))
        throw Error("BadOrdering", "mu must be below the vertex");
    if (!(phi > pi() / 2.0 && phi < cert.angle))
        throw Error("BadAngle", "phi must lie in (pi/2, theta)");
    return ShiftedBound{cert.bound, cert.vertex, mu, sup_v};
}

BranchValue family_bound_away(const FamilyCert& fc, double m1, double q_value,
                              double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0))
        throw Error("BadArgument", "kappa must lie in (0,1)");
    if (!(q_value > 0.0)) throw Error("BadArgument", "q(alpha) must be positive");
    const double phi = proof_angle(fc);
    const double b1 =
        fc.bound * q_value / (fc.vertex + kappa * q_value) +
        m1 * (fc.vertex + kappa * q_value) * std::abs(std::tan(phi)) /
            ((1.0 - kappa) * q_value);
    const double b2 = short_time_coeff(fc) * std::exp(fc.vertex / q_value + 1.0);
    BranchValue out;
    out.branch = b1 >= b2 ? 1 : 2;
    out.value = std::max(b1, b2) / pi();
    return out;
}

double family_bound_majorant_log(const FamilyCert& fc, double m1, double q_value,
                                 double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0))
        throw Error("BadArgument", "kappa must lie in (0,1)");
    if (!(q_value > 0.0)) throw Error("BadArgument", "q(alpha) must be positive");
    const double phi = proof_angle(fc);
    const double b1 = fc.bound / kappa +
                      m1 * std::abs(std::tan(phi)) *
                          (fc.vertex / q_value + kappa) / (1.0 - kappa);
    const double log_b2 =
        std::log(short_time_coeff(fc)) + fc.vertex / q_value + 1.0;
    return std::max(std::log(b1), log_b2) - std::log(pi());
}

double family_bound_majorant(const FamilyCert& fc, double m1, double q_value,
                             double kappa) {
    return std::exp(family_bound_majorant_log(fc, m1, q_value, kappa));
}

double hilbert_family_bound(const FamilyCert& fc, double m1, double q_value,
                            double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0))
        throw Error("BadArgument", "kappa must lie in (0,1)");
    const double c1 = short_time_coeff(fc) / pi();
    return c1 * (1.0 + 2.0 * c1 *
                           (1.0 + m1 * (fc.vertex + kappa * q_value) /
                                      ((1.0 - kappa) * q_value)));
}

double m3_constant(const FamilyCert& fc, double nu, double m2) {
    if (!(nu > 0.0 && m2 > 0.0))
        throw Error("BadArgument", "M3 needs nu, M2 > 0");
    const double phi = proof_angle(fc);
    const double b1 =
        3.0 * fc.bound / (pi() * fc.vertex) +
        96.0 * m2 / (pi() * nu) * (fc.vertex + nu / 2.0) *
            std::abs(std::tan(phi));
    const double b2 = fc.bound *
                      (std::exp(1.0) * (6.0 * fc.angle + 3.0 * pi()) -
                       12.0 * sec(phi)) /
                      (4.0 * pi()) * std::exp(fc.vertex + nu / 2.0);
    return std::max(b1, b2);
}

double m4_of_kappa(const Matrix& leading_block, double q1, double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0))
        throw Error("BadArgument", "kappa must lie in (0,1)");
    const GeneratorModel g0 = make_generator(leading_block, "G0(0)");
    const double max_re = spectral_abscissa(g0);
    if (max_re > -q1 + 1e-9 * std::max(1.0, q1))
        throw Error("LeadingSpectrumUnstable",
                    "max Re sigma(G0(0)) = " + std::to_string(max_re) +
                        " exceeds -q1");
    return certified_growth_sup(leading_block, (1.0 + kappa) * q1 / 2.0);
}

double invert_modulus(const std::function<double(double)>& r, double y) {
    if (!(y > 0.0)) return 0.0;
    double hi = 1.0;
    while (r(hi) < y && hi < 1e300) hi *= 2.0;
    if (r(hi) < y) return std::numeric_limits<double>::infinity();
    double lo = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (r(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Eps23 eps23(double kappa, double eps1, double q1, double q2, double nu, double m2,
            const std::function<double(double)>* r) {
    if (!(kappa > 0.0 && kappa < 1.0))
        throw Error("BadArgument", "kappa must lie in (0,1)");
    const double gronwall_term =
        (1.0 - kappa) * q1 * eps1 * eps1 / (32.0 * m2 * nu);
    double modulus_term = std::numeric_limits<double>::infinity();
    if (r) modulus_term = invert_modulus(*r, (1.0 - kappa) * q1 /
                                                 (3072.0 * m2 * m2));
    Eps23 out;
    out.eps2 = std::min(std::min(eps1, q2), std::min(gronwall_term, modulus_term));
    out.eps3 = std::min(out.eps2, nu / (2.0 * q1));
    return out;
}

DecayEnvelope semisimple_family_envelope(const EnvelopeIngredients& ing, double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0))
        throw Error("BadArgument", "kappa must lie in (0,1)");
    if (!(ing.q1 > 0.0)) throw Error("MissingIngredient", "q1");
    if (!ing.leading_block) throw Error("MissingIngredient", "leading block G0(0)");
    if (!(ing.m2 > 0.0)) throw Error("MissingIngredient", "M2");
    if (!(ing.m3 > 0.0)) throw Error("MissingIngredient", "M3");
    if (!ing.q) throw Error("MissingIngredient", "q");

    const double m4 = m4_of_kappa(*ing.leading_block, ing.q1, kappa);
    const std::function<double(double)>* r =
        ing.modulus ? &*ing.modulus : nullptr;
    const Eps23 eps = eps23(kappa, ing.eps1, ing.q1, ing.q2, ing.nu, ing.m2, r);
    const double log_away =
        family_bound_majorant_log(ing.fcert, ing.m1, ing.q(eps.eps3), kappa);
    const double near = 3.0 * (8.0 * ing.m2 + 1.0) * (ing.m3 + m4);
    DecayEnvelope env;
    env.kappa = kappa;
    env.tag = "semisimple";
    const double log_prefactor = std::max(log_away, std::log(near));
    auto q = ing.q;
    env.pieces.push_back({log_prefactor,
                          [q, kappa](double alpha) { return kappa * q(alpha); },
                          std::numeric_limits<double>::infinity()});
    // the proof's near-zero branch is finite and meaningful on [0, eps3]
    env.pieces.push_back({std::log(near),
                          [q, kappa](double alpha) { return kappa * q(alpha); },
                          eps.eps3});
    env.ledger = {{"kappa", kappa},
                  {"log_M(kappa)", log_prefactor},
                  {"log_Mbar_at_eps3", log_away},
                  {"near_zero_branch", near},
                  {"M1", ing.m1},        {"M2", ing.m2},
                  {"M3", ing.m3},        {"M4", m4},
                  {"eps0", ing.eps0},    {"eps1", ing.eps1},
                  {"eps2", eps.eps2},    {"eps3", eps.eps3},
                  {"nu", ing.nu},        {"q1", ing.q1},
                  {"a_tilde", ing.fcert.vertex},
                  {"theta_tilde", ing.fcert.angle},
                  {"M_tilde", ing.fcert.bound}};
    return env;
}

DecayEnvelope simple_eigenvalue_envelope(const EnvelopeIngredients& ing, double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0))
        throw Error("BadArgument", "kappa must lie in (0,1)");
    if (ing.rank_p0 != 1)
        throw Error("NotSimpleEigenvalue",
                    "the simple-eigenvalue route needs rank P0 = 1, got " +
                        std::to_string(ing.rank_p0));
    if (!(ing.q1 > 0.0)) throw Error("MissingIngredient", "q1");
    if (!(ing.m2 > 0.0)) throw Error("MissingIngredient", "M2");
    if (!(ing.m3 > 0.0)) throw Error("MissingIngredient", "M3");

    const double eps4 =
        std::min(std::min(ing.eps1, ing.q2), ing.nu / (2.0 * ing.q1));
    const double log_away =
        family_bound_majorant_log(ing.fcert, ing.m1, ing.q(eps4), kappa);
    const double strong = 3.0 * (ing.m3 + 1.0) * (8.0 * ing.m2 + 1.0);
    DecayEnvelope env;
    env.kappa = kappa;
    env.tag = "simple-eigenvalue";
    const double log_prefactor = std::max(log_away, std::log(strong));
    auto q = ing.q;
    env.pieces.push_back({log_prefactor,
                          [q, kappa](double alpha) { return kappa * q(alpha); },
                          std::numeric_limits<double>::infinity()});
    // on [0, eps4] the bound holds with the full rate q(alpha)
    env.pieces.push_back({std::log(strong), [q](double alpha) { return q(alpha); },
                          eps4});
    env.ledger = {{"kappa", kappa},
                  {"log_N(kappa)", log_prefactor},
                  {"log_Mbar_at_eps4", log_away},
                  {"strong_prefactor", strong},
                  {"eps4", eps4},          {"M1", ing.m1},
                  {"M2", ing.m2},          {"M3", ing.m3},
                  {"eps1", ing.eps1},      {"nu", ing.nu},
                  {"q1", ing.q1},          {"a_tilde", ing.fcert.vertex},
                  {"theta_tilde", ing.fcert.angle},
                  {"M_tilde", ing.fcert.bound}};
    return env;
}

}  // namespace semistab
