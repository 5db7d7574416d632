#include "semistab/applications.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semistab/decomposition.hpp"

namespace semistab {

namespace {

double smoothstep5(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

// coefficients of the quadratic form xi^T A xi restricted to xi = (s, 1)
struct QuadCoeffs {
    double a, b, c;  // a s^2 + b s + c
    double eval(double s) const { return (a * s + b) * s + c; }
};

QuadCoeffs rotated_form(double d1, double d2, double gamma) {
    const double cg = std::cos(gamma), sg = std::sin(gamma);
    const double a = cg * cg * d1 + sg * sg * d2;
    const double c = sg * sg * d1 + cg * cg * d2;
    const double off = cg * sg * (d1 - d2);
    return {a, 2.0 * off, c};
}

QuadCoeffs intracellular(double nu1, double nu2, double gamma) {
    return rotated_form(1.0 + nu1 + nu2, 1.0 + nu2 - nu1, gamma);
}
// A_e = 2I - A_i, so the complement form keeps Q_i + Q_e = 2|xi|^2 exact
QuadCoeffs extracellular(double nu1, double nu2, double gamma) {
    const QuadCoeffs qi = intracellular(nu1, nu2, gamma);
    return {2.0 - qi.a, -qi.b, 2.0 - qi.c};
}

double g_rational(double beta0, double beta1, double s) {
    return (beta1 * s + beta0) / (s * s + 1.0);
}

// unitary DFT matrix for the periodic grid: rows indexed by wavenumber
Matrix dft_matrix(const std::vector<double>& ks, const std::vector<double>& ys) {
    const auto n = static_cast<Index>(ys.size());
    Matrix f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index m = 0; m < n; ++m)
        for (Index j = 0; j < n; ++j)
            f(m, j) = scale * std::exp(Complex(0, -ks[static_cast<std::size_t>(m)] *
                                                      ys[static_cast<std::size_t>(j)]));
    return f;
}

Matrix multiplier_operator(const Matrix& dft, const Eigen::VectorXcd& symbol) {
    return dft.adjoint() * symbol.asDiagonal() * dft;
}

double nearest_real_eigenvalue_to_zero(const GeneratorModel& gen) {
    double best = std::numeric_limits<double>::infinity();
    Complex val(0, 0);
    for (const Complex ev : eigenvalues(gen)) {
        if (std::abs(ev) < best) {
            best = std::abs(ev);
            val = ev;
        }
    }
    return val.real();
}

}  // namespace

double cubic_f(double u, double a) { return u * (1.0 - u) * (u - a); }
double cubic_fprime(double u, double a) {
    return -3.0 * u * u + 2.0 * (1.0 + a) * u - a;
}

std::vector<double> RDProblem::nodes() const {
    std::vector<double> ys(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ys[static_cast<std::size_t>(i)] = -L + (i + 1) * h();
    return ys;
}

GeneratorModel rd_operator(const RDProblem& prob, double xi_sq) {
    const int k = prob.k, n = prob.n;
    const double hh = prob.h();
    Matrix op = Matrix::Zero(Index(n) * k, Index(n) * k);
    const Matrix diff2 = prob.D / (hh * hh);
    const Matrix drift = (prob.c / (2.0 * hh)) * Matrix::Identity(k, k);
    for (int i = 0; i < n; ++i) {
        const Index r = Index(i) * k;
        op.block(r, r, k, k) =
            -2.0 * diff2 + prob.V0[static_cast<std::size_t>(i)] - xi_sq * prob.D;
        if (i > 0) op.block(r, r - k, k, k) = diff2 - drift;
        if (i + 1 < n) op.block(r, r + k, k, k) = diff2 + drift;
    }
    op.diagonal().array() -= prob.zero_shift;
    return make_generator(std::move(op), "Lhat(xi), |xi|^2 = " + std::to_string(xi_sq),
                          "rd-discretization");
}

RdRates rd_delta0(const RDProblem& prob) {
    const Matrix j = prob.D - prob.d * Matrix::Identity(prob.k, prob.k);
    RdRates rates;
    rates.rho = operator_norm(j) * prob.Mtilde0 / prob.d;
    if (!(rates.rho < 1.0))
        throw Error("DConditionViolated",
                    "||D - dI|| Mtilde0 / d = " + std::to_string(rates.rho) +
                        " >= 1");
    rates.delta0 = 0.99 * (1.0 - std::sqrt(rates.rho));
    rates.q_slope = rates.delta0 * prob.d;
    return rates;
}

PerturbationFamily rd_family(const RDProblem& prob) {
    if (!(prob.delta0 > 0.0))
        throw Error("MissingIngredient", "delta0 not set; run rd_delta0 first");
    PerturbationFamily fam;
    fam.base = rd_operator(prob, 0.0);
    Matrix md = Matrix::Zero(fam.base.dim(), fam.base.dim());
    for (int i = 0; i < prob.n; ++i)
        md.block(Index(i) * prob.k, Index(i) * prob.k, prob.k, prob.k) = prob.D;
    fam.perturb = [md](double alpha) { return Matrix(-alpha * md); };
    fam.q_slope = prob.delta0 * prob.d;
    const double q1 = fam.q_slope;
    fam.q = [q1](double alpha) { return q1 * alpha; };
    fam.resolvent_const = prob.Mtilde0 / prob.delta0;
    fam.asymptotic_ratio = operator_norm(prob.D) / fam.q_slope;
    fam.e0_limit = Matrix(-md);
    fam.label = "rd";
    return fam;
}

double fixture_gap_nu(const GeneratorModel& gen) {
    double max_re_rest = -std::numeric_limits<double>::infinity();
    for (const Complex ev : eigenvalues(gen)) {
        if (std::abs(ev) < 1e-4) continue;  // recentered zero cluster
        max_re_rest = std::max(max_re_rest, ev.real());
    }
    if (!(max_re_rest < 0.0))
        throw Error("GapViolated", "nonzero spectrum touches the imaginary axis");
    return 0.9 * (-max_re_rest);
}

double bounded_semigroup_sup(const GeneratorModel& gen, double nu) {
    const OperatorValue p0 = riesz_projection(
        gen, CirclePath{Complex(0, 0), nu / 2.0},
        1e-11 * std::max(1.0, operator_norm(gen.entries)));
    const double m2 = m2_constant(gen, nu);
    const double p0n = operator_norm(p0.mat);
    const Matrix idm = Matrix::Identity(gen.dim(), gen.dim());
    const double q0n = operator_norm(Matrix(idm - p0.mat));
    // past t0 the Ker P0 part has decayed to 1e-3 of the projection norm
    const double t0 =
        (8.0 / (7.0 * nu)) *
        std::log(std::max(2.0, m2 * q0n / (1e-3 * std::max(p0n, 1e-6))));
    double sup = 1.0;
    for (const double t : log_spaced(1e-3 * t0, t0, 160))
        sup = std::max(sup, operator_norm(semigroup_direct(gen, t).mat));
    const double tail = p0n + q0n * m2 * std::exp(-7.0 * nu * t0 / 8.0);
    return kSupSafety * std::max(sup, tail);
}

RDProblem make_nagumo_rd(double a_cubic, double d, double L, int n) {
    if (!(a_cubic > 0.0 && a_cubic < 0.5))
        throw Error("BadArgument", "cubic parameter must lie in (0, 1/2)");
    RDProblem prob;
    prob.k = 1;
    prob.D = Matrix::Constant(1, 1, d);
    prob.d = d;
    const double kk = 1.0 / std::sqrt(2.0 * d);
    prob.c = std::sqrt(2.0 * d) * (0.5 - a_cubic);
    prob.L = L;
    prob.n = n;
    prob.V0.reserve(static_cast<std::size_t>(n));
    // decreasing kink 1 -> 0: wbar(y) = 1 / (1 + e^{k y})
    for (const double y : prob.nodes()) {
        const double w = 1.0 / (1.0 + std::exp(kk * y));
        prob.V0.push_back(Matrix::Constant(1, 1, cubic_fprime(w, a_cubic)));
    }
    prob.zero_shift = nearest_real_eigenvalue_to_zero(rd_operator(prob, 0.0));
    const GeneratorModel base = rd_operator(prob, 0.0);
    prob.nu = fixture_gap_nu(base);
    prob.Mtilde0 = bounded_semigroup_sup(base, prob.nu);
    prob.delta0 = rd_delta0(prob).delta0;
    return prob;
}

BidomainConstants bidomain_symbol_constants(double nu1, double nu2, double gamma) {
    if (!(std::abs(nu1 + nu2) < 1.0 && std::abs(nu1 - nu2) < 1.0))
        throw Error("BadArgument", "anisotropy requires |nu1 +- nu2| < 1");
    const QuadCoeffs qi = intracellular(nu1, nu2, gamma);
    const QuadCoeffs qe = extracellular(nu1, nu2, gamma);
    // numerator quartic = Q_i(s,1) Q_e(s,1)
    double n4 = qi.a * qe.a;
    double n3 = qi.a * qe.b + qi.b * qe.a;
    double n2 = qi.a * qe.c + qi.b * qe.b + qi.c * qe.a;
    double n1 = qi.b * qe.c + qi.c * qe.b;
    double n0 = qi.c * qe.c;
    // divide by (s^2 + 1): quotient w2 s^2 + w1 s + w0, remainder rho1 s + rho0
    const double w2 = n4;
    const double w1 = n3;
    const double w0 = n2 - w2;
    const double rho1 = n1 - w1;
    const double rho0 = n0 - w0;
    BidomainConstants c;
    c.N0_sq = w2 / 2.0;
    if (!(c.N0_sq > 0.0))
        throw Error("DegenerateParameters", "quadratic part has no positive lead");
    c.eta1 = -(w1 / 2.0) / (2.0 * c.N0_sq);
    c.eta0 = w0 / 2.0 - c.N0_sq * c.eta1 * c.eta1;
    c.beta1 = rho1 / 2.0;
    c.beta0 = rho0 / 2.0;

    // cross-checks: the decomposition must reproduce the harmonic-mean symbol
    const double lead = q_gamma(nu1, nu2, gamma, 1.0, 0.0);
    if (std::abs(lead - c.N0_sq) > 1e-10 * std::max(1.0, c.N0_sq))
        throw Error("DegenerateParameters", "N0^2 cross-check failed");
    for (const double s : {-7.3, -1.0, -0.1, 0.0, 0.4, 2.0, 31.0}) {
        const double direct = q_gamma(nu1, nu2, gamma, s, 1.0);
        const double split = c.N0_sq * (s - c.eta1) * (s - c.eta1) + c.eta0 +
                             g_rational(c.beta0, c.beta1, s);
        if (std::abs(direct - split) > 1e-10 * std::max(1.0, std::abs(direct)))
            throw Error("DegenerateParameters", "decomposition residual too large");
    }
    return c;
}

double q_gamma(double nu1, double nu2, double gamma, double xi1, double xi2) {
    if (xi1 == 0.0 && xi2 == 0.0) return 0.0;
    const QuadCoeffs ai = intracellular(nu1, nu2, gamma);
    const QuadCoeffs ae = extracellular(nu1, nu2, gamma);
    const double qi = ai.a * xi1 * xi1 + ai.b * xi1 * xi2 + ai.c * xi2 * xi2;
    const double qe = ae.a * xi1 * xi1 + ae.b * xi1 * xi2 + ae.c * xi2 * xi2;
    // Q_i + Q_e = 2 |xi|^2 since A_i + A_e = 2I
    return qi * qe / (qi + qe);
}

GExtrema g_extrema(double beta0, double beta1) {
    GExtrema out;
    std::vector<double> candidates{0.0};  // value of g at +-infinity is 0
    std::vector<double> values{0.0};
    if (beta1 != 0.0) {
        const double root = std::sqrt(beta0 * beta0 + beta1 * beta1);
        for (const double s : {(-beta0 + root) / beta1, (-beta0 - root) / beta1})
            values.push_back(g_rational(beta0, beta1, s));
    } else if (beta0 != 0.0) {
        values.push_back(beta0);  // g(0)
    }
    out.g_inf = *std::min_element(values.begin(), values.end());
    out.g_sup = *std::max_element(values.begin(), values.end());
    out.g_bar = 0.5 * (out.g_inf + out.g_sup);
    out.g_delta = 0.5 * (out.g_sup - out.g_inf);
    return out;
}

std::vector<double> BidomainProblem::nodes() const {
    std::vector<double> ys(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        ys[static_cast<std::size_t>(j)] = -period / 2.0 + j * period / n;
    return ys;
}

std::vector<double> BidomainProblem::wavenumbers() const {
    std::vector<double> ks(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m)
        ks[static_cast<std::size_t>(m)] = 2.0 * pi() * (m - n / 2) / period;
    return ks;
}

GeneratorModel bidomain_operator(const BidomainProblem& prob, double xi2) {
    const auto ys = prob.nodes();
    const auto ks = prob.wavenumbers();
    const Matrix dft = dft_matrix(ks, ys);
    Eigen::VectorXcd symbol(prob.n);
    for (int m = 0; m < prob.n; ++m) {
        const double k = ks[static_cast<std::size_t>(m)];
        symbol(m) = Complex(-q_gamma(prob.nu1, prob.nu2, prob.gamma, k, xi2), 0) +
                    Complex(0, prob.c * k);
    }
    Matrix op = multiplier_operator(dft, symbol);
    for (int j = 0; j < prob.n; ++j)
        op(j, j) += prob.fprime[static_cast<std::size_t>(j)] - prob.zero_shift;
    return make_generator(std::move(op), "Ahat(xi2 = " + std::to_string(xi2) + ")",
                          "bidomain-discretization");
}

Matrix bidomain_h_operator(const BidomainProblem& prob, double xi2) {
    const Index n = prob.n;
    if (xi2 == 0.0) return Matrix::Zero(n, n);
    const auto ys = prob.nodes();
    const auto ks = prob.wavenumbers();
    const Matrix dft = dft_matrix(ks, ys);
    Eigen::VectorXcd symbol(n);
    for (int m = 0; m < prob.n; ++m) {
        const double k = ks[static_cast<std::size_t>(m)];
        const double g = g_rational(prob.sym.beta0, prob.sym.beta1,
                                    k / xi2 + prob.sym.eta1);
        symbol(m) = Complex(-xi2 * xi2 * (g + prob.sym.eta0),
                            prob.c * prob.sym.eta1 * xi2);
    }
    return multiplier_operator(dft, symbol);
}

Matrix bidomain_modulation(const BidomainProblem& prob, double xi2,
                           double* rounded_kappa) {
    const double dk = 2.0 * pi() / prob.period;
    const double kappa = dk * std::round(prob.sym.eta1 * xi2 / dk);
    if (rounded_kappa) *rounded_kappa = kappa;
    const auto ys = prob.nodes();
    Matrix mod = Matrix::Zero(prob.n, prob.n);
    for (int j = 0; j < prob.n; ++j)
        mod(j, j) = std::exp(Complex(0, kappa * ys[static_cast<std::size_t>(j)]));
    return mod;
}

double bidomain_mb(const BidomainProblem& prob, const MbGridSpec& grid) {
    const GeneratorModel base = bidomain_operator(prob, 0.0);
    const double scale = std::max(operator_norm(base.entries), 1.0);
    for (const Complex ev : eigenvalues(base))
        if (std::abs(ev) > grid.r0 / 10.0 && ev.real() >= -kSpectralTol * scale)
            throw Error("SpectrumInClosedRightHalfPlane",
                        "nonzero spectrum with Re >= 0");
    auto value_at = [&](Complex lam) {
        return std::abs(lam) * resolvent_norm(base, lam);
    };
    double sup = 0.0;
    for (const double s : log_spaced(grid.r0, grid.s_max, grid.axis_points))
        for (const double sgn : {-1.0, 1.0})
            sup = std::max(sup, value_at(Complex(0.0, sgn * s)));
    for (int i = 0; i < grid.arc_points; ++i) {
        const double th = -pi() / 2.0 + pi() * i / (grid.arc_points - 1);
        sup = std::max(sup, value_at(grid.r0 * std::exp(Complex(0, th))));
    }
    for (const double x : log_spaced(grid.r0, grid.s_max, grid.axis_points / 2))
        sup = std::max(sup, value_at(Complex(x, 0.0)));
    return kSupSafety * sup;
}

PerturbationFamily bidomain_family(const BidomainProblem& prob, char branch) {
    if (branch != '+' && branch != '-')
        throw Error("BadArgument", "branch must be '+' or '-'");
    const double q1 = prob.sym.eta0 - prob.Mb * prob.gx.g_delta + prob.gx.g_bar;
    if (!(q1 > 0.0))
        throw Error("StabilityConditionFails",
                    "eta0 = " + std::to_string(prob.sym.eta0) +
                        ", Mb gDelta = " + std::to_string(prob.Mb * prob.gx.g_delta) +
                        ", gbar = " + std::to_string(prob.gx.g_bar));
    const double sign = branch == '+' ? 1.0 : -1.0;
    const auto ys = prob.nodes();
    const auto ks = prob.wavenumbers();
    const Matrix dft = dft_matrix(ks, ys);
    const double eta0 = prob.sym.eta0, eta1 = prob.sym.eta1;
    const double beta0 = prob.sym.beta0, beta1 = prob.sym.beta1;
    const Index n = prob.n;

    PerturbationFamily fam;
    fam.base = bidomain_operator(prob, 0.0);
    // E_pm(alpha) = H(+-sqrt(alpha)) -+ c i eta1 sqrt(alpha); the drift phase
    // cancels, leaving the multiplier -alpha (g(k / (+-sqrt a) + eta1) + eta0)
    fam.perturb = [dft, ks, sign, eta0, eta1, beta0, beta1, n](double alpha) {
        if (alpha == 0.0) return Matrix(Matrix::Zero(n, n));
        const double xi2 = sign * std::sqrt(alpha);
        Eigen::VectorXcd symbol(n);
        for (Index m = 0; m < n; ++m) {
            const double g = g_rational(beta0, beta1,
                                        ks[static_cast<std::size_t>(m)] / xi2 + eta1);
            symbol(m) = Complex(-alpha * (g + eta0), 0.0);
        }
        return multiplier_operator(dft, symbol);
    };
    fam.q_slope = q1;
    fam.q = [q1](double alpha) { return q1 * alpha; };
    fam.resolvent_const = prob.Mb;
    const double g_infty =
        std::max(std::abs(prob.gx.g_inf), std::abs(prob.gx.g_sup));
    fam.asymptotic_ratio = (g_infty + eta0) / q1;
    // on the grid the alpha -> 0 limit of the multiplier is -eta0 everywhere
    // except the k = 0 mode, which keeps -g(eta1) - eta0
    Eigen::VectorXcd limit_symbol = Eigen::VectorXcd::Constant(n, Complex(-eta0, 0));
    for (Index m = 0; m < n; ++m)
        if (ks[static_cast<std::size_t>(m)] == 0.0)
            limit_symbol(m) -= g_rational(beta0, beta1, eta1);
    fam.e0_limit = multiplier_operator(dft, limit_symbol);
    fam.label = std::string("bidomain") + branch;
    return fam;
}

BidomainProblem make_bistable_bidomain(double nu1, double nu2, double gamma,
                                       double a_cubic, double period,
                                       double window, int n) {
    if (!(a_cubic > 0.0 && a_cubic < 0.5))
        throw Error("BadArgument", "cubic parameter must lie in (0, 1/2)");
    if (!(window > 0.0 && 2.0 * window < period))
        throw Error("BadArgument", "window must satisfy 0 < 2 window < period");
    BidomainProblem prob;
    prob.nu1 = nu1;
    prob.nu2 = nu2;
    prob.gamma = gamma;
    prob.a_cubic = a_cubic;
    prob.sym = bidomain_symbol_constants(nu1, nu2, gamma);
    prob.gx = g_extrema(prob.sym.beta0, prob.sym.beta1);
    prob.period = period;
    prob.window = window;
    prob.n = n;

    const double n0 = std::sqrt(prob.sym.N0_sq);
    const double kk = 1.0 / (n0 * std::sqrt(2.0));
    prob.c = n0 * std::sqrt(2.0) * (0.5 - a_cubic);
    auto wbar = [kk](double y) { return 1.0 / (1.0 + std::exp(kk * y)); };
    const double v_right = cubic_fprime(wbar(window), a_cubic);
    const double v_left = cubic_fprime(wbar(-window), a_cubic);
    const double seam = period - 2.0 * window;
    prob.fprime.reserve(static_cast<std::size_t>(n));
    for (const double y : prob.nodes()) {
        if (std::abs(y) <= window) {
            prob.fprime.push_back(cubic_fprime(wbar(y), a_cubic));
        } else {
            // seam ramp between the two tail values, staying below both wells
            const double s_pos = y > window ? y - window
                                            : (period / 2.0 - window) + (y + period / 2.0);
            prob.fprime.push_back(v_right +
                                  (v_left - v_right) * smoothstep5(s_pos / seam));
        }
    }
    prob.zero_shift = nearest_real_eigenvalue_to_zero(bidomain_operator(prob, 0.0));
    const GeneratorModel base = bidomain_operator(prob, 0.0);
    prob.nu = fixture_gap_nu(base);
    prob.Mb = bidomain_mb(prob);
    return prob;
}

namespace {

WaveReport wave_report(const std::function<GeneratorModel(double)>& op_at,
                       const std::function<double(double)>& alpha_of,
                       const DecayEnvelope& env, const std::vector<double>& xis,
                       const std::vector<double>& ts) {
    WaveReport rep;
    rep.rows.resize(xis.size());
    parallel_for(xis.size(), [&](std::size_t i) {
        const double xi = xis[i];
        const GeneratorModel gen = op_at(xi);
        const double alpha = alpha_of(xi);
        WaveRow row;
        row.xi = xi;
        row.alpha = alpha;
        row.abscissa = spectral_abscissa(gen);
        double sup = 0.0;
        double ratio = 0.0;
        for (const double t : ts) {
            const double measured = operator_norm(semigroup_direct(gen, t).mat);
            sup = std::max(sup, measured);
            ratio = std::max(ratio, measured / env.value(alpha, t));
        }
        row.measured_sup = sup;
        row.envelope = env.prefactor();
        row.ratio = ratio;
        rep.rows[i] = row;
    });
    for (const auto& row : rep.rows)
        rep.global_sup = std::max(rep.global_sup, row.measured_sup);
    rep.bounded = std::isfinite(rep.global_sup);
    rep.pass = rep.bounded &&
               std::all_of(rep.rows.begin(), rep.rows.end(),
                           [](const WaveRow& r) { return r.ratio <= 1.0 + 1e-9; });
    return rep;
}

}  // namespace

WaveReport uniform_wave_report(const RDProblem& prob, const DecayEnvelope& env,
                               const std::vector<double>& xis,
                               const std::vector<double>& ts) {
    return wave_report(
        [&prob](double xi) { return rd_operator(prob, xi * xi); },
        [](double xi) { return xi * xi; }, env, xis, ts);
}

WaveReport uniform_wave_report(const BidomainProblem& prob,
                               const DecayEnvelope& env,
                               const std::vector<double>& xis,
                               const std::vector<double>& ts) {
    return wave_report(
        [&prob](double xi) { return bidomain_operator(prob, xi); },
        [](double xi) { return xi * xi; }, env, xis, ts);
}

}  // namespace semistab
