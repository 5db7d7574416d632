#include "semistab/validator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "semistab/contour.hpp"

namespace semistab {

namespace {

std::vector<double> grid_with_zero(double lo, double hi, int n) {
    std::vector<double> g{0.0};
    for (const double v : log_spaced(lo, hi, n)) g.push_back(v);
    return g;
}

}  // namespace

std::vector<double> default_alpha_grid() { return grid_with_zero(1e-4, 1e2, 64); }
std::vector<double> default_t_grid() { return grid_with_zero(1e-3, 1e2, 64); }

namespace {

// E(alpha) = mu I commutes with everything, so exp(t(A + mu I)) =
// e^{mu t} exp(tA) exactly and the base exponentials can be reused across the
// alpha sweep.
bool scalar_shift(const Matrix& e, Complex& mu) {
    mu = e.rows() > 0 ? e(0, 0) : Complex(0, 0);
    for (Index i = 0; i < e.rows(); ++i)
        for (Index j = 0; j < e.cols(); ++j)
            if (e(i, j) != (i == j ? mu : Complex(0, 0))) return false;
    return true;
}

}  // namespace

ValidationReport validate_envelope(const PerturbationFamily& fam,
                                   const DecayEnvelope& env,
                                   const std::vector<double>& alphas,
                                   const std::vector<double>& ts,
                                   unsigned threads) {
    ValidationReport rep;
    rep.rows.resize(alphas.size() * ts.size());

    std::vector<Complex> shifts(alphas.size());
    bool all_scalar = true;
    for (std::size_t i = 0; i < alphas.size() && all_scalar; ++i)
        all_scalar = scalar_shift(
            alphas[i] == 0.0 ? Matrix(Matrix::Zero(fam.base.dim(), fam.base.dim()))
                             : Matrix(fam.perturb(alphas[i])),
            shifts[i]);

    if (all_scalar) {
        std::vector<double> base_norms(ts.size());
        parallel_for(
            ts.size(),
            [&](std::size_t j) {
                base_norms[j] =
                    operator_norm(semigroup_direct(fam.base, ts[j]).mat);
            },
            threads);
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            for (std::size_t j = 0; j < ts.size(); ++j) {
                ValidationRow& row = rep.rows[i * ts.size() + j];
                row.alpha = alphas[i];
                row.t = ts[j];
                row.measured =
                    std::exp(shifts[i].real() * ts[j]) * base_norms[j];
                row.envelope = env.value(alphas[i], ts[j]);
                row.ratio = row.measured / row.envelope;
            }
        }
        rep.max_ratio = 0.0;
        for (std::size_t k = 0; k < rep.rows.size(); ++k) {
            if (rep.rows[k].ratio > rep.max_ratio) {
                rep.max_ratio = rep.rows[k].ratio;
                rep.argmax = k;
            }
        }
        rep.pass = rep.max_ratio <= 1.0 + 1e-9;
        rep.grids = std::to_string(alphas.size()) + " alphas x " +
                    std::to_string(ts.size()) + " ts";
        return rep;
    }

    parallel_for(
        alphas.size(),
        [&](std::size_t i) {
            const GeneratorModel member = family_member(fam, alphas[i]);
            for (std::size_t j = 0; j < ts.size(); ++j) {
                ValidationRow& row = rep.rows[i * ts.size() + j];
                row.alpha = alphas[i];
                row.t = ts[j];
                row.measured = operator_norm(semigroup_direct(member, ts[j]).mat);
                row.envelope = env.value(alphas[i], ts[j]);
                row.ratio = row.measured / row.envelope;
            }
        },
        threads);
    rep.max_ratio = 0.0;
    for (std::size_t k = 0; k < rep.rows.size(); ++k) {
        if (rep.rows[k].ratio > rep.max_ratio) {
            rep.max_ratio = rep.rows[k].ratio;
            rep.argmax = k;
        }
    }
    rep.pass = rep.max_ratio <= 1.0 + 1e-9;
    rep.grids = std::to_string(alphas.size()) + " alphas x " +
                std::to_string(ts.size()) + " ts";
    return rep;
}

double crosscheck_semigroup(const GeneratorModel& gen, const SectorCert& cert,
                            const std::vector<double>& ts, double tol,
                            const double* mu_opt) {
    double worst = 0.0;
    for (const double t : ts) {
        if (!(t > 0.0)) continue;
        const Matrix direct = semigroup_direct(gen, t).mat;
        const double dn = std::max(operator_norm(direct), 1e-300);
        const Matrix vertex =
            semigroup_via_contour(gen, cert, t, SemigroupVariant::vertex, tol)
                .value.mat;
        worst = std::max(worst, operator_norm(Matrix(vertex - direct)) / dn);
        if (mu_opt) {
            const Matrix shifted =
                semigroup_via_contour(gen, cert, t, SemigroupVariant::shifted, tol,
                                      *mu_opt)
                    .value.mat;
            worst = std::max(worst, operator_norm(Matrix(shifted - direct)) / dn);
        }
    }
    return worst;
}

AppendixA1Report appendix_a1(double b0) {
    const double upper = (1.0 - std::sqrt(2.0)) / 2.0;
    if (!(b0 > -0.5 && b0 < upper))
        throw Error("OutOfRange",
                    "b0 must lie in (-1/2, (1-sqrt 2)/2) = (-0.5, " +
                        std::to_string(upper) + ")");
    AppendixA1Report rep;
    rep.b0 = b0;

    Eigen::Matrix2cd j0, z0;
    j0 << 0, 1, 0, 0;
    z0 << 1, b0, b0, 0.25;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> zs(z0);
    rep.m0 = zs.eigenvalues()(0);
    rep.z0_posdef = rep.m0 > 0.0;

    const GeneratorModel jz = make_generator(Matrix(j0 - z0), "J0-Z0", "appendix");
    const auto eigs = eigenvalues(jz);
    rep.mu_star = eigs.front().real();
    rep.lambda_star = eigs.back().real();
    rep.b1 = 0.25 * std::min(rep.lambda_star, rep.m0);

    Matrix a0 = Matrix::Zero(3, 3);
    a0(0, 0) = -rep.b1;
    a0(0, 1) = 1;
    a0(1, 1) = -rep.b1;
    Matrix w0 = Matrix::Zero(3, 3);
    w0(0, 0) = rep.b1 - 1.0;
    w0(0, 1) = -b0;
    w0(1, 0) = -b0;
    w0(1, 1) = rep.b1 - 0.25;
    w0(2, 2) = -1.0;
    rep.a0 = a0;
    rep.w0 = w0;

    const GeneratorModel a0m = make_generator(a0, "A0", "appendix");
    for (const auto& ev : spectrum(a0m)) rep.spectrum_a0.push_back(ev.value);
    const GapStructureReport h2 = verify_semisimple_gap(a0m, rep.b1);
    rep.h1_h2_hold = h2.semisimple && h2.gap_ok && h2.kernel_dim == 1;

    Eigen::SelfAdjointEigenSolver<Matrix> ws(w0);
    rep.w0_max_eig = ws.eigenvalues()(2);
    rep.w0_negdef = rep.w0_max_eig < 0.0;

    rep.destabilized_max_re =
        spectral_abscissa(make_generator(Matrix(a0 + w0), "A0+W0", "appendix"));
    return rep;
}

AppendixA2Report appendix_a2(double b0, int s_samples) {
    if (s_samples < 2) throw Error("BadArgument", "need at least 2 s samples");
    const AppendixA1Report base = appendix_a1(b0);
    AppendixA2Report rep;
    rep.b0 = b0;
    rep.s_samples = s_samples;

    Eigen::Matrix2cd j0, z0;
    j0 << 0, 1, 0, 0;
    z0 << 1, b0, b0, 0.25;
    const Matrix stable = Matrix(j0) - base.b1 * Matrix::Identity(2, 2);
    const Matrix unstable = Matrix(j0 - z0);

    double neg_lo = 1e300, neg_hi = -1e300, pos_lo = 1e300, pos_hi = -1e300;
    double st_lo = 1e300, st_hi = -1e300;
    for (int i = 0; i < s_samples; ++i) {
        const double s = 1.0 + 1.0 * i / (s_samples - 1);
        for (const Complex ev :
             eigenvalues(make_generator(Matrix(s * unstable), "sJZ", "appendix"))) {
            const double re = ev.real();
            if (re < 0) {
                neg_lo = std::min(neg_lo, re);
                neg_hi = std::max(neg_hi, re);
            } else {
                pos_lo = std::min(pos_lo, re);
                pos_hi = std::max(pos_hi, re);
            }
        }
        for (const Complex ev :
             eigenvalues(make_generator(Matrix(s * stable), "sJb", "appendix"))) {
            st_lo = std::min(st_lo, ev.real());
            st_hi = std::max(st_hi, ev.real());
        }
    }
    rep.neg_hull_lo = neg_lo;
    rep.neg_hull_hi = neg_hi;
    rep.pos_hull_lo = pos_lo;
    rep.pos_hull_hi = pos_hi;
    rep.stable_hull_lo = st_lo;
    rep.stable_hull_hi = st_hi;
    rep.essential_instability = pos_hi > 0.0;
    return rep;
}

double resolvent_family_bound_check(const PerturbationFamily& fam,
                                    const std::vector<double>& alphas,
                                    const LambdaGridSpec& grid) {
    double sup = 0.0;
    for (const double alpha : alphas) {
        const GeneratorModel member = family_member(fam, alpha);
        const double q = fam.q(alpha);
        const double abscissa = spectral_abscissa(member);
        const double scale = std::max(operator_norm(member.entries), 1.0);
        if (abscissa > -q + kSpectralTol * scale)
            throw Error("SpectrumRightOfThreshold",
                        "sigma(A_alpha) reaches Re = " + std::to_string(abscissa) +
                            " > -q(alpha) at alpha = " + std::to_string(alpha));
        std::vector<double> ims{0.0};
        for (const double s : log_spaced(1e-2, grid.im_max, grid.im_points)) {
            ims.push_back(s);
            ims.push_back(-s);
        }
        for (const double off :
             log_spaced(grid.re_min, grid.re_max, grid.re_offsets))
            for (const double im : ims) {
                const Complex lam(-q + off, im);
                sup = std::max(sup, (lam.real() + q) * resolvent_norm(member, lam));
            }
    }
    return kSupSafety * sup;
}

}  // namespace semistab
