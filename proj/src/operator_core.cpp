#include "semistab/operator_core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace semistab {

namespace {
unsigned g_default_threads = 0;
}

void set_default_thread_count(unsigned threads) { g_default_threads = threads; }
unsigned default_thread_count() { return g_default_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads) {
    if (threads == 0) threads = g_default_threads;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    if (n == 1) {
        out.push_back(lo);
        return out;
    }
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i)
        out.push_back(std::exp(llo + (lhi - llo) * i / (n - 1)));
    return out;
}

GeneratorModel make_generator(Matrix entries, std::string label,
                              std::string provenance) {
    if (entries.rows() < 1 || entries.rows() != entries.cols())
        throw Error("BadDimension", "generator must be square with n >= 1");
    if (!entries.allFinite())
        throw Error("BadEntries", "generator entries must be finite");
    return GeneratorModel{std::move(entries), std::move(label), std::move(provenance)};
}

double operator_norm(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    if (m.rows() <= 16 && m.cols() <= 16)
        return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
    return Eigen::BDCSVD<Matrix>(m).singularValues()(0);
}

OperatorValue resolvent(const GeneratorModel& gen, Complex lambda) {
    const Index n = gen.dim();
    Matrix shifted = -gen.entries;
    shifted.diagonal().array() += lambda;
    Eigen::PartialPivLU<Matrix> lu(shifted);
    const double rcond = lu.rcond();
    if (!(rcond > 1.0 / kSingularCondition))
        throw Error("SingularResolvent",
                    "lambda is numerically in the spectrum (rcond " +
                        std::to_string(rcond) + ")");
    OperatorValue out{lu.solve(Matrix::Identity(n, n)), lambda};
    if (!out.mat.allFinite())
        throw Error("SingularResolvent", "resolvent solve produced non-finite entries");
    return out;
}

double resolvent_norm(const GeneratorModel& gen, Complex lambda) {
    const Index n = gen.dim();
    if (n <= 3) return operator_norm(resolvent(gen, lambda));
    Matrix shifted = -gen.entries;
    shifted.diagonal().array() += lambda;
    Eigen::PartialPivLU<Matrix> lu(shifted);
    if (!(lu.rcond() > 1.0 / kSingularCondition))
        throw Error("SingularResolvent",
                    "lambda is numerically in the spectrum");
    // ||R|| = 1/sigma_min(lambda I - A). Power iteration on R^* R through the
    // factored solves converges fast near the spectrum (isolated top singular
    // value); far away the singular values cluster, so fall back to the exact
    // SVD of the shifted matrix. Two starts guard against an orthogonal start.
    double best = 0.0;
    bool ok = true;
    for (int start = 0; start < 2 && ok; ++start) {
        Eigen::VectorXcd v(n);
        for (Index i = 0; i < n; ++i)
            v(i) = Complex(1.0 + double(i) / double(n),
                           start == 0 ? 0.3 - double(i % 7) / 7.0
                                      : 0.1 + double(i % 5) / 5.0);
        v.normalize();
        double rayleigh = 0.0, prev = -1.0;
        bool converged = false;
        for (int it = 0; it < 48; ++it) {
            const Eigen::VectorXcd w = lu.solve(v);
            Eigen::VectorXcd z = lu.adjoint().solve(w);
            rayleigh = std::real(v.dot(z));
            const double nz = z.norm();
            if (nz == 0.0) break;
            v = z / nz;
            if (it >= 8 && std::abs(rayleigh - prev) <= 5e-13 * rayleigh) {
                converged = true;
                break;
            }
            prev = rayleigh;
        }
        ok = converged;
        best = std::max(best, std::sqrt(std::max(rayleigh, 0.0)));
    }
    if (ok) return best;
    const auto& sv = Eigen::BDCSVD<Matrix>(shifted).singularValues();
    return 1.0 / sv(sv.size() - 1);
}

std::vector<Complex> eigenvalues(const GeneratorModel& gen) {
    Eigen::ComplexEigenSolver<Matrix> es(gen.entries, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw Error("NonConvergence", "eigenvalue iteration failed to converge");
    std::vector<Complex> vals(es.eigenvalues().data(),
                              es.eigenvalues().data() + gen.dim());
    std::sort(vals.begin(), vals.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return vals;
}

std::vector<Eigenvalue> spectrum(const GeneratorModel& gen) {
    const auto vals = eigenvalues(gen);
    const double scale = operator_norm(gen.entries);
    const double tol = 1e-7 * std::max(scale, 1e-300);
    std::vector<Eigenvalue> clustered;
    for (const Complex v : vals) {
        bool merged = false;
        for (auto& c : clustered) {
            if (std::abs(v - c.value) <= tol) {
                // running mean keeps the representative centered
                c.value = (c.value * static_cast<double>(c.multiplicity) + v) /
                          static_cast<double>(c.multiplicity + 1);
                ++c.multiplicity;
                merged = true;
                break;
            }
        }
        if (!merged) clustered.push_back({v, 1});
    }
    return clustered;
}

double spectral_abscissa(const GeneratorModel& gen) {
    double s = -std::numeric_limits<double>::infinity();
    for (const Complex v : eigenvalues(gen)) s = std::max(s, v.real());
    return s;
}

OperatorValue semigroup_direct(const GeneratorModel& gen, double t) {
    if (t < 0.0) throw Error("BadArgument", "semigroup time must be nonnegative");
    const Index n = gen.dim();
    if (t == 0.0) return {Matrix::Identity(n, n), Complex(0.0, 0.0)};
    Matrix scaled = t * gen.entries;
    const double norm1 = scaled.cwiseAbs().colwise().sum().maxCoeff();
    if (norm1 > 1e6)
        throw Error("Overflow", "||tA|| = " + std::to_string(norm1) +
                                     " exceeds the 1e6 safety cap");
    return {scaled.exp(), Complex(t, 0.0)};
}

Matrix PerturbationFamily::e0(double alpha) const {
    if (!(alpha > 0.0)) throw Error("BadArgument", "E0 requires alpha > 0");
    return perturb(alpha) / alpha;
}

Matrix PerturbationFamily::e0_at_zero() const {
    if (e0_limit) return *e0_limit;
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true))
        std::cerr << "semistab: E0(0) not supplied; using E0 at the smallest "
                     "sampled alpha\n";
    return e0(1e-6);
}

PerturbationFamily make_linear_family(GeneratorModel base, Matrix direction,
                                      double q1, std::string label) {
    PerturbationFamily fam;
    fam.base = std::move(base);
    Matrix dir = std::move(direction);
    fam.perturb = [dir](double alpha) { return Matrix(alpha * dir); };
    fam.q_slope = q1;
    fam.q = [q1](double alpha) { return q1 * alpha; };
    fam.asymptotic_ratio = q1 > 0.0 ? operator_norm(dir) / q1 : 0.0;
    fam.e0_limit = dir;
    fam.label = std::move(label);
    return fam;
}

GeneratorModel family_member(const PerturbationFamily& fam, double alpha) {
    if (alpha < 0.0) throw Error("BadArgument", "alpha must be nonnegative");
    if (alpha == 0.0) return fam.base;
    return make_generator(fam.base.entries + fam.perturb(alpha),
                          fam.label + "[alpha=" + std::to_string(alpha) + "]",
                          fam.base.provenance);
}

double sup_e0(const PerturbationFamily& fam, int samples) {
    double sup = fam.e0_limit ? operator_norm(*fam.e0_limit) : 0.0;
    for (double alpha : log_spaced(1e-6, 1.0, samples))
        sup = std::max(sup, operator_norm(fam.e0(alpha)));
    return sup;
}

void validate_family(const PerturbationFamily& fam, int samples) {
    if (!fam.perturb || !fam.q)
        throw Error("FamilyInvariantViolated", "perturbation or q not set");
    const double scale = 1.0 + operator_norm(fam.perturb(1.0));
    if (operator_norm(fam.perturb(0.0)) > 1e-14 * scale)
        throw Error("FamilyInvariantViolated", "E(0) is not the zero matrix");

    const auto alphas = log_spaced(1e-4, 1.0, samples);
    for (const double alpha : alphas) {
        if (!std::isfinite(operator_norm(fam.e0(alpha))))
            throw Error("FamilyInvariantViolated", "E0 unbounded on (0,1]");
    }
    double prev_q = 0.0;
    for (const double alpha : log_spaced(1e-4, 10.0, samples)) {
        const double q = fam.q(alpha);
        if (q < prev_q - 1e-14)
            throw Error("FamilyInvariantViolated",
                        "q is not increasing at alpha = " + std::to_string(alpha));
        prev_q = q;
        if (alpha <= fam.q_knee &&
            std::abs(q - fam.q_slope * alpha) > 1e-12 * std::max(1.0, q))
            throw Error("FamilyInvariantViolated",
                        "q(alpha) != q1 alpha below the knee at alpha = " +
                            std::to_string(alpha));
    }
    if (fam.modulus) {
        const Matrix e0_zero = fam.e0_at_zero();
        for (const double alpha : alphas) {
            const double dev = operator_norm(Matrix(fam.e0(alpha) - e0_zero));
            if (dev > (*fam.modulus)(alpha) * (1.0 + 1e-9) + 1e-12)
                throw Error("FamilyInvariantViolated",
                            "||E0(alpha) - E0(0)|| exceeds r(alpha) at alpha = " +
                                std::to_string(alpha));
        }
    }
}

namespace {

// Swaps the adjacent diagonal entries T(k,k), T(k+1,k+1) of an upper
// triangular T by a unitary similarity, accumulating it into Q.
void swap_adjacent(Matrix& t, Matrix& q, Index k) {
    const Complex a = t(k, k), b = t(k, k + 1), c = t(k + 1, k + 1);
    // v = (b, c - a) is the eigenvector of [[a,b],[0,c]] for eigenvalue c.
    const Complex x = b, y = c - a;
    const double r = std::sqrt(std::norm(x) + std::norm(y));
    if (r <= 1e-300) return;  // equal eigenvalues, nothing to move
    const Complex g11 = std::conj(x) / r, g12 = std::conj(y) / r;
    const Complex g21 = -y / r, g22 = x / r;
    const Index n = t.rows();
    for (Index j = 0; j < n; ++j) {  // rows k, k+1 <- G * rows
        const Complex t1 = t(k, j), t2 = t(k + 1, j);
        t(k, j) = g11 * t1 + g12 * t2;
        t(k + 1, j) = g21 * t1 + g22 * t2;
    }
    for (Index i = 0; i < n; ++i) {  // cols k, k+1 <- cols * G^*
        const Complex t1 = t(i, k), t2 = t(i, k + 1);
        t(i, k) = std::conj(g11) * t1 + std::conj(g12) * t2;
        t(i, k + 1) = std::conj(g21) * t1 + std::conj(g22) * t2;
        const Complex q1 = q(i, k), q2 = q(i, k + 1);
        q(i, k) = std::conj(g11) * q1 + std::conj(g12) * q2;
        q(i, k + 1) = std::conj(g21) * q1 + std::conj(g22) * q2;
    }
    t(k + 1, k) = Complex(0, 0);
}

}  // namespace

Matrix spectral_projector_schur(const Matrix& a,
                                const std::function<bool(Complex)>& inside) {
    const Index n = a.rows();
    Eigen::ComplexSchur<Matrix> schur(a, /*computeU=*/true);
    if (schur.info() != Eigen::Success)
        throw Error("NonConvergence", "Schur reduction failed to converge");
    Matrix t = schur.matrixT();
    Matrix q = schur.matrixU();
    std::vector<bool> sel(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) sel[static_cast<std::size_t>(i)] = inside(t(i, i));
    // bubble the selected eigenvalues to the top
    for (bool moved = true; moved;) {
        moved = false;
        for (Index k = 0; k + 1 < n; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if (!sel[ku] && sel[ku + 1]) {
                swap_adjacent(t, q, k);
                std::swap(sel[ku], sel[ku + 1]);
                moved = true;
            }
        }
    }
    const Index k = static_cast<Index>(std::count(sel.begin(), sel.end(), true));
    if (k == 0) return Matrix::Zero(n, n);
    if (k == n) return Matrix::Identity(n, n);
    // P = Q [I Y; 0 0] Q^* with T11 Y - Y T22 = T12, solved column by column.
    const Matrix t11 = t.topLeftCorner(k, k);
    const Matrix t12 = t.topRightCorner(k, n - k);
    const Matrix t22 = t.bottomRightCorner(n - k, n - k);
    Matrix y = Matrix::Zero(k, n - k);
    for (Index j = 0; j < n - k; ++j) {
        Eigen::VectorXcd rhs = t12.col(j);
        if (j > 0) rhs += y.leftCols(j) * t22.col(j).head(j);
        Matrix lhs = t11;
        lhs.diagonal().array() -= t22(j, j);
        y.col(j) = lhs.triangularView<Eigen::Upper>().solve(rhs);
    }
    Matrix block = Matrix::Zero(n, n);
    block.topLeftCorner(k, k) = Matrix::Identity(k, k);
    block.topRightCorner(k, n - k) = y;
    return q * block * q.adjoint();
}

ProjectionSplit split_projection(const Matrix& p, double threshold) {
    Eigen::BDCSVD<Matrix> svd(p, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = threshold * std::max(1.0, sv.size() > 0 ? sv(0) : 1.0);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;
    ProjectionSplit out;
    out.rank = static_cast<int>(rank);
    out.im_basis = svd.matrixU().leftCols(rank);
    // right singular vectors past the rank span the null space of P
    out.ker_basis = svd.matrixV().rightCols(p.cols() - rank);
    return out;
}

GapStructureReport verify_semisimple_gap(const GeneratorModel& gen, double nu) {
    if (!(nu > 0.0)) throw Error("BadArgument", "nu must be positive");
    const auto spec = spectrum(gen);
    const double scale = std::max(operator_norm(gen.entries), 1e-300);

    int zero_mult = 0;
    double zero_abs = 0.0;
    double max_re_rest = -std::numeric_limits<double>::infinity();
    for (const auto& ev : spec) {
        if (std::abs(ev.value) < nu / 4.0) {
            zero_mult += ev.multiplicity;
            zero_abs = std::max(zero_abs, std::abs(ev.value));
        } else {
            max_re_rest = std::max(max_re_rest, ev.value.real());
        }
    }
    if (zero_mult == 0)
        throw Error("NoIsolatedZero", "no eigenvalue within nu/4 of the origin");

    GapStructureReport rep;
    rep.zero_cluster_abs = zero_abs;
    rep.gap = -max_re_rest;
    rep.gap_ok = !(max_re_rest > -nu + kSpectralTol * scale);

    const Matrix p0 = spectral_projector_schur(
        gen.entries, [nu](Complex z) { return std::abs(z) < nu / 2.0; });
    rep.kernel_dim = split_projection(p0).rank;
    const double ap0 = operator_norm(gen.entries * p0);
    rep.semisimple = rep.kernel_dim == zero_mult && ap0 <= kSpectralTol * scale;
    return rep;
}

}  // namespace semistab
