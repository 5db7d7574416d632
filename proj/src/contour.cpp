#include "semistab/contour.hpp"

#include <algorithm>
#include <cmath>

#include "semistab/sectorial.hpp"

namespace semistab {

namespace {

// 15-point Kronrod nodes/weights on [-1,1] with the embedded 7-point Gauss rule.
constexpr double kKronrodX[15] = {
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};
constexpr double kKronrodW[15] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};
constexpr double kGaussW[7] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

struct Panel {
    double u0, u1;
    Matrix value;
    double err;
};

// One G7-K15 evaluation of integrand(lambda(u)) * lambda'(u) on [u0, u1].
Panel evaluate_panel(const std::function<Complex(double)>& point,
                     const std::function<Complex(double)>& deriv,
                     const std::function<Matrix(Complex)>& f, double u0,
                     double u1, Index n) {
    const double mid = 0.5 * (u0 + u1), half = 0.5 * (u1 - u0);
    Matrix kron = Matrix::Zero(n, n), gauss = Matrix::Zero(n, n);
    for (int i = 0; i < 15; ++i) {
        const double u = mid + half * kKronrodX[i];
        const Matrix term = f(point(u)) * deriv(u);
        kron += kKronrodW[i] * term;
        if (i % 2 == 1) gauss += kGaussW[i / 2] * term;
    }
    kron *= half;
    gauss *= half;
    const double err = (kron - gauss).norm();
    return Panel{u0, u1, std::move(kron), err};
}

struct SegmentIntegral {
    Matrix value;
    double err;
    long nodes;
};

constexpr long kNodeCapPerSegment = 20000;

SegmentIntegral integrate_open_segment(const std::function<Complex(double)>& point,
                                       const std::function<Complex(double)>& deriv,
                                       const std::function<Matrix(Complex)>& f,
                                       Index n, double tol, int initial_panels) {
    std::vector<Panel> panels;
    for (int i = 0; i < initial_panels; ++i)
        panels.push_back(evaluate_panel(point, deriv, f, double(i) / initial_panels,
                                        double(i + 1) / initial_panels, n));
    long nodes = 15L * initial_panels;
    for (;;) {
        double total_err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total_err += panels[i].err;
            if (panels[i].err > panels[worst].err) worst = i;
        }
        if (total_err <= tol) break;
        if (nodes + 30 > kNodeCapPerSegment) {
            Matrix sum = Matrix::Zero(n, n);
            for (auto& p : panels) sum += p.value;
            throw Error("ToleranceNotMet",
                        "segment quadrature at node cap, achieved error " +
                            std::to_string(total_err));
        }
        const Panel split = panels[worst];
        const double um = 0.5 * (split.u0 + split.u1);
        panels[worst] = evaluate_panel(point, deriv, f, split.u0, um, n);
        panels.push_back(evaluate_panel(point, deriv, f, um, split.u1, n));
        nodes += 30;
    }
    Matrix sum = Matrix::Zero(n, n);
    double err = 0.0;
    // deterministic summation order: sort panels by u0
    std::sort(panels.begin(), panels.end(),
              [](const Panel& a, const Panel& b) { return a.u0 < b.u0; });
    for (auto& p : panels) {
        sum += p.value;
        err += p.err;
    }
    return {std::move(sum), err, nodes};
}

SegmentIntegral integrate_circle(const CirclePath& c,
                                 const std::function<Matrix(Complex)>& f, Index n,
                                 double tol) {
    // trapezoid rule on the periodic parametrization, doubling until stable
    auto eval = [&](int m) {
        Matrix sum = Matrix::Zero(n, n);
        for (int j = 0; j < m; ++j) {
            const double th = 2.0 * pi() * j / m;
            const Complex lam = c.center + c.radius * std::exp(Complex(0, th));
            const Complex dlam = Complex(0, 1) * (lam - c.center);
            sum += f(lam) * dlam;
        }
        return Matrix((2.0 * pi() / m) * sum);
    };
    int m = 64;
    Matrix prev = eval(m);
    long nodes = m;
    for (;;) {
        m *= 2;
        Matrix cur = eval(m);
        nodes += m;
        const double diff = (cur - prev).norm();
        if (diff <= tol) return {std::move(cur), diff, nodes};
        if (m >= 1 << 16)
            throw Error("ToleranceNotMet",
                        "circle quadrature at node cap, achieved error " +
                            std::to_string(diff));
        prev = std::move(cur);
    }
}

int oscillation_panels(double phase_span) {
    return std::clamp(static_cast<int>(std::ceil(std::abs(phase_span) / pi())) + 4,
                      4, 256);
}

}  // namespace

Complex ContourPath::point(std::size_t seg, double u) const {
    return std::visit(
        [u](const auto& s) -> Complex {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Ray>) {
                const double r = s.r_begin + (s.r_end - s.r_begin) * u;
                return s.vertex + r * std::exp(Complex(0, s.angle));
            } else if constexpr (std::is_same_v<T, Arc>) {
                const double th = s.angle_begin + (s.angle_end - s.angle_begin) * u;
                return s.center + s.radius * std::exp(Complex(0, th));
            } else if constexpr (std::is_same_v<T, VerticalSegment>) {
                return Complex(s.abscissa, s.s_begin + (s.s_end - s.s_begin) * u);
            } else {
                return s.center + s.radius * std::exp(Complex(0, 2.0 * pi() * u));
            }
        },
        segments[seg]);
}

Complex ContourPath::derivative(std::size_t seg, double u) const {
    return std::visit(
        [u](const auto& s) -> Complex {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Ray>) {
                return (s.r_end - s.r_begin) * std::exp(Complex(0, s.angle));
            } else if constexpr (std::is_same_v<T, Arc>) {
                const double span = s.angle_end - s.angle_begin;
                const double th = s.angle_begin + span * u;
                return Complex(0, span) * s.radius * std::exp(Complex(0, th));
            } else if constexpr (std::is_same_v<T, VerticalSegment>) {
                return Complex(0, s.s_end - s.s_begin);
            } else {
                return Complex(0, 2.0 * pi()) * s.radius *
                       std::exp(Complex(0, 2.0 * pi() * u));
            }
        },
        segments[seg]);
}

void validate_path(const ContourPath& path, double tol) {
    for (std::size_t i = 0; i + 1 < path.segments.size(); ++i) {
        const Complex end = path.point(i, 1.0);
        const Complex start = path.point(i + 1, 0.0);
        const double scale = std::max({1.0, std::abs(end), std::abs(start)});
        if (std::abs(end - start) > tol * scale)
            throw Error("BrokenPath", "segments " + std::to_string(i) + " and " +
                                          std::to_string(i + 1) +
                                          " are not connected");
    }
}

ContourPath sector_path(double a, double phi, double eps, double r_max) {
    if (!(phi > pi() / 2.0 && phi < pi()))
        throw Error("BadAngle", "phi must lie in (pi/2, pi)");
    if (!(eps > 0.0)) throw Error("BadArgument", "eps must be positive");
    if (r_max <= 0.0) r_max = std::max(10.0, 10.0 * eps);
    r_max = std::max(r_max, 2.0 * eps);
    ContourPath path;
    path.segments.push_back(Ray{Complex(a, 0), -phi, r_max, eps});
    path.segments.push_back(Arc{Complex(a, 0), eps, -phi, phi});
    path.segments.push_back(Ray{Complex(a, 0), phi, eps, r_max});
    validate_path(path);
    return path;
}

ContourPath truncated_sector_path(double a, double mu, double phi, double r_max) {
    if (!(phi > pi() / 2.0 && phi < pi()))
        throw Error("BadAngle", "phi must lie in (pi/2, pi)");
    if (!(mu < a)) throw Error("BadOrdering", "mu must be strictly less than a");
    const double b = (a - mu) * std::abs(std::tan(phi));
    const double c = (a - mu) * std::abs(1.0 / std::cos(phi));
    if (r_max <= 0.0) r_max = std::max(10.0, 10.0 * c);
    r_max = std::max(r_max, 2.0 * c);
    ContourPath path;
    path.segments.push_back(Ray{Complex(a, 0), -phi, r_max, c});
    path.segments.push_back(VerticalSegment{mu, -b, b});
    path.segments.push_back(Ray{Complex(a, 0), phi, c, r_max});
    validate_path(path);
    return path;
}

QuadratureResult contour_integral(const ContourPath& path,
                                  const std::function<Matrix(Complex)>& integrand,
                                  double tol) {
    Index n = 0;
    {
        const Matrix probe = integrand(path.point(0, 0.5));
        n = probe.rows();
    }
    Matrix total = Matrix::Zero(n, n);
    double err = 0.0;
    long nodes = 0;
    const double seg_tol = tol * 2.0 * pi() /
                           std::max<std::size_t>(1, path.segments.size());
    for (std::size_t i = 0; i < path.segments.size(); ++i) {
        SegmentIntegral si;
        if (std::holds_alternative<CirclePath>(path.segments[i])) {
            si = integrate_circle(std::get<CirclePath>(path.segments[i]), integrand,
                                  n, seg_tol);
        } else {
            auto pt = [&path, i](double u) { return path.point(i, u); };
            auto dv = [&path, i](double u) { return path.derivative(i, u); };
            si = integrate_open_segment(pt, dv, integrand, n, seg_tol, 8);
        }
        total += si.value;
        err += si.err;
        nodes += si.nodes;
    }
    const Complex scale = 1.0 / Complex(0, 2.0 * pi());
    return {OperatorValue{scale * total, Complex(0, 0)},
            std::abs(scale) * err, nodes};
}

QuadratureResult semigroup_via_contour(const GeneratorModel& gen,
                                       const SectorCert& cert, double t,
                                       SemigroupVariant variant, double tol,
                                       double mu, double phi) {
    if (!(t > 0.0)) throw Error("BadArgument", "contour semigroup needs t > 0");
    if (phi <= 0.0) phi = pi() / 2.0 + 0.75 * (cert.angle - pi() / 2.0);
    if (!(phi > pi() / 2.0 && phi < cert.angle))
        throw Error("BadAngle", "phi must lie in (pi/2, theta)");
    const double a = cert.vertex;
    // truncate rays where |e^{lambda t}| M0/|lambda-a| falls below tolerance
    const double r_max =
        std::max(10.0, (std::log(1.0 / tol) + std::log1p(cert.bound)) /
                           (t * std::abs(std::cos(phi))));
    ContourPath path;
    if (variant == SemigroupVariant::vertex) {
        path = sector_path(a, phi, 1.0 / t, std::max(r_max, 2.0 / t));
    } else {
        if (!(mu < a)) throw Error("BadOrdering", "shifted variant needs mu < a");
        if (!(mu > spectral_abscissa(gen)))
            throw Error("BadOrdering", "shifted variant needs mu > s(A)");
        path = truncated_sector_path(a, mu, phi, r_max);
    }
    auto integrand = [&gen, t](Complex lam) {
        return Matrix(std::exp(lam * t) * resolvent(gen, lam).mat);
    };
    QuadratureResult out = contour_integral(path, integrand, tol);
    out.value.context = Complex(t, 0.0);
    return out;
}

OperatorValue riesz_projection(const GeneratorModel& gen, const CirclePath& circle,
                               double tol) {
    const double scale = std::max(operator_norm(gen.entries), 1e-300);
    for (const Complex ev : eigenvalues(gen))
        if (std::abs(std::abs(ev - circle.center) - circle.radius) <=
            kSpectralTol * scale)
            throw Error("EigenvalueOnContour",
                        "eigenvalue within tolerance of the circle");
    ContourPath path;
    path.segments.push_back(circle);
    path.closed = true;
    auto integrand = [&gen](Complex lam) { return resolvent(gen, lam).mat; };
    QuadratureResult qr = contour_integral(path, integrand, tol);
    const Matrix& p = qr.value.mat;
    if (operator_norm(Matrix(p * p - p)) > 10.0 * tol)
        throw Error("ToleranceNotMet", "projection fails P^2 = P at 10*tol");
    if (operator_norm(Matrix(p * gen.entries - gen.entries * p)) >
        10.0 * tol * std::max(1.0, scale))
        throw Error("ToleranceNotMet", "projection fails [P, A] = 0 at 10*tol");
    return qr.value;
}

double vertical_segment_sup(const GeneratorModel& gen, double mu, double b,
                            int samples) {
    if (samples < 3) samples = 3;
    auto norm_at = [&](double s) { return resolvent_norm(gen, Complex(mu, s)); };
    double best = 0.0, best_s = -b;
    for (int i = 0; i < samples; ++i) {
        const double s = -b + 2.0 * b * i / (samples - 1);
        const double v = norm_at(s);
        if (v > best) {
            best = v;
            best_s = s;
        }
    }
    // one refinement pass around the coarse argmax
    const double step = 2.0 * b / (samples - 1);
    const double lo = std::max(-b, best_s - step), hi = std::min(b, best_s + step);
    for (int i = 0; i < 33; ++i) {
        const double s = lo + (hi - lo) * i / 32.0;
        best = std::max(best, norm_at(s));
    }
    return best;
}

OperatorValue v_operator(const GeneratorModel& gen, double a, double t, double mu,
                         double phi, VRoute route, double tol) {
    if (!(phi > pi() / 2.0 && phi < pi()))
        throw Error("BadAngle", "phi must lie in (pi/2, pi)");
    if (!(mu > spectral_abscissa(gen)))
        throw Error("BadOrdering", "mu must exceed the spectral abscissa");
    if (!(mu < a)) throw Error("BadOrdering", "mu must be below the vertex a");
    const double b = (a - mu) * std::abs(std::tan(phi));
    const Index n = gen.dim();
    if (b <= 0.0) return {Matrix::Zero(n, n), Complex(t, 0)};

    if (route == VRoute::quadrature) {
        // the integral runs over the real variable s, so du carries 2b, not 2bi
        auto pt = [mu, b](double u) { return Complex(mu, -b + 2.0 * b * u); };
        auto dv = [b](double) { return Complex(2.0 * b, 0); };
        auto f = [&gen, t](Complex lam) {
            return Matrix(std::exp(Complex(0, lam.imag() * t)) *
                          resolvent(gen, lam).mat);
        };
        SegmentIntegral si = integrate_open_segment(
            pt, dv, f, n, tol, oscillation_panels(2.0 * b * std::max(t, 1.0)));
        return {std::move(si.value), Complex(t, 0)};
    }

    // convolution route: integral over xi >= 0 of 2 sin(b(t-xi))/(t-xi)
    // e^{-mu xi} T(xi), truncated once the integrand envelope is negligible.
    // The 2 is the length of the s-interval: int_{-b}^{b} e^{izs} ds =
    // 2 sin(bz)/z.
    const double rate = mu - spectral_abscissa(gen);
    auto kernel = [b, t](double xi) {
        const double z = t - xi;
        return 2.0 * (std::abs(z) < 1e-8 ? b * (1.0 - (b * z) * (b * z) / 6.0)
                                         : std::sin(b * z) / z);
    };
    auto f = [&](double xi) {
        return Matrix(kernel(xi) * std::exp(-mu * xi) *
                      semigroup_direct(gen, xi).mat);
    };
    Matrix total = Matrix::Zero(n, n);
    double xi0 = 0.0;
    const double chunk = std::max(1.0, pi() / b);
    for (int block = 0; block < 4096; ++block) {
        const double xi1 = xi0 + chunk;
        auto pt = [xi0, xi1](double u) { return Complex(xi0 + (xi1 - xi0) * u, 0); };
        auto dv = [xi0, xi1](double) { return Complex(xi1 - xi0, 0); };
        auto fr = [&f](Complex xi) { return f(xi.real()); };
        SegmentIntegral si = integrate_open_segment(
            pt, dv, fr, n, tol / 8.0, oscillation_panels(b * chunk));
        total += si.value;
        xi0 = xi1;
        const double tail = 2.0 * b * std::exp(-mu * xi0) *
                            operator_norm(semigroup_direct(gen, xi0).mat) /
                            std::max(rate, 1e-12);
        if (xi0 > t && tail < tol / 2.0) break;
    }
    return {std::move(total), Complex(t, 0)};
}

OperatorValue f_tilde(const GeneratorModel& gen_alpha, Complex lambda, double nu,
                      double tol) {
    const double r = nu / 2.0;
    if (std::abs(std::abs(lambda) - r) <= 1e-8 * std::max(1.0, r))
        throw Error("LambdaOnContour", "lambda lies on the circle |z| = nu/2");
    const double scale = std::max(operator_norm(gen_alpha.entries), 1e-300);
    for (const Complex ev : eigenvalues(gen_alpha))
        if (std::abs(std::abs(ev) - r) <= kSpectralTol * scale)
            throw Error("EigenvalueOnContour",
                        "spectrum within tolerance of |z| = nu/2");
    ContourPath path;
    path.segments.push_back(CirclePath{Complex(0, 0), r});
    path.closed = true;
    auto integrand = [&gen_alpha, lambda](Complex zeta) {
        return Matrix(resolvent(gen_alpha, zeta).mat / (lambda - zeta));
    };
    QuadratureResult qr = contour_integral(path, integrand, tol);
    qr.value.context = lambda;
    return qr.value;
}

}  // namespace semistab
