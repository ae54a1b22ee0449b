#pragma once

// Sector-boundary contour for the resolvent of B: annulus decomposition,
// adaptive Gauss-Legendre quadrature of the evolution integral, closed-form
// residues at the characteristic numbers and group sums per annulus.
//
// Orientation ("standard"): the truncated contour runs down the lower ray
// from R_max, across the inner arc from -(theta+margin) to +(theta+margin),
// and out the upper ray.  This traversal winds negatively around the
// characteristic numbers, so residue contributions enter the integral with a
// positive sign and the t -> +0 limit reproduces the integrated element.

#include "lidskii/abel.hpp"
#include "lidskii/jordan.hpp"
#include "lidskii/opfunc.hpp"

#include <functional>

namespace lidskii {

struct ContourSpec {
    double r = 0.0;       // inner arc radius; the closed disk |z| <= r is pole-free
    double theta = 0.0;   // sector semi-angle of the numerical range
    double margin = 0.0;  // angular margin (rays sit at theta + margin)
    double R_max = 0.0;   // ray truncation radius
    std::vector<double> annuli;      // ring boundaries, ascending, last == R_max
    std::vector<double> pole_radii;  // |1/mu_q|, ascending

    // Ray decay model: |exp(-phi(z) t)| <= exp(-decay_c * |phi|) and
    // |phi(z)| >= cs_abs/2 * |z|^s hold on the rays beyond R0.
    double decay_c = 0.0;
    double cs_abs = 0.0;
    int s = 0;
    double R0 = 0.0;

    enum class Orientation { standard };
    Orientation orientation = Orientation::standard;

    double ray_angle() const { return theta + margin; }

    /// Analytic bound on the dropped ray tails beyond R_max, per the fitted
    /// decay model, for an element of the given norm.
    double tail_bound(double t, double h_norm) const {
        const double kappa = decay_c * t * cs_abs / 2.0;
        const double u = kappa * std::pow(R_max, s);
        const double pre = (1.0 + 1.0 / std::sin(margin)) * h_norm / (std::numbers::pi * s);
        return pre * std::exp(-u) / u;
    }
};

struct QuadratureResult {
    Vector value;
    long node_count = 0;
    double est_error = 0.0;
    double tail_bound = 0.0;
};

namespace detail {

// 16-point Gauss-Legendre rule on [-1, 1].
inline constexpr double kGlNode[8] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
inline constexpr double kGlWeight[8] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

struct QuadWork {
    double est_error = 0.0;
    long nodes = 0;
    long budget = 100000;
};

template <class G>
Vector gl16(G&& g, double a, double b, QuadWork& work) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    Vector acc;
    for (int i = 0; i < 8; ++i) {
        const Vector lo = g(mid - half * kGlNode[i]);
        const Vector hi = g(mid + half * kGlNode[i]);
        if (acc.size() == 0) acc = Vector::Zero(lo.size());
        acc += kGlWeight[i] * (lo + hi);
    }
    work.nodes += 16;
    if (work.nodes > work.budget)
        throw QuadratureStall("quadrature node budget exhausted");
    return half * acc;
}

template <class G>
Vector adapt_panel(G&& g, double a, double b, double share, int depth, QuadWork& work) {
    const Vector whole = gl16(g, a, b, work);
    const double mid = 0.5 * (a + b);
    const Vector left = gl16(g, a, mid, work);
    const Vector right = gl16(g, mid, b, work);
    const double delta = (whole - (left + right)).norm();
    if (delta <= share || depth >= 24) {
        work.est_error += delta;
        return left + right;
    }
    return adapt_panel(g, a, mid, share / 2.0, depth + 1, work) +
           adapt_panel(g, mid, b, share / 2.0, depth + 1, work);
}

// Integral of f(z) dz along the arc |z| = radius from ang0 to ang1.
template <class F>
Vector arc_integral(F&& f, double radius, double ang0, double ang1, double share,
                    QuadWork& work) {
    auto g = [&](double u) -> Vector {
        const cplx z = std::polar(radius, u);
        return (cplx(0.0, 1.0) * z) * f(z);
    };
    const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(ang1 - ang0) / 0.4)));
    Vector acc;
    for (int p = 0; p < panels; ++p) {
        const double a = ang0 + (ang1 - ang0) * p / panels;
        const double b = ang0 + (ang1 - ang0) * (p + 1) / panels;
        Vector part = adapt_panel(g, a, b, share / panels, 0, work);
        acc = acc.size() ? Vector(acc + part) : part;
    }
    return acc;
}

// Integral of f(z) dz along the ray segment from ra to rb at the given angle,
// split into log-spaced panels.
template <class F>
Vector ray_integral(F&& f, double angle, double ra, double rb, double share, QuadWork& work) {
    const cplx dir = std::polar(1.0, angle);
    auto g = [&](double x) -> Vector { return dir * f(x * dir); };
    std::vector<double> cuts{ra};
    for (double x = ra * 2.0; x < rb; x *= 2.0) cuts.push_back(x);
    cuts.push_back(rb);
    const int panels = static_cast<int>(cuts.size()) - 1;
    Vector acc;
    for (int p = 0; p < panels; ++p) {
        Vector part = adapt_panel(g, cuts[p], cuts[p + 1], share / panels, 0, work);
        acc = acc.size() ? Vector(acc + part) : part;
    }
    return acc;
}

}  // namespace detail

/// (1/2 pi i) times the integral of f over the truncated standard contour:
/// down the lower ray, across the inner arc, out the upper ray.
template <class F>
QuadratureResult integrate_open_contour(F&& f, const ContourSpec& spec, double tol,
                                        long budget = 100000) {
    detail::QuadWork work;
    work.budget = budget;
    const double alpha = spec.ray_angle();
    const double share = tol * (2.0 * std::numbers::pi) / 3.0;
    Vector lower = detail::ray_integral(f, -alpha, spec.r, spec.R_max, share, work);
    Vector arc = detail::arc_integral(f, spec.r, -alpha, alpha, share, work);
    Vector upper = detail::ray_integral(f, alpha, spec.r, spec.R_max, share, work);
    QuadratureResult res;
    res.value = (arc + upper - lower) / cplx(0.0, 2.0 * std::numbers::pi);
    res.node_count = work.nodes;
    res.est_error = work.est_error / (2.0 * std::numbers::pi);
    return res;
}

/// (1/2 pi i) times the integral of f over the boundary of the ring sector
/// {a < |z| < b, |arg z| < theta + margin}, traversed with the same negative
/// winding as the open contour (inner arc counterclockwise in angle, outer
/// arc back, upper segment outward, lower segment inward).
template <class F>
QuadratureResult integrate_ring_boundary(F&& f, const ContourSpec& spec, double a, double b,
                                         double tol, long budget = 100000) {
    detail::QuadWork work;
    work.budget = budget;
    const double alpha = spec.ray_angle();
    const double share = tol * (2.0 * std::numbers::pi) / 4.0;
    Vector inner = detail::arc_integral(f, a, -alpha, alpha, share, work);
    Vector outer = detail::arc_integral(f, b, alpha, -alpha, share, work);
    Vector upper = detail::ray_integral(f, alpha, a, b, share, work);
    Vector lower = detail::ray_integral(f, -alpha, a, b, share, work);
    QuadratureResult res;
    res.value = (inner + outer + upper - lower) / cplx(0.0, 2.0 * std::numbers::pi);
    res.node_count = work.nodes;
    res.est_error = work.est_error / (2.0 * std::numbers::pi);
    return res;
}

/// (1/2 pi i) times the clockwise circle integral of f around `center`,
/// by the periodic trapezoid rule with doubling (spectrally accurate for the
/// analytic integrands met here).
template <class F>
Vector integrate_circle_cw(F&& f, cplx center, double radius, double tol, int dim,
                           long budget = 100000) {
    const double two_pi = 2.0 * std::numbers::pi;
    long nodes = 0;
    Vector prev;
    for (int n = 16; n <= 8192; n *= 2) {
        Vector acc = Vector::Zero(dim);
        for (int j = 0; j < n; ++j) {
            const double tau = two_pi * j / n;
            const cplx w = std::polar(radius, -tau);
            acc += f(center + w) * w;
        }
        nodes += n;
        if (nodes > budget) throw QuadratureStall("circle quadrature budget exhausted");
        Vector value = -acc / static_cast<double>(n);
        if (prev.size() && (value - prev).norm() <= tol) return value;
        prev = value;
    }
    throw QuadratureStall("circle quadrature failed to converge");
}

namespace detail {

inline std::vector<double> characteristic_radii(const DenseOperator& B) {
    Eigen::ComplexEigenSolver<Matrix> es(B.matrix());
    if (es.info() != Eigen::Success)
        throw PreconditionFailed("characteristic_radii: eigensolver failed");
    std::vector<double> radii;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double m = std::abs(es.eigenvalues()(i));
        if (m <= 0.0)
            throw SingularOperator("characteristic_radii: zero eigenvalue, B not invertible");
        radii.push_back(1.0 / m);
    }
    std::sort(radii.begin(), radii.end());
    return radii;
}

inline double relative_gap(double radius, const std::vector<double>& poles) {
    double g = std::numeric_limits<double>::infinity();
    for (double p : poles) g = std::min(g, std::abs(radius - p) / radius);
    return g;
}

// Circle-selection freedom: pick a radius in [lo, hi] clear of the pole
// radii.  Candidates are the geometric target, the midpoints of consecutive
// pole radii falling inside, and the interval ends; the one closest to the
// target with a comfortable gap wins, falling back to the best gap overall.
inline double nudge_ring_radius(double target, double lo, double hi,
                                const std::vector<double>& poles, double delta_gap) {
    std::vector<double> cand{target, lo, hi};
    for (size_t i = 0; i + 1 < poles.size(); ++i) {
        const double mid = 0.5 * (poles[i] + poles[i + 1]);
        if (mid > lo && mid < hi) cand.push_back(mid);
    }
    std::sort(cand.begin(), cand.end(), [&](double a, double b) {
        return std::abs(std::log(a / target)) < std::abs(std::log(b / target));
    });
    for (double c : cand)
        if (relative_gap(c, poles) >= 2.0 * delta_gap) return c;
    double best = target, best_gap = -1.0;
    for (double c : cand) {
        const double g = relative_gap(c, poles);
        if (g > best_gap) {
            best_gap = g;
            best = c;
        }
    }
    if (best_gap < delta_gap)
        throw GapFailure("build_contour: no ring radius with relative pole gap >= " +
                         std::to_string(delta_gap));
    return best;
}

}  // namespace detail

/// Builds the contour for (B, phi): inner radius from the smallest
/// characteristic number (pushed outward when phi has a principal part, to
/// keep exp(-phi t) tame on the inner arc), ring boundaries geometric with
/// ratio 2 nudged away from pole radii, and R_max chosen so the analytic ray
/// tail at t_min falls below target_tail.
inline ContourSpec build_contour(const DenseOperator& B, const LaurentFunction& phi,
                                 double theta, double margin, double t_min,
                                 double target_tail) {
    constexpr double kDeltaGap = 0.05;
    if (theta < 0.0 || margin <= 0.0 || theta + margin >= std::numbers::pi / 2.0)
        throw PreconditionFailed("build_contour: need 0 <= theta, 0 < margin, theta + margin < pi/2");
    if (phi.degree() < 1)
        throw PreconditionFailed("build_contour: phi must have polynomial degree >= 1 for ray decay");
    if (!validate_sector_condition(phi, theta).ok)
        throw PreconditionFailed("build_contour: phi fails the sector condition at theta");
    if (t_min <= 0.0 || target_tail <= 0.0)
        throw PreconditionFailed("build_contour: t_min and target_tail must be positive");

    ContourSpec spec;
    spec.theta = theta;
    spec.margin = margin;
    spec.pole_radii = detail::characteristic_radii(B);
    const double lam_min = spec.pole_radii.front();
    const double lam_max = spec.pole_radii.back();
    spec.r = (phi.principal_depth() > 0 ? 0.9 : 0.5) * lam_min;
    spec.s = phi.degree();
    spec.cs_abs = std::abs(phi.coeff(phi.degree()));

    // Ray decay constant; grow R0 until the degree term dominates |phi|.
    spec.R0 = 10.0 * lam_max;
    const double alpha = spec.ray_angle();
    for (int attempt = 0;; ++attempt) {
        bool dominated = true;
        for (int i = 0; i < 64 && dominated; ++i) {
            const double rho = spec.R0 * std::pow(1e3, i / 63.0);
            for (double sgn : {1.0, -1.0})
                if (std::abs(phi(std::polar(rho, sgn * alpha))) <
                    0.5 * spec.cs_abs * std::pow(rho, spec.s))
                    dominated = false;
        }
        if (dominated) break;
        if (attempt >= 8)
            throw PreconditionFailed("build_contour: degree term never dominates |phi| on the rays");
        spec.R0 *= 2.0;
    }
    spec.decay_c = fit_ray_decay_constant(phi, alpha, spec.R0);
    if (spec.decay_c <= 0.0)
        throw PreconditionFailed("build_contour: no exponential decay on the rays "
                                 "(fitted Re phi / |phi| <= 0)");

    // Pole-bearing rings: geometric boundaries, each nudged off the poles.
    double prev = spec.r;
    while (prev < 1.4 * lam_max) {
        const double target = 2.0 * prev;
        const double lo = std::max(prev * 1.05, target / 1.5);
        const double hi = target * 1.5;
        const double radius = detail::nudge_ring_radius(target, lo, hi, spec.pole_radii, kDeltaGap);
        spec.annuli.push_back(radius);
        prev = radius;
    }

    // Truncation radius from the tail model, then pole-free rings out to it.
    double R = std::max(prev * 2.0, spec.R0);
    const double kappa = spec.decay_c * t_min * spec.cs_abs / 2.0;
    auto tail_at = [&](double radius) {
        const double u = kappa * std::pow(radius, spec.s);
        return (1.0 + 1.0 / std::sin(margin)) / (std::numbers::pi * spec.s) * std::exp(-u) / u;
    };
    while (tail_at(R) > target_tail) {
        R *= 2.0;
        if (R > 1e12)
            throw PreconditionFailed("build_contour: tail target unreachable below R = 1e12");
    }
    spec.R_max = R;
    for (double x = prev * 2.0; x < 0.95 * spec.R_max; x *= 2.0) spec.annuli.push_back(x);
    spec.annuli.push_back(spec.R_max);
    return spec;
}

/// Integrand of the evolution integral: exp(-phi(z) t) B (I - z B)^{-1} h.
inline auto evolution_integrand(const DenseOperator& B, const LaurentFunction& phi,
                                const Vector& h, double t) {
    return [&B, &phi, h, t](cplx z) -> Vector {
        return std::exp(-phi(z) * t) * (B.matrix() * resolvent_apply(B, z, h));
    };
}

/// (1/2 pi i) times the evolution integral over the truncated contour, with
/// adaptive refinement to `tol` and the analytic tail bound attached.
inline QuadratureResult evolution_integral(const DenseOperator& B, const LaurentFunction& phi,
                                           const Vector& h, double t, const ContourSpec& spec,
                                           double tol, long budget = 100000) {
    if (t <= 0.0) throw PreconditionFailed("evolution_integral: t must be positive");
    QuadratureResult res = integrate_open_contour(evolution_integrand(B, phi, h, t), spec, tol, budget);
    res.tail_bound = spec.tail_bound(t, h.norm());
    return res;
}

/// Closed-form contribution the evolution integral picks up at the q-th
/// characteristic number: sum over the cluster's chains of e_n c_n(t), with
/// `base` the expansion coefficients of the integrated element.
inline Vector residue_at_pole(const JordanSystem& sys, const LaurentFunction& phi, int q,
                              double t, const Vector& base) {
    if (q < 0 || q >= sys.cluster_count())
        throw IndexError("residue_at_pole: cluster index out of range");
    const auto& cl = sys.cluster(q);
    const LaurentFunction psi = phi.reciprocal_variable();
    int kmax = 0;
    for (const auto& ch : cl.chains) kmax = std::max(kmax, ch.length - 1);
    const std::vector<cplx> hs = h_sequence(psi, kmax, cl.mu, t);
    const cplx damp = std::exp(-phi(cl.lambda) * t);
    Vector out = Vector::Zero(sys.dim());
    for (const auto& ch : cl.chains)
        for (int i = 0; i < ch.length; ++i) {
            cplx acc = 0.0;
            for (int m = 0; m + i < ch.length; ++m) acc += hs[m] * base(ch.start + i + m);
            out += (damp * acc) * sys.e(ch.start + i);
        }
    return out;
}

/// Ring boundaries including the inner radius: ring nu spans
/// (bounds[nu], bounds[nu+1]).
inline std::vector<double> ring_bounds(const ContourSpec& spec) {
    std::vector<double> b{spec.r};
    b.insert(b.end(), spec.annuli.begin(), spec.annuli.end());
    return b;
}

/// Sum of the residue contributions of all clusters whose characteristic
/// number lies in ring nu.  In verification mode the sum is checked against
/// direct quadrature over the ring-sector boundary.
inline Vector group_sum(const DenseOperator& B, const LaurentFunction& phi,
                        const JordanSystem& sys, const ContourSpec& spec, int nu,
                        const Vector& h, double t, bool verify = false,
                        double verify_tol = 1e-8) {
    const std::vector<double> bounds = ring_bounds(spec);
    if (nu < 0 || nu + 1 >= static_cast<int>(bounds.size()))
        throw IndexError("group_sum: annulus index out of range");
    const Vector base = expand_coefficients(h, sys);
    Vector acc = Vector::Zero(sys.dim());
    for (int q = 0; q < sys.cluster_count(); ++q) {
        const double rad = std::abs(sys.cluster(q).lambda);
        if (rad > bounds[nu] && rad <= bounds[nu + 1])
            acc += residue_at_pole(sys, phi, q, t, base);
    }
    if (verify) {
        const QuadratureResult direct = integrate_ring_boundary(
            evolution_integrand(B, phi, h, t), spec, bounds[nu], bounds[nu + 1],
            verify_tol / 10.0);
        const double diff = (direct.value - acc).norm();
        if (diff > verify_tol)
            throw PreconditionFailed("group_sum: residue sum and ring quadrature disagree by " +
                                     std::to_string(diff));
    }
    return acc;
}

struct TailNorms {
    std::vector<double> radii;   // ring boundaries R_nu
    std::vector<double> arc;     // J_nu: norm of the arc integral at R_nu
    std::vector<double> upper;   // J+_nu: upper ray segment [R_nu, R_nu+1]
    std::vector<double> lower;   // J-_nu: lower ray segment [R_nu, R_nu+1]
};

/// Norms of the arc integrals at each ring boundary and of the ray segments
/// between consecutive boundaries, for summability monitoring.
inline TailNorms tail_norms(const DenseOperator& B, const LaurentFunction& phi,
                            const ContourSpec& spec, const Vector& h, double t,
                            double tol = 1e-12, long budget = 400000) {
    if (t <= 0.0) throw PreconditionFailed("tail_norms: t must be positive");
    auto f = evolution_integrand(B, phi, h, t);
    detail::QuadWork work;
    work.budget = budget;
    TailNorms out;
    const double alpha = spec.ray_angle();
    const auto& bounds = spec.annuli;
    for (size_t nu = 0; nu < bounds.size(); ++nu) {
        out.radii.push_back(bounds[nu]);
        out.arc.push_back(detail::arc_integral(f, bounds[nu], -alpha, alpha, tol, work).norm());
        if (nu + 1 < bounds.size()) {
            out.upper.push_back(
                detail::ray_integral(f, alpha, bounds[nu], bounds[nu + 1], tol, work).norm());
            out.lower.push_back(
                detail::ray_integral(f, -alpha, bounds[nu], bounds[nu + 1], tol, work).norm());
        } else {
            out.upper.push_back(0.0);
            out.lower.push_back(0.0);
        }
    }
    return out;
}

}  // namespace lidskii
