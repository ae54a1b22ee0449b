#pragma once

// Regularizing functions H_m(phi, z, t), the time-dependent chain
// coefficients c_n(t), grouped partial sums and the t -> +0 limit probe.

#include "lidskii/jordan.hpp"
#include "lidskii/opfunc.hpp"

namespace lidskii {

inline constexpr int kHFunctionMaxOrder = 32;

namespace detail {

// G_m from the recurrence G_0 = 1, G_{m+1} = G_m' - t phi'(z) G_m, kept as a
// polynomial in t whose coefficients are Laurent functions of z.  Then
// H_m = G_m / m! satisfies H_m = (e^{phi t} / m!) d^m/dz^m e^{-phi t}.
inline std::vector<std::vector<LaurentFunction>> h_tables(const LaurentFunction& phi, int m_max) {
    const LaurentFunction dphi = phi.derivative();
    std::vector<std::vector<LaurentFunction>> g(m_max + 1);
    g[0] = {LaurentFunction::monomial(0, 1.0)};
    for (int m = 0; m < m_max; ++m) {
        std::vector<LaurentFunction> next(m + 2);
        for (int j = 0; j <= m + 1; ++j) {
            LaurentFunction term;
            if (j <= m) term = g[m][j].derivative();
            if (j >= 1) term = term + dphi.scaled(-1.0) * g[m][j - 1];
            next[j] = std::move(term);
        }
        g[m + 1] = std::move(next);
    }
    return g;
}

inline cplx h_evaluate(const std::vector<LaurentFunction>& g_m, int m, cplx z, double t) {
    cplx acc = 0.0;
    double tpow = 1.0;
    double fact = 1.0;
    for (int k = 2; k <= m; ++k) fact *= k;
    for (size_t j = 0; j < g_m.size(); ++j) {
        if (!g_m[j].is_zero()) acc += tpow * g_m[j](z);
        tpow *= t;
    }
    return acc / fact;
}

}  // namespace detail

/// H_m(phi, z, t) = (e^{phi(z) t} / m!) d^m/dz^m e^{-phi(z) t}, evaluated
/// through the exact symbolic recurrence (no numerical differentiation).
/// H_0 = 1 for every phi, and H_m(phi, z, 0) = 0 for m >= 1.
inline cplx h_function(const LaurentFunction& phi, int m, cplx z, double t) {
    if (m < 0 || m > kHFunctionMaxOrder)
        throw DomainError("h_function: order m outside [0, 32]");
    if (phi.principal_depth() > 0 && z == cplx(0.0, 0.0))
        throw DomainError("h_function: z = 0 with nonempty principal part");
    if (t < 0.0) throw DomainError("h_function: t must be nonnegative");
    const auto tables = detail::h_tables(phi, m);
    return detail::h_evaluate(tables[m], m, z, t);
}

/// H_0 .. H_{m_max} in one pass over the recurrence.
inline std::vector<cplx> h_sequence(const LaurentFunction& phi, int m_max, cplx z, double t) {
    if (m_max < 0 || m_max > kHFunctionMaxOrder)
        throw DomainError("h_sequence: order outside [0, 32]");
    if (phi.principal_depth() > 0 && z == cplx(0.0, 0.0))
        throw DomainError("h_sequence: z = 0 with nonempty principal part");
    if (t < 0.0) throw DomainError("h_sequence: t must be nonnegative");
    const auto tables = detail::h_tables(phi, m_max);
    std::vector<cplx> out(m_max + 1);
    for (int m = 0; m <= m_max; ++m) out[m] = detail::h_evaluate(tables[m], m, z, t);
    return out;
}

/// Time-dependent coefficients of the regularized root-vector series.
struct AbelCoefficients {
    std::string sys_ref;
    double t = 0.0;
    Vector base;    // static coefficients of the expanded element
    Vector values;  // c_n(t)
};

/// c_{q_xi+i}(t) = e^{-phi(lambda_q) t} * sum_{m=0}^{k-i} H_m * c_{q_xi+i+m},
/// where the H factors are the Cauchy derivative coefficients picked up at the
/// resolvent pole lambda_q.  Those differentiate e^{-phi(1/zeta) t} in the
/// reciprocal variable at zeta = mu_q, which is the same recurrence applied to
/// the variable-inverted function.  At t = 0 the values reduce to the static
/// coefficients exactly.
inline AbelCoefficients abel_coefficients(const Vector& base, const JordanSystem& sys,
                                          const LaurentFunction& phi, double t) {
    if (base.size() != sys.dim())
        throw DomainError("abel_coefficients: base length does not match dim");
    if (t < 0.0) throw DomainError("abel_coefficients: t must be nonnegative");
    AbelCoefficients out;
    out.t = t;
    out.base = base;
    out.values = Vector::Zero(sys.dim());
    const LaurentFunction psi = phi.reciprocal_variable();
    for (int q = 0; q < sys.cluster_count(); ++q) {
        const auto& cl = sys.cluster(q);
        int kmax = 0;
        for (const auto& ch : cl.chains) kmax = std::max(kmax, ch.length - 1);
        const std::vector<cplx> hs = h_sequence(psi, kmax, cl.mu, t);
        const cplx damp = std::exp(-phi(cl.lambda) * t);
        for (const auto& ch : cl.chains)
            for (int i = 0; i < ch.length; ++i) {
                cplx acc = 0.0;
                for (int m = 0; m + i < ch.length; ++m) acc += hs[m] * base(ch.start + i + m);
                out.values(ch.start + i) = damp * acc;
            }
    }
    return out;
}

/// Partial sum over the first N_j root vectors for a strictly increasing
/// grouping of flat end indices.
inline Vector grouped_partial_sum(const JordanSystem& sys, const AbelCoefficients& coeffs,
                                  const std::vector<int>& grouping, int j) {
    if (j < 0 || j >= static_cast<int>(grouping.size()))
        throw IndexError("grouped_partial_sum: group index out of range");
    int prev = 0;
    for (int g : grouping) {
        if (g <= prev || g > sys.dim())
            throw IndexError("grouped_partial_sum: grouping must be strictly increasing and <= dim");
        prev = g;
    }
    const int n = grouping[j];
    return sys.root_vectors().leftCols(n) * coeffs.values.head(n);
}

struct LimitProbeReport {
    std::vector<double> ts;
    std::vector<double> errors;
    double final_error = 0.0;
    bool passed = false;
};

/// Evaluates || sum_n c_n(t) e_n - f || along a decreasing t-sequence and
/// requires the trace to decrease to eps_limit.  Throws NoConvergence when the
/// trace stalls above the target or fails to decrease.
inline LimitProbeReport abel_limit_probe(const JordanSystem& sys, const Vector& base,
                                         const LaurentFunction& phi, const Vector& f,
                                         const std::vector<double>& t_sequence,
                                         double eps_limit = 1e-6) {
    if (t_sequence.empty()) throw DomainError("abel_limit_probe: empty t sequence");
    LimitProbeReport rep;
    const double fnorm = f.norm();
    for (size_t i = 0; i < t_sequence.size(); ++i) {
        if (t_sequence[i] <= 0.0 || (i > 0 && t_sequence[i] >= t_sequence[i - 1]))
            throw DomainError("abel_limit_probe: t sequence must be positive and decreasing");
        const AbelCoefficients c = abel_coefficients(base, sys, phi, t_sequence[i]);
        rep.ts.push_back(t_sequence[i]);
        rep.errors.push_back((sys.reconstruct(c.values) - f).norm());
    }
    for (size_t i = 1; i < rep.errors.size(); ++i)
        if (rep.errors[i] > rep.errors[i - 1] * (1.0 + 1e-9) + 1e-15 * fnorm)
            throw NoConvergence("abel_limit_probe: error trace is not decreasing");
    rep.final_error = rep.errors.back();
    if (rep.final_error > eps_limit)
        throw NoConvergence("abel_limit_probe: final error " + std::to_string(rep.final_error) +
                            " above the limit tolerance");
    rep.passed = true;
    return rep;
}

}  // namespace lidskii
