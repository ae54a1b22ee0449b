#pragma once

// Counting function of the reciprocal singular values, convergence-exponent
// estimation, Schatten sums, and the resolvent-growth diagnostic functions
// beta(r) and gamma(|lambda|) on finite truncations.  All asymptotic
// statements are reported as finite-truncation evidence; nothing here
// extrapolates a limit.

#include "lidskii/matrixcore.hpp"

#include <optional>

namespace lidskii {

/// Decreasing positive s-numbers, optionally with a declared power law
/// s_i ~ i^{-1/rho0}.
struct SingularProfile {
    std::vector<double> values;
    std::optional<double> declared_law;

    static SingularProfile of(const DenseOperator& B) {
        SingularProfile p;
        p.values = B.singular_values();
        p.validate();
        return p;
    }

    static SingularProfile of_power(const DenseOperator& B, int power) {
        Matrix m = Matrix::Identity(B.dim(), B.dim());
        for (int i = 0; i < power; ++i) m = m * B.matrix();
        SingularProfile p;
        p.values = detail::singular_values_of(m);
        p.validate();
        return p;
    }

    void validate() const {
        if (values.empty()) throw DomainError("SingularProfile: empty");
        for (size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] > 0.0)) throw DomainError("SingularProfile: values must be positive");
            if (i > 0 && values[i] > values[i - 1] * (1.0 + 1e-12))
                throw DomainError("SingularProfile: values must be nonincreasing");
        }
    }
};

/// n(r): how many reciprocal s-numbers lie strictly inside |z| < r.
inline int counting_function(const SingularProfile& profile, double r) {
    if (!(r > 0.0)) throw DomainError("counting_function: r must be positive");
    int n = 0;
    for (double s : profile.values)
        if (1.0 / s < r) ++n;
    return n;
}

struct ExponentEstimate {
    double rho = 0.0;
    bool declared = false;
    std::string note;
};

/// Convergence-exponent surrogate: the declared law when present, otherwise a
/// least-squares fit of log s_i against log i over the tail half, flagged as
/// a finite-truncation estimate.  Profiles spanning fewer than two decades
/// are rejected as degenerate.
inline ExponentEstimate convergence_exponent_estimate(const SingularProfile& profile) {
    if (profile.declared_law)
        return {*profile.declared_law, true, "declared law"};
    const auto& v = profile.values;
    if (v.size() < 8)
        throw DomainError("convergence_exponent_estimate: need at least 8 values");
    if (v.front() / v.back() < 1e2)
        throw DegenerateProfile("convergence_exponent_estimate: values span fewer than 2 decades");
    const size_t from = v.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(v.size() - from);
    for (size_t i = from; i < v.size(); ++i) {
        const double x = std::log(static_cast<double>(i + 1));
        const double y = std::log(v[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (!(slope < 0.0))
        throw DegenerateProfile("convergence_exponent_estimate: nonnegative tail slope");
    return {-1.0 / slope, false, "finite-truncation estimate"};
}

namespace detail {

// Exact piecewise integrals of the step function n(t) against 1/t and 1/t^2:
//   int_0^r n(t)/t dt   = sum_{t_i < r} log(r / t_i)
//   int_r^inf n(t)/t^2 dt = sum_i 1 / max(r, t_i)
// where t_i = 1/s_i are the jump points.  Beyond the largest jump the upper
// integral saturates to n_max / r exactly.
inline double beta_of(const SingularProfile& profile, double varrho, int m, double r) {
    double lower = 0.0, upper = 0.0;
    for (double s : profile.values) {
        const double t = 1.0 / s;
        if (t < r) lower += std::log(r / t);
        upper += 1.0 / std::max(r, t);
    }
    return std::pow(r, -varrho / (m + 1)) * (lower + r * upper);
}

}  // namespace detail

struct Lemma2Table {
    double varrho = 0.0;
    int m = 0;
    double C = 1.0;
    std::vector<double> r;
    std::vector<double> beta;
    std::vector<double> lambda;
    std::vector<double> gamma;
};

/// beta(r) on the r-grid by exact integration of the step counting function
/// of the given power profile, then gamma(|lambda|) = beta(|lambda|^{m+1})
/// + C beta(|C lambda|^{m+1}) on the lambda-grid (defaults to the r-grid).
inline Lemma2Table lemma2_diagnostics(const SingularProfile& power_profile, double varrho,
                                      const std::vector<double>& r_grid, double C = 1.0,
                                      const std::vector<double>* lambda_grid = nullptr) {
    if (!(varrho > 0.0)) throw DomainError("lemma2_diagnostics: varrho must be positive");
    Lemma2Table tab;
    tab.varrho = varrho;
    tab.m = static_cast<int>(std::floor(varrho));
    tab.C = C;
    for (double r : r_grid) {
        if (!(r > 0.0)) throw DomainError("lemma2_diagnostics: grid radii must be positive");
        tab.r.push_back(r);
        tab.beta.push_back(detail::beta_of(power_profile, varrho, tab.m, r));
    }
    const std::vector<double>& lg = lambda_grid ? *lambda_grid : r_grid;
    for (double lam : lg) {
        tab.lambda.push_back(lam);
        tab.gamma.push_back(detail::beta_of(power_profile, varrho, tab.m, std::pow(lam, tab.m + 1)) +
                            C * detail::beta_of(power_profile, varrho, tab.m,
                                                std::pow(std::abs(C) * lam, tab.m + 1)));
    }
    return tab;
}

struct Condition24aReport {
    std::vector<double> r;
    std::vector<double> ratio;  // n(r^{m+1}) / r^rho
    int saturation_index = -1;  // first grid index where n reaches its maximum
    bool tail_nonincreasing = false;
};

/// Tabulates n(r^{m+1}) / r^rho with m = floor(rho).  Finite-truncation
/// evidence only: once n saturates at the dimension the ratio decays like
/// r^{-rho} exactly, so the report requires saturation within the grid and a
/// nonincreasing trace from that point on.
inline Condition24aReport condition_24a_probe(const SingularProfile& power_profile, double rho,
                                              const std::vector<double>& r_grid) {
    if (!(rho > 0.0)) throw DomainError("condition_24a_probe: rho must be positive");
    const int m = static_cast<int>(std::floor(rho));
    const int n_max = static_cast<int>(power_profile.values.size());
    Condition24aReport rep;
    for (double r : r_grid) {
        if (!(r > 0.0)) throw DomainError("condition_24a_probe: grid radii must be positive");
        const int n = counting_function(power_profile, std::pow(r, m + 1));
        if (n == n_max && rep.saturation_index < 0)
            rep.saturation_index = static_cast<int>(rep.r.size());
        rep.r.push_back(r);
        rep.ratio.push_back(n / std::pow(r, rho));
    }
    rep.tail_nonincreasing = rep.saturation_index >= 0;
    for (size_t i = rep.saturation_index >= 0 ? rep.saturation_index : 0;
         rep.tail_nonincreasing && i + 1 < rep.ratio.size(); ++i)
        if (rep.ratio[i + 1] > rep.ratio[i] * (1.0 + 1e-12)) rep.tail_nonincreasing = false;
    return rep;
}

/// Direct Schatten sum sum_i s_i^p.
inline double schatten_sum(const SingularProfile& profile, double p) {
    double acc = 0.0;
    for (double s : profile.values) acc += std::pow(s, p);
    return acc;
}

/// The same sum through the Stieltjes route p * int n(t) t^{-p-1} dt,
/// integrated exactly segment by segment between the jump points of n.
inline double schatten_sum_stieltjes(const SingularProfile& profile, double p) {
    std::vector<double> jumps;
    for (double s : profile.values) jumps.push_back(1.0 / s);
    std::sort(jumps.begin(), jumps.end());
    double acc = 0.0;
    for (size_t i = 0; i < jumps.size(); ++i) {
        const double n_here = static_cast<double>(i + 1);  // n(t) on [jumps[i], next)
        const double a = jumps[i];
        if (i + 1 < jumps.size()) {
            const double b = jumps[i + 1];
            acc += n_here * (std::pow(a, -p) - std::pow(b, -p));
        } else {
            acc += n_here * std::pow(a, -p);
        }
    }
    return acc;
}

}  // namespace lidskii
