#pragma once

// Shared fixture builders for the test suites.

#include "lidskii/lidskii.hpp"
#include "oracles.hpp"

namespace support {

using namespace lidskii;

inline Matrix random_complex(int dim, std::uint64_t seed, double scale = 1.0) {
    GaussianSource src(seed);
    Matrix m(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) m(r, c) = scale * src.complex_gaussian();
    return m;
}

inline Matrix random_unitary(int dim, std::uint64_t seed) {
    return lidskii::detail::random_unitary(dim, seed);
}

/// Eigenvalues in a sector of semi-angle arg_span around the positive axis,
/// moduli in [mod_lo, mod_hi], pairwise separated.
inline std::vector<cplx> sector_eigenvalues(int count, std::uint64_t seed, double arg_span,
                                            double mod_lo = 1.5, double mod_hi = 2.0) {
    GaussianSource src(seed);
    return lidskii::detail::draw_eigenvalues(count, src, arg_span, mod_lo, mod_hi);
}

/// Widely separated eigenvalues (pairwise distance >= ~0.4) for root-system
/// extraction fixtures, where powered rank decisions need the clusters far
/// apart.  Deterministic pattern with a small seeded jitter.
inline std::vector<cplx> spread_eigenvalues(int count, std::uint64_t seed) {
    GaussianSource src(seed);
    static const double args[5] = {0.0, 0.28, -0.25, 0.14, -0.12};
    std::vector<cplx> mus;
    for (int i = 0; i < count; ++i)
        mus.push_back(std::polar(1.2 + 0.5 * i + 0.05 * src.uniform(),
                                 args[i % 5] + 0.02 * (src.uniform() - 0.5)));
    return mus;
}

struct Fixture {
    DenseOperator B;
    JordanSystem sys;
    double theta;  // analytic sector bound of the numerical range
};

/// Synthesized fixture: unitary-conjugated block Jordan with chain coupling
/// epsilon, so the numerical range sits in the union of eigenvalue disks of
/// radius epsilon.
inline Fixture make_fixture(const std::vector<ChainSpec>& specs, std::uint64_t seed,
                            double epsilon = 0.3) {
    std::vector<ChainSpec> sorted = specs;
    lidskii::detail::sort_specs_by_characteristic_radius(sorted);
    const Matrix basis = lidskii::detail::build_chain_basis(sorted, seed, epsilon);
    auto [B, sys] = synthesize_operator(sorted, DenseOperator(basis));
    double theta = 0.0, mod_min = std::numeric_limits<double>::infinity();
    bool has_chain = false;
    for (const auto& sp : sorted) {
        mod_min = std::min(mod_min, std::abs(sp.mu));
        for (int len : sp.chains) has_chain = has_chain || len > 1;
    }
    for (const auto& sp : sorted) {
        const double disk = has_chain ? epsilon : 0.0;
        theta = std::max(theta, std::abs(std::arg(sp.mu)) +
                                    std::asin(std::min(0.999, disk / std::abs(sp.mu))));
    }
    return {std::move(B), std::move(sys), theta + 0.02};
}

/// Mixed random fixture with chain lengths up to max_len, eigenvalue moduli
/// in [1.5, 2] and arguments within pi/10.
inline Fixture random_fixture(int dim, std::uint64_t seed, int max_len = 3,
                              double epsilon = 0.3) {
    GaussianSource src(seed ^ 0xf1f1f1);
    std::vector<int> lens;
    int left = dim;
    while (left > 0) {
        int len = 1 + static_cast<int>(src.uniform() * max_len);
        len = std::min(len, left);
        lens.push_back(len);
        left -= len;
    }
    const std::vector<cplx> mus = sector_eigenvalues(
        static_cast<int>(lens.size()), seed ^ 0xabc, std::numbers::pi / 10.0);
    std::vector<ChainSpec> specs;
    for (size_t i = 0; i < lens.size(); ++i) specs.push_back({mus[i], {lens[i]}});
    return make_fixture(specs, seed, epsilon);
}

inline Vector random_unit(int dim, std::uint64_t seed) {
    Vector v = GaussianSource(seed).complex_vector(dim);
    return v / v.norm();
}

/// The four admissible function shapes used across the evolution tests.
inline std::vector<LaurentFunction> phi_corpus() {
    return {
        LaurentFunction::monomial(1),                                    // z
        LaurentFunction({{2, 1.0}, {0, 1.0}}),                           // z^2 + 1
        LaurentFunction({{1, 1.0}, {-1, 1.0}}),                          // z + 1/z
        LaurentFunction({{1, 1.0}, {0, 2.0}, {-2, 3.0}}),                // 2 + z + 3/z^2
    };
}

}  // namespace support
