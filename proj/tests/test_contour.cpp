#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace lidskii;

namespace {

DenseOperator reciprocal_diagonal(const std::vector<double>& char_radii) {
    Matrix d = Matrix::Zero(char_radii.size(), char_radii.size());
    for (size_t i = 0; i < char_radii.size(); ++i) d(i, i) = 1.0 / char_radii[i];
    return DenseOperator(std::move(d));
}

}  // namespace

TEST_CASE("contour around a scalar operator", "[contour]") {
    const DenseOperator B(Matrix::Identity(1, 1));
    const LaurentFunction phi = LaurentFunction::monomial(1);
    const ContourSpec spec = build_contour(B, phi, 0.05, 0.1, 0.1, 1e-10);
    REQUIRE(spec.r == Catch::Approx(0.5));
    REQUIRE(spec.pole_radii.size() == 1);
    // Exactly one ring carries the pole.
    const std::vector<double> bounds = ring_bounds(spec);
    int carrying = 0;
    for (size_t nu = 0; nu + 1 < bounds.size(); ++nu)
        if (bounds[nu] < 1.0 && 1.0 <= bounds[nu + 1]) ++carrying;
    REQUIRE(carrying == 1);
}

TEST_CASE("ring radii avoid pole radii after nudging", "[contour]") {
    const DenseOperator B = reciprocal_diagonal({1.0, 2.0, 4.0, 8.0});
    const ContourSpec spec =
        build_contour(B, LaurentFunction::monomial(1), 0.02, 0.1, 0.01, 1e-10);
    for (double R : spec.annuli)
        for (double p : spec.pole_radii)
            REQUIRE(std::abs(R - p) / R >= 0.05);
    // The pole-bearing region is crossed near the arithmetic midpoints.
    auto has_near = [&](double x) {
        for (double R : spec.annuli)
            if (std::abs(R - x) / x < 0.35) return true;
        return false;
    };
    REQUIRE(has_near(1.5));
    REQUIRE(has_near(3.0));
    REQUIRE(has_near(6.0));
    REQUIRE(has_near(12.0));
}

TEST_CASE("truncation radius meets the tail target", "[contour]") {
    const DenseOperator B = reciprocal_diagonal({1.0, 2.0});
    const ContourSpec spec =
        build_contour(B, LaurentFunction::monomial(1), 0.02, 0.1, 0.01, 1e-10);
    REQUIRE(spec.tail_bound(0.01, 1.0) <= 1e-10);
    REQUIRE(spec.decay_c > 0.0);
    REQUIRE(spec.annuli.back() == spec.R_max);
}

TEST_CASE("a dense pole band defeats the ring gap requirement", "[contour]") {
    std::vector<double> radii;
    for (int i = 0; i < 70; ++i) radii.push_back(0.5 * std::pow(1.02, i));
    const DenseOperator B = reciprocal_diagonal(radii);
    REQUIRE_THROWS_AS(build_contour(B, LaurentFunction::monomial(1), 0.02, 0.1, 0.1, 1e-8),
                      GapFailure);
}

TEST_CASE("orientation: the scalar evolution integral is the decaying exponential",
          "[contour]") {
    // Pins the traversal direction: the result must be +exp(-t/mu), not its
    // negative.
    const double mu = 2.0;
    const DenseOperator B(Matrix(mu * Matrix::Identity(1, 1)));
    const LaurentFunction phi = LaurentFunction::monomial(1);
    const ContourSpec spec = build_contour(B, phi, 0.02, 0.1, 0.1, 1e-12);
    Vector h(1);
    h(0) = 1.0;
    for (double t : {0.1, 1.0}) {
        const QuadratureResult res = evolution_integral(B, phi, h, t, spec, 1e-10);
        REQUIRE(std::abs(res.value(0) - std::exp(-t / mu)) <= 1e-9);
    }
}

TEST_CASE("zero element integrates to zero", "[contour]") {
    const DenseOperator B = reciprocal_diagonal({1.0, 2.0});
    const LaurentFunction phi = LaurentFunction::monomial(1);
    const ContourSpec spec = build_contour(B, phi, 0.02, 0.1, 0.1, 1e-10);
    const QuadratureResult res =
        evolution_integral(B, phi, Vector::Zero(2), 0.5, spec, 1e-10);
    REQUIRE(res.value.norm() == 0.0);
}

TEST_CASE("diagonal evolution integral equals the exponential sum", "[contour]") {
    const support::Fixture fx = support::random_fixture(4, 4100, 1);
    const LaurentFunction phi = LaurentFunction::monomial(1);
    const ContourSpec spec = build_contour(fx.B, phi, fx.theta, 0.1, 0.05, 1e-12);
    const Vector h = support::random_unit(4, 4101);
    for (double t : {0.05, 0.5}) {
        Vector expect = Vector::Zero(4);
        for (int q = 0; q < fx.sys.cluster_count(); ++q) {
            const auto& cl = fx.sys.cluster(q);
            const int n = cl.chains[0].start;
            expect += std::exp(-cl.lambda * t) * inner(h, fx.sys.g(n)) * fx.sys.e(n);
        }
        const QuadratureResult res = evolution_integral(fx.B, phi, h, t, spec, 1e-10);
        REQUIRE((res.value - expect).norm() <= 1e-8);
    }
}

TEST_CASE("evolution integral matches the matrix exponential on chain fixtures",
          "[contour]") {
    const support::Fixture fx = support::random_fixture(8, 4200, 3);
    for (const LaurentFunction& phi : support::phi_corpus()) {
        const ContourSpec spec = build_contour(fx.B, phi, fx.theta, 0.1, 0.01, 1e-12);
        const Vector h = support::random_unit(8, 4201);
        for (double t : {0.01, 0.1, 1.0}) {
            const QuadratureResult res = evolution_integral(fx.B, phi, h, t, spec, 1e-8);
            const Vector expect = oracle_solution(fx.B, phi, h, t);
            REQUIRE((res.value - expect).norm() <=
                    10.0 * std::max(1e-8, res.tail_bound) + 1e-9);
        }
    }
}

TEST_CASE("residue of a simple pole", "[contour]") {
    const support::Fixture fx = support::random_fixture(3, 4300, 1);
    const LaurentFunction phi = support::phi_corpus()[1];
    const Vector h = support::random_unit(3, 4301);
    const Vector base = expand_coefficients(h, fx.sys);
    for (int q = 0; q < fx.sys.cluster_count(); ++q) {
        const auto& cl = fx.sys.cluster(q);
        const int n = cl.chains[0].start;
        const Vector expect =
            std::exp(-phi(cl.lambda) * 0.3) * inner(h, fx.sys.g(n)) * fx.sys.e(n);
        const Vector got = residue_at_pole(fx.sys, phi, q, 0.3, base);
        REQUIRE((got - expect).norm() <= 1e-13);
    }
}

TEST_CASE("two-chain residue closed form and small-circle quadrature", "[contour]") {
    const cplx mu(1.4, 0.2);
    const cplx lam = 1.0 / mu;
    const support::Fixture fx = support::make_fixture({{mu, {2}}}, 4400, 0.5);
    const LaurentFunction phi = LaurentFunction::monomial(1);
    const Vector h = support::random_unit(2, 4401);
    const Vector base = expand_coefficients(h, fx.sys);
    const double t = 0.6;
    // Chain factor at the pole: H_1 = t lambda^2.
    const cplx damp = std::exp(-lam * t);
    const Vector expect = damp * ((base(0) + t * lam * lam * base(1)) * fx.sys.e(0) +
                                  base(1) * fx.sys.e(1));
    const Vector closed = residue_at_pole(fx.sys, phi, 0, t, base);
    REQUIRE((closed - expect).norm() <= 1e-13);
    const Vector quad = integrate_circle_cw(evolution_integrand(fx.B, phi, h, t), lam,
                                            0.01 * std::abs(lam), 1e-11, 2);
    REQUIRE((closed - quad).norm() <= 1e-9);
}

TEST_CASE("residues agree with small-circle quadrature across fixtures and times",
          "[contour]") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const support::Fixture fx = support::random_fixture(6 + 2 * (seed % 2), 4500 + seed, 3);
        const Vector h = support::random_unit(fx.B.dim(), 4600 + seed);
        const Vector base = expand_coefficients(h, fx.sys);
        for (const LaurentFunction& phi : support::phi_corpus())
            for (double t : {0.0, 0.1, 1.0})
                for (int q = 0; q < fx.sys.cluster_count(); ++q) {
                    const cplx lam = fx.sys.cluster(q).lambda;
                    double sep = std::abs(lam);
                    for (int p = 0; p < fx.sys.cluster_count(); ++p)
                        if (p != q) sep = std::min(sep, std::abs(lam - fx.sys.cluster(p).lambda));
                    const Vector closed = residue_at_pole(fx.sys, phi, q, t, base);
                    const Vector quad = integrate_circle_cw(
                        evolution_integrand(fx.B, phi, h, t), lam,
                        std::min(0.01 * std::abs(lam), 0.4 * sep), 1e-10, fx.B.dim());
                    REQUIRE((closed - quad).norm() <= 1e-8);
                }
    }
}

TEST_CASE("group sums reduce to residues and telescope to the full integral",
          "[contour]") {
    // Multi-scale characteristic numbers spread the poles over several rings.
    const std::vector<ChainSpec> specs{{cplx(1.0, 0.0), {1}},
                                       {cplx(0.5, 0.05), {2}},
                                       {cplx(0.25, -0.02), {1}},
                                       {cplx(0.125, 0.01), {2}}};
    const support::Fixture fx = support::make_fixture(specs, 4700, 0.05);
    const LaurentFunction phi = LaurentFunction::monomial(1);
    const ContourSpec spec = build_contour(fx.B, phi, fx.theta, 0.1, 0.05, 1e-12);
    const Vector h = support::random_unit(6, 4701);
    const Vector base = expand_coefficients(h, fx.sys);
    const std::vector<double> bounds = ring_bounds(spec);
    const double t = 0.2;

    SECTION("pole-free rings contribute nothing") {
        bool found_empty = false;
        for (int nu = 0; nu + 1 < static_cast<int>(bounds.size()); ++nu) {
            bool any = false;
            for (double p : spec.pole_radii)
                if (p > bounds[nu] && p <= bounds[nu + 1]) any = true;
            if (!any) {
                found_empty = true;
                REQUIRE(group_sum(fx.B, phi, fx.sys, spec, nu, h, t).norm() == 0.0);
            }
        }
        REQUIRE(found_empty);
    }
    SECTION("a ring with one cluster equals that residue") {
        for (int nu = 0; nu + 1 < static_cast<int>(bounds.size()); ++nu) {
            std::vector<int> inside;
            for (int q = 0; q < fx.sys.cluster_count(); ++q) {
                const double rad = std::abs(fx.sys.cluster(q).lambda);
                if (rad > bounds[nu] && rad <= bounds[nu + 1]) inside.push_back(q);
            }
            if (inside.size() == 1) {
                const Vector rs = residue_at_pole(fx.sys, phi, inside[0], t, base);
                const Vector gs = group_sum(fx.B, phi, fx.sys, spec, nu, h, t);
                REQUIRE((rs - gs).norm() <= 1e-13);
            }
        }
    }
    SECTION("ring quadrature verification accepts the residue sums") {
        for (int nu = 0; nu + 1 < static_cast<int>(bounds.size()) && nu < 4; ++nu)
            REQUIRE_NOTHROW(group_sum(fx.B, phi, fx.sys, spec, nu, h, t, true, 1e-8));
    }
    SECTION("telescoping against the full integral") {
        const QuadratureResult full = evolution_integral(fx.B, phi, h, t, spec, 1e-9);
        Vector total = Vector::Zero(6);
        for (int nu = 0; nu + 1 < static_cast<int>(bounds.size()); ++nu)
            total += group_sum(fx.B, phi, fx.sys, spec, nu, h, t);
        REQUIRE((total - full.value).norm() <= 1e-7);
    }
    SECTION("abel partial-sum increments equal the ring sums") {
        const AbelCoefficients co = abel_coefficients(base, fx.sys, phi, t);
        std::vector<int> grouping;
        int prev = 0;
        for (double bound : spec.annuli) {
            const int n = fx.sys.count_inside(bound);
            if (n > prev) {
                grouping.push_back(n);
                prev = n;
            }
        }
        Vector prev_sum = Vector::Zero(6);
        for (size_t gi = 0; gi < grouping.size(); ++gi) {
            const Vector part =
                grouped_partial_sum(fx.sys, co, grouping, static_cast<int>(gi));
            Vector rings = Vector::Zero(6);
            for (int nu = 0; nu + 1 < static_cast<int>(bounds.size()); ++nu)
                if (fx.sys.count_inside(bounds[nu + 1]) <= grouping[gi])
                    rings += group_sum(fx.B, phi, fx.sys, spec, nu, h, t);
            REQUIRE((part - rings).norm() <= 1e-8);
            prev_sum = part;
        }
    }
}

TEST_CASE("tail norms decay and vanish for the zero element", "[contour]") {
    // Characteristic numbers around 2..4 so the ray decay e^{-t R cos a} has
    // already crushed the first rings past the poles at t = 10.
    const std::vector<ChainSpec> specs{{cplx(0.45, 0.02), {2}},
                                       {cplx(0.3, -0.02), {1}},
                                       {cplx(0.26, 0.01), {1}}};
    const support::Fixture fx = support::make_fixture(specs, 4800, 0.05);
    const LaurentFunction phi = LaurentFunction::monomial(1);
    const ContourSpec spec = build_contour(fx.B, phi, fx.theta, 0.1, 0.05, 1e-12);
    SECTION("large t crushes the arcs past the poles") {
        const Vector h = support::random_unit(4, 4801);
        const TailNorms tn = tail_norms(fx.B, phi, spec, h, 10.0);
        int past = 0;
        for (size_t nu = 0; nu < tn.radii.size(); ++nu)
            if (tn.radii[nu] > spec.pole_radii.back()) {
                ++past;
                if (past >= 2) REQUIRE(tn.arc[nu] <= 1e-12);
            }
        REQUIRE(past >= 2);
        // Summability: the tail of the sequence is Cauchy far below tolerance.
        double sum_last = 0.0;
        for (size_t nu = tn.radii.size() / 2; nu < tn.radii.size(); ++nu)
            sum_last += tn.arc[nu] + tn.upper[nu] + tn.lower[nu];
        REQUIRE(sum_last <= 1e-10);
    }
    SECTION("zero element") {
        const TailNorms tn = tail_norms(fx.B, phi, spec, Vector::Zero(4), 1.0);
        for (double v : tn.arc) REQUIRE(v == 0.0);
        for (double v : tn.upper) REQUIRE(v == 0.0);
    }
}

TEST_CASE("doubling the truncation radius moves the integral within the tail bound",
          "[contour]") {
    const support::Fixture fx = support::random_fixture(5, 4900, 2);
    const LaurentFunction phi = LaurentFunction::monomial(1);
    const ContourSpec spec = build_contour(fx.B, phi, fx.theta, 0.1, 0.05, 1e-9);
    ContourSpec wider = spec;
    wider.R_max = 2.0 * spec.R_max;
    wider.annuli.push_back(wider.R_max);
    const Vector h = support::random_unit(5, 4901);
    const double t = 0.05;
    const Vector a = evolution_integral(fx.B, phi, h, t, spec, 1e-11).value;
    const Vector b = evolution_integral(fx.B, phi, h, t, wider, 1e-11).value;
    REQUIRE((a - b).norm() <= 2.0 * spec.tail_bound(t, h.norm()) + 1e-12);
}

TEST_CASE("the weighted integral applies the operator function", "[contour]") {
    // (1/2 pi i) \oint phi(z) e^{-phi(z) t} B (I - z B)^{-1} h dz
    // equals phi(W) applied to the evolution integral.
    const support::Fixture fx = support::random_fixture(5, 5000, 2);
    for (const LaurentFunction& phi :
         {support::phi_corpus()[0], support::phi_corpus()[3]}) {
        const ContourSpec spec = build_contour(fx.B, phi, fx.theta, 0.1, 0.1, 1e-12);
        const Vector h = support::random_unit(5, 5001);
        const double t = 0.4;
        const Vector u = evolution_integral(fx.B, phi, h, t, spec, 1e-10).value;
        auto weighted = [&](cplx z) -> Vector {
            return phi(z) * std::exp(-phi(z) * t) *
                   (fx.B.matrix() * resolvent_apply(fx.B, z, h));
        };
        const QuadratureResult res = integrate_open_contour(weighted, spec, 1e-10, 400000);
        REQUIRE((res.value - apply_phi_W(phi, fx.B, u)).norm() <= 1e-7);
    }
}

TEST_CASE("quadrature budget exhaustion raises QuadratureStall", "[contour]") {
    const support::Fixture fx = support::random_fixture(3, 5100, 1);
    const LaurentFunction phi = LaurentFunction::monomial(1);
    const ContourSpec spec = build_contour(fx.B, phi, fx.theta, 0.1, 0.05, 1e-12);
    const Vector h = support::random_unit(3, 5101);
    REQUIRE_THROWS_AS(evolution_integral(fx.B, phi, h, 0.05, spec, 1e-13, 64),
                      QuadratureStall);
}
