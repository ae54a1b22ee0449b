#pragma once

// Laurent-type functions phi with a finite principal part, the sector
// admissibility test on the polynomial coefficients, and the operator action
// phi(W) f with W = B^{-1}.

#include "lidskii/matrixcore.hpp"

#include <map>
#include <numbers>
#include <optional>

namespace lidskii {

/// phi(z) = sum_{n=-Np}^{s} c_n z^n with tight degree (c_s != 0 when s > 0)
/// and finite principal depth. Zero coefficients are not stored.
class LaurentFunction {
public:
    LaurentFunction() = default;

    explicit LaurentFunction(std::map<int, cplx> coeffs) : c_(std::move(coeffs)) {
        for (auto it = c_.begin(); it != c_.end();) {
            if (it->second == cplx(0.0, 0.0)) it = c_.erase(it);
            else ++it;
        }
        if (!c_.empty()) {
            s_ = std::max(0, c_.rbegin()->first);
            np_ = std::max(0, -c_.begin()->first);
        }
    }

    /// Polynomial c_0 + c_1 z + ... from a dense coefficient list.
    static LaurentFunction polynomial(const std::vector<cplx>& coeffs) {
        std::map<int, cplx> m;
        for (int n = 0; n < static_cast<int>(coeffs.size()); ++n) m[n] = coeffs[n];
        return LaurentFunction(std::move(m));
    }

    static LaurentFunction monomial(int n, cplx c = 1.0) {
        return LaurentFunction({{n, c}});
    }

    int degree() const { return s_; }
    int principal_depth() const { return np_; }
    const std::map<int, cplx>& coeffs() const { return c_; }

    cplx coeff(int n) const {
        auto it = c_.find(n);
        return it == c_.end() ? cplx(0.0, 0.0) : it->second;
    }

    cplx operator()(cplx z) const {
        if (np_ > 0 && z == cplx(0.0, 0.0))
            throw DomainError("LaurentFunction: evaluation at z = 0 with nonempty principal part");
        cplx acc = 0.0;
        for (const auto& [n, c] : c_) acc += c * power(z, n);
        return acc;
    }

    /// Termwise derivative; index range shifts to [-Np-1, s-1].
    LaurentFunction derivative() const {
        std::map<int, cplx> m;
        for (const auto& [n, c] : c_)
            if (n != 0) m[n - 1] = c * static_cast<double>(n);
        return LaurentFunction(std::move(m));
    }

    /// Substitution z -> 1/z (coefficient index negation).
    LaurentFunction reciprocal_variable() const {
        std::map<int, cplx> m;
        for (const auto& [n, c] : c_) m[-n] = c;
        return LaurentFunction(std::move(m));
    }

    LaurentFunction operator+(const LaurentFunction& o) const {
        std::map<int, cplx> m = c_;
        for (const auto& [n, c] : o.c_) m[n] += c;
        return LaurentFunction(std::move(m));
    }

    LaurentFunction operator*(const LaurentFunction& o) const {
        std::map<int, cplx> m;
        for (const auto& [n, a] : c_)
            for (const auto& [k, b] : o.c_) m[n + k] += a * b;
        return LaurentFunction(std::move(m));
    }

    LaurentFunction scaled(cplx s) const {
        std::map<int, cplx> m;
        for (const auto& [n, c] : c_) m[n] = s * c;
        return LaurentFunction(std::move(m));
    }

    bool is_zero() const { return c_.empty(); }

private:
    static cplx power(cplx z, int n) {
        if (n == 0) return 1.0;
        cplx base = n > 0 ? z : cplx(1.0, 0.0) / z;
        int k = n > 0 ? n : -n;
        cplx acc = 1.0;
        while (k > 0) {
            if (k & 1) acc *= base;
            base *= base;
            k >>= 1;
        }
        return acc;
    }

    std::map<int, cplx> c_;
    int s_ = 0;
    int np_ = 0;
};

struct SectorConditionResult {
    bool ok = false;
    std::optional<int> witness;  // failing polynomial index when !ok
    double max_angle = 0.0;      // max over nonzero c_n, n >= 0, of |arg c_n| + n theta
};

/// Admissibility of phi on a sector of semi-angle theta: requires
/// max_{0 <= n <= s, c_n != 0} (|arg c_n| + n theta) < pi/2.
/// Principal-part coefficients carry no argument restriction.
inline SectorConditionResult validate_sector_condition(const LaurentFunction& phi, double theta) {
    if (theta < 0.0 || theta >= std::numbers::pi / 2.0)
        throw DomainError("validate_sector_condition: theta must lie in [0, pi/2)");
    SectorConditionResult res;
    res.ok = true;
    for (const auto& [n, c] : phi.coeffs()) {
        if (n < 0) continue;
        const double a = std::abs(std::arg(c)) + n * theta;
        if (a > res.max_angle) res.max_angle = a;
        if (a >= std::numbers::pi / 2.0 && res.ok) {
            res.ok = false;
            res.witness = n;
        }
    }
    return res;
}

/// phi(W) f with W = B^{-1}: positive powers through repeated solves with B,
/// negative powers through repeated multiplication by B, Horner accumulation
/// on both sides. Throws SingularOperator when B is numerically singular.
inline Vector apply_phi_W(const LaurentFunction& phi, const DenseOperator& B, const Vector& f) {
    if (f.size() != B.dim())
        throw DomainError("apply_phi_W: vector length does not match dim");
    if (B.smallest_singular_value() <= 1e-12 * B.spectral_norm())
        throw SingularOperator("apply_phi_W: B is numerically singular, W = B^{-1} undefined");
    Eigen::PartialPivLU<Matrix> lu(B.matrix());

    const int s = phi.degree();
    const int np = phi.principal_depth();
    Vector out = Vector::Zero(B.dim());

    // Polynomial part sum_{n=0}^{s} c_n W^n f.
    bool any_poly = false;
    for (const auto& [n, c] : phi.coeffs())
        if (n >= 0) { any_poly = true; break; }
    if (any_poly) {
        Vector acc = phi.coeff(s) * f;
        for (int n = s - 1; n >= 0; --n)
            acc = lu.solve(acc) + phi.coeff(n) * f;
        out += acc;
    }

    // Principal part sum_{n=1}^{Np} c_{-n} B^n f.
    if (np > 0) {
        Vector acc = phi.coeff(-np) * f;
        for (int n = np - 1; n >= 1; --n)
            acc = B.matrix() * acc + phi.coeff(-n) * f;
        out += B.matrix() * acc;
    }
    return out;
}

/// Dense matrix sum c_n (B^{-1})^n, formed explicitly. Shared by the
/// accretivity check and the matrix-exponential reference path.
inline Matrix phi_of_W_dense(const LaurentFunction& phi, const DenseOperator& B) {
    if (B.smallest_singular_value() <= 1e-12 * B.spectral_norm())
        throw SingularOperator("phi_of_W_dense: B is numerically singular");
    const int d = B.dim();
    const Matrix W = B.matrix().inverse();
    Matrix out = Matrix::Zero(d, d);
    for (const auto& [n, c] : phi.coeffs()) {
        Matrix p = Matrix::Identity(d, d);
        const Matrix& base = n >= 0 ? W : B.matrix();
        for (int k = 0; k < std::abs(n); ++k) p = p * base;
        out += c * p;
    }
    return out;
}

/// Fitted decay constant on the two contour rays arg = +-angle: the minimum of
/// Re phi(lambda) / |phi(lambda)| over log-spaced samples |lambda| in
/// [R0, span*R0]. A positive value certifies exponential decay of
/// exp(-t phi(lambda)) along the truncated rays.
inline double fit_ray_decay_constant(const LaurentFunction& phi, double angle, double R0,
                                     int samples = 1000, double span = 1e3) {
    if (R0 <= 0.0) throw DomainError("fit_ray_decay_constant: R0 must be positive");
    double cmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double rho = R0 * std::pow(span, static_cast<double>(i) / (samples - 1));
        for (double sgn : {1.0, -1.0}) {
            const cplx z = std::polar(rho, sgn * angle);
            const cplx v = phi(z);
            const double m = std::abs(v);
            if (m == 0.0) return 0.0;
            cmin = std::min(cmin, v.real() / m);
        }
    }
    return cmin;
}

}  // namespace lidskii
