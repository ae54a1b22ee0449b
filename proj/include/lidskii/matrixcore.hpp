#pragma once

// Dense complex linear-algebra substrate: resolvent solves, singular values,
// numerical-range sampling and sector membership checks for a square matrix
// standing in for a compact operator on a finite-dimensional space.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lidskii {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularResolvent : Error { using Error::Error; };
struct SectorViolation : Error { using Error::Error; };
struct IllConditionedBasis : Error { using Error::Error; };
struct ChainAmbiguity : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct SingularOperator : Error { using Error::Error; };
struct GapFailure : Error { using Error::Error; };
struct QuadratureStall : Error { using Error::Error; };
struct PreconditionFailed : Error { using Error::Error; };
struct ContractionViolation : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct DegenerateProfile : Error { using Error::Error; };

// Inner product convention: (x, y) = y^H x, linear in the first argument.
inline cplx inner(const Vector& x, const Vector& y) { return y.dot(x); }

/// Square complex matrix with its singular values cached at construction.
/// Entries must be finite and the dimension at least one.
class DenseOperator {
public:
    explicit DenseOperator(Matrix m, std::string label = {})
        : m_(std::move(m)), label_(std::move(label)) {
        if (m_.rows() < 1 || m_.rows() != m_.cols())
            throw DomainError("DenseOperator: matrix must be square with dim >= 1");
        if (!m_.allFinite())
            throw DomainError("DenseOperator: entries must be finite");
        Eigen::JacobiSVD<Matrix> svd(m_);
        svals_.assign(svd.singularValues().data(),
                      svd.singularValues().data() + svd.singularValues().size());
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    const std::string& label() const { return label_; }

    double spectral_norm() const { return svals_.front(); }
    double smallest_singular_value() const { return svals_.back(); }
    const std::vector<double>& singular_values() const { return svals_; }

    double condition() const {
        return svals_.back() > 0.0 ? svals_.front() / svals_.back()
                                   : std::numeric_limits<double>::infinity();
    }

private:
    Matrix m_;
    std::string label_;
    std::vector<double> svals_;
};

/// Deterministic Gaussian stream (Box-Muller over mt19937_64 bits), so samples
/// are reproducible across standard libraries.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : eng_(seed) {}

    double real() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    cplx complex_gaussian() {
        const double re = real();
        const double im = real();
        return cplx(re, im) / std::sqrt(2.0);
    }

    Vector complex_vector(int dim) {
        Vector v(dim);
        for (int i = 0; i < dim; ++i) v(i) = complex_gaussian();
        return v;
    }

    double uniform() {  // in [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    std::uint64_t bits() { return eng_(); }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

namespace detail {

inline std::vector<double> singular_values_of(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a);
    return {svd.singularValues().data(),
            svd.singularValues().data() + svd.singularValues().size()};
}

inline double spectral_norm_of(const Matrix& a) {
    return singular_values_of(a).front();
}

}  // namespace detail

/// Solves (I - lambda B) x = f through a full SVD of the shifted matrix.
/// Throws SingularResolvent when the smallest singular value of (I - lambda B)
/// falls at or below 1e-10 * ||B||, which signals lambda sits at or near a
/// characteristic number.
inline Vector resolvent_apply(const DenseOperator& B, cplx lambda, const Vector& f) {
    if (f.size() != B.dim())
        throw DomainError("resolvent_apply: vector length does not match dim");
    const Matrix a = Matrix::Identity(B.dim(), B.dim()) - lambda * B.matrix();
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sig = svd.singularValues();
    const double eps_sing = 1e-10 * B.spectral_norm();
    if (sig(sig.size() - 1) <= eps_sing)
        throw SingularResolvent("resolvent_apply: (I - lambda B) numerically singular at lambda = (" +
                                std::to_string(lambda.real()) + ", " + std::to_string(lambda.imag()) + ")");
    Vector y = svd.matrixU().adjoint() * f;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) /= sig(i);
    return svd.matrixV() * y;
}

/// `count` deterministic unit vectors drawn from normalized complex Gaussians.
inline std::vector<Vector> unit_vector_samples(int dim, int count, std::uint64_t seed) {
    if (count < 1) throw DomainError("unit_vector_samples: count must be positive");
    GaussianSource src(seed);
    std::vector<Vector> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        Vector v = src.complex_vector(dim);
        double n = v.norm();
        while (n == 0.0) {  // essentially unreachable; keeps the contract total
            v = src.complex_vector(dim);
            n = v.norm();
        }
        out.push_back(v / n);
    }
    return out;
}

/// Samples of the numerical range: values (Bf, f) over seeded unit vectors f.
inline std::vector<cplx> numerical_range_sample(const DenseOperator& B, int count,
                                                std::uint64_t seed) {
    std::vector<cplx> vals;
    vals.reserve(count);
    for (const Vector& f : unit_vector_samples(B.dim(), count, seed))
        vals.push_back(inner(B.matrix() * f, f));
    return vals;
}

/// Outcome of a sampled sector membership test with vertex at the origin.
/// A negative verdict is conclusive; a positive one is sampling evidence only.
struct SectorReport {
    cplx vertex{0.0, 0.0};
    double semi_angle = 0.0;
    double max_observed_arg = 0.0;
    int sample_count = 0;
    bool holds = false;
};

inline SectorReport sectorial_check(const DenseOperator& B, double theta, int count,
                                    std::uint64_t seed) {
    if (theta < 0.0 || theta >= std::numbers::pi)
        throw DomainError("sectorial_check: theta must lie in [0, pi)");
    SectorReport rep;
    rep.semi_angle = theta;
    rep.sample_count = count;
    for (const cplx& v : numerical_range_sample(B, count, seed)) {
        const double a = (v == cplx(0.0, 0.0)) ? 0.0 : std::abs(std::arg(v));
        rep.max_observed_arg = std::max(rep.max_observed_arg, a);
    }
    rep.holds = rep.max_observed_arg <= theta;
    return rep;
}

struct RayBoundReport {
    double ray_arg = 0.0;
    double theta = 0.0;
    double psi0 = 0.0;
    double bound = 0.0;  // 1 / sin(psi0)
    std::vector<double> radii;
    std::vector<double> norms;  // ||(I - lambda B)^{-1}|| at lambda = radius * e^{i ray_arg}
    double max_norm = 0.0;
};

/// Checks the resolvent bound ||(I - lambda B)^{-1}|| <= 1/sin(psi0) along the
/// ray arg lambda = ray_arg, with psi0 the angular distance of the ray to the
/// sector of semi-angle theta. The ray must avoid the sector and the real
/// axis. Throws SectorViolation when a violation exceeds eps_tol.
inline RayBoundReport ray_bound_check(const DenseOperator& B, double ray_arg, double theta,
                                      const std::vector<double>& radii,
                                      double eps_tol = 1e-9) {
    const double pi = std::numbers::pi;
    double a = std::remainder(ray_arg, 2.0 * pi);  // normalize to (-pi, pi]
    if (std::abs(a) <= theta)
        throw DomainError("ray_bound_check: ray lies inside the sector");
    if (a == 0.0 || std::abs(std::abs(a) - pi) < 1e-15)
        throw DomainError("ray_bound_check: ray must avoid the real axis");
    RayBoundReport rep;
    rep.ray_arg = ray_arg;
    rep.theta = theta;
    rep.psi0 = std::min(std::abs(a - theta), std::abs(a + theta));
    rep.bound = 1.0 / std::sin(std::min(rep.psi0, pi / 2.0));
    rep.radii = radii;
    const cplx dir = std::polar(1.0, a);
    for (double r : radii) {
        if (r <= 0.0) throw DomainError("ray_bound_check: radii must be positive");
        const Matrix m = Matrix::Identity(B.dim(), B.dim()) - (r * dir) * B.matrix();
        const double smin = detail::singular_values_of(m).back();
        const double n = (smin > 0.0) ? 1.0 / smin : std::numeric_limits<double>::infinity();
        rep.norms.push_back(n);
        rep.max_norm = std::max(rep.max_norm, n);
        if (n > rep.bound + eps_tol)
            throw SectorViolation("ray_bound_check: resolvent norm " + std::to_string(n) +
                                  " exceeds 1/sin(psi0) = " + std::to_string(rep.bound) +
                                  " at radius " + std::to_string(r));
    }
    return rep;
}

}  // namespace lidskii
