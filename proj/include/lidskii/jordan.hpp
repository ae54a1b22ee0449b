#pragma once

// Jordan root-vector systems for a dense invertible matrix B: synthesis of
// operators with prescribed chain structure, extraction of chains from nested
// null spaces, biorthogonal dual systems and coefficient expansion.
//
// Chain convention: within a chain the eigenvector comes first and
// B e_i = mu e_i + e_{i-1}.  The dual chain runs the other way:
// B* g_i = conj(mu) g_i + g_{i+1}, with the adjoint eigenvector last, so the
// full Gram matrix [(e_i, g_j)] is the identity.

#include "lidskii/matrixcore.hpp"

#include <algorithm>
#include <optional>

namespace lidskii {

/// One eigenvalue with its chain lengths (geometric multiplicity = number of
/// chains).  mu must be nonzero so that W = B^{-1} exists.
struct ChainSpec {
    cplx mu;
    std::vector<int> chains;
};

class JordanSystem {
public:
    struct ChainLoc {
        int start = 0;   // flat index of the chain's eigenvector
        int length = 0;  // k + 1
    };
    struct Cluster {
        cplx mu;
        cplx lambda;  // characteristic number 1/mu
        std::vector<ChainLoc> chains;
        int first = 0;  // flat index of the cluster's first vector
        int count = 0;  // total root vectors in the cluster
    };

    JordanSystem(std::vector<ChainSpec> specs, Matrix e_columns, Matrix g_columns)
        : specs_(std::move(specs)), E_(std::move(e_columns)), G_(std::move(g_columns)) {
        dim_ = static_cast<int>(E_.rows());
        int at = 0;
        for (const auto& sp : specs_) {
            Cluster cl;
            cl.mu = sp.mu;
            cl.lambda = cplx(1.0, 0.0) / sp.mu;
            cl.first = at;
            for (int len : sp.chains) {
                cl.chains.push_back({at, len});
                at += len;
            }
            cl.count = at - cl.first;
            clusters_.push_back(std::move(cl));
        }
        if (at != dim_ || E_.cols() != dim_ || G_.rows() != dim_ || G_.cols() != dim_)
            throw DomainError("JordanSystem: chain lengths do not tile the dimension");
    }

    int dim() const { return dim_; }
    const std::vector<ChainSpec>& specs() const { return specs_; }
    int cluster_count() const { return static_cast<int>(clusters_.size()); }
    const Cluster& cluster(int q) const { return clusters_.at(q); }

    const Matrix& root_vectors() const { return E_; }
    const Matrix& dual_vectors() const { return G_; }
    Vector e(int n) const { return E_.col(n); }
    Vector g(int n) const { return G_.col(n); }

    Vector reconstruct(const Vector& coeffs) const { return E_ * coeffs; }

    /// Flat count of root vectors in clusters with |lambda_q| < radius.
    int count_inside(double radius) const {
        int n = 0;
        for (const auto& cl : clusters_)
            if (std::abs(cl.lambda) < radius) n += cl.count;
        return n;
    }

private:
    int dim_ = 0;
    std::vector<ChainSpec> specs_;
    std::vector<Cluster> clusters_;
    Matrix E_;
    Matrix G_;
};

namespace detail {

inline void sort_specs_by_characteristic_radius(std::vector<ChainSpec>& specs) {
    std::stable_sort(specs.begin(), specs.end(), [](const ChainSpec& a, const ChainSpec& b) {
        return std::abs(1.0 / a.mu) < std::abs(1.0 / b.mu);
    });
}

inline Matrix block_jordan(const std::vector<ChainSpec>& specs, int dim) {
    Matrix j = Matrix::Zero(dim, dim);
    int at = 0;
    for (const auto& sp : specs) {
        for (int len : sp.chains) {
            for (int i = 0; i < len; ++i) {
                j(at + i, at + i) = sp.mu;
                if (i > 0) j(at + i - 1, at + i) = 1.0;
            }
            at += len;
        }
    }
    return j;
}

}  // namespace detail

/// Builds B = S J S^{-1} with J the block-Jordan matrix of `specs` and
/// S = basis.  Root vectors are the columns of S (taken in the order of the
/// specs after sorting by ascending |1/mu|); duals are the columns of S^{-*}.
inline std::pair<DenseOperator, JordanSystem> synthesize_operator(std::vector<ChainSpec> specs,
                                                                  const DenseOperator& basis) {
    int total = 0;
    for (const auto& sp : specs) {
        if (sp.mu == cplx(0.0, 0.0))
            throw DomainError("synthesize_operator: eigenvalues must be nonzero");
        for (int len : sp.chains) {
            if (len < 1) throw DomainError("synthesize_operator: chain lengths must be >= 1");
            total += len;
        }
    }
    if (total != basis.dim())
        throw DomainError("synthesize_operator: chain lengths must sum to basis dim");
    for (size_t a = 0; a < specs.size(); ++a)
        for (size_t b = a + 1; b < specs.size(); ++b)
            if (specs[a].mu == specs[b].mu)
                throw DomainError("synthesize_operator: eigenvalues must be pairwise distinct");
    if (basis.condition() > 1e8)
        throw IllConditionedBasis("synthesize_operator: basis condition " +
                                  std::to_string(basis.condition()) + " exceeds 1e8");

    detail::sort_specs_by_characteristic_radius(specs);
    const Matrix& s = basis.matrix();
    const Matrix j = detail::block_jordan(specs, basis.dim());
    const Matrix sinv = s.inverse();
    Matrix b = s * j * sinv;
    JordanSystem sys(specs, s, sinv.adjoint());
    return {DenseOperator(std::move(b), "synthesized"), std::move(sys)};
}

/// Expansion coefficients of f in the root-vector system: with duals indexed
/// so that (e_n, g_m) = delta_{nm}, the coefficient reduces to c_n = (f, g_n).
inline Vector expand_coefficients(const Vector& f, const JordanSystem& sys) {
    if (f.size() != sys.dim())
        throw DomainError("expand_coefficients: vector length does not match dim");
    return sys.dual_vectors().adjoint() * f;
}

namespace detail {

// Orthonormal basis of the numerical kernel of m (singular values <= tau).
// Also reports the singular values for ambiguity checks.
inline std::pair<Matrix, std::vector<double>> kernel_basis(const Matrix& m, double tau) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const auto& sig = svd.singularValues();
    int k = 0;
    for (Eigen::Index i = 0; i < sig.size(); ++i)
        if (sig(i) <= tau) ++k;
    Matrix ker(m.rows(), k);
    for (int i = 0; i < k; ++i) ker.col(i) = svd.matrixV().col(sig.size() - k + i);
    return {ker, {sig.data(), sig.data() + sig.size()}};
}

inline void check_rank_margin(const std::vector<double>& sig, double tau, const char* where) {
    for (double s : sig)
        if (s > tau / 10.0 && s < tau * 10.0)
            throw ChainAmbiguity(std::string(where) +
                                 ": singular value within a factor 10 of the rank threshold");
}

}  // namespace detail

/// Recovers the Jordan structure of a nonsingular B whose eigenvalue clusters
/// are separated by more than 10*tol.  Chains come from nested null spaces of
/// (B - mu I)^k with rank decisions at threshold tol*||B||; throws
/// ChainAmbiguity when those decisions are unstable.
inline JordanSystem extract_root_system(const DenseOperator& B, double tol = 1e-8) {
    const int d = B.dim();
    if (B.smallest_singular_value() <= 1e-12 * B.spectral_norm())
        throw SingularOperator("extract_root_system: B is numerically singular");
    Eigen::ComplexEigenSolver<Matrix> es(B.matrix());
    if (es.info() != Eigen::Success)
        throw ChainAmbiguity("extract_root_system: eigensolver failed");
    const Vector mu_all = es.eigenvalues();

    // Single-linkage clustering with radius tol * max(1, |mu|).
    std::vector<int> parent(d);
    for (int i = 0; i < d; ++i) parent[i] = i;
    auto find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (int i = 0; i < d; ++i)
        for (int k = i + 1; k < d; ++k) {
            const double radius =
                tol * std::max(1.0, std::max(std::abs(mu_all(i)), std::abs(mu_all(k))));
            if (std::abs(mu_all(i) - mu_all(k)) <= radius) parent[find(i)] = find(k);
        }
    std::vector<std::vector<int>> groups;
    {
        std::vector<int> root_of(d, -1);
        for (int i = 0; i < d; ++i) {
            int r = find(i);
            if (root_of[r] < 0) {
                root_of[r] = static_cast<int>(groups.size());
                groups.emplace_back();
            }
            groups[root_of[r]].push_back(i);
        }
    }

    struct Extracted {
        cplx mu;
        std::vector<Matrix> chains;  // each dim x len, eigenvector-first columns
    };
    std::vector<Extracted> found;

    const double tau = tol * B.spectral_norm();
    for (const auto& grp : groups) {
        cplx mu_hat = 0.0;
        for (int i : grp) mu_hat += mu_all(i);
        mu_hat /= static_cast<double>(grp.size());
        if (std::abs(mu_hat) <= 10.0 * tol)
            throw SingularOperator("extract_root_system: eigenvalue cluster at the origin");
        // Separation from the other clusters.
        for (int i = 0; i < d; ++i) {
            bool inside = std::find(grp.begin(), grp.end(), i) != grp.end();
            if (!inside && std::abs(mu_all(i) - mu_hat) <= 10.0 * tol * std::max(1.0, std::abs(mu_hat)))
                throw ChainAmbiguity("extract_root_system: eigenvalue clusters closer than 10*tol");
        }

        const int mult = static_cast<int>(grp.size());
        const Matrix m = B.matrix() - mu_hat * Matrix::Identity(d, d);

        std::vector<Matrix> kernels;  // kernels[j] = basis of ker(m^{j+1})
        std::vector<int> dims{0};
        Matrix mp = Matrix::Identity(d, d);
        while (true) {
            mp = mp * m;
            auto [ker, sig] = detail::kernel_basis(mp, tau);
            detail::check_rank_margin(sig, tau, "extract_root_system");
            kernels.push_back(ker);
            dims.push_back(static_cast<int>(ker.cols()));
            if (dims.back() == mult) break;
            if (dims.back() == *(dims.end() - 2) || static_cast<int>(kernels.size()) > d)
                throw ChainAmbiguity("extract_root_system: kernel growth stalled before the "
                                     "algebraic multiplicity");
        }
        const int p = static_cast<int>(kernels.size());

        // Number of chains of length exactly l: (d_l - d_{l-1}) - (d_{l+1} - d_l).
        std::vector<int> exactly(p + 2, 0);
        auto rises = [&](int l) {
            if (l < 1 || l > p) return 0;
            return dims[l] - dims[l - 1];
        };
        for (int l = 1; l <= p; ++l) exactly[l] = rises(l) - rises(l + 1);

        Extracted ex;
        ex.mu = mu_hat;
        std::vector<std::pair<Vector, int>> generators;  // (x, height)
        for (int level = p; level >= 1; --level) {
            if (exactly[level] == 0) continue;
            // Avoid the lower kernel and the level-`level` vectors of taller chains.
            std::vector<Vector> avoid;
            if (level >= 2)
                for (Eigen::Index c = 0; c < kernels[level - 2].cols(); ++c)
                    avoid.push_back(kernels[level - 2].col(c));
            for (const auto& [x, h] : generators) {
                Vector v = x;
                for (int k = 0; k < h - level; ++k) v = m * v;
                avoid.push_back(v);
            }
            Matrix cand = kernels[level - 1];
            if (!avoid.empty()) {
                Matrix a(d, static_cast<Eigen::Index>(avoid.size()));
                for (size_t c = 0; c < avoid.size(); ++c) a.col(c) = avoid[c];
                Eigen::HouseholderQR<Matrix> qr(a);
                Matrix q = qr.householderQ() * Matrix::Identity(d, a.cols());
                cand -= q * (q.adjoint() * cand);
            }
            Eigen::JacobiSVD<Matrix> svd(cand, Eigen::ComputeThinU);
            if (svd.singularValues()(exactly[level] - 1) < 1e-3)
                throw ChainAmbiguity("extract_root_system: generator selection degenerate");
            for (int g = 0; g < exactly[level]; ++g)
                generators.emplace_back(svd.matrixU().col(g), level);
        }

        // Chains in eigenvector-first order, whole-chain scaled so the
        // eigenvector has unit norm.
        for (const auto& [x, h] : generators) {
            Matrix chain(d, h);
            Vector v = x;
            for (int i = h - 1; i >= 0; --i) {
                chain.col(i) = v;
                if (i > 0) v = m * v;
            }
            chain /= chain.col(0).norm();
            ex.chains.push_back(std::move(chain));
        }
        std::stable_sort(ex.chains.begin(), ex.chains.end(),
                         [](const Matrix& a, const Matrix& b) { return a.cols() > b.cols(); });
        found.push_back(std::move(ex));
    }

    std::stable_sort(found.begin(), found.end(), [](const Extracted& a, const Extracted& b) {
        return std::abs(1.0 / a.mu) < std::abs(1.0 / b.mu);
    });

    std::vector<ChainSpec> specs;
    Matrix s(d, d);
    int at = 0;
    for (const auto& ex : found) {
        ChainSpec sp;
        sp.mu = ex.mu;
        for (const Matrix& chain : ex.chains) {
            sp.chains.push_back(static_cast<int>(chain.cols()));
            s.block(0, at, d, chain.cols()) = chain;
            at += static_cast<int>(chain.cols());
        }
        specs.push_back(std::move(sp));
    }
    if (at != d) throw ChainAmbiguity("extract_root_system: chains do not tile the space");

    Eigen::JacobiSVD<Matrix> ssvd(s);
    const double cond = ssvd.singularValues()(0) / ssvd.singularValues()(d - 1);
    if (!(cond < 1e12))
        throw ChainAmbiguity("extract_root_system: recovered root basis is numerically singular");
    const Matrix sinv = s.inverse();
    return JordanSystem(specs, s, sinv.adjoint());
}

}  // namespace lidskii
