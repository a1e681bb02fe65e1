#pragma once

#include "linalg.hpp"
#include "wick.hpp"

#include <map>
#include <vector>

namespace ncdirac {

inline constexpr Index kMaxFockDim = 4096;
inline constexpr Index kMaxRawLevelDim = 1024;

struct FockLevel {
    Index raw_dim = 0;
    WeightedSpace space;
    OrthoBasis onb;
    Index offset = 0;
};

/// Truncated q-deformed Fock space over C^h_dim with levels 0..level_cap.
/// Each level carries the q-inner product Gram matrix of the plain tensor basis
/// and an orthonormal basis of its non-null part; operators act on the direct
/// sum of the orthonormalized levels.
struct QFockSpace {
    double q = 0.0;
    int h_dim = 0;
    int level_cap = 0;
    Index total_dim = 0;
    std::vector<FockLevel> levels;

    Index level_offset(int k) const { return levels[static_cast<size_t>(k)].offset; }
    Index level_dim(int k) const { return levels[static_cast<size_t>(k)].onb.effective_dim; }

    /// Coefficients of a raw tensor-coordinate vector in the level's orthonormal basis.
    ComplexVector level_coords(int k, const ComplexVector& raw) const {
        const FockLevel& lv = levels[static_cast<size_t>(k)];
        return onb_coords(lv.space, lv.onb, raw);
    }
};

namespace detail {

inline const std::vector<std::pair<std::vector<int>, long long>>& perms_with_inversions(int n) {
    static std::map<int, std::vector<std::pair<std::vector<int>, long long>>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<std::pair<std::vector<int>, long long>> all;
    std::vector<int> p(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
    do {
        all.emplace_back(p, inversions(p));
    } while (std::next_permutation(p.begin(), p.end()));
    return cache.emplace(n, std::move(all)).first->second;
}

inline void decode_tuple(Index idx, int h, int n, std::vector<int>& out) {
    out.resize(static_cast<size_t>(n));
    for (int k = n - 1; k >= 0; --k) {
        out[static_cast<size_t>(k)] = static_cast<int>(idx % h);
        idx /= h;
    }
}

// Gram matrix of the level-n tensor basis under the q-inner product
// <e_s, e_t>_q = sum_sigma q^inv(sigma) prod_k delta(s_k, t_sigma(k)).
inline ComplexMatrix q_gram(double q, int h, int n) {
    Index dim = 1;
    for (int i = 0; i < n; ++i) dim *= h;
    ComplexMatrix g = ComplexMatrix::Zero(dim, dim);
    const auto& perms = perms_with_inversions(n);
    std::vector<int> s, t;
    for (Index a = 0; a < dim; ++a) {
        decode_tuple(a, h, n, s);
        for (Index b = 0; b < dim; ++b) {
            decode_tuple(b, h, n, t);
            double acc = 0.0;
            for (const auto& [perm, inv] : perms) {
                bool match = true;
                for (int k = 0; k < n && match; ++k)
                    match = (s[static_cast<size_t>(k)] ==
                             t[static_cast<size_t>(perm[static_cast<size_t>(k)])]);
                if (match) acc += ipow(q, static_cast<int>(inv));
            }
            g(a, b) = acc;
        }
    }
    return g;
}

}  // namespace detail

/// Build the truncated q-Fock space; level_cap < 0 selects max(h_dim, 4).
inline QFockSpace build_fock(double q, int h_dim, int level_cap = -1) {
    if (q < -1.0 || q > 1.0) throw std::invalid_argument("build_fock: q must lie in [-1, 1]");
    if (h_dim < 1) throw std::invalid_argument("build_fock: h_dim must be positive");
    if (level_cap < 0) level_cap = std::max(h_dim, 4);
    QFockSpace fk;
    fk.q = q;
    fk.h_dim = h_dim;
    fk.level_cap = level_cap;
    Index raw = 1;
    Index offset = 0;
    for (int n = 0; n <= level_cap; ++n) {
        if (n > 0) raw *= h_dim;
        if (raw > kMaxRawLevelDim)
            throw std::invalid_argument("build_fock: raw level dimension exceeds budget");
        FockLevel lv;
        lv.raw_dim = raw;
        lv.space = WeightedSpace{raw, detail::q_gram(q, h_dim, n)};
        lv.onb = orthonormalize(lv.space, 1e-10);
        lv.offset = offset;
        offset += lv.onb.effective_dim;
        fk.levels.push_back(std::move(lv));
    }
    fk.total_dim = offset;
    if (fk.total_dim > kMaxFockDim)
        throw std::invalid_argument("build_fock: total dimension exceeds budget");
    return fk;
}

/// Left creation operator l(e): level n -> n+1, zero from the top level.
inline ComplexMatrix creation(const QFockSpace& fk, const ComplexVector& e) {
    if (e.size() != fk.h_dim) throw std::invalid_argument("creation: vector dimension mismatch");
    ComplexMatrix c = ComplexMatrix::Zero(fk.total_dim, fk.total_dim);
    for (int n = 0; n + 1 <= fk.level_cap; ++n) {
        const FockLevel& lo = fk.levels[static_cast<size_t>(n)];
        const FockLevel& hi = fk.levels[static_cast<size_t>(n + 1)];
        if (lo.onb.effective_dim == 0 || hi.onb.effective_dim == 0) continue;
        // raw tensoring map: e tensor (tuple u) = sum_i e_i (i, u)
        ComplexMatrix raw = ComplexMatrix::Zero(hi.raw_dim, lo.raw_dim);
        for (Index u = 0; u < lo.raw_dim; ++u)
            for (int i = 0; i < fk.h_dim; ++i) raw(i * lo.raw_dim + u, u) = e[i];
        c.block(hi.offset, lo.offset, hi.onb.effective_dim, lo.onb.effective_dim) =
            hi.onb.basis.adjoint() * (hi.space.gram * (raw * lo.onb.basis));
    }
    return c;
}

inline ComplexMatrix annihilation(const QFockSpace& fk, const ComplexVector& e) {
    return creation(fk, e).adjoint();
}

/// q-Gaussian s_q(e) = l(e) + l(e)^*.
inline ComplexMatrix q_gaussian(const QFockSpace& fk, const ComplexVector& e) {
    const ComplexMatrix c = creation(fk, e);
    return c + c.adjoint();
}

/// Vacuum trace <Omega, x Omega>.
inline Complex vacuum_trace(const QFockSpace& fk, const ComplexMatrix& x) {
    if (x.rows() != fk.total_dim || x.cols() != fk.total_dim)
        throw std::invalid_argument("vacuum_trace: dimension mismatch");
    return x(0, 0);
}

/// Second quantization F_q(u) acting levelwise as u^(tensor n); u must be
/// unitary within 1e-10. Conjugation x -> F x F^* implements Gamma_q(u).
inline ComplexMatrix second_quantize(const QFockSpace& fk, const ComplexMatrix& u) {
    if (u.rows() != fk.h_dim || u.cols() != fk.h_dim)
        throw std::invalid_argument("second_quantize: dimension mismatch");
    if ((u.adjoint() * u - ComplexMatrix::Identity(fk.h_dim, fk.h_dim)).norm() >
        1e-10 * fk.h_dim)
        throw std::invalid_argument("second_quantize: matrix is not orthogonal/unitary");
    ComplexMatrix f = ComplexMatrix::Zero(fk.total_dim, fk.total_dim);
    ComplexMatrix upow = ComplexMatrix::Identity(1, 1);
    for (int n = 0; n <= fk.level_cap; ++n) {
        if (n > 0) upow = Eigen::kroneckerProduct(upow, u).eval();
        const FockLevel& lv = fk.levels[static_cast<size_t>(n)];
        if (lv.onb.effective_dim == 0) continue;
        f.block(lv.offset, lv.offset, lv.onb.effective_dim, lv.onb.effective_dim) =
            lv.onb.basis.adjoint() * (lv.space.gram * (upow * lv.onb.basis));
    }
    return f;
}

/// Orthogonal projection onto levels 0..k-1 (as a diagonal 0/1 matrix).
inline ComplexMatrix project_levels_below(const QFockSpace& fk, int k) {
    ComplexMatrix p = ComplexMatrix::Zero(fk.total_dim, fk.total_dim);
    for (int n = 0; n < k && n <= fk.level_cap; ++n) {
        const FockLevel& lv = fk.levels[static_cast<size_t>(n)];
        for (Index i = 0; i < lv.onb.effective_dim; ++i)
            p(lv.offset + i, lv.offset + i) = 1.0;
    }
    return p;
}

/// Residual of the q-relation l(f)^* l(e) - q l(e) l(f)^* = <f,e> Id,
/// restricted to levels strictly below the cap.
inline double q_relation_residual(const QFockSpace& fk, const ComplexVector& e,
                                  const ComplexVector& f) {
    const ComplexMatrix ce = creation(fk, e);
    const ComplexMatrix cf = creation(fk, f);
    const ComplexMatrix lhs = cf.adjoint() * ce - fk.q * ce * cf.adjoint();
    const ComplexMatrix rhs =
        f.dot(e) * ComplexMatrix::Identity(fk.total_dim, fk.total_dim);
    const ComplexMatrix p = project_levels_below(fk, fk.level_cap);
    return operator_norm((lhs - rhs) * p);
}

}  // namespace ncdirac
