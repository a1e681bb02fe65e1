#pragma once

// Finite groups carrying orthogonal 1-cocycles: conditionally negative
// lengths psi(s) = |b(s)|^2, the Fourier-multiplier semigroup
// lambda_s -> exp(-t psi(s)) lambda_s, its carre du champ, crossed products
// with the q-deformed algebra, group-side gradients, and gap functionals.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "schur.hpp"

namespace ncdirac {

inline constexpr Index kMaxGroupOrder = 256;
inline constexpr Index kMaxAssocCheckOrder = 64;
inline constexpr Index kMaxCrossedDim = 4096;

struct FiniteGroup {
    std::string name;
    Index order = 0;
    std::vector<std::vector<Index>> table;  // table[s][t] = s t
    std::vector<Index> inverse;
    Index identity = 0;

    Index mul(Index s, Index t) const { return table[s][t]; }
    Index inv(Index s) const { return inverse[s]; }
};

inline void validate_group(const FiniteGroup& g) {
    const Index n = g.order;
    if (n < 1 || n > kMaxGroupOrder) throw std::invalid_argument("group: order out of range");
    if (static_cast<Index>(g.table.size()) != n)
        throw std::invalid_argument("group: table row count");
    for (const auto& row : g.table) {
        if (static_cast<Index>(row.size()) != n)
            throw std::invalid_argument("group: table column count");
        for (Index v : row)
            if (v < 0 || v >= n) throw std::invalid_argument("group: table entry out of range");
    }
    // Latin square: every row and column is a permutation
    for (Index s = 0; s < n; ++s) {
        std::vector<bool> seen_row(n, false), seen_col(n, false);
        for (Index t = 0; t < n; ++t) {
            if (seen_row[g.table[s][t]]) throw std::invalid_argument("group: row not a permutation");
            if (seen_col[g.table[t][s]]) throw std::invalid_argument("group: column not a permutation");
            seen_row[g.table[s][t]] = true;
            seen_col[g.table[t][s]] = true;
        }
    }
    for (Index t = 0; t < n; ++t)
        if (g.table[g.identity][t] != t || g.table[t][g.identity] != t)
            throw std::invalid_argument("group: identity is not neutral");
    if (static_cast<Index>(g.inverse.size()) != n)
        throw std::invalid_argument("group: inverse list size");
    for (Index s = 0; s < n; ++s)
        if (g.table[s][g.inverse[s]] != g.identity || g.table[g.inverse[s]][s] != g.identity)
            throw std::invalid_argument("group: inverse fails");
    // associativity: full scan up to the budget, sampled beyond
    if (n <= kMaxAssocCheckOrder) {
        for (Index s = 0; s < n; ++s)
            for (Index t = 0; t < n; ++t)
                for (Index u = 0; u < n; ++u)
                    if (g.table[g.table[s][t]][u] != g.table[s][g.table[t][u]])
                        throw std::invalid_argument("group: associativity fails");
    } else {
        std::mt19937_64 rng(12345);
        std::uniform_int_distribution<Index> pick(0, n - 1);
        for (int k = 0; k < 20000; ++k) {
            Index s = pick(rng), t = pick(rng), u = pick(rng);
            if (g.table[g.table[s][t]][u] != g.table[s][g.table[t][u]])
                throw std::invalid_argument("group: associativity fails");
        }
    }
}

// Builds identity/inverses from a raw table and validates everything.
inline FiniteGroup finalize_group(std::vector<std::vector<Index>> table, std::string name) {
    FiniteGroup g;
    g.name = std::move(name);
    g.order = static_cast<Index>(table.size());
    g.table = std::move(table);
    if (g.order < 1) throw std::invalid_argument("group: empty table");
    Index id = -1;
    for (Index e = 0; e < g.order; ++e) {
        bool ok = true;
        for (Index t = 0; t < g.order && ok; ++t)
            ok = g.table[e][t] == t && g.table[t][e] == t;
        if (ok) { id = e; break; }
    }
    if (id < 0) throw std::invalid_argument("group: no identity element");
    g.identity = id;
    g.inverse.assign(g.order, -1);
    for (Index s = 0; s < g.order; ++s) {
        for (Index u = 0; u < g.order; ++u)
            if (g.table[s][u] == id && g.table[u][s] == id) { g.inverse[s] = u; break; }
        if (g.inverse[s] < 0) throw std::invalid_argument("group: missing inverse");
    }
    validate_group(g);
    return g;
}

inline FiniteGroup group_zn(Index n) {
    if (n < 1) throw std::invalid_argument("group_zn: n must be >= 1");
    std::vector<std::vector<Index>> table(n, std::vector<Index>(n));
    for (Index s = 0; s < n; ++s)
        for (Index t = 0; t < n; ++t) table[s][t] = (s + t) % n;
    return finalize_group(std::move(table), "Z" + std::to_string(n));
}

inline bool is_abelian(const FiniteGroup& g) {
    for (Index s = 0; s < g.order; ++s)
        for (Index t = 0; t < s; ++t)
            if (g.table[s][t] != g.table[t][s]) return false;
    return true;
}

inline nlohmann::json group_to_json(const FiniteGroup& g) {
    return {{"order", g.order}, {"table", g.table}};
}

inline FiniteGroup group_from_json(const nlohmann::json& j, std::string name = "group") {
    const Index order = j.at("order").get<Index>();
    auto table = j.at("table").get<std::vector<std::vector<Index>>>();
    if (static_cast<Index>(table.size()) != order)
        throw std::invalid_argument("group json: order/table mismatch");
    return finalize_group(std::move(table), std::move(name));
}

struct GroupCocycleSystem {
    std::string name;
    FiniteGroup group;
    int h_dim = 0;
    std::vector<RealMatrix> pi;  // orthogonal action on H, one per element
    std::vector<RealVector> b;   // cocycle vectors
    RealVector psi;              // psi[s] = |b(s)|^2
};

inline void validate_cocycle(const GroupCocycleSystem& sys, double tol = 1e-10) {
    const Index n = sys.group.order;
    if (static_cast<Index>(sys.pi.size()) != n || static_cast<Index>(sys.b.size()) != n ||
        sys.psi.size() != n)
        throw std::invalid_argument("cocycle: per-element data size mismatch");
    const Index h = sys.h_dim;
    double scale = 1.0;
    for (const auto& v : sys.b) scale = std::max(scale, v.norm());
    for (Index s = 0; s < n; ++s) {
        if (sys.pi[s].rows() != h || sys.pi[s].cols() != h || sys.b[s].size() != h)
            throw std::invalid_argument("cocycle: dimension mismatch");
        if ((sys.pi[s] * sys.pi[s].transpose() - RealMatrix::Identity(h, h)).norm() > tol * h)
            throw std::invalid_argument("cocycle: pi not orthogonal");
    }
    if (sys.b[sys.group.identity].norm() > tol * scale)
        throw std::invalid_argument("cocycle: b(e) != 0");
    for (Index s = 0; s < n; ++s) {
        if (std::abs(sys.psi[s] - sys.b[s].squaredNorm()) > tol * std::max(1.0, scale * scale))
            throw std::invalid_argument("cocycle: psi inconsistent with |b|^2");
        for (Index t = 0; t < n; ++t) {
            if ((sys.pi[s] * sys.pi[t] - sys.pi[sys.group.mul(s, t)]).norm() > tol * h)
                throw std::invalid_argument("cocycle: pi is not a homomorphism");
            RealVector law = sys.b[sys.group.mul(s, t)] - sys.b[s] - sys.pi[s] * sys.b[t];
            if (law.norm() > tol * std::max(1.0, scale))
                throw std::invalid_argument("cocycle: 1-cocycle law fails");
        }
    }
}

inline GroupCocycleSystem build_cocycle_explicit(FiniteGroup group, std::vector<RealMatrix> pi,
                                                 std::vector<RealVector> b, std::string name) {
    GroupCocycleSystem sys;
    sys.name = std::move(name);
    sys.group = std::move(group);
    sys.h_dim = pi.empty() ? 0 : static_cast<int>(pi.front().rows());
    sys.pi = std::move(pi);
    sys.b = std::move(b);
    sys.psi.resize(sys.group.order);
    for (Index s = 0; s < sys.group.order; ++s) sys.psi[s] = sys.b[s].squaredNorm();
    validate_cocycle(sys);
    return sys;
}

// Left-regular representation on l2(G) with b(s) = pi_s(xi) - xi.
inline GroupCocycleSystem build_cocycle_regular(const FiniteGroup& group, const RealVector& xi,
                                                std::string name = "") {
    const Index n = group.order;
    if (xi.size() != n) throw std::invalid_argument("regular cocycle: xi must live on l2(G)");
    if (xi.norm() == 0.0) throw std::invalid_argument("regular cocycle: xi = 0 has fixed points");
    std::vector<RealMatrix> pi(n);
    std::vector<RealVector> b(n);
    for (Index s = 0; s < n; ++s) {
        RealMatrix p = RealMatrix::Zero(n, n);
        for (Index u = 0; u < n; ++u) p(group.mul(s, u), u) = 1.0;
        pi[s] = std::move(p);
        b[s] = pi[s] * xi - xi;
        if (s != group.identity && b[s].norm() <= 1e-12 * xi.norm())
            throw std::invalid_argument("regular cocycle: xi is fixed by element " +
                                        std::to_string(s));
    }
    if (name.empty()) name = "regular:" + group.name;
    return build_cocycle_explicit(group, std::move(pi), std::move(b), std::move(name));
}

namespace detail {

inline RealMatrix rotation2(double theta) {
    RealMatrix r(2, 2);
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

}  // namespace detail

// Z_N cocycle on C^2 (realified to R^4): b(k) = (e^{2 pi i p k/N}, e^{2 pi i q k/N}) - (1,1).
inline GroupCocycleSystem build_cocycle_donut(Index n, long p_num, long q_num) {
    if (n < 2) throw std::invalid_argument("donut cocycle: N must be >= 2");
    FiniteGroup group = group_zn(n);
    std::vector<RealMatrix> pi(n);
    std::vector<RealVector> b(n);
    const double tau = 2.0 * std::numbers::pi / static_cast<double>(n);
    for (Index k = 0; k < n; ++k) {
        const double tp = tau * static_cast<double>(p_num) * k;
        const double tq = tau * static_cast<double>(q_num) * k;
        RealMatrix rot = RealMatrix::Zero(4, 4);
        rot.block(0, 0, 2, 2) = detail::rotation2(tp);
        rot.block(2, 2, 2, 2) = detail::rotation2(tq);
        pi[k] = std::move(rot);
        RealVector v(4);
        v << std::cos(tp) - 1.0, std::sin(tp), std::cos(tq) - 1.0, std::sin(tq);
        b[k] = std::move(v);
    }
    std::string name = "donut:" + std::to_string(n) + ":" + std::to_string(p_num) + ":" +
                       std::to_string(q_num);
    return build_cocycle_explicit(std::move(group), std::move(pi), std::move(b), std::move(name));
}

// Levy construction on a cyclic group: weights mu_j >= 0 on the nontrivial
// characters chi_j (j = 1..n-1), symmetric under conjugation mu_j = mu_{n-j}.
// H = weighted character space realified; b(s)(chi) = 1 - chi(s).
inline GroupCocycleSystem build_cocycle_levy(const FiniteGroup& group, const RealVector& weights,
                                             std::string name = "") {
    const Index n = group.order;
    if (!is_abelian(group)) throw std::invalid_argument("levy cocycle: group must be abelian");
    for (Index s = 0; s < n; ++s)
        for (Index t = 0; t < n; ++t)
            if (group.table[s][t] != (s + t) % n)
                throw std::invalid_argument("levy cocycle: implemented for cyclic tables");
    if (weights.size() != n - 1)
        throw std::invalid_argument("levy cocycle: need one weight per nontrivial character");
    for (Index j = 1; j < n; ++j) {
        if (weights[j - 1] < -1e-12)
            throw std::invalid_argument("levy cocycle: weights must be nonnegative");
        if (std::abs(weights[j - 1] - weights[n - j - 1]) >
            1e-12 * std::max(1.0, weights.cwiseAbs().maxCoeff()))
            throw std::invalid_argument("levy cocycle: weights must be conjugation-symmetric");
    }
    std::vector<Index> support;
    for (Index j = 1; j < n; ++j)
        if (weights[j - 1] > 1e-12) support.push_back(j);
    const int h = support.empty() ? 1 : static_cast<int>(2 * support.size());
    const double tau = 2.0 * std::numbers::pi / static_cast<double>(n);
    std::vector<RealMatrix> pi(n);
    std::vector<RealVector> b(n);
    for (Index s = 0; s < n; ++s) {
        RealMatrix rot = RealMatrix::Identity(h, h);
        RealVector v = RealVector::Zero(h);
        for (size_t m = 0; m < support.size(); ++m) {
            const Index j = support[m];
            const double theta = tau * static_cast<double>(j) * s;
            rot.block(2 * m, 2 * m, 2, 2) = detail::rotation2(theta);
            const double scale = std::sqrt(weights[j - 1] / 2.0);
            v[2 * m] = scale * (1.0 - std::cos(theta));
            v[2 * m + 1] = scale * (-std::sin(theta));
        }
        pi[s] = std::move(rot);
        b[s] = std::move(v);
    }
    if (name.empty()) name = "levy:" + group.name;
    auto sys = build_cocycle_explicit(group, std::move(pi), std::move(b), std::move(name));
    // the representation formula psi(s) = sum_chi (1 - Re chi(s)) mu(chi)
    for (Index s = 0; s < n; ++s) {
        double want = 0.0;
        for (Index j = 1; j < n; ++j)
            want += weights[j - 1] * (1.0 - std::cos(tau * static_cast<double>(j) * s));
        if (std::abs(sys.psi[s] - want) > 1e-12 * std::max(1.0, want))
            throw std::runtime_error("levy cocycle: psi does not match its Levy measure");
    }
    return sys;
}

// Inverts psi(s) = sum_j mu_j (1 - cos(2 pi j s / n)) on Z_n. Requires
// psi(0) = 0 and psi(s) = psi(n-s); negativity of some mu_j certifies that
// psi is not conditionally negative definite.
inline RealVector psi_to_levy_weights(const RealVector& psi) {
    const Index n = psi.size();
    if (n < 2) throw std::invalid_argument("psi_to_levy_weights: need n >= 2");
    const double scale = std::max(1.0, psi.cwiseAbs().maxCoeff());
    if (std::abs(psi[0]) > 1e-10 * scale)
        throw std::invalid_argument("psi_to_levy_weights: psi(0) must vanish");
    for (Index s = 1; s < n; ++s)
        if (std::abs(psi[s] - psi[n - s]) > 1e-10 * scale)
            throw std::invalid_argument("psi_to_levy_weights: psi must be inverse-symmetric");
    const double tau = 2.0 * std::numbers::pi / static_cast<double>(n);
    RealVector mu(n - 1);
    for (Index j = 1; j < n; ++j) {
        double acc = 0.0;
        for (Index s = 0; s < n; ++s)
            acc += psi[s] * std::cos(tau * static_cast<double>(j) * s);
        mu[j - 1] = -acc / static_cast<double>(n);
        if (std::abs(mu[j - 1]) <= 1e-12 * scale) mu[j - 1] = 0.0;
    }
    return mu;
}

// Word-length system on Z_n via the Levy inversion of psi(k) = min(k, n-k).
inline GroupCocycleSystem make_word_length_system(Index n) {
    if (n < 2) throw std::invalid_argument("word length: n must be >= 2");
    RealVector psi(n);
    for (Index k = 0; k < n; ++k) psi[k] = static_cast<double>(std::min(k, n - k));
    RealVector mu = psi_to_levy_weights(psi);
    for (Index j = 0; j < mu.size(); ++j)
        if (mu[j] < 0.0)
            throw std::runtime_error("word length: inversion produced a negative weight");
    auto sys = build_cocycle_levy(group_zn(n), mu, "Z" + std::to_string(n) + ":word");
    for (Index k = 0; k < n; ++k)
        if (std::abs(sys.psi[k] - psi[k]) > 1e-10)
            throw std::runtime_error("word length: psi mismatch after Levy inversion");
    return sys;
}

// Conditional negative definiteness: -[psi(s_j^{-1} s_i)] restricted to the
// zero-sum subspace must be PSD.
inline CheckReport cnd_check(const FiniteGroup& group, const RealVector& psi,
                             double tol = 1e-9, const std::string& label = "") {
    const Index n = group.order;
    if (psi.size() != n) throw std::invalid_argument("cnd_check: psi size mismatch");
    ComplexMatrix k(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) k(i, j) = psi[group.mul(group.inv(j), i)];
    ComplexMatrix p = ComplexMatrix::Zero(n, std::max<Index>(n - 1, 1));
    for (Index c = 1; c < n; ++c) {
        p(c, c - 1) = 1.0;
        p(0, c - 1) = -1.0;
    }
    ComplexMatrix projected = hermitian_part(ComplexMatrix(p.adjoint() * k * p));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(projected);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    const double residual = std::max(0.0, es.eigenvalues().maxCoeff()) / scale;
    return make_report("cnd", residual, tol, {{"system", label}, {"order", n}});
}

inline CheckReport cnd_check(const GroupCocycleSystem& sys, double tol = 1e-9) {
    return cnd_check(sys.group, sys.psi, tol, sys.name);
}

// Herz-Schur positivity witness: [exp(-t psi(s^{-1} r))] PSD for sampled t.
inline CheckReport herz_schur_witness(const FiniteGroup& group, const RealVector& psi,
                                      const std::vector<double>& t_list = {0.1, 1.0, 10.0},
                                      double tol = 1e-9, const std::string& label = "") {
    const Index n = group.order;
    if (psi.size() != n) throw std::invalid_argument("herz_schur_witness: psi size mismatch");
    double worst = 0.0;
    for (double t : t_list) {
        ComplexMatrix w(n, n);
        for (Index s = 0; s < n; ++s)
            for (Index r = 0; r < n; ++r)
                w(s, r) = std::exp(-t * psi[group.mul(group.inv(s), r)]);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(w));
        const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
        worst = std::max(worst, std::max(0.0, -es.eigenvalues().minCoeff()) / scale);
    }
    return make_report("herz_schur_psd", worst, tol, {{"system", label}, {"t_list", t_list}});
}

inline CheckReport herz_schur_witness(const GroupCocycleSystem& sys,
                                      const std::vector<double>& t_list = {0.1, 1.0, 10.0},
                                      double tol = 1e-9) {
    return herz_schur_witness(sys.group, sys.psi, t_list, tol, sys.name);
}

// Group algebra arithmetic on coefficient vectors x = sum_s x_s lambda_s.
inline ComplexVector group_adjoint(const FiniteGroup& g, const ComplexVector& x) {
    ComplexVector out(g.order);
    for (Index s = 0; s < g.order; ++s) out[g.inv(s)] = std::conj(x[s]);
    return out;
}

inline ComplexVector group_convolve(const FiniteGroup& g, const ComplexVector& x,
                                    const ComplexVector& y) {
    ComplexVector out = ComplexVector::Zero(g.order);
    for (Index s = 0; s < g.order; ++s) {
        if (x[s] == Complex(0.0)) continue;
        for (Index t = 0; t < g.order; ++t) out[g.mul(s, t)] += x[s] * y[t];
    }
    return out;
}

inline ComplexVector apply_group_generator(const GroupCocycleSystem& sys,
                                           const ComplexVector& x) {
    if (x.size() != sys.group.order)
        throw std::invalid_argument("apply_group_generator: dimension mismatch");
    return sys.psi.cast<Complex>().asDiagonal() * x;
}

inline ComplexVector apply_group_semigroup(const GroupCocycleSystem& sys, double t,
                                           const ComplexVector& x) {
    if (t < 0) throw std::invalid_argument("apply_group_semigroup: t must be >= 0");
    if (x.size() != sys.group.order)
        throw std::invalid_argument("apply_group_semigroup: dimension mismatch");
    return (-t * sys.psi.array()).exp().matrix().cast<Complex>().asDiagonal() * x;
}

// Gamma from the generator: (A(x*) y + x* A(y) - A(x* y)) / 2 in the group algebra.
inline ComplexVector group_carre_du_champ(const GroupCocycleSystem& sys, const ComplexVector& x,
                                          const ComplexVector& y) {
    const auto& g = sys.group;
    ComplexVector xs = group_adjoint(g, x);
    ComplexVector term = group_convolve(g, apply_group_generator(sys, xs), y) +
                         group_convolve(g, xs, apply_group_generator(sys, y)) -
                         apply_group_generator(sys, group_convolve(g, xs, y));
    return 0.5 * term;
}

// Gamma from the cocycle pairing: Gamma(lambda_s, lambda_t) =
// -<b(s^{-1}), pi_{s^{-1}} b(t)> lambda_{s^{-1} t}, extended sesquilinearly.
inline ComplexVector group_carre_cocycle(const GroupCocycleSystem& sys, const ComplexVector& x,
                                         const ComplexVector& y) {
    const auto& g = sys.group;
    ComplexVector out = ComplexVector::Zero(g.order);
    for (Index s = 0; s < g.order; ++s) {
        if (x[s] == Complex(0.0)) continue;
        const Index si = g.inv(s);
        for (Index t = 0; t < g.order; ++t) {
            if (y[t] == Complex(0.0)) continue;
            const double coeff = -sys.b[si].dot(sys.pi[si] * sys.b[t]);
            out[g.mul(si, t)] += std::conj(x[s]) * y[t] * coeff;
        }
    }
    return out;
}

// Crossed product operators on l2(G) (x) Fock (group factor first).

inline std::vector<ComplexMatrix> second_quantized_actions(const GroupCocycleSystem& sys,
                                                           const QFockSpace& fk) {
    if (fk.h_dim != sys.h_dim)
        throw std::invalid_argument("crossed product: Fock space dimension mismatch");
    std::vector<ComplexMatrix> out;
    out.reserve(sys.group.order);
    for (Index t = 0; t < sys.group.order; ++t)
        out.push_back(second_quantize(fk, sys.pi[t].cast<Complex>()));
    return out;
}

namespace detail {

// Writes the blocks of x (crossed) lambda_s into z: block (g, g') nonzero iff
// g = s g', equal to alpha_{g^{-1}}(x) = F_g^* x F_g.
inline void add_crossed_blocks(const FiniteGroup& group,
                               const std::vector<ComplexMatrix>& actions,
                               const ComplexMatrix& x, Index s, Complex coeff,
                               ComplexMatrix& z) {
    const Index f = x.rows();
    for (Index gp = 0; gp < group.order; ++gp) {
        const Index g = group.mul(s, gp);
        z.block(g * f, gp * f, f, f) += coeff * (actions[g].adjoint() * x * actions[g]);
    }
}

}  // namespace detail

inline ComplexMatrix crossed_product_embed(const GroupCocycleSystem& sys, const QFockSpace& fk,
                                           const ComplexMatrix& x, Index s) {
    const Index n = sys.group.order;
    const Index f = fk.total_dim;
    if (fk.h_dim != sys.h_dim)
        throw std::invalid_argument("crossed_product_embed: Fock space dimension mismatch");
    if (x.rows() != f || x.cols() != f)
        throw std::invalid_argument("crossed_product_embed: operator dimension mismatch");
    if (s < 0 || s >= n) throw std::invalid_argument("crossed_product_embed: element index");
    if (n * f > kMaxCrossedDim)
        throw std::invalid_argument("crossed_product_embed: carrier budget exceeded");
    ComplexMatrix z = ComplexMatrix::Zero(n * f, n * f);
    detail::add_crossed_blocks(sys.group, second_quantized_actions(sys, fk), x, s, 1.0, z);
    return z;
}

inline Complex crossed_trace(const FiniteGroup& group, const ComplexMatrix& z) {
    const Index n = group.order;
    if (n < 1 || z.rows() != z.cols() || z.rows() % n != 0)
        throw std::invalid_argument("crossed_trace: carrier is not l2(G) (x) Fock");
    const Index f = z.rows() / n;
    Complex acc = 0.0;
    for (Index t = 0; t < n; ++t) acc += z(t * f, t * f);
    return acc / static_cast<double>(n);
}

// Coefficients of the conditional expectation onto the group algebra:
// c_t = tau((lambda_t (x) Id)^* Z) recovered from vacuum slices.
inline ComplexVector crossed_expectation_coeffs(const FiniteGroup& group,
                                                const ComplexMatrix& z) {
    const Index n = group.order;
    if (n < 1 || z.rows() != z.cols() || z.rows() % n != 0)
        throw std::invalid_argument("crossed_expectation_coeffs: bad carrier");
    const Index f = z.rows() / n;
    ComplexVector out = ComplexVector::Zero(n);
    for (Index t = 0; t < n; ++t) {
        Complex acc = 0.0;
        for (Index u = 0; u < n; ++u) acc += z(u * f, group.mul(group.inv(t), u) * f);
        out[t] = acc / static_cast<double>(n);
    }
    return out;
}

// Gradient in the crossed product: sum_s x_s (s_q(b(s)) crossed lambda_s).
inline ComplexMatrix group_gradient(const GroupCocycleSystem& sys, const QFockSpace& fk,
                                    const ComplexVector& x) {
    const Index n = sys.group.order;
    const Index f = fk.total_dim;
    if (x.size() != n) throw std::invalid_argument("group_gradient: dimension mismatch");
    if (n * f > kMaxCrossedDim)
        throw std::invalid_argument("group_gradient: carrier budget exceeded");
    auto actions = second_quantized_actions(sys, fk);
    ComplexMatrix z = ComplexMatrix::Zero(n * f, n * f);
    for (Index s = 0; s < n; ++s) {
        if (x[s] == Complex(0.0)) continue;
        detail::add_crossed_blocks(sys.group, actions,
                                   q_gaussian(fk, sys.b[s].cast<Complex>()), s, x[s], z);
    }
    return z;
}

// Gamma through the gradient: E((grad x)^* (grad y)) read back in the group algebra.
inline ComplexVector group_carre_via_gradient(const GroupCocycleSystem& sys,
                                              const QFockSpace& fk, const ComplexVector& x,
                                              const ComplexVector& y) {
    ComplexMatrix zx = group_gradient(sys, fk, x);
    ComplexMatrix zy = group_gradient(sys, fk, y);
    return crossed_expectation_coeffs(sys.group, ComplexMatrix(zx.adjoint() * zy));
}

inline GradientSystem make_fourier_gradient(const GroupCocycleSystem& sys, double q,
                                            int cap = -1) {
    const Index n = sys.group.order;
    if (cap < 0) cap = (q == -1.0) ? std::max(2, sys.h_dim) : 2;
    auto fk = std::make_shared<const QFockSpace>(build_fock(q, sys.h_dim, cap));
    const Index F = fk->total_dim;

    GradientSystem gs;
    gs.kind = "fourier";
    gs.name = sys.name;
    gs.q = q;
    gs.cap = cap;
    gs.source_dim = n;
    gs.target_dim = n * F;
    gs.op_dim = n * F;
    if (gs.target_dim > kMaxGradientTargetDim || gs.target_dim > kMaxCrossedDim)
        throw std::invalid_argument("make_fourier_gradient: carrier budget exceeded");
    gs.symbol = sys.psi;

    auto shared = std::make_shared<const GroupCocycleSystem>(sys);
    auto perms = std::make_shared<std::vector<ComplexMatrix>>();
    perms->reserve(n);
    for (Index s = 0; s < n; ++s) {
        ComplexMatrix p = ComplexMatrix::Zero(n, n);
        for (Index u = 0; u < n; ++u) p(sys.group.mul(s, u), u) = 1.0;
        perms->push_back(std::move(p));
    }
    auto actions = std::make_shared<std::vector<ComplexMatrix>>(second_quantized_actions(sys, *fk));
    auto sg = std::make_shared<std::vector<ComplexMatrix>>();
    sg->reserve(n);
    for (Index s = 0; s < n; ++s) sg->push_back(q_gaussian(*fk, sys.b[s].cast<Complex>()));

    gs.grad = ComplexMatrix::Zero(gs.target_dim, n);
    for (Index s = 0; s < n; ++s) {
        ComplexVector fock_col = (*sg)[s].col(0);
        for (Index f = 0; f < F; ++f) gs.grad(s * F + f, s) = fock_col[f];
    }

    gs.embed_J = ComplexMatrix::Zero(gs.target_dim, n);
    for (Index s = 0; s < n; ++s) gs.embed_J(s * F, s) = 1.0;
    gs.expect_E = gs.embed_J.adjoint();

    gs.left_source = [n, perms](const ComplexVector& a) {
        ComplexMatrix out = ComplexMatrix::Zero(n, n);
        for (Index s = 0; s < n; ++s)
            if (a[s] != Complex(0.0)) out += a[s] * (*perms)[s];
        return out;
    };
    gs.left_target = [n, F, perms, actions](const ComplexVector& a) {
        ComplexMatrix out = ComplexMatrix::Zero(n * F, n * F);
        for (Index s = 0; s < n; ++s)
            if (a[s] != Complex(0.0))
                out += a[s] * Eigen::kroneckerProduct((*perms)[s], (*actions)[s]);
        return out;
    };
    gs.left_grad = [n, F, perms, actions, sg](const ComplexVector& a) {
        ComplexMatrix out = ComplexMatrix::Zero(n * F, n * F);
        for (Index s = 0; s < n; ++s)
            if (a[s] != Complex(0.0))
                out += a[s] * Eigen::kroneckerProduct(
                                  (*perms)[s], ComplexMatrix((*sg)[s] * (*actions)[s]));
        return out;
    };
    gs.op_grad = [shared, F, n, actions, sg](const ComplexVector& a) {
        ComplexMatrix z = ComplexMatrix::Zero(n * F, n * F);
        for (Index s = 0; s < n; ++s)
            if (a[s] != Complex(0.0))
                detail::add_crossed_blocks(shared->group, *actions, (*sg)[s], s, a[s], z);
        return z;
    };
    gs.op_trace = [n, F](const ComplexMatrix& z) {
        Complex acc = 0.0;
        for (Index t = 0; t < n; ++t) acc += z(t * F, t * F);
        return acc / static_cast<double>(n);
    };
    gs.lift_diag = [n, F](const RealVector& v) {
        RealVector out(n * F);
        for (Index t = 0; t < n; ++t) out.segment(t * F, F).setConstant(v[t]);
        return out;
    };
    auto left_source = gs.left_source;
    gs.source_norm = [n, left_source](const ComplexVector& x, double p) {
        ComplexMatrix op = left_source(x);
        if (std::isinf(p)) return operator_norm(op);
        if (p <= 0) throw std::invalid_argument("source_norm: p out of range");
        RealVector sv = singular_values(op);
        return std::pow(sv.array().pow(p).sum() / static_cast<double>(n), 1.0 / p);
    };
    auto op_tr = gs.op_trace;
    gs.target_norm = [op_tr](const ComplexMatrix& z, double p) {
        if (std::isinf(p)) return operator_norm(z);
        if (p <= 0) throw std::invalid_argument("target_norm: p out of range");
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(z.adjoint() * z));
        RealVector lam = es.eigenvalues().cwiseMax(0.0);
        ComplexMatrix abs_p = es.eigenvectors() *
                              lam.array().pow(p / 2.0).matrix().asDiagonal() *
                              es.eigenvectors().adjoint();
        const double tr = std::real(op_tr(abs_p));
        return std::pow(std::max(tr, 0.0), 1.0 / p);
    };
    gs.source_adjoint = [shared](const ComplexVector& x) {
        return group_adjoint(shared->group, x);
    };
    gs.source_mul = [shared](const ComplexVector& x, const ComplexVector& y) {
        return group_convolve(shared->group, x, y);
    };
    gs.op_expect = [shared](const ComplexMatrix& z) {
        return crossed_expectation_coeffs(shared->group, z);
    };
    return gs;
}

// Gap of the cocycle range: inf |b(s) - b(t)|^2 over distinct values.
inline double gap_psi(const GroupCocycleSystem& sys, double dedupe_tol = 1e-9) {
    if (sys.group.order > kMaxGroupOrder)
        throw std::invalid_argument("gap_psi: order budget exceeded");
    std::vector<RealVector> values(sys.b.begin(), sys.b.end());
    return detail::min_squared_distance(detail::dedupe_vectors(values, dedupe_tol));
}

struct GapComparison {
    double g_alpha = kInf;
    double g_psi = kInf;
    CheckReport report;
};

// Herz-Schur transfer: the family alpha_s = b(s) has gap at most gap_psi.
inline GapComparison gap_comparison(const GroupCocycleSystem& sys, double tol = 1e-12) {
    if (sys.group.order > kMaxGapIndices)
        throw std::invalid_argument("gap_comparison: order budget exceeded");
    GapComparison out;
    out.g_psi = gap_psi(sys);
    RealMatrix alpha(sys.group.order, sys.h_dim);
    for (Index s = 0; s < sys.group.order; ++s) alpha.row(s) = sys.b[s].transpose();
    out.g_alpha = gap_alpha(build_schur(alpha, sys.name + ":herz-schur"));
    double excess = 0.0;
    if (std::isfinite(out.g_alpha))
        excess = std::isfinite(out.g_psi) ? std::max(0.0, out.g_alpha - out.g_psi) : 0.0;
    else if (std::isfinite(out.g_psi))
        excess = kInf;  // g_alpha infinite but g_psi finite cannot happen: differences include b
    out.report = make_report("gap_comparison", excess, tol,
                             {{"system", sys.name},
                              {"g_alpha", out.g_alpha},
                              {"g_psi", out.g_psi}});
    return out;
}

}  // namespace ncdirac
