#pragma once

// Markovian Schur multiplier systems: a family of real vectors alpha_i
// determines the symbol a_ij = |alpha_i - alpha_j|^2, the semigroup
// T_t = Schur multiplication by exp(-t a_ij), its carre du champ, and a
// gradient realized on a q-Fock target module.

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fock.hpp"
#include "report.hpp"

namespace ncdirac {

inline constexpr Index kMaxGapIndices = 64;
inline constexpr Index kMaxGradientTargetDim = 2048;

struct SchurSystem {
    std::string name;
    Index index_count = 0;
    int h_dim = 0;
    RealMatrix alpha;   // index_count x h_dim, rows are the alpha_i
    RealMatrix symbol;  // a_ij = |alpha_i - alpha_j|^2
};

inline SchurSystem build_schur(const RealMatrix& alpha, std::string name = "schur") {
    if (alpha.rows() < 1 || alpha.cols() < 1)
        throw std::invalid_argument("build_schur: alpha must be nonempty");
    SchurSystem sys;
    sys.name = std::move(name);
    sys.index_count = alpha.rows();
    sys.h_dim = static_cast<int>(alpha.cols());
    sys.alpha = alpha;
    sys.symbol.resize(alpha.rows(), alpha.rows());
    for (Index i = 0; i < alpha.rows(); ++i)
        for (Index j = 0; j < alpha.rows(); ++j)
            sys.symbol(i, j) = (alpha.row(i) - alpha.row(j)).squaredNorm();
    return sys;
}

// alpha_i = i * e_0, so a_ij = (i-j)^2.
inline SchurSystem make_heat(Index n) {
    RealMatrix alpha = RealMatrix::Zero(n, 1);
    for (Index i = 0; i < n; ++i) alpha(i, 0) = static_cast<double>(i);
    return build_schur(alpha, "heat:" + std::to_string(n));
}

// alpha_i = e_0 + ... + e_{i-1}, so a_ij = |i-j|.
inline SchurSystem make_poisson(Index n) {
    RealMatrix alpha = RealMatrix::Zero(n, std::max<Index>(n - 1, 1));
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < i; ++k) alpha(i, k) = 1.0;
    return build_schur(alpha, "poisson:" + std::to_string(n));
}

// The kernel exp(-t a_ij) must be PSD for every t >= 0; spot check a few t.
inline CheckReport check_markovian(const SchurSystem& sys,
                                   const std::vector<double>& t_list = {0.1, 1.0, 10.0},
                                   double tol = 1e-9) {
    double worst = 0.0;
    for (double t : t_list) {
        ComplexMatrix w = (-t * sys.symbol.array()).exp().matrix().cast<Complex>();
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(w));
        const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
        worst = std::max(worst, std::max(0.0, -es.eigenvalues().minCoeff()) / scale);
    }
    return make_report("schur_markovian", worst, tol,
                       {{"system", sys.name}, {"t_list", t_list}});
}

inline ComplexMatrix apply_generator(const SchurSystem& sys, const ComplexMatrix& x) {
    if (x.rows() != sys.index_count || x.cols() != sys.index_count)
        throw std::invalid_argument("apply_generator: dimension mismatch");
    return sys.symbol.cast<Complex>().cwiseProduct(x);
}

inline ComplexMatrix apply_semigroup(const SchurSystem& sys, double t, const ComplexMatrix& x) {
    if (t < 0) throw std::invalid_argument("apply_semigroup: t must be >= 0");
    if (x.rows() != sys.index_count || x.cols() != sys.index_count)
        throw std::invalid_argument("apply_semigroup: dimension mismatch");
    ComplexMatrix w = (-t * sys.symbol.array()).exp().matrix().cast<Complex>();
    return w.cwiseProduct(x);
}

// Gamma(x,y)_{jl} = sum_i conj(x_ij) y_il (a_ij + a_il - a_jl) / 2.
inline ComplexMatrix carre_du_champ(const SchurSystem& sys, const ComplexMatrix& x,
                                    const ComplexMatrix& y) {
    const Index n = sys.index_count;
    if (x.rows() != n || x.cols() != n || y.rows() != n || y.cols() != n)
        throw std::invalid_argument("carre_du_champ: dimension mismatch");
    ComplexMatrix g = ComplexMatrix::Zero(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index l = 0; l < n; ++l) {
            Complex acc = 0.0;
            for (Index i = 0; i < n; ++i)
                acc += std::conj(x(i, j)) * y(i, l) *
                       (0.5 * (sys.symbol(i, j) + sys.symbol(i, l) - sys.symbol(j, l)));
            g(j, l) = acc;
        }
    return g;
}

// Same bilinear form computed from the generator alone.
inline ComplexMatrix carre_du_champ_definition(const SchurSystem& sys, const ComplexMatrix& x,
                                               const ComplexMatrix& y) {
    const ComplexMatrix xs = x.adjoint();
    return 0.5 * (apply_generator(sys, xs) * y + xs * apply_generator(sys, y) -
                  apply_generator(sys, xs * y));
}

// Finite-difference route: G(t) = (T_t(x* y) - T_t(x)* T_t(y)) / (2t) tends to
// Gamma(x,y). Each listed step t contributes the nodes {t, t/2}; the sampled
// values are then polynomial-extrapolated to t = 0 (Neville), so a single step
// reduces to the classical combination 2 G(t/2) - G(t).
inline CheckReport gamma_limit_check(const SchurSystem& sys, const ComplexMatrix& x,
                                     const ComplexMatrix& y,
                                     const std::vector<double>& t_list = {1e-3, 5e-4},
                                     double tol = 1e-5) {
    if (t_list.empty()) throw std::invalid_argument("gamma_limit_check: empty t_list");
    std::vector<double> nodes;
    for (double t : t_list) {
        if (t <= 0.0) throw std::invalid_argument("gamma_limit_check: steps must be positive");
        nodes.push_back(t);
        nodes.push_back(t / 2.0);
    }
    std::sort(nodes.begin(), nodes.end(), std::greater<double>());
    nodes.erase(std::unique(nodes.begin(), nodes.end(),
                            [](double a, double b) { return std::abs(a - b) <= 1e-12 * a; }),
                nodes.end());

    auto diff_quot = [&](double s) {
        ComplexMatrix num = apply_semigroup(sys, s, x.adjoint() * y) -
                            apply_semigroup(sys, s, x).adjoint() * apply_semigroup(sys, s, y);
        return ComplexMatrix((1.0 / (2.0 * s)) * num);
    };
    std::vector<ComplexMatrix> tab;
    tab.reserve(nodes.size());
    for (double s : nodes) tab.push_back(diff_quot(s));
    // Neville evaluation at t = 0 of the polynomial through (nodes[i], tab[i])
    for (size_t k = 1; k < nodes.size(); ++k)
        for (size_t i = 0; i + k < nodes.size(); ++i)
            tab[i] = (nodes[i] * tab[i + 1] - nodes[i + k] * tab[i]) /
                     (nodes[i] - nodes[i + k]);
    ComplexMatrix exact = carre_du_champ(sys, x, y);
    const double res = rel_residual(tab.front(), exact);
    return make_report("gamma_richardson", res, tol,
                       {{"system", sys.name}, {"t_list", t_list}, {"nodes", nodes}});
}

// Directional Riesz transform along h: multiply x_ij by <alpha_i - alpha_j, h> / sqrt(a_ij),
// with the convention 0 on the diagonal classes a_ij = 0.
inline ComplexMatrix riesz_transform(const SchurSystem& sys, const RealVector& h,
                                     const ComplexMatrix& x) {
    const Index n = sys.index_count;
    if (h.size() != sys.h_dim) throw std::invalid_argument("riesz_transform: h dimension");
    if (x.rows() != n || x.cols() != n)
        throw std::invalid_argument("riesz_transform: dimension mismatch");
    const double thresh = 1e-12 * std::max(1.0, sys.symbol.maxCoeff());
    ComplexMatrix r = ComplexMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            if (sys.symbol(i, j) <= thresh) continue;
            const RealVector d = (sys.alpha.row(i) - sys.alpha.row(j)).transpose();
            r(i, j) = d.dot(h) / std::sqrt(sys.symbol(i, j)) * x(i, j);
        }
    return r;
}

// Column / row square functions over the standard directions, reported in S^p.
inline double riesz_square_function(const SchurSystem& sys, const ComplexMatrix& x, double p) {
    if (p < 2.0) throw std::invalid_argument("riesz_square_function: requires p >= 2");
    const Index n = sys.index_count;
    ComplexMatrix col = ComplexMatrix::Zero(n, n);
    ComplexMatrix row = ComplexMatrix::Zero(n, n);
    for (int k = 0; k < sys.h_dim; ++k) {
        RealVector h = RealVector::Zero(sys.h_dim);
        h[k] = 1.0;
        ComplexMatrix rk = riesz_transform(sys, h, x);
        col += rk.adjoint() * rk;
        row += rk * rk.adjoint();
    }
    return std::max(schatten_norm(mat_sqrt_psd(col), p), schatten_norm(mat_sqrt_psd(row), p));
}

namespace detail {

// Deduplicate first on exact bit patterns, then on tolerance.
inline std::vector<RealVector> dedupe_vectors(const std::vector<RealVector>& vs, double tol) {
    std::map<std::vector<double>, Index> seen;
    std::vector<RealVector> exact;
    for (const auto& v : vs) {
        std::vector<double> key(v.data(), v.data() + v.size());
        if (seen.emplace(std::move(key), exact.size()).second) exact.push_back(v);
    }
    std::vector<RealVector> out;
    for (const auto& v : exact) {
        bool fresh = true;
        for (const auto& w : out)
            if ((v - w).norm() <= tol) { fresh = false; break; }
        if (fresh) out.push_back(v);
    }
    return out;
}

inline double min_squared_distance(const std::vector<RealVector>& vs) {
    if (vs.size() < 2) return kInf;
    double best = kInf;
    for (size_t a = 0; a < vs.size(); ++a)
        for (size_t b = a + 1; b < vs.size(); ++b)
            best = std::min(best, (vs[a] - vs[b]).squaredNorm());
    return best;
}

inline std::vector<RealVector> difference_set(const RealMatrix& alpha, double tol) {
    std::vector<RealVector> diffs;
    diffs.reserve(static_cast<size_t>(alpha.rows()) * alpha.rows());
    for (Index i = 0; i < alpha.rows(); ++i)
        for (Index j = 0; j < alpha.rows(); ++j)
            diffs.push_back((alpha.row(i) - alpha.row(j)).transpose());
    return dedupe_vectors(diffs, tol);
}

}  // namespace detail

// Spectral gap of the difference set: min |d - d'|^2 over distinct differences.
inline double gap_alpha(const SchurSystem& sys, double dedupe_tol = 1e-9) {
    if (sys.index_count > kMaxGapIndices)
        throw std::invalid_argument("gap_alpha: index budget exceeded");
    return detail::min_squared_distance(detail::difference_set(sys.alpha, dedupe_tol));
}

// Shell counts of the difference set against the lattice-style bound
// (5^n - 1) k^{n-1} with n = h_dim.
inline CheckReport counting_bound_check(const SchurSystem& sys, double dedupe_tol = 1e-9) {
    if (sys.index_count > kMaxGapIndices)
        throw std::invalid_argument("counting_bound_check: index budget exceeded");
    auto diffs = detail::difference_set(sys.alpha, dedupe_tol);
    const double gap = detail::min_squared_distance(diffs);
    nlohmann::json params{{"system", sys.name}, {"gap", gap}};
    if (!std::isfinite(gap) || gap <= 0.0)
        return make_report("counting_bound", 0.0, 1e-12, params);
    double max_norm2 = 0.0;
    for (const auto& d : diffs) max_norm2 = std::max(max_norm2, d.squaredNorm());
    const int n = sys.h_dim;
    const double factor = std::pow(5.0, n) - 1.0;
    const long kmax =
        std::min<long>(static_cast<long>(std::ceil(std::sqrt(max_norm2 / gap))) + 1, 4096);
    double worst_excess = 0.0;
    std::vector<long> counts;
    const double eps = 1e-9 * gap;
    for (long k = 1; k <= kmax; ++k) {
        long count = 0;
        const double lo = static_cast<double>(k) * k * gap - eps;
        const double hi = static_cast<double>(k + 1) * (k + 1) * gap + eps;
        for (const auto& d : diffs) {
            const double r2 = d.squaredNorm();
            if (r2 >= lo && r2 <= hi) ++count;
        }
        counts.push_back(count);
        const double bound = factor * std::pow(static_cast<double>(k), n - 1);
        worst_excess = std::max(worst_excess, static_cast<double>(count) - bound);
    }
    params["shell_counts"] = counts;
    return make_report("counting_bound", std::max(0.0, worst_excess), 0.5, params);
}

// A gradient presented by explicit matrices. The source algebra acts on its
// GNS space (dimension source_dim); grad maps it into the target module
// (dimension target_dim); op_grad gives the operator picture of a gradient on
// the smaller carrier op_dim used for norms and traces.
struct GradientSystem {
    std::string kind;  // "schur" or "fourier"
    std::string name;
    double q = 0.0;
    int cap = 0;
    Index source_dim = 0;
    Index target_dim = 0;
    Index op_dim = 0;
    RealVector symbol;      // generator eigenvalues per source basis element
    ComplexMatrix grad;     // target_dim x source_dim
    ComplexMatrix embed_J;  // target_dim x source_dim, x -> 1 tensor x
    ComplexMatrix expect_E; // source_dim x target_dim, vacuum slice

    std::function<ComplexMatrix(const ComplexVector&)> left_source;
    std::function<ComplexMatrix(const ComplexVector&)> left_target;
    std::function<ComplexMatrix(const ComplexVector&)> left_grad;
    std::function<ComplexMatrix(const ComplexVector&)> op_grad;
    std::function<Complex(const ComplexMatrix&)> op_trace;
    std::function<RealVector(const RealVector&)> lift_diag;
    std::function<double(const ComplexVector&, double)> source_norm;
    std::function<double(const ComplexMatrix&, double)> target_norm;
    std::function<ComplexVector(const ComplexVector&)> source_adjoint;
    std::function<ComplexVector(const ComplexVector&, const ComplexVector&)> source_mul;
    std::function<ComplexVector(const ComplexMatrix&)> op_expect;  // op carrier -> source coeffs
};

// Carre du champ through the operator picture, as a source algebra element.
inline ComplexVector carre_coeffs(const GradientSystem& gs, const ComplexVector& x,
                                  const ComplexVector& y) {
    ComplexMatrix zx = gs.op_grad(x), zy = gs.op_grad(y);
    return gs.op_expect(ComplexMatrix(zx.adjoint() * zy));
}

inline ComplexVector apply_A(const GradientSystem& gs, const ComplexVector& x) {
    return gs.symbol.cast<Complex>().asDiagonal() * x;
}

inline ComplexVector apply_sqrtA(const GradientSystem& gs, const ComplexVector& x) {
    return gs.symbol.cwiseSqrt().cast<Complex>().asDiagonal() * x;
}

inline GradientSystem make_schur_gradient(const SchurSystem& sys, double q, int cap = -1) {
    const Index n = sys.index_count;
    if (cap < 0) cap = (q == -1.0) ? std::max(2, sys.h_dim) : 2;
    auto fk = std::make_shared<const QFockSpace>(build_fock(q, sys.h_dim, cap));
    const Index F = fk->total_dim;

    GradientSystem gs;
    gs.kind = "schur";
    gs.name = sys.name;
    gs.q = q;
    gs.cap = cap;
    gs.source_dim = n * n;
    gs.target_dim = F * n * n;
    gs.op_dim = F * n;
    if (gs.target_dim > kMaxGradientTargetDim)
        throw std::invalid_argument("make_schur_gradient: target dimension budget exceeded");

    gs.symbol.resize(n * n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) gs.symbol[i * n + j] = sys.symbol(i, j);

    // Gaussians of the difference vectors, shared by every picture below.
    auto sg = std::make_shared<std::vector<ComplexMatrix>>();
    sg->reserve(n * n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            ComplexVector d = (sys.alpha.row(i) - sys.alpha.row(j)).transpose().cast<Complex>();
            sg->push_back(q_gaussian(*fk, d));
        }

    gs.grad = ComplexMatrix::Zero(gs.target_dim, gs.source_dim);
    for (Index m = 0; m < n * n; ++m) {
        ComplexVector fock_col = (*sg)[m].col(0);  // s_q(d) applied to the vacuum
        for (Index f = 0; f < F; ++f) gs.grad(f * n * n + m, m) = fock_col[f];
    }

    gs.embed_J = ComplexMatrix::Zero(gs.target_dim, gs.source_dim);
    for (Index m = 0; m < n * n; ++m) gs.embed_J(m, m) = 1.0;  // vacuum has index 0
    gs.expect_E = gs.embed_J.adjoint();

    gs.left_source = [n](const ComplexVector& a) {
        ComplexMatrix am = unvec_rowmajor(a, n, n);
        return ComplexMatrix(
            Eigen::kroneckerProduct(am, ComplexMatrix::Identity(n, n)));
    };
    gs.left_target = [n, F](const ComplexVector& a) {
        ComplexMatrix am = unvec_rowmajor(a, n, n);
        ComplexMatrix inner =
            Eigen::kroneckerProduct(am, ComplexMatrix::Identity(n, n));
        return ComplexMatrix(
            Eigen::kroneckerProduct(ComplexMatrix::Identity(F, F), inner));
    };
    gs.left_grad = [n, F, sg](const ComplexVector& a) {
        ComplexMatrix out = ComplexMatrix::Zero(F * n * n, F * n * n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) {
                const Complex c = a[i * n + j];
                if (c == Complex(0.0)) continue;
                ComplexMatrix unit = ComplexMatrix::Zero(n, n);
                unit(i, j) = 1.0;
                ComplexMatrix inner =
                    Eigen::kroneckerProduct(unit, ComplexMatrix::Identity(n, n));
                out += c * Eigen::kroneckerProduct((*sg)[i * n + j], inner);
            }
        return out;
    };
    gs.op_grad = [n, F, sg](const ComplexVector& a) {
        ComplexMatrix out = ComplexMatrix::Zero(F * n, F * n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) {
                const Complex c = a[i * n + j];
                if (c == Complex(0.0)) continue;
                ComplexMatrix unit = ComplexMatrix::Zero(n, n);
                unit(i, j) = 1.0;
                out += c * Eigen::kroneckerProduct((*sg)[i * n + j], unit);
            }
        return out;
    };
    gs.op_trace = [n](const ComplexMatrix& z) {
        return z.topLeftCorner(n, n).trace();
    };
    gs.lift_diag = [n, F](const RealVector& v) {
        RealVector out(F * n * n);
        for (Index f = 0; f < F; ++f) out.segment(f * n * n, n * n) = v;
        return out;
    };
    gs.source_norm = [n](const ComplexVector& x, double p) {
        return schatten_norm(unvec_rowmajor(x, n, n), p);
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
    gs.source_adjoint = [n](const ComplexVector& x) {
        return vec_rowmajor(unvec_rowmajor(x, n, n).adjoint());
    };
    gs.source_mul = [n](const ComplexVector& x, const ComplexVector& y) {
        return vec_rowmajor(unvec_rowmajor(x, n, n) * unvec_rowmajor(y, n, n));
    };
    gs.op_expect = [n](const ComplexMatrix& z) {
        return vec_rowmajor(z.topLeftCorner(n, n));
    };
    return gs;
}

// Vacuum-slice conditional expectation on the operator picture.
inline ComplexMatrix conditional_expectation(const GradientSystem& gs, const ComplexMatrix& z) {
    if (gs.kind != "schur")
        throw std::invalid_argument("conditional_expectation: schur picture only");
    const Index n = static_cast<Index>(std::llround(std::sqrt(double(gs.source_dim))));
    return z.topLeftCorner(n, n);
}

// Gamma through the gradient: E((op_grad x)^* (op_grad y)).
inline ComplexMatrix carre_via_gradient(const GradientSystem& gs, const ComplexMatrix& x,
                                        const ComplexMatrix& y) {
    ComplexMatrix zx = gs.op_grad(vec_rowmajor(x));
    ComplexMatrix zy = gs.op_grad(vec_rowmajor(y));
    return conditional_expectation(gs, ComplexMatrix(zx.adjoint() * zy));
}

}  // namespace ncdirac
