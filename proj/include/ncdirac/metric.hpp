#pragma once

// Quantum-metric layer: the gradient-form seminorm max(|Gamma(x,x)^{1/2}|_p,
// |Gamma(x*,x*)^{1/2}|_p), its kernel on the unitized null-diagonal algebra,
// the Leibniz inequality, and sampled Monge-Kantorovich lower bounds between
// matrix states.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dirac.hpp"

namespace ncdirac {

// A seminorm instance: the gradient realization plus the exponent. The
// diagonal coordinates span the kernel forced by the symbol's zero diagonal;
// the unit of the algebra is their indicator. Fourier specs keep the group
// for coset bookkeeping and the left regular picture.
struct LipSeminormSpec {
    GradientSystem gs;
    double p = 2.0;
    std::vector<Index> diagonal_coords;
    std::optional<FiniteGroup> group;
};

inline LipSeminormSpec make_lip_spec(const SchurSystem& sys, double p, double q = 0.0) {
    if (p < 2.0) throw std::invalid_argument("make_lip_spec: p < 2 is unsupported");
    LipSeminormSpec spec;
    spec.gs = make_schur_gradient(sys, q);
    spec.p = p;
    const Index n = sys.index_count;
    for (Index i = 0; i < n; ++i) spec.diagonal_coords.push_back(i * n + i);
    return spec;
}

inline LipSeminormSpec make_lip_spec(const GroupCocycleSystem& sys, double p, double q = 0.0) {
    if (p < 2.0) throw std::invalid_argument("make_lip_spec: p < 2 is unsupported");
    LipSeminormSpec spec;
    spec.gs = make_fourier_gradient(sys, q);
    spec.p = p;
    spec.diagonal_coords.push_back(sys.group.identity);
    spec.group = sys.group;
    return spec;
}

inline ComplexVector unit_element(const LipSeminormSpec& spec) {
    ComplexVector one = ComplexVector::Zero(spec.gs.source_dim);
    for (Index c : spec.diagonal_coords) one[c] = 1.0;
    return one;
}

inline double gamma_seminorm(const LipSeminormSpec& spec, const ComplexVector& x) {
    if (spec.p < 2.0) throw std::invalid_argument("gamma_seminorm: p < 2 is unsupported");
    const double half = std::isinf(spec.p) ? kInf : spec.p / 2.0;
    ComplexVector xs = spec.gs.source_adjoint(x);
    const double col = std::sqrt(std::max(0.0, spec.gs.source_norm(carre_coeffs(spec.gs, x, x), half)));
    const double row = std::sqrt(std::max(0.0, spec.gs.source_norm(carre_coeffs(spec.gs, xs, xs), half)));
    return std::max(col, row);
}

namespace detail {

// Partition of the index set by vanishing symbol distance; singleton classes
// mean the seminorm kernel is the scalars.
inline std::vector<std::vector<Index>> seminorm_kernel_classes(const LipSeminormSpec& spec,
                                                               double zero_tol = 1e-12) {
    std::vector<std::vector<Index>> classes;
    if (spec.gs.kind == "schur") {
        const Index n = static_cast<Index>(std::llround(std::sqrt(double(spec.gs.source_dim))));
        std::vector<bool> placed(n, false);
        for (Index i = 0; i < n; ++i) {
            if (placed[i]) continue;
            std::vector<Index> cls;
            for (Index j = 0; j < n; ++j)
                if (!placed[j] && spec.gs.symbol[i * n + j] < zero_tol) {
                    cls.push_back(j);
                    placed[j] = true;
                }
            classes.push_back(cls);
        }
        return classes;
    }
    const FiniteGroup& g = *spec.group;
    std::vector<bool> placed(g.order, false);
    for (Index s = 0; s < g.order; ++s) {
        if (placed[s]) continue;
        std::vector<Index> cls;
        for (Index t = 0; t < g.order; ++t)
            if (!placed[t] && spec.gs.symbol[g.mul(g.inv(s), t)] < zero_tol) {
                cls.push_back(t);
                placed[t] = true;
            }
        classes.push_back(cls);
    }
    return classes;
}

}  // namespace detail

// The seminorm of every coordinate unit equals the square root of its symbol,
// so the kernel inside the unitized null-diagonal algebra is read off the
// zero classes: all singletons means scalars only.
inline CheckReport kernel_check(const LipSeminormSpec& spec, double tol = 1e-9) {
    double r = gamma_seminorm(spec, unit_element(spec));
    for (Index m = 0; m < spec.gs.source_dim; ++m) {
        bool diag = false;
        for (Index c : spec.diagonal_coords) diag = diag || (c == m);
        if (diag) continue;
        ComplexVector e = ComplexVector::Zero(spec.gs.source_dim);
        e[m] = 1.0;
        r = std::max(r, std::abs(gamma_seminorm(spec, e) - std::sqrt(spec.gs.symbol[m])));
    }
    auto classes = detail::seminorm_kernel_classes(spec);
    std::size_t biggest = 0;
    for (const auto& c : classes) biggest = std::max(biggest, c.size());
    const std::size_t points =
        spec.gs.kind == "schur"
            ? static_cast<std::size_t>(std::llround(std::sqrt(double(spec.gs.source_dim))))
            : static_cast<std::size_t>(spec.gs.source_dim);
    nlohmann::json params{{"system", spec.gs.name}, {"kind", spec.gs.kind}, {"p", spec.p}};
    if (biggest == 1) {
        params["kernel"] = "scalars";
    } else if (biggest == points) {
        params["kernel"] = "degenerate_full";
    } else {
        params["kernel"] = "equivalence_classes";
    }
    if (biggest > 1) params["classes"] = classes;
    return make_report("seminorm_kernel", r, tol, params);
}

// |xy| <= |x|_inf |y| + |x| |y|_inf, plus triangle for the max form and for
// the column form alone.
inline CheckReport leibniz_check(const LipSeminormSpec& spec, int samples, long long seed,
                                 double tol = 1e-9) {
    if (samples < 1) throw std::invalid_argument("leibniz_check: samples must be >= 1");
    std::mt19937_64 rng(static_cast<unsigned long long>(seed));
    std::normal_distribution<double> dist(0.0, 1.0);
    auto draw = [&]() {
        ComplexVector x(spec.gs.source_dim);
        for (Index i = 0; i < spec.gs.source_dim; ++i) x[i] = Complex(dist(rng), dist(rng));
        return x;
    };
    const double half = std::isinf(spec.p) ? kInf : spec.p / 2.0;
    auto col_form = [&](const ComplexVector& x) {
        return std::sqrt(std::max(0.0, spec.gs.source_norm(carre_coeffs(spec.gs, x, x), half)));
    };
    double r = gamma_seminorm(spec, unit_element(spec));  // x = y = Id gives 0 <= 0
    for (int k = 0; k < samples; ++k) {
        ComplexVector x = draw(), y = draw();
        const double nx = gamma_seminorm(spec, x), ny = gamma_seminorm(spec, y);
        const double ix = spec.gs.source_norm(x, kInf), iy = spec.gs.source_norm(y, kInf);
        const double nxy = gamma_seminorm(spec, spec.gs.source_mul(x, y));
        r = std::max(r, nxy - (ix * ny + nx * iy));
        r = std::max(r, gamma_seminorm(spec, ComplexVector(x + y)) - (nx + ny));
        r = std::max(r, col_form(ComplexVector(x + y)) - (col_form(x) + col_form(y)));
    }
    return make_report("seminorm_leibniz", std::max(0.0, r), tol,
                       {{"system", spec.gs.name}, {"p", spec.p}, {"samples", samples}}, seed);
}

// A state in the defining picture: n x n density for a Schur system over n
// indices, |G| x |G| density acting on the left regular representation for a
// Fourier system.
struct MatrixState {
    ComplexMatrix density;
};

inline MatrixState make_state(const ComplexMatrix& rho, double tol = 1e-10) {
    if (rho.rows() != rho.cols() || rho.rows() < 1)
        throw std::invalid_argument("make_state: density must be square");
    if ((rho - rho.adjoint()).norm() > tol)
        throw std::invalid_argument("make_state: density must be hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(rho));
    if (es.eigenvalues().minCoeff() < -tol)
        throw std::invalid_argument("make_state: density must be PSD");
    if (std::abs(rho.trace() - Complex(1.0)) > tol)
        throw std::invalid_argument("make_state: density must have unit trace");
    return MatrixState{rho};
}

inline MatrixState diag_state(const RealVector& weights) {
    ComplexMatrix rho = ComplexMatrix::Zero(weights.size(), weights.size());
    for (Index i = 0; i < weights.size(); ++i) rho(i, i) = weights[i];
    return make_state(rho);
}

inline Index defining_dim(const LipSeminormSpec& spec) {
    if (spec.gs.kind == "schur")
        return static_cast<Index>(std::llround(std::sqrt(double(spec.gs.source_dim))));
    return spec.gs.source_dim;
}

// phi(x) = Tr(rho x) in the defining picture.
inline Complex state_value(const LipSeminormSpec& spec, const MatrixState& st,
                           const ComplexVector& x) {
    const Index n = defining_dim(spec);
    if (st.density.rows() != n)
        throw std::invalid_argument("state_value: density dimension mismatch");
    if (spec.gs.kind == "schur")
        return (st.density * unvec_rowmajor(x, n, n)).trace();
    const FiniteGroup& g = *spec.group;
    ComplexMatrix lam = ComplexMatrix::Zero(n, n);
    for (Index s = 0; s < n; ++s)
        for (Index u = 0; u < n; ++u) lam(g.mul(s, u), u) += x[s];
    return (st.density * lam).trace();
}

// Sampled lower bound for the state distance sup{|phi(a) - psi(a)| :
// a self-adjoint, |a|_Gamma <= 1}: random null-diagonal self-adjoint
// directions rescaled onto the unit sphere of the seminorm.
inline double mk_lower_bound(const LipSeminormSpec& spec, const MatrixState& phi,
                             const MatrixState& psi, int samples, long long seed) {
    if (samples < 1) throw std::invalid_argument("mk_lower_bound: samples must be >= 1");
    auto classes = detail::seminorm_kernel_classes(spec);
    for (const auto& c : classes)
        if (c.size() > 1)
            throw std::domain_error("mk_lower_bound: seminorm kernel exceeds the scalars");
    const Index n = defining_dim(spec);
    if (phi.density.rows() != n || psi.density.rows() != n)
        throw std::invalid_argument("mk_lower_bound: state dimension mismatch");
    std::mt19937_64 rng(static_cast<unsigned long long>(seed));
    std::normal_distribution<double> dist(0.0, 1.0);
    double best = 0.0;
    for (int k = 0; k < samples; ++k) {
        ComplexVector x(spec.gs.source_dim);
        for (Index i = 0; i < spec.gs.source_dim; ++i) x[i] = Complex(dist(rng), dist(rng));
        for (Index c : spec.diagonal_coords) x[c] = 0.0;
        ComplexVector a = 0.5 * (x + spec.gs.source_adjoint(x));
        const double s = gamma_seminorm(spec, a);
        if (s < 1e-12) continue;
        a /= s;
        best = std::max(best, std::abs(state_value(spec, phi, a) - state_value(spec, psi, a)));
    }
    return best;
}

}  // namespace ncdirac
