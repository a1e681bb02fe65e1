#pragma once

// Hodge-Dirac operators over a GradientSystem: the off-diagonal block
// operator D = [[0, del*],[del, 0]] on source (+) target, its square,
// resolvents on the imaginary axis, the Hodge decomposition, commutator
// closed forms, the multiplication-type Dirac on the target space, and
// Kato/Khintchine ratio reports.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fourier.hpp"

namespace ncdirac {

struct HodgeDirac {
    Index source_dim = 0;
    Index target_dim = 0;
    ComplexMatrix block;  // (s+t) x (s+t), off-diagonal [[0, grad*],[grad, 0]]
};

inline HodgeDirac assemble_hodge_dirac(const GradientSystem& gs) {
    const Index s = gs.source_dim, t = gs.target_dim;
    if ((gs.expect_E - gs.embed_J.adjoint()).norm() > 1e-10 * std::max<Index>(1, s))
        throw std::invalid_argument("assemble_hodge_dirac: expectation is not adjoint to embedding");
    HodgeDirac d;
    d.source_dim = s;
    d.target_dim = t;
    d.block = ComplexMatrix::Zero(s + t, s + t);
    d.block.block(0, s, s, t) = gs.grad.adjoint();
    d.block.block(s, 0, t, s) = gs.grad;
    return d;
}

// D^2 = diag(del* del, del del*) with del* del equal to the generator diagonal.
inline CheckReport verify_square(const GradientSystem& gs, double tol = 1e-9) {
    HodgeDirac d = assemble_hodge_dirac(gs);
    const Index s = gs.source_dim, t = gs.target_dim;
    ComplexMatrix sq = d.block * d.block;
    ComplexMatrix a_diag = gs.symbol.cast<Complex>().asDiagonal();
    double r = rel_residual(sq.topLeftCorner(s, s), a_diag);
    r = std::max(r, rel_residual(sq.bottomRightCorner(t, t),
                                 ComplexMatrix(gs.grad * gs.grad.adjoint())));
    const double scale = std::max(1.0, sq.norm());
    r = std::max(r, sq.topRightCorner(s, t).norm() / scale);
    r = std::max(r, sq.bottomLeftCorner(t, s).norm() / scale);
    r = std::max(r, (d.block - d.block.adjoint()).norm() / std::max(1.0, d.block.norm()));
    return make_report("dirac_square", r, tol,
                       {{"system", gs.name}, {"kind", gs.kind}, {"q", gs.q}});
}

namespace detail {

// Orthogonal projection onto the column space at relative cutoff 1e-10.
inline ComplexMatrix range_projector(const ComplexMatrix& g) {
    if (g.norm() == 0.0) return ComplexMatrix::Zero(g.rows(), g.rows());
    Eigen::JacobiSVD<ComplexMatrix> svd(g, Eigen::ComputeThinU);
    const double cutoff = 1e-10 * svd.singularValues().maxCoeff();
    Index rank = 0;
    while (rank < svd.singularValues().size() && svd.singularValues()[rank] > cutoff) ++rank;
    ComplexMatrix u = svd.matrixU().leftCols(rank);
    return u * u.adjoint();
}

}  // namespace detail

// Two-sided inverse of Id - itD on source (+) range(del): the candidate uses
// the diagonal resolvent (Id + t^2 A)^{-1} on the source and its lift on the
// target fibers.
inline CheckReport verify_resolvent(const GradientSystem& gs, double t, double tol = 1e-8) {
    if (t == 0.0) throw std::invalid_argument("verify_resolvent: t must be nonzero");
    HodgeDirac d = assemble_hodge_dirac(gs);
    const Index s = gs.source_dim, tt = gs.target_dim;
    const Complex it(0.0, t);

    RealVector r_src = (1.0 + t * t * gs.symbol.array()).inverse();
    RealVector r_tgt = (1.0 + t * t * gs.lift_diag(gs.symbol).array()).inverse();
    ComplexMatrix cand = ComplexMatrix::Zero(s + tt, s + tt);
    cand.topLeftCorner(s, s) = r_src.cast<Complex>().asDiagonal();
    cand.topRightCorner(s, tt) =
        it * (r_src.cast<Complex>().asDiagonal() * gs.grad.adjoint());
    cand.bottomLeftCorner(tt, s) =
        it * (gs.grad * r_src.cast<Complex>().asDiagonal());
    cand.bottomRightCorner(tt, tt) = r_tgt.cast<Complex>().asDiagonal();

    ComplexMatrix m = ComplexMatrix::Identity(s + tt, s + tt) - it * d.block;
    ComplexMatrix pv = ComplexMatrix::Zero(s + tt, s + tt);
    pv.topLeftCorner(s, s) = ComplexMatrix::Identity(s, s);
    pv.bottomRightCorner(tt, tt) = detail::range_projector(gs.grad);

    const double left = rel_residual(ComplexMatrix(m * cand * pv), pv);
    const double right = rel_residual(ComplexMatrix(cand * m * pv), pv);
    return make_report("dirac_resolvent", std::max(left, right), tol,
                       {{"system", gs.name}, {"kind", gs.kind}, {"q", gs.q}, {"t", t}});
}

// source (+) target = ran del* (+) ran del (+) ker D, as orthogonal projections.
inline CheckReport verify_hodge_decomposition(const GradientSystem& gs, double tol = 1e-9) {
    HodgeDirac d = assemble_hodge_dirac(gs);
    const Index s = gs.source_dim, t = gs.target_dim;
    ComplexMatrix p_ran_grad = detail::range_projector(gs.grad);
    ComplexMatrix p_ran_div = detail::range_projector(ComplexMatrix(gs.grad.adjoint()));

    ComplexMatrix p1 = ComplexMatrix::Zero(s + t, s + t);  // ran del*
    p1.topLeftCorner(s, s) = p_ran_div;
    ComplexMatrix p2 = ComplexMatrix::Zero(s + t, s + t);  // ran del
    p2.bottomRightCorner(t, t) = p_ran_grad;
    ComplexMatrix p3 = ComplexMatrix::Zero(s + t, s + t);  // ker D
    p3.topLeftCorner(s, s) = ComplexMatrix::Identity(s, s) - p_ran_div;
    p3.bottomRightCorner(t, t) = ComplexMatrix::Identity(t, t) - p_ran_grad;

    double r = 0.0;
    const double dscale = std::max(1.0, d.block.norm());
    r = std::max(r, (d.block * p3).norm() / dscale);
    r = std::max(r, rel_residual(ComplexMatrix(p1 + p2 + p3),
                                 ComplexMatrix::Identity(s + t, s + t)));
    for (const ComplexMatrix* p : {&p1, &p2, &p3}) {
        r = std::max(r, ((*p) * (*p) - (*p)).norm());
        r = std::max(r, ((*p) - p->adjoint()).norm());
    }
    r = std::max(r, (p1 * p2).norm());
    r = std::max(r, (p1 * p3).norm());
    r = std::max(r, (p2 * p3).norm());
    // D carries ran del* onto ran del and back
    r = std::max(r, ((ComplexMatrix::Identity(s + t, s + t) - p2) * d.block * p1).norm() /
                        dscale);
    r = std::max(r, ((ComplexMatrix::Identity(s + t, s + t) - p1) * d.block * p2).norm() /
                        dscale);
    return make_report("hodge_decomposition", r, tol,
                       {{"system", gs.name}, {"kind", gs.kind}, {"q", gs.q}});
}

struct CommutatorHodge {
    ComplexMatrix lower_left;   // target x source
    ComplexMatrix upper_right;  // source x target
    CheckReport report;
};

// [D, pi(a)] with pi(a) = diag(L_a, L~_a): the two nonzero blocks have closed
// forms L_{grad a} J (lower left) and E L_{grad a} (upper right), and the
// commutator norm is dominated by the gradient's operator norm.
inline CommutatorHodge commutator_hodge(const GradientSystem& gs, const ComplexVector& a,
                                        double tol = 1e-9) {
    HodgeDirac d = assemble_hodge_dirac(gs);
    const Index s = gs.source_dim, t = gs.target_dim;
    ComplexMatrix pi = ComplexMatrix::Zero(s + t, s + t);
    pi.topLeftCorner(s, s) = gs.left_source(a);
    pi.bottomRightCorner(t, t) = gs.left_target(a);
    ComplexMatrix comm = d.block * pi - pi * d.block;

    ComplexMatrix grad_action = gs.left_grad(a);
    CommutatorHodge out;
    out.lower_left = comm.bottomLeftCorner(t, s);
    out.upper_right = comm.topRightCorner(s, t);
    ComplexMatrix closed_low = grad_action * gs.embed_J;
    ComplexMatrix closed_up = gs.expect_E * grad_action;

    double r = rel_residual(out.lower_left, closed_low);
    r = std::max(r, rel_residual(out.upper_right, closed_up));
    const double cscale = std::max(1.0, comm.norm());
    r = std::max(r, comm.topLeftCorner(s, s).norm() / cscale);
    r = std::max(r, comm.bottomRightCorner(t, t).norm() / cscale);
    const double grad_norm = operator_norm(grad_action);
    const double excess = operator_norm(comm) - grad_norm;
    r = std::max(r, std::max(0.0, excess) / std::max(1.0, grad_norm));
    out.report = make_report("hodge_commutator", r, tol,
                             {{"system", gs.name},
                              {"kind", gs.kind},
                              {"q", gs.q},
                              {"grad_norm", grad_norm}});
    return out;
}

struct DiracII {
    std::string kind;
    std::string name;
    double q = 0.0;
    Index dim = 0;
    ComplexMatrix carrier;
};

// Multiplication-type Dirac on Fock (x) M_n: x (x) e_ij -> s_q(a_i - a_j) x (x) e_ij,
// block diagonal over the matrix-unit fibers of the GNS target space.
inline DiracII build_dirac2_schur(const SchurSystem& sys, const QFockSpace& fk) {
    if (fk.h_dim != sys.h_dim)
        throw std::invalid_argument("build_dirac2_schur: Fock space dimension mismatch");
    const Index n = sys.index_count;
    const Index F = fk.total_dim;
    if (F * n * n > kMaxGradientTargetDim)
        throw std::invalid_argument("build_dirac2_schur: carrier budget exceeded");
    DiracII d;
    d.kind = "schur";
    d.name = sys.name;
    d.q = fk.q;
    d.dim = F * n * n;
    d.carrier = ComplexMatrix::Zero(d.dim, d.dim);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            const Index m = i * n + j;
            ComplexVector diff = (sys.alpha.row(i) - sys.alpha.row(j)).transpose().cast<Complex>();
            ComplexMatrix g = q_gaussian(fk, diff);
            for (Index f = 0; f < F; ++f)
                for (Index fp = 0; fp < F; ++fp)
                    d.carrier(f * n * n + m, fp * n * n + m) = g(f, fp);
        }
    return d;
}

// Same on l2(G) (x) Fock: x crossed lambda_s -> s_q(b(s)) x crossed lambda_s.
inline DiracII build_dirac2_fourier(const GroupCocycleSystem& sys, const QFockSpace& fk) {
    if (fk.h_dim != sys.h_dim)
        throw std::invalid_argument("build_dirac2_fourier: Fock space dimension mismatch");
    const Index n = sys.group.order;
    const Index F = fk.total_dim;
    if (n * F > kMaxCrossedDim)
        throw std::invalid_argument("build_dirac2_fourier: carrier budget exceeded");
    DiracII d;
    d.kind = "fourier";
    d.name = sys.name;
    d.q = fk.q;
    d.dim = n * F;
    d.carrier = ComplexMatrix::Zero(d.dim, d.dim);
    for (Index s = 0; s < n; ++s)
        d.carrier.block(s * F, s * F, F, F) = q_gaussian(fk, sys.b[s].cast<Complex>());
    return d;
}

// [Dirac-II, pi(a)] = L_{grad a} on the target space, and at q = -1 the square
// is the lifted generator diagonal.
inline CheckReport verify_dirac2(const GradientSystem& gs, const DiracII& d2,
                                 const std::vector<ComplexVector>& sample_as,
                                 double tol = 1e-9) {
    if (d2.dim != gs.target_dim)
        throw std::invalid_argument("verify_dirac2: carrier does not match the gradient target");
    double r = (d2.carrier - d2.carrier.adjoint()).norm() / std::max(1.0, d2.carrier.norm());
    for (const ComplexVector& a : sample_as) {
        ComplexMatrix pi_a = gs.left_target(a);
        ComplexMatrix comm = d2.carrier * pi_a - pi_a * d2.carrier;
        r = std::max(r, rel_residual(comm, gs.left_grad(a)));
    }
    nlohmann::json params = {{"system", gs.name}, {"kind", gs.kind}, {"q", gs.q}};
    if (gs.q == -1.0) {
        ComplexMatrix want = gs.lift_diag(gs.symbol).cast<Complex>().asDiagonal();
        r = std::max(r, rel_residual(ComplexMatrix(d2.carrier * d2.carrier), want));
        params["square_is_lifted_generator"] = true;
    }
    return make_report("dirac2", r, tol, params);
}

// gamma = diag(-Id, Id): grading that anticommutes with D and commutes with pi.
inline CheckReport even_structure_check(const GradientSystem& gs, double tol = 1e-12) {
    HodgeDirac d = assemble_hodge_dirac(gs);
    const Index s = gs.source_dim, t = gs.target_dim;
    ComplexMatrix gamma = ComplexMatrix::Identity(s + t, s + t);
    gamma.topLeftCorner(s, s) *= -1.0;
    double r = (gamma * gamma - ComplexMatrix::Identity(s + t, s + t)).norm();
    r = std::max(r, (gamma * d.block + d.block * gamma).norm() /
                        std::max(1.0, d.block.norm()));
    std::mt19937_64 rng(2);
    ComplexVector a = ComplexVector::Zero(s);
    for (Index k = 0; k < s; ++k)
        a[k] = Complex(std::uniform_real_distribution<double>(-1, 1)(rng),
                       std::uniform_real_distribution<double>(-1, 1)(rng));
    ComplexMatrix pi = ComplexMatrix::Zero(s + t, s + t);
    pi.topLeftCorner(s, s) = gs.left_source(a);
    pi.bottomRightCorner(t, t) = gs.left_target(a);
    r = std::max(r, (gamma * pi - pi * gamma).norm() / std::max(1.0, pi.norm()));
    return make_report("even_structure", r, tol,
                       {{"system", gs.name}, {"kind", gs.kind}, {"q", gs.q}});
}

// Norm of the positive square root through the source functional calculus:
// |y^{1/2}|_p = |y|_{p/2}^{1/2} for PSD y.
inline double sqrt_norm_p(const GradientSystem& gs, const ComplexVector& psd_coeffs, double p) {
    const double half = std::isinf(p) ? kInf : p / 2.0;
    return std::sqrt(std::max(0.0, gs.source_norm(psd_coeffs, half)));
}

// Ratio experiment: |grad x|_p vs |A^{1/2} x|_p and the Khintchine
// conditioned norms max(|Gamma(x,x)^{1/2}|_p, |Gamma(x*,x*)^{1/2}|_p).
// Asserted: finiteness, and exact equality of both ratios with 1 at p = 2.
inline CheckReport kato_ratio_report(const GradientSystem& gs,
                                     const std::vector<double>& p_list, int samples,
                                     long long seed, double tol = 1e-9) {
    if (samples < 1) throw std::invalid_argument("kato_ratio_report: samples must be >= 1");
    std::mt19937_64 rng(static_cast<unsigned long long>(seed));
    std::normal_distribution<double> dist(0.0, 1.0);
    nlohmann::json table = nlohmann::json::array();
    double residual = 0.0;
    for (double p : p_list) {
        double kato_min = kInf, kato_max = 0.0, khin_min = kInf, khin_max = 0.0;
        for (int k = 0; k < samples; ++k) {
            ComplexVector x(gs.source_dim);
            for (Index i = 0; i < gs.source_dim; ++i) x[i] = Complex(dist(rng), dist(rng));
            const double den = gs.source_norm(apply_sqrtA(gs, x), p);
            if (den <= 1e-12) continue;  // A^{1/2}-kernel directions carry no ratio
            ComplexMatrix zx = gs.op_grad(x);
            const double num = gs.target_norm(zx, p);
            const double ratio = num / den;
            kato_min = std::min(kato_min, ratio);
            kato_max = std::max(kato_max, ratio);
            ComplexVector xs = gs.source_adjoint(x);
            const double col = sqrt_norm_p(gs, carre_coeffs(gs, x, x), p);
            const double row = sqrt_norm_p(gs, carre_coeffs(gs, xs, xs), p);
            const double cond = std::max(col, row);
            if (cond > 1e-12) {
                const double kr = num / cond;
                khin_min = std::min(khin_min, kr);
                khin_max = std::max(khin_max, kr);
            }
            if (!std::isfinite(ratio)) residual = kInf;
            if (p == 2.0) {
                residual = std::max(residual, std::abs(ratio - 1.0));
                if (cond > 1e-12) residual = std::max(residual, std::abs(num / cond - 1.0));
            }
        }
        table.push_back({{"p", p},
                         {"kato_min", kato_min},
                         {"kato_max", kato_max},
                         {"khintchine_min", khin_min},
                         {"khintchine_max", khin_max}});
    }
    return make_report("kato_ratio", residual, tol,
                       {{"system", gs.name}, {"kind", gs.kind}, {"q", gs.q},
                        {"samples", samples}, {"ratios", table}},
                       seed);
}

}  // namespace ncdirac
