#pragma once

// Verification suites: bundles of CheckReports per system, shared by the CLI
// subcommands and the report aggregator.

#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "systems.hpp"

namespace ncdirac {

struct SuiteOptions {
    std::vector<double> q_list = {-1.0, -0.5, 0.0, 0.5, 1.0};
    long long seed = 0;
    double p = 2.0;   // seminorm exponent for the metric suite
    int samples = 0;  // 0 keeps per-check defaults
    std::optional<double> tol_override;
};

inline std::optional<double> env_tol_override() {
    if (const char* s = std::getenv("NCDIRAC_TOL")) {
        char* end = nullptr;
        const double v = std::strtod(s, &end);
        if (end != s && v > 0.0) return v;
    }
    return std::nullopt;
}

inline double pick_tol(const SuiteOptions& o, double fallback) {
    return o.tol_override.value_or(fallback);
}

inline int pick_samples(const SuiteOptions& o, int fallback) {
    return o.samples > 0 ? o.samples : fallback;
}

inline GradientSystem gradient_for(const SystemSpec& s, double q) {
    return s.kind == "schur" ? make_schur_gradient(*s.schur, q)
                             : make_fourier_gradient(*s.fourier, q);
}

inline LipSeminormSpec lip_for(const SystemSpec& s, double p) {
    return s.kind == "schur" ? make_lip_spec(*s.schur, p) : make_lip_spec(*s.fourier, p);
}

namespace detail {

inline ComplexVector seeded_coeffs(Index dim, long long seed) {
    std::mt19937_64 rng(static_cast<unsigned long long>(seed));
    std::normal_distribution<double> dist(0.0, 1.0);
    ComplexVector x(dim);
    for (Index i = 0; i < dim; ++i) x[i] = Complex(dist(rng), dist(rng));
    return x;
}

}  // namespace detail

// Carre du champ agreement across independent routes: combinatorial closed
// form, generator definition, and the vacuum expectation of gradients.
inline CheckReport gamma_routes_report(const SystemSpec& s, double q, long long seed,
                                       double tol = 1e-9) {
    if (s.kind == "schur") {
        const SchurSystem& sys = *s.schur;
        const Index n = sys.index_count;
        std::mt19937_64 rng(static_cast<unsigned long long>(seed));
        ComplexMatrix x = random_complex_matrix(n, n, rng);
        ComplexMatrix y = random_complex_matrix(n, n, rng);
        ComplexMatrix closed = carre_du_champ(sys, x, y);
        double r = rel_residual(carre_du_champ_definition(sys, x, y), closed);
        GradientSystem gs = make_schur_gradient(sys, q);
        ComplexVector g = carre_coeffs(gs, vec_rowmajor(x), vec_rowmajor(y));
        r = std::max(r, rel_residual(unvec_rowmajor(g, n, n), closed));
        return make_report("gamma_routes", r, tol, {{"system", sys.name}, {"q", q}}, seed);
    }
    const GroupCocycleSystem& sys = *s.fourier;
    ComplexVector x = detail::seeded_coeffs(sys.group.order, seed);
    ComplexVector y = detail::seeded_coeffs(sys.group.order, seed + 1);
    ComplexVector gen = group_carre_du_champ(sys, x, y);
    double r = rel_residual(group_carre_cocycle(sys, x, y), gen);
    GradientSystem gs = make_fourier_gradient(sys, q);
    r = std::max(r, rel_residual(carre_coeffs(gs, x, y), gen));
    return make_report("gamma_routes", r, tol, {{"system", sys.name}, {"q", q}}, seed);
}

// One resolvent report per gradient, worst case over the t grid.
inline CheckReport resolvent_grid_report(const GradientSystem& gs,
                                         const std::vector<double>& t_list, double tol = 1e-8) {
    double r = 0.0;
    for (double t : t_list) r = std::max(r, verify_resolvent(gs, t, tol).residual);
    return make_report("dirac_resolvent", r, tol,
                       {{"system", gs.name},
                        {"kind", gs.kind},
                        {"q", gs.q},
                        {"t_list", t_list}});
}

inline DiracII build_dirac2(const SystemSpec& s, const GradientSystem& gs) {
    if (s.kind == "schur")
        return build_dirac2_schur(*s.schur, build_fock(gs.q, s.schur->h_dim, gs.cap));
    return build_dirac2_fourier(*s.fourier, build_fock(gs.q, s.fourier->h_dim, gs.cap));
}

inline std::vector<CheckReport> suite_gamma(const SystemSpec& s, const SuiteOptions& o) {
    std::vector<CheckReport> out;
    if (s.kind == "schur") {
        const SchurSystem& sys = *s.schur;
        out.push_back(check_markovian(sys, {0.1, 1.0, 10.0}, pick_tol(o, 1e-9)));
        std::mt19937_64 rng(static_cast<unsigned long long>(o.seed));
        ComplexMatrix x = random_complex_matrix(sys.index_count, sys.index_count, rng);
        ComplexMatrix y = random_complex_matrix(sys.index_count, sys.index_count, rng);
        out.push_back(gamma_limit_check(sys, x, y, {1e-3, 5e-4}, pick_tol(o, 1e-5)));
    } else {
        out.push_back(cnd_check(*s.fourier, pick_tol(o, 1e-9)));
        out.push_back(herz_schur_witness(*s.fourier, {0.1, 1.0, 10.0}, pick_tol(o, 1e-9)));
    }
    for (double q : o.q_list)
        out.push_back(gamma_routes_report(s, q, o.seed, pick_tol(o, 1e-9)));
    return out;
}

inline std::vector<CheckReport> suite_dirac(const SystemSpec& s, const SuiteOptions& o) {
    std::vector<CheckReport> out;
    for (double q : o.q_list) {
        GradientSystem gs = gradient_for(s, q);
        out.push_back(verify_square(gs, pick_tol(o, 1e-9)));
        out.push_back(verify_hodge_decomposition(gs, pick_tol(o, 1e-9)));
        out.push_back(resolvent_grid_report(gs, {0.1, -0.1, 1.0, -1.0, 10.0, -10.0},
                                            pick_tol(o, 1e-8)));
        ComplexVector a = detail::seeded_coeffs(gs.source_dim, o.seed + 2);
        out.push_back(commutator_hodge(gs, a, pick_tol(o, 1e-9)).report);
        out.push_back(even_structure_check(gs, pick_tol(o, 1e-12)));
        DiracII d2 = build_dirac2(s, gs);
        std::vector<ComplexVector> as = {detail::seeded_coeffs(gs.source_dim, o.seed + 3)};
        out.push_back(verify_dirac2(gs, d2, as, pick_tol(o, 1e-9)));
    }
    return out;
}

inline std::vector<CheckReport> suite_kato(const SystemSpec& s, const SuiteOptions& o) {
    std::vector<CheckReport> out;
    for (double q : o.q_list) {
        GradientSystem gs = gradient_for(s, q);
        out.push_back(kato_ratio_report(gs, {2.0, 4.0, kInf}, pick_samples(o, 20), o.seed,
                                        pick_tol(o, 1e-9)));
    }
    return out;
}

inline std::vector<CheckReport> suite_metric(const SystemSpec& s, const SuiteOptions& o) {
    LipSeminormSpec lip = lip_for(s, o.p);
    std::vector<CheckReport> out;
    out.push_back(kernel_check(lip, pick_tol(o, 1e-9)));
    out.push_back(leibniz_check(lip, pick_samples(o, 100), o.seed, pick_tol(o, 1e-9)));
    return out;
}

inline std::vector<CheckReport> suite_gap(const SystemSpec& s, const SuiteOptions& o) {
    std::vector<CheckReport> out;
    if (s.kind == "schur") {
        const double g = gap_alpha(*s.schur);
        out.push_back(make_report("gap_value", 0.0, 0.0,
                                  {{"system", s.name}, {"gap_alpha", g}, {"value", g}}));
        out.push_back(counting_bound_check(*s.schur));
    } else {
        GapComparison gc = gap_comparison(*s.fourier, pick_tol(o, 1e-12));
        gc.report.params["value"] = gc.g_psi;
        out.push_back(gc.report);
    }
    return out;
}

inline std::vector<CheckReport> suite_all(const SystemSpec& s, const SuiteOptions& o) {
    std::vector<CheckReport> out = suite_gamma(s, o);
    for (auto&& r : suite_dirac(s, o)) out.push_back(std::move(r));
    for (auto&& r : suite_kato(s, o)) out.push_back(std::move(r));
    for (auto&& r : suite_metric(s, o)) out.push_back(std::move(r));
    for (auto&& r : suite_gap(s, o)) out.push_back(std::move(r));
    return out;
}

inline std::vector<CheckReport> run_suite(const SystemSpec& s, const std::string& which,
                                          const SuiteOptions& o) {
    if (which == "all") return suite_all(s, o);
    if (which == "gamma") return suite_gamma(s, o);
    if (which == "dirac") return suite_dirac(s, o);
    if (which == "kato") return suite_kato(s, o);
    if (which == "metric") return suite_metric(s, o);
    if (which == "gap") return suite_gap(s, o);
    throw std::invalid_argument("unknown suite: '" + which + "'");
}

inline RealVector dirac_spectrum(const GradientSystem& gs) {
    HodgeDirac d = assemble_hodge_dirac(gs);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(d.block);
    return es.eigenvalues();
}

}  // namespace ncdirac
