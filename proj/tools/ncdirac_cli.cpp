// Command line front end: example generators, JSON I/O and the verification
// suites. Exit codes: 0 all checks pass, 1 some check failed, 2 usage or
// system errors, 3 unwritable report path.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ncdirac/suites.hpp"

using namespace ncdirac;

namespace {

std::vector<double> parse_reals(const std::string& csv, const std::string& what) {
    std::vector<double> out;
    for (const std::string& part : detail::split(csv, ',')) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(part, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad " + what + " '" + part + "'");
        }
        if (pos != part.size()) throw std::invalid_argument("bad " + what + " '" + part + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty " + what + " list");
    return out;
}

std::vector<ComplexVector> word_vectors(const std::string& word, int dim) {
    std::map<std::string, int> letter;
    std::vector<int> indices;
    for (const std::string& tok : detail::split(word, ',')) {
        if (tok.empty()) throw std::invalid_argument("empty letter in word");
        auto [it, fresh] = letter.emplace(tok, static_cast<int>(letter.size()));
        (void)fresh;
        indices.push_back(it->second);
    }
    const int need = static_cast<int>(letter.size());
    if (dim == 0) dim = need;
    if (dim < need)
        throw std::invalid_argument("dim " + std::to_string(dim) + " below distinct letters " +
                                    std::to_string(need));
    std::vector<ComplexVector> vecs;
    for (int idx : indices) {
        ComplexVector e = ComplexVector::Zero(dim);
        e[idx] = 1.0;
        vecs.push_back(e);
    }
    return vecs;
}

int run_wick(double q, const std::string& word, int dim, const std::string& vectors_path) {
    std::vector<ComplexVector> vecs;
    if (!vectors_path.empty()) {
        std::ifstream in(vectors_path);
        if (!in) throw std::invalid_argument("cannot read '" + vectors_path + "'");
        nlohmann::json j;
        in >> j;
        ComplexMatrix m = matrix_from_json(j);
        for (Index i = 0; i < m.rows(); ++i) vecs.push_back(m.row(i).transpose());
    } else if (!word.empty()) {
        vecs = word_vectors(word, dim);
    } else {
        throw std::invalid_argument("need --word or --vectors");
    }
    const Complex t = wick_trace(q, vecs);
    nlohmann::json out = {{"trace", t.real()}};
    if (std::abs(t.imag()) > 1e-15) out["imag"] = t.imag();
    std::cout << out.dump() << "\n";
    return 0;
}

int run_fock(double q, int dim, int cap, long long seed) {
    const double tol = env_tol_override().value_or(1e-9);
    QFockSpace fk = build_fock(q, dim, cap);
    std::mt19937_64 rng(static_cast<unsigned long long>(seed));
    std::vector<CheckReport> reps;

    double qr = 0.0;
    for (int k = 0; k < 3; ++k) {
        ComplexVector e = random_complex_matrix(dim, 1, rng).col(0);
        ComplexVector f = random_complex_matrix(dim, 1, rng).col(0);
        qr = std::max(qr, q_relation_residual(fk, e, f));
    }
    reps.push_back(make_report("q_relation", qr, tol,
                               {{"q", q}, {"dim", dim}, {"cap", fk.level_cap}}, seed));

    ComplexMatrix u = random_unitary(dim, rng);
    ComplexVector h = random_complex_matrix(dim, 1, rng).col(0);
    ComplexMatrix big = second_quantize(fk, u);
    const double cov = rel_residual(
        ComplexMatrix(big * q_gaussian(fk, h) * big.adjoint()),
        q_gaussian(fk, ComplexVector(u * h)));
    reps.push_back(make_report("second_quantize_covariance", cov, tol,
                               {{"q", q}, {"dim", dim}}, seed));

    if (q == -1.0 && fk.level_cap >= dim) {
        ComplexVector e = random_complex_matrix(dim, 1, rng).col(0);
        e /= e.norm();
        ComplexMatrix sq = q_gaussian(fk, e);
        const double fs = operator_norm(
            ComplexMatrix(sq * sq - ComplexMatrix::Identity(fk.total_dim, fk.total_dim)));
        reps.push_back(make_report("fermion_square", fs, env_tol_override().value_or(1e-12),
                                   {{"dim", dim}}, seed));
    }
    std::cout << reports_to_json(reps).dump(2) << "\n";
    return all_pass(reps) ? 0 : 1;
}

int run_verify(const std::string& system, const std::string& q_csv, const std::string& suite,
               long long seed, int samples, double p) {
    SystemSpec s = parse_system(system);
    SuiteOptions o;
    o.q_list = parse_reals(q_csv, "q");
    o.seed = seed;
    o.samples = samples;
    o.p = p;
    o.tol_override = env_tol_override();
    auto reps = run_suite(s, suite, o);
    std::cout << reports_to_json(reps).dump(2) << "\n";
    return all_pass(reps) ? 0 : 1;
}

int run_gap(const std::string& system) {
    SystemSpec s = parse_system(system);
    nlohmann::json out;
    bool pass = true;
    if (s.kind == "schur") {
        out["gap_alpha"] = gap_alpha(*s.schur);
        CheckReport counting = counting_bound_check(*s.schur);
        out["counting"] = report_to_json(counting);
        pass = counting.pass;
    } else {
        GapComparison gc = gap_comparison(*s.fourier);
        out["gap_alpha"] = gc.g_alpha;
        out["gap_psi"] = gc.g_psi;
        out["comparison"] = report_to_json(gc.report);
        pass = gc.report.pass;
    }
    std::cout << out.dump(2) << "\n";
    return pass ? 0 : 1;
}

int run_kato(const std::string& system, const std::string& q_csv, const std::string& p_csv,
             int samples, long long seed) {
    SystemSpec s = parse_system(system);
    std::vector<double> ps;
    for (const std::string& part : detail::split(p_csv, ','))
        ps.push_back(part == "inf" ? kInf : parse_reals(part, "p").front());
    const double tol = env_tol_override().value_or(1e-9);
    std::vector<CheckReport> reps;
    for (double q : parse_reals(q_csv, "q"))
        reps.push_back(kato_ratio_report(gradient_for(s, q), ps, samples, seed, tol));
    std::cout << reports_to_json(reps).dump(2) << "\n";
    return all_pass(reps) ? 0 : 1;
}

int run_metric(const std::string& system, double p, int samples, long long seed,
               const std::string& phi_path, const std::string& psi_path) {
    SystemSpec s = parse_system(system);
    LipSeminormSpec lip = lip_for(s, p);
    const double tol = env_tol_override().value_or(1e-9);
    std::vector<CheckReport> reps;
    reps.push_back(kernel_check(lip, tol));
    reps.push_back(leibniz_check(lip, samples, seed, tol));
    nlohmann::json out;
    out["reports"] = reports_to_json(reps);
    if (!phi_path.empty() || !psi_path.empty()) {
        if (phi_path.empty() || psi_path.empty())
            throw std::invalid_argument("need both --phi and --psi");
        auto load_state = [](const std::string& path) {
            std::ifstream in(path);
            if (!in) throw std::invalid_argument("cannot read '" + path + "'");
            nlohmann::json j;
            in >> j;
            return make_state(matrix_from_json(j));
        };
        out["mk_lower_bound"] =
            mk_lower_bound(lip, load_state(phi_path), load_state(psi_path), samples, seed);
        out["seed"] = seed;
    }
    std::cout << out.dump(2) << "\n";
    return all_pass(reps) ? 0 : 1;
}

std::string csv_field(const nlohmann::json& params, const char* key) {
    if (!params.contains(key)) return "";
    const auto& v = params.at(key);
    if (v.is_string()) return v.get<std::string>();
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

int run_report(const std::string& out_path, const std::string& format,
               const std::string& systems_csv, const std::string& q_csv, long long seed,
               int samples) {
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "cannot write '" << out_path << "'\n";
        return 3;
    }
    SuiteOptions o;
    o.q_list = parse_reals(q_csv, "q");
    o.seed = seed;
    o.samples = samples;
    o.tol_override = env_tol_override();
    std::vector<CheckReport> reps;
    nlohmann::json spectra = nlohmann::json::array();
    for (const std::string& name : detail::split(systems_csv, ',')) {
        SystemSpec s = parse_system(name);
        for (auto&& r : suite_all(s, o)) reps.push_back(std::move(r));
        for (double q : o.q_list) {
            RealVector lam = dirac_spectrum(gradient_for(s, q));
            spectra.push_back({{"system", s.name},
                               {"q", q},
                               {"eigenvalues", matrix_to_json(lam.cast<Complex>())}});
        }
    }
    if (format == "csv") {
        out << "system,q,p,check,value,residual,pass\n";
        for (const auto& r : reps) {
            std::string value = csv_field(r.params, "value");
            if (value.empty()) {
                std::ostringstream ss;
                ss << r.residual;
                value = ss.str();
            }
            out << csv_field(r.params, "system") << "," << csv_field(r.params, "q") << ","
                << csv_field(r.params, "p") << "," << r.check << "," << value << ","
                << r.residual << "," << (r.pass ? "true" : "false") << "\n";
        }
    } else {
        nlohmann::json j;
        j["reports"] = reports_to_json(reps);
        j["spectra"] = spectra;
        out << j.dump(2) << "\n";
    }
    out.flush();
    if (!out) {
        std::cerr << "cannot write '" << out_path << "'\n";
        return 3;
    }
    return all_pass(reps) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-dimensional laboratory for markovian semigroup gradients"};
    app.require_subcommand(1);
    const std::string default_q = "-1,-0.5,0,0.5,1";

    auto* wick = app.add_subcommand("wick", "vacuum trace of a gaussian word");
    double wq = 0.0;
    std::string word, vectors_path;
    int wdim = 0;
    wick->add_option("--q", wq, "deformation parameter")->required();
    wick->add_option("--word", word, "comma separated letters, e.g. e,e,f,f");
    wick->add_option("--dim", wdim, "ambient dimension (default: distinct letters)");
    wick->add_option("--vectors", vectors_path, "matrix json file, rows are the word");

    auto* fock = app.add_subcommand("fock", "fock space identity checks");
    double fq = 0.0;
    int fdim = 1, fcap = -1;
    long long fseed = 0;
    fock->add_option("--q", fq, "deformation parameter")->required();
    fock->add_option("--dim", fdim, "base space dimension")->required();
    fock->add_option("--cap", fcap, "tensor level cap (default max(dim, 4))");
    fock->add_option("--seed", fseed, "sampling seed");

    auto* verify = app.add_subcommand("verify", "run a verification suite on a system");
    std::string vsystem, vq = default_q, vsuite = "all";
    long long vseed = 0;
    int vsamples = 0;
    double vp = 2.0;
    verify->add_option("--system", vsystem, "heat:N|poisson:N|donut:N:p:q|Zn:n|levy:Zn:w,..|file.json")
        ->required();
    verify->add_option("--q", vq, "comma separated q grid");
    verify->add_option("--suite", vsuite, "all|gamma|dirac|kato|metric|gap");
    verify->add_option("--seed", vseed, "sampling seed");
    verify->add_option("--samples", vsamples, "sample count override");
    verify->add_option("--p", vp, "seminorm exponent for the metric suite");

    auto* gap = app.add_subcommand("gap", "spectral gap values for a system");
    std::string gsystem;
    gap->add_option("--system", gsystem, "system name or json file")->required();

    auto* kato = app.add_subcommand("kato", "gradient vs square root ratio tables");
    std::string ksystem, kq = default_q, kp = "2,4,inf";
    int ksamples = 20;
    long long kseed = 0;
    kato->add_option("--system", ksystem, "system name or json file")->required();
    kato->add_option("--q", kq, "comma separated q grid");
    kato->add_option("--p", kp, "comma separated exponents, inf allowed");
    kato->add_option("--samples", ksamples, "samples per exponent");
    kato->add_option("--seed", kseed, "sampling seed");

    auto* metric = app.add_subcommand("metric", "seminorm checks and state distances");
    std::string msystem, phi_path, psi_path;
    double mp = 2.0;
    int msamples = 100;
    long long mseed = 0;
    metric->add_option("--system", msystem, "system name or json file")->required();
    metric->add_option("--p", mp, "seminorm exponent (>= 2)");
    metric->add_option("--samples", msamples, "sample count");
    metric->add_option("--seed", mseed, "sampling seed");
    metric->add_option("--phi", phi_path, "density matrix json for the first state");
    metric->add_option("--psi", psi_path, "density matrix json for the second state");

    auto* report = app.add_subcommand("report", "aggregate suite results to a file");
    std::string rout, rformat = "json", rsystems = "heat:3,poisson:3,donut:8:1:1,Zn:4";
    std::string rq = default_q;
    long long rseed = 0;
    int rsamples = 0;
    report->add_option("--out", rout, "output path")->required();
    report->add_option("--format", rformat, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    report->add_option("--system", rsystems, "comma separated system list");
    report->add_option("--q", rq, "comma separated q grid");
    report->add_option("--seed", rseed, "sampling seed");
    report->add_option("--samples", rsamples, "sample count override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (wick->parsed()) return run_wick(wq, word, wdim, vectors_path);
        if (fock->parsed()) return run_fock(fq, fdim, fcap, fseed);
        if (verify->parsed()) return run_verify(vsystem, vq, vsuite, vseed, vsamples, vp);
        if (gap->parsed()) return run_gap(gsystem);
        if (kato->parsed()) return run_kato(ksystem, kq, kp, ksamples, kseed);
        if (metric->parsed())
            return run_metric(msystem, mp, msamples, mseed, phi_path, psi_path);
        if (report->parsed()) return run_report(rout, rformat, rsystems, rq, rseed, rsamples);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
