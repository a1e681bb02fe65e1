#pragma once

// Named system registry: builtin generators (heat:N, poisson:N,
// donut:N:p:q, Zn:n, levy:Zn:w1,w2,...) plus JSON files holding either an
// alpha family, a bare group table (regular cocycle), or an explicit cocycle.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "metric.hpp"

namespace ncdirac {

struct SystemSpec {
    std::string kind;  // "schur" or "fourier"
    std::string name;
    std::optional<SchurSystem> schur;
    std::optional<GroupCocycleSystem> fourier;
};

inline SystemSpec wrap_system(SchurSystem sys) {
    SystemSpec s;
    s.kind = "schur";
    s.name = sys.name;
    s.schur = std::move(sys);
    return s;
}

inline SystemSpec wrap_system(GroupCocycleSystem sys) {
    SystemSpec s;
    s.kind = "fourier";
    s.name = sys.name;
    s.fourier = std::move(sys);
    return s;
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) out.push_back(part);
    return out;
}

inline Index parse_count(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("unknown system: bad " + what + " '" + s + "'");
    }
    if (pos != s.size() || v < 1)
        throw std::invalid_argument("unknown system: bad " + what + " '" + s + "'");
    return static_cast<Index>(v);
}

inline double parse_real(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("unknown system: bad " + what + " '" + s + "'");
    }
    if (pos != s.size())
        throw std::invalid_argument("unknown system: bad " + what + " '" + s + "'");
    return v;
}

inline RealMatrix alpha_from_json(const nlohmann::json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty() || rows.front().empty())
        throw std::invalid_argument("system json: alpha must be a nonempty matrix");
    RealMatrix alpha(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size())
            throw std::invalid_argument("system json: ragged alpha rows");
        for (std::size_t k = 0; k < rows[i].size(); ++k) alpha(i, k) = rows[i][k];
    }
    return alpha;
}

}  // namespace detail

inline SystemSpec system_from_json(const nlohmann::json& j, const std::string& name) {
    if (j.contains("alpha")) {
        RealMatrix alpha = detail::alpha_from_json(j.at("alpha"));
        if (j.contains("h_dim") && j.at("h_dim").get<Index>() != alpha.cols())
            throw std::invalid_argument("system json: h_dim does not match alpha");
        return wrap_system(build_schur(alpha, j.value("name", name)));
    }
    if (j.contains("pi") || j.contains("b")) {
        FiniteGroup g = group_from_json(j, j.value("name", name));
        std::vector<RealMatrix> pi;
        for (const auto& m : j.at("pi")) {
            ComplexMatrix cm = matrix_from_json(m);
            if (cm.imag().norm() > 0)
                throw std::invalid_argument("system json: pi must be real orthogonal");
            pi.push_back(cm.real());
        }
        std::vector<RealVector> b;
        for (const auto& v : j.at("b")) {
            const auto vals = v.get<std::vector<double>>();
            b.push_back(Eigen::Map<const RealVector>(vals.data(), vals.size()));
        }
        return wrap_system(build_cocycle_explicit(std::move(g), std::move(pi), std::move(b),
                                                  j.value("name", name)));
    }
    if (j.contains("table")) {
        FiniteGroup g = group_from_json(j, j.value("name", name));
        RealVector xi = RealVector::Zero(g.order);
        xi[g.identity] = 1.0;
        std::string sys_name = j.value("name", name);
        return wrap_system(build_cocycle_regular(g, xi, sys_name));
    }
    throw std::invalid_argument("system json: expected alpha, table, or pi/b");
}

inline SystemSpec load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("unknown system: cannot read '" + path + "'");
    nlohmann::json j;
    in >> j;
    const auto slash = path.find_last_of('/');
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    if (base.size() > 5 && base.substr(base.size() - 5) == ".json")
        base = base.substr(0, base.size() - 5);
    return system_from_json(j, base);
}

// heat:N | poisson:N | donut:N:p:q | Zn:n | levy:Zn:w1,... | <file>.json
inline SystemSpec parse_system(const std::string& token) {
    if (token.size() > 5 && token.substr(token.size() - 5) == ".json")
        return load_system_file(token);
    auto parts = detail::split(token, ':');
    const std::string& head = parts.front();
    if (head == "heat" && parts.size() == 2)
        return wrap_system(make_heat(detail::parse_count(parts[1], "size")));
    if (head == "poisson" && parts.size() == 2)
        return wrap_system(make_poisson(detail::parse_count(parts[1], "size")));
    if (head == "donut" && parts.size() == 4)
        return wrap_system(build_cocycle_donut(detail::parse_count(parts[1], "order"),
                                               detail::parse_count(parts[2], "phase"),
                                               detail::parse_count(parts[3], "phase")));
    if (head == "Zn" && parts.size() == 2) {
        const Index n = detail::parse_count(parts[1], "order");
        if (n == 1) {
            // trivial group: word length is identically zero, realized by the
            // regular cocycle at xi = delta_e
            RealVector xi = RealVector::Zero(1);
            xi[0] = 1.0;
            return wrap_system(build_cocycle_regular(group_zn(1), xi, "Z1:word"));
        }
        return wrap_system(make_word_length_system(n));
    }
    if (head == "levy" && parts.size() == 3 && parts[1] == "Zn") {
        auto weight_strs = detail::split(parts[2], ',');
        RealVector w(weight_strs.size());
        for (std::size_t i = 0; i < weight_strs.size(); ++i)
            w[i] = detail::parse_real(weight_strs[i], "weight");
        const Index order = static_cast<Index>(weight_strs.size()) + 1;
        return wrap_system(build_cocycle_levy(group_zn(order), w,
                                              "levy:Zn:" + std::to_string(order)));
    }
    throw std::invalid_argument("unknown system: '" + token + "'");
}

}  // namespace ncdirac
