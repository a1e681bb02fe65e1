#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace ncdirac {

/// Outcome of one verification check; pass means residual <= tolerance.
struct CheckReport {
    std::string check;
    nlohmann::json params = nlohmann::json::object();
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::optional<long long> seed;
    double runtime_ms = 0.0;
};

inline CheckReport make_report(std::string name, double residual, double tolerance,
                               nlohmann::json params = nlohmann::json::object(),
                               std::optional<long long> seed = std::nullopt) {
    CheckReport r;
    r.check = std::move(name);
    r.params = std::move(params);
    r.residual = residual;
    r.tolerance = tolerance;
    r.pass = residual <= tolerance;
    r.seed = seed;
    return r;
}

inline nlohmann::json report_to_json(const CheckReport& r) {
    nlohmann::json j;
    j["check"] = r.check;
    j["params"] = r.params;
    j["residual"] = r.residual;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    if (r.seed) j["seed"] = *r.seed;
    j["runtime_ms"] = r.runtime_ms;
    return j;
}

inline nlohmann::json reports_to_json(const std::vector<CheckReport>& rs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rs) arr.push_back(report_to_json(r));
    return arr;
}

inline bool all_pass(const std::vector<CheckReport>& rs) {
    for (const auto& r : rs)
        if (!r.pass) return false;
    return true;
}

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        const auto d = std::chrono::steady_clock::now() - start_;
        return std::chrono::duration<double, std::milli>(d).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace ncdirac
