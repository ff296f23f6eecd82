#pragma once

#include "poincare/forms.hpp"
#include "poincare/numeric.hpp"
#include "poincare/report.hpp"
#include "poincare/suite.hpp"
#include "poincare/weights.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace poincare {

/// Schema violation; what() is "<path>: <message>".
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& path, const std::string& message)
        : std::invalid_argument(path.empty() ? message : path + ": " + message), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

inline const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> names{"theorem", "ckk", "kernel_floor", "local",
                                                "nonlocal", "shift_lemma", "chain_lemma"};
    return names;
}

struct WeightEntry {
    RadialProfile profile = constant_profile();
    json source;
};

/// A configured kernel; p is filled in per run unless pinned here.
struct KernelEntry {
    KernelKind kind = KernelKind::fractional;
    double s = 0.5;
    std::optional<double> R;
    double c = 1.0;
    std::optional<double> p;

    bool applies_to(double run_p) const noexcept { return !p || *p == run_p; }
    KernelSpec at(double run_p) const {
        if (kind == KernelKind::fractional) return KernelSpec::fractional(s, run_p, R);
        return KernelSpec::constant_floor(c, run_p);
    }
};

struct SuiteSpec {
    std::uint64_t seed = 0;
    int count = 5;
    std::vector<std::string> families{"random"};
};

struct SharpSpec {
    double tolerance = 1e-8;
    int max_iterations = 500;
    int ascent_steps = 20;
    double ascent_step_size = 0.1;
};

struct ExperimentConfig {
    int dimension = 1;
    std::vector<int> grid_sizes;
    std::vector<double> p_values;
    std::vector<WeightEntry> weights;
    int profile_steps = 16;
    std::vector<KernelEntry> kernels;
    std::vector<std::string> checks;
    std::vector<double> sweep_s;
    std::vector<double> sweep_R;
    SuiteSpec suite;
    double exact_tol = exact_tolerance;
    double quadrature_tol = quadrature_tolerance;
    std::optional<double> c_hat;
    double robust_s0 = 0.5;
    SharpSpec sharp;
    std::string output_dir = ".";
};

namespace detail {

inline std::string at_key(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}
inline std::string at_index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

inline double read_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
    return x;
}

inline std::int64_t read_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<std::int64_t>();
}

inline const json& read_array(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected an array");
    return j;
}

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!known) throw ConfigError(at_key(path, key), "unknown field");
    }
}

/// Runs a module constructor and re-raises its validation error at `path`.
template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

inline WeightEntry read_weight(const json& j, const std::string& path, int steps) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    if (!j.contains("type") || !j["type"].is_string()) throw ConfigError(at_key(path, "type"), "missing weight type");
    const auto type = j["type"].get<std::string>();
    WeightEntry w;
    w.source = j;
    if (type == "constant") {
        reject_unknown(j, path, {"type", "level"});
        const double level = j.contains("level") ? read_number(j["level"], at_key(path, "level")) : 1.0;
        w.profile = at_path(at_key(path, "level"), [&] { return constant_profile(level); });
    } else if (type == "step") {
        reject_unknown(j, path, {"type", "breakpoints", "values"});
        std::vector<double> r;
        std::vector<double> v;
        if (j.contains("breakpoints")) {
            const auto& arr = read_array(j["breakpoints"], at_key(path, "breakpoints"));
            for (std::size_t i = 0; i < arr.size(); ++i)
                r.push_back(read_number(arr[i], at_index(at_key(path, "breakpoints"), i)));
        }
        if (!j.contains("values")) throw ConfigError(at_key(path, "values"), "missing field");
        const auto& arr = read_array(j["values"], at_key(path, "values"));
        for (std::size_t i = 0; i < arr.size(); ++i) v.push_back(read_number(arr[i], at_index(at_key(path, "values"), i)));
        w.profile = at_path(path, [&] { return make_step_profile(r, v); });
    } else if (type == "power") {
        // Phi(t) = (1 + t)^(-beta), sampled on profile_steps subintervals
        reject_unknown(j, path, {"type", "beta"});
        if (!j.contains("beta")) throw ConfigError(at_key(path, "beta"), "missing field");
        const double beta = read_number(j["beta"], at_key(path, "beta"));
        if (beta < 0.0) throw ConfigError(at_key(path, "beta"), "beta must be >= 0");
        w.profile = at_path(path, [&] { return sample_profile([beta](double t) { return std::pow(1.0 + t, -beta); }, steps); });
    } else {
        throw ConfigError(at_key(path, "type"), "unknown weight type '" + type + "'");
    }
    return w;
}

inline KernelEntry read_kernel(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError(at_key(path, "kind"), "missing kernel kind");
    const auto kind = j["kind"].get<std::string>();
    KernelEntry k;
    if (j.contains("p")) {
        k.p = read_number(j["p"], at_key(path, "p"));
        if (*k.p < 1.0) throw ConfigError(at_key(path, "p"), "p must be >= 1");
    }
    if (kind == "fractional") {
        reject_unknown(j, path, {"kind", "s", "R", "p"});
        k.kind = KernelKind::fractional;
        if (!j.contains("s")) throw ConfigError(at_key(path, "s"), "missing field");
        k.s = read_number(j["s"], at_key(path, "s"));
        if (!(k.s > 0.0 && k.s < 1.0)) throw ConfigError(at_key(path, "s"), "s must lie in (0,1)");
        if (j.contains("R") && !j["R"].is_null()) {
            k.R = read_number(j["R"], at_key(path, "R"));
            if (*k.R < 1.0) throw ConfigError(at_key(path, "R"), "R must be >= 1");
        }
    } else if (kind == "constant_floor") {
        reject_unknown(j, path, {"kind", "c", "p"});
        k.kind = KernelKind::constant_floor;
        if (!j.contains("c")) throw ConfigError(at_key(path, "c"), "missing field");
        k.c = read_number(j["c"], at_key(path, "c"));
        if (!(k.c > 0.0)) throw ConfigError(at_key(path, "c"), "c must be > 0");
    } else {
        throw ConfigError(at_key(path, "kind"), "unknown kernel kind '" + kind + "'");
    }
    return k;
}

} // namespace detail

/// Validates a config document; every error names the offending field.
inline ExperimentConfig parse_config(const json& j) {
    using namespace detail;
    if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
    reject_unknown(j, "", {"dimension", "grid_sizes", "p_values", "weights", "profile_steps", "kernels", "checks",
                           "sweep", "suite", "tolerances", "c_hat", "robust_s0", "sharp", "output"});
    ExperimentConfig c;

    if (!j.contains("dimension")) throw ConfigError("dimension", "missing field");
    c.dimension = static_cast<int>(read_integer(j["dimension"], "dimension"));
    if (c.dimension != 1 && c.dimension != 2) throw ConfigError("dimension", "dimension must be 1 or 2");

    if (!j.contains("grid_sizes")) throw ConfigError("grid_sizes", "missing field");
    const auto& sizes = read_array(j["grid_sizes"], "grid_sizes");
    if (sizes.empty()) throw ConfigError("grid_sizes", "N list must not be empty");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const auto n = read_integer(sizes[i], at_index("grid_sizes", i));
        if (n < 4 || n % 2 != 0) throw ConfigError(at_index("grid_sizes", i), "N must be even and >= 4");
        c.grid_sizes.push_back(static_cast<int>(n));
    }

    if (!j.contains("p_values")) throw ConfigError("p_values", "missing field");
    const auto& ps = read_array(j["p_values"], "p_values");
    if (ps.empty()) throw ConfigError("p_values", "p list must not be empty");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double p = read_number(ps[i], at_index("p_values", i));
        if (p < 1.0) throw ConfigError(at_index("p_values", i), "p must be >= 1");
        c.p_values.push_back(p);
    }

    if (j.contains("profile_steps")) {
        c.profile_steps = static_cast<int>(read_integer(j["profile_steps"], "profile_steps"));
        if (c.profile_steps < 1) throw ConfigError("profile_steps", "profile_steps must be >= 1");
    }

    if (j.contains("weights")) {
        const auto& ws = read_array(j["weights"], "weights");
        for (std::size_t i = 0; i < ws.size(); ++i)
            c.weights.push_back(read_weight(ws[i], at_index("weights", i), c.profile_steps));
    }
    if (c.weights.empty()) c.weights.push_back({constant_profile(), json{{"type", "constant"}}});

    if (j.contains("kernels")) {
        const auto& ks = read_array(j["kernels"], "kernels");
        for (std::size_t i = 0; i < ks.size(); ++i) c.kernels.push_back(read_kernel(ks[i], at_index("kernels", i)));
    }

    if (j.contains("checks")) {
        const auto& cs = read_array(j["checks"], "checks");
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const auto path = at_index("checks", i);
            if (!cs[i].is_string()) throw ConfigError(path, "expected a string");
            const auto name = cs[i].get<std::string>();
            if (std::find(known_checks().begin(), known_checks().end(), name) == known_checks().end())
                throw ConfigError(path, "unknown check '" + name + "'");
            c.checks.push_back(name);
        }
    }

    if (j.contains("sweep")) {
        const auto& sw = j["sweep"];
        if (!sw.is_object()) throw ConfigError("sweep", "expected an object");
        reject_unknown(sw, "sweep", {"s", "R"});
        if (sw.contains("s")) {
            const auto& arr = read_array(sw["s"], "sweep.s");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const double s = read_number(arr[i], at_index("sweep.s", i));
                if (!(s > 0.0 && s < 1.0)) throw ConfigError(at_index("sweep.s", i), "s must lie in (0,1)");
                c.sweep_s.push_back(s);
            }
        }
        if (sw.contains("R")) {
            const auto& arr = read_array(sw["R"], "sweep.R");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const double R = read_number(arr[i], at_index("sweep.R", i));
                if (R < 1.0) throw ConfigError(at_index("sweep.R", i), "R must be >= 1");
                c.sweep_R.push_back(R);
            }
        }
    }

    if (!j.contains("suite")) throw ConfigError("suite", "missing field");
    const auto& su = j["suite"];
    if (!su.is_object()) throw ConfigError("suite", "expected an object");
    reject_unknown(su, "suite", {"seed", "count", "families"});
    if (!su.contains("seed")) throw ConfigError("suite.seed", "a random seed is required");
    if (!su["seed"].is_number_integer() || (!su["seed"].is_number_unsigned() && su["seed"].get<std::int64_t>() < 0))
        throw ConfigError("suite.seed", "seed must be a nonnegative integer");
    c.suite.seed = su["seed"].get<std::uint64_t>();
    if (su.contains("count")) {
        c.suite.count = static_cast<int>(read_integer(su["count"], "suite.count"));
        if (c.suite.count < 1) throw ConfigError("suite.count", "count must be >= 1");
    }
    if (su.contains("families")) {
        const auto& fs = read_array(su["families"], "suite.families");
        if (fs.empty()) throw ConfigError("suite.families", "family list must not be empty");
        c.suite.families.clear();
        for (std::size_t i = 0; i < fs.size(); ++i) {
            const auto path = at_index("suite.families", i);
            if (!fs[i].is_string()) throw ConfigError(path, "expected a string");
            const auto name = fs[i].get<std::string>();
            const auto& known = suite_families();
            if (std::find(known.begin(), known.end(), name) == known.end())
                throw ConfigError(path, "unknown family '" + name + "'");
            c.suite.families.push_back(name);
        }
    }

    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        if (!t.is_object()) throw ConfigError("tolerances", "expected an object");
        reject_unknown(t, "tolerances", {"exact", "quadrature"});
        if (t.contains("exact")) c.exact_tol = read_number(t["exact"], "tolerances.exact");
        if (t.contains("quadrature")) c.quadrature_tol = read_number(t["quadrature"], "tolerances.quadrature");
        if (c.exact_tol < 0.0) throw ConfigError("tolerances.exact", "tolerance must be >= 0");
        if (c.quadrature_tol < 0.0) throw ConfigError("tolerances.quadrature", "tolerance must be >= 0");
    }

    if (j.contains("c_hat") && !j["c_hat"].is_null()) {
        c.c_hat = read_number(j["c_hat"], "c_hat");
        if (!(*c.c_hat > 0.0)) throw ConfigError("c_hat", "c_hat must be > 0");
    }
    if (j.contains("robust_s0")) {
        c.robust_s0 = read_number(j["robust_s0"], "robust_s0");
        if (!(c.robust_s0 > 0.0 && c.robust_s0 < 1.0)) throw ConfigError("robust_s0", "s must lie in (0,1)");
    }

    if (j.contains("sharp")) {
        const auto& sh = j["sharp"];
        if (!sh.is_object()) throw ConfigError("sharp", "expected an object");
        reject_unknown(sh, "sharp", {"tolerance", "max_iterations", "ascent_steps", "ascent_step_size"});
        if (sh.contains("tolerance")) c.sharp.tolerance = read_number(sh["tolerance"], "sharp.tolerance");
        if (sh.contains("max_iterations"))
            c.sharp.max_iterations = static_cast<int>(read_integer(sh["max_iterations"], "sharp.max_iterations"));
        if (sh.contains("ascent_steps"))
            c.sharp.ascent_steps = static_cast<int>(read_integer(sh["ascent_steps"], "sharp.ascent_steps"));
        if (sh.contains("ascent_step_size"))
            c.sharp.ascent_step_size = read_number(sh["ascent_step_size"], "sharp.ascent_step_size");
        if (!(c.sharp.tolerance > 0.0)) throw ConfigError("sharp.tolerance", "tolerance must be > 0");
        if (c.sharp.max_iterations < 1) throw ConfigError("sharp.max_iterations", "max_iterations must be >= 1");
        if (c.sharp.ascent_steps < 0) throw ConfigError("sharp.ascent_steps", "ascent_steps must be >= 0");
        if (!(c.sharp.ascent_step_size > 0.0))
            throw ConfigError("sharp.ascent_step_size", "ascent_step_size must be > 0");
    }

    if (j.contains("output")) {
        const auto& o = j["output"];
        if (!o.is_object()) throw ConfigError("output", "expected an object");
        reject_unknown(o, "output", {"directory"});
        if (o.contains("directory")) {
            if (!o["directory"].is_string()) throw ConfigError("output.directory", "expected a string");
            c.output_dir = o["directory"].get<std::string>();
        }
    }
    return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot read config file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

/// JSON Schema of the config document.
inline json config_schema() {
    const json number_list = {{"type", "array"}, {"items", {{"type", "number"}}}};
    const json weight = {
        {"oneOf",
         json::array(
             {{{"type", "object"},
               {"required", {"type"}},
               {"properties", {{"type", {{"const", "constant"}}}, {"level", {{"type", "number"}, {"exclusiveMinimum", 0}}}}},
               {"additionalProperties", false}},
              {{"type", "object"},
               {"required", {"type", "values"}},
               {"properties",
                {{"type", {{"const", "step"}}},
                 {"breakpoints", {{"type", "array"}, {"items", {{"type", "number"}, {"exclusiveMinimum", 0}, {"exclusiveMaximum", 1}}}}},
                 {"values", {{"type", "array"}, {"minItems", 1}, {"items", {{"type", "number"}, {"minimum", 0}}}}}}},
               {"additionalProperties", false}},
              {{"type", "object"},
               {"required", {"type", "beta"}},
               {"properties", {{"type", {{"const", "power"}}}, {"beta", {{"type", "number"}, {"minimum", 0}}}}},
               {"additionalProperties", false}}})}};
    const json kernel = {
        {"oneOf",
         json::array(
             {{{"type", "object"},
               {"required", {"kind", "s"}},
               {"properties",
                {{"kind", {{"const", "fractional"}}},
                 {"s", {{"type", "number"}, {"exclusiveMinimum", 0}, {"exclusiveMaximum", 1}}},
                 {"R", {{"type", {"number", "null"}}, {"minimum", 1}}},
                 {"p", {{"type", "number"}, {"minimum", 1}}}}},
               {"additionalProperties", false}},
              {{"type", "object"},
               {"required", {"kind", "c"}},
               {"properties",
                {{"kind", {{"const", "constant_floor"}}},
                 {"c", {{"type", "number"}, {"exclusiveMinimum", 0}}},
                 {"p", {{"type", "number"}, {"minimum", 1}}}}},
               {"additionalProperties", false}}})}};
    return json{
        {"$schema", "https://json-schema.org/draft/2020-12/schema"},
        {"title", "poincare experiment config"},
        {"type", "object"},
        {"required", {"dimension", "grid_sizes", "p_values", "suite"}},
        {"additionalProperties", false},
        {"properties",
         {{"dimension", {{"enum", {1, 2}}}},
          {"grid_sizes", {{"type", "array"}, {"minItems", 1}, {"items", {{"type", "integer"}, {"minimum", 4}, {"multipleOf", 2}}}}},
          {"p_values", {{"type", "array"}, {"minItems", 1}, {"items", {{"type", "number"}, {"minimum", 1}}}}},
          {"weights", {{"type", "array"}, {"items", weight}}},
          {"profile_steps", {{"type", "integer"}, {"minimum", 1}}},
          {"kernels", {{"type", "array"}, {"items", kernel}}},
          {"checks", {{"type", "array"}, {"items", {{"enum", known_checks()}}}}},
          {"sweep",
           {{"type", "object"},
            {"additionalProperties", false},
            {"properties",
             {{"s", {{"type", "array"}, {"items", {{"type", "number"}, {"exclusiveMinimum", 0}, {"exclusiveMaximum", 1}}}}},
              {"R", {{"type", "array"}, {"items", {{"type", "number"}, {"minimum", 1}}}}}}}}},
          {"suite",
           {{"type", "object"},
            {"required", {"seed"}},
            {"additionalProperties", false},
            {"properties",
             {{"seed", {{"type", "integer"}, {"minimum", 0}}},
              {"count", {{"type", "integer"}, {"minimum", 1}}},
              {"families", {{"type", "array"}, {"minItems", 1}, {"items", {{"enum", suite_families()}}}}}}}}},
          {"tolerances",
           {{"type", "object"},
            {"additionalProperties", false},
            {"properties", {{"exact", {{"type", "number"}, {"minimum", 0}}}, {"quadrature", {{"type", "number"}, {"minimum", 0}}}}}}},
          {"c_hat", {{"type", {"number", "null"}}, {"exclusiveMinimum", 0}}},
          {"robust_s0", {{"type", "number"}, {"exclusiveMinimum", 0}, {"exclusiveMaximum", 1}}},
          {"sharp",
           {{"type", "object"},
            {"additionalProperties", false},
            {"properties",
             {{"tolerance", {{"type", "number"}, {"exclusiveMinimum", 0}}},
              {"max_iterations", {{"type", "integer"}, {"minimum", 1}}},
              {"ascent_steps", {{"type", "integer"}, {"minimum", 0}}},
              {"ascent_step_size", {{"type", "number"}, {"exclusiveMinimum", 0}}}}}}},
          {"output",
           {{"type", "object"},
            {"additionalProperties", false},
            {"properties", {{"directory", {{"type", "string"}}}}}}}}},
    };
}

} // namespace poincare
