#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "volterra/errors.hpp"
#include "volterra/forcing.hpp"
#include "volterra/grid.hpp"
#include "volterra/measure.hpp"
#include "volterra/norms.hpp"

namespace volterra::config {

using json = nlohmann::json;

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what)
{
    throw ConfigError(where + ": " + what);
}

inline const json& field(const json& j, const std::string& key, const std::string& where)
{
    if (!j.is_object())
        fail(where, "expected an object");
    const auto it = j.find(key);
    if (it == j.end())
        fail(where, "missing field '" + key + "'");
    return *it;
}

inline double number(const json& j, const std::string& key, const std::string& where)
{
    const json& v = field(j, key, where);
    if (!v.is_number())
        fail(where + "." + key, "expected a number");
    return v.get<double>();
}

inline double number_or(const json& j, const std::string& key, double fallback, const std::string& where)
{
    if (!j.contains(key))
        return fallback;
    return number(j, key, where);
}

inline std::vector<double> numbers(const json& j, const std::string& key, const std::string& where)
{
    const json& v = field(j, key, where);
    if (!v.is_array())
        fail(where + "." + key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            fail(where + "." + key, "expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

inline std::string text(const json& j, const std::string& key, const std::string& where)
{
    const json& v = field(j, key, where);
    if (!v.is_string())
        fail(where + "." + key, "expected a string");
    return v.get<std::string>();
}

} // namespace detail

inline Grid parse_grid(const json& j, const std::string& where = "grid")
{
    return Grid(detail::number(j, "h", where), detail::number(j, "T", where));
}

inline Density parse_density(const json& j, const std::string& where = "density")
{
    const std::string kind = detail::text(j, "kind", where);
    const double s_max = detail::number(j, "s_max", where);
    if (kind == "exp_decay")
        return Density::exp_decay(detail::number_or(j, "coefficient", 1.0, where), detail::number(j, "rate", where), s_max);
    if (kind == "constant")
        return Density::constant(detail::number(j, "c", where), s_max);
    if (kind == "polynomial")
        return Density::polynomial(detail::numbers(j, "coefficients", where), s_max);
    detail::fail(where + ".kind", "unknown density '" + kind + "'");
}

inline Measure parse_measure(const json& j, const std::string& where = "measure")
{
    if (!j.is_object())
        detail::fail(where, "expected an object");
    std::vector<Atom> atoms;
    if (j.contains("atoms")) {
        const json& arr = j.at("atoms");
        if (!arr.is_array())
            detail::fail(where + ".atoms", "expected an array");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string w = where + ".atoms[" + std::to_string(k) + "]";
            atoms.push_back({detail::number(arr[k], "location", w), detail::number(arr[k], "weight", w)});
        }
    }
    std::optional<Density> density;
    if (j.contains("density") && !j.at("density").is_null())
        density = parse_density(j.at("density"), where + ".density");
    return Measure(std::move(atoms), std::move(density));
}

inline ForcingFunction parse_forcing(const json& j, const std::string& where = "forcing")
{
    const std::string kind = detail::text(j, "kind", where);
    if (kind == "osc_growth")
        return ForcingFunction::osc_growth(detail::number(j, "alpha", where), detail::number(j, "beta", where));
    if (kind == "lp_member") {
        const std::string name = detail::text(j, "name", where);
        if (name == "exp_decay")
            return ForcingFunction::exp_decay(detail::number_or(j, "rate", 1.0, where));
        if (name == "inverse_linear")
            return ForcingFunction::inverse_linear();
        if (name == "power")
            return ForcingFunction::power_decay(detail::number(j, "exponent", where));
        detail::fail(where + ".name", "unknown lp_member '" + name + "'");
    }
    if (kind == "step_train")
        return ForcingFunction::step_train(detail::numbers(j, "amplitudes", where), detail::numbers(j, "widths", where));
    if (kind == "constant")
        return ForcingFunction::constant(detail::number(j, "c", where));
    if (kind == "sine")
        return ForcingFunction::sine(detail::number_or(j, "amplitude", 1.0, where), detail::number(j, "frequency", where));
    if (kind == "tabulated") {
        auto values = detail::numbers(j, "values", where);
        if (values.size() < 2)
            detail::fail(where + ".values", "need at least two samples");
        const double h = detail::number(j, "h", where);
        const Grid g(h, h * static_cast<double>(values.size() - 1));
        return ForcingFunction::tabulated(Trajectory(g, std::move(values)));
    }
    if (kind == "sum") {
        const json& terms = detail::field(j, "terms", where);
        if (!terms.is_array() || terms.empty())
            detail::fail(where + ".terms", "expected a nonempty array");
        std::vector<double> weights(terms.size(), 1.0);
        if (j.contains("weights")) {
            weights = detail::numbers(j, "weights", where);
            if (weights.size() != terms.size())
                detail::fail(where + ".weights", "length differs from terms");
        }
        std::vector<ForcingFunction::Term> parts;
        for (std::size_t k = 0; k < terms.size(); ++k)
            parts.push_back({weights[k], parse_forcing(terms[k], where + ".terms[" + std::to_string(k) + "]")});
        return ForcingFunction::sum(std::move(parts));
    }
    detail::fail(where + ".kind", "unknown forcing kind '" + kind + "'");
}

inline Membership parse_membership(const std::string& s, const std::string& where)
{
    if (s == "finite")
        return Membership::finite;
    if (s == "infinite")
        return Membership::infinite;
    detail::fail(where, "expected 'finite' or 'infinite', got '" + s + "'");
}

inline Thresholds parse_thresholds(const json& j, const std::string& where = "thresholds")
{
    Thresholds th;
    th.tau_growth = detail::number_or(j, "tau_growth", th.tau_growth, where);
    th.tau_blow = detail::number_or(j, "tau_blow", th.tau_blow, where);
    th.tau_tail = detail::number_or(j, "tau_tail", th.tau_tail, where);
    th.slope_tol = detail::number_or(j, "slope_tol", th.slope_tol, where);
    if (!(th.tau_growth > 0.0 && th.tau_blow > th.tau_growth && th.tau_tail > 0.0 && th.slope_tol >= 0.0))
        detail::fail(where, "need 0 < tau_growth < tau_blow, tau_tail > 0, slope_tol >= 0");
    return th;
}

inline json load_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

} // namespace volterra::config
