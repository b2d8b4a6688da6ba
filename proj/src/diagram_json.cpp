#include "sovkit/diagram_json.hpp"

#include <cmath>
#include <cstdio>

#include "sovkit/errors.hpp"

namespace sovkit {

using nlohmann::json;

namespace {

double num(const json& j, const char* key, double dflt = 0.0)
{
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
    return j[key].get<double>();
}

std::string str(const json& j, const char* key)
{
    if (!j.contains(key) || !j[key].is_string()) throw ConfigError(std::string("missing string field '") + key + "'");
    return j[key].get<std::string>();
}

}  // namespace

json exponent_to_json(const FieldExponent& e)
{
    return {{"m", e.m()}, {"w_re", e.w().real()}, {"w_im", e.w().imag()}};
}

FieldExponent exponent_from_json(const json& j)
{
    if (!j.is_object()) throw ConfigError("exponent must be an object");
    double m = num(j, "m");
    if (m != std::round(m)) throw ConfigError("exponent m must be an integer");
    return FieldExponent::from_mw(static_cast<int>(m), cplx(num(j, "w_re"), num(j, "w_im")));
}

json closed_form_to_json(const ClosedFormFactor& f)
{
    json g = json::array(), mp = json::array(), wv = json::array();
    for (auto& x : f.gamma_factors) {
        json e = exponent_to_json(x.e);
        e["mult"] = x.mult;
        g.push_back(e);
    }
    for (auto& x : f.momentum_powers) {
        json e = exponent_to_json(x.e);
        e["plus"] = x.plus;
        e["minus"] = x.minus;
        mp.push_back(e);
    }
    for (auto& x : f.waves) wv.push_back({{"momentum", x.momentum}, {"at", x.at}});
    return {{"pi_power", f.pi_power},       {"phase_quarter_turns", f.phase_quarter_turns},
            {"sign", f.sign},               {"gamma_factors", g},
            {"momentum_powers", mp},        {"waves", wv},
            {"deltas", f.deltas}};
}

ClosedFormFactor closed_form_from_json(const json& j)
{
    ClosedFormFactor f;
    if (j.is_null()) return f;
    if (!j.is_object()) throw ConfigError("prefactor must be an object");
    f.pi_power = static_cast<int>(num(j, "pi_power"));
    f.phase_quarter_turns = static_cast<int>(num(j, "phase_quarter_turns"));
    f.sign = static_cast<int>(num(j, "sign", 1.0));
    if (f.sign != 1 && f.sign != -1) throw ConfigError("sign must be +1 or -1");
    for (auto& g : j.value("gamma_factors", json::array()))
        f.gamma_factors.push_back({exponent_from_json(g), static_cast<int>(num(g, "mult", 1.0))});
    for (auto& m : j.value("momentum_powers", json::array()))
        f.momentum_powers.push_back({str(m, "plus"), m.value("minus", std::string()), exponent_from_json(m)});
    for (auto& w : j.value("waves", json::array())) f.waves.push_back({str(w, "momentum"), str(w, "at")});
    if (j.contains("deltas")) f.deltas = j["deltas"].get<std::vector<std::vector<std::string>>>();
    return f;
}

json diagram_to_json(const Diagram& d)
{
    json ext = json::array(), edges = json::array();
    for (auto& e : d.external) {
        json v = {{"label", e.label}};
        if (e.is_momentum)
            v["momentum"] = true;
        else if (e.has_value) {
            v["z_re"] = e.value.real();
            v["z_im"] = e.value.imag();
        }
        ext.push_back(v);
    }
    for (auto& E : d.edges) {
        json v = {{"from", E.from}, {"to", E.to}};
        if (E.wave)
            v["wave"] = true;
        else {
            v["m"] = E.e.m();
            v["w_re"] = E.e.w().real();
            v["w_im"] = E.e.w().imag();
        }
        edges.push_back(v);
    }
    return {{"external", ext}, {"internal", d.internal}, {"edges", edges}, {"prefactor", closed_form_to_json(d.prefactor)}};
}

Diagram diagram_from_json(const json& j)
{
    try {
        Diagram d;
        if (!j.is_object() || !j.contains("edges")) throw ConfigError("diagram must be an object with edges");
        for (auto& e : j.value("external", json::array())) {
            ExternalVertex v;
            v.label = str(e, "label");
            if (e.contains("momentum")) {
                v.is_momentum = true;
                if (e["momentum"].is_object()) {
                    v.has_value = true;
                    v.value = cplx(num(e["momentum"], "re"), num(e["momentum"], "im"));
                }
            } else if (e.contains("z_re") || e.contains("z_im")) {
                v.has_value = true;
                v.value = cplx(num(e, "z_re"), num(e, "z_im"));
            }
            d.external.push_back(v);
        }
        for (auto& v : j.value("internal", json::array())) {
            if (!v.is_string()) throw ConfigError("internal labels must be strings");
            d.internal.push_back(v.get<std::string>());
        }
        for (auto& e : j["edges"]) {
            Edge E;
            E.from = str(e, "from");
            E.to = str(e, "to");
            if (e.value("wave", false))
                E.wave = true;
            else
                E.e = exponent_from_json(e);
            d.edges.push_back(E);
        }
        if (j.contains("prefactor")) d.prefactor = closed_form_from_json(j["prefactor"]);
        d.validate();
        return d;
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
    }
}

std::string dump_json(const json& j, int indent)
{
    // nlohmann prints doubles round-trip exact (17 significant digits at most)
    return j.dump(indent);
}

}  // namespace sovkit
