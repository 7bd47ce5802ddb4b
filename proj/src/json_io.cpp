#include "mvop/json_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mvop/errors.hpp"

namespace mvop {

using nlohmann::json;

std::string basis_to_json(const Basis& b) {
    json j;
    j["p"] = b.p;
    j["u"] = b.u;
    j["a"] = b.a;
    j["scaled_last"] = b.scaled_last;
    return j.dump(2) + "\n";
}

Basis basis_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("basis json: ") + e.what());
    }
    Basis b;
    try {
        b.p = j.at("p").get<std::vector<double>>();
        b.u = j.at("u").get<std::vector<std::vector<double>>>();
        b.a = j.at("a").get<std::vector<double>>();
        b.scaled_last = j.value("scaled_last", false);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("basis json: ") + e.what());
    }
    if (b.u.size() != b.p.size() || b.a.size() != b.p.size())
        throw ConfigError("basis json: inconsistent dimensions");
    if (b.orthogonality_residual() > 1e-8)
        throw ConfigError("basis json: rows are not orthogonal under p");
    return b;
}

std::string measure_to_json(const MixingMeasure& m) {
    json j;
    j["domain"] = (m.domain == MixingMeasure::Domain::Simplex) ? "simplex" : "box";
    j["atoms"] = json::array();
    for (const auto& a : m.atoms) j["atoms"].push_back({{"xi", a.xi}, {"w", a.w}});
    return j.dump(2) + "\n";
}

MixingMeasure measure_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("measure json: ") + e.what());
    }
    std::vector<MixingMeasure::Atom> atoms;
    std::string dom;
    try {
        dom = j.at("domain").get<std::string>();
        for (const auto& a : j.at("atoms"))
            atoms.push_back({a.at("xi").get<std::vector<double>>(), a.at("w").get<double>()});
    } catch (const json::exception& e) {
        throw ConfigError(std::string("measure json: ") + e.what());
    }
    if (dom == "simplex") return MixingMeasure::simplex(std::move(atoms));
    if (dom == "box") return MixingMeasure::box(std::move(atoms));
    throw ConfigError("measure json: domain must be simplex or box");
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace mvop
