#pragma once

// JSON document form of a SettingIndexedModel:
//
//   {
//     "format": "bellsim.setting_model/1",
//     "source_weights": [0.5, 0.5],
//     "settings": [
//       {"mu_deg": 0, "nu_deg": 45,
//        "table": [S1 uu, S1 ud, S1 du, S1 dd, S2 uu, ...]}
//     ]
//   }
//
// Angles are written with 12 significant digits, probabilities in shortest
// round-trip form, so decimal inputs of up to 12 digits survive a round trip
// bit for bit.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "bellsim/core/csv.hpp"
#include "bellsim/core/error.hpp"
#include "bellsim/probspace/setting_model.hpp"

namespace bellsim::probspace {

inline constexpr const char* kModelFormat = "bellsim.setting_model/1";

namespace detail {

inline double round12(double v) {
    const std::string s = csv::format_decimal12(v);
    double out = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), out);
    return out;
}

}  // namespace detail

inline nlohmann::json to_json(const SettingIndexedModel& m) {
    nlohmann::json doc;
    doc["format"] = kModelFormat;
    doc["source_weights"] = m.source_weights();
    auto settings = nlohmann::json::array();
    for (std::size_t i = 0; i < m.settings().size(); ++i) {
        const auto& s = m.settings()[i];
        auto flat = nlohmann::json::array();
        for (const auto& cell : m.table(i))
            for (double p : cell) flat.push_back(p);
        settings.push_back({{"mu_deg", detail::round12(rad_to_deg(s.mu))},
                            {"nu_deg", detail::round12(rad_to_deg(s.nu))},
                            {"table", flat}});
    }
    doc["settings"] = settings;
    return doc;
}

inline SettingIndexedModel model_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format").get<std::string>() != kModelFormat)
            throw ConfigError("unsupported model format '" + doc.at("format").get<std::string>() + "'");
        SettingIndexedModel m(doc.at("source_weights").get<std::vector<double>>());
        for (const auto& s : doc.at("settings")) {
            const auto flat = s.at("table").get<std::vector<double>>();
            if (flat.size() != 4 * m.source_events())
                throw ConfigError("setting table must have 4 entries per source event");
            JointTable t(m.source_events());
            for (std::size_t k = 0; k < t.size(); ++k)
                for (std::size_t j = 0; j < 4; ++j) t[k][j] = flat[4 * k + j];
            m.add_setting(SettingPair::degrees(s.at("mu_deg").get<double>(), s.at("nu_deg").get<double>()),
                          std::move(t));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed model document: ") + e.what());
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("invalid model: ") + e.what());
    }
}

inline std::string model_to_string(const SettingIndexedModel& m) { return to_json(m).dump(2) + "\n"; }

inline SettingIndexedModel model_from_string(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model document is not valid JSON: ") + e.what());
    }
    return model_from_json(doc);
}

inline void save_model(const SettingIndexedModel& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + path);
    f << model_to_string(m);
}

inline SettingIndexedModel load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return model_from_string(ss.str());
}

}  // namespace bellsim::probspace
