#pragma once

// Strict reading of JSON run configurations: every key must be known, every
// value must have the expected type, and the fully resolved configuration can
// be written back (the "config echo"). Infinite values are spelled "inf".

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bellsim/core/error.hpp"

namespace bellsim::cli {

using json = nlohmann::ordered_json;

inline json parse_config_text(const std::string& text, const std::string& origin) {
    try {
        auto doc = json::parse(text);
        if (!doc.is_object()) throw ConfigError(origin + ": top level must be a JSON object");
        return doc;
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

inline json load_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

inline json number_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

/// Reads keys from one JSON object and remembers which ones were used.
class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_ + " must be an object");
    }

    bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }

    double number(const std::string& key, double fallback) {
        if (!take(key)) return fallback;
        const auto& v = obj_.at(key);
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            if (s == "inf") return std::numeric_limits<double>::infinity();
            if (s == "-inf") return -std::numeric_limits<double>::infinity();
        }
        if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
        return v.get<double>();
    }

    std::uint64_t uint(const std::string& key, std::uint64_t fallback) {
        if (!take(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw ConfigError(where(key) + " must be a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!take(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_boolean()) throw ConfigError(where(key) + " must be true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!take(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
        if (!take(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_array()) throw ConfigError(where(key) + " must be an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError(where(key) + " must be an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    /// Nested object; an absent key yields an empty object.
    Reader child(const std::string& key) {
        static const json empty = json::object();
        if (!take(key)) return Reader(empty, where(key));
        return Reader(obj_.at(key), where(key));
    }

    /// Throws if the object holds keys that were never read.
    void finish() const {
        for (const auto& [k, v] : obj_.items())
            if (!used_.count(k)) throw ConfigError("unknown key " + where(k));
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    bool take(const std::string& key) {
        used_.insert(key);
        return has(key);
    }

    const json& obj_;
    std::string path_;
    std::set<std::string> used_;
};

}  // namespace bellsim::cli
