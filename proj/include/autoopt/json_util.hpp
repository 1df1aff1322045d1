#pragma once

// Path-tracking accessors for reading nlohmann::json documents. Every failure
// raises ParseError naming the offending location.

#include <cmath>
#include <string>

#include "json.hpp"

#include "autoopt/error.hpp"

namespace autoopt {

using json = nlohmann::json;

namespace detail {

inline std::string join_path(const std::string& base, const std::string& key) {
    return base + "/" + key;
}

inline std::string join_path(const std::string& base, std::size_t index) {
    return base + "/" + std::to_string(index);
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw ParseError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(join_path(path, key), "missing required field");
    return *it;
}

inline double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ParseError(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ParseError(path, "expected a finite number");
    return d;
}

inline std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ParseError(path, "expected a string");
    return v.get<std::string>();
}

inline std::string as_identifier(const json& v, const std::string& path) {
    std::string s = as_string(v, path);
    if (s.empty()) throw ParseError(path, "identifier must not be empty");
    return s;
}

inline bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) throw ParseError(path, "expected a boolean");
    return v.get<bool>();
}

inline const json& as_array(const json& v, const std::string& path) {
    if (!v.is_array()) throw ParseError(path, "expected an array");
    return v;
}

inline json parse_document(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace detail
}  // namespace autoopt
