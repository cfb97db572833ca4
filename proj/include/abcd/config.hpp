#pragma once

#include "abcd/error.hpp"
#include "abcd/params.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace abcd {

using json = nlohmann::json;

namespace detail {
inline double num_field(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw Error(ErrorCode::ConfigError, std::string("'") + key + "' must be a number");
    return v.get<double>();
}
} // namespace detail

// {"a","b","c","d"} | {"nu","b"} | {"b","ac_line":true}
inline PhysParams params_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "params must be a JSON object");
    if (j.contains("ac_line")) {
        if (!j.at("ac_line").is_boolean() || !j.at("ac_line").get<bool>())
            throw Error(ErrorCode::ConfigError, "'ac_line' must be true");
        if (!j.contains("b")) throw Error(ErrorCode::ConfigError, "ac_line params need 'b'");
        return a_equals_c_line(detail::num_field(j, "b"));
    }
    if (j.contains("nu")) {
        if (!j.contains("b")) throw Error(ErrorCode::ConfigError, "nu params need 'b'");
        return from_nu_b(detail::num_field(j, "nu"), detail::num_field(j, "b"));
    }
    for (const char* k : {"a", "b", "c", "d"})
        if (!j.contains(k)) throw Error(ErrorCode::ConfigError, std::string("params missing '") + k + "'");
    return validate_phys(detail::num_field(j, "a"), detail::num_field(j, "b"), detail::num_field(j, "c"),
                         detail::num_field(j, "d"));
}

inline json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, "malformed JSON in " + what + ": " + e.what());
    }
}

// inline JSON when the text starts with '{', else a file path
inline PhysParams load_params(const std::string& src) {
    std::string text = src;
    std::size_t i = 0;
    while (i < src.size() && std::isspace(static_cast<unsigned char>(src[i]))) ++i;
    if (i == src.size() || src[i] != '{') {
        std::ifstream f(src);
        if (!f) throw Error(ErrorCode::IoError, "cannot open params file '" + src + "'");
        std::ostringstream ss;
        ss << f.rdbuf();
        text = ss.str();
    }
    try {
        return params_from_json(parse_json_text(text, "params"));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("bad params: ") + e.what());
    }
}

} // namespace abcd
