#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

// Report emission. JSON output is canonical: object keys sorted, no
// whitespace, doubles printed with 12 significant digits via to_chars
// (locale-independent), so identical runs produce byte-identical reports.

namespace mk {

using Json = nlohmann::json;

enum class Format { JsonFmt, Csv, Text };

inline Format parse_format(const std::string& name) {
    if (name == "json") return Format::JsonFmt;
    if (name == "csv") return Format::Csv;
    if (name == "text") return Format::Text;
    throw UnsupportedFormat("unknown format '" + name + "' (expected json, csv, or text)");
}

inline std::string format_double(double x) {
    if (!std::isfinite(x))
        throw UnsupportedFormat("reports cannot contain non-finite numbers");
    if (x == 0.0) return "0"; // normalizes -0
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string scalar_text(const Json& j) {
    switch (j.type()) {
        case Json::value_t::number_float: return format_double(j.get<double>());
        case Json::value_t::number_integer: return std::to_string(j.get<std::int64_t>());
        case Json::value_t::number_unsigned: return std::to_string(j.get<std::uint64_t>());
        case Json::value_t::boolean: return j.get<bool>() ? "true" : "false";
        case Json::value_t::null: return "null";
        case Json::value_t::string: return j.get<std::string>();
        default: throw UnsupportedFormat("not a scalar");
    }
}

inline void canonical_json(const Json& j, std::string& out) {
    switch (j.type()) {
        case Json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += Json(it.key()).dump();
                out += ':';
                canonical_json(it.value(), out);
            }
            out += '}';
            return;
        }
        case Json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                canonical_json(j[i], out);
            }
            out += ']';
            return;
        }
        case Json::value_t::string:
            out += j.dump(); // handles escaping
            return;
        default:
            out += scalar_text(j);
            return;
    }
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline void csv_rows(const Json& j, const std::string& field, const std::string& index,
                     std::string& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string next = field.empty() ? it.key() : field + "." + it.key();
            csv_rows(it.value(), next, index, out);
        }
        return;
    }
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            const std::string next = index.empty() ? std::to_string(i)
                                                   : index + ":" + std::to_string(i);
            csv_rows(j[i], field, next, out);
        }
        return;
    }
    out += csv_escape(field);
    out += ',';
    out += index;
    out += ',';
    out += csv_escape(j.is_null() ? "" : scalar_text(j));
    out += '\n';
}

inline void text_render(const Json& j, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const Json& v = it.value();
            if (v.is_object() || (v.is_array() && !v.empty() && !v[0].is_primitive())) {
                out += pad + it.key() + ":\n";
                text_render(v, depth + 1, out);
            } else if (v.is_array()) {
                out += pad + it.key() + ": [";
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) out += ", ";
                    out += scalar_text(v[i]);
                }
                out += "]\n";
            } else {
                out += pad + it.key() + ": " + scalar_text(v) + "\n";
            }
        }
        return;
    }
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            out += pad + "- [" + std::to_string(i) + "]\n";
            text_render(j[i], depth + 1, out);
        }
        return;
    }
    out += pad + scalar_text(j) + "\n";
}

} // namespace detail

inline std::string emit_report(const Json& record, Format format) {
    std::string out;
    switch (format) {
        case Format::JsonFmt:
            detail::canonical_json(record, out);
            out += '\n';
            return out;
        case Format::Csv:
            out = "field,index,value\n";
            detail::csv_rows(record, "", "", out);
            return out;
        case Format::Text:
            detail::text_render(record, 0, out);
            return out;
    }
    throw UnsupportedFormat("unknown format");
}

} // namespace mk
