#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "weight.hpp"

// String-driven sequence construction. Grammar:
//   power:lambda=<f>                          k^lambda, k = 1..n
//   const:c=<f>                               c, c >= 0
//   random:dist=loguniform,lo=<f>,hi=<f>,seed=<u64>
//   file:<path>                               one value per line, "#" comments,
//                                             optional leading header line "w"
// For file: an explicit n truncates (n <= file length required); n = 0 keeps
// every value. The other kinds require n >= 1.

namespace mk {

struct GeneratorSpec {
    std::string kind;
    std::string path; // file: only
    std::map<std::string, std::string> kv;

    static GeneratorSpec parse(const std::string& text) {
        GeneratorSpec spec;
        const std::size_t colon = text.find(':');
        if (colon == std::string::npos) {
            spec.kind = text;
            return spec;
        }
        spec.kind = text.substr(0, colon);
        const std::string rest = text.substr(colon + 1);
        if (spec.kind == "file") {
            spec.path = rest;
            if (spec.path.empty()) throw UsageError("generator: file: needs a path");
            return spec;
        }
        std::size_t start = 0;
        while (start <= rest.size()) {
            std::size_t comma = rest.find(',', start);
            if (comma == std::string::npos) comma = rest.size();
            const std::string item = rest.substr(start, comma - start);
            const std::size_t eq = item.find('=');
            if (eq == std::string::npos || eq == 0)
                throw UsageError("generator: expected key=value, got '" + item + "' in '" +
                                 text + "'");
            const std::string key = item.substr(0, eq);
            if (spec.kv.count(key))
                throw UsageError("generator: duplicate key '" + key + "' in '" + text + "'");
            spec.kv[key] = item.substr(eq + 1);
            start = comma + 1;
        }
        return spec;
    }

    double number(const char* key) const {
        auto it = kv.find(key);
        if (it == kv.end())
            throw UsageError("generator: " + kind + " requires " + key + "=");
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(it->second, &pos);
        } catch (const std::exception&) {
            throw UsageError("generator: bad number '" + it->second + "' for " + key);
        }
        if (pos != it->second.size() || !std::isfinite(v))
            throw UsageError("generator: bad number '" + it->second + "' for " + key);
        return v;
    }

    std::uint64_t integer(const char* key, std::uint64_t fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        std::size_t pos = 0;
        std::uint64_t v = 0;
        try {
            v = std::stoull(it->second, &pos);
        } catch (const std::exception&) {
            throw UsageError("generator: bad integer '" + it->second + "' for " + key);
        }
        if (pos != it->second.size())
            throw UsageError("generator: bad integer '" + it->second + "' for " + key);
        return v;
    }
};

inline Sequence read_sequence_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open '" + path + "'");
    Sequence out;
    std::string line;
    std::size_t lineno = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t a = line.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        const std::size_t b = line.find_last_not_of(" \t");
        const std::string tok = line.substr(a, b - a + 1);
        if (tok[0] == '#') continue;
        if (first_content && tok == "w") {
            first_content = false;
            continue;
        }
        first_content = false;
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &pos);
        } catch (const std::exception&) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": bad value '" + tok + "'");
        }
        if (pos != tok.size() || !std::isfinite(v))
            throw UsageError(path + ":" + std::to_string(lineno) + ": bad value '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw TooShort(path + ": no values found");
    return out;
}

inline void write_sequence_file(std::ostream& os, const Sequence& v) {
    os << "w\n";
    char buf[64];
    for (double x : v) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        os << buf << '\n';
    }
}

inline Sequence make_sequence(const std::string& text, std::size_t n) {
    const GeneratorSpec spec = GeneratorSpec::parse(text);
    if (spec.kind == "file") {
        Sequence v = read_sequence_file(spec.path);
        if (n == 0) return v;
        if (n > v.size())
            throw TooShort(spec.path + ": provides " + std::to_string(v.size()) +
                           " values, need " + std::to_string(n));
        v.resize(n);
        return v;
    }
    if (n == 0)
        throw UsageError("generator '" + text + "' requires a length n >= 1");
    if (spec.kind == "power") {
        const double lambda = spec.number("lambda");
        Sequence v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = std::pow(static_cast<double>(i + 1), lambda);
        return v;
    }
    if (spec.kind == "const") {
        const double c = spec.number("c");
        if (c < 0.0) throw UsageError("generator: const requires c >= 0");
        return Sequence(n, c);
    }
    if (spec.kind == "random") {
        auto it = spec.kv.find("dist");
        if (it == spec.kv.end() || it->second != "loguniform")
            throw UsageError("generator: random requires dist=loguniform");
        const double lo = spec.number("lo");
        const double hi = spec.number("hi");
        if (!(lo > 0.0) || !(hi >= lo))
            throw UsageError("generator: random requires 0 < lo <= hi");
        Rng rng(spec.integer("seed", 0));
        Sequence v(n);
        for (double& x : v) x = rng.loguniform(lo, hi);
        return v;
    }
    throw UsageError("generator: unknown kind '" + spec.kind + "'");
}

inline Weight make_weight(const std::string& text, std::size_t n) {
    return Weight(make_sequence(text, n), text);
}

} // namespace mk
