#include "fmpinn/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fmpinn/format.hpp"

namespace fmpinn {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

KvMap parse_kv_text(const std::string& text, const std::string& origin) {
    KvMap kv;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        kv[section.empty() ? key : section + "." + key] = val;
    }
    return kv;
}

KvMap parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_kv_text(ss.str(), path);
}

std::string canonical_kv_text(const KvMap& kv) {
    std::string out;
    std::string section;
    bool first = true;
    for (const auto& [full, val] : kv) {
        const std::size_t dot = full.find('.');
        const std::string sec = (dot == std::string::npos) ? "" : full.substr(0, dot);
        const std::string key = (dot == std::string::npos) ? full : full.substr(dot + 1);
        if (first || sec != section) {
            if (!first) out += "\n";
            out += "[" + sec + "]\n";
            section = sec;
            first = false;
        }
        out += key + " = " + val + "\n";
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string kv_get_string(const KvMap& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("missing config field: " + key);
    return it->second;
}
std::string kv_get_string(const KvMap& kv, const std::string& key, const std::string& fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double kv_get_double(const KvMap& kv, const std::string& key) {
    const std::string s = kv_get_string(kv, key);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ConfigError("config field " + key + ": cannot parse number from '" + s + "'");
    return v;
}
double kv_get_double(const KvMap& kv, const std::string& key, double fallback) {
    return kv.count(key) ? kv_get_double(kv, key) : fallback;
}

std::int64_t kv_get_int(const KvMap& kv, const std::string& key) {
    const std::string s = kv_get_string(kv, key);
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw ConfigError("config field " + key + ": cannot parse integer from '" + s + "'");
    return v;
}
std::int64_t kv_get_int(const KvMap& kv, const std::string& key, std::int64_t fallback) {
    return kv.count(key) ? kv_get_int(kv, key) : fallback;
}

bool kv_get_bool(const KvMap& kv, const std::string& key, bool fallback) {
    if (!kv.count(key)) return fallback;
    const std::string s = kv.at(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("config field " + key + ": cannot parse boolean from '" + s + "'");
}

namespace {
std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}
}  // namespace

std::vector<double> kv_get_double_list(const KvMap& kv, const std::string& key) {
    std::vector<double> out;
    for (const std::string& part : split_commas(kv_get_string(kv, key))) {
        char* end = nullptr;
        const std::string t = part;
        const double v = std::strtod(t.c_str(), &end);
        if (end == t.c_str()) throw ConfigError("config field " + key + ": bad list entry '" + t + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<int> kv_get_int_list(const KvMap& kv, const std::string& key) {
    std::vector<int> out;
    for (double v : kv_get_double_list(kv, key)) out.push_back(static_cast<int>(v));
    return out;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_short(v[i]);
    return s;
}
std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

}  // namespace fmpinn
