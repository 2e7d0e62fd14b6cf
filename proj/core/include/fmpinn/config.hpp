#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fmpinn/errors.hpp"

namespace fmpinn {

/// Flat configuration map: keys are "section.key", values raw strings.
/// std::map keeps keys sorted, which doubles as the canonical order.
using KvMap = std::map<std::string, std::string>;

KvMap parse_kv_text(const std::string& text, const std::string& origin = "<text>");
KvMap parse_kv_file(const std::string& path);

/// Canonical dump: sections sorted, keys sorted, "key = value" lines.
/// Parsing the dump reproduces the identical map.
std::string canonical_kv_text(const KvMap& kv);

std::uint64_t fnv1a64(std::string_view s);

inline std::uint64_t kv_hash(const KvMap& kv) { return fnv1a64(canonical_kv_text(kv)); }

// typed getters; missing keys without a default raise ConfigError naming the key
std::string kv_get_string(const KvMap& kv, const std::string& key);
std::string kv_get_string(const KvMap& kv, const std::string& key, const std::string& fallback);
double kv_get_double(const KvMap& kv, const std::string& key);
double kv_get_double(const KvMap& kv, const std::string& key, double fallback);
std::int64_t kv_get_int(const KvMap& kv, const std::string& key);
std::int64_t kv_get_int(const KvMap& kv, const std::string& key, std::int64_t fallback);
bool kv_get_bool(const KvMap& kv, const std::string& key, bool fallback);
std::vector<double> kv_get_double_list(const KvMap& kv, const std::string& key);
std::vector<int> kv_get_int_list(const KvMap& kv, const std::string& key);

std::string join_doubles(const std::vector<double>& v);
std::string join_ints(const std::vector<int>& v);

}  // namespace fmpinn
