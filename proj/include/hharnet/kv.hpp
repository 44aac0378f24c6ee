#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hharnet/error.hpp"

namespace hharnet {

/// Versioned, self-describing text container used for every persisted
/// artifact (models, prepared matrices, reports).
///
/// Layout: a header line `hharnet-kv 1`, then one `key = value` line per
/// entry, `#` comment lines allowed. Insertion order is preserved, so a
/// document always serializes to the same bytes. Value encodings:
///   - strings: raw (no newlines)
///   - integers/bools: decimal / true|false
///   - doubles: C hexfloat (`%a`), round-trips bit-exact
///   - double arrays: `f64[n]:` + base64 of little-endian IEEE-754 bytes
///   - int arrays:    `i64[n]:` + base64 of little-endian two's-complement
class KvDocument {
public:
    void set_string(const std::string& key, const std::string& value);
    void set_i64(const std::string& key, std::int64_t value);
    void set_u64(const std::string& key, std::uint64_t value);
    void set_bool(const std::string& key, bool value);
    void set_f64(const std::string& key, double value);
    void set_f64_array(const std::string& key, const std::vector<double>& values);
    void set_i64_array(const std::string& key, const std::vector<std::int64_t>& values);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::int64_t get_i64(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    double get_f64(const std::string& key) const;
    std::vector<double> get_f64_array(const std::string& key) const;
    std::vector<std::int64_t> get_i64_array(const std::string& key) const;

    std::string get_string_or(const std::string& key, const std::string& fallback) const;

    std::vector<std::string> keys() const;

    std::string to_text() const;
    static KvDocument from_text(const std::string& text);

    void save(const std::string& path) const;
    static KvDocument load(const std::string& path);

private:
    const std::string& raw(const std::string& key) const;
    void set_raw(const std::string& key, std::string value);

    std::vector<std::pair<std::string, std::string>> entries_;
};

/// base64 helpers (standard alphabet, '=' padding).
std::string base64_encode(const unsigned char* data, std::size_t len);
std::vector<unsigned char> base64_decode(const std::string& text);

}  // namespace hharnet
