#include "hharnet/kv.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hharnet {

namespace {

constexpr const char* kHeader = "hharnet-kv 1";
constexpr const char* kB64Alphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (char c : key) {
        if (c == '=' || c == ' ' || c == '\n' || c == '\r') return false;
    }
    return true;
}

std::string f64_to_text(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double text_to_f64(const std::string& s, const std::string& key) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ParseError("key '" + key + "': cannot parse double from '" + s + "'");
    return v;
}

void append_le_u64(std::string& bytes, std::uint64_t u) {
    for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<char>((u >> (8 * b)) & 0xff));
}

std::uint64_t read_le_u64(const unsigned char* p) {
    std::uint64_t u = 0;
    for (int b = 7; b >= 0; --b) u = (u << 8) | p[b];
    return u;
}

}  // namespace

std::string base64_encode(const unsigned char* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        unsigned v = data[i] << 16;
        if (i + 1 < len) v |= data[i + 1] << 8;
        if (i + 2 < len) v |= data[i + 2];
        out.push_back(kB64Alphabet[(v >> 18) & 0x3f]);
        out.push_back(kB64Alphabet[(v >> 12) & 0x3f]);
        out.push_back(i + 1 < len ? kB64Alphabet[(v >> 6) & 0x3f] : '=');
        out.push_back(i + 2 < len ? kB64Alphabet[v & 0x3f] : '=');
    }
    return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0) throw ParseError("base64 payload length not a multiple of 4");
    std::vector<unsigned char> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        unsigned v = 0;
        for (int j = 0; j < 4; ++j) {
            char c = text[i + j];
            if (c == '=') {
                ++pad;
                v <<= 6;
            } else {
                int d = value_of(c);
                if (d < 0 || pad > 0) throw ParseError("invalid base64 character");
                v = (v << 6) | static_cast<unsigned>(d);
            }
        }
        out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
        if (pad < 2) out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
        if (pad < 1) out.push_back(static_cast<unsigned char>(v & 0xff));
    }
    return out;
}

void KvDocument::set_raw(const std::string& key, std::string value) {
    if (!valid_key(key)) throw ConfigError("invalid kv key '" + key + "'");
    for (auto& e : entries_) {
        if (e.first == key) {
            e.second = std::move(value);
            return;
        }
    }
    entries_.emplace_back(key, std::move(value));
}

const std::string& KvDocument::raw(const std::string& key) const {
    for (const auto& e : entries_) {
        if (e.first == key) return e.second;
    }
    throw SchemaError("missing key '" + key + "'");
}

bool KvDocument::has(const std::string& key) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const auto& e) { return e.first == key; });
}

void KvDocument::set_string(const std::string& key, const std::string& value) {
    if (value.find('\n') != std::string::npos || value.find('\r') != std::string::npos)
        throw ConfigError("kv string value for '" + key + "' contains a newline");
    set_raw(key, value);
}

void KvDocument::set_i64(const std::string& key, std::int64_t value) {
    set_raw(key, std::to_string(value));
}

void KvDocument::set_u64(const std::string& key, std::uint64_t value) {
    set_raw(key, std::to_string(value));
}

void KvDocument::set_bool(const std::string& key, bool value) {
    set_raw(key, value ? "true" : "false");
}

void KvDocument::set_f64(const std::string& key, double value) {
    set_raw(key, f64_to_text(value));
}

void KvDocument::set_f64_array(const std::string& key, const std::vector<double>& values) {
    std::string bytes;
    bytes.reserve(values.size() * 8);
    for (double v : values) append_le_u64(bytes, std::bit_cast<std::uint64_t>(v));
    set_raw(key, "f64[" + std::to_string(values.size()) + "]:" +
                     base64_encode(reinterpret_cast<const unsigned char*>(bytes.data()),
                                   bytes.size()));
}

void KvDocument::set_i64_array(const std::string& key,
                               const std::vector<std::int64_t>& values) {
    std::string bytes;
    bytes.reserve(values.size() * 8);
    for (std::int64_t v : values) append_le_u64(bytes, static_cast<std::uint64_t>(v));
    set_raw(key, "i64[" + std::to_string(values.size()) + "]:" +
                     base64_encode(reinterpret_cast<const unsigned char*>(bytes.data()),
                                   bytes.size()));
}

std::string KvDocument::get_string(const std::string& key) const { return raw(key); }

std::string KvDocument::get_string_or(const std::string& key,
                                      const std::string& fallback) const {
    return has(key) ? raw(key) : fallback;
}

std::int64_t KvDocument::get_i64(const std::string& key) const {
    const std::string& s = raw(key);
    char* end = nullptr;
    long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw ParseError("key '" + key + "': cannot parse integer from '" + s + "'");
    return v;
}

std::uint64_t KvDocument::get_u64(const std::string& key) const {
    const std::string& s = raw(key);
    char* end = nullptr;
    unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw ParseError("key '" + key + "': cannot parse integer from '" + s + "'");
    return v;
}

bool KvDocument::get_bool(const std::string& key) const {
    const std::string& s = raw(key);
    if (s == "true") return true;
    if (s == "false") return false;
    throw ParseError("key '" + key + "': expected true/false, got '" + s + "'");
}

double KvDocument::get_f64(const std::string& key) const {
    return text_to_f64(raw(key), key);
}

namespace {

std::vector<unsigned char> decode_array(const std::string& value, const std::string& key,
                                        const char* tag) {
    const std::string prefix = std::string(tag) + "[";
    if (value.rfind(prefix, 0) != 0)
        throw ParseError("key '" + key + "': expected " + tag + " array");
    std::size_t close = value.find("]:");
    if (close == std::string::npos)
        throw ParseError("key '" + key + "': malformed array header");
    std::size_t n = std::stoull(value.substr(prefix.size(), close - prefix.size()));
    auto bytes = base64_decode(value.substr(close + 2));
    if (bytes.size() != n * 8)
        throw ParseError("key '" + key + "': array payload size mismatch");
    return bytes;
}

}  // namespace

std::vector<double> KvDocument::get_f64_array(const std::string& key) const {
    auto bytes = decode_array(raw(key), key, "f64");
    std::vector<double> out(bytes.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::bit_cast<double>(read_le_u64(bytes.data() + i * 8));
    return out;
}

std::vector<std::int64_t> KvDocument::get_i64_array(const std::string& key) const {
    auto bytes = decode_array(raw(key), key, "i64");
    std::vector<std::int64_t> out(bytes.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::int64_t>(read_le_u64(bytes.data() + i * 8));
    return out;
}

std::vector<std::string> KvDocument::keys() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.first);
    return out;
}

std::string KvDocument::to_text() const {
    std::ostringstream os;
    os << kHeader << '\n';
    for (const auto& e : entries_) os << e.first << " = " << e.second << '\n';
    return os.str();
}

KvDocument KvDocument::from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw SchemaError("empty kv document");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        throw SchemaError("unsupported kv header '" + line + "' (expected '" +
                          kHeader + "')");
    KvDocument doc;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::size_t sep = line.find(" = ");
        if (sep == std::string::npos)
            throw ParseError("kv line " + std::to_string(lineno) + ": missing ' = '");
        doc.set_raw(line.substr(0, sep), line.substr(sep + 3));
    }
    return doc;
}

void KvDocument::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << to_text();
    if (!out) throw IoError("failed writing '" + path + "'");
}

KvDocument KvDocument::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

}  // namespace hharnet
