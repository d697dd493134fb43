#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace riskmmd {

// Raised for malformed or incomplete configuration; maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key = value configuration with optional [section] headers; a key
// inside [section] is addressed as "section.key". '#' starts a comment.
class Config {
public:
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;  // comma separated
    std::vector<long> get_int_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    // FNV-1a over the sorted key=value pairs; stamped into emitted records.
    std::uint64_t hash() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;  // key -> source line, for diagnostics
    std::string origin_;

    [[noreturn]] void missing(const std::string& key) const;
};

}  // namespace riskmmd
