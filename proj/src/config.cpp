#include "riskmmd/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace riskmmd {

namespace {
std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str(), path);
}

Config Config::from_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        if (!section.empty()) key = section + "." + key;
        cfg.values_[key] = value;
        cfg.lines_[key] = lineno;
    }
    return cfg;
}

void Config::missing(const std::string& key) const {
    throw ConfigError(origin_ + ": missing required key `" + key + "`");
}

std::string Config::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) missing(key);
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
    std::string raw = get_string(key);
    try {
        std::size_t pos = 0;
        double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ":" + std::to_string(lines_.count(key) ? lines_.at(key) : 0) +
                          ": key `" + key + "` is not a number: " + raw);
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long Config::get_int(const std::string& key) const {
    std::string raw = get_string(key);
    try {
        std::size_t pos = 0;
        long v = std::stol(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ":" + std::to_string(lines_.count(key) ? lines_.at(key) : 0) +
                          ": key `" + key + "` is not an integer: " + raw);
    }
}

long Config::get_int(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    std::string raw = get_string(key);
    std::transform(raw.begin(), raw.end(), raw.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    throw ConfigError(origin_ + ": key `" + key + "` is not a boolean: " + raw);
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    std::string raw = get_string(key);
    std::vector<std::string> out;
    std::istringstream in(raw);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<long> Config::get_int_list(const std::string& key) const {
    std::vector<long> out;
    for (const std::string& item : get_list(key)) {
        try {
            out.push_back(std::stol(item));
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": key `" + key + "` has a non-integer entry: " + item);
        }
    }
    return out;
}

std::uint64_t Config::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [key, value] : values_) {
        mix(key);
        mix("=");
        mix(value);
        mix("\n");
    }
    return h;
}

}  // namespace riskmmd
