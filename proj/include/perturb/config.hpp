#pragma once

// Flat key-value experiment configs with [section] headers.  Keys inside a
// section are addressed as "section.key"; '#' and ';' start comments.

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace perturb {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Config {
public:
    /// Duplicate keys, lines without '=' and empty keys throw ConfigError
    /// naming the line.
    static Config parse(const std::string& text, const std::string& origin = "<config>");
    static Config load(const std::string& path);

    bool has(const std::string& key) const {
        read_.insert(key);
        return values_.count(key) > 0;
    }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::string str(const std::string& key) const;
    std::string str(const std::string& key, const std::string& fallback) const;
    double num(const std::string& key) const;
    double num(const std::string& key, double fallback) const;
    std::int64_t integer(const std::string& key) const;
    std::int64_t integer(const std::string& key, std::int64_t fallback) const;
    std::uint64_t u64(const std::string& key) const;
    std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    /// Comma- or whitespace-separated numbers.
    std::vector<double> nums(const std::string& key) const;
    std::vector<double> nums(const std::string& key, const std::vector<double>& fallback) const;

    std::vector<std::string> keys() const;
    /// Throws ConfigError listing keys outside `allowed`.
    void require_known(const std::set<std::string>& allowed) const;
    /// Throws ConfigError listing keys nothing has looked up (usually typos).
    void require_all_read() const;

private:
    std::map<std::string, std::string> values_;
    std::string origin_;
    mutable std::set<std::string> read_;
};

}  // namespace perturb
