#include "perturb/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace perturb {

namespace {

// The INI reader only knows whole-line ';' comments; strip '#' and ';'
// anywhere so trailing comments work.  Line numbers are preserved.
std::string strip_comments(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const auto cut = line.find_first_of("#;");
        if (cut != std::string::npos) line.erase(cut);
        out << line << '\n';
    }
    return out.str();
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(strip_comments(text));
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    Config c;
    c.origin_ = origin;
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            // Either a top-level key or a section with no keys.
            if (!node.data().empty()) c.values_[name] = node.data();
            continue;
        }
        for (const auto& [key, leaf] : node) c.values_[name + "." + key] = leaf.data();
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
}

std::string Config::str(const std::string& key) const {
    read_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(origin_ + ": missing key '" + key + "'");
    return it->second;
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
}

double Config::num(const std::string& key) const {
    const std::string s = str(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "' is not a number: '" + s + "'");
    }
}

double Config::num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }

std::int64_t Config::integer(const std::string& key) const {
    const std::string s = str(key);
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError(origin_ + ": key '" + key + "' is not an integer: '" + s + "'");
    return v;
}

std::int64_t Config::integer(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
}

std::uint64_t Config::u64(const std::string& key) const {
    const std::string s = str(key);
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError(origin_ + ": key '" + key + "' is not an unsigned integer: '" + s + "'");
    return v;
}

std::uint64_t Config::u64(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? u64(key) : fallback;
}

bool Config::flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string s = str(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(origin_ + ": key '" + key + "' is not a boolean: '" + s + "'");
}

std::vector<double> Config::nums(const std::string& key) const {
    std::string s = str(key);
    for (char& c : s) {
        if (c == ',') c = ' ';
    }
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": key '" + key + "' has a non-numeric entry '" + tok + "'");
        }
    }
    return out;
}

std::vector<double> Config::nums(const std::string& key, const std::vector<double>& fallback) const {
    return has(key) ? nums(key) : fallback;
}

std::vector<std::string> Config::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
}

void Config::require_known(const std::set<std::string>& allowed) const {
    std::string bad;
    for (const auto& [k, v] : values_) {
        if (!allowed.count(k)) bad += (bad.empty() ? "" : ", ") + k;
    }
    if (!bad.empty()) throw ConfigError(origin_ + ": unknown keys: " + bad);
}

void Config::require_all_read() const {
    std::string bad;
    for (const auto& [k, v] : values_) {
        if (!read_.count(k)) bad += (bad.empty() ? "" : ", ") + k;
    }
    if (!bad.empty()) throw ConfigError(origin_ + ": keys not used by this run: " + bad);
}

}  // namespace perturb
