#include "dnp3ids/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace dnp3ids::cfg {

using namespace util;

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

Config Config::from_text(const std::string& text) {
    Config c;
    int lineno = 0;
    for (const auto& raw : split(text, '\n')) {
        ++lineno;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        c.entries_[key] = value;
    }
    return c;
}

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

std::string Config::get(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc{} || p != it->second.data() + it->second.size())
        throw ConfigError("key " + key + ": not an unsigned integer: " + it->second);
    return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError("key " + key + ": not a boolean: " + v);
}

void Config::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

namespace {

bool all_caps_name(const std::string& s) {
    if (s.empty()) return false;
    for (char ch : s)
        if (!(std::isupper(static_cast<unsigned char>(ch)) || ch == '_' ||
              std::isdigit(static_cast<unsigned char>(ch))))
            return false;
    return !std::isdigit(static_cast<unsigned char>(s[0]));
}

} // namespace

rules::VarTable Config::variables() const {
    rules::VarTable vars;
    for (const auto& [key, value] : entries_) {
        if (!all_caps_name(key)) continue;
        std::vector<Cidr> cidrs;
        bool ok = !value.empty();
        for (const auto& part : split(value, ',')) {
            auto c = parse_cidr(trim(part));
            if (!c) {
                ok = false;
                break;
            }
            cidrs.push_back(*c);
        }
        if (ok) vars[key] = std::move(cidrs);
    }
    return vars;
}

} // namespace dnp3ids::cfg
