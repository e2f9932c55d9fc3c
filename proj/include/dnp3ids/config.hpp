#pragma once

#include "dnp3ids/rules.hpp"
#include "dnp3ids/util.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dnp3ids::cfg {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key=value file. '#' starts a comment, blank lines are skipped,
// later keys override earlier ones. Keys are case-sensitive.
class Config {
public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_text(const std::string& text);

    bool has(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback = "") const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    void set(const std::string& key, const std::string& value);

    // Keys that look like variable definitions (ALL_CAPS name, CIDR list
    // value) collected into a rule-variable table, e.g.
    //   MASTERS=10.0.0.1/32,10.0.0.3/32
    rules::VarTable variables() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

} // namespace dnp3ids::cfg
