#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace meanfield {

// Flat "key = value" text with [section] headers and '#' comments. Values are
// kept verbatim (trimmed); typed accessors parse on demand and report the
// defining line on failure.
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long get_long(const std::string& section, const std::string& key) const;
    long get_long(const std::string& section, const std::string& key, long fallback) const;
    std::vector<double> get_double_list(const std::string& section, const std::string& key) const;
    std::vector<long> get_long_list(const std::string& section, const std::string& key) const;

    // FNV-1a 64 over the canonical form "section.key=value" sorted by key,
    // whitespace collapsed: stable under reordering, comments, and blank
    // lines. 16 hex digits.
    std::string digest() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;  // "section.key" -> value
    std::map<std::string, int> lines_;            // for error messages
    std::string origin_;

    [[noreturn]] void fail(const std::string& full_key, const std::string& what) const;
};

}  // namespace meanfield
