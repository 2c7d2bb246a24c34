#include "meanfield/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace meanfield {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string collapse_ws(const std::string& s) {
    std::string out;
    bool in_ws = false;
    for (char c : s) {
        if (c == ' ' || c == '\t') {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty()) out.push_back(' ');
        in_ws = false;
        out.push_back(c);
    }
    return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                         ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                         ": empty section name");
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
        std::string full = section.empty() ? key : section + "." + key;
        if (cfg.entries_.count(full))
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                                     full + "'");
        cfg.entries_[full] = value;
        cfg.lines_[full] = lineno;
    }
    return cfg;
}

void KeyValueConfig::fail(const std::string& full_key, const std::string& what) const {
    auto it = lines_.find(full_key);
    std::string where = origin_;
    if (it != lines_.end()) where += ":" + std::to_string(it->second);
    throw std::runtime_error(where + ": " + what);
}

bool KeyValueConfig::has(const std::string& section, const std::string& key) const {
    return entries_.count(section.empty() ? key : section + "." + key) > 0;
}

std::string KeyValueConfig::get_string(const std::string& section, const std::string& key) const {
    std::string full = section.empty() ? key : section + "." + key;
    auto it = entries_.find(full);
    if (it == entries_.end())
        throw std::runtime_error(origin_ + ": missing required key '" + full + "'");
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& section, const std::string& key,
                                       const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

double KeyValueConfig::get_double(const std::string& section, const std::string& key) const {
    std::string full = section.empty() ? key : section + "." + key;
    std::string v = get_string(section, key);
    try {
        size_t used = 0;
        double out = std::stod(v, &used);
        if (trim(v.substr(used)).empty()) return out;
    } catch (const std::exception&) {
    }
    fail(full, "cannot parse '" + v + "' as a number for key '" + full + "'");
}

double KeyValueConfig::get_double(const std::string& section, const std::string& key,
                                  double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

long KeyValueConfig::get_long(const std::string& section, const std::string& key) const {
    std::string full = section.empty() ? key : section + "." + key;
    std::string v = get_string(section, key);
    try {
        size_t used = 0;
        long out = std::stol(v, &used);
        if (trim(v.substr(used)).empty()) return out;
    } catch (const std::exception&) {
    }
    fail(full, "cannot parse '" + v + "' as an integer for key '" + full + "'");
}

long KeyValueConfig::get_long(const std::string& section, const std::string& key,
                              long fallback) const {
    return has(section, key) ? get_long(section, key) : fallback;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& section,
                                                    const std::string& key) const {
    std::string full = section.empty() ? key : section + "." + key;
    std::string v = get_string(section, key);
    for (char& c : v)
        if (c == ',') c = ' ';
    std::istringstream ss(v);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) {
        try {
            size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            fail(full, "cannot parse list entry '" + tok + "' for key '" + full + "'");
        }
    }
    if (out.empty()) fail(full, "empty list for key '" + full + "'");
    return out;
}

std::vector<long> KeyValueConfig::get_long_list(const std::string& section,
                                                const std::string& key) const {
    std::vector<long> out;
    for (double v : get_double_list(section, key)) out.push_back(static_cast<long>(v));
    return out;
}

std::string KeyValueConfig::digest() const {
    std::uint64_t hash = 1469598103934665603ull;  // FNV offset basis
    auto mix = [&hash](const std::string& s) {
        for (unsigned char c : s) {
            hash ^= c;
            hash *= 1099511628211ull;  // FNV prime
        }
    };
    for (const auto& [key, value] : entries_) {  // std::map: already sorted
        mix(key);
        mix("=");
        mix(collapse_ws(value));
        mix("\n");
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buf);
}

}  // namespace meanfield
