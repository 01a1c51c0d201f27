#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "holdswitch/error.hpp"

namespace holdswitch {

/// Flat `key = value` text. Blank lines and lines starting with `#` are
/// skipped. Underscores in keys are read as dashes so `agent_a` and
/// `agent-a` name the same setting.
inline std::string canonical_key(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::map<std::string, std::string> parse_config_text(const std::string& text, const std::set<std::string>& allowed,
                                                            const std::string& source = "config") {
    std::map<std::string, std::string> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string line = trim(std::string_view(text).substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        const auto where = source + ":" + std::to_string(line_no);
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const auto key = canonical_key(trim(std::string_view(line).substr(0, eq)));
        if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
        if (out.contains(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
        out[key] = trim(std::string_view(line).substr(eq + 1));
    }
    return out;
}

inline std::map<std::string, std::string> load_config_file(const std::string& path, const std::set<std::string>& allowed) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), allowed, path);
}

}  // namespace holdswitch
