#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "micon/config.hpp"
#include "micon/errors.hpp"

extern char** environ;

namespace micon::cli {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// strips an unquoted trailing comment, then surrounding quotes if present
std::string parse_value(const std::string& raw, const std::string& where) {
    std::string v = trim(raw);
    if (!v.empty() && v.front() == '"') {
        const size_t end = v.find('"', 1);
        if (end == std::string::npos) throw ConfigError(where + ": unterminated quote");
        const std::string rest = trim(v.substr(end + 1));
        if (!rest.empty() && rest[0] != '#')
            throw ConfigError(where + ": trailing characters after quoted value");
        return v.substr(1, end - 1);
    }
    const size_t hash = v.find('#');
    if (hash != std::string::npos) v = trim(v.substr(0, hash));
    return v;
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = origin + " line " + std::to_string(line_no);
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(where + ": malformed section header");
            section = lower(trim(s.substr(1, s.size() - 2)));
            if (section.empty()) throw ConfigError(where + ": empty section name");
            if (section.find('_') != std::string::npos)
                throw ConfigError(where + ": section names may not contain '_'");
            cfg.sections_[section];  // sections may legitimately be empty
            continue;
        }
        const size_t eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        if (section.empty()) throw ConfigError(where + ": key outside any [section]");
        const std::string key = lower(trim(s.substr(0, eq)));
        if (key.empty()) throw ConfigError(where + ": empty key");
        cfg.sections_[section][key] = parse_value(s.substr(eq + 1), where);
    }
    cfg.apply_env_overrides();
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

void Config::apply_env_overrides() {
    for (char** e = environ; e && *e; ++e) {
        const std::string entry = *e;
        if (entry.rfind("MICON_", 0) != 0) continue;
        const size_t eq = entry.find('=');
        if (eq == std::string::npos) continue;
        const std::string name = entry.substr(6, eq - 6);  // SECTION_KEY
        const size_t us = name.find('_');
        if (us == std::string::npos || us == 0 || us + 1 >= name.size()) continue;
        sections_[lower(name.substr(0, us))][lower(name.substr(us + 1))] = entry.substr(eq + 1);
    }
}

bool Config::has(const std::string& sec, const std::string& key) const {
    auto s = sections_.find(sec);
    return s != sections_.end() && s->second.count(key) > 0;
}

void Config::set(const std::string& sec, const std::string& key, const std::string& value) {
    sections_[sec][key] = value;
}

std::string Config::str(const std::string& sec, const std::string& key) const {
    auto s = sections_.find(sec);
    if (s != sections_.end()) {
        auto k = s->second.find(key);
        if (k != s->second.end()) return k->second;
    }
    throw ConfigError("missing field " + sec + "." + key);
}

std::string Config::str(const std::string& sec, const std::string& key,
                        const std::string& dflt) const {
    return has(sec, key) ? str(sec, key) : dflt;
}

double Config::num(const std::string& sec, const std::string& key) const {
    const std::string v = str(sec, key);
    try {
        size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("field " + sec + "." + key + ": '" + v + "' is not a number");
    }
}

double Config::num(const std::string& sec, const std::string& key, double dflt) const {
    return has(sec, key) ? num(sec, key) : dflt;
}

uint64_t Config::uint(const std::string& sec, const std::string& key) const {
    const std::string v = str(sec, key);
    try {
        size_t used = 0;
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        const uint64_t u = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ConfigError("field " + sec + "." + key + ": '" + v +
                          "' is not a non-negative integer");
    }
}

uint64_t Config::uint(const std::string& sec, const std::string& key, uint64_t dflt) const {
    return has(sec, key) ? uint(sec, key) : dflt;
}

bool Config::boolean(const std::string& sec, const std::string& key, bool dflt) const {
    if (!has(sec, key)) return dflt;
    const std::string v = lower(str(sec, key));
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError("field " + sec + "." + key + ": '" + v + "' is not a boolean");
}

std::vector<std::string> Config::list(const std::string& sec, const std::string& key,
                                      const std::string& dflt) const {
    const std::string v = has(sec, key) ? str(sec, key) : dflt;
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

std::vector<uint64_t> Config::uint_list(const std::string& sec, const std::string& key,
                                        const std::string& dflt) const {
    std::vector<uint64_t> out;
    for (const auto& tok : list(sec, key, dflt)) {
        try {
            size_t used = 0;
            out.push_back(std::stoull(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("field " + sec + "." + key + ": '" + tok + "' is not an integer");
        }
    }
    return out;
}

std::vector<size_t> Config::size_list(const std::string& sec, const std::string& key,
                                      const std::string& dflt) const {
    const auto u = uint_list(sec, key, dflt);
    return std::vector<size_t>(u.begin(), u.end());
}

void Config::check_known(const std::string& sec,
                         std::initializer_list<const char*> allowed) const {
    auto s = sections_.find(sec);
    if (s == sections_.end()) return;
    for (const auto& [key, value] : s->second) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError("unknown field " + sec + "." + key);
    }
}

uint64_t Config::content_hash() const {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0x1f;
        h *= 1099511628211ull;
    };
    for (const auto& [sec, kv] : sections_) {
        mix(sec);
        for (const auto& [k, v] : kv) {
            mix(k);
            mix(v);
        }
    }
    return h;
}

}  // namespace micon::cli
