#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

namespace micon::cli {

// Layered key-value run configuration: `[section]` headers, `key = value`
// lines, `#` comments, optional double quotes around values.  Process
// environment variables `MICON_<SECTION>_<KEY>` override (or introduce)
// entries; section names contain no underscore so the mapping is unambiguous.
// All lookup errors name the field as "<section>.<key>".
class Config {
  public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin);

    // scan the environment for MICON_* overrides; called by parse_*
    void apply_env_overrides();

    bool has(const std::string& sec, const std::string& key) const;
    void set(const std::string& sec, const std::string& key, const std::string& value);

    // required lookups throw ConfigError("missing field <sec>.<key>")
    std::string str(const std::string& sec, const std::string& key) const;
    std::string str(const std::string& sec, const std::string& key,
                    const std::string& dflt) const;
    double num(const std::string& sec, const std::string& key) const;
    double num(const std::string& sec, const std::string& key, double dflt) const;
    uint64_t uint(const std::string& sec, const std::string& key) const;
    uint64_t uint(const std::string& sec, const std::string& key, uint64_t dflt) const;
    bool boolean(const std::string& sec, const std::string& key, bool dflt) const;

    // comma-separated lists; empty value -> empty list
    std::vector<std::string> list(const std::string& sec, const std::string& key,
                                  const std::string& dflt) const;
    std::vector<uint64_t> uint_list(const std::string& sec, const std::string& key,
                                    const std::string& dflt) const;
    std::vector<size_t> size_list(const std::string& sec, const std::string& key,
                                  const std::string& dflt) const;

    // typo guard: rejects any key of `sec` outside `allowed`
    void check_known(const std::string& sec, std::initializer_list<const char*> allowed) const;

    // FNV-1a over the normalized entries (env overrides included)
    uint64_t content_hash() const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::string origin_ = "<none>";
};

}  // namespace micon::cli
