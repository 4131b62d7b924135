#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace wloo {

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
};

// The full set of accepted keys; anything else is rejected.
const std::vector<ConfigKey>& config_schema();
bool is_config_key(const std::string& key);

// Flat `key = value` text with dotted keys, `#` comments and optional double
// quotes around values.
class Config {
public:
    Config();  // all defaults

    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    // Merges WLOO_<KEY> variables, with dots and dashes in the key written as underscores.
    void apply_env(const std::map<std::string, std::string>& env);
    void apply_process_env();

    void set(const std::string& key, const std::string& value);
    const std::string& raw(const std::string& key) const;
    bool is_set(const std::string& key) const;  // explicitly given, not defaulted

    std::string str(const std::string& key) const { return raw(key); }
    double real(const std::string& key) const;
    long long integer(const std::string& key) const;
    std::uint64_t u64(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;  // comma separated, may be empty

    std::string serialize(bool include_defaults = false) const;
    bool operator==(const Config& o) const { return values_ == o.values_ && explicit_ == o.explicit_; }

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, bool> explicit_;
};

std::string env_name(const std::string& key);

}  // namespace wloo
