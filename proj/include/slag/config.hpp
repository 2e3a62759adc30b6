#pragma once

#include <map>
#include <string>

namespace slag {

/// Flat key = value configuration with '#' comments and command-line
/// overrides; every scenario reads its parameters from one of these.
class ScenarioConfig {
public:
    ScenarioConfig() = default;

    static ScenarioConfig from_file(const std::string& path);
    void apply_override(const std::string& key_equals_value);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    unsigned long long get_seed(const std::string& key, unsigned long long fallback) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

} // namespace slag
