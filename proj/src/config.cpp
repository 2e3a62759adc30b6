#include "slag/config.hpp"

#include <fstream>

#include "slag/errors.hpp"

namespace slag {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) {
        return "";
    }
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw DomainError("cannot open config file " + path);
    }
    ScenarioConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw DomainError("config " + path + ":" + std::to_string(lineno) +
                              ": expected key = value");
        }
        cfg.kv_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

void ScenarioConfig::apply_override(const std::string& key_equals_value) {
    const auto eq = key_equals_value.find('=');
    if (eq == std::string::npos) {
        throw DomainError("--set expects key=value, got " + key_equals_value);
    }
    kv_[trim(key_equals_value.substr(0, eq))] = trim(key_equals_value.substr(eq + 1));
}

std::string ScenarioConfig::get(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double ScenarioConfig::get_double(const std::string& key, double fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) {
        return fallback;
    }
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw DomainError("config key " + key + " is not a number: " + it->second);
    }
}

int ScenarioConfig::get_int(const std::string& key, int fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) {
        return fallback;
    }
    try {
        return std::stoi(it->second);
    } catch (const std::exception&) {
        throw DomainError("config key " + key + " is not an integer: " + it->second);
    }
}

unsigned long long ScenarioConfig::get_seed(const std::string& key,
                                            unsigned long long fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) {
        return fallback;
    }
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw DomainError("config key " + key + " is not a seed: " + it->second);
    }
}

} // namespace slag
