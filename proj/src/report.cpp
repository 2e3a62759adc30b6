#include "slag/report.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "slag/errors.hpp"

namespace slag {

std::string to_string(SourceTag tag) {
    switch (tag) {
    case SourceTag::paper: return "paper";
    case SourceTag::derived: return "derived";
    case SourceTag::trivial: return "trivial";
    }
    return "?";
}

Check Check::absolute(std::string name, double value, double target, double tolerance,
                      SourceTag tag) {
    Check c{std::move(name), value, target, tolerance, tag, false};
    c.pass = std::isfinite(value) && std::abs(value - target) <= tolerance;
    return c;
}

Check Check::relative(std::string name, double value, double target,
                      double rel_tolerance, SourceTag tag) {
    Check c{std::move(name), value, target, rel_tolerance, tag, false};
    c.pass = std::isfinite(value) &&
             std::abs(value - target) <= rel_tolerance * std::abs(target);
    return c;
}

Check Check::at_least(std::string name, double value, double target, double tolerance,
                      SourceTag tag) {
    Check c{std::move(name), value, target, tolerance, tag, false};
    c.pass = std::isfinite(value) && value >= target - tolerance;
    return c;
}

Check Check::at_most(std::string name, double value, double target, double tolerance,
                     SourceTag tag) {
    Check c{std::move(name), value, target, tolerance, tag, false};
    c.pass = std::isfinite(value) && value <= target + tolerance;
    return c;
}

Check Check::boolean(std::string name, bool value, SourceTag tag) {
    Check c{std::move(name), value ? 1.0 : 0.0, 1.0, 0.0, tag, value};
    return c;
}

bool ExperimentReport::all_passed() const {
    for (const auto& c : checks) {
        if (!c.pass) {
            return false;
        }
    }
    return true;
}

std::string ExperimentReport::to_json() const {
    nlohmann::json j;
    j["scenario"] = scenario;
    j["inputs"] = inputs;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) {
        j["checks"].push_back({{"name", c.name},
                               {"value", c.value},
                               {"target", c.target},
                               {"tolerance", c.tolerance},
                               {"source", to_string(c.source)},
                               {"pass", c.pass}});
    }
    j["quantities"] = quantities;
    j["verdict"] = verdict.empty() ? (all_passed() ? "pass" : "fail") : verdict;
    j["all_passed"] = all_passed();
    j["artifacts"] = artifacts;
    j["timing_ms"] = timing_ms;
    return j.dump(2);
}

void ExperimentReport::write_series_csv(const std::string& dir) {
    for (const auto& [name, values] : series) {
        const std::string path = dir + "/" + name + ".csv";
        std::ofstream f(path);
        if (!f) {
            throw InternalError("cannot open " + path + " for writing");
        }
        f.precision(17);
        f << "index," << name << "\n";
        for (size_t i = 0; i < values.size(); ++i) {
            f << i << "," << values[i] << "\n";
        }
        artifacts.push_back(name + ".csv");
    }
}

void ExperimentReport::write_json(const std::string& path) const {
    std::ofstream f(path);
    if (!f) {
        throw InternalError("cannot open " + path + " for writing");
    }
    f << to_json() << "\n";
}

} // namespace slag
