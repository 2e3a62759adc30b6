#pragma once

#include <map>
#include <string>
#include <vector>

namespace slag {

enum class SourceTag { paper, derived, trivial };

std::string to_string(SourceTag tag);

/// One verified expectation: a computed value against a target and tolerance,
/// tagged with where the target comes from.
struct Check {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    SourceTag source = SourceTag::derived;
    bool pass = false;

    static Check absolute(std::string name, double value, double target,
                          double tolerance, SourceTag tag);
    static Check relative(std::string name, double value, double target,
                          double rel_tolerance, SourceTag tag);
    /// value must be at least target - tolerance.
    static Check at_least(std::string name, double value, double target,
                          double tolerance, SourceTag tag);
    /// value must be at most target + tolerance.
    static Check at_most(std::string name, double value, double target,
                         double tolerance, SourceTag tag);
    static Check boolean(std::string name, bool value, SourceTag tag);
};

struct ExperimentReport {
    std::string scenario;
    std::map<std::string, std::string> inputs;
    std::vector<Check> checks;
    std::string verdict;
    std::vector<std::string> artifacts;
    double timing_ms = 0.0;
    std::map<std::string, double> quantities; // named computed values
    // Columnar data emitted as companion CSVs next to the report.
    std::map<std::string, std::vector<double>> series;

    bool all_passed() const;
    void add(Check c) { checks.push_back(std::move(c)); }
    std::string to_json() const;
    void write_json(const std::string& path) const;
    /// Write every series as <name>.csv under dir and record it in artifacts.
    void write_series_csv(const std::string& dir);
};

} // namespace slag
