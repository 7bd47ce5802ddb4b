#pragma once
#include <ostream>
#include <string>
#include <vector>

namespace mvop {

// One verification line: named check, measured residual against a tolerance.
struct CheckRow {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;

    static CheckRow of(std::string name, double residual, double tolerance) {
        CheckRow r{std::move(name), residual, tolerance, residual < tolerance};
        return r;
    }
    static CheckRow flag(std::string name, bool ok) {
        CheckRow r{std::move(name), ok ? 0.0 : 1.0, 0.5, ok};
        return r;
    }
};

/// Fixed "%.17g" rendering so reruns are byte-identical.
std::string format_double(double v);

void print_summary(std::ostream& os, const std::vector<CheckRow>& rows);
bool all_pass(const std::vector<CheckRow>& rows);

std::string checks_to_csv(const std::vector<CheckRow>& rows);
std::string checks_to_json(const std::string& command, std::uint64_t seed,
                           const std::vector<CheckRow>& rows);

void write_file(const std::string& path, const std::string& content);

}  // namespace mvop
