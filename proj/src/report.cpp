#include "mvop/report.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace mvop {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void print_summary(std::ostream& os, const std::vector<CheckRow>& rows) {
    os << "check,residual,tolerance,pass\n";
    for (const auto& r : rows)
        os << r.name << "," << format_double(r.residual) << "," << format_double(r.tolerance)
           << "," << (r.pass ? "PASS" : "FAIL") << "\n";
}

bool all_pass(const std::vector<CheckRow>& rows) {
    for (const auto& r : rows)
        if (!r.pass) return false;
    return true;
}

std::string checks_to_csv(const std::vector<CheckRow>& rows) {
    std::string out = "check,residual,tolerance,pass\n";
    for (const auto& r : rows) {
        out += r.name;
        out += ",";
        out += format_double(r.residual);
        out += ",";
        out += format_double(r.tolerance);
        out += ",";
        out += r.pass ? "1" : "0";
        out += "\n";
    }
    return out;
}

std::string checks_to_json(const std::string& command, std::uint64_t seed,
                           const std::vector<CheckRow>& rows) {
    std::string out = "{\n  \"schema\": 1,\n  \"command\": \"" + command + "\",\n";
    out += "  \"seed\": " + std::to_string(seed) + ",\n  \"checks\": [\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out += "    {\"name\": \"" + rows[i].name + "\", \"residual\": " +
               format_double(rows[i].residual) + ", \"tolerance\": " +
               format_double(rows[i].tolerance) + ", \"pass\": " +
               (rows[i].pass ? "true" : "false") + "}";
        out += (i + 1 < rows.size()) ? ",\n" : "\n";
    }
    out += "  ],\n  \"all_pass\": ";
    out += all_pass(rows) ? "true" : "false";
    out += "\n}\n";
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << content;
}

}  // namespace mvop
