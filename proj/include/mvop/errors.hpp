#pragma once
#include <stdexcept>
#include <string>

namespace mvop {

// Domain errors thrown by construction and evaluation routines.
// All derive from std::runtime_error so callers can catch coarsely.

struct ZeroWeight : std::runtime_error {
    explicit ZeroWeight(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateSeed : std::runtime_error {
    explicit DegenerateSeed(const std::string& what) : std::runtime_error(what) {}
};

struct UnscalableBasis : std::runtime_error {
    int row;
    explicit UnscalableBasis(int r, const std::string& what)
        : std::runtime_error(what), row(r) {}
};

struct NegativeCell : std::runtime_error {
    int i, j;
    NegativeCell(int i_, int j_, const std::string& what)
        : std::runtime_error(what), i(i_), j(j_) {}
};

struct DegreeTooHigh : std::runtime_error {
    explicit DegreeTooHigh(const std::string& what) : std::runtime_error(what) {}
};

struct OutOfSupport : std::runtime_error {
    explicit OutOfSupport(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct DomainMismatch : std::runtime_error {
    explicit DomainMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasibleBasis : std::runtime_error {
    explicit InfeasibleBasis(const std::string& what) : std::runtime_error(what) {}
};

struct NegativeQ : std::runtime_error {
    explicit NegativeQ(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasibleKernel : std::runtime_error {
    explicit InfeasibleKernel(const std::string& what) : std::runtime_error(what) {}
};

struct NegativeRate : std::runtime_error {
    int from, to;
    NegativeRate(int i, int j, const std::string& what)
        : std::runtime_error(what), from(i), to(j) {}
};

struct NoLancasterForm : std::runtime_error {
    explicit NoLancasterForm(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mvop
