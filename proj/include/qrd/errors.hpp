#pragma once

#include <stdexcept>
#include <string>

namespace qrd {

enum class ErrorKind {
    UnsupportedDomain,
    DegenerateBoundary,
    PointOutsideDomain,
    SolverDiverged,
    ToleranceNotMet,
    AreaMismatch,
    DegenerateConstraint,
    CflViolation,
    LineSearchFailed,
    NonPositiveDensity,
    BadGridFile,
    BadSnapshot,
    BadConfig,
    IoError,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg)
        : std::runtime_error(std::move(msg)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

    // context payloads, meaningful for specific kinds
    double achieved_residual = 0.0;   // ToleranceNotMet
    double interior_res = 0.0;        // LineSearchFailed
    double boundary_res = 0.0;        // LineSearchFailed

private:
    ErrorKind kind_;
};

inline Error tolerance_not_met(std::string msg, double achieved) {
    Error e(ErrorKind::ToleranceNotMet, std::move(msg));
    e.achieved_residual = achieved;
    return e;
}

inline Error line_search_failed(std::string msg, double ires, double bres) {
    Error e(ErrorKind::LineSearchFailed, std::move(msg));
    e.interior_res = ires;
    e.boundary_res = bres;
    return e;
}

}  // namespace qrd
