#pragma once

#include "drspcrl/robust_core.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace drspcrl {

struct PropertyResult {
    std::string suite;
    std::string name;
    bool passed = false;
    double max_error = 0.0;
    double tolerance = 0.0;
    double seconds = 0.0;
    std::string detail;
};

using DualSolverFn = std::function<DualSolution(const ValueSupport&, double epsilon)>;

struct VerifyOptions {
    /// Solver under test; empty means solve_dual with default settings.
    DualSolverFn dual_solver;
    std::uint64_t seed = 20240601;
};

/// dual, envelope, vi, scheduler, gradients, all.
const std::vector<std::string>& verify_scopes();

std::vector<PropertyResult> verify_dual(const VerifyOptions& options);
std::vector<PropertyResult> verify_envelope(const VerifyOptions& options);
std::vector<PropertyResult> verify_vi(const VerifyOptions& options);
std::vector<PropertyResult> verify_scheduler(const VerifyOptions& options);
std::vector<PropertyResult> verify_gradients(const VerifyOptions& options);

/// Throws std::invalid_argument for an unknown scope.
std::vector<PropertyResult> run_verify(const std::string& scope, const VerifyOptions& options = {});

/// One line per property; returns true when all passed.
bool print_results(const std::vector<PropertyResult>& results, std::ostream& out);

/// max over entries of |a - b| / max(|a|, |b|, floor).
double max_relative_error(const Vector& a, const Vector& b, double floor = 1e-3);

/// Central differences of f at x, step h per coordinate.
Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-6);

} // namespace drspcrl
