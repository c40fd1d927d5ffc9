#pragma once

#include <string>
#include <vector>

#include "optree/plan.hpp"

namespace optree {

enum class Severity { error, warning };

struct Diagnostic {
    Severity level = Severity::error;
    std::string code;  // UnproducedKey, ArityMismatch, AggregateOverScalar, TypeMismatch, ...
    SourcePos pos;
    std::string message;
};

/// Static checks over a resolved plan. Never throws; an unresolved QUD is
/// itself reported as a diagnostic.
std::vector<Diagnostic> validate_plan(const PlanNode& plan);

/// `LEVEL code line:col message`
std::string format_diagnostic(const Diagnostic& d);
bool has_errors(const std::vector<Diagnostic>& diags);

/// Result shape an operator produces, as far as it can be known statically.
enum class Shape { events, groups, scalar, unknown };
Shape infer_shape(const PlanNode& plan);

}  // namespace optree
