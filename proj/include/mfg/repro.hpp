#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mfg/json_out.hpp"

namespace mfg::repro {

struct Assertion {
    std::string name;
    double lhs;
    double rhs;
    bool pass;
};

/// lhs <= rhs, lhs >= rhs, and |value - target| <= tol (lhs = value, rhs = target).
Assertion le(std::string name, double lhs, double rhs);
Assertion ge(std::string name, double lhs, double rhs);
Assertion near(std::string name, double value, double target, double tol);

struct CaseResult {
    std::string id;
    out::Json results = out::Json::object();
    std::vector<Assertion> assertions;
    bool passed() const;
};

const std::vector<std::string>& case_ids();

/// Scripted checks for one worked example. Unknown ids raise DomainError.
CaseResult run_case(std::string_view id);

}  // namespace mfg::repro
