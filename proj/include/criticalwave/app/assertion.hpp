#pragma once

#include <string>
#include <vector>

namespace criticalwave::app {

/// One numeric check: `value` compared against `limit`.
struct Assertion
{
    enum class Op
    {
        at_most,
        at_least,
        below,
        above
    };

    std::string name;
    double value = 0.0;
    double limit = 0.0;
    Op op = Op::at_most;
    bool passed = false;

    static Assertion at_most(std::string name, double value, double limit);
    static Assertion at_least(std::string name, double value, double limit);
    static Assertion below(std::string name, double value, double limit);
    static Assertion above(std::string name, double value, double limit);
    /// value is 1 for true and 0 for false; the limit is 1.
    static Assertion holds(std::string name, bool condition);

    std::string op_symbol() const;
    /// "name = value <= limit", values with 3 significant digits.
    std::string summary() const;
};

bool all_passed(const std::vector<Assertion>& checks);

} // namespace criticalwave::app
