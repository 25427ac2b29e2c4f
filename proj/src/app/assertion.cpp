#include "criticalwave/app/assertion.hpp"

#include "criticalwave/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace criticalwave::app {

namespace {

Assertion make(std::string name, double value, double limit, Assertion::Op op)
{
    Assertion a{std::move(name), value, limit, op, false};
    switch (op) {
    case Assertion::Op::at_most:
        a.passed = value <= limit;
        break;
    case Assertion::Op::at_least:
        a.passed = value >= limit;
        break;
    case Assertion::Op::below:
        a.passed = value < limit;
        break;
    case Assertion::Op::above:
        a.passed = value > limit;
        break;
    }
    // NaN compares false in every branch
    return a;
}

std::string short_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

} // namespace

Assertion Assertion::at_most(std::string name, double value, double limit) { return make(std::move(name), value, limit, Op::at_most); }
Assertion Assertion::at_least(std::string name, double value, double limit) { return make(std::move(name), value, limit, Op::at_least); }
Assertion Assertion::below(std::string name, double value, double limit) { return make(std::move(name), value, limit, Op::below); }
Assertion Assertion::above(std::string name, double value, double limit) { return make(std::move(name), value, limit, Op::above); }

Assertion Assertion::holds(std::string name, bool condition)
{
    return make(std::move(name), condition ? 1.0 : 0.0, 1.0, Op::at_least);
}

std::string Assertion::op_symbol() const
{
    switch (op) {
    case Op::at_most:
        return "<=";
    case Op::at_least:
        return ">=";
    case Op::below:
        return "<";
    case Op::above:
        return ">";
    }
    return "?";
}

std::string Assertion::summary() const
{
    auto v = short_number(value), l = short_number(limit);
    if (v == l && value != limit) {
        v = fmt17(value);
        l = fmt17(limit);
    }
    return name + " = " + v + " " + op_symbol() + " " + l;
}

bool all_passed(const std::vector<Assertion>& checks)
{
    return std::ranges::all_of(checks, [](const Assertion& a) { return a.passed; });
}

} // namespace criticalwave::app
