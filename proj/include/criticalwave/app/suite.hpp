#pragma once

#include "criticalwave/app/assertion.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace criticalwave::app {

enum class SuiteKind
{
    fast,
    full
};

SuiteKind parse_suite_kind(const std::string& name);
std::string to_string(SuiteKind kind);

struct SuiteOptions
{
    SuiteKind kind = SuiteKind::fast;
    std::uint64_t seed = 1;
    std::filesystem::path output;
    int threads = 1;
    /// Criterion 13 (reruns and time budget); off for the inner reruns.
    bool determinism_check = true;
};

struct CriterionResult
{
    int id = 0;
    std::string title;
    std::vector<Assertion> checks;
    std::string error; ///< exception text when the criterion aborted
    double seconds = 0.0;

    bool passed() const { return error.empty() && !checks.empty() && all_passed(checks); }
    /// "PASS C07 dynamics: check = value <= limit; ..."
    std::string line() const;
};

struct SuiteReport
{
    SuiteKind kind = SuiteKind::fast;
    std::uint64_t seed = 0;
    std::vector<CriterionResult> criteria;
    double seconds = 0.0;

    bool passed() const;
};

inline constexpr int kCriterionCount = 13;

/// Runs the acceptance criteria and writes one data directory per criterion
/// under options.output, plus report.json and manifest.json. Each criterion
/// line is written to `log` as soon as it (and every earlier one) is done.
SuiteReport run_suite(const SuiteOptions& options, std::ostream& log);

/// `criticalwave verify`: exit 0 when every criterion passes, 1 otherwise.
int verify_command(SuiteKind kind, std::uint64_t seed, const std::filesystem::path& output, std::ostream& out,
                   std::ostream& err);

/// Regular files below `a` and `b` (relative paths, sorted) that are missing
/// on one side or differ in content. `skip` names top-level entries to ignore.
std::vector<std::string> tree_differences(const std::filesystem::path& a, const std::filesystem::path& b,
                                          const std::vector<std::string>& skip = {});

} // namespace criticalwave::app
