// Full acceptance suite at seed 1; one line per criterion, exit 1 on any failure.
#include "criticalwave/app/run.hpp"
#include "criticalwave/app/suite.hpp"

#include <filesystem>
#include <iostream>

int main(int argc, char** argv)
{
    using namespace criticalwave::app;
    SuiteOptions options;
    options.kind = SuiteKind::full;
    options.seed = 1;
    options.output = argc > 1 ? std::filesystem::path(argv[1]) : std::filesystem::path("acceptance_output");
    options.threads = thread_limit();
    std::filesystem::remove_all(options.output);
    const auto report = run_suite(options, std::cout);
    int passed = 0;
    for (const auto& c : report.criteria)
        passed += c.passed() ? 1 : 0;
    std::cout << passed << "/" << report.criteria.size() << " criteria passed in " << report.seconds << " s\n";
    return report.passed() ? 0 : 1;
}
