// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Exit status 1 if any criterion fails.

#include <iostream>

#include "walsh/harness.hpp"

int main() {
    walsh::AcceptanceOptions options;
    const auto results = walsh::run_acceptance(options, std::cout);
    std::size_t failed = 0;
    for (const auto& r : results) failed += !r.pass;
    std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
