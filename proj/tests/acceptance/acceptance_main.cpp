#include <cstdio>
#include <exception>

#include "ncbal/acceptance.hpp"

// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
int main() {
    try {
        ncbal::Verifier verifier;
        int failed = 0;
        for (const auto& r : verifier.run_suite("all")) {
            std::printf("%s\n", ncbal::format_result(r).c_str());
            std::fflush(stdout);
            if (!r.passed) ++failed;
        }
        std::printf("%d criteria failed\n", failed);
        return failed == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance: %s\n", e.what());
        return 1;
    }
}
