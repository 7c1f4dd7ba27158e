// Runs the acceptance suite and prints one PASS/FAIL line per criterion.
// Usage: acceptance [config.json] [report-dir]

#include <iostream>
#include <map>

#include "persistx/error.hpp"
#include "persistx/harness.hpp"

#ifndef PERSISTX_ACCEPTANCE_CONFIG
#define PERSISTX_ACCEPTANCE_CONFIG "configs/acceptance.json"
#endif

int main(int argc, char** argv) {
    using namespace persistx;
    const std::string config = argc > 1 ? argv[1] : PERSISTX_ACCEPTANCE_CONFIG;
    SuiteOptions opts;
    opts.out_dir = argc > 2 ? argv[2] : "acceptance-reports";
    opts.on_case = [](const CaseReport& r) {
        std::cout << "  [" << (r.pass ? "ok  " : "FAIL") << "] criterion " << r.criterion << ": " << r.name;
        if (!r.error.empty()) std::cout << " (" << r.error << ")";
        for (const auto& c : r.checks)
            if (!c.pass) std::cout << "\n         failed check '" << c.name << "': value " << format_double(c.value)
                                   << ", target " << format_double(c.target) << ", " << c.relation;
        std::cout << "  " << r.wall_time << " s\n";
    };

    SuiteResult result;
    try {
        result = run_suite(config, opts);
    } catch (const std::exception& e) {
        std::cerr << "acceptance: " << e.what() << "\n";
        return 2;
    }

    struct Tally {
        int cases = 0, passed = 0;
        double seconds = 0.0;
    };
    std::map<int, Tally> by_criterion;
    for (int k = 1; k <= 10; ++k) by_criterion[k];
    for (const auto& r : result.cases) {
        int k = 0;
        try {
            k = std::stoi(r.criterion);
        } catch (const std::exception&) {
            continue;
        }
        auto& t = by_criterion[k];
        ++t.cases;
        t.passed += r.pass;
        t.seconds += r.wall_time;
    }

    bool all = true;
    for (const auto& [k, t] : by_criterion) {
        const bool ok = t.cases > 0 && t.passed == t.cases;
        all = all && ok;
        std::cout << "criterion " << k << ": " << (ok ? "PASS" : "FAIL") << " (" << t.passed << "/" << t.cases
                  << " cases, " << t.seconds << " s)\n";
    }
    return all ? 0 : 1;
}
