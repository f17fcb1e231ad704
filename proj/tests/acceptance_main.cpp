// Acceptance gate: runs every criterion of the experiment suite at full
// scale and prints one pass/fail line per criterion.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "nsgame/suite.hpp"

int main(int argc, char** argv) {
    nsg::SuiteConfig config;
    if (argc > 1) config.scale = std::atof(argv[1]);

    bool all = true;
    std::printf("acceptance suite (seed %llu, scale %g)\n",
                (unsigned long long)config.seed, config.scale);
    for (const std::string& name : nsg::suite_criterion_names()) {
        nsg::SuiteConfig one = config;
        one.all = false;
        one.criteria = {name};
        auto start = std::chrono::steady_clock::now();
        nsg::SuiteSummary summary = nsg::run_experiment_suite(one);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const nsg::CriterionResult& r = summary.results.at(0);
        std::printf("[%s] %-12s cases=%-4lld worst_margin=%+.3e  (%.1fs)%s%s\n",
                    r.pass ? "PASS" : "FAIL", r.name.c_str(), r.cases, r.worst_margin, secs,
                    r.note.empty() ? "" : "  note: ", r.note.c_str());
        std::fflush(stdout);
        all &= r.pass;
    }
    std::printf("%s\n", all ? "ALL CRITERIA PASS" : "CRITERIA FAILED");
    return all ? 0 : 1;
}
