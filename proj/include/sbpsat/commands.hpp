#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sbpsat/coupling.hpp"
#include "sbpsat/interp_forge.hpp"
#include "sbpsat/sbp_core.hpp"

namespace sbpsat {

struct SuiteLine {
    std::string group;
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SuiteReport {
    std::vector<SuiteLine> lines;

    [[nodiscard]] bool passed() const;
    void add(std::string group, std::string name, bool passed, std::string detail);
};

// target: all, operators, sets or systems
[[nodiscard]] SuiteReport verify_suite(const std::string& target, const SbpDataSource& source,
                                       std::ostream& log);

struct OpsOutput {
    OpInterpolationSet set;
    std::vector<std::filesystem::path> files;
};

[[nodiscard]] OpsOutput cmd_ops(int order, int coarse_n, int ratio, const std::filesystem::path& out_dir,
                                const SbpDataSource& source = SbpDataSource::shipped());

}  // namespace sbpsat
