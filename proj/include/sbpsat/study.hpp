#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sbpsat/simulate.hpp"
#include "sbpsat/triplet_io.hpp"

namespace sbpsat {

struct StudyConfig {
    RunSpec base;
    std::vector<int> orders{4, 6};
    std::vector<CouplingMode> modes{CouplingMode::op, CouplingMode::single_pair};
    std::vector<int> coarse_ns;
    std::filesystem::path output;

    [[nodiscard]] static StudyConfig preset(Problem problem, LaplacianForm laplacian = LaplacianForm::standard);
    // Starts from the preset named by `equation` (and `laplacian`), then applies the remaining keys.
    [[nodiscard]] static StudyConfig from_key_values(const KeyValues& kv);
    void apply(const KeyValues& kv);
    void validate() const;
    [[nodiscard]] std::string equation_label() const;
};

struct ConvergenceRow {
    std::string eq;
    int order = 0;
    CouplingMode mode = CouplingMode::op;
    int n = 0;
    double h_coarse = 0.0;
    double l2_error = 0.0;
    double max_error = 0.0;
    std::optional<double> rate;
    bool blew_up = false;
};

struct SeriesSummary {
    std::string eq;
    int order = 0;
    CouplingMode mode = CouplingMode::op;
    std::vector<double> h;
    std::vector<double> errors;
    std::vector<double> pairwise_rates;
    double overall_rate = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::vector<SeriesSummary> series;
};

using RowCallback = std::function<void(const ConvergenceRow&)>;

[[nodiscard]] ConvergenceReport run_convergence(const StudyConfig& cfg, const RowCallback& progress = {},
                                                const SbpDataSource& source = SbpDataSource::shipped());

[[nodiscard]] double pairwise_rate(double h0, double e0, double h1, double e1);
// least-squares slope of log(error) against log(h)
[[nodiscard]] double overall_rate(const std::vector<double>& h, const std::vector<double>& errors);

// Fills pairwise rates per (eq, order, mode) and builds the series summaries.
[[nodiscard]] ConvergenceReport make_report(std::vector<ConvergenceRow> rows);

inline constexpr const char* kCsvHeader = "eq,order,mode,N,h_coarse,l2_error,max_error,rate";

void write_csv(std::ostream& out, const ConvergenceReport& report);
void write_csv(const std::filesystem::path& path, const ConvergenceReport& report);
[[nodiscard]] ConvergenceReport read_csv(std::istream& in);

}  // namespace sbpsat
