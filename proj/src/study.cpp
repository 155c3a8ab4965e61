#include "sbpsat/study.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

namespace sbpsat {

namespace {

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        const auto first = item.find_first_not_of(" \t");
        const auto last = item.find_last_not_of(" \t");
        out.push_back(first == std::string::npos ? std::string{} : item.substr(first, last - first + 1));
    }
    return out;
}

double to_double(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
    }
}

int to_int(const std::string& key, const std::string& text)
{
    const double value = to_double(key, text);
    if (value != std::floor(value)) throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
    return static_cast<int>(value);
}

std::vector<int> to_ints(const std::string& key, const std::string& text)
{
    std::vector<int> out;
    for (const std::string& item : split(text, ',')) out.push_back(to_int(key, item));
    return out;
}

Rect to_rect(const std::string& key, const std::string& text)
{
    const std::vector<std::string> parts = split(text, ',');
    if (parts.size() != 4) throw ConfigError("key '" + key + "': expected x0,x1,y0,y1");
    return {to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2]), to_double(key, parts[3])};
}

LaplacianForm parse_laplacian(const std::string& text)
{
    if (text == "standard" || text == "indefinite") return LaplacianForm::standard;
    if (text == "semidefinite") return LaplacianForm::semidefinite;
    throw ConfigError("unknown laplacian '" + text + "' (expected standard or semidefinite)");
}

Integrator parse_integrator(const std::string& text)
{
    if (text == "rk4") return Integrator::rk4;
    if (text == "gauss4") return Integrator::gauss4;
    throw ConfigError("unknown integrator '" + text + "'");
}

bool to_bool(const std::string& key, const std::string& text)
{
    if (text == "1" || text == "true" || text == "yes") return true;
    if (text == "0" || text == "false" || text == "no") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + text + "'");
}

using SeriesKey = std::tuple<std::string, int, int>;

SeriesKey key_of(const ConvergenceRow& row) { return {row.eq, row.order, static_cast<int>(row.mode)}; }

}  // namespace

StudyConfig StudyConfig::preset(Problem problem, LaplacianForm laplacian)
{
    StudyConfig cfg;
    cfg.base = RunSpec::preset(problem, laplacian);
    cfg.coarse_ns = problem == Problem::schrodinger ? std::vector<int>{17, 33, 65} : std::vector<int>{17, 33, 65, 129};
    return cfg;
}

StudyConfig StudyConfig::from_key_values(const KeyValues& kv)
{
    const auto eq = kv.find("equation");
    if (eq == kv.end()) throw ConfigError("study config needs an 'equation' key");
    const auto lap = kv.find("laplacian");
    StudyConfig cfg = preset(parse_problem(eq->second),
                             lap == kv.end() ? LaplacianForm::standard : parse_laplacian(lap->second));
    cfg.apply(kv);
    return cfg;
}

void StudyConfig::apply(const KeyValues& kv)
{
    for (const auto& [key, value] : kv) {
        if (key == "equation" || key == "laplacian") continue;
        if (key == "orders") orders = to_ints(key, value);
        else if (key == "modes") {
            modes.clear();
            for (const std::string& item : split(value, ',')) modes.push_back(parse_mode(item));
        } else if (key == "N" || key == "coarse_ns") coarse_ns = to_ints(key, value);
        else if (key == "ratio") base.ratio = to_int(key, value);
        else if (key == "T") base.final_time = to_double(key, value);
        else if (key == "dt_factor") base.dt_factor = to_double(key, value);
        else if (key == "integrator") base.integrator = parse_integrator(value);
        else if (key == "allow_explicit_parabolic") base.allow_explicit_parabolic = to_bool(key, value);
        else if (key == "theta") base.theta = to_double(key, value);
        else if (key == "dirichlet_strength") base.dirichlet_strength = to_double(key, value);
        else if (key == "left") base.left = to_rect(key, value);
        else if (key == "right") base.right = to_rect(key, value);
        else if (key == "lambda1") base.heat.lambda1 = to_double(key, value);
        else if (key == "lambda2") base.heat.lambda2 = to_double(key, value);
        else if (key == "k1") {
            base.heat.k1 = to_double(key, value);
            base.schrodinger.k1 = base.heat.k1;
        } else if (key == "k2") {
            base.heat.k2 = to_double(key, value);
            base.schrodinger.k2 = base.heat.k2;
        } else if (key == "A") base.schrodinger.amplitude = to_double(key, value);
        else if (key == "V0") base.schrodinger.v0 = to_double(key, value);
        else if (key == "c1") base.wave.c1 = to_double(key, value);
        else if (key == "c2") base.wave.c2 = to_double(key, value);
        else if (key == "output") output = value;
        else throw ConfigError("unknown study key '" + key + "'");
    }
}

void StudyConfig::validate() const
{
    if (orders.empty()) throw ConfigError("study needs at least one order");
    for (const int order : orders)
        if (order != 4 && order != 6) throw ConfigError("study orders must be 4 or 6");
    if (modes.empty()) throw ConfigError("study needs at least one coupling mode");
    if (coarse_ns.size() < 2) throw ConfigError("study needs at least two grid sizes for rate fitting");
    for (std::size_t i = 1; i < coarse_ns.size(); ++i)
        if (coarse_ns[i] <= coarse_ns[i - 1]) throw ConfigError("grid sizes must be strictly increasing");
    RunSpec probe = base;
    probe.order = orders.front();
    probe.n_coarse = coarse_ns.front();
    probe.validate();
}

std::string StudyConfig::equation_label() const
{
    std::string label = to_string(base.problem);
    if (base.problem == Problem::schrodinger && base.laplacian == LaplacianForm::semidefinite) label += "_semidef";
    if (base.ratio == 1) label += "_conforming";
    return label;
}

double pairwise_rate(double h0, double e0, double h1, double e1) { return std::log(e0 / e1) / std::log(h0 / h1); }

double overall_rate(const std::vector<double>& h, const std::vector<double>& errors)
{
    const std::size_t n = std::min(h.size(), errors.size());
    if (n < 2) return std::nan("");
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += std::log(h[i]);
        sy += std::log(errors[i]);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(h[i]) - mx;
        sxy += dx * (std::log(errors[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

ConvergenceReport make_report(std::vector<ConvergenceRow> rows)
{
    std::stable_sort(rows.begin(), rows.end(), [](const ConvergenceRow& a, const ConvergenceRow& b) {
        return std::tuple(key_of(a), a.n) < std::tuple(key_of(b), b.n);
    });
    ConvergenceReport report;
    std::map<SeriesKey, std::size_t> index;
    const ConvergenceRow* previous = nullptr;
    for (ConvergenceRow& row : rows) {
        const bool same_series = previous != nullptr && key_of(*previous) == key_of(row);
        row.rate.reset();
        if (same_series && !row.blew_up && !previous->blew_up)
            row.rate = pairwise_rate(previous->h_coarse, previous->l2_error, row.h_coarse, row.l2_error);
        const SeriesKey key = key_of(row);
        if (!index.count(key)) {
            index[key] = report.series.size();
            report.series.push_back({row.eq, row.order, row.mode, {}, {}, {}, 0.0});
        }
        SeriesSummary& series = report.series[index[key]];
        if (!row.blew_up) {
            series.h.push_back(row.h_coarse);
            series.errors.push_back(row.l2_error);
        }
        if (row.rate) series.pairwise_rates.push_back(*row.rate);
        previous = &row;
    }
    for (SeriesSummary& series : report.series) series.overall_rate = overall_rate(series.h, series.errors);
    report.rows = std::move(rows);
    return report;
}

ConvergenceReport run_convergence(const StudyConfig& cfg, const RowCallback& progress, const SbpDataSource& source)
{
    cfg.validate();
    std::vector<int> orders = cfg.orders;
    std::sort(orders.begin(), orders.end());
    std::vector<CouplingMode> modes = cfg.modes;
    std::sort(modes.begin(), modes.end());
    std::vector<ConvergenceRow> rows;
    for (const int order : orders)
        for (const CouplingMode mode : modes)
            for (const int n : cfg.coarse_ns) {
                RunSpec spec = cfg.base;
                spec.order = order;
                spec.mode = mode;
                spec.n_coarse = n;
                ConvergenceRow row;
                row.eq = cfg.equation_label();
                row.order = order;
                row.mode = mode;
                row.n = n;
                try {
                    const RunResult result = run_case(spec, source);
                    row.h_coarse = result.h_coarse;
                    row.l2_error = result.errors.l2_abs;
                    row.max_error = result.errors.max_abs;
                } catch (const BlowUpError&) {
                    row.h_coarse = (spec.left.x1 - spec.left.x0) / (n - 1);
                    row.l2_error = std::nan("");
                    row.max_error = std::nan("");
                    row.blew_up = true;
                }
                if (!rows.empty() && key_of(rows.back()) == key_of(row) && !row.blew_up && !rows.back().blew_up)
                    row.rate = pairwise_rate(rows.back().h_coarse, rows.back().l2_error, row.h_coarse, row.l2_error);
                if (progress) progress(row);
                rows.push_back(row);
            }
    return make_report(std::move(rows));
}

void write_csv(std::ostream& out, const ConvergenceReport& report)
{
    out << kCsvHeader << '\n';
    for (const ConvergenceRow& row : report.rows) {
        out << row.eq << ',' << row.order << ',' << to_string(row.mode) << ',' << row.n << ','
            << format_real(row.h_coarse) << ',';
        if (row.blew_up) {
            out << "nan,nan,blowup\n";
            continue;
        }
        out << format_real(row.l2_error) << ',' << format_real(row.max_error) << ',';
        if (row.rate) out << format_real(*row.rate);
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const ConvergenceReport& report)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    write_csv(out, report);
}

ConvergenceReport read_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw ConfigError("CSV header mismatch");
    std::vector<ConvergenceRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields = split(line, ',');
        if (fields.size() == 7) fields.emplace_back();
        if (fields.size() != 8) throw ConfigError("malformed CSV row: " + line);
        ConvergenceRow row;
        row.eq = fields[0];
        row.order = to_int("order", fields[1]);
        row.mode = parse_mode(fields[2]);
        row.n = to_int("N", fields[3]);
        row.h_coarse = to_double("h_coarse", fields[4]);
        row.blew_up = fields[7] == "blowup";
        if (row.blew_up) {
            row.l2_error = std::nan("");
            row.max_error = std::nan("");
        } else {
            row.l2_error = to_double("l2_error", fields[5]);
            row.max_error = to_double("max_error", fields[6]);
        }
        rows.push_back(row);
    }
    return make_report(std::move(rows));
}

}  // namespace sbpsat
