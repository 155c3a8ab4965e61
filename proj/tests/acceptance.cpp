// Acceptance checks; prints one PASS/FAIL line per criterion and exits nonzero on any failure.
// Usage: acceptance [criterion ...] [--csv DIR]

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sbpsat/coupling.hpp"
#include "sbpsat/errors.hpp"
#include "sbpsat/interp_forge.hpp"
#include "sbpsat/sbp_core.hpp"
#include "sbpsat/simulate.hpp"
#include "sbpsat/study.hpp"

using namespace sbpsat;

namespace {

constexpr double kCertifyTolerance = 1e-9;
constexpr double kAdjointTolerance = 1e-12;
constexpr double kHeatSymTolerance = 1e-10;
constexpr double kWaveSymResidual = 1e-12;
constexpr double kWaveMaxEig = 1e-8;
constexpr double kEnergyDrift = 1e-6;
constexpr double kRateWindow = 0.3;
constexpr double kDtHalvingChange = 0.01;

struct Outcome {
    bool passed = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            passed = false;
            detail << " [fail: " << what << "]";
        }
    }
};

std::string fmt(double x, int digits = 4)
{
    std::ostringstream out;
    out << std::setprecision(digits) << x;
    return out.str();
}

// ---- 1. operator validity ----------------------------------------------

void operator_validity(Outcome& out)
{
    for (const int order : {2, 4, 6, 8}) {
        const SbpOperator1D op = load_sbp(order, Grid1D::uniform(41, 0.0, 1.0));
        const VerificationReport r = verify_operator(op);
        const int p = order / 2;
        out.detail << " 2p=" << order << ":quad=" << r.quadrature_order << ",deriv=" << r.derivative_order
                   << ",gamma=" << fmt(r.gamma, 6);
        out.require(r.passed(), "verify_operator order " + std::to_string(order) + ": " + r.summary());
        out.require(r.quadrature_order == order, "quadrature order " + std::to_string(order));
        out.require(r.derivative_order >= p + 1, "boundary derivative order " + std::to_string(order));
        out.require(r.gamma > 0.0, "gamma order " + std::to_string(order));
    }
}

// ---- 2. OP set certification -------------------------------------------

void set_certification(Outcome& out)
{
    for (const int p : {2, 3}) {
        for (const int n : {20, 40}) {
            const OpInterpolationSet set = build_op_set(p, n, 2);
            const Eigen::VectorXd& xu = set.hu.points;
            const Eigen::VectorXd& xv = set.hv.points;
            const int g_u2v = certify_order(set.g_u2v.matrix, xu, xv);
            const int b_u2v = certify_order(set.b_u2v.matrix, xu, xv);
            const int g_v2u = certify_order(set.g_v2u.matrix, xv, xu);
            const int b_v2u = certify_order(set.b_v2u.matrix, xv, xu);
            const double adj = adjoint_residual(set);
            const std::string tag = "p=" + std::to_string(p) + ",n=" + std::to_string(n);
            out.detail << " " << tag << ":(" << g_u2v << "," << b_u2v << "," << g_v2u << "," << b_v2u
                       << ") adj=" << fmt(adj, 2);
            out.require(g_u2v >= p + 1 && b_u2v >= p && g_v2u >= p + 1 && b_v2u >= p, tag + " orders");
            out.require(adj <= kAdjointTolerance, tag + " adjoint residual");
        }
    }
}

// ---- 3. bound sharpness ------------------------------------------------

void bound_sharpness(Outcome& out)
{
    for (const int p : {2, 3}) {
        const int order = 2 * p;
        const auto hu = InterfaceQuadrature::from_operator(load_sbp(order, Grid1D::uniform(20, 0.0, 1.0)));
        const auto hv = InterfaceQuadrature::from_operator(load_sbp(order, Grid1D::uniform(39, 0.0, 1.0)));
        const int bound = 2 * p + 1;
        int succeeded = 0;
        int rejected = 0;
        for (int q = 1; q < bound; ++q) {
            try {
                const AdjointPair pair = build_adjoint_pair(hu, hv, q, bound - q);
                const bool ok = pair.certificate.certified_u2v >= q && pair.certificate.certified_v2u >= bound - q;
                out.require(ok, "split (" + std::to_string(q) + "," + std::to_string(bound - q) + ") certified");
                succeeded += ok;
            } catch (const ForgeError& e) {
                out.require(false, "split (" + std::to_string(q) + "," + std::to_string(bound - q) + "): " + e.what());
            }
            try {
                (void)build_adjoint_pair(hu, hv, q, bound + 1 - q);
                out.require(false, "split (" + std::to_string(q) + "," + std::to_string(bound + 1 - q)
                                       + ") above the bound was accepted");
            } catch (const ForgeError&) {
                ++rejected;
            }
        }
        out.detail << " p=" << p << ": " << succeeded << "/" << bound - 1 << " splits at " << bound << " built, "
                   << rejected << "/" << bound - 1 << " at " << bound + 1 << " rejected;";
    }
}

// ---- 4. Laplacian taxonomy ---------------------------------------------

void taxonomy(Outcome& out)
{
    TwoBlockSpec spec;
    spec.left = Rect{-1.0, 0.0, 0.0, 1.0};
    spec.right = Rect{0.0, 1.0, 0.0, 1.0};
    spec.nx_u = spec.ny_u = 17;
    spec.nx_v = 33;
    spec.ratio = 2;
    for (const int order : {4, 6}) {
        spec.order = order;
        const TwoBlockDomain d = make_two_block(spec);
        const OpInterpolationSet set = build_op_set(d.hu, d.hv, order / 2);
        for (const Equation eq : {Equation::heat, Equation::schrodinger_simple, Equation::wave_form}) {
            CouplingConfig cfg;
            cfg.equation = eq;
            if (eq == Equation::schrodinger_simple) cfg.a = cfg.b = {0.0, 1.0};
            const SpectralReport r = spectral_report(assemble(d, set, cfg));
            const std::string tag = to_string(eq) + " order " + std::to_string(order);
            out.detail << " " << to_string(eq) << "/" << order << ":" << to_string(r.classification)
                       << "(sym=" << fmt(r.symmetry_residual, 2) << ",max=" << fmt(r.sym_max / r.norm, 2) << ")";
            switch (eq) {
            case Equation::heat:
                out.require(r.classification == Classification::nonsym_dissipative, tag + " class");
                out.require(r.sym_max <= kHeatSymTolerance * r.norm, tag + " max eig");
                break;
            case Equation::schrodinger_simple:
                out.require(r.classification == Classification::sym_indefinite, tag + " class");
                out.require(r.sym_min < 0.0 && r.sym_max > 0.0, tag + " both signs");
                break;
            case Equation::wave_form:
                out.require(r.classification == Classification::sym_neg_semidef, tag + " class");
                out.require(r.symmetry_residual <= kWaveSymResidual, tag + " symmetry");
                out.require(r.sym_max <= kWaveMaxEig * r.norm, tag + " max eig");
                break;
            }
        }
    }
}

// ---- 5. wave energy ----------------------------------------------------

void wave_energy_check(Outcome& out)
{
    for (const int order : {4, 6}) {
        RunSpec spec = RunSpec::preset(Problem::wave);
        spec.order = order;
        spec.n_coarse = 65;
        spec.dt_factor = 0.1;
        spec.final_time = 2.0;
        spec.theta = 3.0;
        const EnergyRun r = wave_energy_run(spec);
        out.detail << " order " << order << " N=65: drift=" << fmt(r.relative_drift, 3);
        out.require(r.relative_drift <= kEnergyDrift, "drift order " + std::to_string(order));
        spec.theta = 1.0001;
        try {
            const EnergyRun weak = wave_energy_run(spec);
            out.detail << ", theta=1.0001 drift=" << fmt(weak.relative_drift, 3) << ";";
        } catch (const BlowUpError& e) {
            out.require(false, "theta=1.0001 order " + std::to_string(order) + " blew up");
        }
    }
}

// ---- 6-8. convergence --------------------------------------------------

struct Study {
    std::string name;
    StudyConfig cfg;
    ConvergenceReport report;
};

std::filesystem::path g_csv_dir;

ConvergenceReport run_study(const std::string& name, StudyConfig cfg)
{
    const auto progress = [&](const ConvergenceRow& row) {
        std::cerr << "  " << row.eq << " order " << row.order << " " << to_string(row.mode) << " N=" << row.n
                  << (row.blew_up ? std::string(" blow-up") : " l2=" + fmt(row.l2_error, 6)) << std::endl;
    };
    ConvergenceReport report = run_convergence(cfg, progress);
    if (!g_csv_dir.empty()) write_csv(g_csv_dir / (name + ".csv"), report);
    return report;
}

std::vector<Study>& rate_studies()
{
    static std::vector<Study> studies;
    if (!studies.empty()) return studies;
    studies.push_back({"heat", StudyConfig::preset(Problem::heat), {}});
    studies.push_back({"wave", StudyConfig::preset(Problem::wave), {}});
    studies.push_back(
        {"schrodinger_semidef", StudyConfig::preset(Problem::schrodinger, LaplacianForm::semidefinite), {}});
    for (Study& s : studies) s.report = run_study(s.name, s.cfg);
    return studies;
}

void convergence_rates(Outcome& out)
{
    for (const Study& s : rate_studies()) {
        for (const SeriesSummary& series : s.report.series) {
            const int p = series.order / 2;
            const double target = series.mode == CouplingMode::op ? p + 2 : p + 1;
            const std::string tag = series.eq + "/" + std::to_string(series.order) + "/" + to_string(series.mode);
            out.detail << " " << tag << "=" << fmt(series.overall_rate, 3) << "(target " << target << ")";
            const bool complete = series.errors.size() == s.cfg.coarse_ns.size();
            out.require(complete, tag + " has blow-ups");
            out.require(std::abs(series.overall_rate - target) <= kRateWindow, tag + " rate");
        }
    }
}

void dt_halving(Outcome& out)
{
    for (const Study& s : rate_studies()) {
        for (const ConvergenceRow& row : s.report.rows) {
            if (row.n != s.cfg.coarse_ns.back() || row.blew_up) continue;
            RunSpec spec = s.cfg.base;
            spec.order = row.order;
            spec.mode = row.mode;
            spec.n_coarse = row.n;
            spec.dt_factor *= 0.5;
            const std::string tag = row.eq + "/" + std::to_string(row.order) + "/" + to_string(row.mode);
            std::cerr << "  dt/2 " << tag << " N=" << row.n << std::endl;
            try {
                const double halved = run_case(spec).errors.l2_abs;
                const double change = std::abs(halved - row.l2_error) / row.l2_error;
                out.detail << " " << tag << ":" << fmt(100.0 * change, 3) << "%";
                out.require(change < kDtHalvingChange, tag + " dt sensitivity");
            } catch (const BlowUpError&) {
                out.require(false, tag + " blew up at dt/2");
            }
        }
    }
}

void schrodinger_forms(Outcome& out)
{
    const Study* semidef = nullptr;
    for (const Study& s : rate_studies())
        if (s.name == "schrodinger_semidef") semidef = &s;
    StudyConfig indefinite = StudyConfig::preset(Problem::schrodinger);
    indefinite.orders = {6};
    indefinite.modes = {CouplingMode::op};
    indefinite.coarse_ns = semidef->cfg.coarse_ns;
    const ConvergenceReport ind = run_study("schrodinger_indefinite", indefinite);

    const auto find = [](const ConvergenceReport& r) -> const SeriesSummary* {
        for (const SeriesSummary& s : r.series)
            if (s.order == 6 && s.mode == CouplingMode::op) return &s;
        return nullptr;
    };
    const SeriesSummary* a = find(semidef->report);
    const SeriesSummary* b = find(ind);
    out.require(a != nullptr && b != nullptr && a->errors.size() == b->errors.size()
                    && a->errors.size() == indefinite.coarse_ns.size(),
                "complete ladders");
    if (!out.passed) return;

    bool decreasing = true;
    for (std::size_t i = 1; i < a->errors.size(); ++i) decreasing = decreasing && a->errors[i] < a->errors[i - 1];
    bool monotone_up = true;
    bool monotone_down = true;
    for (std::size_t i = 1; i < a->pairwise_rates.size(); ++i) {
        monotone_up = monotone_up && a->pairwise_rates[i] >= a->pairwise_rates[i - 1];
        monotone_down = monotone_down && a->pairwise_rates[i] <= a->pairwise_rates[i - 1];
    }
    bool smaller = true;
    for (std::size_t i = 0; i < a->errors.size(); ++i) {
        out.detail << " N=" << indefinite.coarse_ns[i] << ": " << fmt(a->errors[i], 3) << " vs " << fmt(b->errors[i], 3)
                   << ";";
        smaller = smaller && a->errors[i] < b->errors[i];
    }
    out.detail << " semidefinite rates";
    for (const double r : a->pairwise_rates) out.detail << " " << fmt(r, 3);
    out.detail << ", indefinite rates";
    for (const double r : b->pairwise_rates) out.detail << " " << fmt(r, 3);
    out.require(decreasing && (monotone_up || monotone_down), "semidefinite convergence not monotone");
    out.require(smaller, "semidefinite errors not smaller");
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Outcome&)> check;
};

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> criteria{
        {1, "operator validity", operator_validity},
        {2, "OP set certification", set_certification},
        {3, "bound sharpness", bound_sharpness},
        {4, "Laplacian taxonomy", taxonomy},
        {5, "wave energy", wave_energy_check},
        {6, "convergence rates", convergence_rates},
        {7, "temporal-error dominance", dt_halving},
        {8, "Schrodinger Laplacian comparison", schrodinger_forms},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--csv" && i + 1 < argc) {
            g_csv_dir = argv[++i];
            std::filesystem::create_directories(g_csv_dir);
        } else {
            selected.insert(std::atoi(arg.c_str()));
        }
    }

    bool all_passed = true;
    for (const Criterion& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        std::cerr << "criterion " << c.id << ": " << c.name << std::endl;
        Outcome out;
        try {
            c.check(out);
        } catch (const std::exception& e) {
            out.require(false, std::string("exception: ") + e.what());
        }
        all_passed = all_passed && out.passed;
        std::cout << (out.passed ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ":" << out.detail.str()
                  << std::endl;
    }
    return all_passed ? 0 : 1;
}
