#include "sbpsat/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "sbpsat/errors.hpp"
#include "sbpsat/mesh2d.hpp"

namespace sbpsat {

namespace {

constexpr int kVerifyGridPoints = 41;
constexpr double kAdjointTol = 1e-12;

std::string fmt(const char* format, double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, format, value);
    return buf;
}

void verify_operators(SuiteReport& report, const SbpDataSource& source, std::ostream& log)
{
    log << "order  quad  interior  boundary  deriv  gamma        status\n";
    for (const int order : supported_orders()) {
        const std::string group = "operator" + std::to_string(order);
        try {
            const SbpOperator1D op =
                load_sbp_unchecked(order, Grid1D::uniform(kVerifyGridPoints, 0.0, 1.0), source);
            const VerificationReport rep = verify_operator(op);
            for (const InvariantCheck& check : rep.checks)
                report.add(group, check.name, check.passed, check.detail);
            char line[160];
            std::snprintf(line, sizeof line, "%5d  %4d  %8d  %8d  %5d  %-11.6g  %s\n", order, rep.quadrature_order,
                          rep.interior_accuracy, rep.boundary_accuracy, rep.derivative_order, rep.gamma,
                          rep.passed() ? "pass" : "FAIL");
            log << line;
            for (const InvariantCheck& check : rep.checks)
                if (!check.passed) log << "    failed " << check.name << ": " << check.detail << '\n';
        } catch (const Error& err) {
            report.add(group, "load", false, err.what());
            log << order << "  load failed: " << err.what() << '\n';
        }
    }
}

void verify_sets(SuiteReport& report, const SbpDataSource& source, std::ostream& log)
{
    log << "p  n   g_u2v  b_u2v  g_v2u  b_v2u  adjoint_residual  status\n";
    for (const int p : {2, 3})
        for (const int n : {20, 40}) {
            const std::string group = "set_p" + std::to_string(p) + "_n" + std::to_string(n);
            try {
                const OpInterpolationSet set = build_op_set(p, n, 2, source);
                const Eigen::VectorXd& xu = set.hu.points;
                const Eigen::VectorXd& xv = set.hv.points;
                const int g_u2v = certify_order(set.g_u2v.matrix, xu, xv);
                const int b_u2v = certify_order(set.b_u2v.matrix, xu, xv);
                const int g_v2u = certify_order(set.g_v2u.matrix, xv, xu);
                const int b_v2u = certify_order(set.b_v2u.matrix, xv, xu);
                const double adj = adjoint_residual(set);
                const bool orders_ok = g_u2v >= p + 1 && b_u2v >= p && g_v2u >= p + 1 && b_v2u >= p;
                report.add(group, "orders", orders_ok,
                           std::to_string(g_u2v) + "," + std::to_string(b_u2v) + "," + std::to_string(g_v2u) + ","
                               + std::to_string(b_v2u));
                report.add(group, "adjoint_residual", adj <= kAdjointTol, fmt("%.3e", adj));
                char line[160];
                std::snprintf(line, sizeof line, "%d  %-3d %5d  %5d  %5d  %5d  %16.3e  %s\n", p, n, g_u2v, b_u2v,
                              g_v2u, b_v2u, adj, orders_ok && adj <= kAdjointTol ? "pass" : "FAIL");
                log << line;
            } catch (const Error& err) {
                report.add(group, "build", false, err.what());
                log << p << "  " << n << "  build failed: " << err.what() << '\n';
            }
        }
}

void verify_systems(SuiteReport& report, const SbpDataSource& source, std::ostream& log)
{
    TwoBlockSpec spec;
    spec.left = {-1.0, 0.0, 0.0, 1.0};
    spec.right = {0.0, 1.0, 0.0, 1.0};
    spec.nx_u = 17;
    spec.ny_u = 17;
    spec.nx_v = 33;
    spec.order = 4;
    log << "kind                symmetry     sym_min      sym_max      class                 status\n";
    try {
        const TwoBlockDomain domain = make_two_block(spec, source);
        const OpInterpolationSet set = build_op_set(domain.hu, domain.hv, 2);
        struct Case {
            Equation eq;
            std::complex<double> a;
            std::complex<double> b;
            Classification expected;
        };
        const Case cases[] = {
            {Equation::heat, 1.0, 0.5, Classification::nonsym_dissipative},
            {Equation::schrodinger_simple, {0.0, 1.0}, {0.0, 1.0}, Classification::sym_indefinite},
            {Equation::wave_form, 1.0, 0.25, Classification::sym_neg_semidef},
        };
        for (const Case& c : cases) {
            CouplingConfig cfg;
            cfg.equation = c.eq;
            cfg.a = c.a;
            cfg.b = c.b;
            const SpectralReport rep = spectral_report(assemble(domain, set, cfg));
            const bool ok = rep.classification == c.expected;
            report.add("systems", to_string(c.eq), ok, to_string(rep.classification));
            char line[200];
            std::snprintf(line, sizeof line, "%-18s  %-11.3e  %-11.4e  %-11.4e  %-20s  %s\n", to_string(c.eq).c_str(),
                          rep.symmetry_residual, rep.sym_min, rep.sym_max, to_string(rep.classification).c_str(),
                          ok ? "pass" : "FAIL");
            log << line;
        }
    } catch (const Error& err) {
        report.add("systems", "assemble", false, err.what());
        log << "assembly failed: " << err.what() << '\n';
    }
}

}  // namespace

bool SuiteReport::passed() const
{
    return std::all_of(lines.begin(), lines.end(), [](const SuiteLine& l) { return l.passed; });
}

void SuiteReport::add(std::string group, std::string name, bool ok, std::string detail)
{
    lines.push_back({std::move(group), std::move(name), ok, std::move(detail)});
}

SuiteReport verify_suite(const std::string& target, const SbpDataSource& source, std::ostream& log)
{
    const bool all = target == "all";
    if (!all && target != "operators" && target != "sets" && target != "systems")
        throw ConfigError("unknown verify target '" + target + "' (expected all, operators, sets or systems)");
    SuiteReport report;
    if (all || target == "operators") verify_operators(report, source, log);
    if (all || target == "sets") verify_sets(report, source, log);
    if (all || target == "systems") verify_systems(report, source, log);
    return report;
}

OpsOutput cmd_ops(int order, int coarse_n, int ratio, const std::filesystem::path& out_dir,
                  const SbpDataSource& source)
{
    if (order % 2 != 0 || order < 2 || order > 8) throw ConfigError("order must be one of 2, 4, 6, 8");
    OpsOutput out;
    out.set = build_op_set(order / 2, coarse_n, ratio, source);
    write_op_set(out.set, out_dir);
    for (const char* name : {"g_u2v.txt", "b_u2v.txt", "g_v2u.txt", "b_v2u.txt", "certificate.txt"})
        out.files.push_back(out_dir / name);
    return out;
}

}  // namespace sbpsat
