#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbpsat/commands.hpp"
#include "sbpsat/errors.hpp"
#include "sbpsat/simulate.hpp"
#include "sbpsat/study.hpp"

namespace {

using namespace sbpsat;

struct DataOptions {
    std::string dir;
    bool no_manifest = false;

    [[nodiscard]] SbpDataSource source() const
    {
        SbpDataSource src = SbpDataSource::shipped();
        if (!dir.empty()) src.dir = dir;
        src.check_manifest = !no_manifest;
        return src;
    }
};

void add_data_options(CLI::App* cmd, DataOptions& data)
{
    cmd->add_option("--data", data.dir, "directory holding the SBP operator files");
    cmd->add_flag("--no-manifest", data.no_manifest, "skip the checksum manifest");
}

// Flags shared by run and converge; every field is optional so that a config
// file can supply the value instead.
struct RunFlags {
    std::optional<std::string> equation;
    std::optional<std::string> laplacian;
    std::optional<int> ratio;
    std::optional<double> final_time;
    std::optional<double> dt_factor;
    std::optional<double> theta;
    std::optional<double> dirichlet_strength;
    std::optional<std::string> integrator;
    bool allow_explicit = false;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--equation", equation, "heat, schrodinger or wave");
        cmd->add_option("--laplacian", laplacian, "standard or semidefinite");
        cmd->add_option("--ratio", ratio, "grid refinement ratio across the interface");
        cmd->add_option("--T", final_time, "final time");
        cmd->add_option("--dt-factor", dt_factor, "dt = factor * h_v");
        cmd->add_option("--theta", theta, "interface penalty factor");
        cmd->add_option("--dirichlet-strength", dirichlet_strength, "outer boundary penalty multiplier");
        cmd->add_option("--integrator", integrator, "rk4 or gauss4");
        cmd->add_flag("--allow-explicit-parabolic", allow_explicit, "permit rk4 on heat/Schrodinger runs");
    }

    void into(KeyValues& kv) const
    {
        if (equation) kv["equation"] = *equation;
        if (laplacian) kv["laplacian"] = *laplacian;
        if (ratio) kv["ratio"] = std::to_string(*ratio);
        if (final_time) kv["T"] = format_real(*final_time);
        if (dt_factor) kv["dt_factor"] = format_real(*dt_factor);
        if (theta) kv["theta"] = format_real(*theta);
        if (dirichlet_strength) kv["dirichlet_strength"] = format_real(*dirichlet_strength);
        if (integrator) kv["integrator"] = *integrator;
        if (allow_explicit) kv["allow_explicit_parabolic"] = "true";
    }
};

std::string join(const std::vector<std::string>& items)
{
    std::string out;
    for (const std::string& item : items) out += (out.empty() ? "" : ",") + item;
    return out;
}

int run_ops(int order, int n, int ratio, const std::string& out, const DataOptions& data)
{
    const OpsOutput result = cmd_ops(order, n, ratio, out, data.source());
    const OpInterpolationSet& set = result.set;
    std::printf("orders g_u2v=%d b_u2v=%d g_v2u=%d b_v2u=%d\n", set.g_u2v.order_q, set.b_u2v.order_q,
                set.g_v2u.order_q, set.b_v2u.order_q);
    std::printf("adjoint_residual=%.3e\n", adjoint_residual(set));
    for (const auto& file : result.files) std::printf("wrote %s\n", file.string().c_str());
    return 0;
}

int run_verify(const std::string& target, const DataOptions& data)
{
    const SuiteReport report = verify_suite(target, data.source(), std::cout);
    int failures = 0;
    for (const SuiteLine& line : report.lines)
        if (!line.passed) {
            ++failures;
            std::cout << "FAIL " << line.group << '/' << line.name << ": " << line.detail << '\n';
        }
    std::cout << (failures == 0 ? "verify: all invariants hold" : "verify: " + std::to_string(failures) + " failures")
              << " (" << report.lines.size() << " checks)\n";
    return failures == 0 ? 0 : 1;
}

int run_single(const RunFlags& flags, int order, const std::string& mode, int n, const DataOptions& data)
{
    KeyValues kv;
    kv["equation"] = "heat";
    flags.into(kv);
    StudyConfig cfg = StudyConfig::from_key_values(kv);
    RunSpec spec = cfg.base;
    spec.order = order;
    spec.mode = parse_mode(mode);
    spec.n_coarse = n;
    const RunResult result = run_case(spec, data.source());
    std::printf("eq=%s\norder=%d\nmode=%s\nN=%d\nunknowns=%d\nh_coarse=%s\nh_fine=%s\ndt=%s\nsteps=%d\n",
                cfg.equation_label().c_str(), order, to_string(spec.mode).c_str(), n, result.unknowns,
                format_real(result.h_coarse).c_str(), format_real(result.h_fine).c_str(),
                format_real(result.dt).c_str(), result.steps);
    std::printf("l2_error=%s\nl2_relative=%s\nmax_error=%s\n", format_real(result.errors.l2_abs).c_str(),
                format_real(result.errors.l2_rel).c_str(), format_real(result.errors.max_abs).c_str());
    return 0;
}

int run_converge(const RunFlags& flags, const std::string& config_path, const std::vector<int>& orders,
                 const std::vector<std::string>& modes, const std::vector<int>& ns, const std::string& output,
                 const DataOptions& data)
{
    KeyValues kv;
    if (!config_path.empty()) kv = read_key_values(config_path);
    flags.into(kv);
    if (!kv.count("equation")) throw ConfigError("converge needs --equation or an 'equation' key in --config");
    auto ints = [](const std::vector<int>& values) {
        std::vector<std::string> items;
        for (const int v : values) items.push_back(std::to_string(v));
        return join(items);
    };
    if (!orders.empty()) kv["orders"] = ints(orders);
    if (!modes.empty()) kv["modes"] = join(modes);
    if (!ns.empty()) kv["N"] = ints(ns);
    if (!output.empty()) kv["output"] = output;
    const StudyConfig cfg = StudyConfig::from_key_values(kv);

    bool blew_up = false;
    const ConvergenceReport report = run_convergence(
        cfg,
        [&](const ConvergenceRow& row) {
            blew_up = blew_up || row.blew_up;
            std::fprintf(stderr, "%s order=%d mode=%s N=%d l2=%s%s\n", row.eq.c_str(), row.order,
                         to_string(row.mode).c_str(), row.n, row.blew_up ? "blowup" : format_real(row.l2_error).c_str(),
                         row.rate ? (" rate=" + format_real(*row.rate)).c_str() : "");
        },
        data.source());
    if (cfg.output.empty()) write_csv(std::cout, report);
    else write_csv(cfg.output, report);
    for (const SeriesSummary& s : report.series)
        std::fprintf(stderr, "overall %s order=%d mode=%s rate=%.4f\n", s.eq.c_str(), s.order,
                     to_string(s.mode).c_str(), s.overall_rate);
    return blew_up ? exit_code(ErrorKind::blowup) : 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Two-block SBP-SAT interface toolkit"};
    app.require_subcommand(1);

    DataOptions data;

    auto* ops = app.add_subcommand("ops", "forge an order-preserving interpolation set and write it");
    int ops_order = 4;
    int ops_n = 20;
    int ops_ratio = 2;
    std::string ops_out = "ops";
    ops->add_option("--order", ops_order, "interior order 2p")->capture_default_str();
    ops->add_option("--n", ops_n, "coarse interface points")->capture_default_str();
    ops->add_option("--ratio", ops_ratio, "refinement ratio")->capture_default_str();
    ops->add_option("--out", ops_out, "output directory")->capture_default_str();
    add_data_options(ops, data);

    auto* verify = app.add_subcommand("verify", "run the invariant suite");
    std::string target = "all";
    verify->add_option("target", target, "all, operators, sets or systems")->capture_default_str();
    add_data_options(verify, data);

    auto* run = app.add_subcommand("run", "one simulation against the analytic solution");
    RunFlags run_flags;
    run_flags.attach(run);
    int run_order = 4;
    std::string run_mode = "op";
    int run_n = 17;
    run->add_option("--order", run_order, "interior order 2p")->capture_default_str();
    run->add_option("--mode", run_mode, "op or single_pair")->capture_default_str();
    run->add_option("--N", run_n, "coarse grid points per direction")->capture_default_str();
    add_data_options(run, data);

    auto* converge = app.add_subcommand("converge", "grid convergence study written as CSV");
    RunFlags conv_flags;
    conv_flags.attach(converge);
    std::string config_path;
    std::vector<int> conv_orders;
    std::vector<std::string> conv_modes;
    std::vector<int> conv_ns;
    std::string conv_output;
    converge->add_option("--config", config_path, "key=value study file");
    converge->add_option("--orders", conv_orders, "orders, e.g. 4,6")->delimiter(',');
    converge->add_option("--modes", conv_modes, "op,single_pair")->delimiter(',');
    converge->add_option("--N", conv_ns, "coarse grid ladder, e.g. 17,33,65")->delimiter(',');
    converge->add_option("--output", conv_output, "CSV path (stdout when omitted)");
    add_data_options(converge, data);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : exit_code(ErrorKind::config);
    }

    try {
        if (*ops) return run_ops(ops_order, ops_n, ops_ratio, ops_out, data);
        if (*verify) return run_verify(target, data);
        if (*run) return run_single(run_flags, run_order, run_mode, run_n, data);
        if (*converge)
            return run_converge(conv_flags, config_path, conv_orders, conv_modes, conv_ns, conv_output, data);
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return exit_code(err.kind());
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return exit_code(ErrorKind::invariant);
    }
    return 0;
}
