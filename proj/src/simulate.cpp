#include "sbpsat/simulate.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace sbpsat {

namespace {

using Complex = std::complex<double>;
using CVec = Vec<Complex>;
using CSpMat = Eigen::SparseMatrix<Complex>;
constexpr Complex kI{0.0, 1.0};
constexpr double kStageTol = 1e-12;

struct StepCount {
    int steps;
    double dt;
};

StepCount steps_for(double final_time, double dt_target)
{
    const int steps = std::max(1, static_cast<int>(std::ceil(final_time / dt_target - 1e-9)));
    return {steps, final_time / steps};
}

double max_abs(const CVec& v) { return v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

// ---- Gauss-Legendre stepper ----

template <class Scalar>
Gauss4Stepper<Scalar>::Gauss4Stepper(const LinearFlow<Scalar>& flow, double dt) : flow_(&flow), dt_(dt)
{
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    const double s = std::sqrt(3.0) / 6.0;
    Eigen::Matrix2d butcher;
    butcher << 0.25, 0.25 - s, 0.25 + s, 0.25;
    c_ = {0.5 - s, 0.5 + s};

    const Eigen::ComplexEigenSolver<Eigen::Matrix2cd> eig(butcher.cast<Complex>());
    const int first = eig.eigenvalues()(0).imag() > 0.0 ? 0 : 1;
    const Eigen::Vector2cd v = eig.eigenvectors().col(first);
    lambda_ = {eig.eigenvalues()(first), std::conj(eig.eigenvalues()(first))};
    t_.col(0) = v;
    t_.col(1) = v.conjugate();
    t_inv_ = t_.inverse();

    a_complex_ = flow.A.template cast<Complex>();
    const int n = static_cast<int>(flow.A.rows());
    CSpMat identity(n, n);
    identity.setIdentity();
    const int systems = kReal ? 1 : 2;
    for (int k = 0; k < systems; ++k) {
        shifted_[k] = identity - (dt * lambda_[k]) * a_complex_;
        shifted_[k].makeCompressed();
        lu_[k].analyzePattern(shifted_[k]);
        lu_[k].factorize(shifted_[k]);
        if (lu_[k].info() != Eigen::Success) throw BlowUpError("stage matrix factorization failed");
    }
}

template <class Scalar>
Vec<Scalar> Gauss4Stepper<Scalar>::step(const Vec<Scalar>& y, double t) const
{
    const CVec yc = y.template cast<Complex>();
    const CVec ay = a_complex_ * yc;
    CVec f0 = CVec::Zero(yc.size());
    CVec f1 = CVec::Zero(yc.size());
    if (flow_->forcing) {
        f0 = flow_->forcing(t + c_[0] * dt_).template cast<Complex>();
        f1 = flow_->forcing(t + c_[1] * dt_).template cast<Complex>();
    }
    const double scale = std::max(max_abs(yc), 1e-300);
    const int systems = kReal ? 1 : 2;
    std::array<CVec, 2> z;
    last_residual_ = 0.0;
    for (int k = 0; k < systems; ++k) {
        const CVec rhs = (t_inv_(k, 0) + t_inv_(k, 1)) * ay + t_inv_(k, 0) * f0 + t_inv_(k, 1) * f1;
        z[k] = lu_[k].solve(rhs);
        CVec residual = rhs - shifted_[k] * z[k];
        const double bound = kStageTol * std::max(scale, dt_ * max_abs(rhs));
        if (dt_ * max_abs(residual) > bound) {
            z[k] += lu_[k].solve(residual);
            residual = rhs - shifted_[k] * z[k];
            if (dt_ * max_abs(residual) > bound)
                throw BlowUpError("stage solve residual " + std::to_string(dt_ * max_abs(residual))
                                  + " exceeds tolerance");
        }
        last_residual_ = std::max(last_residual_, dt_ * max_abs(residual));
    }
    const Complex w0 = 0.5 * (t_(0, 0) + t_(1, 0));
    if constexpr (kReal) {
        return y + (2.0 * dt_) * (w0 * z[0]).real();
    } else {
        const Complex w1 = 0.5 * (t_(0, 1) + t_(1, 1));
        return y + dt_ * (w0 * z[0] + w1 * z[1]);
    }
}

template class Gauss4Stepper<double>;
template class Gauss4Stepper<std::complex<double>>;

// ---- names ----

std::string to_string(Integrator integrator) { return integrator == Integrator::rk4 ? "rk4" : "gauss4"; }

std::string to_string(Problem problem)
{
    switch (problem) {
    case Problem::heat: return "heat";
    case Problem::schrodinger: return "schrodinger";
    case Problem::wave: return "wave";
    }
    return "unknown";
}

Problem parse_problem(const std::string& text)
{
    if (text == "heat") return Problem::heat;
    if (text == "schrodinger") return Problem::schrodinger;
    if (text == "wave") return Problem::wave;
    throw ConfigError("unknown equation '" + text + "' (expected heat, schrodinger or wave)");
}

// ---- run configuration ----

RunSpec RunSpec::preset(Problem problem, LaplacianForm laplacian)
{
    RunSpec spec;
    spec.problem = problem;
    spec.laplacian = laplacian;
    switch (problem) {
    case Problem::heat:
        spec.final_time = 2.0;
        spec.dt_factor = 0.25;
        spec.integrator = Integrator::gauss4;
        spec.dirichlet_strength = 1.0;
        break;
    case Problem::schrodinger:
        spec.left = {-1.0, 0.0, 0.0, 1.0};
        spec.right = {0.0, 1.0, 0.0, 1.0};
        spec.final_time = 0.5;
        spec.dt_factor = 0.1;
        spec.integrator = Integrator::gauss4;
        if (laplacian == LaplacianForm::semidefinite) {
            spec.theta = 1.2;
            spec.dirichlet_strength = 1.2;
        } else {
            spec.dirichlet_strength = 1.0;
        }
        break;
    case Problem::wave:
        spec.final_time = 2.0;
        spec.dt_factor = 0.1;
        spec.integrator = Integrator::rk4;
        spec.laplacian = LaplacianForm::semidefinite;
        spec.dirichlet_strength = 3.0;
        break;
    }
    return spec;
}

void RunSpec::validate() const
{
    if (order != 4 && order != 6 && order != 2 && order != 8)
        throw ConfigError("order must be one of 2, 4, 6, 8");
    if (n_coarse < 2) throw ConfigError("coarse grid needs at least two points per direction");
    if (ratio < 1) throw ConfigError("refinement ratio must be positive");
    if (!(final_time > 0.0)) throw ConfigError("final time must be positive");
    if (!(dt_factor > 0.0)) throw ConfigError("dt factor must be positive");
    if (!(left.x1 == right.x0) || left.y0 != right.y0 || left.y1 != right.y1)
        throw ConfigError("blocks must share the interface segment");
    if (problem == Problem::wave) {
        if (integrator != Integrator::rk4) throw ConfigError("the wave equation is advanced with rk4");
        if (laplacian != LaplacianForm::semidefinite) throw ConfigError("the wave equation needs the wave-form operator");
    } else if (integrator == Integrator::rk4 && !allow_explicit_parabolic) {
        throw ConfigError("explicit rk4 on " + to_string(problem) + " requires allow_explicit_parabolic");
    }
    if (problem == Problem::heat && laplacian == LaplacianForm::semidefinite)
        throw ConfigError("the heat runs use the heat-form operator");
}

TwoBlockDomain run_domain(const RunSpec& spec, const SbpDataSource& source)
{
    TwoBlockSpec tb;
    tb.left = spec.left;
    tb.right = spec.right;
    tb.nx_u = spec.n_coarse;
    tb.ny_u = spec.n_coarse;
    tb.nx_v = spec.ratio * (spec.n_coarse - 1) + 1;
    tb.ratio = spec.ratio;
    tb.order = spec.order;
    return make_two_block(tb, source);
}

AssembledSystem run_system(const RunSpec& spec, const TwoBlockDomain& domain)
{
    const int p = spec.order / 2;
    const OpInterpolationSet set = spec.ratio == 1 ? identity_set(domain.hu, p) : build_op_set(domain.hu, domain.hv, p);
    CouplingConfig cfg;
    cfg.mode = spec.mode;
    cfg.theta_u = spec.theta;
    cfg.theta_v = spec.theta;
    cfg.dirichlet_strength = spec.dirichlet_strength;
    switch (spec.problem) {
    case Problem::heat:
        cfg.equation = Equation::heat;
        cfg.a = spec.heat.lambda1;
        cfg.b = spec.heat.lambda2;
        break;
    case Problem::schrodinger:
        if (spec.laplacian == LaplacianForm::semidefinite) {
            cfg.equation = Equation::wave_form;
            cfg.a = 1.0;
            cfg.b = 1.0;
        } else {
            cfg.equation = Equation::schrodinger_simple;
            cfg.a = kI;
            cfg.b = kI;
        }
        break;
    case Problem::wave:
        cfg.equation = Equation::wave_form;
        cfg.a = spec.wave.c1 * spec.wave.c1;
        cfg.b = spec.wave.c2 * spec.wave.c2;
        break;
    }
    return assemble(domain, set, cfg);
}

AnalyticSolution run_solution(const RunSpec& spec)
{
    switch (spec.problem) {
    case Problem::heat: return heat_exact(spec.heat);
    case Problem::schrodinger: return schrodinger_exact(spec.schrodinger);
    case Problem::wave: return wave_exact(spec.wave);
    }
    throw ConfigError("unknown problem");
}

CVec sample(const TwoBlockDomain& domain, const AnalyticSolution& sol, double t, bool time_derivative)
{
    CVec out(domain.size());
    for (const Side side : {Side::u, Side::v}) {
        const Block2D& block = domain.block(side);
        const int offset = domain.offset(side);
        for (int ix = 0; ix < block.nx; ++ix)
            for (int iy = 0; iy < block.ny; ++iy) {
                const double x = block.x(ix);
                const double y = block.y(iy);
                out(offset + block.index(ix, iy)) =
                    time_derivative ? sol.time_derivative(side, x, y, t) : sol.value(side, x, y, t);
            }
    }
    return out;
}

CVec sample_boundary(const BoundaryInjection& bnd, const AnalyticSolution& sol, double t)
{
    CVec out(static_cast<Eigen::Index>(bnd.points.size()));
    for (std::size_t i = 0; i < bnd.points.size(); ++i) {
        const BoundaryPoint& pt = bnd.points[i];
        out(static_cast<Eigen::Index>(i)) = sol.value(pt.side, pt.x, pt.y, t);
    }
    return out;
}

namespace {

RunResult base_result(const TwoBlockDomain& domain, const StepCount& count)
{
    RunResult out;
    out.h_coarse = domain.left.hx();
    out.h_fine = domain.right.hx();
    out.dt = count.dt;
    out.steps = count.steps;
    out.unknowns = domain.size();
    return out;
}

Eigen::VectorXd potential_mask(const TwoBlockDomain& domain)
{
    Eigen::VectorXd mask = Eigen::VectorXd::Zero(domain.size());
    mask.tail(domain.right.size()).setOnes();
    return mask;
}

RunResult run_heat(const RunSpec& spec, const TwoBlockDomain& domain, const AssembledSystem& sys,
                   const AnalyticSolution& sol)
{
    LinearFlow<double> flow;
    flow.A = sys.L;
    const SpMat& inject = sys.boundary.matrix;
    flow.forcing = [&](double t) -> Eigen::VectorXd { return inject * sample_boundary(sys.boundary, sol, t).real(); };
    const Eigen::VectorXd y0 = sample(domain, sol, 0.0).real();

    const bool explicit_run = spec.integrator == Integrator::rk4;
    const double max_coef = std::max(spec.heat.lambda1, spec.heat.lambda2);
    const double h_v = domain.right.hx();
    const StepCount count =
        steps_for(spec.final_time, explicit_run ? 0.2 * h_v * h_v / max_coef : spec.dt_factor * h_v);
    const Eigen::VectorXd y = explicit_run ? rk4_advance(flow, y0, 0.0, count.dt, count.steps)
                                           : gauss4_advance(flow, y0, 0.0, count.dt, count.steps);
    RunResult out = base_result(domain, count);
    out.errors = error_norms(y, sample(domain, sol, spec.final_time).real(), sys.H);
    return out;
}

RunResult run_schrodinger(const RunSpec& spec, const TwoBlockDomain& domain, const AssembledSystem& sys,
                          const AnalyticSolution& sol)
{
    LinearFlow<Complex> flow;
    const Eigen::VectorXd mask = potential_mask(domain);
    SpMat generator = sys.L;
    generator += SpMat((spec.schrodinger.v0 * mask).asDiagonal());
    flow.A = kI * generator.cast<Complex>();
    const CSpMat inject = sys.boundary.matrix.cast<Complex>();
    flow.forcing = [&](double t) -> CVec { return kI * (inject * sample_boundary(sys.boundary, sol, t)); };
    const CVec y0 = sample(domain, sol, 0.0);

    const double h_v = domain.right.hx();
    const bool explicit_run = spec.integrator == Integrator::rk4;
    const StepCount count = steps_for(spec.final_time, explicit_run ? 0.2 * h_v * h_v : spec.dt_factor * h_v);
    const CVec y = explicit_run ? rk4_advance(flow, y0, 0.0, count.dt, count.steps)
                                : gauss4_advance(flow, y0, 0.0, count.dt, count.steps);
    RunResult out = base_result(domain, count);
    out.errors = error_norms(y, sample(domain, sol, spec.final_time), sys.H);
    return out;
}

// [w; w_t]' = [w_t; L w + B g(t)]
struct WaveRhs {
    const SpMat* L;
    std::function<Eigen::VectorXd(double)> forcing;

    Eigen::VectorXd operator()(double t, const Eigen::VectorXd& state) const
    {
        const Eigen::Index n = L->rows();
        Eigen::VectorXd out(2 * n);
        out.head(n) = state.tail(n);
        out.tail(n) = *L * state.head(n);
        if (forcing) out.tail(n) += forcing(t);
        return out;
    }
};

RunResult run_wave(const RunSpec& spec, const TwoBlockDomain& domain, const AssembledSystem& sys,
                   const AnalyticSolution& sol)
{
    const SpMat& inject = sys.boundary.matrix;
    WaveRhs rhs{&sys.L, [&](double t) -> Eigen::VectorXd {
                    return inject * sample_boundary(sys.boundary, sol, t).real();
                }};
    const int n = domain.size();
    Eigen::VectorXd state(2 * n);
    state.head(n) = sample(domain, sol, 0.0).real();
    state.tail(n) = sample(domain, sol, 0.0, true).real();
    const StepCount count = steps_for(spec.final_time, spec.dt_factor * domain.right.hx());
    state = rk4_advance(rhs, state, 0.0, count.dt, count.steps);
    RunResult out = base_result(domain, count);
    out.errors = error_norms(Eigen::VectorXd(state.head(n)), sample(domain, sol, spec.final_time).real(), sys.H);
    return out;
}

}  // namespace

RunResult run_case(const RunSpec& spec, const SbpDataSource& source)
{
    spec.validate();
    const TwoBlockDomain domain = run_domain(spec, source);
    const AssembledSystem sys = run_system(spec, domain);
    const AnalyticSolution sol = run_solution(spec);
    switch (spec.problem) {
    case Problem::heat: return run_heat(spec, domain, sys, sol);
    case Problem::schrodinger: return run_schrodinger(spec, domain, sys, sol);
    case Problem::wave: return run_wave(spec, domain, sys, sol);
    }
    throw ConfigError("unknown problem");
}

EnergyRun wave_energy_run(const RunSpec& spec, const SbpDataSource& source)
{
    spec.validate();
    const TwoBlockDomain domain = run_domain(spec, source);
    const AssembledSystem sys = run_system(spec, domain);
    const int n = domain.size();

    const double yc = 0.5 * (spec.left.y0 + spec.left.y1);
    const double width = 0.1 * (spec.left.y1 - spec.left.y0);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(2 * n);
    for (const Side side : {Side::u, Side::v}) {
        const Block2D& block = domain.block(side);
        for (int ix = 0; ix < block.nx; ++ix)
            for (int iy = 0; iy < block.ny; ++iy) {
                const double dx = block.x(ix) - domain.interface_x;
                const double dy = block.y(iy) - yc;
                state(domain.offset(side) + block.index(ix, iy)) = std::exp(-(dx * dx + dy * dy) / (width * width));
            }
    }

    EnergyRun out;
    out.initial_energy = wave_energy(sys, state.head(n), state.tail(n));
    const StepCount count = steps_for(spec.final_time, spec.dt_factor * domain.right.hx());
    state = rk4_advance(WaveRhs{&sys.L, {}}, state, 0.0, count.dt, count.steps);
    out.final_energy = wave_energy(sys, state.head(n), state.tail(n));
    out.relative_drift = std::abs(out.final_energy - out.initial_energy) / std::abs(out.initial_energy);
    out.max_amplitude = state.head(n).cwiseAbs().maxCoeff();
    out.steps = count.steps;
    return out;
}

}  // namespace sbpsat
