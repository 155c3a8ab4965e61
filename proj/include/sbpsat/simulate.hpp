#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "sbpsat/coupling.hpp"
#include "sbpsat/errors.hpp"

namespace sbpsat {

// ---- analytic solutions -------------------------------------------------

enum class SolutionKind { heat_two_media, schrodinger_step, wave_snell };

struct HeatParams {
    double lambda1 = 0.1;
    double lambda2 = 0.025;
    double k1 = 0.5;
    double k2 = 0.5;
};

struct SchrodingerParams {
    double amplitude = 1.0;
    double v0 = 3.0 * M_PI * M_PI;
    double k1 = M_PI;
    double k2 = M_PI;
};

struct WaveParams {
    double c1 = 1.0;
    double c2 = 0.5;
};

struct InterfaceJumps {
    double value = 0.0;
    double flux = 0.0;
};

class AnalyticSolution {
public:
    SolutionKind kind = SolutionKind::heat_two_media;
    HeatParams heat;
    SchrodingerParams schrodinger;
    WaveParams wave;

    // heat: omega, k, gamma; Schrodinger: omega, k1~, B, C; wave: k1, k2
    double omega = 0.0;
    double k = 0.0;
    double gamma = 0.0;
    double k1_tilde = 0.0;
    std::complex<double> b_coef{};
    std::complex<double> c_coef{};
    double wave_k1 = 0.0;
    double wave_k2 = 0.0;

    [[nodiscard]] std::complex<double> value(Side side, double x, double y, double t) const;
    [[nodiscard]] std::complex<double> time_derivative(Side side, double x, double y, double t) const;
    [[nodiscard]] std::complex<double> x_derivative(Side side, double x, double y, double t) const;
    // weight multiplying the normal derivative in the flux condition
    [[nodiscard]] double flux_coefficient(Side side) const;
    [[nodiscard]] InterfaceJumps interface_jumps(double y0, double y1, double t, int samples = 100) const;
};

[[nodiscard]] AnalyticSolution heat_exact(const HeatParams& params);
[[nodiscard]] AnalyticSolution schrodinger_exact(const SchrodingerParams& params);
[[nodiscard]] AnalyticSolution wave_exact(const WaveParams& params);

// ---- integrators --------------------------------------------------------

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Integrator { rk4, gauss4 };
[[nodiscard]] std::string to_string(Integrator integrator);

constexpr double kBlowUpFactor = 1e6;

// y' = A y + f(t); an empty forcing means f = 0.
template <class Scalar>
struct LinearFlow {
    Eigen::SparseMatrix<Scalar> A;
    std::function<Vec<Scalar>(double)> forcing;

    [[nodiscard]] Vec<Scalar> operator()(double t, const Vec<Scalar>& y) const
    {
        Vec<Scalar> out = A * y;
        if (forcing) out += forcing(t);
        return out;
    }
};

template <class Derived>
void check_growth(const Eigen::MatrixBase<Derived>& y, double reference, double t)
{
    const double norm = y.cwiseAbs().maxCoeff();
    if (!std::isfinite(norm) || norm > kBlowUpFactor * std::max(reference, 1.0))
        throw BlowUpError("solution norm grew beyond " + std::to_string(kBlowUpFactor) + "x at t="
                          + std::to_string(t));
}

// Classical four-stage Runge-Kutta; rhs(t, y) is evaluated at the stage times.
template <class Rhs, class Scalar>
[[nodiscard]] Vec<Scalar> rk4_advance(const Rhs& rhs, Vec<Scalar> y, double t0, double dt, int n_steps)
{
    const double reference = y.size() > 0 ? y.cwiseAbs().maxCoeff() : 0.0;
    for (int step = 0; step < n_steps; ++step) {
        const double t = t0 + step * dt;
        const Vec<Scalar> k1 = rhs(t, y);
        const Vec<Scalar> k2 = rhs(t + 0.5 * dt, Vec<Scalar>(y + (0.5 * dt) * k1));
        const Vec<Scalar> k3 = rhs(t + 0.5 * dt, Vec<Scalar>(y + (0.5 * dt) * k2));
        const Vec<Scalar> k4 = rhs(t + dt, Vec<Scalar>(y + dt * k3));
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (y.size() > 0) check_growth(y, reference, t + dt);
    }
    return y;
}

// Two-stage Gauss-Legendre step for y' = A y + f(t).  The Butcher matrix is
// diagonalized, so each step needs one complex solve with I - dt*lambda*A for
// real A and two for complex A; factorizations are computed once.
template <class Scalar>
class Gauss4Stepper {
public:
    using Complex = std::complex<double>;
    using CVec = Vec<Complex>;

    Gauss4Stepper(const LinearFlow<Scalar>& flow, double dt);

    [[nodiscard]] Vec<Scalar> step(const Vec<Scalar>& y, double t) const;
    [[nodiscard]] double dt() const { return dt_; }
    // dt * |stage residual|_max of the last step
    [[nodiscard]] double last_stage_residual() const { return last_residual_; }

private:
    static constexpr bool kReal = !Eigen::NumTraits<Scalar>::IsComplex;

    const LinearFlow<Scalar>* flow_;
    double dt_;
    Eigen::SparseMatrix<Complex> a_complex_;
    std::array<Complex, 2> lambda_{};
    Eigen::Matrix2cd t_;
    Eigen::Matrix2cd t_inv_;
    std::array<double, 2> c_{};
    std::array<Eigen::SparseMatrix<Complex>, 2> shifted_;
    std::array<Eigen::SparseLU<Eigen::SparseMatrix<Complex>>, 2> lu_;
    mutable double last_residual_ = 0.0;
};

template <class Scalar>
[[nodiscard]] Vec<Scalar> gauss4_advance(const LinearFlow<Scalar>& flow, Vec<Scalar> y, double t0, double dt,
                                         int n_steps)
{
    const Gauss4Stepper<Scalar> stepper(flow, dt);
    const double reference = y.size() > 0 ? y.cwiseAbs().maxCoeff() : 0.0;
    for (int step = 0; step < n_steps; ++step) {
        y = stepper.step(y, t0 + step * dt);
        if (y.size() > 0) check_growth(y, reference, t0 + (step + 1) * dt);
    }
    return y;
}

extern template class Gauss4Stepper<double>;
extern template class Gauss4Stepper<std::complex<double>>;

// ---- error measures -----------------------------------------------------

struct ErrorNorms {
    double l2_abs = 0.0;
    double l2_rel = 0.0;
    double max_abs = 0.0;
};

template <class DerivedA, class DerivedB>
[[nodiscard]] ErrorNorms error_norms(const Eigen::MatrixBase<DerivedA>& numeric,
                                     const Eigen::MatrixBase<DerivedB>& exact, const Eigen::VectorXd& h_global)
{
    const auto err = (numeric - exact).eval();
    ErrorNorms out;
    out.l2_abs = std::sqrt((h_global.array() * err.array().abs2()).sum());
    const double ref = std::sqrt((h_global.array() * exact.array().abs2()).sum());
    out.l2_rel = ref > 0.0 ? out.l2_abs / ref : out.l2_abs;
    out.max_abs = err.size() > 0 ? err.cwiseAbs().maxCoeff() : 0.0;
    return out;
}

// ---- runs against the analytic solutions --------------------------------

enum class Problem { heat, schrodinger, wave };
// standard: heat-form / Schrodinger-simple operators; semidefinite: wave-form Laplacian
enum class LaplacianForm { standard, semidefinite };

[[nodiscard]] std::string to_string(Problem problem);
[[nodiscard]] Problem parse_problem(const std::string& text);

struct RunSpec {
    Problem problem = Problem::heat;
    LaplacianForm laplacian = LaplacianForm::standard;
    int order = 4;
    CouplingMode mode = CouplingMode::op;
    int n_coarse = 17;
    int ratio = 2;
    Rect left{-10.0, 0.0, 0.0, 10.0};
    Rect right{0.0, 10.0, 0.0, 10.0};
    double final_time = 2.0;
    double dt_factor = 0.25;  // dt = dt_factor * h_v
    Integrator integrator = Integrator::gauss4;
    double theta = 3.0;
    double dirichlet_strength = 1.0;
    bool allow_explicit_parabolic = false;
    HeatParams heat;
    SchrodingerParams schrodinger;
    WaveParams wave;

    [[nodiscard]] static RunSpec preset(Problem problem, LaplacianForm laplacian = LaplacianForm::standard);
    void validate() const;
};

struct RunResult {
    ErrorNorms errors;
    double h_coarse = 0.0;
    double h_fine = 0.0;
    double dt = 0.0;
    int steps = 0;
    int unknowns = 0;
};

[[nodiscard]] TwoBlockDomain run_domain(const RunSpec& spec, const SbpDataSource& source = SbpDataSource::shipped());
[[nodiscard]] AssembledSystem run_system(const RunSpec& spec, const TwoBlockDomain& domain);
[[nodiscard]] AnalyticSolution run_solution(const RunSpec& spec);
[[nodiscard]] RunResult run_case(const RunSpec& spec, const SbpDataSource& source = SbpDataSource::shipped());

// Samples the solution (or its time derivative) on the stacked [u; v] layout.
[[nodiscard]] Vec<std::complex<double>> sample(const TwoBlockDomain& domain, const AnalyticSolution& sol, double t,
                                               bool time_derivative = false);
[[nodiscard]] Vec<std::complex<double>> sample_boundary(const BoundaryInjection& bnd, const AnalyticSolution& sol,
                                                        double t);

struct EnergyRun {
    double initial_energy = 0.0;
    double final_energy = 0.0;
    double relative_drift = 0.0;
    double max_amplitude = 0.0;
    int steps = 0;
};

// Wave run with homogeneous boundary data and a Gaussian pulse at rest.
[[nodiscard]] EnergyRun wave_energy_run(const RunSpec& spec, const SbpDataSource& source = SbpDataSource::shipped());

}  // namespace sbpsat
