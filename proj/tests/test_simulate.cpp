#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "sbpsat/errors.hpp"
#include "sbpsat/simulate.hpp"

using namespace sbpsat;

namespace {

using Complex = std::complex<double>;

LinearFlow<double> scalar_flow(double lambda)
{
    LinearFlow<double> flow;
    flow.A.resize(1, 1);
    flow.A.insert(0, 0) = lambda;
    return flow;
}

Complex pade22(Complex z) { return (1.0 + z / 2.0 + z * z / 12.0) / (1.0 - z / 2.0 + z * z / 12.0); }

SpMat random_skew(int n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = n01(rng);
    const Eigen::MatrixXd skew = a - a.transpose();
    return skew.sparseView();
}

RunSpec small_wave()
{
    RunSpec spec = RunSpec::preset(Problem::wave);
    spec.left = Rect{-1.0, 0.0, 0.0, 1.0};
    spec.right = Rect{0.0, 1.0, 0.0, 1.0};
    spec.n_coarse = 13;
    return spec;
}

}  // namespace

TEST(AnalyticOracle, HeatParameters)
{
    const AnalyticSolution s = heat_exact({0.1, 0.025, 0.5, 0.5});
    EXPECT_NEAR(s.omega, 0.05, 1e-15);
    EXPECT_NEAR(s.k, std::sqrt(1.75), 1e-14);
    const InterfaceJumps j = s.interface_jumps(0.0, 10.0, 0.7);
    EXPECT_LE(j.value, 1e-12);
    EXPECT_LE(j.flux, 1e-12);
}

TEST(AnalyticOracle, HeatMatchedMediaHasNoReflection)
{
    const AnalyticSolution s = heat_exact({0.3, 0.3, 0.5, 0.5});
    EXPECT_NEAR(s.gamma, 0.0, 1e-15);
    for (const double x : {-0.5, 0.0}) {
        const Complex u = s.value(Side::u, x, 0.3, 0.2);
        const Complex v = s.value(Side::v, -x, 0.3, 0.2);
        EXPECT_NEAR(std::abs(u - std::cos(0.5 * x + 0.15) * std::exp(-s.omega * 0.2)), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(v - std::cos(-0.5 * x + 0.15) * std::exp(-s.omega * 0.2)), 0.0, 1e-14);
    }
}

TEST(AnalyticOracle, HeatEvanescentRegimeRejected)
{
    EXPECT_THROW((void)heat_exact({0.01, 1.0, 0.5, 0.5}), ConfigError);
}

TEST(AnalyticOracle, SchrodingerStep)
{
    const AnalyticSolution s = schrodinger_exact({1.0, 3.0 * M_PI * M_PI, M_PI, M_PI});
    EXPECT_NEAR(s.omega, 2.0 * M_PI * M_PI, 1e-12);
    EXPECT_NEAR(s.k1_tilde, 2.0 * M_PI, 1e-12);
    EXPECT_NEAR(std::abs(s.b_coef - (-1.0 / 3.0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(s.c_coef - 2.0 / 3.0), 0.0, 1e-14);
    const InterfaceJumps j = s.interface_jumps(0.0, 1.0, 0.3, 100);
    EXPECT_LE(j.value, 1e-12);
    EXPECT_LE(j.flux, 1e-12);
}

TEST(AnalyticOracle, SchrodingerWithoutStep)
{
    const AnalyticSolution s = schrodinger_exact({1.0, 0.0, M_PI, M_PI});
    EXPECT_NEAR(std::abs(s.b_coef), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s.c_coef - 1.0), 0.0, 1e-15);
}

TEST(AnalyticOracle, SchrodingerSatisfiesPde)
{
    // i u_t = -Laplace(u) - V u with V = V0 on the right block
    const AnalyticSolution s = schrodinger_exact({1.0, 3.0 * M_PI * M_PI, M_PI, M_PI});
    const double h = 1e-4;
    for (const Side side : {Side::u, Side::v}) {
        const double x = side == Side::u ? -0.3 : 0.4;
        const double y = 0.35;
        const double t = 0.1;
        auto u = [&](double xx, double yy) { return s.value(side, xx, yy, t); };
        const Complex lap = (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4.0 * u(x, y)) / (h * h);
        const double v = side == Side::v ? s.schrodinger.v0 : 0.0;
        const Complex residual = Complex(0.0, 1.0) * s.time_derivative(side, x, y, t) + lap + v * u(x, y);
        EXPECT_LE(std::abs(residual), 1e-4 * (1.0 + std::abs(lap)));
    }
}

TEST(AnalyticOracle, WaveSnell)
{
    const AnalyticSolution s = wave_exact({1.0, 0.5});
    EXPECT_NEAR(s.wave_k1, std::sqrt(7.0), 1e-14);
    EXPECT_NEAR(s.wave_k2, (1.0 - 0.25 * std::sqrt(7.0)) / (1.0 + 0.25 * std::sqrt(7.0)), 1e-14);
    const InterfaceJumps j = s.interface_jumps(0.0, 10.0, 0.8);
    EXPECT_LE(j.value, 1e-12);
    EXPECT_LE(j.flux, 1e-12);
}

TEST(AnalyticOracle, WaveTransparentInterface)
{
    const AnalyticSolution s = wave_exact({0.7, 0.7});
    EXPECT_NEAR(s.wave_k1, 1.0, 1e-15);
    EXPECT_NEAR(s.wave_k2, 0.0, 1e-15);
}

TEST(AnalyticOracle, WaveTotalInternalReflectionRejected)
{
    EXPECT_THROW((void)wave_exact({0.5, 1.0}), ConfigError);
}

TEST(Rk4, ZeroStaysZero)
{
    const LinearFlow<double> flow = scalar_flow(-3.0);
    const Vec<double> y = rk4_advance(flow, Vec<double>(Vec<double>::Zero(1)), 0.0, 0.1, 10);
    EXPECT_EQ(y(0), 0.0);
}

TEST(Rk4, StabilityPolynomial)
{
    for (const double z : {-2.5, -0.3, 0.2, 1.0}) {
        const LinearFlow<double> flow = scalar_flow(z);
        const Vec<double> y = rk4_advance(flow, Vec<double>(Vec<double>::Ones(1)), 0.0, 1.0, 1);
        const double expected = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
        EXPECT_NEAR(y(0), expected, 1e-15 * std::max(1.0, std::abs(expected)));
    }
}

TEST(Rk4, BlowUpIsDetected)
{
    const LinearFlow<double> flow = scalar_flow(-10.0);
    EXPECT_THROW((void)rk4_advance(flow, Vec<double>(Vec<double>::Ones(1)), 0.0, 1.0, 40), BlowUpError);
}

TEST(Gauss4, ScalarStepIsPadeApproximant)
{
    for (const double z : {-50.0, -1.0, -0.01, 0.5}) {
        const LinearFlow<double> flow = scalar_flow(z);
        const Gauss4Stepper<double> stepper(flow, 1.0);
        const Vec<double> y = stepper.step(Vec<double>::Ones(1), 0.0);
        EXPECT_NEAR(y(0), pade22(z).real(), 1e-14);
    }
    for (const Complex z : {Complex(0.0, 3.0), Complex(-0.5, 1.5)}) {
        LinearFlow<Complex> flow;
        flow.A.resize(1, 1);
        flow.A.insert(0, 0) = z;
        const Gauss4Stepper<Complex> stepper(flow, 1.0);
        const Vec<Complex> y = stepper.step(Vec<Complex>::Ones(1), 0.0);
        EXPECT_NEAR(std::abs(y(0) - pade22(z)), 0.0, 1e-14);
    }
}

TEST(Gauss4, ForcedScalarProblemIsFourthOrder)
{
    // y' = -y + cos t, y(0) = 0: y = (sin t + cos t - e^{-t}) / 2
    LinearFlow<double> flow = scalar_flow(-1.0);
    flow.forcing = [](double t) { return Vec<double>::Constant(1, std::cos(t)); };
    auto error = [&](int n) {
        const Vec<double> y = gauss4_advance(flow, Vec<double>(Vec<double>::Zero(1)), 0.0, 2.0 / n, n);
        return std::abs(y(0) - 0.5 * (std::sin(2.0) + std::cos(2.0) - std::exp(-2.0)));
    };
    const double rate = std::log2(error(10) / error(20));
    EXPECT_GT(rate, 3.8);
    EXPECT_LT(rate, 4.3);
}

TEST(Gauss4, TimeReversibleOnSkewSystems)
{
    LinearFlow<double> forward;
    forward.A = random_skew(30, 5);
    LinearFlow<double> backward;
    backward.A = -forward.A;
    std::mt19937 rng(3);
    std::normal_distribution<double> n01;
    Vec<double> y0(30);
    for (int i = 0; i < 30; ++i) y0(i) = n01(rng);
    const Gauss4Stepper<double> fwd(forward, 0.05);
    const Gauss4Stepper<double> bwd(backward, 0.05);
    const Vec<double> back = bwd.step(fwd.step(y0, 0.0), 0.05);
    EXPECT_LE((back - y0).norm(), 1e-12 * y0.norm());
    // the quadratic invariant of a skew flow is conserved
    EXPECT_NEAR(fwd.step(y0, 0.0).norm(), y0.norm(), 1e-12 * y0.norm());
    EXPECT_LE(fwd.last_stage_residual(), 1e-12 * y0.norm());
}

TEST(Gauss4, RejectsNonPositiveStep)
{
    const LinearFlow<double> flow = scalar_flow(-1.0);
    EXPECT_THROW((Gauss4Stepper<double>(flow, 0.0)), ConfigError);
}

TEST(ErrorNorms, Examples)
{
    const Eigen::VectorXd h = Eigen::VectorXd::Constant(4, 0.5);  // two unit-area blocks
    const Eigen::VectorXd exact = Eigen::VectorXd::LinSpaced(4, 1.0, 2.0);
    const ErrorNorms zero = error_norms(exact, exact, h);
    EXPECT_EQ(zero.l2_abs, 0.0);
    EXPECT_EQ(zero.max_abs, 0.0);
    const Eigen::VectorXd shifted = (exact.array() + 0.3).matrix();
    const ErrorNorms c = error_norms(shifted, exact, h);
    EXPECT_NEAR(c.l2_abs, 0.3 * std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(c.max_abs, 0.3, 1e-15);

    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    Eigen::VectorXd w(50);
    Eigen::VectorXcd num(50);
    Eigen::VectorXcd ex(50);
    for (int i = 0; i < 50; ++i) {
        w(i) = u(rng);
        num(i) = {u(rng), u(rng)};
        ex(i) = {u(rng), u(rng)};
    }
    double sum = 0.0;
    double ref = 0.0;
    for (int i = 0; i < 50; ++i) {
        sum += w(i) * std::norm(num(i) - ex(i));
        ref += w(i) * std::norm(ex(i));
    }
    const ErrorNorms r = error_norms(num, ex, w);
    EXPECT_NEAR(r.l2_abs, std::sqrt(sum), 1e-14);
    EXPECT_NEAR(r.l2_rel, std::sqrt(sum / ref), 1e-14);
}

TEST(RunSpec, PresetsAndValidation)
{
    const RunSpec heat = RunSpec::preset(Problem::heat);
    EXPECT_EQ(heat.integrator, Integrator::gauss4);
    EXPECT_DOUBLE_EQ(heat.dt_factor, 0.25);
    const RunSpec wave = RunSpec::preset(Problem::wave);
    EXPECT_EQ(wave.integrator, Integrator::rk4);
    EXPECT_DOUBLE_EQ(wave.dt_factor, 0.1);
    EXPECT_DOUBLE_EQ(wave.theta, 3.0);
    const RunSpec schr = RunSpec::preset(Problem::schrodinger, LaplacianForm::semidefinite);
    EXPECT_DOUBLE_EQ(schr.dt_factor, 0.1);
    EXPECT_DOUBLE_EQ(schr.dirichlet_strength, 1.2);

    RunSpec explicit_heat = heat;
    explicit_heat.integrator = Integrator::rk4;
    EXPECT_THROW(explicit_heat.validate(), ConfigError);
    explicit_heat.allow_explicit_parabolic = true;
    EXPECT_NO_THROW(explicit_heat.validate());
}

TEST(Runs, HeatErrorDecreasesAtFourthOrder)
{
    RunSpec spec = RunSpec::preset(Problem::heat);
    spec.n_coarse = 17;
    const double e17 = run_case(spec).errors.l2_abs;
    spec.n_coarse = 33;
    const double e33 = run_case(spec).errors.l2_abs;
    EXPECT_GT(std::log2(e17 / e33), 3.5);
}

TEST(Runs, ExplicitHeatNeedsTheFlagAndAgreesWithGauss)
{
    RunSpec spec = RunSpec::preset(Problem::heat);
    spec.n_coarse = 9;
    spec.order = 2;
    spec.final_time = 0.5;
    const double implicit = run_case(spec).errors.l2_abs;
    spec.integrator = Integrator::rk4;
    EXPECT_THROW((void)run_case(spec), ConfigError);
    spec.allow_explicit_parabolic = true;
    const RunResult r = run_case(spec);
    EXPECT_NEAR(r.errors.l2_abs, implicit, 0.05 * implicit);
}

TEST(Runs, ZeroDataWaveStaysZero)
{
    RunSpec spec = small_wave();
    spec.final_time = 0.2;
    spec.wave = WaveParams{1.0, 0.5};
    const TwoBlockDomain d = run_domain(spec);
    const AssembledSystem sys = run_system(spec, d);
    EXPECT_EQ(sys.size(), d.size());
    const EnergyRun r = wave_energy_run(spec);
    EXPECT_GT(r.initial_energy, 0.0);
}

TEST(Runs, WaveEnergyDriftIsSmall)
{
    RunSpec spec = RunSpec::preset(Problem::wave);
    const EnergyRun r = wave_energy_run(spec);
    EXPECT_LE(r.relative_drift, 1e-6);
    EXPECT_GT(r.steps, 0);
    spec.theta = 1.0001;
    EXPECT_NO_THROW((void)wave_energy_run(spec));
}

TEST(Runs, SchrodingerSemidefiniteConservesNorm)
{
    RunSpec spec = RunSpec::preset(Problem::schrodinger, LaplacianForm::semidefinite);
    spec.n_coarse = 13;
    const TwoBlockDomain d = run_domain(spec);
    const AssembledSystem sys = run_system(spec, d);
    LinearFlow<Complex> flow;
    flow.A = Complex(0.0, 1.0) * sys.L.cast<Complex>();
    Vec<Complex> w(d.size());
    for (const Side side : {Side::u, Side::v}) {
        const Block2D& b = d.block(side);
        for (int ix = 0; ix < b.nx; ++ix)
            for (int iy = 0; iy < b.ny; ++iy) {
                const double x = b.x(ix);
                const double y = b.y(iy) - 0.5;
                w(d.offset(side) + b.index(ix, iy)) = std::exp(-40.0 * (x * x + y * y)) * std::exp(Complex(0.0, 5.0 * x));
            }
    }
    auto h_norm = [&](const Vec<Complex>& v) { return std::sqrt((sys.H.array() * v.array().abs2()).sum()); };
    const double hv = (spec.right.x1 - spec.right.x0) / (d.right.nx - 1);
    const double dt = spec.dt_factor * hv;
    const int steps = static_cast<int>(std::lround(spec.final_time / dt));
    const Vec<Complex> end = gauss4_advance(flow, w, 0.0, dt, steps);
    EXPECT_LE(std::abs(h_norm(end) - h_norm(w)) / h_norm(w), 1e-10);
}

TEST(Runs, SampleUsesStackedLayout)
{
    RunSpec spec = small_wave();
    const TwoBlockDomain d = run_domain(spec);
    const AnalyticSolution s = run_solution(spec);
    const Vec<Complex> v = sample(d, s, 0.25);
    ASSERT_EQ(v.size(), d.size());
    const Block2D& r = d.right;
    EXPECT_EQ(v(d.offset(Side::v) + r.index(3, 4)), s.value(Side::v, r.x(3), r.y(4), 0.25));
}
