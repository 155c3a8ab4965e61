#include <cmath>
#include <complex>
#include <sstream>

#include "sbpsat/simulate.hpp"

namespace sbpsat {

namespace {

using Complex = std::complex<double>;
constexpr Complex kI{0.0, 1.0};
constexpr double kJumpTol = 1e-12;

void check_interface(const AnalyticSolution& sol)
{
    for (const double t : {0.0, 0.37, 1.0}) {
        const InterfaceJumps jumps = sol.interface_jumps(0.0, 10.0, t);
        if (jumps.value > kJumpTol || jumps.flux > kJumpTol) {
            std::ostringstream msg;
            msg << "analytic solution violates the interface conditions: value jump " << jumps.value
                << ", flux jump " << jumps.flux;
            throw InvariantError(msg.str());
        }
    }
}

}  // namespace

Complex AnalyticSolution::value(Side side, double x, double y, double t) const
{
    switch (kind) {
    case SolutionKind::heat_two_media: {
        const double decay = std::exp(-omega * t);
        if (side == Side::u)
            return (std::cos(heat.k1 * x + heat.k2 * y) + gamma * std::cos(heat.k1 * x - heat.k2 * y)) * decay;
        return (1.0 + gamma) * std::cos(k * x + heat.k2 * y) * decay;
    }
    case SolutionKind::schrodinger_step: {
        const double k1 = schrodinger.k1;
        const double k2 = schrodinger.k2;
        if (side == Side::u)
            return schrodinger.amplitude * std::exp(kI * (k1 * x + k2 * y - omega * t))
                   + b_coef * std::exp(kI * (-k1 * x + k2 * y - omega * t));
        return c_coef * std::exp(kI * (k1_tilde * x + k2 * y - omega * t));
    }
    case SolutionKind::wave_snell: {
        const double phase = std::sqrt(2.0) * wave.c1 * t;
        if (side == Side::u) return std::cos(x + y - phase) + wave_k2 * std::cos(x - y + phase);
        return (1.0 + wave_k2) * std::cos(wave_k1 * x + y - phase);
    }
    }
    return {};
}

Complex AnalyticSolution::time_derivative(Side side, double x, double y, double t) const
{
    switch (kind) {
    case SolutionKind::heat_two_media:
        return -omega * value(side, x, y, t);
    case SolutionKind::schrodinger_step:
        return -kI * omega * value(side, x, y, t);
    case SolutionKind::wave_snell: {
        const double speed = std::sqrt(2.0) * wave.c1;
        const double phase = speed * t;
        if (side == Side::u)
            return speed * std::sin(x + y - phase) - wave_k2 * speed * std::sin(x - y + phase);
        return (1.0 + wave_k2) * speed * std::sin(wave_k1 * x + y - phase);
    }
    }
    return {};
}

Complex AnalyticSolution::x_derivative(Side side, double x, double y, double t) const
{
    switch (kind) {
    case SolutionKind::heat_two_media: {
        const double decay = std::exp(-omega * t);
        if (side == Side::u)
            return -heat.k1
                   * (std::sin(heat.k1 * x + heat.k2 * y) + gamma * std::sin(heat.k1 * x - heat.k2 * y)) * decay;
        return -(1.0 + gamma) * k * std::sin(k * x + heat.k2 * y) * decay;
    }
    case SolutionKind::schrodinger_step: {
        const double k1 = schrodinger.k1;
        const double k2 = schrodinger.k2;
        if (side == Side::u)
            return kI * k1
                   * (schrodinger.amplitude * std::exp(kI * (k1 * x + k2 * y - omega * t))
                      - b_coef * std::exp(kI * (-k1 * x + k2 * y - omega * t)));
        return kI * k1_tilde * c_coef * std::exp(kI * (k1_tilde * x + k2 * y - omega * t));
    }
    case SolutionKind::wave_snell: {
        const double phase = std::sqrt(2.0) * wave.c1 * t;
        if (side == Side::u) return -std::sin(x + y - phase) - wave_k2 * std::sin(x - y + phase);
        return -(1.0 + wave_k2) * wave_k1 * std::sin(wave_k1 * x + y - phase);
    }
    }
    return {};
}

double AnalyticSolution::flux_coefficient(Side side) const
{
    switch (kind) {
    case SolutionKind::heat_two_media: return side == Side::u ? heat.lambda1 : heat.lambda2;
    case SolutionKind::schrodinger_step: return 1.0;
    case SolutionKind::wave_snell: return side == Side::u ? wave.c1 * wave.c1 : wave.c2 * wave.c2;
    }
    return 1.0;
}

InterfaceJumps AnalyticSolution::interface_jumps(double y0, double y1, double t, int samples) const
{
    InterfaceJumps out;
    for (int i = 0; i < samples; ++i) {
        const double y = y0 + (y1 - y0) * i / std::max(samples - 1, 1);
        out.value = std::max(out.value, std::abs(value(Side::u, 0.0, y, t) - value(Side::v, 0.0, y, t)));
        const Complex flux_u = flux_coefficient(Side::u) * x_derivative(Side::u, 0.0, y, t);
        const Complex flux_v = flux_coefficient(Side::v) * x_derivative(Side::v, 0.0, y, t);
        out.flux = std::max(out.flux, std::abs(flux_u - flux_v));
    }
    return out;
}

AnalyticSolution heat_exact(const HeatParams& params)
{
    if (!(params.lambda1 > 0.0) || !(params.lambda2 > 0.0))
        throw ConfigError("heat diffusion coefficients must be positive");
    AnalyticSolution sol;
    sol.kind = SolutionKind::heat_two_media;
    sol.heat = params;
    sol.omega = params.lambda1 * (params.k1 * params.k1 + params.k2 * params.k2);
    const double radicand = sol.omega / params.lambda2 - params.k2 * params.k2;
    if (!(radicand > 0.0)) throw ConfigError("heat parameters give an evanescent transmitted wave");
    sol.k = std::sqrt(radicand);
    sol.gamma = (params.lambda1 * params.k1 - params.lambda2 * sol.k)
                / (params.lambda1 * params.k1 + params.lambda2 * sol.k);
    check_interface(sol);
    return sol;
}

AnalyticSolution schrodinger_exact(const SchrodingerParams& params)
{
    const double radicand = params.v0 + params.k1 * params.k1;
    if (!(radicand > 0.0)) throw ConfigError("Schrodinger parameters need V0 + k1^2 > 0");
    AnalyticSolution sol;
    sol.kind = SolutionKind::schrodinger_step;
    sol.schrodinger = params;
    sol.omega = params.k1 * params.k1 + params.k2 * params.k2;
    sol.k1_tilde = std::sqrt(radicand);
    sol.b_coef = params.amplitude * (params.k1 - sol.k1_tilde) / (params.k1 + sol.k1_tilde);
    sol.c_coef = params.amplitude + sol.b_coef;
    check_interface(sol);
    return sol;
}

AnalyticSolution wave_exact(const WaveParams& params)
{
    if (!(params.c1 > 0.0) || !(params.c2 > 0.0)) throw ConfigError("wave speeds must be positive");
    const double radicand = 2.0 * params.c1 * params.c1 / (params.c2 * params.c2) - 1.0;
    if (!(radicand > 0.0)) throw ConfigError("wave parameters are in the total internal reflection regime");
    AnalyticSolution sol;
    sol.kind = SolutionKind::wave_snell;
    sol.wave = params;
    sol.wave_k1 = std::sqrt(radicand);
    const double c1s = params.c1 * params.c1;
    const double c2s = params.c2 * params.c2;
    sol.wave_k2 = (c1s - c2s * sol.wave_k1) / (c1s + c2s * sol.wave_k1);
    check_interface(sol);
    return sol;
}

}  // namespace sbpsat
